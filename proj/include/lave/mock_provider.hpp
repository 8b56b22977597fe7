#pragma once

// Deterministic scripted provider. Every test and headless replay runs on it.
//
// Script JSON:
//   {
//     "embedding_dimension": 1536, "seed": 0,
//     "rules": [
//       {"kind": "complete", "contains": "GOAL", "response": "...", "uses": 1},
//       {"kind": "function_call", "regex": "^Retrieve", "response": {"name": "Retrieve", "arguments": {...}}},
//       {"kind": "embed", "contains": "beach", "dimension": 512},
//       {"kind": "caption", "contains": "clip.avi#3", "error": "unreadable_frame"}
//     ],
//     "fallback": {"complete": "..."}
//   }
// Rules are evaluated in order per call kind; the first match wins. A rule with
// "uses" is retired after that many matches.

#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "lave/providers.hpp"

namespace lave {

enum class CallKind { Complete, FunctionCall, Embed, Caption };

inline CallKind parse_call_kind(std::string_view s) {
    if (s == "complete") return CallKind::Complete;
    if (s == "function_call") return CallKind::FunctionCall;
    if (s == "embed") return CallKind::Embed;
    if (s == "caption") return CallKind::Caption;
    fail(ErrorCode::ConfigError, "unknown mock rule kind: " + std::string(s));
}

inline std::optional<ErrorCode> parse_error_code(std::string_view s) {
    for (auto code : {ErrorCode::ProviderUnavailable, ErrorCode::ResponseEmpty, ErrorCode::DimensionMismatch,
                      ErrorCode::UnreadableFrame, ErrorCode::InvalidEmbedding}) {
        if (code_name(code) == s) return code;
    }
    return std::nullopt;
}

struct ScriptRule {
    CallKind kind = CallKind::Complete;
    std::optional<std::string> contains;
    std::optional<std::string> pattern;
    std::optional<std::size_t> uses;

    std::string text;                     // complete / caption
    std::optional<FunctionCallResponse> call;
    std::optional<std::vector<double>> vector;
    std::optional<std::size_t> dimension;
    std::optional<ErrorCode> error;

    bool matches(std::string_view subject) const {
        if (uses && *uses == 0) return false;
        if (contains && subject.find(*contains) == std::string_view::npos) return false;
        if (pattern && !std::regex_search(subject.begin(), subject.end(), std::regex(*pattern))) return false;
        return true;
    }
};

struct ProviderScript {
    std::vector<ScriptRule> rules;
    std::string fallback_completion;
    std::size_t embedding_dimension = 1536;
    std::uint64_t seed = 0;

    static ProviderScript from_json(const json& j) {
        ProviderScript s;
        s.embedding_dimension = j.value("embedding_dimension", std::size_t{1536});
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("fallback")) s.fallback_completion = j["fallback"].value("complete", std::string{});
        for (const auto& r : j.value("rules", json::array())) {
            ScriptRule rule;
            rule.kind = parse_call_kind(r.at("kind").get<std::string>());
            if (r.contains("contains")) rule.contains = r["contains"].get<std::string>();
            if (r.contains("regex")) rule.pattern = r["regex"].get<std::string>();
            if (r.contains("uses")) rule.uses = r["uses"].get<std::size_t>();
            if (r.contains("error")) {
                auto code = parse_error_code(r["error"].get<std::string>());
                if (!code) fail(ErrorCode::ConfigError, "unknown mock error: " + r["error"].dump());
                rule.error = code;
            }
            if (r.contains("response")) {
                const auto& resp = r["response"];
                if (rule.kind == CallKind::FunctionCall) {
                    FunctionCallResponse call;
                    call.name = resp.at("name").get<std::string>();
                    call.arguments = resp.value("arguments", json::object());
                    rule.call = std::move(call);
                } else {
                    rule.text = resp.get<std::string>();
                }
            }
            if (r.contains("vector")) rule.vector = r["vector"].get<std::vector<double>>();
            if (r.contains("dimension")) rule.dimension = r["dimension"].get<std::size_t>();
            s.rules.push_back(std::move(rule));
        }
        return s;
    }

    ProviderScript& on_complete(std::string contains, std::string response,
                                std::optional<std::size_t> uses = std::nullopt) {
        ScriptRule r;
        r.kind = CallKind::Complete;
        if (!contains.empty()) r.contains = std::move(contains);
        r.text = std::move(response);
        r.uses = uses;
        rules.push_back(std::move(r));
        return *this;
    }

    ProviderScript& on_call(std::string contains, std::string name, json arguments = json::object(),
                            std::optional<std::size_t> uses = std::nullopt) {
        ScriptRule r;
        r.kind = CallKind::FunctionCall;
        if (!contains.empty()) r.contains = std::move(contains);
        r.call = FunctionCallResponse{std::move(name), std::move(arguments)};
        r.uses = uses;
        rules.push_back(std::move(r));
        return *this;
    }

    ProviderScript& fail_on(CallKind kind, std::string contains, ErrorCode code,
                            std::optional<std::size_t> uses = std::nullopt) {
        ScriptRule r;
        r.kind = kind;
        if (!contains.empty()) r.contains = std::move(contains);
        r.error = code;
        r.uses = uses;
        rules.push_back(std::move(r));
        return *this;
    }
};

/// Maps text to a dense pseudo-random projection of its bag of words, so that
/// identical word multisets embed identically and shared words raise cosine
/// similarity. Text without word characters maps to the zero vector.
inline std::vector<double> hashed_bag_of_words(std::string_view text, std::size_t dimension, std::uint64_t seed) {
    std::vector<double> v(dimension, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::uint64_t state = util::fnv1a64(token) ^ seed;
        for (std::size_t d = 0; d < dimension; ++d) {
            auto bits = util::splitmix64(state) >> 11;  // 53 bits
            v[d] += static_cast<double>(bits) * (2.0 / 9007199254740992.0) - 1.0;
        }
        token.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80)
            token.push_back(static_cast<char>(std::tolower(c)));
        else
            flush();
    }
    flush();
    return v;
}

class MockProvider final : public ProviderBackend {
public:
    explicit MockProvider(ProviderScript script = {}) : script_(std::move(script)) {}

    std::string complete(const CompletionRequest& req) override {
        std::lock_guard lock(mu_);
        if (auto* rule = match(CallKind::Complete, req.prompt)) return rule->text;
        return script_.fallback_completion;
    }

    FunctionCallResponse call_function(const FunctionCallRequest& req) override {
        std::lock_guard lock(mu_);
        if (auto* rule = match(CallKind::FunctionCall, req.prompt)) {
            if (rule->call) return *rule->call;
        }
        return passthrough_call(req);
    }

    EmbeddingVector embed(std::string_view text) override {
        std::lock_guard lock(mu_);
        std::size_t dim = script_.embedding_dimension;
        if (auto* rule = match(CallKind::Embed, text)) {
            if (rule->vector) return {*rule->vector, "mock-embedding"};
            if (rule->dimension) dim = *rule->dimension;
        }
        return {hashed_bag_of_words(text, dim, script_.seed), "mock-embedding"};
    }

    std::string caption_frame(const FrameImage& frame) override {
        std::lock_guard lock(mu_);
        if (auto* rule = match(CallKind::Caption, frame.descriptor())) return rule->text;
        return "frame " + std::to_string(frame.timestamp_s) + " caption";
    }

    std::string name() const override { return "mock"; }

    std::size_t embedding_dimension() const noexcept { return script_.embedding_dimension; }

    /// Name passthrough; the action context becomes the function's single text argument.
    static FunctionCallResponse passthrough_call(const FunctionCallRequest& req) {
        std::string_view desc = util::trim(req.prompt);
        auto colon = desc.find(':');
        std::string name(util::trim(desc.substr(0, colon)));
        std::string context = colon == std::string_view::npos ? std::string{}
                                                              : std::string(util::trim(desc.substr(colon + 1)));
        FunctionCallResponse resp{name, json::object()};
        for (const auto& fn : req.functions) {
            if (util::to_lower(fn.name) != util::to_lower(name)) continue;
            resp.name = fn.name;
            const auto& props = fn.parameters.value("properties", json::object());
            if (!props.empty() && !context.empty()) resp.arguments[props.begin().key()] = context;
        }
        return resp;
    }

private:
    const ScriptRule* match(CallKind kind, std::string_view subject) {
        for (auto& rule : script_.rules) {
            if (rule.kind != kind || !rule.matches(subject)) continue;
            if (rule.uses) --*rule.uses;
            if (rule.error) fail(*rule.error, "scripted failure");
            return &rule;
        }
        return nullptr;
    }

    std::mutex mu_;
    ProviderScript script_;
};

inline std::shared_ptr<ProviderClient> make_mock_client(ProviderScript script = {},
                                                        std::shared_ptr<ProviderLog> log = std::make_shared<ProviderLog>()) {
    auto dim = script.embedding_dimension;
    return std::make_shared<ProviderClient>(std::make_shared<MockProvider>(std::move(script)), dim, std::move(log));
}

}  // namespace lave
