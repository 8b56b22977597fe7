#pragma once

// OpenAI-compatible HTTP backend (chat completions, tool calling, embeddings,
// vision captioning). Each call carries the configured timeout and is retried
// on transport errors and 5xx / 429 replies.

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "lave/config.hpp"
#include "lave/digest.hpp"
#include "lave/providers.hpp"

namespace lave {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash

    static Endpoint parse(std::string_view url) {
        auto scheme = url.find("://");
        if (scheme == std::string_view::npos) fail(ErrorCode::ConfigError, "base url needs a scheme: " + std::string(url));
        auto slash = url.find('/', scheme + 3);
        Endpoint ep;
        ep.origin = std::string(url.substr(0, slash));
        if (slash != std::string_view::npos) ep.prefix = std::string(url.substr(slash));
        while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
        return ep;
    }
};

class HttpProvider final : public ProviderBackend {
public:
    explicit HttpProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {
        api_ = Endpoint::parse(cfg_.base_url);
        caption_ = cfg_.caption_base_url.empty() ? api_ : Endpoint::parse(cfg_.caption_base_url);
    }

    std::string complete(const CompletionRequest& req) override {
        json body = {{"model", cfg_.completion_model},
                     {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
                     {"max_tokens", req.max_output_tokens},
                     {"temperature", req.temperature}};
        if (req.structured_mode) body["response_format"] = {{"type", "json_object"}};
        auto resp = post(api_, "/chat/completions", body);
        return message_content(resp);
    }

    FunctionCallResponse call_function(const FunctionCallRequest& req) override {
        json tools = json::array();
        for (const auto& f : req.functions) tools.push_back({{"type", "function"}, {"function", f.to_json()}});
        json body = {{"model", cfg_.function_call_model},
                     {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
                     {"tools", tools},
                     {"tool_choice", "auto"},
                     {"temperature", 0}};
        auto resp = post(api_, "/chat/completions", body);
        try {
            const auto& msg = resp.at("choices").at(0).at("message");
            json fn;
            if (msg.contains("tool_calls") && !msg["tool_calls"].empty())
                fn = msg["tool_calls"][0].at("function");
            else if (msg.contains("function_call"))
                fn = msg["function_call"];
            else
                return {"", json::object()};
            FunctionCallResponse out;
            out.name = fn.at("name").get<std::string>();
            auto args = fn.value("arguments", std::string("{}"));
            out.arguments = args.empty() ? json::object() : json::parse(args);
            return out;
        } catch (const json::exception& e) {
            fail(ErrorCode::ProviderUnavailable, std::string("unexpected function-call response: ") + e.what());
        }
    }

    EmbeddingVector embed(std::string_view text) override {
        json body = {{"model", cfg_.embedding_model}, {"input", text}};
        auto resp = post(api_, "/embeddings", body);
        try {
            return {resp.at("data").at(0).at("embedding").get<std::vector<double>>(), cfg_.embedding_model};
        } catch (const json::exception& e) {
            fail(ErrorCode::ProviderUnavailable, std::string("unexpected embedding response: ") + e.what());
        }
    }

    std::string caption_frame(const FrameImage& frame) override {
        json content = json::array(
            {{{"type", "text"}, {"text", "Describe this video frame in one sentence."}},
             {{"type", "image_url"},
              {"image_url", {{"url", "data:image/jpeg;base64," + digest::base64(frame.jpeg)}}}}});
        json body = {{"model", cfg_.caption_model},
                     {"messages", json::array({{{"role", "user"}, {"content", content}}})},
                     {"max_tokens", 128},
                     {"temperature", 0}};
        return message_content(post(caption_, "/chat/completions", body));
    }

    std::string name() const override { return "http"; }

private:
    static std::string message_content(const json& resp) {
        try {
            const auto& c = resp.at("choices").at(0).at("message").at("content");
            return c.is_null() ? std::string{} : c.get<std::string>();
        } catch (const json::exception& e) {
            fail(ErrorCode::ProviderUnavailable, std::string("unexpected completion response: ") + e.what());
        }
    }

    json post(const Endpoint& ep, const std::string& path, const json& body) {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        httplib::Headers headers;
        if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

        auto secs = std::chrono::duration<double>(cfg_.timeout_s);
        auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(secs);

        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
            httplib::Client cli(ep.origin);
            cli.set_connection_timeout(timeout);
            cli.set_read_timeout(timeout);
            cli.set_write_timeout(timeout);
            auto res = cli.Post(ep.prefix + path, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 401 || res->status == 403)
                fail(ErrorCode::ProviderUnavailable, "authentication rejected (HTTP " + std::to_string(res->status) + ")");
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                fail(ErrorCode::ProviderUnavailable, "HTTP " + std::to_string(res->status) + ": " + res->body);
            try {
                return json::parse(res->body);
            } catch (const json::exception&) {
                fail(ErrorCode::ProviderUnavailable, "provider returned non-JSON body");
            }
        }
        fail(ErrorCode::ProviderUnavailable, ep.origin + ep.prefix + path + ": " + last_error);
    }

    ProviderConfig cfg_;
    Endpoint api_;
    Endpoint caption_;
};

}  // namespace lave
