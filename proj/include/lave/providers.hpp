#pragma once

// Model-service abstraction: text completion, function-call translation,
// text embedding and frame captioning. Backends implement ProviderBackend;
// callers go through ProviderClient, which validates and logs every call.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lave/error.hpp"
#include "lave/util.hpp"

namespace lave {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Token accounting

using TokenCounter = std::function<std::size_t(std::string_view)>;

/// ceil(utf8_bytes / 4). Monotone under concatenation and zero on "".
inline std::size_t heuristic_token_count(std::string_view text) noexcept {
    return (text.size() + 3) / 4;
}

inline TokenCounter default_token_counter() { return &heuristic_token_count; }

// ---------------------------------------------------------------------------
// Request / response types

struct CompletionRequest {
    std::string prompt;
    std::size_t max_output_tokens = 2048;
    double temperature = 0.0;
    bool structured_mode = false;

    void validate() const {
        if (prompt.empty()) fail(ErrorCode::InvalidArgument, "completion prompt is empty");
        if (max_output_tokens < 1) fail(ErrorCode::InvalidArgument, "max_output_tokens must be >= 1");
        if (!(temperature >= 0.0 && temperature <= 2.0))
            fail(ErrorCode::InvalidArgument, "temperature must be in [0, 2]");
    }
};

struct EmbeddingVector {
    std::vector<double> values;
    std::string model_id;

    std::size_t dimension() const noexcept { return values.size(); }
    bool is_finite() const noexcept {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// A single sampled frame. `source` + `timestamp_s` identify it; `jpeg` holds
/// the encoded image the captioner sees.
struct FrameImage {
    std::string source;
    int timestamp_s = 0;
    std::vector<unsigned char> jpeg;

    std::string descriptor() const { return source + "#" + std::to_string(timestamp_s); }
};

/// One callable function as advertised to the function-calling endpoint.
struct FunctionSchema {
    std::string name;
    std::string description;
    json parameters = json::object();  // JSON-schema object

    json to_json() const {
        return {{"name", name}, {"description", description}, {"parameters", parameters}};
    }
};

struct FunctionCallRequest {
    std::string prompt;
    std::vector<FunctionSchema> functions;
};

struct FunctionCallResponse {
    std::string name;
    json arguments = json::object();
};

// ---------------------------------------------------------------------------
// Backend interface

class ProviderBackend {
public:
    virtual ~ProviderBackend() = default;

    virtual std::string complete(const CompletionRequest& req) = 0;
    virtual FunctionCallResponse call_function(const FunctionCallRequest& req) = 0;
    virtual EmbeddingVector embed(std::string_view text) = 0;
    virtual std::string caption_frame(const FrameImage& frame) = 0;

    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Call log

struct ProviderLogRecord {
    std::size_t seq = 0;
    std::string timestamp;
    std::string op;
    json request;
    json response;  // null on error
    std::string error_code;

    json to_json() const {
        json j = {{"seq", seq}, {"ts", timestamp}, {"op", op}, {"request", request}};
        if (error_code.empty())
            j["response"] = response;
        else
            j["error"] = error_code;
        return j;
    }
};

/// Append-only request/response log; optionally mirrored to an NDJSON file.
class ProviderLog {
public:
    ProviderLog() = default;
    explicit ProviderLog(std::filesystem::path file) : file_(std::move(file)) {}

    void append(ProviderLogRecord rec) {
        std::lock_guard lock(mu_);
        rec.seq = records_.size();
        rec.timestamp = util::iso8601_now();
        if (file_) util::append_line(*file_, rec.to_json().dump());
        records_.push_back(std::move(rec));
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return records_.size();
    }

    std::vector<ProviderLogRecord> records() const {
        std::lock_guard lock(mu_);
        return records_;
    }

private:
    mutable std::mutex mu_;
    std::vector<ProviderLogRecord> records_;
    std::optional<std::filesystem::path> file_;
};

// ---------------------------------------------------------------------------
// Client facade

class ProviderClient {
public:
    ProviderClient(std::shared_ptr<ProviderBackend> backend, std::size_t embedding_dimension,
                   std::shared_ptr<ProviderLog> log = std::make_shared<ProviderLog>())
        : backend_(std::move(backend)), dimension_(embedding_dimension), log_(std::move(log)) {
        if (!backend_) fail(ErrorCode::InvalidArgument, "provider backend is null");
        if (dimension_ == 0) fail(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
    }

    std::string complete(const CompletionRequest& req) {
        req.validate();
        json jreq = {{"prompt", req.prompt},
                     {"max_output_tokens", req.max_output_tokens},
                     {"temperature", req.temperature},
                     {"structured_mode", req.structured_mode}};
        return logged("complete", std::move(jreq), [&] {
            auto text = backend_->complete(req);
            if (util::trim(text).empty()) fail(ErrorCode::ResponseEmpty, "provider returned a blank completion");
            return std::pair{text, json(text)};
        });
    }

    FunctionCallResponse call_function(const FunctionCallRequest& req) {
        if (req.prompt.empty()) fail(ErrorCode::InvalidArgument, "function-call prompt is empty");
        json fns = json::array();
        for (const auto& f : req.functions) fns.push_back(f.to_json());
        json jreq = {{"prompt", req.prompt}, {"functions", fns}};
        return logged("call_function", std::move(jreq), [&] {
            auto resp = backend_->call_function(req);
            return std::pair{resp, json{{"name", resp.name}, {"arguments", resp.arguments}}};
        });
    }

    EmbeddingVector embed(std::string_view text) {
        if (text.empty()) fail(ErrorCode::InvalidArgument, "cannot embed empty text");
        return logged("embed", json{{"text", text}}, [&] {
            auto vec = backend_->embed(text);
            if (vec.dimension() != dimension_)
                fail(ErrorCode::DimensionMismatch, "provider returned a " + std::to_string(vec.dimension()) +
                                                       "-dim embedding, expected " + std::to_string(dimension_));
            if (!vec.is_finite()) fail(ErrorCode::InvalidEmbedding, "provider returned non-finite embedding values");
            return std::pair{vec, json{{"dimension", vec.dimension()}, {"model_id", vec.model_id}}};
        });
    }

    std::string caption_frame(const FrameImage& frame) {
        return logged("caption_frame", json{{"frame", frame.descriptor()}, {"bytes", frame.jpeg.size()}}, [&] {
            if (frame.jpeg.empty()) fail(ErrorCode::UnreadableFrame, "frame " + frame.descriptor() + " has no image data");
            auto text = backend_->caption_frame(frame);
            if (util::trim(text).empty()) fail(ErrorCode::ResponseEmpty, "blank caption for " + frame.descriptor());
            return std::pair{text, json(text)};
        });
    }

    /// Captions in input order.
    std::vector<std::string> caption_frames(std::span<const FrameImage> frames) {
        std::vector<std::string> out;
        out.reserve(frames.size());
        for (const auto& f : frames) out.push_back(caption_frame(f));
        return out;
    }

    std::size_t embedding_dimension() const noexcept { return dimension_; }
    const ProviderLog& log() const noexcept { return *log_; }
    std::shared_ptr<ProviderLog> shared_log() const noexcept { return log_; }
    ProviderBackend& backend() noexcept { return *backend_; }

private:
    template <typename Fn>
    auto logged(std::string op, json request, Fn&& fn) -> decltype(fn().first) {
        ProviderLogRecord rec;
        rec.op = std::move(op);
        rec.request = std::move(request);
        try {
            auto [value, jresp] = fn();
            rec.response = std::move(jresp);
            log_->append(std::move(rec));
            return value;
        } catch (const Error& e) {
            rec.error_code = std::string(e.code_name());
            log_->append(std::move(rec));
            throw;
        }
    }

    std::shared_ptr<ProviderBackend> backend_;
    std::size_t dimension_;
    std::shared_ptr<ProviderLog> log_;
};

}  // namespace lave
