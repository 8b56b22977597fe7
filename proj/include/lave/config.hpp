#pragma once

// Key-value configuration file:
//
//   # comment
//   provider.kind = http
//   provider.base_url = https://api.openai.com/v1
//   provider.api_key_env = OPENAI_API_KEY
//
// One `key = value` per line; blank lines and `#` comments are ignored.
// Unknown keys are rejected so that typos surface at startup.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include "lave/providers.hpp"

namespace lave {

struct ProviderConfig {
    std::string kind = "mock";  // "mock" or "http"
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";
    std::string completion_model = "gpt-4";
    std::string function_call_model = "gpt-4-0613";
    std::string embedding_model = "text-embedding-ada-002";
    std::string caption_model = "llava-v1";
    std::string caption_base_url;  // empty: same as base_url
    std::size_t embedding_dimension = 1536;
    double timeout_s = 60.0;
    int retries = 1;
    std::string log_file;
    std::string mock_script;
};

struct Config {
    ProviderConfig provider;
    std::size_t memory_budget = 6000;
    std::size_t context_limit = 8192;
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::string templates_dir;

    /// Generation reserve: 25% of the context window is kept free for output.
    std::size_t output_reserve() const noexcept { return context_limit / 4; }

    json to_redacted_json() const {
        const char* key = std::getenv(provider.api_key_env.c_str());
        return {{"provider",
                 {{"kind", provider.kind},
                  {"base_url", provider.base_url},
                  {"api_key_env", provider.api_key_env},
                  {"api_key", key && *key ? "<redacted>" : "<unset>"},
                  {"completion_model", provider.completion_model},
                  {"function_call_model", provider.function_call_model},
                  {"embedding_model", provider.embedding_model},
                  {"caption_model", provider.caption_model},
                  {"embedding_dimension", provider.embedding_dimension},
                  {"timeout_s", provider.timeout_s},
                  {"retries", provider.retries}}},
                {"agent", {{"memory_budget", memory_budget}, {"context_limit", context_limit}}},
                {"server", {{"bind", bind}, {"port", port}}}};
    }
};

namespace detail {

inline std::size_t to_size(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long n = std::stoll(v, &pos);
        if (pos != v.size() || n < 0) throw std::invalid_argument(v);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        fail(ErrorCode::ConfigError, key + ": expected a nonnegative integer, got '" + v + "'");
    }
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(ErrorCode::ConfigError, key + ": expected a number, got '" + v + "'");
    }
}

}  // namespace detail

inline Config parse_config(std::string_view text) {
    Config cfg;
    auto& p = cfg.provider;
    std::size_t lineno = 0;
    for (auto raw : util::split_lines(text)) {
        ++lineno;
        auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        std::string key(util::trim(line.substr(0, eq)));
        std::string val(util::trim(line.substr(eq + 1)));

        if (key == "provider.kind") {
            if (val != "mock" && val != "http") fail(ErrorCode::ConfigError, "provider.kind must be mock or http");
            p.kind = val;
        } else if (key == "provider.base_url") p.base_url = val;
        else if (key == "provider.caption_base_url") p.caption_base_url = val;
        else if (key == "provider.api_key_env") p.api_key_env = val;
        else if (key == "provider.completion_model") p.completion_model = val;
        else if (key == "provider.function_call_model") p.function_call_model = val;
        else if (key == "provider.embedding_model") p.embedding_model = val;
        else if (key == "provider.caption_model") p.caption_model = val;
        else if (key == "provider.embedding_dimension") p.embedding_dimension = detail::to_size(key, val);
        else if (key == "provider.timeout_s") p.timeout_s = detail::to_double(key, val);
        else if (key == "provider.retries") p.retries = static_cast<int>(detail::to_size(key, val));
        else if (key == "provider.log_file") p.log_file = val;
        else if (key == "mock.script") p.mock_script = val;
        else if (key == "agent.memory_budget") cfg.memory_budget = detail::to_size(key, val);
        else if (key == "agent.context_limit") cfg.context_limit = detail::to_size(key, val);
        else if (key == "server.bind") cfg.bind = val;
        else if (key == "server.port") cfg.port = static_cast<int>(detail::to_size(key, val));
        else if (key == "templates.dir") cfg.templates_dir = val;
        else fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (p.embedding_dimension == 0) fail(ErrorCode::ConfigError, "provider.embedding_dimension must be >= 1");
    return cfg;
}

inline Config load_config(const std::filesystem::path& path) {
    auto cfg = parse_config(util::read_file(path));
    // Relative paths resolve against the config file's directory.
    auto base = path.parent_path();
    auto resolve = [&](std::string& s) {
        if (!s.empty() && std::filesystem::path(s).is_relative()) s = (base / s).string();
    };
    resolve(cfg.provider.mock_script);
    resolve(cfg.provider.log_file);
    resolve(cfg.templates_dir);
    return cfg;
}

}  // namespace lave
