#pragma once

// Extraction of structured objects from free-form model output. Models wrap
// their answer in prose or emit Python-literal dictionaries; we scan for the
// last brace-balanced object that parses as JSON, directly or after
// Python-literal normalization.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lave::structured {

using json = nlohmann::json;

/// Rewrites Python literal syntax to JSON: single-quoted strings, True/False/None,
/// trailing commas. Double-quoted strings pass through untouched.
inline std::string python_to_json(std::string_view src) {
    std::string out;
    out.reserve(src.size());
    std::size_t i = 0;
    auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < src.size()) {
        char c = src[i];
        if (c == '"' || c == '\'') {
            char quote = c;
            out.push_back('"');
            ++i;
            while (i < src.size() && src[i] != quote) {
                if (src[i] == '\\' && i + 1 < src.size()) {
                    if (src[i + 1] == '\'' ) out.push_back('\'');
                    else { out.push_back('\\'); out.push_back(src[i + 1]); }
                    i += 2;
                    continue;
                }
                if (src[i] == '"' && quote == '\'') out += "\\\"";
                else if (src[i] == '\n') out += "\\n";
                else out.push_back(src[i]);
                ++i;
            }
            out.push_back('"');
            ++i;
            continue;
        }
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < src.size() && std::isspace(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && (src[j] == '}' || src[j] == ']')) {
                ++i;
                continue;
            }
        }
        if (std::isalpha(static_cast<unsigned char>(c)) && (i == 0 || !is_ident(src[i - 1]))) {
            std::size_t j = i;
            while (j < src.size() && is_ident(src[j])) ++j;
            auto word = src.substr(i, j - i);
            if (word == "True") out += "true";
            else if (word == "False") out += "false";
            else if (word == "None") out += "null";
            else out += word;
            i = j;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

/// [start, end] spans of brace-balanced regions, honoring quoted strings.
inline std::vector<std::pair<std::size_t, std::size_t>> balanced_objects(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        char quote = 0;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (quote) {
                if (c == '\\') ++i;
                else if (c == quote) quote = 0;
                continue;
            }
            if (c == '"' || c == '\'') {
                // An apostrophe inside prose ("don't") is not a quote.
                if (c == '\'' && i > 0 && std::isalpha(static_cast<unsigned char>(text[i - 1]))) continue;
                quote = c;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    spans.emplace_back(start, i);
                    break;
                }
            }
        }
    }
    return spans;
}

inline std::optional<json> parse_object(std::string_view candidate) {
    for (int pass = 0; pass < 2; ++pass) {
        std::string src = pass == 0 ? std::string(candidate) : python_to_json(candidate);
        auto j = json::parse(src, nullptr, /*allow_exceptions=*/false);
        if (!j.is_discarded() && j.is_object()) return j;
    }
    return std::nullopt;
}

/// The last well-formed object in `text`: the candidate ending latest wins,
/// and among those the outermost.
inline std::optional<json> last_object(std::string_view text) {
    auto spans = balanced_objects(text);
    std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [s, e] : spans)
        if (auto j = parse_object(text.substr(s, e - s + 1))) return j;
    return std::nullopt;
}

/// First object after the last "Final Answer:" marker, else the last object anywhere.
inline std::optional<json> final_answer_object(std::string_view text) {
    auto marker = text.rfind("Final Answer:");
    if (marker != std::string_view::npos) {
        auto tail = text.substr(marker);
        auto spans = balanced_objects(tail);
        std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return a.second > b.second;
        });
        for (const auto& [s, e] : spans)
            if (auto j = parse_object(tail.substr(s, e - s + 1))) return j;
    }
    return last_object(text);
}

}  // namespace lave::structured
