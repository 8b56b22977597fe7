#pragma once

// LLM-powered editing functions: footage overview, idea brainstorming,
// storyboarding, clip trimming, plus the retrieval wrapper. Each function is
// pure with respect to project state; UI changes are described by the
// returned UiEffect and applied by the caller.

#include <charconv>
#include <set>
#include <variant>

#include "lave/narration.hpp"
#include "lave/structured.hpp"
#include "lave/templates.hpp"
#include "lave/vectorstore.hpp"

namespace lave {

// ---------------------------------------------------------------------------
// Outcomes

struct NoEffect {
    friend bool operator==(const NoEffect&, const NoEffect&) = default;
};
struct GalleryReorder {
    RankedResult ranking;
    friend bool operator==(const GalleryReorder&, const GalleryReorder&) = default;
};
struct TimelineReorder {
    std::vector<AssetId> order;
    friend bool operator==(const TimelineReorder&, const TimelineReorder&) = default;
};
struct ClipTrim {
    AssetId asset_id = 0;
    int start_s = 0;
    int end_s = 0;
    std::string rationale;
    friend bool operator==(const ClipTrim&, const ClipTrim&) = default;
};

using UiEffect = std::variant<NoEffect, GalleryReorder, TimelineReorder, ClipTrim>;

struct FunctionOutcome {
    std::string chat_text;
    UiEffect ui_effect = NoEffect{};
};

struct StoryboardResult {
    std::string storyboard_text;
    std::vector<AssetId> video_ids;
};

struct TrimResult {
    int start_s = 0;
    int end_s = 0;
    std::string rationale;
    bool matched = false;
};

// ---------------------------------------------------------------------------
// Context

struct FunctionContext {
    std::shared_ptr<ProviderClient> provider;
    TemplateSet templates;
    TokenCounter count_tokens = default_token_counter();
    std::size_t context_limit = 8192;

    std::size_t output_reserve() const noexcept { return context_limit / 4; }
    std::size_t prompt_budget() const noexcept { return context_limit - output_reserve(); }

    std::string complete(const std::string& prompt, double temperature, bool structured = false) const {
        auto tokens = count_tokens(prompt);
        if (tokens > prompt_budget())
            fail(ErrorCode::CorpusTooLarge, "prompt needs " + std::to_string(tokens) + " tokens; the budget is " +
                                                std::to_string(prompt_budget()));
        CompletionRequest req;
        req.prompt = prompt;
        req.temperature = temperature;
        req.max_output_tokens = output_reserve();
        req.structured_mode = structured;
        return provider->complete(req);
    }
};

inline constexpr double kStructuredTemperature = 0.0;
inline constexpr double kBrainstormTemperature = 0.7;
inline constexpr std::string_view kDefaultCreativeGuidance = "general";

// ---------------------------------------------------------------------------
// Prompt assembly

inline std::string render_narration_line(const VideoAsset& a) {
    return "ID=" + std::to_string(a.id) + " | " + a.narration.title + ": " + a.narration.summary + "\n";
}

inline std::string render_narrations(const std::vector<VideoAsset>& assets) {
    std::string s = "Videos:\n";
    for (const auto& a : assets) s += render_narration_line(a);
    return s;
}

inline std::string overview_prompt(const TemplateSet& t, const std::vector<VideoAsset>& gallery) {
    return t.overview + "\n\n" + render_narrations(gallery);
}

inline std::string brainstorm_prompt(const TemplateSet& t, const std::vector<VideoAsset>& gallery,
                                     std::string_view guidance) {
    return t.brainstorm + "\n\nCreative guidance: " + std::string(guidance) + "\n\n" + render_narrations(gallery);
}

inline std::string storyboard_prompt(const TemplateSet& t, const std::vector<VideoAsset>& timeline,
                                     const std::optional<std::string>& guidance) {
    std::string g = guidance && !util::trim(*guidance).empty()
                        ? "Narrative guidance: " + *guidance
                        : std::string("No narrative guidance was provided. Create a storyline that fits the "
                                      "videos below and build the storyboard from it.");
    return t.storyboard + "\n\n" + g + "\n\n" + render_narrations(timeline);
}

inline std::string trim_prompt(const TemplateSet& t, const VideoAsset& asset, std::string_view command) {
    std::string p = t.trim + "\n\nTrimming command: " + std::string(command) + "\n\nFrame captions:\n";
    for (const auto& c : asset.frame_captions) p += std::to_string(c.timestamp_s) + ": " + c.caption + "\n";
    return p;
}

// ---------------------------------------------------------------------------
// Overview / brainstorm

inline FunctionOutcome overview(const FunctionContext& ctx, const std::vector<VideoAsset>& gallery) {
    if (gallery.empty()) fail(ErrorCode::EmptyGallery, "the gallery has no videos to summarize");
    return {ctx.complete(overview_prompt(ctx.templates, gallery), kStructuredTemperature), NoEffect{}};
}

inline FunctionOutcome brainstorm(const FunctionContext& ctx, const std::vector<VideoAsset>& gallery,
                                  std::string_view creative_guidance = kDefaultCreativeGuidance) {
    if (gallery.empty()) fail(ErrorCode::EmptyGallery, "the gallery has no videos to brainstorm with");
    if (util::trim(creative_guidance).empty()) creative_guidance = kDefaultCreativeGuidance;
    return {ctx.complete(brainstorm_prompt(ctx.templates, gallery, creative_guidance), kBrainstormTemperature),
            NoEffect{}};
}

// ---------------------------------------------------------------------------
// Storyboard

namespace detail {

inline std::optional<std::int64_t> as_integer(const json& v) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
        return std::nullopt;
    }
    if (v.is_string()) {
        auto s = util::trim(v.get_ref<const std::string&>());
        if (s.empty()) return std::nullopt;
        std::int64_t n = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc{} && ptr == s.data() + s.size()) return n;
    }
    return std::nullopt;
}

}  // namespace detail

/// Empty when `ids` is a permutation of `expected`; otherwise a description
/// of every missing, duplicated and foreign id.
inline std::string permutation_violation(const std::vector<AssetId>& ids, const std::vector<AssetId>& expected) {
    std::set<AssetId> want(expected.begin(), expected.end());
    std::map<AssetId, int> seen;
    for (auto id : ids) ++seen[id];
    std::string missing, dup, foreign;
    for (auto id : want)
        if (!seen.count(id)) missing += (missing.empty() ? "" : ", ") + std::to_string(id);
    for (auto [id, n] : seen) {
        if (!want.count(id)) foreign += (foreign.empty() ? "" : ", ") + std::to_string(id);
        else if (n > 1) dup += (dup.empty() ? "" : ", ") + std::to_string(id);
    }
    std::string msg;
    if (!missing.empty()) msg += "missing ids [" + missing + "]";
    if (!dup.empty()) msg += std::string(msg.empty() ? "" : "; ") + "duplicate ids [" + dup + "]";
    if (!foreign.empty()) msg += std::string(msg.empty() ? "" : "; ") + "unknown ids [" + foreign + "]";
    return msg;
}

/// Validates one storyboard answer. Throws MalformedStructuredOutput or
/// PermutationViolation.
inline StoryboardResult parse_storyboard(std::string_view completion, const std::vector<AssetId>& expected) {
    auto obj = structured::last_object(completion);
    if (!obj) fail(ErrorCode::MalformedStructuredOutput, "no dictionary found in the storyboard answer");
    if (!obj->contains("video_ids") || !(*obj)["video_ids"].is_array())
        fail(ErrorCode::MalformedStructuredOutput, "storyboard answer lacks a \"video_ids\" list");
    if (!obj->contains("storyboard"))
        fail(ErrorCode::MalformedStructuredOutput, "storyboard answer lacks a \"storyboard\" entry");

    StoryboardResult r;
    const auto& sb = (*obj)["storyboard"];
    if (sb.is_string()) {
        r.storyboard_text = sb.get<std::string>();
    } else if (sb.is_array()) {
        for (const auto& line : sb) {
            if (!line.is_string()) fail(ErrorCode::MalformedStructuredOutput, "storyboard scenes must be text");
            if (!r.storyboard_text.empty()) r.storyboard_text += "\n";
            r.storyboard_text += line.get<std::string>();
        }
    } else {
        fail(ErrorCode::MalformedStructuredOutput, "\"storyboard\" must be a string");
    }
    for (const auto& v : (*obj)["video_ids"]) {
        auto id = detail::as_integer(v);
        if (!id) fail(ErrorCode::MalformedStructuredOutput, "video id " + v.dump() + " is not an integer");
        r.video_ids.push_back(*id);
    }
    if (auto why = permutation_violation(r.video_ids, expected); !why.empty())
        fail(ErrorCode::PermutationViolation, "storyboard video_ids are not a permutation of the timeline: " + why);
    return r;
}

inline std::string render_scenes(const std::vector<AssetId>& order, const std::vector<VideoAsset>& assets) {
    std::string out;
    int scene = 1;
    for (auto id : order) {
        auto it = std::find_if(assets.begin(), assets.end(), [&](const auto& a) { return a.id == id; });
        std::string title = it == assets.end() ? std::string("Video") : it->narration.title;
        out += "Scene " + std::to_string(scene++) + ": " + title + " (ID=" + std::to_string(id) + ")\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

/// One completion, one repair re-ask naming the violation, then failure.
/// Never mutates anything: the caller applies the TimelineReorder effect.
inline std::pair<StoryboardResult, FunctionOutcome> storyboard(const FunctionContext& ctx,
                                                               const std::vector<VideoAsset>& timeline_assets,
                                                               const std::optional<std::string>& narrative_guidance) {
    if (timeline_assets.empty()) fail(ErrorCode::EmptyTimeline, "add videos to the timeline before storyboarding");
    std::vector<AssetId> expected;
    for (const auto& a : timeline_assets) expected.push_back(a.id);

    auto prompt = storyboard_prompt(ctx.templates, timeline_assets, narrative_guidance);
    StoryboardResult result;
    try {
        result = parse_storyboard(ctx.complete(prompt, kStructuredTemperature, true), expected);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedStructuredOutput && e.code() != ErrorCode::PermutationViolation) throw;
        std::string ids;
        for (auto id : expected) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
        prompt += "\nYour previous answer was invalid: " + std::string(e.what()) +
                  ". Answer again with a dictionary with keys \"storyboard\" and \"video_ids\", where "
                  "\"video_ids\" lists each of these IDs exactly once: [" + ids + "].\n";
        result = parse_storyboard(ctx.complete(prompt, kStructuredTemperature, true), expected);
    }
    FunctionOutcome outcome;
    outcome.chat_text = util::trim(result.storyboard_text).empty() ? render_scenes(result.video_ids, timeline_assets)
                                                                    : result.storyboard_text;
    outcome.ui_effect = TimelineReorder{result.video_ids};
    return {result, outcome};
}

// ---------------------------------------------------------------------------
// Trim

/// Validates one trim answer against a clip of `duration_s` seconds. Throws
/// MalformedStructuredOutput.
inline TrimResult parse_trim(std::string_view completion, int duration_s) {
    auto obj = structured::final_answer_object(completion);
    if (!obj) fail(ErrorCode::MalformedStructuredOutput, "no Final Answer dictionary in the trim answer");
    if (!obj->contains("segment") || !(*obj)["segment"].is_array())
        fail(ErrorCode::MalformedStructuredOutput, "trim answer lacks a \"segment\" list");
    const auto& seg = (*obj)["segment"];
    TrimResult r;
    if (seg.empty()) return r;  // no segment matched
    if (seg.size() < 2 || seg.size() > 3)
        fail(ErrorCode::MalformedStructuredOutput, "\"segment\" must be [start, end, rationale]");
    auto start = detail::as_integer(seg[0]);
    auto end = detail::as_integer(seg[1]);
    if (!start || !end) fail(ErrorCode::MalformedStructuredOutput, "segment start and end must be integers");
    if (*start > *end) fail(ErrorCode::MalformedStructuredOutput, "segment start is after its end");
    if (seg.size() == 3) {
        if (!seg[2].is_string()) fail(ErrorCode::MalformedStructuredOutput, "segment rationale must be text");
        r.rationale = seg[2].get<std::string>();
    }
    auto clamp = [&](std::int64_t v) { return static_cast<int>(std::clamp<std::int64_t>(v, 0, duration_s)); };
    r.start_s = clamp(*start);
    r.end_s = clamp(*end);
    r.matched = r.start_s < r.end_s;
    if (!r.matched) r.start_s = r.end_s = 0;
    return r;
}

/// Reasons over the whole clip's captions; the current window does not
/// constrain the answer.
inline TrimResult trim_clip(const FunctionContext& ctx, const VideoAsset& asset, std::string_view command) {
    if (util::trim(command).empty()) fail(ErrorCode::InvalidArgument, "trimming command is empty");
    if (asset.frame_captions.empty())
        fail(ErrorCode::InvalidArgument, "asset " + std::to_string(asset.id) + " has no frame captions");
    auto prompt = trim_prompt(ctx.templates, asset, command);
    try {
        return parse_trim(ctx.complete(prompt, kStructuredTemperature), asset.duration_s);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedStructuredOutput) throw;
        prompt += "\nYour previous answer was invalid: " + std::string(e.what()) +
                  ". Reply with Final Answer: {\"segment\": [start, end, \"rationale\"]} using integer seconds, "
                  "or an empty list if nothing matches.\n";
        return parse_trim(ctx.complete(prompt, kStructuredTemperature), asset.duration_s);
    }
}

// ---------------------------------------------------------------------------
// Retrieval

inline FunctionOutcome retrieve_and_present(const VectorStore& store, const std::vector<VideoAsset>& gallery,
                                            std::string_view query, std::size_t listed = 3) {
    auto ranking = store.retrieve(query);
    std::string text = "Here are the videos most relevant to \"" + std::string(util::trim(query)) +
                       "\"; the gallery is now sorted by relevance:";
    for (std::size_t i = 0; i < ranking.size() && i < listed; ++i) {
        auto id = ranking[i].asset_id;
        auto it = std::find_if(gallery.begin(), gallery.end(), [&](const auto& a) { return a.id == id; });
        text += "\n" + std::to_string(i + 1) + ". " + (it == gallery.end() ? std::string("Video") : it->narration.title) +
                " (ID=" + std::to_string(id) + ")";
    }
    return {text, GalleryReorder{std::move(ranking)}};
}

}  // namespace lave
