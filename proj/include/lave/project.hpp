#pragma once

// Editing-session document: gallery, timeline with trims and undo, preview
// rendering and the on-disk project file.
//
// Project directory layout:
//   project.json   the document (schema_version 1)
//   cache/         narration cache (see NarrationCache)
//   index/         persisted embeddings, one file per asset
//   frames/        per-second frames and start/mid/end thumbnails
//   sessions/      append-only chat transcript
//   output/        rendered previews with their manifests

#include <deque>
#include <set>

#include "lave/digest.hpp"
#include "lave/media.hpp"
#include "lave/narration.hpp"

namespace lave {

// ---------------------------------------------------------------------------
// Gallery

class Gallery {
public:
    const std::vector<VideoAsset>& assets() const noexcept { return assets_; }
    const std::vector<AssetId>& display_order() const noexcept { return display_order_; }
    const std::set<AssetId>& selection() const noexcept { return selection_; }
    bool empty() const noexcept { return assets_.empty(); }
    std::size_t size() const noexcept { return assets_.size(); }

    /// Ingestion is the only way membership changes. Re-adding an id replaces the asset.
    void add_asset(VideoAsset asset) {
        auto it = std::find_if(assets_.begin(), assets_.end(), [&](const auto& a) { return a.id == asset.id; });
        if (it != assets_.end()) {
            *it = std::move(asset);
            return;
        }
        display_order_.push_back(asset.id);
        assets_.push_back(std::move(asset));
    }

    const VideoAsset* find(AssetId id) const noexcept {
        for (const auto& a : assets_)
            if (a.id == id) return &a;
        return nullptr;
    }

    const VideoAsset& at(AssetId id) const {
        if (auto* a = find(id)) return *a;
        fail(ErrorCode::UnknownAsset, "no video with ID=" + std::to_string(id) + " in the gallery");
    }

    /// Assets in display order.
    std::vector<VideoAsset> ordered() const {
        std::vector<VideoAsset> out;
        for (auto id : display_order_) out.push_back(at(id));
        return out;
    }

    /// Ranked ids first, in rank order; anything unranked keeps its relative order after them.
    void apply_ranking(const std::vector<AssetId>& ranked) {
        std::vector<AssetId> order;
        std::set<AssetId> seen;
        for (auto id : ranked)
            if (find(id) && seen.insert(id).second) order.push_back(id);
        for (auto id : display_order_)
            if (!seen.count(id)) order.push_back(id);
        display_order_ = std::move(order);
    }

    void select(const std::vector<AssetId>& ids) {
        for (auto id : ids) at(id);
        selection_.insert(ids.begin(), ids.end());
    }
    void deselect(const std::vector<AssetId>& ids) {
        for (auto id : ids) selection_.erase(id);
    }
    void select_all() {
        for (const auto& a : assets_) selection_.insert(a.id);
    }
    void deselect_all() { selection_.clear(); }

    /// Selected ids in display order, the order "Add to Timeline" uses.
    std::vector<AssetId> selected_in_display_order() const {
        std::vector<AssetId> out;
        for (auto id : display_order_)
            if (selection_.count(id)) out.push_back(id);
        return out;
    }

    /// Restores persisted state; order and selection are validated against membership.
    void restore(std::vector<VideoAsset> assets, std::vector<AssetId> order, std::set<AssetId> selection) {
        assets_ = std::move(assets);
        display_order_.clear();
        selection_.clear();
        std::set<AssetId> seen;
        for (auto id : order)
            if (find(id) && seen.insert(id).second) display_order_.push_back(id);
        for (const auto& a : assets_)
            if (seen.insert(a.id).second) display_order_.push_back(a.id);
        for (auto id : selection)
            if (find(id)) selection_.insert(id);
    }

private:
    std::vector<VideoAsset> assets_;
    std::vector<AssetId> display_order_;
    std::set<AssetId> selection_;
};

// ---------------------------------------------------------------------------
// Timeline

struct TimelineClip {
    AssetId asset_id = 0;
    std::size_t position = 0;
    int start_s = 0;
    int end_s = 0;
    std::optional<std::string> trim_rationale;

    friend bool operator==(const TimelineClip&, const TimelineClip&) = default;

    json to_json() const {
        json j = {{"asset_id", asset_id}, {"position", position}, {"start_s", start_s}, {"end_s", end_s}};
        j["trim_rationale"] = trim_rationale ? json(*trim_rationale) : json(nullptr);
        return j;
    }

    static TimelineClip from_json(const json& j) {
        TimelineClip c;
        c.asset_id = j.at("asset_id").get<AssetId>();
        c.position = j.value("position", std::size_t{0});
        c.start_s = j.at("start_s").get<int>();
        c.end_s = j.at("end_s").get<int>();
        if (j.contains("trim_rationale") && j["trim_rationale"].is_string())
            c.trim_rationale = j["trim_rationale"].get<std::string>();
        return c;
    }
};

class Timeline {
public:
    static constexpr std::size_t kDefaultUndoDepth = 100;

    explicit Timeline(std::size_t undo_depth = kDefaultUndoDepth) : undo_depth_(undo_depth) {}

    const std::vector<TimelineClip>& clips() const noexcept { return clips_; }
    bool empty() const noexcept { return clips_.empty(); }
    std::size_t size() const noexcept { return clips_.size(); }
    std::size_t undo_depth() const noexcept { return undo_.size(); }

    bool contains(AssetId id) const noexcept { return find(id) != nullptr; }

    const TimelineClip* find(AssetId id) const noexcept {
        for (const auto& c : clips_)
            if (c.asset_id == id) return &c;
        return nullptr;
    }

    std::vector<AssetId> order() const {
        std::vector<AssetId> ids;
        for (const auto& c : clips_) ids.push_back(c.asset_id);
        return ids;
    }

    /// Appends full-length clips in the given order.
    void add(const std::vector<AssetId>& ids, const Gallery& gallery) {
        std::set<AssetId> batch;
        for (auto id : ids) {
            gallery.at(id);
            if (contains(id) || !batch.insert(id).second)
                fail(ErrorCode::DuplicateOnTimeline, "video ID=" + std::to_string(id) + " is already on the timeline");
        }
        if (ids.empty()) fail(ErrorCode::InvalidArgument, "no videos to add");
        snapshot();
        for (auto id : ids) clips_.push_back({id, clips_.size(), 0, gallery.at(id).duration_s, std::nullopt});
    }

    void reorder(const std::vector<AssetId>& permutation) {
        auto current = order();
        auto sorted_current = current, sorted_perm = permutation;
        std::sort(sorted_current.begin(), sorted_current.end());
        std::sort(sorted_perm.begin(), sorted_perm.end());
        if (sorted_current != sorted_perm)
            fail(ErrorCode::NotAPermutation, "the new order must list every timeline clip exactly once");
        snapshot();
        std::vector<TimelineClip> next;
        for (auto id : permutation) next.push_back(*find(id));
        clips_ = std::move(next);
        densify();
    }

    /// A trim without rationale is a manual edit and clears any earlier LLM rationale.
    void set_trim(AssetId id, int start_s, int end_s, const Gallery& gallery,
                  std::optional<std::string> rationale = std::nullopt) {
        auto it = locate(id);
        int duration = gallery.at(id).duration_s;
        if (start_s < 0 || start_s >= end_s || end_s > duration)
            fail(ErrorCode::InvalidRange, "trim window [" + std::to_string(start_s) + ", " + std::to_string(end_s) +
                                              "] is invalid for a " + std::to_string(duration) + " s clip");
        snapshot();
        it->start_s = start_s;
        it->end_s = end_s;
        it->trim_rationale = std::move(rationale);
    }

    void remove(const std::vector<AssetId>& ids) {
        for (auto id : ids) locate(id);
        snapshot();
        std::set<AssetId> doomed(ids.begin(), ids.end());
        std::erase_if(clips_, [&](const auto& c) { return doomed.count(c.asset_id) > 0; });
        densify();
    }

    void clear() {
        snapshot();
        clips_.clear();
    }

    void undo() {
        if (undo_.empty()) fail(ErrorCode::NothingToUndo, "there is nothing to undo");
        clips_ = std::move(undo_.back());
        undo_.pop_back();
    }

    /// Replaces the clip list without touching history (used when loading).
    void restore(std::vector<TimelineClip> clips) {
        std::sort(clips.begin(), clips.end(), [](const auto& a, const auto& b) { return a.position < b.position; });
        clips_ = std::move(clips);
        densify();
        undo_.clear();
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& c : clips_) arr.push_back(c.to_json());
        return arr;
    }

    friend bool operator==(const Timeline& a, const Timeline& b) { return a.clips_ == b.clips_; }

private:
    std::vector<TimelineClip>::iterator locate(AssetId id) {
        auto it = std::find_if(clips_.begin(), clips_.end(), [&](const auto& c) { return c.asset_id == id; });
        if (it == clips_.end())
            fail(ErrorCode::ClipNotOnTimeline, "video ID=" + std::to_string(id) + " is not on the timeline");
        return it;
    }

    void snapshot() {
        undo_.push_back(clips_);
        while (undo_.size() > undo_depth_) undo_.pop_front();
    }

    void densify() {
        for (std::size_t i = 0; i < clips_.size(); ++i) clips_[i].position = i;
    }

    std::vector<TimelineClip> clips_;
    std::deque<std::vector<TimelineClip>> undo_;
    std::size_t undo_depth_;
};

// ---------------------------------------------------------------------------
// Preview rendering

struct PreviewSegment {
    AssetId asset_id = 0;
    int start_s = 0;
    int end_s = 0;
    friend bool operator==(const PreviewSegment&, const PreviewSegment&) = default;
};

struct PreviewArtifact {
    fs::path path;           // rendered media; absent for manifest-only engines
    fs::path manifest_path;
    std::vector<PreviewSegment> segments;
    double total_duration_s = 0.0;
    std::string timeline_hash;
    bool cached = false;

    json to_json() const {
        json segs = json::array();
        for (const auto& s : segments) segs.push_back({{"asset_id", s.asset_id}, {"start_s", s.start_s}, {"end_s", s.end_s}});
        return {{"path", path.string()},
                {"manifest", manifest_path.string()},
                {"segments", segs},
                {"total_duration_s", total_duration_s},
                {"timeline_hash", timeline_hash},
                {"cached", cached}};
    }
};

/// Hash over the clip order, trims and the media they reference.
inline std::string timeline_hash(const Timeline& timeline, const Gallery& gallery) {
    json j = json::array();
    for (const auto& c : timeline.clips()) {
        const auto& a = gallery.at(c.asset_id);
        j.push_back({a.media_hash, a.media_path, c.start_s, c.end_s});
    }
    return digest::sha256(j.dump());
}

/// Cuts every clip to its trim window and concatenates in position order.
/// Re-renders only when the timeline hash changed since the last render.
inline PreviewArtifact render_preview(const Timeline& timeline, const Gallery& gallery, MediaEngine& engine,
                                      const fs::path& output_dir) {
    if (timeline.empty()) fail(ErrorCode::EmptyTimeline, "the timeline is empty; nothing to render");
    PreviewArtifact art;
    art.timeline_hash = timeline_hash(timeline, gallery);
    auto stem = "preview-" + art.timeline_hash.substr(0, 16);
    art.manifest_path = output_dir / (stem + ".json");
    if (engine.produces_media()) art.path = output_dir / (stem + engine.extension());
    double expected = 0.0;
    for (const auto& c : timeline.clips()) {
        art.segments.push_back({c.asset_id, c.start_s, c.end_s});
        expected += c.end_s - c.start_s;
    }

    if (fs::exists(art.manifest_path) && (!engine.produces_media() || fs::exists(art.path))) {
        auto j = json::parse(util::read_file(art.manifest_path), nullptr, false);
        if (!j.is_discarded() && j.value("timeline_hash", std::string{}) == art.timeline_hash) {
            art.total_duration_s = j.value("total_duration_s", expected);
            art.cached = true;
            return art;
        }
    }

    fs::create_directories(output_dir);
    auto parts_dir = output_dir / (stem + ".parts");
    std::vector<fs::path> parts;
    try {
        if (engine.produces_media()) fs::create_directories(parts_dir);
        for (const auto& c : timeline.clips()) {
            const auto& a = gallery.at(c.asset_id);
            auto part = parts_dir / ("part" + std::to_string(c.position) + engine.extension());
            engine.cut({a.media_path, c.start_s, c.end_s}, part);
            parts.push_back(part);
        }
        engine.concat(parts, art.path);
        art.total_duration_s = engine.produces_media() ? engine.probe_duration(art.path) : expected;
    } catch (...) {
        std::error_code ec;
        fs::remove_all(parts_dir, ec);
        throw;
    }
    std::error_code ec;
    fs::remove_all(parts_dir, ec);

    json manifest = art.to_json();
    manifest.erase("cached");
    manifest.erase("manifest");
    util::write_file_atomic(art.manifest_path, manifest.dump(2));
    return art;
}

// ---------------------------------------------------------------------------
// Project document

inline json asset_to_json(const VideoAsset& a) {
    return {{"id", a.id},
            {"media_path", a.media_path},
            {"media_hash", a.media_hash},
            {"duration_s", a.duration_s},
            {"title", a.narration.title},
            {"summary", a.narration.summary},
            {"frame_captions", captions_to_json(a.frame_captions)}};
}

inline VideoAsset asset_from_json(const json& j) {
    VideoAsset a;
    a.id = j.at("id").get<AssetId>();
    a.media_path = j.value("media_path", std::string{});
    a.media_hash = j.value("media_hash", std::string{});
    a.duration_s = j.at("duration_s").get<int>();
    a.narration = {j.value("title", std::string{}), j.value("summary", std::string{})};
    if (j.contains("frame_captions")) a.frame_captions = captions_from_json(j["frame_captions"]);
    return a;
}

class Project {
public:
    static constexpr int kSchemaVersion = 1;
    static constexpr std::string_view kFileName = "project.json";
    static constexpr std::string_view kTranscriptFile = "sessions/transcript.ndjson";

    Gallery gallery;
    Timeline timeline;

    Project() = default;

    /// A new, empty project rooted at `root` (created if needed) and saved immediately.
    static Project create(const fs::path& root) {
        Project p;
        p.root_ = root;
        for (auto sub : {"cache", "index", "frames", "sessions", "output"}) fs::create_directories(root / sub);
        p.save();
        return p;
    }

    /// Opens a project directory or a project.json path.
    static Project open(const fs::path& path) {
        fs::path file = fs::is_directory(path) ? path / kFileName : path;
        if (!fs::is_regular_file(file)) fail(ErrorCode::ProjectNotFound, "no project file at " + file.string());
        auto j = json::parse(util::read_file(file), nullptr, false);
        if (j.is_discarded() || !j.is_object())
            fail(ErrorCode::InvalidRequest, "project file is not a JSON object: " + file.string());
        Project p = from_json(j);
        p.root_ = file.parent_path();
        return p;
    }

    /// Reads any document at or below the supported version; unknown fields are ignored.
    static Project from_json(const json& j) {
        auto version = j.value("schema_version", 0);
        if (version > kSchemaVersion)
            fail(ErrorCode::SchemaVersionUnsupported,
                 "project schema version " + std::to_string(version) + " is newer than " + std::to_string(kSchemaVersion));
        Project p;
        const auto g = j.value("gallery", json::object());
        std::vector<VideoAsset> assets;
        for (const auto& a : g.value("assets", json::array())) assets.push_back(asset_from_json(a));
        p.gallery.restore(std::move(assets), g.value("display_order", std::vector<AssetId>{}),
                          g.value("selection", std::set<AssetId>{}));
        std::vector<TimelineClip> clips;
        for (const auto& c : j.value("timeline", json::object()).value("clips", json::array()))
            clips.push_back(TimelineClip::from_json(c));
        for (const auto& c : clips) p.gallery.at(c.asset_id);
        p.timeline.restore(std::move(clips));
        return p;
    }

    json to_json() const {
        json assets = json::array();
        for (const auto& a : gallery.assets()) assets.push_back(asset_to_json(a));
        return {{"schema_version", kSchemaVersion},
                {"gallery",
                 {{"assets", assets},
                  {"display_order", gallery.display_order()},
                  {"selection", gallery.selection()}}},
                {"timeline", {{"clips", timeline.to_json()}}},
                {"chat_transcript", kTranscriptFile},
                {"cache_dir", "cache"}};
    }

    /// Canonical serialization: sorted keys, two-space indent, trailing newline.
    std::string serialize() const { return to_json().dump(2) + "\n"; }

    void save() const {
        if (root_.empty()) fail(ErrorCode::InvalidArgument, "project has no directory");
        fs::create_directories(root_);
        util::write_file_atomic(root_ / kFileName, serialize());
    }

    const fs::path& root() const noexcept { return root_; }
    fs::path file() const { return root_ / kFileName; }
    fs::path cache_dir() const { return root_ / "cache"; }
    fs::path index_dir() const { return root_ / "index"; }
    fs::path frames_dir() const { return root_ / "frames"; }
    fs::path output_dir() const { return root_ / "output"; }
    fs::path transcript_path() const { return root_ / kTranscriptFile; }

    /// Timeline assets in position order, the storyboard input.
    std::vector<VideoAsset> timeline_assets() const {
        std::vector<VideoAsset> out;
        for (const auto& c : timeline.clips()) out.push_back(gallery.at(c.asset_id));
        return out;
    }

private:
    fs::path root_;
};

}  // namespace lave
