#pragma once

// Footage preprocessing: 1 fps frame sampling, per-frame captioning, and
// LLM-written title + summary ("visual narration"), persisted in a
// content-addressed narration cache.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "lave/digest.hpp"
#include "lave/providers.hpp"

namespace lave {

namespace fs = std::filesystem;

using AssetId = std::int64_t;

struct FrameCaption {
    int timestamp_s = 0;
    std::string caption;
    friend bool operator==(const FrameCaption&, const FrameCaption&) = default;
};

struct VisualNarration {
    std::string title;
    std::string summary;

    bool complete() const noexcept { return !title.empty() && !summary.empty(); }
    friend bool operator==(const VisualNarration&, const VisualNarration&) = default;
};

inline constexpr std::size_t kMaxTitleBytes = 80;

struct VideoAsset {
    AssetId id = 0;
    std::string media_path;
    std::string media_hash;
    int duration_s = 1;
    std::vector<FrameCaption> frame_captions;
    VisualNarration narration;
    std::optional<EmbeddingVector> embedding;

    /// frame_captions holds exactly one caption per second, stamped 0..duration_s-1.
    bool captions_consistent() const noexcept {
        if (duration_s < 1 || frame_captions.size() != static_cast<std::size_t>(duration_s)) return false;
        for (std::size_t i = 0; i < frame_captions.size(); ++i)
            if (frame_captions[i].timestamp_s != static_cast<int>(i)) return false;
        return true;
    }

    friend bool operator==(const VideoAsset&, const VideoAsset&) = default;
};

inline json captions_to_json(const std::vector<FrameCaption>& caps) {
    json arr = json::array();
    for (const auto& c : caps) arr.push_back({{"t", c.timestamp_s}, {"caption", c.caption}});
    return arr;
}

inline std::vector<FrameCaption> captions_from_json(const json& arr) {
    std::vector<FrameCaption> caps;
    for (const auto& c : arr) caps.push_back({c.at("t").get<int>(), c.at("caption").get<std::string>()});
    return caps;
}

// ---------------------------------------------------------------------------
// Decoding

struct DecodedMedia {
    int duration_s = 0;             // floor of media duration, minimum 1
    std::vector<FrameImage> frames; // one per second, timestamps 0..duration_s-1
};

class MediaDecoder {
public:
    virtual ~MediaDecoder() = default;
    /// Throws UndecodableMedia.
    virtual DecodedMedia decode(const fs::path& media) = 0;
};

// ---------------------------------------------------------------------------
// Narration prompt and parsing

inline std::string build_narration_prompt(const std::vector<FrameCaption>& captions) {
    std::string p =
        "The following are captions of a video's frames, one frame per second, in timestamp order. "
        "Write a succinct title (at most 80 characters) and a short summary describing the visual "
        "content of the whole video.\n"
        "Respond with exactly two labeled lines:\n"
        "TITLE: <title>\n"
        "SUMMARY: <summary>\n\n"
        "Frame captions:\n";
    for (const auto& c : captions) p += std::to_string(c.timestamp_s) + ": " + c.caption + "\n";
    return p;
}

inline constexpr std::string_view kNarrationFormatReminder =
    "\nYour previous answer did not follow the required format. Reply with a line starting with "
    "\"TITLE:\" followed by a line starting with \"SUMMARY:\".\n";

/// Parses labeled "TITLE:" / "SUMMARY:" lines. The summary may continue over
/// following lines. Returns nullopt when either field is missing or empty.
inline std::optional<VisualNarration> parse_narration(std::string_view text) {
    VisualNarration n;
    enum class Field { None, Title, Summary } current = Field::None;
    bool saw_title = false, saw_summary = false;
    for (auto raw : util::split_lines(text)) {
        auto line = util::trim(raw);
        // Tolerate markdown emphasis around labels, e.g. "**TITLE:**".
        while (!line.empty() && (line.front() == '*' || line.front() == '#')) line.remove_prefix(1);
        line = util::trim(line);
        if (util::starts_with_icase(line, "title:")) {
            auto v = util::trim(line.substr(6));
            while (!v.empty() && v.front() == '*') v.remove_prefix(1);
            n.title = std::string(util::trim(v));
            saw_title = true;
            current = Field::Title;
        } else if (util::starts_with_icase(line, "summary:")) {
            auto v = util::trim(line.substr(8));
            while (!v.empty() && v.front() == '*') v.remove_prefix(1);
            n.summary = std::string(util::trim(v));
            saw_summary = true;
            current = Field::Summary;
        } else if (current == Field::Summary && !line.empty()) {
            if (!n.summary.empty()) n.summary += ' ';
            n.summary += std::string(line);
        }
    }
    if (!saw_title || !saw_summary) return std::nullopt;
    if (n.title.size() >= 2 && n.title.front() == '"' && n.title.back() == '"')
        n.title = n.title.substr(1, n.title.size() - 2);
    n.title = util::utf8_truncate(n.title, kMaxTitleBytes);
    if (!n.complete()) return std::nullopt;
    return n;
}

/// One completion call; on a malformed answer, one re-ask with a format reminder.
inline VisualNarration generate_narration(ProviderClient& provider, const std::vector<FrameCaption>& captions) {
    if (captions.empty()) fail(ErrorCode::InvalidArgument, "narration needs at least one caption");
    CompletionRequest req;
    req.prompt = build_narration_prompt(captions);
    req.max_output_tokens = 512;
    if (auto n = parse_narration(provider.complete(req))) return *n;
    req.prompt += kNarrationFormatReminder;
    if (auto n = parse_narration(provider.complete(req))) return *n;
    fail(ErrorCode::MalformedNarration, "model output lacked a TITLE or SUMMARY line after one retry");
}

// ---------------------------------------------------------------------------
// Cache
//
//   <dir>/manifest.json         {"schema_version":1,"assets":[{"id","media_hash","duration_s","media_path"}]}
//   <dir>/assets/<hash>.json    {"media_hash","duration_s","frame_captions":[{"t","caption"}],"title","summary"}

class NarrationCache {
public:
    static constexpr int kSchemaVersion = 1;

    struct ManifestEntry {
        AssetId id = 0;
        std::string media_hash;
        int duration_s = 0;
        std::string media_path;
    };

    explicit NarrationCache(fs::path dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_ / "assets");
        if (fs::exists(manifest_path())) {
            auto j = json::parse(util::read_file(manifest_path()));
            if (j.value("schema_version", 0) > kSchemaVersion)
                fail(ErrorCode::SchemaVersionUnsupported, "narration cache schema too new: " + manifest_path().string());
            for (const auto& e : j.value("assets", json::array()))
                entries_.push_back({e.at("id").get<AssetId>(), e.at("media_hash").get<std::string>(),
                                    e.at("duration_s").get<int>(), e.value("media_path", std::string{})});
        }
    }

    const fs::path& dir() const noexcept { return dir_; }

    std::optional<VideoAsset> find_by_hash(const std::string& hash) const {
        std::shared_lock lock(mu_);
        for (const auto& e : entries_)
            if (e.media_hash == hash) return load_record(e);
        return std::nullopt;
    }

    std::optional<VideoAsset> find_by_id(AssetId id) const {
        std::shared_lock lock(mu_);
        for (const auto& e : entries_)
            if (e.id == id) return load_record(e);
        return std::nullopt;
    }

    std::vector<VideoAsset> load_all() const {
        std::shared_lock lock(mu_);
        std::vector<VideoAsset> out;
        for (const auto& e : entries_) out.push_back(load_record(e));
        return out;
    }

    std::vector<ManifestEntry> manifest() const {
        std::shared_lock lock(mu_);
        return entries_;
    }

    AssetId next_id() const {
        std::shared_lock lock(mu_);
        AssetId next = 0;
        for (const auto& e : entries_) next = std::max(next, e.id + 1);
        return next;
    }

    void store(const VideoAsset& asset) {
        std::unique_lock lock(mu_);
        json rec = {{"media_hash", asset.media_hash},
                    {"duration_s", asset.duration_s},
                    {"frame_captions", captions_to_json(asset.frame_captions)},
                    {"title", asset.narration.title},
                    {"summary", asset.narration.summary}};
        util::write_file_atomic(record_path(asset.media_hash), rec.dump(2));
        auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.id == asset.id; });
        ManifestEntry entry{asset.id, asset.media_hash, asset.duration_s, asset.media_path};
        if (it == entries_.end())
            entries_.push_back(std::move(entry));
        else
            *it = std::move(entry);
        write_manifest();
    }

private:
    fs::path manifest_path() const { return dir_ / "manifest.json"; }
    fs::path record_path(const std::string& hash) const { return dir_ / "assets" / (hash + ".json"); }

    VideoAsset load_record(const ManifestEntry& e) const {
        auto j = json::parse(util::read_file(record_path(e.media_hash)));
        VideoAsset a;
        a.id = e.id;
        a.media_path = e.media_path;
        a.media_hash = e.media_hash;
        a.duration_s = j.at("duration_s").get<int>();
        a.frame_captions = captions_from_json(j.at("frame_captions"));
        a.narration = {j.at("title").get<std::string>(), j.at("summary").get<std::string>()};
        return a;
    }

    void write_manifest() const {
        json arr = json::array();
        for (const auto& e : entries_)
            arr.push_back({{"id", e.id}, {"media_hash", e.media_hash}, {"duration_s", e.duration_s}, {"media_path", e.media_path}});
        util::write_file_atomic(manifest_path(), json{{"schema_version", kSchemaVersion}, {"assets", arr}}.dump(2));
    }

    fs::path dir_;
    mutable std::shared_mutex mu_;
    std::vector<ManifestEntry> entries_;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestFailure {
    std::string media_path;
    ErrorCode code;
    std::string message;
};

struct IngestReport {
    std::vector<VideoAsset> assets;
    std::vector<IngestFailure> failures;
};

inline bool is_video_file(const fs::path& p) {
    static const std::vector<std::string> kExt = {".mp4", ".mov", ".avi", ".mkv", ".webm", ".m4v", ".mpg", ".mpeg"};
    auto ext = util::to_lower(p.extension().string());
    return std::find(kExt.begin(), kExt.end(), ext) != kExt.end();
}

class Ingestor {
public:
    Ingestor(std::shared_ptr<ProviderClient> provider, std::shared_ptr<MediaDecoder> decoder,
             std::shared_ptr<NarrationCache> cache, std::optional<fs::path> frames_dir = std::nullopt)
        : provider_(std::move(provider)), decoder_(std::move(decoder)), cache_(std::move(cache)),
          frames_dir_(std::move(frames_dir)) {}

    /// A file whose content hash is already cached returns the cached asset
    /// without any provider call.
    VideoAsset ingest_video(const fs::path& media) {
        if (!fs::is_regular_file(media)) fail(ErrorCode::UndecodableMedia, "not a file: " + media.string());
        auto hash = digest::sha256_file(media);
        if (auto cached = cache_->find_by_hash(hash)) return *cached;

        auto decoded = decoder_->decode(media);
        if (decoded.duration_s < 1 || decoded.frames.size() != static_cast<std::size_t>(decoded.duration_s))
            fail(ErrorCode::UndecodableMedia, "decoder returned inconsistent frames for " + media.string());

        VideoAsset asset;
        asset.media_path = fs::absolute(media).lexically_normal().string();
        asset.media_hash = hash;
        asset.duration_s = decoded.duration_s;
        try {
            auto caps = provider_->caption_frames(decoded.frames);
            for (std::size_t i = 0; i < caps.size(); ++i)
                asset.frame_captions.push_back({decoded.frames[i].timestamp_s, std::move(caps[i])});
        } catch (const Error& e) {
            fail(ErrorCode::CaptioningFailed,
                 "captioning " + media.string() + " failed: [" + std::string(e.code_name()) + "] " + e.what());
        }
        asset.narration = generate_narration(*provider_, asset.frame_captions);

        {
            std::lock_guard lock(alloc_mu_);
            asset.id = cache_->next_id();
            cache_->store(asset);
        }
        if (frames_dir_) write_frames(asset.id, decoded.frames);
        return asset;
    }

    /// Processes every file; a failing file is reported and does not stop the batch.
    IngestReport ingest_all(const std::vector<fs::path>& files) {
        IngestReport report;
        for (const auto& f : files) {
            try {
                report.assets.push_back(ingest_video(f));
            } catch (const Error& e) {
                report.failures.push_back({f.string(), e.code(), e.what()});
            }
        }
        return report;
    }

    /// Video files directly under `dir`, in lexicographic order.
    IngestReport ingest_directory(const fs::path& dir) {
        if (!fs::is_directory(dir)) fail(ErrorCode::IoError, "not a directory: " + dir.string());
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && is_video_file(e.path())) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        return ingest_all(files);
    }

private:
    // Per-second frames feed the trim dialog's frame strip; start/mid/end
    // frames are the timeline thumbnails.
    void write_frames(AssetId id, const std::vector<FrameImage>& frames) const {
        auto dir = *frames_dir_ / std::to_string(id);
        fs::create_directories(dir);
        auto write = [](const fs::path& p, const std::vector<unsigned char>& bytes) {
            util::write_file_atomic(p, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        };
        for (const auto& f : frames) write(dir / (std::to_string(f.timestamp_s) + ".jpg"), f.jpeg);
        if (frames.empty()) return;
        write(dir / "thumb_start.jpg", frames.front().jpeg);
        write(dir / "thumb_mid.jpg", frames[frames.size() / 2].jpeg);
        write(dir / "thumb_end.jpg", frames.back().jpeg);
    }

    std::shared_ptr<ProviderClient> provider_;
    std::shared_ptr<MediaDecoder> decoder_;
    std::shared_ptr<NarrationCache> cache_;
    std::optional<fs::path> frames_dir_;
    std::mutex alloc_mu_;
};

}  // namespace lave
