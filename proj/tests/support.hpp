#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "lave/lave.hpp"

namespace lave::test {

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lave-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline VideoAsset make_asset(AssetId id, std::string title, std::string summary, int duration_s = 10) {
    VideoAsset a;
    a.id = id;
    a.narration = {std::move(title), std::move(summary)};
    a.duration_s = duration_s;
    a.media_path = "/media/clip" + std::to_string(id) + ".mp4";
    a.media_hash = digest::sha256(a.media_path);
    for (int t = 0; t < duration_s; ++t) a.frame_captions.push_back({t, "second " + std::to_string(t) + " of clip " + std::to_string(id)});
    return a;
}

/// A small gallery with distinct subjects.
inline std::vector<VideoAsset> travel_gallery() {
    return {
        make_asset(0, "Eiffel Tower at Dusk", "A slow pan across the Eiffel Tower as the city lights turn on.", 12),
        make_asset(1, "Strolling Along the Seine", "People walk along the river bank past book stalls and bridges.", 15),
        make_asset(2, "Croissant Breakfast", "A close-up of croissants and coffee on a cafe table in the morning.", 8),
        make_asset(3, "Dog on the Beach", "A golden retriever runs along the beach chasing waves at sunset.", 20),
        make_asset(4, "Mountain Trail Hike", "Hikers climb a rocky mountain trail toward a snowy summit.", 18),
    };
}

inline Gallery gallery_of(const std::vector<VideoAsset>& assets) {
    Gallery g;
    for (const auto& a : assets) g.add_asset(a);
    return g;
}

inline std::string random_word(std::mt19937_64& rng) {
    static const char* words[] = {"sunset", "beach",   "dog",    "tower", "river", "market", "coffee", "trail",
                                  "summit", "bridge",  "friends", "city", "night", "rain",   "garden", "train",
                                  "park",   "concert", "snow",   "lake",  "boat",  "street", "family", "picnic"};
    return words[std::uniform_int_distribution<std::size_t>(0, std::size(words) - 1)(rng)];
}

inline std::string random_phrase(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
    auto n = std::uniform_int_distribution<std::size_t>(min_words, max_words)(rng);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + random_word(rng);
    return s;
}

}  // namespace lave::test

#ifdef LAVE_WITH_OPENCV
namespace lave::test {

/// Writes an MJPG clip whose frames differ in colour, so content hashes differ per `seed`.
inline void write_test_clip(const std::filesystem::path& path, double seconds, double fps = 10.0, int seed = 0,
                            cv::Size size = {160, 120}) {
    cv::VideoWriter w(path.string(), cv::CAP_FFMPEG, cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps, size);
    if (!w.isOpened()) throw std::runtime_error("cannot write test clip " + path.string());
    auto frames = static_cast<long>(std::llround(seconds * fps));
    for (long i = 0; i < frames; ++i) {
        cv::Mat m(size, CV_8UC3, cv::Scalar((seed * 40) % 256, (i * 7) % 256, 128));
        cv::putText(m, std::to_string(i), {10, 60}, cv::FONT_HERSHEY_SIMPLEX, 1.0, {255, 255, 255}, 2);
        w.write(m);
    }
}

}  // namespace lave::test
#endif
