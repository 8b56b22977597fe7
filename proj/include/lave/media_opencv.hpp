#pragma once

// OpenCV-backed decoder and media engine (FFMPEG videoio backend). Outputs are
// Motion-JPEG AVI, which keeps frame counts exact across cut and concat.

#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include "lave/media.hpp"
#include "lave/narration.hpp"

namespace lave {

namespace detail {

inline cv::VideoCapture open_capture(const std::string& path) {
    cv::VideoCapture cap;
    if (std::filesystem::is_regular_file(path)) cap.open(path, cv::CAP_FFMPEG);
    return cap;
}

inline double capture_fps(cv::VideoCapture& cap) {
    double fps = cap.get(cv::CAP_PROP_FPS);
    return std::isfinite(fps) && fps > 0 ? fps : 0.0;
}

}  // namespace detail

class OpenCvDecoder final : public MediaDecoder {
public:
    explicit OpenCvDecoder(int max_width = 512) : max_width_(max_width) {}

    DecodedMedia decode(const fs::path& media) override {
        auto cap = detail::open_capture(media.string());
        if (!cap.isOpened()) fail(ErrorCode::UndecodableMedia, "cannot open " + media.string());
        double fps = detail::capture_fps(cap);
        if (fps == 0.0) fail(ErrorCode::UndecodableMedia, "no frame rate in " + media.string());

        // Sequential read; the frame at floor(t * fps) stands for second t.
        std::vector<cv::Mat> sampled;
        cv::Mat frame;
        long index = 0;
        while (cap.read(frame)) {
            if (!frame.empty() && static_cast<long>(std::floor(sampled.size() * fps)) == index)
                sampled.push_back(frame.clone());
            ++index;
        }
        if (index == 0) fail(ErrorCode::UndecodableMedia, "no decodable frames in " + media.string());

        DecodedMedia out;
        out.duration_s = std::max(1, static_cast<int>(std::floor(static_cast<double>(index) / fps)));
        sampled.resize(std::min(sampled.size(), static_cast<std::size_t>(out.duration_s)));
        if (sampled.size() != static_cast<std::size_t>(out.duration_s))
            fail(ErrorCode::UndecodableMedia, "frame sampling came up short in " + media.string());

        for (std::size_t t = 0; t < sampled.size(); ++t) {
            FrameImage img;
            img.source = media.string();
            img.timestamp_s = static_cast<int>(t);
            cv::Mat small = sampled[t];
            if (small.cols > max_width_) {
                double scale = static_cast<double>(max_width_) / small.cols;
                cv::resize(sampled[t], small, cv::Size(), scale, scale, cv::INTER_AREA);
            }
            cv::imencode(".jpg", small, img.jpeg);
            out.frames.push_back(std::move(img));
        }
        return out;
    }

private:
    int max_width_;
};

class OpenCvMediaEngine final : public MediaEngine {
public:
    bool produces_media() const override { return true; }
    std::string extension() const override { return ".avi"; }

    void cut(const CutSpec& spec, const fs::path& out) override {
        auto cap = detail::open_capture(spec.input);
        if (!cap.isOpened()) fail(ErrorCode::MediaEngineFailure, "cannot open " + spec.input);
        double fps = detail::capture_fps(cap);
        if (fps == 0.0) fail(ErrorCode::MediaEngineFailure, "no frame rate in " + spec.input);
        long first = static_cast<long>(std::llround(spec.start_s * fps));
        long last = static_cast<long>(std::llround(spec.end_s * fps));

        cv::VideoWriter writer;
        cv::Mat frame;
        long written = 0;
        for (long i = 0; i < last && cap.read(frame); ++i) {
            if (i < first) continue;
            if (!writer.isOpened()) open_writer(writer, out, fps, frame.size());
            writer.write(frame);
            ++written;
        }
        if (written == 0) fail(ErrorCode::MediaEngineFailure, "cut produced no frames from " + spec.input);
    }

    void concat(const std::vector<fs::path>& parts, const fs::path& out) override {
        if (parts.empty()) fail(ErrorCode::MediaEngineFailure, "nothing to concatenate");
        cv::VideoWriter writer;
        double out_fps = 0.0;
        cv::Size size;
        for (const auto& part : parts) {
            auto cap = detail::open_capture(part.string());
            if (!cap.isOpened()) fail(ErrorCode::MediaEngineFailure, "cannot open cut " + part.string());
            double fps = detail::capture_fps(cap);
            std::vector<cv::Mat> frames;
            cv::Mat f;
            while (cap.read(f)) frames.push_back(f.clone());
            if (frames.empty()) continue;
            if (!writer.isOpened()) {
                out_fps = fps;
                size = frames.front().size();
                open_writer(writer, out, out_fps, size);
            }
            // Resample to the output rate so each part keeps its duration.
            long n_out = static_cast<long>(std::llround(frames.size() * out_fps / fps));
            for (long k = 0; k < n_out; ++k) {
                auto src = std::min<std::size_t>(frames.size() - 1, static_cast<std::size_t>(k * fps / out_fps));
                cv::Mat& m = frames[src];
                if (m.size() != size) {
                    cv::Mat r;
                    cv::resize(m, r, size);
                    writer.write(r);
                } else {
                    writer.write(m);
                }
            }
        }
        if (!writer.isOpened()) fail(ErrorCode::MediaEngineFailure, "all cuts were empty");
    }

    double probe_duration(const fs::path& media) override {
        auto cap = detail::open_capture(media.string());
        if (!cap.isOpened()) fail(ErrorCode::MediaEngineFailure, "cannot probe " + media.string());
        double fps = detail::capture_fps(cap);
        if (fps == 0.0) fail(ErrorCode::MediaEngineFailure, "no frame rate in " + media.string());
        long n = 0;
        cv::Mat f;
        while (cap.grab()) ++n;
        return static_cast<double>(n) / fps;
    }

    /// Frame rate of a media file, 0 if unknown.
    static double frame_rate(const fs::path& media) {
        auto cap = detail::open_capture(media.string());
        return cap.isOpened() ? detail::capture_fps(cap) : 0.0;
    }

private:
    static void open_writer(cv::VideoWriter& w, const fs::path& out, double fps, cv::Size size) {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        w.open(out.string(), cv::CAP_FFMPEG, cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps, size);
        if (!w.isOpened()) fail(ErrorCode::MediaEngineFailure, "cannot write " + out.string());
    }
};

}  // namespace lave
