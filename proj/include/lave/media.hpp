#pragma once

// Media-engine adapter: cut (input, start_s, end_s) and concatenate ordered
// cuts. The stub engine produces no media and is what fast tests use.

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "lave/error.hpp"
#include "lave/util.hpp"

namespace lave {

struct CutSpec {
    std::string input;
    int start_s = 0;
    int end_s = 0;
};

class MediaEngine {
public:
    virtual ~MediaEngine() = default;

    /// False for engines that only produce a manifest.
    virtual bool produces_media() const = 0;
    virtual void cut(const CutSpec& spec, const std::filesystem::path& out) = 0;
    virtual void concat(const std::vector<std::filesystem::path>& parts, const std::filesystem::path& out) = 0;
    virtual double probe_duration(const std::filesystem::path& media) = 0;
    /// Container extension for outputs, including the dot.
    virtual std::string extension() const = 0;
};

class StubMediaEngine final : public MediaEngine {
public:
    bool produces_media() const override { return false; }
    void cut(const CutSpec& spec, const std::filesystem::path&) override {
        if (spec.end_s <= spec.start_s) fail(ErrorCode::MediaEngineFailure, "empty cut for " + spec.input);
        cuts_.push_back(spec);
    }
    void concat(const std::vector<std::filesystem::path>&, const std::filesystem::path&) override {}
    double probe_duration(const std::filesystem::path&) override { return 0.0; }
    std::string extension() const override { return ".none"; }

    const std::vector<CutSpec>& cuts() const noexcept { return cuts_; }

private:
    std::vector<CutSpec> cuts_;
};

/// Shells out to the ffmpeg / ffprobe command-line tools.
class CommandLineMediaEngine final : public MediaEngine {
public:
    explicit CommandLineMediaEngine(std::string ffmpeg = "ffmpeg", std::string ffprobe = "ffprobe")
        : ffmpeg_(std::move(ffmpeg)), ffprobe_(std::move(ffprobe)) {}

    static bool available() { return std::system("ffmpeg -version > /dev/null 2>&1") == 0; }

    bool produces_media() const override { return true; }

    void cut(const CutSpec& spec, const std::filesystem::path& out) override {
        run(ffmpeg_ + " -y -v error -ss " + std::to_string(spec.start_s) + " -i " + quote(spec.input) + " -t " +
            std::to_string(spec.end_s - spec.start_s) + " -an -c:v mjpeg -q:v 3 " + quote(out.string()));
    }

    void concat(const std::vector<std::filesystem::path>& parts, const std::filesystem::path& out) override {
        auto list = out;
        list += ".txt";
        std::string body;
        for (const auto& p : parts) body += "file " + quote(std::filesystem::absolute(p).string()) + "\n";
        util::write_file_atomic(list, body);
        run(ffmpeg_ + " -y -v error -f concat -safe 0 -i " + quote(list.string()) + " -c copy " + quote(out.string()));
    }

    double probe_duration(const std::filesystem::path& media) override {
        auto text = run(ffprobe_ + " -v error -show_entries format=duration -of csv=p=0 " + quote(media.string()));
        try {
            return std::stod(text);
        } catch (const std::exception&) {
            fail(ErrorCode::MediaEngineFailure, "ffprobe output not a duration: " + text);
        }
    }

    std::string extension() const override { return ".avi"; }

private:
    static std::string quote(const std::string& s) {
        std::string q = "'";
        for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
        return q + "'";
    }

    static std::string run(const std::string& cmd) {
        std::string output;
        FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
        if (!pipe) fail(ErrorCode::MediaEngineFailure, "cannot spawn: " + cmd);
        std::array<char, 4096> buf{};
        while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), n);
        int status = pclose(pipe);
        if (status != 0) fail(ErrorCode::MediaEngineFailure, "command failed: " + cmd + "\n" + output);
        return output;
    }

    std::string ffmpeg_;
    std::string ffprobe_;
};

}  // namespace lave
