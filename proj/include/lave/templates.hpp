#pragma once

// Prompt templates. Built-in defaults mirror the files under templates/v1/;
// TemplateSet::load overrides any of them from a directory at startup.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lave/util.hpp"

namespace lave {

inline constexpr int kTemplateVersion = 1;

namespace preamble {

inline constexpr std::string_view kOverview =
    "Summarize the common topics or themes within all the provided videos, or categorize the videos by topic. "
    "The overview should be short, informative, and comprehensive, covering all the videos. For each topic or "
    "theme, list the titles of the videos that belong to it below.";

inline constexpr std::string_view kBrainstorm =
    "Use all of the provided videos to brainstorm ideas for video editing. For each idea, specify which video "
    "should be used and why. Aim for broad integration of multiple clips; the more comprehensive the integration, "
    "the better. Users may provide creative guidance for brainstorming. If the guidance is general, feel free to "
    "brainstorm using the videos mentioned below; otherwise, adhere to that guidance.";

inline constexpr std::string_view kStoryboard =
    "Use all the provided videos to devise a storyboard for video editing. If the user provides creative "
    "guidance, follow it closely. Reference videos in the storyboard by their title and ID. The output should be "
    "a dictionary with keys: \"storyboard\" and \"video_ids\". The \"storyboard\" key maps to a string detailing "
    "each scene in the storyboard, in the format of \"Scene X: <Video Title> (ID=X), <rationale for scene "
    "placement>\". The \"video_ids\" key maps to a sequence of video IDs as referenced in the storyboard. Ensure "
    "all input videos are included in the output.";

inline constexpr std::string_view kTrim =
    "Given video frame captions with timestamps, where each description represents 1 second of video, and the "
    "user's trimming command, determine the new start and end timestamps for the trimmed clip. If a specific "
    "clip length constraint is mentioned, adhere to it. The expected output is a Python dictionary formatted as: "
    "Final Answer: {\"segment\": [\"start\", \"end\", \"rationale\"]}. Both \"start\" and \"end\" should be "
    "integers. If no segment matches the user's command, \"segment\" should contain an empty list. Prioritize "
    "longer segments when multiple qualify.";

inline constexpr std::string_view kPlanning =
    "You are a video editing assistant. The user is making a video from their own footage, and every video in "
    "their gallery has a title and a summary describing its visual content. Read the user's latest message "
    "together with the conversation so far, work out the user's editing goal, and write an action plan that "
    "uses the actions listed below to reach that goal.\n"
    "\n"
    "Available actions:\n"
    "{{actions}}\n"
    "\n"
    "Format your answer as follows. First state the user's editing goal on one line that starts with the "
    "capitalized word GOAL. Then write the capitalized word ACTIONS on its own line, followed by a numbered list "
    "of steps. Each step gives the action name, a colon, and the context for that action if it needs one. "
    "Example:\n"
    "GOAL: Make a short video about the hike\n"
    "ACTIONS:\n"
    "1. Retrieve: hiking on a mountain trail\n"
    "2. Storyboard: start at the trailhead and end at the summit\n"
    "Only use the actions listed above. When the user asks for one specific thing, the plan contains exactly "
    "that one action.";

}  // namespace preamble

struct TemplateSet {
    std::string planning = std::string(preamble::kPlanning);
    std::string overview = std::string(preamble::kOverview);
    std::string brainstorm = std::string(preamble::kBrainstorm);
    std::string storyboard = std::string(preamble::kStoryboard);
    std::string trim = std::string(preamble::kTrim);

    /// Action name -> description shown in the planning preamble. Empty means
    /// the registry's built-in descriptions apply.
    std::map<std::string, std::string> action_descriptions;
    /// Lower-cased alias -> canonical action name, merged over the built-in table.
    std::map<std::string, std::string> synonyms;

    static TemplateSet load(const std::filesystem::path& dir) {
        TemplateSet t;
        auto read = [&](const char* name, std::string& into) {
            auto p = dir / name;
            if (!std::filesystem::exists(p)) return;
            into = util::read_file(p);
            while (!into.empty() && (into.back() == '\n' || into.back() == '\r')) into.pop_back();
        };
        read("planning_preamble.txt", t.planning);
        read("overview.txt", t.overview);
        read("brainstorm.txt", t.brainstorm);
        read("storyboard.txt", t.storyboard);
        read("trim.txt", t.trim);

        std::string actions, synonyms;
        read("actions.txt", actions);
        read("synonyms.txt", synonyms);
        t.action_descriptions = parse_pairs(actions, ':', false);
        t.synonyms = parse_pairs(synonyms, '=', true);
        return t;
    }

private:
    static std::map<std::string, std::string> parse_pairs(std::string_view text, char sep, bool lower_key) {
        std::map<std::string, std::string> out;
        for (auto raw : util::split_lines(text)) {
            auto line = util::trim(raw);
            if (line.empty() || line.front() == '#') continue;
            auto pos = line.find(sep);
            if (pos == std::string_view::npos) continue;
            std::string key(util::trim(line.substr(0, pos)));
            if (lower_key) key = util::to_lower(key);
            out[key] = std::string(util::trim(line.substr(pos + 1)));
        }
        return out;
    }
};

}  // namespace lave
