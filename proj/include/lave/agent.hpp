#pragma once

// Plan-and-execute editing agent.
//
//   user message --> planning prompt --> completion --> ActionPlan (proposed)
//   empty message (approve) --> translate action --> dispatch --> result
//
// The agent is either Planning (possibly holding a proposed plan) or
// Executing a plan, one approved action at a time.

#include <functional>
#include <map>
#include <optional>

#include "lave/functions.hpp"
#include "lave/providers.hpp"
#include "lave/templates.hpp"

namespace lave {

// ---------------------------------------------------------------------------
// Messages and memory

enum class ChatRole { User, Agent, System };

constexpr std::string_view role_name(ChatRole r) noexcept {
    switch (r) {
        case ChatRole::User: return "user";
        case ChatRole::Agent: return "agent";
        case ChatRole::System: return "system";
    }
    return "system";
}

inline ChatRole parse_role(std::string_view s) {
    if (s == "user") return ChatRole::User;
    if (s == "agent") return ChatRole::Agent;
    if (s == "system") return ChatRole::System;
    fail(ErrorCode::InvalidArgument, "unknown chat role: " + std::string(s));
}

struct ChatMessage {
    ChatRole role = ChatRole::User;
    std::string content;
    std::size_t tokens = 0;

    json to_json() const { return {{"role", role_name(role)}, {"content", content}, {"tokens", tokens}}; }
    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Token-bounded history. messages[0] is the planning preamble and is never evicted.
class ConversationMemory {
public:
    static constexpr std::size_t kDefaultBudget = 6000;

    ConversationMemory(std::string preamble, std::size_t budget = kDefaultBudget,
                       TokenCounter counter = default_token_counter())
        : budget_(budget), counter_(std::move(counter)) {
        append(ChatRole::System, std::move(preamble));
    }

    void append(ChatRole role, std::string content) {
        auto tokens = counter_(content);
        messages_.push_back({role, std::move(content), tokens});
    }

    /// Drops the second-oldest message until the total fits the budget.
    void evict() {
        if (messages_.front().tokens > budget_)
            fail(ErrorCode::PreambleOverBudget, "the planning preamble alone needs " +
                                                    std::to_string(messages_.front().tokens) + " tokens; budget is " +
                                                    std::to_string(budget_));
        auto total = total_tokens();
        while (total > budget_ && messages_.size() > 1) {
            total -= messages_[1].tokens;
            messages_.erase(messages_.begin() + 1);
        }
    }

    std::size_t total_tokens() const noexcept {
        std::size_t t = 0;
        for (const auto& m : messages_) t += m.tokens;
        return t;
    }

    const std::vector<ChatMessage>& messages() const noexcept { return messages_; }
    const ChatMessage& preamble() const noexcept { return messages_.front(); }
    std::size_t budget() const noexcept { return budget_; }
    const TokenCounter& counter() const noexcept { return counter_; }

    void pop_back() {
        if (messages_.size() > 1) messages_.pop_back();
    }

private:
    std::vector<ChatMessage> messages_;
    std::size_t budget_;
    TokenCounter counter_;
};

// ---------------------------------------------------------------------------
// Action registry

enum class FunctionName { Overview, Brainstorm, Retrieve, Storyboard };

constexpr std::string_view function_name_str(FunctionName f) noexcept {
    switch (f) {
        case FunctionName::Overview: return "Overview";
        case FunctionName::Brainstorm: return "Brainstorm";
        case FunctionName::Retrieve: return "Retrieve";
        case FunctionName::Storyboard: return "Storyboard";
    }
    return "Overview";
}

struct ActionSpec {
    FunctionName name;
    std::string description;
    std::optional<std::string> text_param;  // the function's single text argument
    std::string param_description;
    bool param_required = false;
};

/// The agent-invokable functions. Clip trimming is deliberately absent: it is
/// a timeline-level feature reached through the trim dialog.
class ActionRegistry {
public:
    ActionRegistry() : ActionRegistry(TemplateSet{}) {}

    explicit ActionRegistry(const TemplateSet& templates) {
        specs_ = {
            {FunctionName::Overview,
             "Summarizes all videos in the gallery and groups them by common themes or topics. Use it when the user "
             "is unfamiliar with the footage or asks what the videos contain. No context needed.",
             std::nullopt, "", false},
            {FunctionName::Brainstorm,
             "Proposes video editing ideas built from the gallery videos, saying which videos each idea uses. Use it "
             "when the user lacks ideas or asks for suggestions. Context: optional creative guidance.",
             "creative_guidance", "Creative guidance or constraints for the ideas; \"general\" when none.", false},
            {FunctionName::Retrieve,
             "Finds the gallery videos most relevant to a language query and sorts the gallery by relevance. "
             "Context: the search query.",
             "query", "Natural-language description of the footage to find.", true},
            {FunctionName::Storyboard,
             "Orders the videos already on the timeline into a narrative and explains each scene. Context: optional "
             "narrative guidance or storyline.",
             "narrative_guidance", "Storyline the clip order should follow, if the user gave one.", false},
        };
        for (auto& s : specs_) {
            auto it = templates.action_descriptions.find(std::string(function_name_str(s.name)));
            if (it != templates.action_descriptions.end()) s.description = it->second;
        }
        synonyms_ = {
            {"overview", FunctionName::Overview},
            {"footage overview", FunctionName::Overview},
            {"footage overviewing", FunctionName::Overview},
            {"overviewing", FunctionName::Overview},
            {"brainstorm", FunctionName::Brainstorm},
            {"brainstorming", FunctionName::Brainstorm},
            {"idea brainstorming", FunctionName::Brainstorm},
            {"brainstorm ideas", FunctionName::Brainstorm},
            {"retrieve", FunctionName::Retrieve},
            {"retrieval", FunctionName::Retrieve},
            {"video retrieval", FunctionName::Retrieve},
            {"retrieve videos", FunctionName::Retrieve},
            {"video search", FunctionName::Retrieve},
            {"search", FunctionName::Retrieve},
            {"storyboard", FunctionName::Storyboard},
            {"storyboarding", FunctionName::Storyboard},
            {"create storyboard", FunctionName::Storyboard},
        };
        for (const auto& [alias, canonical] : templates.synonyms) {
            if (auto f = exact(canonical)) synonyms_[normalize(alias)] = *f;
        }
    }

    const std::vector<ActionSpec>& specs() const noexcept { return specs_; }

    const ActionSpec& spec(FunctionName f) const {
        for (const auto& s : specs_)
            if (s.name == f) return s;
        fail(ErrorCode::UnknownFunction, "unregistered function");
    }

    /// Case-insensitive match against canonical names only.
    std::optional<FunctionName> exact(std::string_view name) const {
        auto n = util::to_lower(util::trim(name));
        for (const auto& s : specs_)
            if (util::to_lower(function_name_str(s.name)) == n) return s.name;
        return std::nullopt;
    }

    /// Canonical names and synonyms, ignoring case, punctuation and
    /// parenthetical remarks such as "(function name)".
    std::optional<FunctionName> resolve(std::string_view name) const {
        auto it = synonyms_.find(normalize(name));
        if (it == synonyms_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<FunctionSchema> schemas() const {
        std::vector<FunctionSchema> out;
        for (const auto& s : specs_) {
            json params = {{"type", "object"}, {"properties", json::object()}};
            if (s.text_param) {
                params["properties"][*s.text_param] = {{"type", "string"}, {"description", s.param_description}};
                params["required"] = s.param_required ? json::array({*s.text_param}) : json::array();
            }
            out.push_back({std::string(function_name_str(s.name)), s.description, params});
        }
        return out;
    }

    /// Bullet list spliced into the planning preamble.
    std::string describe() const {
        std::string out;
        for (const auto& s : specs_) out += "- " + std::string(function_name_str(s.name)) + ": " + s.description + "\n";
        if (!out.empty()) out.pop_back();
        return out;
    }

    static std::string normalize(std::string_view raw) {
        std::string s;
        int paren = 0;
        for (unsigned char c : raw) {
            if (c == '(') ++paren;
            else if (c == ')') paren = std::max(0, paren - 1);
            else if (paren == 0) s.push_back(std::isalnum(c) ? static_cast<char>(std::tolower(c)) : ' ');
        }
        std::string out;
        for (char c : s) {
            if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
            out.push_back(c);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out;
    }

private:
    std::vector<ActionSpec> specs_;
    std::map<std::string, FunctionName> synonyms_;
};

// ---------------------------------------------------------------------------
// Plans

enum class ActionStatus { Proposed, Approved, Executed, Cancelled };

constexpr std::string_view status_name(ActionStatus s) noexcept {
    switch (s) {
        case ActionStatus::Proposed: return "proposed";
        case ActionStatus::Approved: return "approved";
        case ActionStatus::Executed: return "executed";
        case ActionStatus::Cancelled: return "cancelled";
    }
    return "proposed";
}

struct PlannedAction {
    FunctionName function = FunctionName::Overview;
    std::string context;
    ActionStatus status = ActionStatus::Proposed;
    friend bool operator==(const PlannedAction&, const PlannedAction&) = default;
};

struct ActionPlan {
    std::string goal;
    std::vector<PlannedAction> actions;
    std::size_t cursor = 0;

    bool finished() const noexcept { return cursor >= actions.size(); }

    json to_json() const {
        json acts = json::array();
        for (const auto& a : actions)
            acts.push_back({{"function", function_name_str(a.function)},
                            {"context", a.context},
                            {"status", status_name(a.status)}});
        return {{"goal", goal}, {"actions", acts}, {"cursor", cursor}};
    }
};

/// Canonical text form, the same shape the planner is instructed to emit.
inline std::string render_plan(const ActionPlan& plan) {
    std::string s = "GOAL: " + plan.goal + "\nACTIONS:\n";
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const auto& a = plan.actions[i];
        s += std::to_string(i + 1) + ". " + std::string(function_name_str(a.function)) + ":";
        if (!a.context.empty()) s += " " + a.context;
        s += "\n";
    }
    return s;
}

namespace detail {

inline std::string_view strip_markup(std::string_view line) {
    line = util::trim(line);
    while (!line.empty() && (line.front() == '*' || line.front() == '#' || line.front() == '_'))
        line.remove_prefix(1);
    return util::trim(line);
}

/// Label at line start followed by ':', whitespace or end of line; returns the remainder.
inline std::optional<std::string_view> after_label(std::string_view line, std::string_view label) {
    if (!util::starts_with_icase(line, label)) return std::nullopt;
    auto rest = line.substr(label.size());
    if (!rest.empty() && std::isalnum(static_cast<unsigned char>(rest.front()))) return std::nullopt;
    while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
    if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
    while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
    return util::trim(rest);
}

/// Strips "1.", "2)", "-", "*", "Step 3:" list markers; nullopt if the line has none.
inline std::optional<std::string_view> list_item(std::string_view line) {
    line = util::trim(line);
    if (line.empty()) return std::nullopt;
    if (line.front() == '-' || line.front() == '*' || line.front() == '+') return util::trim(line.substr(1));
    if (util::starts_with_icase(line, "step ")) line = line.substr(5);
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || i >= line.size()) return std::nullopt;
    if (line[i] == '.' || line[i] == ')' || line[i] == ':') return util::trim(line.substr(i + 1));
    return std::nullopt;
}

}  // namespace detail

/// Parses a GOAL / ACTIONS completion. Each action line splits at its first
/// colon into a function name (resolved through the registry) and context.
inline ActionPlan parse_plan(std::string_view completion, const ActionRegistry& registry) {
    auto lines = util::split_lines(completion);
    std::optional<std::size_t> goal_line, actions_line;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto l = detail::strip_markup(lines[i]);
        if (!goal_line && detail::after_label(l, "GOAL")) goal_line = i;
        if (!actions_line && detail::after_label(l, "ACTIONS")) actions_line = i;
    }
    if (!goal_line) fail(ErrorCode::MissingGoal, "the plan does not state a GOAL");
    if (!actions_line) fail(ErrorCode::MissingActions, "the plan does not list ACTIONS");

    ActionPlan plan;
    plan.goal = std::string(*detail::after_label(detail::strip_markup(lines[*goal_line]), "GOAL"));
    for (std::size_t i = *goal_line + 1; plan.goal.empty() && i < lines.size() && i != *actions_line; ++i)
        plan.goal = std::string(detail::strip_markup(lines[i]));
    if (plan.goal.empty()) fail(ErrorCode::MissingGoal, "the GOAL is empty");

    std::vector<std::string_view> items;
    if (auto inline_item = *detail::after_label(detail::strip_markup(lines[*actions_line]), "ACTIONS"); !inline_item.empty())
        items.push_back(inline_item);
    for (std::size_t i = *actions_line + 1; i < lines.size(); ++i) {
        auto l = util::trim(lines[i]);
        if (l.empty()) continue;
        if (i == *goal_line) break;
        if (auto item = detail::list_item(l)) {
            items.push_back(*item);
        } else if (items.empty()) {
            items.push_back(l);
        } else {
            break;  // trailing prose
        }
    }
    for (auto item : items) {
        auto colon = item.find(':');
        auto name = detail::strip_markup(item.substr(0, colon));
        while (!name.empty() && (name.back() == '*' || name.back() == '_')) name.remove_suffix(1);
        std::string_view context = colon == std::string_view::npos ? std::string_view{} : util::trim(item.substr(colon + 1));
        while (!context.empty() && (context.front() == '*' || context.front() == '_')) context.remove_prefix(1);
        if (context.size() >= 9 && context.substr(context.size() - 9) == "(context)")
            context = util::trim(context.substr(0, context.size() - 9));
        auto fn = registry.resolve(name);
        if (!fn) fail(ErrorCode::UnknownFunction, "unknown function '" + std::string(util::trim(name)) + "'");
        plan.actions.push_back({*fn, std::string(util::trim(context)), ActionStatus::Proposed});
    }
    if (plan.actions.empty()) fail(ErrorCode::MissingActions, "the ACTIONS list is empty");
    return plan;
}

// ---------------------------------------------------------------------------
// Planning prompt

inline std::string planning_preamble(const TemplateSet& t, const ActionRegistry& registry) {
    std::string p = t.planning;
    auto pos = p.find("{{actions}}");
    if (pos != std::string::npos) p.replace(pos, 11, registry.describe());
    return p;
}

/// preamble + surviving history (chronological) + the new user input.
inline std::string build_planning_prompt(const ConversationMemory& memory, std::string_view user_input) {
    const auto& msgs = memory.messages();
    std::string p = msgs.front().content + "\n\n";
    if (msgs.size() > 1) {
        p += "Conversation history:\n";
        for (std::size_t i = 1; i < msgs.size(); ++i)
            p += std::string(msgs[i].role == ChatRole::User ? "User: " : "Agent: ") + msgs[i].content + "\n";
        p += "\n";
    }
    p += "User: " + std::string(user_input) + "\n";
    return p;
}

// ---------------------------------------------------------------------------
// Function calls

struct FunctionCall {
    FunctionName name = FunctionName::Overview;
    std::map<std::string, std::string> args;

    std::optional<std::string> arg(const std::string& key) const {
        auto it = args.find(key);
        if (it == args.end()) return std::nullopt;
        return it->second;
    }

    json to_json() const { return {{"name", function_name_str(name)}, {"args", args}}; }
};

/// Translates one action description into a validated function call through
/// the function-calling endpoint.
inline FunctionCall translate_action(ProviderClient& provider, const ActionRegistry& registry,
                                     const PlannedAction& action) {
    FunctionCallRequest req;
    req.prompt = std::string(function_name_str(action.function)) + ": " + action.context;
    req.functions = registry.schemas();
    auto resp = provider.call_function(req);

    auto name = registry.exact(resp.name);
    if (!name)
        fail(ErrorCode::TranslationMismatch, "function-call translation returned unregistered function '" + resp.name + "'");
    if (*name != action.function)
        fail(ErrorCode::TranslationMismatch, "translation returned " + std::string(function_name_str(*name)) +
                                                 " for an approved " + std::string(function_name_str(action.function)) +
                                                 " action");
    const auto& spec = registry.spec(*name);
    FunctionCall call{*name, {}};
    if (!resp.arguments.is_object() && !resp.arguments.is_null())
        fail(ErrorCode::TranslationMismatch, "function arguments are not an object");
    if (spec.text_param && resp.arguments.is_object() && resp.arguments.contains(*spec.text_param)) {
        const auto& v = resp.arguments[*spec.text_param];
        if (!v.is_string() && !v.is_null())
            fail(ErrorCode::TranslationMismatch, "argument " + *spec.text_param + " must be a string");
        if (v.is_string() && !util::trim(v.get<std::string>()).empty())
            call.args[*spec.text_param] = std::string(util::trim(v.get<std::string>()));
    }
    if (*name == FunctionName::Brainstorm && !call.args.count("creative_guidance"))
        call.args["creative_guidance"] = std::string(kDefaultCreativeGuidance);
    if (*name == FunctionName::Retrieve && !call.args.count("query")) {
        if (util::trim(action.context).empty())
            fail(ErrorCode::TranslationMismatch, "retrieval needs a query and none could be extracted");
        call.args["query"] = std::string(util::trim(action.context));
    }
    return call;
}

// ---------------------------------------------------------------------------
// State machine

enum class AgentMode { Planning, Executing };

struct AgentTurn {
    std::string reply;
    std::optional<FunctionOutcome> outcome;  // set when an action executed
    std::optional<FunctionCall> call;
    bool plan_changed = false;
};

using ActionDispatcher = std::function<FunctionOutcome(const FunctionCall&)>;

struct AgentOptions {
    std::size_t memory_budget = ConversationMemory::kDefaultBudget;
    TokenCounter count_tokens = default_token_counter();
    std::size_t context_limit = 8192;
};

class Agent {
public:
    Agent(std::shared_ptr<ProviderClient> provider, ActionDispatcher dispatch, const TemplateSet& templates = {},
          AgentOptions opts = {})
        : provider_(std::move(provider)), dispatch_(std::move(dispatch)), registry_(templates),
          memory_(planning_preamble(templates, registry_), opts.memory_budget, opts.count_tokens), opts_(opts) {}

    AgentTurn submit_user_message(std::string_view text) {
        if (util::trim(text).empty()) return approve_next();
        record(ChatRole::User, std::string(text));

        std::string prefix;
        if (mode_ == AgentMode::Executing) {
            auto n = cancel_remaining();
            mode_ = AgentMode::Planning;
            prefix = "Cancelled the remaining " + std::to_string(n) + " step" + (n == 1 ? "" : "s") + " of the plan.";
        }
        AgentTurn turn;
        turn.plan_changed = !prefix.empty();
        try {
            memory_.evict();
            ConversationMemory view = memory_;
            view.pop_back();  // the new input is appended by build_planning_prompt
            CompletionRequest req;
            req.prompt = build_planning_prompt(view, text);
            req.temperature = kStructuredTemperature;
            req.max_output_tokens = opts_.context_limit / 4;
            auto plan = parse_plan(provider_->complete(req), registry_);
            if (plan_ && !plan_->finished())
                for (auto& a : plan_->actions)
                    if (a.status == ActionStatus::Proposed) a.status = ActionStatus::Cancelled;
            plan_ = std::move(plan);
            turn.plan_changed = true;
            turn.reply = join(prefix, render_proposal(*plan_));
        } catch (const Error& e) {
            turn.reply = join(prefix, planning_error_reply(e, !prefix.empty()));
        } catch (const std::exception& e) {
            turn.reply = join(prefix, planning_error_reply(Error(ErrorCode::ExecutionFailed, e.what()), !prefix.empty()));
        }
        record(ChatRole::Agent, turn.reply);
        return turn;
    }

    AgentTurn approve_next() {
        AgentTurn turn;
        if (!plan_ || plan_->finished()) {
            turn.reply = "There is no plan waiting for approval. Tell me what you would like to do with your video.";
            record(ChatRole::Agent, turn.reply);
            return turn;
        }
        mode_ = AgentMode::Executing;
        auto& plan = *plan_;
        auto& action = plan.actions[plan.cursor];
        action.status = ActionStatus::Approved;
        ++approvals_;
        turn.plan_changed = true;

        std::size_t step = plan.cursor + 1;
        try {
            auto call = translate_action(*provider_, registry_, action);
            auto outcome = dispatch_(call);
            action.status = ActionStatus::Executed;
            ++executions_;
            ++plan.cursor;
            turn.call = call;
            turn.reply = outcome.chat_text;
            if (plan.finished()) {
                mode_ = AgentMode::Planning;
                turn.reply += "\n\nAll steps of the plan are done.";
            } else {
                const auto& next = plan.actions[plan.cursor];
                turn.reply += "\n\nNext step " + std::to_string(plan.cursor + 1) + ": " + describe(next) +
                              ". Press enter to continue, or tell me how to change the plan.";
            }
            turn.outcome = std::move(outcome);
        } catch (const std::exception& e) {
            auto* err = dynamic_cast<const Error*>(&e);
            std::string code(err ? err->code_name() : code_name(ErrorCode::ExecutionFailed));
            turn.reply = "Step " + std::to_string(step) + " (" + describe(action) + ") failed: " + e.what() + " [" +
                         code + "]. Press enter to retry, or tell me how to proceed.";
        }
        record(ChatRole::Agent, turn.reply);
        return turn;
    }

    AgentMode mode() const noexcept { return mode_; }
    const std::optional<ActionPlan>& plan() const noexcept { return plan_; }
    const std::vector<ChatMessage>& transcript() const noexcept { return transcript_; }
    const ConversationMemory& memory() const noexcept { return memory_; }
    const ActionRegistry& registry() const noexcept { return registry_; }
    std::size_t approvals() const noexcept { return approvals_; }
    std::size_t executions() const noexcept { return executions_; }

    json plan_status() const {
        json j = {{"mode", mode_ == AgentMode::Planning ? "planning" : "executing"}};
        j["plan"] = plan_ ? plan_->to_json() : json(nullptr);
        return j;
    }

    /// Restores a persisted transcript; memory is rebuilt from it and evicted.
    void restore_transcript(std::vector<ChatMessage> messages) {
        for (auto& m : messages) {
            if (m.role == ChatRole::System) continue;
            memory_.append(m.role, m.content);
            transcript_.push_back(std::move(m));
        }
        memory_.evict();
    }

private:
    static std::string join(const std::string& a, const std::string& b) {
        if (a.empty()) return b;
        if (b.empty()) return a;
        return a + "\n\n" + b;
    }

    static std::string describe(const PlannedAction& a) {
        std::string s(function_name_str(a.function));
        if (!a.context.empty()) s += ": " + a.context;
        return s;
    }

    static std::string render_proposal(const ActionPlan& plan) {
        return render_plan(plan) + "\nPress enter to run step 1 (" + describe(plan.actions.front()) +
               "), or tell me how to change the plan.";
    }

    static std::string planning_error_reply(const Error& e, bool after_cancel) {
        switch (e.code()) {
            case ErrorCode::MissingGoal:
            case ErrorCode::MissingActions:
                if (after_cancel) return "Tell me what you would like to do next.";
                return "I could not turn that into an editing plan. Could you rephrase what you would like to do?";
            case ErrorCode::UnknownFunction:
                return std::string("I came up with a step I cannot perform (") + e.what() +
                       "). Could you rephrase your request?";
            default:
                return std::string("Something went wrong while planning: ") + e.what() + " [" +
                       std::string(e.code_name()) + "]. Please try again.";
        }
    }

    std::size_t cancel_remaining() {
        std::size_t n = 0;
        if (!plan_) return 0;
        for (std::size_t i = plan_->cursor; i < plan_->actions.size(); ++i) {
            auto& a = plan_->actions[i];
            if (a.status == ActionStatus::Proposed || a.status == ActionStatus::Approved) {
                a.status = ActionStatus::Cancelled;
                ++n;
            }
        }
        plan_->cursor = plan_->actions.size();
        return n;
    }

    void record(ChatRole role, std::string content) {
        memory_.append(role, content);
        transcript_.push_back({role, std::move(content), memory_.messages().back().tokens});
        if (role == ChatRole::Agent) {
            try {
                memory_.evict();
            } catch (const Error&) {
                // Raised again, and reported, on the next planning turn.
            }
        }
    }

    std::shared_ptr<ProviderClient> provider_;
    ActionDispatcher dispatch_;
    ActionRegistry registry_;
    ConversationMemory memory_;
    AgentOptions opts_;

    AgentMode mode_ = AgentMode::Planning;
    std::optional<ActionPlan> plan_;
    std::vector<ChatMessage> transcript_;
    std::size_t approvals_ = 0;
    std::size_t executions_ = 0;
};

}  // namespace lave
