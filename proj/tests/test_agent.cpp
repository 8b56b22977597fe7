#include <gtest/gtest.h>

#include "support.hpp"

using namespace lave;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

/// Counts one token per byte so budgets are easy to reason about.
TokenCounter byte_counter() {
    return [](std::string_view s) { return s.size(); };
}

const char* kTravelPlan =
    "GOAL: make a travel video\nACTIONS:\n1. Brainstorm: travel themes\n2. Storyboard: day to night";

struct Recorder {
    std::vector<FunctionCall> calls;
    std::optional<ErrorCode> fail_with;

    ActionDispatcher dispatcher() {
        return [this](const FunctionCall& c) {
            if (fail_with) fail(*fail_with, "dispatch failed");
            calls.push_back(c);
            return FunctionOutcome{"ran " + std::string(function_name_str(c.name)), NoEffect{}};
        };
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Memory

TEST(ConversationMemory, EvictsOldestAfterPreamble) {
    ConversationMemory m(std::string(1000, 'p'), 6000, byte_counter());
    for (int i = 0; i < 5; ++i) m.append(i % 2 ? ChatRole::Agent : ChatRole::User, std::string(1500, 'a' + i));
    m.evict();
    ASSERT_EQ(m.messages().size(), 4u);
    EXPECT_EQ(m.total_tokens(), 5500u);
    EXPECT_EQ(m.messages()[0].content, std::string(1000, 'p'));
    EXPECT_EQ(m.messages()[1].content.front(), 'c');
}

TEST(ConversationMemory, PreambleOverBudget) {
    ConversationMemory m(std::string(7000, 'p'), 6000, byte_counter());
    EXPECT_EQ(code_of([&] { m.evict(); }), ErrorCode::PreambleOverBudget);
}

TEST(ConversationMemory, SingleHugeMessageLeavesPreambleOnly) {
    ConversationMemory m("pre", 100, byte_counter());
    m.append(ChatRole::User, std::string(500, 'x'));
    m.evict();
    EXPECT_EQ(m.messages().size(), 1u);
}

// ---------------------------------------------------------------------------
// Registry and plan parsing

TEST(ActionRegistry, ResolvesSynonymsButExactDoesNot) {
    ActionRegistry r;
    EXPECT_EQ(r.resolve("Retrieval"), FunctionName::Retrieve);
    EXPECT_EQ(r.resolve("video retrieval"), FunctionName::Retrieve);
    EXPECT_EQ(r.resolve("Footage Overview (overview)"), FunctionName::Overview);
    EXPECT_EQ(r.resolve("STORYBOARDING"), FunctionName::Storyboard);
    EXPECT_FALSE(r.resolve("Summarize"));
    EXPECT_FALSE(r.exact("Retrieval"));
    EXPECT_EQ(r.exact("Retrieve"), FunctionName::Retrieve);
    EXPECT_EQ(r.schemas().size(), 4u);
}

TEST(ActionRegistry, TrimIsNotAnAgentAction) {
    ActionRegistry r;
    EXPECT_FALSE(r.resolve("Trim"));
    for (const auto& s : r.schemas()) EXPECT_NE(s.name, "Trim");
}

TEST(ParsePlan, Golden) {
    auto plan = parse_plan(kTravelPlan, ActionRegistry{});
    EXPECT_EQ(plan.goal, "make a travel video");
    ASSERT_EQ(plan.actions.size(), 2u);
    EXPECT_EQ(plan.actions[0], (PlannedAction{FunctionName::Brainstorm, "travel themes", ActionStatus::Proposed}));
    EXPECT_EQ(plan.actions[1], (PlannedAction{FunctionName::Storyboard, "day to night", ActionStatus::Proposed}));
    EXPECT_EQ(render_plan(plan), std::string(kTravelPlan) + "\n");
}

TEST(ParsePlan, SynonymsMarkupAndListStyles) {
    ActionRegistry r;
    auto plan = parse_plan("Sure, here is my plan.\n**GOAL:** find the tower\n\n**ACTIONS:**\n"
                           "- Retrieval: Strolling around the Eiffel Tower\n"
                           "Step 2: Storyboarding (context)\n3) Overview:\nLet me know!",
                           r);
    EXPECT_EQ(plan.goal, "find the tower");
    ASSERT_EQ(plan.actions.size(), 3u);
    EXPECT_EQ(plan.actions[0].function, FunctionName::Retrieve);
    EXPECT_EQ(plan.actions[0].context, "Strolling around the Eiffel Tower");
    EXPECT_EQ(plan.actions[1].function, FunctionName::Storyboard);
    EXPECT_EQ(plan.actions[1].context, "");
    EXPECT_EQ(plan.actions[2].function, FunctionName::Overview);
}

TEST(ParsePlan, Errors) {
    ActionRegistry r;
    EXPECT_EQ(code_of([&] { parse_plan("ACTIONS:\n1. Overview:", r); }), ErrorCode::MissingGoal);
    EXPECT_EQ(code_of([&] { parse_plan("GOAL: something", r); }), ErrorCode::MissingActions);
    EXPECT_EQ(code_of([&] { parse_plan("GOAL: x\nACTIONS:\n", r); }), ErrorCode::MissingActions);
    EXPECT_EQ(code_of([&] { parse_plan("GOAL: x\nACTIONS:\n1. Summarize: all", r); }), ErrorCode::UnknownFunction);
    EXPECT_EQ(code_of([&] { parse_plan("I am not sure what you mean.", r); }), ErrorCode::MissingGoal);
}

TEST(PlanningPrompt, HistoryInChronologicalOrder) {
    TemplateSet t;
    ActionRegistry r;
    auto pre = planning_preamble(t, r);
    EXPECT_EQ(pre.find("{{actions}}"), std::string::npos);
    EXPECT_NE(pre.find("- Retrieve: "), std::string::npos);

    ConversationMemory m(pre);
    EXPECT_EQ(build_planning_prompt(m, "hello"), pre + "\n\nUser: hello\n");
    m.append(ChatRole::User, "first");
    m.append(ChatRole::Agent, "reply");
    EXPECT_EQ(build_planning_prompt(m, "second"),
              pre + "\n\nConversation history:\nUser: first\nAgent: reply\n\nUser: second\n");
}

// ---------------------------------------------------------------------------
// Translation

TEST(TranslateAction, PassthroughFillsArguments) {
    auto p = make_mock_client();
    ActionRegistry r;
    auto call = translate_action(*p, r, {FunctionName::Retrieve, "Strolling around the Eiffel Tower"});
    EXPECT_EQ(call.name, FunctionName::Retrieve);
    EXPECT_EQ(call.arg("query"), "Strolling around the Eiffel Tower");
    EXPECT_EQ(translate_action(*p, r, {FunctionName::Brainstorm, ""}).arg("creative_guidance"), "general");
    EXPECT_FALSE(translate_action(*p, r, {FunctionName::Storyboard, ""}).arg("narrative_guidance"));
    EXPECT_EQ(code_of([&] { translate_action(*p, r, {FunctionName::Retrieve, ""}); }), ErrorCode::TranslationMismatch);
}

TEST(TranslateAction, RejectsUnregisteredOrDifferentFunction) {
    ActionRegistry r;
    ProviderScript s;
    s.on_call("Overview", "Summarize").on_call("Brainstorm", "Storyboard").on_call("Storyboard", "Storyboard", {{"narrative_guidance", 7}});
    auto p = make_mock_client(s);
    EXPECT_EQ(code_of([&] { translate_action(*p, r, {FunctionName::Overview, ""}); }), ErrorCode::TranslationMismatch);
    EXPECT_EQ(code_of([&] { translate_action(*p, r, {FunctionName::Brainstorm, "x"}); }), ErrorCode::TranslationMismatch);
    EXPECT_EQ(code_of([&] { translate_action(*p, r, {FunctionName::Storyboard, "x"}); }), ErrorCode::TranslationMismatch);
}

TEST(TranslateAction, RetrieveFallsBackToContextWhenQueryMissing) {
    ProviderScript s;
    s.on_call("", "Retrieve", json::object());
    auto p = make_mock_client(s);
    auto call = translate_action(*p, ActionRegistry{}, {FunctionName::Retrieve, "beach dog"});
    EXPECT_EQ(call.arg("query"), "beach dog");
}

// ---------------------------------------------------------------------------
// State machine

TEST(Agent, PlanThenTwoApprovals) {
    ProviderScript s;
    s.on_complete("User: make a travel video", kTravelPlan);
    Recorder rec;
    Agent agent(make_mock_client(s), rec.dispatcher());

    auto t1 = agent.submit_user_message("make a travel video");
    EXPECT_TRUE(t1.plan_changed);
    EXPECT_EQ(agent.mode(), AgentMode::Planning);
    EXPECT_EQ(t1.reply, std::string(kTravelPlan) +
                            "\n\nPress enter to run step 1 (Brainstorm: travel themes), or tell me how to change the plan.");
    EXPECT_TRUE(rec.calls.empty());

    auto t2 = agent.submit_user_message("");
    EXPECT_EQ(agent.mode(), AgentMode::Executing);
    EXPECT_EQ(t2.reply, "ran Brainstorm\n\nNext step 2: Storyboard: day to night. Press enter to continue, or tell me how "
                        "to change the plan.");
    ASSERT_EQ(rec.calls.size(), 1u);
    EXPECT_EQ(rec.calls[0].arg("creative_guidance"), "travel themes");

    auto t3 = agent.approve_next();
    EXPECT_EQ(t3.reply, "ran Storyboard\n\nAll steps of the plan are done.");
    EXPECT_EQ(agent.mode(), AgentMode::Planning);
    EXPECT_EQ(agent.approvals(), 2u);
    EXPECT_EQ(agent.executions(), 2u);
    EXPECT_TRUE(agent.plan()->finished());
    EXPECT_EQ(agent.plan()->actions[1].status, ActionStatus::Executed);
    EXPECT_EQ(agent.transcript().size(), 4u);

    EXPECT_EQ(agent.approve_next().reply,
              "There is no plan waiting for approval. Tell me what you would like to do with your video.");
    EXPECT_EQ(agent.executions(), 2u);
}

TEST(Agent, NewMessageDuringExecutionCancelsRemainingSteps) {
    ProviderScript s;
    s.on_complete("User: make a travel video", kTravelPlan, 1)
        .on_complete("User: show me the dog", "GOAL: find the dog\nACTIONS:\n1. Retrieve: dog on the beach");
    Recorder rec;
    Agent agent(make_mock_client(s), rec.dispatcher());
    agent.submit_user_message("make a travel video");
    agent.approve_next();
    ASSERT_EQ(agent.mode(), AgentMode::Executing);

    auto t = agent.submit_user_message("show me the dog");
    EXPECT_EQ(agent.mode(), AgentMode::Planning);
    EXPECT_EQ(t.reply.rfind("Cancelled the remaining 1 step of the plan.\n\nGOAL: find the dog", 0), 0u);
    EXPECT_EQ(agent.plan()->goal, "find the dog");
    EXPECT_EQ(rec.calls.size(), 1u);
    agent.approve_next();
    EXPECT_EQ(rec.calls.back().arg("query"), "dog on the beach");
}

TEST(Agent, FailureKeepsCursorForRetry) {
    ProviderScript s;
    s.on_complete("", kTravelPlan);
    Recorder rec;
    rec.fail_with = ErrorCode::EmptyTimeline;
    Agent agent(make_mock_client(s), rec.dispatcher());
    agent.submit_user_message("make a travel video");
    auto t = agent.approve_next();
    EXPECT_EQ(t.reply, "Step 1 (Brainstorm: travel themes) failed: dispatch failed [empty_timeline]. Press enter to "
                       "retry, or tell me how to proceed.");
    EXPECT_EQ(agent.plan()->cursor, 0u);
    EXPECT_EQ(agent.executions(), 0u);
    rec.fail_with.reset();
    agent.approve_next();
    EXPECT_EQ(agent.plan()->cursor, 1u);
    EXPECT_EQ(agent.executions(), 1u);
}

TEST(Agent, UnparseablePlanAsksToRephrase) {
    ProviderScript s;
    s.on_complete("", "I'm not sure.");
    Recorder rec;
    Agent agent(make_mock_client(s), rec.dispatcher());
    auto t = agent.submit_user_message("blorp");
    EXPECT_FALSE(t.plan_changed);
    EXPECT_FALSE(agent.plan());
    EXPECT_EQ(t.reply, "I could not turn that into an editing plan. Could you rephrase what you would like to do?");
}

TEST(Agent, ProviderFailureBecomesChatReply) {
    ProviderScript s;
    s.fail_on(CallKind::Complete, "", ErrorCode::ProviderUnavailable);
    Recorder rec;
    Agent agent(make_mock_client(s), rec.dispatcher());
    auto t = agent.submit_user_message("hello");
    EXPECT_NE(t.reply.find("[provider_unavailable]"), std::string::npos);
    EXPECT_EQ(agent.transcript().size(), 2u);
}

TEST(Agent, PromptCarriesHistoryOnFollowUp) {
    ProviderScript s;
    s.on_complete("", kTravelPlan);
    auto client = make_mock_client(s);
    Recorder rec;
    Agent agent(client, rec.dispatcher());
    agent.submit_user_message("make a travel video");
    agent.submit_user_message("actually start with an overview");
    auto prompt = client->log().records().back().request["prompt"].get<std::string>();
    EXPECT_NE(prompt.find("Conversation history:\nUser: make a travel video\nAgent: GOAL:"), std::string::npos);
    EXPECT_TRUE(prompt.ends_with("User: actually start with an overview\n"));
    EXPECT_EQ(util::count_occurrences(prompt, "actually start with an overview"), 1u);
}

TEST(Agent, MemoryStaysWithinBudget) {
    ProviderScript s;
    s.on_complete("", kTravelPlan);
    AgentOptions opts;
    opts.memory_budget = 4000;
    Recorder rec;
    Agent agent(make_mock_client(s), rec.dispatcher(), {}, opts);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 40; ++i) {
        agent.submit_user_message(lave::test::random_phrase(rng, 20, 200));
        EXPECT_LE(agent.memory().total_tokens(), 4000u);
    }
    EXPECT_EQ(agent.transcript().size(), 80u);
}
