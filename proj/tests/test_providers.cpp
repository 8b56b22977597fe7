#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "lave/http_provider.hpp"
#include "support.hpp"

using namespace lave;
using lave::test::TempDir;

namespace {

class FixedBackend : public ProviderBackend {
public:
    std::string completion = "ok";
    std::vector<double> vector = {1.0, 0.0, 0.0};
    int complete_calls = 0;

    std::string complete(const CompletionRequest&) override {
        ++complete_calls;
        return completion;
    }
    FunctionCallResponse call_function(const FunctionCallRequest&) override { return {"Overview", json::object()}; }
    EmbeddingVector embed(std::string_view) override { return {vector, "fixed"}; }
    std::string caption_frame(const FrameImage& f) override { return "caption " + std::to_string(f.timestamp_s); }
    std::string name() const override { return "fixed"; }
};

void expect_code(ErrorCode code, const std::function<void()>& fn) {
    try {
        fn();
        FAIL() << "expected " << code_name(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

}  // namespace

TEST(TokenCounter, HeuristicIsCeilingOfBytesOverFour) {
    EXPECT_EQ(heuristic_token_count(""), 0u);
    EXPECT_EQ(heuristic_token_count("a"), 1u);
    EXPECT_EQ(heuristic_token_count("abcd"), 1u);
    EXPECT_EQ(heuristic_token_count("abcde"), 2u);
    EXPECT_EQ(heuristic_token_count(std::string(6000, 'x')), 1500u);
}

TEST(ProviderClient, BlankCompletionIsResponseEmpty) {
    auto backend = std::make_shared<FixedBackend>();
    backend->completion = "  \n ";
    ProviderClient client(backend, 3);
    CompletionRequest req;
    req.prompt = "hello";
    expect_code(ErrorCode::ResponseEmpty, [&] { client.complete(req); });
    ASSERT_EQ(client.log().size(), 1u);
    EXPECT_EQ(client.log().records()[0].error_code, "response_empty");
}

TEST(ProviderClient, RejectsInvalidRequests) {
    auto backend = std::make_shared<FixedBackend>();
    ProviderClient client(backend, 3);
    CompletionRequest req;
    expect_code(ErrorCode::InvalidArgument, [&] { client.complete(req); });
    req.prompt = "x";
    req.temperature = 3.0;
    expect_code(ErrorCode::InvalidArgument, [&] { client.complete(req); });
    expect_code(ErrorCode::InvalidArgument, [&] { client.embed(""); });
    EXPECT_EQ(backend->complete_calls, 0);
}

TEST(ProviderClient, EmbeddingDimensionIsEnforced) {
    auto backend = std::make_shared<FixedBackend>();
    ProviderClient client(backend, 4);
    expect_code(ErrorCode::DimensionMismatch, [&] { client.embed("beach"); });
    backend->vector = {1.0, NAN, 0.0, 0.0};
    expect_code(ErrorCode::InvalidEmbedding, [&] { client.embed("beach"); });
    backend->vector = {1.0, 2.0, 3.0, 4.0};
    EXPECT_EQ(client.embed("beach").dimension(), 4u);
}

TEST(ProviderClient, CaptionsKeepInputOrder) {
    ProviderClient client(std::make_shared<FixedBackend>(), 3);
    std::vector<FrameImage> frames;
    for (int t : {3, 1, 2}) frames.push_back({"clip.mp4", t, {0xff, 0xd8}});
    auto caps = client.caption_frames(frames);
    EXPECT_EQ(caps, (std::vector<std::string>{"caption 3", "caption 1", "caption 2"}));
}

TEST(ProviderClient, EmptyFrameIsUnreadable) {
    ProviderClient client(std::make_shared<FixedBackend>(), 3);
    expect_code(ErrorCode::UnreadableFrame, [&] { client.caption_frame({"clip.mp4", 0, {}}); });
}

TEST(ProviderClient, LogsEveryCall) {
    TempDir dir;
    auto log = std::make_shared<ProviderLog>(dir / "calls.ndjson");
    ProviderClient client(std::make_shared<FixedBackend>(), 3, log);
    CompletionRequest req;
    req.prompt = "p";
    client.complete(req);
    client.embed("t");
    try {
        client.embed("");
    } catch (const Error&) {
    }
    EXPECT_EQ(log->size(), 2u);  // argument validation happens before the call
    auto text = util::read_file(dir / "calls.ndjson");
    auto lines = util::split_lines(text);
    EXPECT_EQ(json::parse(lines[0])["op"], "complete");
    EXPECT_EQ(json::parse(lines[1])["op"], "embed");
}

TEST(MockProvider, FirstMatchingRuleWinsAndUsesRetire) {
    ProviderScript script;
    script.on_complete("plan", "first", 1).on_complete("plan", "second").on_complete("", "catch-all");
    auto client = make_mock_client(script);
    CompletionRequest req;
    req.prompt = "make a plan";
    EXPECT_EQ(client->complete(req), "first");
    EXPECT_EQ(client->complete(req), "second");
    req.prompt = "other";
    EXPECT_EQ(client->complete(req), "catch-all");
}

TEST(MockProvider, InjectedErrorsSurface) {
    ProviderScript script;
    script.fail_on(CallKind::Complete, "boom", ErrorCode::ProviderUnavailable, 1).on_complete("", "fine");
    auto client = make_mock_client(script);
    CompletionRequest req;
    req.prompt = "boom";
    expect_code(ErrorCode::ProviderUnavailable, [&] { client->complete(req); });
    EXPECT_EQ(client->complete(req), "fine");
}

TEST(MockProvider, ScriptFromJson) {
    auto script = ProviderScript::from_json(json::parse(R"({
        "embedding_dimension": 8, "seed": 7,
        "rules": [
          {"kind": "complete", "regex": "^GOAL", "response": "regex hit"},
          {"kind": "function_call", "contains": "Retrieve", "response": {"name": "Retrieve", "arguments": {"query": "q"}}},
          {"kind": "embed", "contains": "odd", "dimension": 5},
          {"kind": "caption", "contains": "#2", "error": "unreadable_frame"}
        ],
        "fallback": {"complete": "fallback"}
    })"));
    auto client = make_mock_client(script);
    CompletionRequest req;
    req.prompt = "GOAL something";
    EXPECT_EQ(client->complete(req), "regex hit");
    req.prompt = "no GOAL at start";
    EXPECT_EQ(client->complete(req), "fallback");
    auto call = client->call_function({"Retrieve: beach", {}});
    EXPECT_EQ(call.name, "Retrieve");
    EXPECT_EQ(call.arguments["query"], "q");
    EXPECT_EQ(client->embed("normal").dimension(), 8u);
    expect_code(ErrorCode::DimensionMismatch, [&] { client->embed("odd one"); });
    expect_code(ErrorCode::UnreadableFrame, [&] { client->caption_frame({"v.mp4", 2, {1}}); });
    EXPECT_EQ(client->caption_frame({"v.mp4", 1, {1}}), "frame 1 caption");
}

TEST(MockProvider, UnknownRuleKindIsConfigError) {
    expect_code(ErrorCode::ConfigError,
                [] { ProviderScript::from_json(json::parse(R"({"rules":[{"kind":"dance"}]})")); });
}

TEST(MockProvider, PassthroughMapsContextToSingleParameter) {
    FunctionSchema retrieve{"Retrieve", "find", {{"type", "object"}, {"properties", {{"query", {{"type", "string"}}}}}}};
    FunctionSchema overview{"Overview", "sum", {{"type", "object"}, {"properties", json::object()}}};
    auto r = MockProvider::passthrough_call({"retrieve: Strolling around the Eiffel Tower", {retrieve, overview}});
    EXPECT_EQ(r.name, "Retrieve");
    EXPECT_EQ(r.arguments, (json{{"query", "Strolling around the Eiffel Tower"}}));
    auto o = MockProvider::passthrough_call({"Overview: everything", {retrieve, overview}});
    EXPECT_EQ(o.arguments, json::object());
}

TEST(MockEmbedder, DeterministicAndSeedSensitive) {
    auto a = hashed_bag_of_words("dog on the beach", 64, 1);
    auto b = hashed_bag_of_words("dog on the beach", 64, 1);
    auto c = hashed_bag_of_words("dog on the beach", 64, 2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    auto zero = hashed_bag_of_words("!!! ???", 64, 1);
    EXPECT_TRUE(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
}

TEST(Config, ParsesKnownKeys) {
    auto cfg = parse_config(R"(
        # comment
        provider.kind = http
        provider.base_url = http://127.0.0.1:9/v1
        provider.embedding_dimension = 8
        agent.memory_budget = 4000
        server.port = 9090
    )");
    EXPECT_EQ(cfg.provider.kind, "http");
    EXPECT_EQ(cfg.provider.embedding_dimension, 8u);
    EXPECT_EQ(cfg.memory_budget, 4000u);
    EXPECT_EQ(cfg.context_limit, 8192u);
    EXPECT_EQ(cfg.output_reserve(), 2048u);
    EXPECT_EQ(cfg.port, 9090);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    expect_code(ErrorCode::ConfigError, [] { parse_config("nonsense = 1"); });
    expect_code(ErrorCode::ConfigError, [] { parse_config("provider.kind = magic"); });
    expect_code(ErrorCode::ConfigError, [] { parse_config("agent.memory_budget = lots"); });
    expect_code(ErrorCode::ConfigError, [] { parse_config("just a line"); });
}

TEST(Config, RelativePathsResolveAgainstConfigFile) {
    TempDir dir;
    util::write_file_atomic(dir / "lave.conf", "mock.script = scripts/s.json\ntemplates.dir = /abs/t\n");
    auto cfg = load_config(dir / "lave.conf");
    EXPECT_EQ(fs::path(cfg.provider.mock_script), dir / "scripts/s.json");
    EXPECT_EQ(cfg.templates_dir, "/abs/t");
}

TEST(Config, RedactionNeverExposesTheKey) {
    Config cfg;
    cfg.provider.api_key_env = "LAVE_TEST_SECRET_KEY";
    ::setenv("LAVE_TEST_SECRET_KEY", "sk-very-secret-value", 1);
    auto j = cfg.to_redacted_json();
    EXPECT_EQ(j["provider"]["api_key"], "<redacted>");
    EXPECT_EQ(j.dump().find("sk-very-secret-value"), std::string::npos);
    ::unsetenv("LAVE_TEST_SECRET_KEY");
    EXPECT_EQ(cfg.to_redacted_json()["provider"]["api_key"], "<unset>");
}

// ---------------------------------------------------------------------------
// HTTP backend against a local OpenAI-compatible fake

namespace {

class FakeOpenAi {
public:
    std::atomic<int> failures_before_success{0};
    std::atomic<int> requests{0};
    std::string last_auth;
    json last_body;
    std::mutex mu;

    FakeOpenAi() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            record(req);
            if (failures_before_success > 0) {
                --failures_before_success;
                res.status = 503;
                return;
            }
            auto body = json::parse(req.body);
            json message = {{"role", "assistant"}};
            if (body.contains("tools")) {
                message["content"] = nullptr;
                message["tool_calls"] = json::array(
                    {{{"type", "function"},
                      {"function", {{"name", "Retrieve"}, {"arguments", R"({"query":"dog on the beach"})"}}}}});
            } else if (body["messages"][0]["content"].is_array()) {
                message["content"] = "a dog runs on sand";
            } else {
                message["content"] = "echo: " + body["messages"][0]["content"].get<std::string>();
            }
            res.set_content(json{{"choices", json::array({{{"message", message}}})}}.dump(), "application/json");
        });
        server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            record(req);
            res.set_content(json{{"data", json::array({{{"embedding", {0.5, 0.25, 0.125}}}})}}.dump(),
                            "application/json");
        });
        server_.Post("/deny/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeOpenAi() {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& prefix = "/v1") const { return "http://127.0.0.1:" + std::to_string(port_) + prefix; }

private:
    void record(const httplib::Request& req) {
        std::lock_guard lock(mu);
        ++requests;
        last_auth = req.get_header_value("Authorization");
        last_body = json::parse(req.body);
    }

    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

ProviderConfig http_config(const std::string& url) {
    ProviderConfig cfg;
    cfg.kind = "http";
    cfg.base_url = url;
    cfg.api_key_env = "LAVE_TEST_HTTP_KEY";
    cfg.embedding_dimension = 3;
    cfg.timeout_s = 2;
    cfg.retries = 2;
    return cfg;
}

}  // namespace

TEST(HttpProvider, CompletionEmbeddingFunctionCallAndCaption) {
    FakeOpenAi fake;
    ::setenv("LAVE_TEST_HTTP_KEY", "sk-test", 1);
    ProviderClient client(std::make_shared<HttpProvider>(http_config(fake.url())), 3);

    CompletionRequest req;
    req.prompt = "hello";
    EXPECT_EQ(client.complete(req), "echo: hello");
    EXPECT_EQ(fake.last_auth, "Bearer sk-test");
    EXPECT_EQ(fake.last_body["model"], "gpt-4");

    auto vec = client.embed("beach");
    EXPECT_EQ(vec.values, (std::vector<double>{0.5, 0.25, 0.125}));
    EXPECT_EQ(fake.last_body["model"], "text-embedding-ada-002");

    auto call = client.call_function({"Retrieve: dog on the beach", ActionRegistry().schemas()});
    EXPECT_EQ(call.name, "Retrieve");
    EXPECT_EQ(call.arguments["query"], "dog on the beach");
    EXPECT_EQ(fake.last_body["tools"].size(), 4u);
    EXPECT_EQ(fake.last_body["model"], "gpt-4-0613");

    EXPECT_EQ(client.caption_frame({"clip.mp4", 0, {0xff, 0xd8, 0xff}}), "a dog runs on sand");
    auto url = fake.last_body["messages"][0]["content"][1]["image_url"]["url"].get<std::string>();
    EXPECT_EQ(url, "data:image/jpeg;base64,/9j/");
    ::unsetenv("LAVE_TEST_HTTP_KEY");
}

TEST(HttpProvider, RetriesServerErrors) {
    FakeOpenAi fake;
    fake.failures_before_success = 2;
    ProviderClient client(std::make_shared<HttpProvider>(http_config(fake.url())), 3);
    CompletionRequest req;
    req.prompt = "again";
    EXPECT_EQ(client.complete(req), "echo: again");
    EXPECT_EQ(fake.requests.load(), 3);
}

TEST(HttpProvider, GivesUpAfterRetries) {
    FakeOpenAi fake;
    fake.failures_before_success = 10;
    ProviderClient client(std::make_shared<HttpProvider>(http_config(fake.url())), 3);
    CompletionRequest req;
    req.prompt = "again";
    expect_code(ErrorCode::ProviderUnavailable, [&] { client.complete(req); });
    EXPECT_EQ(fake.requests.load(), 3);
}

TEST(HttpProvider, AuthFailureIsNotRetried) {
    FakeOpenAi fake;
    ProviderClient client(std::make_shared<HttpProvider>(http_config(fake.url("/deny"))), 3);
    CompletionRequest req;
    req.prompt = "x";
    expect_code(ErrorCode::ProviderUnavailable, [&] { client.complete(req); });
}

TEST(HttpProvider, OfflineIsProviderUnavailable) {
    int port;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    auto cfg = http_config("http://127.0.0.1:" + std::to_string(port) + "/v1");
    cfg.retries = 0;
    cfg.timeout_s = 0.5;
    ProviderClient client(std::make_shared<HttpProvider>(cfg), 3);
    expect_code(ErrorCode::ProviderUnavailable, [&] { client.embed("anything"); });
}

TEST(Endpoint, SplitsOriginAndPrefix) {
    auto ep = Endpoint::parse("https://api.openai.com/v1/");
    EXPECT_EQ(ep.origin, "https://api.openai.com");
    EXPECT_EQ(ep.prefix, "/v1");
    expect_code(ErrorCode::ConfigError, [] { Endpoint::parse("api.openai.com"); });
}
