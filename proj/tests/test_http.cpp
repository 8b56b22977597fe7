#include <gtest/gtest.h>

#include <thread>

#include "support.hpp"

using namespace lave;
using lave::test::TempDir;

namespace {

ProviderScript script() {
    ProviderScript s;
    s.embedding_dimension = 32;
    s.on_complete("User: summarize\n", "GOAL: know the footage\nACTIONS:\n1. Overview:")
        .on_complete("Summarize the common topics", "Paris: ID=0, ID=1, ID=2\nOutdoors: ID=3, ID=4")
        .on_complete("Trimming command:", R"(Final Answer: {"segment": [2, 6, "the pan"]})");
    return s;
}

/// A server on a free port with one travel project on disk.
class HttpFixture : public ::testing::Test {
protected:
    void SetUp() override {
        auto p = Project::create(dir_ / "proj");
        for (const auto& a : lave::test::travel_gallery()) p.gallery.add_asset(a);
        p.save();
        project_ = p.root();

        ServiceOptions opts;
        opts.provider = make_mock_client(script());
        sessions_ = std::make_unique<SessionManager>(opts);
        Config cfg;
        cfg.provider.api_key_env = "LAVE_HTTP_TEST_KEY";
        server_ = std::make_unique<HttpServer>(*sessions_, cfg.to_redacted_json());
        port_ = server_->bind("127.0.0.1", 0);
        thread_ = std::thread([this] { server_->listen(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(5, 0);
        for (int i = 0; i < 200 && !server_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }

    void TearDown() override {
        sessions_->close_all();
        server_->stop();
        thread_.join();
    }

    std::pair<int, json> post(const std::string& path, const json& body = json::object()) {
        auto res = client_->Post(path, body.dump(), "application/json");
        if (!res) return {0, nullptr};
        return {res->status, json::parse(res->body)};
    }

    std::pair<int, json> get(const std::string& path) {
        auto res = client_->Get(path);
        if (!res) return {0, nullptr};
        return {res->status, json::parse(res->body)};
    }

    std::string open() {
        auto [status, j] = post("/api/sessions", {{"project", project_.string()}});
        EXPECT_EQ(status, 201);
        return j["session_id"].get<std::string>();
    }

    TempDir dir_;
    fs::path project_;
    std::unique_ptr<SessionManager> sessions_;
    std::unique_ptr<HttpServer> server_;
    std::thread thread_;
    std::unique_ptr<httplib::Client> client_;
    int port_ = 0;
};

}  // namespace

TEST(HttpStatus, Mapping) {
    EXPECT_EQ(http_status_for(ErrorCode::SessionNotFound), 404);
    EXPECT_EQ(http_status_for(ErrorCode::DuplicateOnTimeline), 409);
    EXPECT_EQ(http_status_for(ErrorCode::ProviderUnavailable), 502);
    EXPECT_EQ(http_status_for(ErrorCode::MalformedStructuredOutput), 422);
    EXPECT_EQ(http_status_for(ErrorCode::InvalidRange), 400);
}

TEST_F(HttpFixture, HealthAndRedactedConfig) {
    ::setenv("LAVE_HTTP_TEST_KEY", "sk-do-not-leak", 1);
    auto [status, cfg] = get("/api/config");
    ::unsetenv("LAVE_HTTP_TEST_KEY");
    EXPECT_EQ(status, 200);
    auto snapshot = fs::path(LAVE_SOURCE_DIR) / "tests/fixtures/config_redacted.json";
    if (std::getenv("LAVE_UPDATE_GOLDEN")) util::write_file_atomic(snapshot, cfg.dump(2) + "\n");
    EXPECT_EQ(cfg, json::parse(util::read_file(snapshot)));
    EXPECT_EQ(cfg.dump().find("sk-do-not-leak"), std::string::npos);
    EXPECT_EQ(get("/api/health").second["status"], "ok");
}

TEST_F(HttpFixture, SessionLifecycleAndErrors) {
    auto id = open();
    EXPECT_EQ(id, "s1");
    auto [dup, err] = post("/api/sessions", {{"project", project_.string()}});
    EXPECT_EQ(dup, 400);
    EXPECT_EQ(err["error"]["code"], "invalid_request");
    EXPECT_EQ(post("/api/sessions", {{"project", (dir_ / "none").string()}}).first, 404);
    EXPECT_EQ(post("/api/sessions").first, 400);

    auto bad = client_->Post("/api/sessions", "[1, 2", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);

    EXPECT_EQ(get("/api/sessions/s7/gallery").first, 404);
    auto del = client_->Delete("/api/sessions/" + id);
    ASSERT_TRUE(del);
    EXPECT_EQ(del->status, 200);
    EXPECT_EQ(get("/api/sessions/" + id + "/state").first, 404);
}

TEST_F(HttpFixture, ChatApproveAndEvents) {
    auto id = open();
    auto base = "/api/sessions/" + id;
    auto [s1, planned] = post(base + "/chat", {{"text", "summarize"}});
    EXPECT_EQ(s1, 200);
    ASSERT_EQ(planned["events"].size(), 3u);
    EXPECT_EQ(planned["events"][2]["kind"], "plan_status");

    auto [s2, ran] = post(base + "/approve");
    EXPECT_EQ(s2, 200);
    EXPECT_EQ(ran["events"][0]["payload"]["content"],
              "Paris: ID=0, ID=1, ID=2\nOutdoors: ID=3, ID=4\n\nAll steps of the plan are done.");

    auto [s3, evs] = get(base + "/events?since=4");
    EXPECT_EQ(s3, 200);
    for (const auto& e : evs["events"]) EXPECT_GT(e["seq"].get<int>(), 4);
    EXPECT_EQ(get(base + "/events?since=abc").first, 400);

    UiModel model;
    auto all = get(base + "/events").second;
    for (const auto& e : all["events"]) model.apply(UiEvent::from_json(e));
    EXPECT_EQ(model.view_state(), get(base + "/state").second);
}

TEST_F(HttpFixture, TimelineAndGalleryOps) {
    auto base = "/api/sessions/" + open();
    EXPECT_EQ(post(base + "/gallery/select", {{"ids", {4, 1}}}).first, 200);
    auto [added, body] = post(base + "/timeline/add", {{"selected", true}});
    EXPECT_EQ(added, 200);
    EXPECT_EQ(body["events"][0]["payload"]["clips"].size(), 2u);
    EXPECT_EQ(get(base + "/timeline").second["clips"][0]["asset_id"], 1);

    auto [dup, err] = post(base + "/timeline/add", {{"ids", {1}}});
    EXPECT_EQ(dup, 409);
    EXPECT_EQ(err["error"]["code"], "duplicate_on_timeline");
    EXPECT_EQ(post(base + "/timeline/trim", {{"asset_id", 1}, {"start_s", 9}, {"end_s", 3}}).first, 400);
    EXPECT_EQ(post(base + "/timeline/trim", {{"asset_id", 0}, {"start_s", 1}, {"end_s", 3}}).first, 404);
    EXPECT_EQ(post(base + "/timeline/shuffle").first, 400);
    EXPECT_EQ(post(base + "/gallery/add").first, 400);

    auto [trimmed, t] = post(base + "/trim-dialog", {{"asset_id", 1}, {"command", "the pan"}});
    EXPECT_EQ(trimmed, 200);
    EXPECT_EQ(t["events"][1]["payload"]["start_s"], 2);

    auto [rendered, r] = post(base + "/timeline/render");
    EXPECT_EQ(rendered, 200);
    EXPECT_EQ(r["artifact"]["total_duration_s"], 4.0 + 18.0);

    EXPECT_EQ(post(base + "/timeline/undo").first, 200);
    auto card = get(base + "/gallery").second["videos"];
    EXPECT_EQ(card.size(), 5u);
    EXPECT_EQ(card[1]["on_timeline"], true);
    EXPECT_EQ(card[1]["selected"], true);
}

TEST_F(HttpFixture, EventStreamDeliversFramesInOrder) {
    auto id = open();
    std::thread poster([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        httplib::Client c("127.0.0.1", port_);
        c.Post("/api/sessions/" + id + "/gallery/select_all", "{}", "application/json");
    });

    std::string buffer;
    std::vector<std::uint64_t> ids;
    std::vector<std::string> kinds;
    httplib::Client sse("127.0.0.1", port_);
    sse.set_read_timeout(5, 0);
    sse.Get("/api/sessions/" + id + "/stream?since=0", [&](const char* data, std::size_t n) {
        buffer.append(data, n);
        std::size_t end;
        while ((end = buffer.find("\n\n")) != std::string::npos) {
            auto frame = buffer.substr(0, end);
            buffer.erase(0, end + 2);
            if (frame.rfind("id: ", 0) != 0) continue;
            ids.push_back(std::stoull(frame.substr(4)));
            auto ev = frame.find("event: ");
            kinds.push_back(frame.substr(ev + 7, frame.find('\n', ev) - ev - 7));
            auto data_line = frame.substr(frame.find("data: ") + 6);
            EXPECT_EQ(json::parse(data_line)["seq"], ids.back());
        }
        return ids.size() < 3;
    });
    poster.join();
    ASSERT_EQ(ids.size(), 3u);
    EXPECT_EQ(ids, (std::vector<std::uint64_t>{1, 2, 3}));
    EXPECT_EQ(kinds, (std::vector<std::string>{"gallery_order", "timeline_state", "gallery_order"}));

    auto missing = client_->Get("/api/sessions/zz/stream");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
}
