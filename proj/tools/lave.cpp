// lave: operator CLI.
//
//   lave ingest <media-dir> --project <dir> [--config <file>]
//   lave reindex --project <dir> [--config <file>]
//   lave serve [--config <file>] [--bind <host>] [--port <n>]
//   lave replay <script.json> [--project <dir>] [--out <file>]

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "lave/lave.hpp"

namespace {

using namespace lave;

std::shared_ptr<ProviderClient> make_provider(const Config& cfg) {
    auto log = cfg.provider.log_file.empty() ? std::make_shared<ProviderLog>()
                                             : std::make_shared<ProviderLog>(fs::path(cfg.provider.log_file));
    if (cfg.provider.kind == "http")
        return std::make_shared<ProviderClient>(std::make_shared<HttpProvider>(cfg.provider),
                                                cfg.provider.embedding_dimension, log);
    ProviderScript script;
    if (!cfg.provider.mock_script.empty()) script = ProviderScript::from_json(json::parse(util::read_file(cfg.provider.mock_script)));
    return make_mock_client(std::move(script), log);
}

Config load_or_default(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

TemplateSet templates_for(const Config& cfg) {
    return cfg.templates_dir.empty() ? TemplateSet{} : TemplateSet::load(cfg.templates_dir);
}

Project open_or_create(const fs::path& dir) {
    return fs::exists(dir / Project::kFileName) ? Project::open(dir) : Project::create(dir);
}

int cmd_ingest(const std::string& media_dir, const std::string& project_dir, const Config& cfg) {
    auto provider = make_provider(cfg);
    auto project = open_or_create(project_dir);
    auto cache = std::make_shared<NarrationCache>(project.cache_dir());
    Ingestor ingestor(provider, std::make_shared<OpenCvDecoder>(), cache, project.frames_dir());
    auto report = ingestor.ingest_directory(media_dir);

    VectorStore store(provider);
    store.load(project.index_dir());
    json added = json::array();
    for (const auto& a : report.assets) {
        project.gallery.add_asset(a);
        store.upsert(a);
        added.push_back({{"id", a.id}, {"title", a.narration.title}, {"duration_s", a.duration_s}});
    }
    project.save();
    store.save(project.index_dir());

    json failures = json::array();
    for (const auto& f : report.failures)
        failures.push_back({{"file", f.media_path}, {"code", code_name(f.code)}, {"message", f.message}});
    std::cout << json{{"ingested", added}, {"failures", failures}}.dump(2) << "\n";
    return report.failures.empty() ? 0 : 2;
}

int cmd_reindex(const std::string& project_dir, const Config& cfg) {
    auto project = Project::open(project_dir);
    VectorStore store(make_provider(cfg));
    store.rebuild(project.gallery.assets());
    fs::remove_all(project.index_dir());
    store.save(project.index_dir());
    std::cout << json{{"indexed", store.size()}}.dump() << "\n";
    return 0;
}

volatile std::sig_atomic_t g_stop = 0;

int cmd_serve(Config cfg, const std::string& bind, int port) {
    if (!bind.empty()) cfg.bind = bind;
    if (port >= 0) cfg.port = port;
    ServiceOptions opts;
    opts.provider = make_provider(cfg);
    opts.templates = templates_for(cfg);
    opts.make_engine = [] { return std::make_unique<OpenCvMediaEngine>(); };
    opts.agent.memory_budget = cfg.memory_budget;
    opts.agent.context_limit = cfg.context_limit;
    SessionManager sessions(opts);
    HttpServer server(sessions, cfg.to_redacted_json());
    int bound = server.bind(cfg.bind, cfg.port);
    std::cerr << "listening on " << cfg.bind << ":" << bound << "\n";

    std::signal(SIGINT, [](int) { g_stop = 1; });
    std::signal(SIGTERM, [](int) { g_stop = 1; });
    std::atomic<bool> done{false};
    std::thread watcher([&] {
        while (!done && !g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    });
    server.listen();
    done = true;
    watcher.join();
    sessions.close_all();
    return 0;
}

/// Builds a gallery asset from an inline script entry. Captions may be given
/// per second or default to "second <t>".
VideoAsset inline_asset(const json& j) {
    VideoAsset a;
    a.id = j.at("id").get<AssetId>();
    a.narration = {j.at("title").get<std::string>(), j.at("summary").get<std::string>()};
    a.duration_s = j.value("duration_s", 10);
    a.media_path = j.value("media_path", "inline://" + std::to_string(a.id));
    a.media_hash = digest::sha256(a.media_path + "\n" + a.narration.title);
    if (j.contains("captions")) {
        int t = 0;
        for (const auto& c : j["captions"]) a.frame_captions.push_back({t++, c.get<std::string>()});
        a.duration_s = t;
    } else {
        for (int t = 0; t < a.duration_s; ++t) a.frame_captions.push_back({t, "second " + std::to_string(t)});
    }
    return a;
}

int cmd_replay(const std::string& script_path, std::string project_dir, const std::string& out_path) {
    auto script = json::parse(util::read_file(script_path));
    ServiceOptions opts;
    opts.provider = make_mock_client(ProviderScript::from_json(script.value("provider_script", json::object())));
    auto settings = script.value("settings", json::object());
    opts.agent.memory_budget = settings.value("memory_budget", ConversationMemory::kDefaultBudget);
    opts.agent.context_limit = settings.value("context_limit", std::size_t{8192});

    bool temp = project_dir.empty();
    if (temp) project_dir = (fs::temp_directory_path() / ("lave-replay-" + std::to_string(::getpid()))).string();
    if (temp) fs::remove_all(project_dir);
    auto project = open_or_create(project_dir);
    for (const auto& a : script.value("assets", json::array())) project.gallery.add_asset(inline_asset(a));
    project.save();

    SessionManager sessions(opts);
    auto session = sessions.open_session(project_dir);
    json errors = json::array();
    std::size_t index = 0;
    for (const auto& step : script.value("steps", json::array())) {
        try {
            if (step.contains("chat")) {
                session->post_chat(step["chat"].get<std::string>());
            } else if (step.value("approve", false)) {
                session->approve();
            } else if (step.contains("edit")) {
                session->direct_edit(step["edit"]);
            } else if (step.contains("trim")) {
                session->trim_dialog(step["trim"].at("asset_id").get<AssetId>(),
                                     step["trim"].at("command").get<std::string>());
            } else {
                fail(ErrorCode::InvalidRequest, "unrecognized step");
            }
        } catch (const Error& e) {
            errors.push_back({{"step", index}, {"code", e.code_name()}, {"message", e.what()}});
        }
        ++index;
    }
    json out = {{"project", session->project().to_json()},
                {"view_state", session->view_state()},
                {"events", events_to_json(session->events_since(0))},
                {"executions", session->agent().executions()},
                {"approvals", session->agent().approvals()},
                {"errors", errors}};
    sessions.close_all();
    if (temp) fs::remove_all(project_dir);

    if (out_path.empty())
        std::cout << out.dump(2) << "\n";
    else
        util::write_file_atomic(out_path, out.dump(2) + "\n");
    return errors.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Language-augmented video editing service"};
    app.require_subcommand(1);

    std::string config_path, project_dir, media_dir, script_path, out_path, bind;
    int port = -1;

    auto* ingest = app.add_subcommand("ingest", "Caption, narrate and index every video in a directory");
    ingest->add_option("media_dir", media_dir, "Directory of video files")->required()->check(CLI::ExistingDirectory);
    ingest->add_option("--project", project_dir, "Project directory (created if missing)")->required();
    ingest->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);

    auto* reindex = app.add_subcommand("reindex", "Re-embed every gallery narration");
    reindex->add_option("--project", project_dir, "Project directory")->required();
    reindex->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    serve->add_option("--bind", bind, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)");

    auto* replay = app.add_subcommand("replay", "Run a scripted session against the mock provider and dump the result");
    replay->add_option("script", script_path, "Replay script (JSON)")->required()->check(CLI::ExistingFile);
    replay->add_option("--project", project_dir, "Keep the project in this directory");
    replay->add_option("--out", out_path, "Write the result here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(media_dir, project_dir, load_or_default(config_path));
        if (*reindex) return cmd_reindex(project_dir, load_or_default(config_path));
        if (*serve) return cmd_serve(load_or_default(config_path), bind, port);
        if (*replay) return cmd_replay(script_path, project_dir, out_path);
    } catch (const Error& e) {
        std::cerr << "error [" << e.code_name() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
