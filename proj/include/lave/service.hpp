#pragma once

// Session-scoped service binding agent, functions, project and stores.
// Every command on a session is serialized; its visible consequences are
// published as an ordered UiEvent log that a client can replay.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>

#include "lave/agent.hpp"
#include "lave/functions.hpp"
#include "lave/project.hpp"
#include "lave/vectorstore.hpp"

namespace lave {

// ---------------------------------------------------------------------------
// Events

enum class EventKind { ChatMessage, GalleryOrder, TimelineState, TrimWindow, PlanStatus };

constexpr std::string_view event_kind_name(EventKind k) noexcept {
    switch (k) {
        case EventKind::ChatMessage: return "chat_message";
        case EventKind::GalleryOrder: return "gallery_order";
        case EventKind::TimelineState: return "timeline_state";
        case EventKind::TrimWindow: return "trim_window";
        case EventKind::PlanStatus: return "plan_status";
    }
    return "chat_message";
}

inline EventKind parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::ChatMessage, EventKind::GalleryOrder, EventKind::TimelineState, EventKind::TrimWindow,
                   EventKind::PlanStatus})
        if (event_kind_name(k) == s) return k;
    fail(ErrorCode::InvalidArgument, "unknown event kind: " + std::string(s));
}

struct UiEvent {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::ChatMessage;
    json payload;

    json to_json() const { return {{"seq", seq}, {"kind", event_kind_name(kind)}, {"payload", payload}}; }

    static UiEvent from_json(const json& j) {
        return {j.at("seq").get<std::uint64_t>(), parse_event_kind(j.at("kind").get<std::string>()), j.at("payload")};
    }
};

/// Which event kind carries a function's UI update.
inline EventKind event_kind_for(const UiEffect& effect) {
    struct V {
        EventKind operator()(const NoEffect&) const { return EventKind::ChatMessage; }
        EventKind operator()(const GalleryReorder&) const { return EventKind::GalleryOrder; }
        EventKind operator()(const TimelineReorder&) const { return EventKind::TimelineState; }
        EventKind operator()(const ClipTrim&) const { return EventKind::TrimWindow; }
    };
    return std::visit(V{}, effect);
}

// ---------------------------------------------------------------------------
// Client-side view model

/// What a UI shows, rebuilt purely from the event log.
struct UiModel {
    std::uint64_t last_seq = 0;
    std::vector<AssetId> gallery_order;
    std::vector<AssetId> selection;
    json timeline = json::array();
    json chat = json::array();
    std::map<AssetId, json> trim_windows;
    json plan = nullptr;

    void apply(const UiEvent& e) {
        if (e.seq <= last_seq && last_seq != 0)
            fail(ErrorCode::InvalidArgument, "event " + std::to_string(e.seq) + " is out of order");
        last_seq = e.seq;
        switch (e.kind) {
            case EventKind::ChatMessage:
                chat.push_back({{"role", e.payload.at("role")}, {"content", e.payload.at("content")}});
                break;
            case EventKind::GalleryOrder:
                gallery_order = e.payload.at("order").get<std::vector<AssetId>>();
                selection = e.payload.value("selection", std::vector<AssetId>{});
                break;
            case EventKind::TimelineState:
                timeline = e.payload.at("clips");
                break;
            case EventKind::TrimWindow:
                trim_windows[e.payload.at("asset_id").get<AssetId>()] = e.payload;
                break;
            case EventKind::PlanStatus:
                plan = e.payload;
                break;
        }
    }

    void apply_all(const std::vector<UiEvent>& events) {
        for (const auto& e : events) apply(e);
    }

    /// The comparable part of the view (trim windows are transient dialog state).
    json view_state() const {
        return {{"gallery_order", gallery_order},
                {"selection", selection},
                {"timeline", timeline},
                {"chat", chat},
                {"plan", plan}};
    }
};

// ---------------------------------------------------------------------------
// Sessions

struct ServiceOptions {
    std::shared_ptr<ProviderClient> provider;
    TemplateSet templates;
    std::function<std::unique_ptr<MediaEngine>()> make_engine = [] { return std::make_unique<StubMediaEngine>(); };
    AgentOptions agent;
};

class Session {
public:
    Session(std::string id, Project project, const ServiceOptions& opts)
        : id_(std::move(id)), project_(std::move(project)), opts_(opts), store_(opts.provider),
          engine_(opts.make_engine()),
          agent_(opts.provider, [this](const FunctionCall& call) { return dispatch(call); }, opts.templates,
                 opts.agent) {
        store_.load(project_.index_dir());
        restore_transcript();
        emit(EventKind::GalleryOrder, gallery_payload());
        emit(EventKind::TimelineState, timeline_payload());
        for (const auto& m : agent_.transcript()) emit(EventKind::ChatMessage, chat_payload(m));
    }

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const noexcept { return id_; }

    /// Empty text approves the next planned action.
    std::vector<UiEvent> post_chat(std::string_view text) {
        std::lock_guard lock(mu_);
        auto mark = events_.size();
        auto before = agent_.transcript().size();
        auto turn = util::trim(text).empty() ? agent_.approve_next() : agent_.submit_user_message(text);
        const auto& transcript = agent_.transcript();
        for (auto i = before; i < transcript.size(); ++i) emit(EventKind::ChatMessage, chat_payload(transcript[i]));
        if (turn.outcome) apply_effect(turn.outcome->ui_effect);
        if (turn.plan_changed) emit(EventKind::PlanStatus, agent_.plan_status());
        persist_transcript();
        project_.save();
        return slice(mark);
    }

    std::vector<UiEvent> approve() { return post_chat(""); }

    /// Manual editing commands: {"op": "add"|"reorder"|"trim"|"remove"|"undo"|"render"|
    /// "select"|"deselect"|"select_all"|"deselect_all", ...}.
    std::vector<UiEvent> direct_edit(const json& cmd, json* result = nullptr) {
        std::lock_guard lock(mu_);
        auto mark = events_.size();
        auto op = cmd.value("op", std::string{});
        auto ids = [&](const char* key) {
            if (!cmd.contains(key) || !cmd[key].is_array())
                fail(ErrorCode::InvalidRequest, std::string("\"") + key + "\" must be a list of video IDs");
            return cmd[key].get<std::vector<AssetId>>();
        };
        auto& tl = project_.timeline;
        auto& gallery = project_.gallery;
        try {
            if (op == "add") {
                tl.add(cmd.value("selected", false) ? gallery.selected_in_display_order() : ids("ids"), gallery);
            } else if (op == "reorder") {
                tl.reorder(ids("order"));
            } else if (op == "trim") {
                auto id = cmd.at("asset_id").get<AssetId>();
                tl.set_trim(id, cmd.at("start_s").get<int>(), cmd.at("end_s").get<int>(), gallery);
                emit(EventKind::TrimWindow, trim_payload(*tl.find(id), true, "manual"));
            } else if (op == "remove") {
                if (cmd.value("all", false))
                    tl.clear();
                else
                    tl.remove(ids("ids"));
            } else if (op == "undo") {
                tl.undo();
            } else if (op == "render") {
                auto artifact = render_preview(tl, gallery, *engine_, project_.output_dir());
                if (result) *result = artifact.to_json();
            } else if (op == "select" || op == "deselect" || op == "select_all" || op == "deselect_all") {
                if (op == "select") gallery.select(ids("ids"));
                if (op == "deselect") gallery.deselect(ids("ids"));
                if (op == "select_all") gallery.select_all();
                if (op == "deselect_all") gallery.deselect_all();
                emit(EventKind::GalleryOrder, gallery_payload());
                project_.save();
                return slice(mark);
            } else {
                fail(ErrorCode::InvalidRequest, "unknown timeline operation \"" + op + "\"");
            }
        } catch (const json::exception& e) {
            fail(ErrorCode::InvalidRequest, std::string("malformed edit command: ") + e.what());
        }
        emit(EventKind::TimelineState, timeline_payload());
        project_.save();
        return slice(mark);
    }

    /// LLM trim from the trim dialog; the window changes only on a match.
    std::vector<UiEvent> trim_dialog(AssetId id, std::string_view command) {
        std::lock_guard lock(mu_);
        auto mark = events_.size();
        auto& tl = project_.timeline;
        if (!tl.contains(id))
            fail(ErrorCode::ClipNotOnTimeline, "video ID=" + std::to_string(id) + " is not on the timeline");
        auto result = trim_clip(function_context(), project_.gallery.at(id), command);
        if (result.matched) {
            tl.set_trim(id, result.start_s, result.end_s, project_.gallery, result.rationale);
            emit(EventKind::TimelineState, timeline_payload());
            emit(EventKind::TrimWindow, trim_payload(*tl.find(id), true, "llm"));
        } else {
            auto payload = trim_payload(*tl.find(id), false, "llm");
            payload["rationale"] = result.rationale;
            emit(EventKind::TrimWindow, payload);
        }
        project_.save();
        return slice(mark);
    }

    std::vector<UiEvent> events_since(std::uint64_t seq) const {
        std::lock_guard lock(mu_);
        return since_locked(seq);
    }

    /// Blocks until an event newer than `seq` exists, the timeout elapses or the session closes.
    std::vector<UiEvent> wait_events(std::uint64_t seq, std::chrono::milliseconds timeout) const {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, timeout, [&] { return closed_ || (!events_.empty() && events_.back().seq > seq); });
        return since_locked(seq);
    }

    json gallery_view() const {
        std::lock_guard lock(mu_);
        json cards = json::array();
        for (const auto& a : project_.gallery.ordered())
            cards.push_back({{"id", a.id},
                             {"title", a.narration.title},
                             {"summary", a.narration.summary},
                             {"duration_s", a.duration_s},
                             {"selected", project_.gallery.selection().count(a.id) > 0},
                             {"on_timeline", project_.timeline.contains(a.id)}});
        return {{"videos", cards}, {"order", project_.gallery.display_order()}};
    }

    json timeline_view() const {
        std::lock_guard lock(mu_);
        return timeline_payload();
    }

    /// Server-side counterpart of UiModel::view_state.
    json view_state() const {
        std::lock_guard lock(mu_);
        json chat = json::array();
        for (const auto& m : agent_.transcript()) chat.push_back({{"role", role_name(m.role)}, {"content", m.content}});
        auto g = gallery_payload();
        bool planned = agent_.plan().has_value();
        return {{"gallery_order", g["order"]},
                {"selection", g["selection"]},
                {"timeline", timeline_payload()["clips"]},
                {"chat", chat},
                {"plan", planned ? agent_.plan_status() : json(nullptr)}};
    }

    /// Persists the project, embeddings and transcript.
    void close() {
        std::lock_guard lock(mu_);
        if (closed_) return;
        persist_transcript();
        project_.save();
        store_.save(project_.index_dir());
        closed_ = true;
        cv_.notify_all();
    }

    bool closed() const {
        std::lock_guard lock(mu_);
        return closed_;
    }

    // Unsynchronized accessors for tests and the CLI; do not use while commands are in flight.
    const Project& project() const noexcept { return project_; }
    const Agent& agent() const noexcept { return agent_; }
    const VectorStore& store() const noexcept { return store_; }
    MediaEngine& engine() noexcept { return *engine_; }

private:
    FunctionContext function_context() const {
        return {opts_.provider, opts_.templates, opts_.agent.count_tokens, opts_.agent.context_limit};
    }

    FunctionOutcome dispatch(const FunctionCall& call) {
        auto ctx = function_context();
        const auto& gallery = project_.gallery;
        switch (call.name) {
            case FunctionName::Overview:
                return overview(ctx, gallery.ordered());
            case FunctionName::Brainstorm:
                return brainstorm(ctx, gallery.ordered(),
                                  call.arg("creative_guidance").value_or(std::string(kDefaultCreativeGuidance)));
            case FunctionName::Retrieve: {
                for (const auto& a : gallery.assets())
                    if (a.narration.complete()) store_.upsert(a);
                auto outcome = retrieve_and_present(store_, gallery.ordered(), call.arg("query").value_or(""));
                store_.save(project_.index_dir());
                return outcome;
            }
            case FunctionName::Storyboard:
                return storyboard(ctx, project_.timeline_assets(), call.arg("narrative_guidance")).second;
        }
        fail(ErrorCode::UnknownFunction, "unhandled function");
    }

    void apply_effect(const UiEffect& effect) {
        if (auto* g = std::get_if<GalleryReorder>(&effect)) {
            std::vector<AssetId> ids;
            for (const auto& r : g->ranking) ids.push_back(r.asset_id);
            project_.gallery.apply_ranking(ids);
            auto payload = gallery_payload();
            json ranking = json::array();
            for (const auto& r : g->ranking) ranking.push_back({{"asset_id", r.asset_id}, {"cosine_distance", r.cosine_distance}});
            payload["ranking"] = ranking;
            emit(EventKind::GalleryOrder, payload);
        } else if (auto* t = std::get_if<TimelineReorder>(&effect)) {
            project_.timeline.reorder(t->order);
            emit(EventKind::TimelineState, timeline_payload());
        } else if (auto* c = std::get_if<ClipTrim>(&effect)) {
            project_.timeline.set_trim(c->asset_id, c->start_s, c->end_s, project_.gallery, c->rationale);
            emit(EventKind::TimelineState, timeline_payload());
            emit(EventKind::TrimWindow, trim_payload(*project_.timeline.find(c->asset_id), true, "llm"));
        }
    }

    json gallery_payload() const {
        const auto& sel = project_.gallery.selection();
        return {{"order", project_.gallery.display_order()},
                {"selection", std::vector<AssetId>(sel.begin(), sel.end())}};
    }

    json timeline_payload() const { return {{"clips", project_.timeline.to_json()}}; }

    static json chat_payload(const ChatMessage& m) { return {{"role", role_name(m.role)}, {"content", m.content}}; }

    static json trim_payload(const TimelineClip& c, bool matched, std::string_view source) {
        return {{"asset_id", c.asset_id},
                {"start_s", c.start_s},
                {"end_s", c.end_s},
                {"rationale", c.trim_rationale ? json(*c.trim_rationale) : json(nullptr)},
                {"matched", matched},
                {"source", source}};
    }

    void emit(EventKind kind, json payload) {
        events_.push_back({++seq_, kind, std::move(payload)});
        cv_.notify_all();
    }

    std::vector<UiEvent> slice(std::size_t from) const { return {events_.begin() + static_cast<std::ptrdiff_t>(from), events_.end()}; }

    std::vector<UiEvent> since_locked(std::uint64_t seq) const {
        auto it = std::upper_bound(events_.begin(), events_.end(), seq,
                                   [](std::uint64_t s, const UiEvent& e) { return s < e.seq; });
        return {it, events_.end()};
    }

    void restore_transcript() {
        auto path = project_.transcript_path();
        if (!fs::exists(path)) return;
        std::vector<ChatMessage> messages;
        auto text = util::read_file(path);
        for (auto line : util::split_lines(text)) {
            if (util::trim(line).empty()) continue;
            auto j = json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;  // a torn final record from an interrupted write
            messages.push_back({parse_role(j.at("role").get<std::string>()), j.at("content").get<std::string>(),
                                j.value("tokens", std::size_t{0})});
        }
        persisted_ = messages.size();
        agent_.restore_transcript(std::move(messages));
    }

    void persist_transcript() {
        const auto& t = agent_.transcript();
        for (; persisted_ < t.size(); ++persisted_) util::append_line(project_.transcript_path(), t[persisted_].to_json().dump());
    }

    std::string id_;
    Project project_;
    ServiceOptions opts_;
    VectorStore store_;
    std::unique_ptr<MediaEngine> engine_;
    Agent agent_;

    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::vector<UiEvent> events_;
    std::uint64_t seq_ = 0;
    std::size_t persisted_ = 0;
    bool closed_ = false;
};

class SessionManager {
public:
    explicit SessionManager(ServiceOptions opts) : opts_(std::move(opts)) {}

    std::shared_ptr<Session> open_session(const fs::path& project_path) {
        auto project = Project::open(project_path);
        auto root = fs::weakly_canonical(project.root()).string();
        std::lock_guard lock(mu_);
        for (const auto& [id, s] : sessions_)
            if (roots_.at(id) == root)
                fail(ErrorCode::InvalidRequest, "project " + root + " is already open in session " + id);
        auto id = "s" + std::to_string(++counter_);
        auto session = std::make_shared<Session>(id, std::move(project), opts_);
        sessions_[id] = session;
        roots_[id] = root;
        return session;
    }

    std::shared_ptr<Session> get(const std::string& id) const {
        std::lock_guard lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) fail(ErrorCode::SessionNotFound, "no session " + id);
        return it->second;
    }

    void close_session(const std::string& id) {
        std::shared_ptr<Session> s;
        {
            std::lock_guard lock(mu_);
            auto it = sessions_.find(id);
            if (it == sessions_.end()) fail(ErrorCode::SessionNotFound, "no session " + id);
            s = it->second;
            sessions_.erase(it);
            roots_.erase(id);
        }
        s->close();
    }

    void close_all() {
        std::map<std::string, std::shared_ptr<Session>> all;
        {
            std::lock_guard lock(mu_);
            all.swap(sessions_);
            roots_.clear();
        }
        for (auto& [id, s] : all) s->close();
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return sessions_.size();
    }

    const ServiceOptions& options() const noexcept { return opts_; }

private:
    ServiceOptions opts_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<std::string, std::string> roots_;
    std::uint64_t counter_ = 0;
};

}  // namespace lave
