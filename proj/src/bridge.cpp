#include "advisor/bridge.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <thread>

#include "advisor/io.hpp"

namespace advisor {

namespace {

using Json = nlohmann::json;

Json cell_json(GridCell c) { return Json::array({c.col, c.row}); }

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

struct Reader {
  const Json& j;
  std::size_t end;

  const Json& at(const char* key) const {
    if (!j.contains(key)) throw FrameError(end, std::string("missing field ") + key);
    return j.at(key);
  }
  template <typename T>
  T get(const char* key) const {
    try {
      return at(key).get<T>();
    } catch (const Json::exception&) {
      throw FrameError(end, std::string("bad field ") + key);
    }
  }
  template <typename T>
  std::optional<T> maybe(const char* key) const {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get<T>(key);
  }
  GridCell cell(const Json& c) const {
    if (!c.is_array() || c.size() != 2) throw FrameError(end, "bad cell");
    return {c[0].get<int>(), c[1].get<int>()};
  }
};

std::string phase_name(Simulation::Phase p) {
  switch (p) {
    case Simulation::Phase::AwaitingAgent: return "awaiting_agent";
    case Simulation::Phase::AwaitingSuggestion: return "awaiting_suggestion";
    case Simulation::Phase::TrialEnded: return "trial_ended";
    case Simulation::Phase::Closed: return "closed";
  }
  return "closed";
}

}  // namespace

std::string encode(const WireMessage& message) {
  Json j;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, StateView>) {
          j["type"] = "state_view";
          j["session"] = m.session;
          j["simulation"] = m.simulation;
          j["trial"] = m.trial;
          j["step"] = m.step;
          j["phase"] = m.phase;
          j["domain"] = m.domain;
          Json cells = Json::array();
          for (GridCell c : m.cells) cells.push_back(cell_json(c));
          j["grid"] = {{"columns", m.columns}, {"rows", m.rows}, {"cells", std::move(cells)}};
          j["agent"] = cell_json(m.agent);
          j["facts"] = m.facts;
          j["types"] = m.types;
          j["type_belief"] = opt(m.type_belief);
          j["expected_type"] = opt(m.expected_type);
          j["asks_left"] = opt(m.asks_left);
        } else if constexpr (std::is_same_v<T, AskRequest>) {
          j = {{"type", "ask_request"}, {"actions", m.actions}, {"names", m.names}, {"deadline", m.deadline}};
        } else if constexpr (std::is_same_v<T, TrialSummary>) {
          j = {{"type", "trial_summary"}, {"record", record_to_json(m.record)}};
        } else if constexpr (std::is_same_v<T, Suggest>) {
          j = {{"type", "suggest"}, {"action", m.action ? Json(*m.action) : Json("none")}};
        } else if constexpr (std::is_same_v<T, Start>) {
          j = {{"type", "start"}, {"version", m.version}};
        } else if constexpr (std::is_same_v<T, Reset>) {
          j = {{"type", "reset"}};
        } else {
          j = {{"type", "error"}, {"code", m.code}, {"message", m.message}};
        }
      },
      message);
  return j.dump();
}

WireMessage decode(const std::string& frame) {
  Json j;
  try {
    j = Json::parse(frame);
  } catch (const Json::parse_error& e) {
    throw FrameError(std::min(e.byte > 0 ? e.byte - 1 : 0, frame.size()), "malformed JSON");
  }
  const Reader r{j, frame.size()};
  if (!j.is_object()) throw FrameError(0, "frame is not an object");
  const std::string type = r.get<std::string>("type");
  if (type == "suggest") {
    const Json& a = r.at("action");
    if (a.is_string() && a.get<std::string>() == "none") return Suggest{};
    if (a.is_number_unsigned()) return Suggest{a.get<Index>()};
    throw FrameError(frame.size(), "action must be an action index or \"none\"");
  }
  if (type == "start") return Start{r.maybe<int>("version").value_or(kWireVersion)};
  if (type == "reset") return Reset{};
  if (type == "error") return ErrorReply{r.get<std::string>("code"), r.get<std::string>("message")};
  if (type == "ask_request") {
    return AskRequest{r.get<std::vector<Index>>("actions"), r.get<std::vector<std::string>>("names"),
                      r.get<double>("deadline")};
  }
  if (type == "trial_summary") {
    try {
      return TrialSummary{record_from_json(r.at("record"))};
    } catch (const Error& e) {
      throw FrameError(frame.size(), e.what());
    }
  }
  if (type == "state_view") {
    StateView v;
    try {
      v.session = r.get<std::uint64_t>("session");
      v.simulation = r.get<std::size_t>("simulation");
      v.trial = r.get<std::size_t>("trial");
      v.step = r.get<std::size_t>("step");
      v.phase = r.get<std::string>("phase");
      v.domain = r.get<std::string>("domain");
      const Json& g = r.at("grid");
      v.columns = g.at("columns").get<int>();
      v.rows = g.at("rows").get<int>();
      for (const Json& c : g.at("cells")) v.cells.push_back(r.cell(c));
      v.agent = r.cell(r.at("agent"));
      v.facts = r.at("facts");
      v.types = r.get<std::vector<double>>("types");
      v.type_belief = r.maybe<std::vector<double>>("type_belief");
      v.expected_type = r.maybe<double>("expected_type");
      v.asks_left = r.maybe<std::size_t>("asks_left");
    } catch (const Json::exception& e) {
      throw FrameError(frame.size(), e.what());
    }
    return v;
  }
  throw FrameError(frame.size(), "unknown message type \"" + type + "\"");
}

void RecordSink::append(const std::vector<TrialRecord>& records) {
  if (records.empty()) return;
  std::lock_guard lock(mutex_);
  records_.insert(records_.end(), records.begin(), records.end());
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    out << records_to_jsonl(records);
  }
}

std::vector<TrialRecord> RecordSink::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

Session::Session(std::shared_ptr<const Experiment> exp, SessionOptions options, std::uint64_t id,
                 std::function<std::size_t()> next_simulation, RecordSink* sink)
    : exp_(std::move(exp)),
      options_(options),
      id_(id),
      next_simulation_(std::move(next_simulation)),
      sink_(sink) {}

bool Session::awaiting_suggestion() const {
  return sim_ && sim_->phase() == Simulation::Phase::AwaitingSuggestion;
}

void Session::begin_simulation() {
  sim_ = std::make_unique<Simulation>(exp_, next_simulation_());
  flushed_ = 0;
}

void Session::flush() {
  if (!sim_) return;
  const auto& recs = sim_->records();
  std::vector<TrialRecord> fresh(recs.begin() + static_cast<std::ptrdiff_t>(flushed_), recs.end());
  flushed_ = recs.size();
  records_.insert(records_.end(), fresh.begin(), fresh.end());
  if (sink_) sink_->append(fresh);
}

void Session::close() {
  if (closed_) return;
  flush();
  closed_ = true;
}

StateView Session::view() const {
  StateView v;
  v.session = id_;
  if (!sim_) return v;
  const Experiment& e = *exp_;
  const Domain& d = e.domain;
  const StateSample s = sim_->state();
  v.simulation = sim_->index();
  v.trial = sim_->trial();
  v.step = sim_->step();
  v.phase = phase_name(sim_->phase());
  v.domain = d.name();
  if (d.kind == DomainKind::Tag) {
    v.columns = d.layout.columns;
    v.rows = d.layout.rows;
    v.cells = d.layout.cells;
    v.agent = d.layout.cells[s.x];
    const bool tagged = s.y >= d.layout.size();
    if (options_.view == SuggesterView::Full) {
      v.facts["opponent"] = tagged ? Json(nullptr) : cell_json(d.layout.cells[s.y]);
      v.facts["tagged"] = tagged;
    } else if (options_.view == SuggesterView::WallBand && !tagged) {
      const GridCell o = d.layout.cells[s.y];
      const WallSensor w;
      v.facts["bands"] = {{"north", o.row >= d.layout.rows - w.width},
                          {"west", o.col < w.width},
                          {"east", o.col >= d.layout.columns - w.width}};
    }
  } else {
    const int n = d.rs.n;
    v.columns = n;
    v.rows = n;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) v.cells.push_back({c, r});
    }
    const bool exited = s.x >= static_cast<Index>(n * n);
    v.agent = exited ? GridCell{n, -1} : GridCell{static_cast<int>(s.x) % n, static_cast<int>(s.x) / n};
    Json rocks = Json::array();
    for (std::size_t i = 0; i < d.rocks.size(); ++i) {
      Json rock = {{"cell", cell_json(d.rocks[i])}};
      if (options_.view == SuggesterView::Full) rock["good"] = ((s.y >> i) & 1U) != 0;
      rocks.push_back(std::move(rock));
    }
    v.facts["rocks"] = std::move(rocks);
    v.facts["exited"] = exited;
  }
  if (e.typed) {
    v.types = e.typed->spec.types;
    v.type_belief = sim_->type_belief();
    v.expected_type = expected_type(*e.typed, sim_->belief());
  }
  v.asks_left = sim_->asks_left();
  return v;
}

std::vector<WireMessage> Session::run() {
  std::vector<WireMessage> out;
  for (;;) {
    const auto phase = sim_->advance(true);
    if (phase == Simulation::Phase::AwaitingSuggestion) {
      AskRequest req;
      req.actions = sim_->suggestable_actions();
      for (Index a : req.actions) req.names.push_back(exp_->domain.model.actions()[a]);
      req.deadline = options_.deadline;
      out.push_back(view());
      out.push_back(std::move(req));
      return out;
    }
    out.push_back(TrialSummary{sim_->records().back()});
    flush();
    if (phase == Simulation::Phase::Closed) {
      out.push_back(view());
      return out;
    }
    sim_->next_trial();
  }
}

std::vector<WireMessage> Session::handle(const WireMessage& message) {
  if (closed_) return {ErrorReply{"closed", "session is closed"}};
  if (const auto* start = std::get_if<Start>(&message)) {
    if (start->version != kWireVersion) {
      return {ErrorReply{"bad_version", "unsupported protocol version " + std::to_string(start->version)}};
    }
    if (sim_) return {ErrorReply{"already_started", "session already started"}};
    begin_simulation();
    return run();
  }
  if (!sim_) return {ErrorReply{"not_started", "send start first"}};
  if (std::holds_alternative<Reset>(message)) {
    flush();
    begin_simulation();
    return run();
  }
  if (const auto* s = std::get_if<Suggest>(&message)) {
    if (!awaiting_suggestion()) return {ErrorReply{"no_request", "no suggestion is outstanding"}};
    Suggestion sigma = Suggestion::absent();
    if (s->action) {
      const auto allowed = sim_->suggestable_actions();
      if (std::find(allowed.begin(), allowed.end(), *s->action) == allowed.end()) {
        return {ErrorReply{"bad_suggestion", "action " + std::to_string(*s->action) + " is not suggestable"}};
      }
      sigma = Suggestion::of(*s->action);
    }
    sim_->provide(sigma);
    return run();
  }
  return {ErrorReply{"bad_message", "message type not accepted from clients"}};
}

std::vector<WireMessage> Session::handle_frame(const std::string& frame) {
  try {
    return handle(decode(frame));
  } catch (const FrameError& e) {
    std::string code = "bad_message";
    try {
      const Json j = Json::parse(frame);
      if (j.is_object() && j.value("type", "") == "suggest") code = "bad_suggestion";
    } catch (const Json::exception&) {
    }
    return {ErrorReply{code, e.what()}};
  }
}

std::vector<WireMessage> Session::expire() {
  if (!awaiting_suggestion()) return {};
  sim_->provide(Suggestion::absent());
  return run();
}

std::pair<std::string, int> parse_listen(const std::string& spec) {
  const auto colon = spec.rfind(':');
  std::string host = colon == std::string::npos ? "" : spec.substr(0, colon);
  const std::string port = colon == std::string::npos ? spec : spec.substr(colon + 1);
  if (host.empty()) host = "127.0.0.1";
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::invalid_argument("port");
    return {host, p};
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad listen address \"" + spec + "\"");
  }
}

namespace {

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_messages(int fd, const std::vector<WireMessage>& messages) {
  std::string out;
  for (const auto& m : messages) out += encode(m) + "\n";
  return out.empty() || send_all(fd, out);
}

void run_connection(int fd, Session& session, const std::atomic<bool>& stop, double deadline) {
  using Clock = std::chrono::steady_clock;
  std::string buffer;
  Clock::time_point expires{};
  bool armed = false;
  auto rearm = [&] {
    armed = session.awaiting_suggestion();
    if (armed) {
      expires = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(deadline));
    }
  };
  while (!stop) {
    int wait_ms = 200;
    if (armed) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(expires - Clock::now()).count();
      if (left <= 0) {
        if (!send_messages(fd, session.expire())) break;
        rearm();
        continue;
      }
      wait_ms = static_cast<int>(std::min<long long>(left, 200));
    }
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, wait_ms);
    if (ready < 0) break;
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    bool ok = true;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const bool was_waiting = session.awaiting_suggestion();
      const auto replies = session.handle_frame(line);
      if (!send_messages(fd, replies)) {
        ok = false;
        break;
      }
      // Errors leave the outstanding request and its deadline untouched.
      if (!(was_waiting && session.awaiting_suggestion() && replies.size() == 1 &&
            std::holds_alternative<ErrorReply>(replies.front()))) {
        rearm();
      }
    }
    if (!ok) break;
  }
  session.close();
}

}  // namespace

void serve(std::shared_ptr<const Experiment> exp, const ServeOptions& options,
           const std::atomic<bool>& stop, std::function<void(int)> on_listening, RecordSink* sink) {
  RecordSink own(options.records_path);
  RecordSink* records = sink ? sink : &own;
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw Error(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
  const int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options.port));
  if (::inet_pton(AF_INET, options.host == "localhost" ? "127.0.0.1" : options.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listener);
    throw Error(ErrorCode::ConfigError, "bad listen host " + options.host);
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listener, 8) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listener);
    throw Error(ErrorCode::IoError, "cannot listen on " + options.host + ":" + std::to_string(options.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listening) on_listening(ntohs(addr.sin_port));

  std::atomic<std::size_t> next_sim{0};
  std::atomic<std::uint64_t> next_id{1};
  std::vector<std::thread> workers;
  std::size_t accepted = 0;
  while (!stop && (options.max_sessions == 0 || accepted < options.max_sessions)) {
    pollfd p{listener, POLLIN, 0};
    if (::poll(&p, 1, 200) <= 0) continue;
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    ++accepted;
    workers.emplace_back([&, fd] {
      Session session(exp, options.session, next_id++, [&] { return next_sim++; }, records);
      run_connection(fd, session, stop, options.session.deadline);
      ::close(fd);
    });
  }
  for (auto& w : workers) w.join();
  ::close(listener);
}

}  // namespace advisor
