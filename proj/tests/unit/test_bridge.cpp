#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <future>
#include <thread>

#include "advisor/bridge.hpp"
#include "advisor/error.hpp"
#include "advisor/io.hpp"

using namespace advisor;

namespace {

const std::filesystem::path& artifacts() {
  static const auto dir = [] {
    auto d = std::filesystem::temp_directory_path() / "advisor_bridge_test";
    std::filesystem::remove_all(d);
    return d;
  }();
  return dir;
}

ExperimentConfig rs_config(SuggesterKind kind) {
  ExperimentConfig c;
  c.domain.kind = DomainKind::RockSample;
  c.domain.rocksample.n = 3;
  c.domain.rocksample.k = 2;
  c.agent.kind = AgentKind::MultiType;
  c.agent.types = SuggesterSpec::standard();
  c.suggester = kind;
  c.schedule = LambdaSchedule::constant(5.0);
  c.n_simulations = 2;
  c.trials_per_simulation = 3;
  c.seed = 9;
  c.solve = {1e-3, 3.0, 1e-2, 3.0, 0};
  c.artifacts = artifacts().string();
  return c;
}

template <typename T>
std::size_t count_of(const std::vector<WireMessage>& ms) {
  std::size_t n = 0;
  for (const auto& m : ms) n += std::holds_alternative<T>(m);
  return n;
}

std::string error_code(const std::vector<WireMessage>& ms) {
  REQUIRE(ms.size() == 1);
  REQUIRE(std::holds_alternative<ErrorReply>(ms.front()));
  return std::get<ErrorReply>(ms.front()).code;
}

/// Answers every request from `answers` until the session closes.
void drive(Session& s, std::vector<WireMessage> out, const std::vector<Suggestion>& answers) {
  std::size_t next = 0;
  while (s.awaiting_suggestion()) {
    REQUIRE(next < answers.size());
    const Suggestion sg = answers[next++];
    out = s.handle(Suggest{sg.present() ? std::optional<Index>(sg.action) : std::nullopt});
    CHECK(count_of<ErrorReply>(out) == 0);
  }
  CHECK(next == answers.size());
}

}  // namespace

TEST_CASE("every message variant round-trips") {
  StateView v;
  v.session = 3;
  v.simulation = 1;
  v.trial = 2;
  v.step = 7;
  v.phase = "awaiting_suggestion";
  v.domain = "tag";
  v.columns = 10;
  v.rows = 5;
  v.cells = {{0, 0}, {1, 0}};
  v.agent = {1, 0};
  v.facts = {{"opponent", {0, 0}}, {"tagged", false}};
  v.types = {0, 1, 2, 5, 10};
  v.type_belief = std::vector<double>{0.1, 0.2, 0.4, 0.2, 0.1};
  v.expected_type = 3.0;
  v.asks_left = 1;
  TrialRecord rec{1, 2, -3.5, -4.0, 4, 1, 2.25, 5.0, 77, false, 0};
  const std::vector<WireMessage> all{v,
                                     StateView{},
                                     AskRequest{{0, 1, 4}, {"north", "south", "tag"}, 30.0},
                                     TrialSummary{rec},
                                     Suggest{2},
                                     Suggest{},
                                     Start{},
                                     Reset{},
                                     ErrorReply{"bad_suggestion", "nope"}};
  for (const auto& m : all) {
    const auto text = encode(m);
    CHECK(text.find('\n') == std::string::npos);
    CHECK(decode(text) == m);
    CHECK(encode(decode(text)) == text);
  }
}

TEST_CASE("suggest frames") {
  CHECK(decode(R"({"type":"suggest","action":2})") == WireMessage{Suggest{2}});
  CHECK(decode(R"({"type":"suggest","action":"none"})") == WireMessage{Suggest{}});
  CHECK_THROWS_AS(decode(R"({"type":"suggest","action":-1})"), FrameError);
  CHECK_THROWS_AS(decode(R"({"type":"launch"})"), FrameError);
  try {
    decode(R"({"type":"suggest","act)");
    FAIL("expected a decode error");
  } catch (const FrameError& e) {
    CHECK(e.code() == ErrorCode::DecodeError);
    CHECK(e.offset() > 0);
    CHECK(e.offset() <= std::string_view(R"({"type":"suggest","act)").size());
  }
}

TEST_CASE("session protocol errors leave the state alone") {
  const auto exp = prepare_experiment(rs_config(SuggesterKind::Interactive));
  Session s(exp, {}, 1, [] { return std::size_t{0}; });
  CHECK(error_code(s.handle(Suggest{1})) == "not_started");
  CHECK(error_code(s.handle(Start{2})) == "bad_version");

  const auto first = s.handle(Start{});
  REQUIRE(first.size() == 2);
  CHECK(std::holds_alternative<StateView>(first[0]));
  REQUIRE(std::holds_alternative<AskRequest>(first[1]));
  const auto& req = std::get<AskRequest>(first[1]);
  CHECK(req.actions.size() == exp->domain.model.action_count());
  CHECK(req.deadline == 30.0);
  CHECK(s.awaiting_suggestion());

  const auto before = s.view();
  CHECK(error_code(s.handle(Start{})) == "already_started");
  CHECK(error_code(s.handle_frame(R"({"type":"suggest","action":"left"})")) == "bad_suggestion");
  CHECK(error_code(s.handle_frame(R"({"type":"suggest","action":99})")) == "bad_suggestion");
  CHECK(error_code(s.handle_frame(R"({"type":"suggest","act)")) == "bad_message");
  CHECK(error_code(s.handle_frame("not json")) == "bad_message");
  CHECK(error_code(s.handle(AskRequest{})) == "bad_message");
  CHECK(s.awaiting_suggestion());
  CHECK(s.view() == before);

  const auto next = s.handle(Suggest{0});
  CHECK(count_of<ErrorReply>(next) == 0);
  s.close();
  CHECK(error_code(s.handle(Suggest{0})) == "closed");
}

TEST_CASE("replaying a recorded trace reproduces the batch records") {
  const auto exp = prepare_experiment(rs_config(SuggesterKind::NoisyRational));
  Simulation batch(exp, 0);
  while (batch.advance() != Simulation::Phase::Closed) batch.next_trial();

  RecordSink sink;
  Session s(exp, {}, 1, [] { return std::size_t{0}; }, &sink);
  drive(s, s.handle(Start{}), batch.answers());
  CHECK(s.records() == batch.records());
  CHECK(sink.records() == batch.records());
  CHECK(records_to_jsonl(s.records()) == records_to_jsonl(batch.records()));
}

TEST_CASE("timeouts behave like absent suggestions") {
  auto silent = rs_config(SuggesterKind::None);
  const auto batch = run_simulation(prepare_experiment(silent), 0);

  const auto exp = prepare_experiment(rs_config(SuggesterKind::Interactive));
  Session s(exp, {}, 1, [] { return std::size_t{0}; });
  s.handle(Start{});
  std::size_t summaries = 0;
  while (s.awaiting_suggestion()) summaries += count_of<TrialSummary>(s.expire());
  CHECK(summaries == 3);
  CHECK(s.records() == batch);
}

TEST_CASE("reset starts the next simulation") {
  const auto exp = prepare_experiment(rs_config(SuggesterKind::Interactive));
  std::size_t counter = 0;
  Session s(exp, {}, 1, [&] { return counter++; });
  s.handle(Start{});
  CHECK(s.view().simulation == 0);
  s.handle(Reset{});
  CHECK(s.view().simulation == 1);
  CHECK(s.view().trial == 0);
}

TEST_CASE("views hide what the suggester may not see") {
  const auto exp = prepare_experiment(rs_config(SuggesterKind::Interactive));
  for (auto view : {SuggesterView::Full, SuggesterView::WallBand, SuggesterView::None}) {
    Session s(exp, {view, 5.0}, 1, [] { return std::size_t{0}; });
    s.handle(Start{});
    const auto v = s.view();
    REQUIRE(v.facts.contains("rocks"));
    CHECK(v.facts["rocks"].size() == 2);
    CHECK(v.facts["rocks"][0].contains("good") == (view == SuggesterView::Full));
    CHECK(v.type_belief->size() == 5);
    CHECK(v.cells.size() == 9);
  }

  auto tag = rs_config(SuggesterKind::Interactive);
  tag.domain.kind = DomainKind::Tag;
  tag.agent.kind = AgentKind::Normal;
  tag.solve.base_time = 1.0;
  tag.artifacts = (artifacts() / "tag").string();
  const auto texp = prepare_experiment(tag);
  Session full(texp, {SuggesterView::Full, 5.0}, 1, [] { return std::size_t{0}; });
  full.handle(Start{});
  CHECK(full.view().facts.contains("opponent"));
  CHECK(full.view().cells.size() == 29);
  CHECK_FALSE(full.view().type_belief);
  Session band(texp, {SuggesterView::WallBand, 5.0}, 2, [] { return std::size_t{0}; });
  band.handle(Start{});
  CHECK_FALSE(band.view().facts.contains("opponent"));
  CHECK(band.view().facts["bands"].contains("west"));
  Session none(texp, {SuggesterView::None, 5.0}, 3, [] { return std::size_t{0}; });
  none.handle(Start{});
  CHECK(none.view().facts.empty());
}

TEST_CASE("listen addresses") {
  CHECK(parse_listen(":8707") == std::pair<std::string, int>{"127.0.0.1", 8707});
  CHECK(parse_listen("8707") == std::pair<std::string, int>{"127.0.0.1", 8707});
  CHECK(parse_listen("0.0.0.0:9000") == std::pair<std::string, int>{"0.0.0.0", 9000});
  CHECK_THROWS_AS(parse_listen(":port"), Error);
}

TEST_CASE("tcp session end to end") {
  auto cfg = rs_config(SuggesterKind::Interactive);
  cfg.trials_per_simulation = 1;
  const auto exp = prepare_experiment(cfg);
  std::atomic<bool> stop{false};
  std::promise<int> port_promise;
  RecordSink sink;
  ServeOptions opts;
  opts.port = 0;
  opts.max_sessions = 1;
  opts.session.deadline = 0.05;
  std::thread server([&] { serve(exp, opts, stop, [&](int p) { port_promise.set_value(p); }, &sink); });
  const int port = port_promise.get_future().get();

  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);

  std::string buffer;
  auto read_message = [&]() -> WireMessage {
    for (;;) {
      const auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        const std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        return decode(line);
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      REQUIRE(n > 0);
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  };
  auto send_line = [&](const std::string& s) {
    const std::string line = s + "\n";
    REQUIRE(::send(fd, line.data(), line.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(line.size()));
  };

  send_line("garbage");
  CHECK(std::holds_alternative<ErrorReply>(read_message()));
  send_line(encode(Start{}));
  CHECK(std::holds_alternative<StateView>(read_message()));
  CHECK(std::holds_alternative<AskRequest>(read_message()));
  send_line(encode(Suggest{0}));
  // From here on every request times out; the trial still completes.
  bool summary = false;
  for (int i = 0; i < 10000 && !summary; ++i) summary = std::holds_alternative<TrialSummary>(read_message());
  CHECK(summary);
  ::close(fd);
  server.join();
  CHECK(sink.records().size() == 1);
}
