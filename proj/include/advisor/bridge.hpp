#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "advisor/error.hpp"
#include "advisor/harness.hpp"

namespace advisor {

inline constexpr int kWireVersion = 1;

/// What the client may see of the hidden state.
enum class SuggesterView { Full, WallBand, None };

struct StateView {
  std::uint64_t session = 0;
  std::size_t simulation = 0;
  std::size_t trial = 0;
  std::size_t step = 0;
  std::string phase;
  std::string domain;
  int columns = 0;
  int rows = 0;
  std::vector<GridCell> cells;
  GridCell agent{0, 0};
  nlohmann::json facts = nlohmann::json::object();  // domain facts allowed by the view
  std::vector<double> types;
  std::optional<std::vector<double>> type_belief;
  std::optional<double> expected_type;
  std::optional<std::size_t> asks_left;

  friend bool operator==(const StateView&, const StateView&) = default;
};

struct AskRequest {
  std::vector<Index> actions;
  std::vector<std::string> names;
  double deadline = 30.0;  // seconds
  friend bool operator==(const AskRequest&, const AskRequest&) = default;
};

struct TrialSummary {
  TrialRecord record;
  friend bool operator==(const TrialSummary&, const TrialSummary&) = default;
};

struct Suggest {
  std::optional<Index> action;  // nullopt: "none"
  friend bool operator==(const Suggest&, const Suggest&) = default;
};

struct Start {
  int version = kWireVersion;
  friend bool operator==(const Start&, const Start&) = default;
};

struct Reset {
  friend bool operator==(const Reset&, const Reset&) = default;
};

struct ErrorReply {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};

using WireMessage = std::variant<StateView, AskRequest, TrialSummary, Suggest, Start, Reset, ErrorReply>;

/// One JSON object on one line, without the trailing newline.
std::string encode(const WireMessage& message);
/// Throws FrameError (code DecodeError) carrying the byte offset of the fault.
WireMessage decode(const std::string& frame);

class FrameError : public Error {
 public:
  FrameError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::DecodeError, "at byte " + std::to_string(offset) + ": " + message),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Thread-safe append-only record destination shared by sessions.
class RecordSink {
 public:
  explicit RecordSink(std::string path = {}) : path_(std::move(path)) {}
  void append(const std::vector<TrialRecord>& records);
  std::vector<TrialRecord> records() const;

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::vector<TrialRecord> records_;
};

struct SessionOptions {
  SuggesterView view = SuggesterView::Full;
  double deadline = 30.0;
};

/// Transport-free session state machine: feed it client messages, get back
/// the messages to send.
class Session {
 public:
  Session(std::shared_ptr<const Experiment> exp, SessionOptions options, std::uint64_t id,
          std::function<std::size_t()> next_simulation, RecordSink* sink = nullptr);

  std::vector<WireMessage> handle(const WireMessage& message);
  /// Decodes a frame; a bad frame yields an error reply and no state change.
  std::vector<WireMessage> handle_frame(const std::string& frame);
  /// The outstanding request expired: proceeds with Absent.
  std::vector<WireMessage> expire();
  /// Flushes records of the current simulation; the session is Closed.
  void close();

  bool started() const { return sim_ != nullptr; }
  bool awaiting_suggestion() const;
  bool closed() const { return closed_; }
  StateView view() const;
  const std::vector<TrialRecord>& records() const { return records_; }

 private:
  std::vector<WireMessage> run();
  void begin_simulation();
  void flush();

  std::shared_ptr<const Experiment> exp_;
  SessionOptions options_;
  std::uint64_t id_;
  std::function<std::size_t()> next_simulation_;
  RecordSink* sink_;
  std::unique_ptr<Simulation> sim_;
  std::size_t flushed_ = 0;
  bool closed_ = false;
  std::vector<TrialRecord> records_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8707;
  SessionOptions session;
  std::size_t max_sessions = 0;  // 0: until stopped
  std::string records_path;
};

/// Parses ":8707", "8707" or "host:port".
std::pair<std::string, int> parse_listen(const std::string& spec);

/// Newline-delimited JSON over TCP, one thread per connection. Returns
/// when `stop` becomes true or after max_sessions sessions have finished.
/// `on_listening` receives the bound port (useful with port 0).
void serve(std::shared_ptr<const Experiment> exp, const ServeOptions& options,
           const std::atomic<bool>& stop, std::function<void(int)> on_listening = {},
           RecordSink* sink = nullptr);

}  // namespace advisor
