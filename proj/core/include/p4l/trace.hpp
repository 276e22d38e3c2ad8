#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace p4l {

/// One protocol event. Serialised as JSON-lines for debugging and for the
/// offline invariant checker (`verify-trace`).
struct TraceEvent {
  int64_t t = 0;
  std::string peer;    // hex address, "-" for simulator-level events
  std::string event;
  std::string synergy; // hex synergy id, "-" when not applicable
  std::map<std::string, int64_t> nums;
  std::map<std::string, std::string> strs;

  std::string to_json() const;
  static TraceEvent from_json(const std::string& line);
};

constexpr const char* kTraceSchema = "p4l-trace-1";

class TraceWriter {
public:
  /// In-memory only.
  TraceWriter() = default;
  /// Also appends JSON-lines to a file (schema header first).
  explicit TraceWriter(const std::string& path);
  ~TraceWriter();

  void emit(TraceEvent ev);
  const std::vector<TraceEvent>& events() const { return events_; }
  void flush();

private:
  std::vector<TraceEvent> events_;
  std::string path_;
  void* file_ = nullptr; // std::FILE*
};

struct TraceViolation {
  std::string rule;
  std::string synergy;
  std::string detail;
};

struct TraceCheckConfig {
  uint32_t max_retries = 3; // R; forward attempts per hop must stay <= R+1
};

struct TraceReport {
  size_t events = 0;
  size_t initiated = 0;
  size_t completed = 0;
  size_t failed = 0;
  std::vector<TraceViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Replays a trace checking liveness (every initiated synergy reaches exactly
/// one terminal state by its deadline), minimum synergy size, per-hop retry
/// bounds, duplicate-free participant lists and conservation.
TraceReport check_trace(const std::vector<TraceEvent>& events, const TraceCheckConfig& cfg);

/// File variant; throws ParseError with the offending line number on
/// malformed input.
TraceReport check_trace_file(const std::string& path, const TraceCheckConfig& cfg);

} // namespace p4l
