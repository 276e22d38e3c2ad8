#include "p4l/trace.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "p4l/bytes.hpp"

namespace p4l {

using nlohmann::json;

std::string TraceEvent::to_json() const {
  json j;
  j["t"] = t;
  j["peer"] = peer;
  j["event"] = event;
  j["synergy"] = synergy;
  for (const auto& [k, v] : nums) j[k] = v;
  for (const auto& [k, v] : strs) j[k] = v;
  return j.dump();
}

TraceEvent TraceEvent::from_json(const std::string& line) {
  json j = json::parse(line);
  TraceEvent ev;
  ev.t = j.at("t").get<int64_t>();
  ev.peer = j.at("peer").get<std::string>();
  ev.event = j.at("event").get<std::string>();
  ev.synergy = j.at("synergy").get<std::string>();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "t" || it.key() == "peer" || it.key() == "event" || it.key() == "synergy")
      continue;
    if (it->is_number_integer())
      ev.nums[it.key()] = it->get<int64_t>();
    else
      ev.strs[it.key()] = it->is_string() ? it->get<std::string>() : it->dump();
  }
  return ev;
}

TraceWriter::TraceWriter(const std::string& path) : path_(path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open trace file " + path);
  file_ = f;
  std::fprintf(f, "{\"schema\":\"%s\"}\n", kTraceSchema);
}

TraceWriter::~TraceWriter() {
  if (file_) std::fclose(static_cast<std::FILE*>(file_));
}

void TraceWriter::emit(TraceEvent ev) {
  if (file_) {
    std::string line = ev.to_json();
    std::fprintf(static_cast<std::FILE*>(file_), "%s\n", line.c_str());
  }
  events_.push_back(std::move(ev));
}

void TraceWriter::flush() {
  if (file_) std::fflush(static_cast<std::FILE*>(file_));
}

namespace {

struct SynergyState {
  bool initiated = false;
  int64_t init_time = 0;
  int64_t deadline = 0;
  int64_t budget = 0; // S
  int terminal_events = 0;
  bool completed = false;
  bool failed = false;
  int64_t terminal_time = 0;
  int64_t final_n = 0;
  size_t accumulates = 0;
  size_t broadcast_recipients = 0;
};

} // namespace

TraceReport check_trace(const std::vector<TraceEvent>& events, const TraceCheckConfig& cfg) {
  TraceReport rep;
  rep.events = events.size();
  std::map<std::string, SynergyState> synergies;
  auto violate = [&](const std::string& rule, const std::string& syn, std::string detail) {
    rep.violations.push_back({rule, syn, std::move(detail)});
  };

  for (const TraceEvent& ev : events) {
    if (ev.synergy == "-") continue;
    SynergyState& st = synergies[ev.synergy];
    if (ev.event == "initiate") {
      if (st.initiated) violate("single-initiation", ev.synergy, "initiated twice");
      st.initiated = true;
      st.init_time = ev.t;
      auto s = ev.nums.find("s");
      st.budget = s != ev.nums.end() ? s->second : 0;
      auto d = ev.nums.find("deadline");
      st.deadline = d != ev.nums.end() ? d->second : ev.t;
    } else if (ev.event == "synergy_complete" || ev.event == "synergy_fail") {
      ++st.terminal_events;
      st.terminal_time = ev.t;
      if (ev.event == "synergy_complete") {
        st.completed = true;
        auto n = ev.nums.find("n");
        st.final_n = n != ev.nums.end() ? n->second : 0;
      } else {
        st.failed = true;
      }
    } else if (ev.event == "forward") {
      auto a = ev.nums.find("attempt");
      if (a != ev.nums.end() && a->second > static_cast<int64_t>(cfg.max_retries))
        violate("retry-bound", ev.synergy,
                "peer " + ev.peer + " attempt " + std::to_string(a->second) + " > R=" +
                    std::to_string(cfg.max_retries));
    } else if (ev.event == "accumulate") {
      ++st.accumulates;
    } else if (ev.event == "finalize") {
      auto l = ev.strs.find("l_addrs");
      if (l != ev.strs.end()) {
        std::set<std::string> seen;
        std::stringstream ss(l->second);
        std::string addr;
        size_t count = 0;
        while (std::getline(ss, addr, ',')) {
          ++count;
          if (!seen.insert(addr).second)
            violate("duplicate-participant", ev.synergy, "address " + addr + " listed twice");
        }
        auto n = ev.nums.find("n");
        if (n != ev.nums.end() && static_cast<size_t>(n->second) != count)
          violate("participant-count", ev.synergy, "n does not match participant list");
      }
    } else if (ev.event == "final_broadcast") {
      auto n = ev.nums.find("recipients");
      if (n != ev.nums.end()) st.broadcast_recipients += n->second;
    }
  }

  for (const auto& [id, st] : synergies) {
    if (!st.initiated) {
      violate("conservation", id, "events for a synergy that was never initiated");
      continue;
    }
    ++rep.initiated;
    if (st.terminal_events == 0) {
      violate("liveness", id, "no terminal state");
      continue;
    }
    if (st.terminal_events > 1)
      violate("single-terminal", id,
              "reached " + std::to_string(st.terminal_events) + " terminal states");
    if (st.completed) ++rep.completed;
    if (st.failed) ++rep.failed;
    if (st.terminal_time > st.deadline)
      violate("liveness-deadline", id,
              "terminated at " + std::to_string(st.terminal_time) + " after deadline " +
                  std::to_string(st.deadline));
    if (st.completed && st.final_n < 3)
      violate("min-synergy-size", id, "completed with N=" + std::to_string(st.final_n));
    // message-complexity audit: accumulations <= S * (R + 1)
    int64_t bound = st.budget * (cfg.max_retries + 1);
    if (st.budget > 0 && static_cast<int64_t>(st.accumulates) > bound)
      violate("message-bound", id,
              std::to_string(st.accumulates) + " accumulations exceed S*(R+1)=" +
                  std::to_string(bound));
    if (st.completed && st.broadcast_recipients > st.final_n)
      violate("broadcast-bound", id, "more final recipients than participants");
  }
  return rep;
}

TraceReport check_trace_file(const std::string& path, const TraceCheckConfig& cfg) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("cannot open trace file " + path);
  std::vector<TraceEvent> events;
  std::string line;
  char buf[1 << 16];
  size_t line_no = 0;
  while (std::fgets(buf, sizeof buf, f)) {
    ++line_no;
    line = buf;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (j.contains("schema")) {
        if (j["schema"] != kTraceSchema) {
          std::fclose(f);
          throw ParseError("unsupported trace schema at line " + std::to_string(line_no));
        }
        continue;
      }
      events.push_back(TraceEvent::from_json(line));
    } catch (const json::exception& e) {
      std::fclose(f);
      throw ParseError("malformed trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::fclose(f);
  return check_trace(events, cfg);
}

} // namespace p4l
