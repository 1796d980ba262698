#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "accentasr/common.hpp"

namespace accentasr {

// Structured log: one JSON event per line, mirrored human-readably on
// stderr. Harnesses parse the JSONL file; people read the mirror.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::string& jsonl_path, bool mirror = true) : mirror_(mirror) {
    if (!jsonl_path.empty()) {
      out_.open(jsonl_path, std::ios::app);
      if (!out_) throw ValidationError("cannot open log file: " + jsonl_path);
    }
  }

  void event(const std::string& name, nlohmann::json fields = {}) {
    fields["event"] = name;
    fields["t"] = seconds_since_start();
    if (out_.is_open()) out_ << fields.dump() << std::endl;
    if (mirror_) {
      std::ostringstream line;
      line << "[" << name << "]";
      for (auto& [k, v] : fields.items()) {
        if (k == "event" || k == "t") continue;
        line << " " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
      }
      std::cerr << line.str() << "\n";
    }
  }

 private:
  double seconds_since_start() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
  }

  std::ofstream out_;
  bool mirror_ = true;
};

}  // namespace accentasr
