#pragma once

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mldtv {

inline constexpr const char* kVersion = "mldtv 0.1.0";

/// Flat key=value record emitted alongside every CLI output; re-running the
/// recorded command line reproduces the outputs bit-for-bit in serial mode.
class RunManifest {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& kv : entries_)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    entries_.emplace_back(key, value);
  }

  void set(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    set(key, std::string(buf));
  }

  void set(const std::string& key, long long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, unsigned long long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }

  void stamp(const std::string& command_line) {
    set("version", std::string(kVersion));
    set("command", command_line);
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    set("timestamp", std::string(buf));
  }

  void write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("RunManifest: cannot open " + path);
    for (const auto& kv : entries_) os << kv.first << "=" << kv.second << "\n";
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace mldtv
