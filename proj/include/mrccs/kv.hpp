#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace mrccs {

using KvMap = std::map<std::string, std::string>;

// key=value per line; blank lines and '#' comments allowed; keys must be
// unique. Whitespace around keys and values is trimmed.
KvMap parse_kv_text(const std::string& text);
KvMap parse_kv_file(const std::string& path);
std::string serialize_kv(const KvMap& kv);  // sorted, one pair per line

// Typed accessor that tracks which keys were consumed so callers can reject
// unknown ones (finish() throws naming the leftovers).
class KvReader {
 public:
  explicit KvReader(KvMap kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  long get_int(const std::string& key, long fallback);
  long require_int(const std::string& key);
  uint64_t get_u64(const std::string& key, uint64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);

  // Throws ConfigError naming any key never asked for.
  void finish() const;

 private:
  std::string take(const std::string& key);
  KvMap kv_;
  std::set<std::string> seen_;
};

}  // namespace mrccs
