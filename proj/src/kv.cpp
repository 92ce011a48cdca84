#include "mrccs/kv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mrccs/errors.hpp"

namespace mrccs {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KvMap parse_kv_text(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key=value, got \"" + body + "\"");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw ConfigError("duplicate key \"" + key + "\" on line " +
                        std::to_string(lineno));
    kv[key] = value;
  }
  return kv;
}

KvMap parse_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_kv_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string serialize_kv(const KvMap& kv) {
  std::string out;
  for (const auto& [key, value] : kv) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

std::string KvReader::take(const std::string& key) {
  seen_.insert(key);
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key \"" + key + "\"");
  return it->second;
}

std::string KvReader::get_string(const std::string& key) { return take(key); }

std::string KvReader::get_string(const std::string& key,
                                 const std::string& fallback) {
  seen_.insert(key);
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

namespace {

long parse_long(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(text.c_str(), &end, 10);
  if (errno != 0 || end == text.c_str() || *end != '\0')
    throw ConfigError("key \"" + key + "\": expected integer, got \"" + text +
                      "\"");
  return v;
}

}  // namespace

long KvReader::get_int(const std::string& key, long fallback) {
  seen_.insert(key);
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_long(key, it->second);
}

long KvReader::require_int(const std::string& key) {
  return parse_long(key, take(key));
}

uint64_t KvReader::get_u64(const std::string& key, uint64_t fallback) {
  seen_.insert(key);
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (errno != 0 || end == it->second.c_str() || *end != '\0')
    throw ConfigError("key \"" + key + "\": expected unsigned integer, got \"" +
                      it->second + "\"");
  return static_cast<uint64_t>(v);
}

double KvReader::get_double(const std::string& key, double fallback) {
  seen_.insert(key);
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(it->second.c_str(), &end);
  if (errno != 0 || end == it->second.c_str() || *end != '\0')
    throw ConfigError("key \"" + key + "\": expected number, got \"" +
                      it->second + "\"");
  return v;
}

bool KvReader::get_bool(const std::string& key, bool fallback) {
  seen_.insert(key);
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key \"" + key + "\": expected boolean, got \"" + v + "\"");
}

void KvReader::finish() const {
  std::string unknown;
  for (const auto& [key, value] : kv_) {
    (void)value;
    if (!seen_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace mrccs
