#include "iris/keyval.hpp"

#include <fstream>
#include <sstream>

#include "iris/errors.hpp"

namespace iris {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyVal parse_keyval(const std::string& text, const std::string& origin) {
  KeyVal kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Validation, origin + ":" +
                                             std::to_string(lineno) +
                                             ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorKind::Validation,
                  origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw Error(ErrorKind::Validation,
                  origin + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

KeyVal read_keyval(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_keyval(ss.str(), path);
}

void check_keys(const KeyVal& kv, const std::set<std::string>& allowed,
                const std::string& origin) {
  for (const auto& [key, value] : kv)
    if (!allowed.count(key))
      throw Error(ErrorKind::Validation,
                  origin + ": unknown key '" + key + "'");
}

double kv_double(const KeyVal& kv, const std::string& key, double def) {
  const auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Validation,
                "key '" + key + "' is not a number: " + it->second);
  }
}

int kv_int(const KeyVal& kv, const std::string& key, int def) {
  const auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Validation,
                "key '" + key + "' is not an integer: " + it->second);
  }
}

uint64_t kv_u64(const KeyVal& kv, const std::string& key, uint64_t def) {
  const auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Validation,
                "key '" + key + "' is not an unsigned integer: " + it->second);
  }
}

std::string kv_string(const KeyVal& kv, const std::string& key,
                      const std::string& def) {
  const auto it = kv.find(key);
  return it == kv.end() ? def : it->second;
}

}  // namespace iris
