#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace iris {

// Flat `key = value` text config; '#' starts a comment, blank lines are
// ignored. Values keep inner whitespace but are trimmed at both ends.
using KeyVal = std::map<std::string, std::string>;

KeyVal read_keyval(const std::string& path);
KeyVal parse_keyval(const std::string& text, const std::string& origin);

// Rejects keys outside the allowed set (typo protection).
void check_keys(const KeyVal& kv, const std::set<std::string>& allowed,
                const std::string& origin);

double kv_double(const KeyVal& kv, const std::string& key, double def);
int kv_int(const KeyVal& kv, const std::string& key, int def);
uint64_t kv_u64(const KeyVal& kv, const std::string& key, uint64_t def);
std::string kv_string(const KeyVal& kv, const std::string& key,
                      const std::string& def);

}  // namespace iris
