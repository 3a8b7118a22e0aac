#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "valagg/errors.hpp"
#include "valagg/vec.hpp"

namespace valagg {

/// Flat key/value experiment description. Configs come from a text file of
/// `key = value` lines (# starts a comment) merged with CLI flag overrides;
/// flags win.
using KeyValues = std::map<std::string, std::string>;

/// Parses a config file; errors cite the line number and content.
KeyValues parse_config_file(const std::filesystem::path& path);

/// Applies overrides on top of base (overrides win).
void merge_overrides(KeyValues& base, const KeyValues& overrides);

// Typed readers; all throw ConfigError naming the field on bad input.
std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback);
double get_double(const KeyValues& kv, const std::string& key, double fallback);
long get_long(const KeyValues& kv, const std::string& key, long fallback);
bool get_bool(const KeyValues& kv, const std::string& key, bool fallback);
bool has_key(const KeyValues& kv, const std::string& key);

/// Comma-separated list of reals, e.g. "0.3,0.6,0.9".
std::vector<double> parse_double_list(const std::string& text, const std::string& field);
std::vector<long> parse_long_list(const std::string& text, const std::string& field);
Vec parse_vector(const std::string& text, const std::string& field);

/// Rows separated by ';', entries by ',': "0,0.9;0,0" is [[0,0.9],[0,0]].
Matrix parse_matrix(const std::string& text, const std::string& field);

}  // namespace valagg
