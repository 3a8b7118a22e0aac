#include "valagg/config.hpp"

#include <charconv>
#include <fstream>

namespace valagg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

double to_double(const std::string& s, const std::string& field) {
    const std::string t = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigError("field '" + field + "': expected a real number, got '" + s + "'");
    return v;
}

long to_long(const std::string& s, const std::string& field) {
    const std::string t = trim(s);
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigError("field '" + field + "': expected an integer, got '" + s + "'");
    return v;
}

}  // namespace

KeyValues parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config " + path.string() + " line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config " + path.string() + " line " + std::to_string(lineno) +
                              ": empty key");
        kv[key] = value;
    }
    return kv;
}

void merge_overrides(KeyValues& base, const KeyValues& overrides) {
    for (const auto& [k, v] : overrides) base[k] = v;
}

bool has_key(const KeyValues& kv, const std::string& key) { return kv.count(key) > 0; }

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : to_double(it->second, key);
}

long get_long(const KeyValues& kv, const std::string& key, long fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : to_long(it->second, key);
}

bool get_bool(const KeyValues& kv, const std::string& key, bool fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const std::string v = trim(it->second);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("field '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& field) {
    std::vector<double> values;
    for (const auto& part : split(text, ','))
        if (!trim(part).empty()) values.push_back(to_double(part, field));
    if (values.empty()) throw ConfigError("field '" + field + "': empty list");
    return values;
}

std::vector<long> parse_long_list(const std::string& text, const std::string& field) {
    std::vector<long> values;
    for (const auto& part : split(text, ','))
        if (!trim(part).empty()) values.push_back(to_long(part, field));
    if (values.empty()) throw ConfigError("field '" + field + "': empty list");
    return values;
}

Vec parse_vector(const std::string& text, const std::string& field) {
    return parse_double_list(text, field);
}

Matrix parse_matrix(const std::string& text, const std::string& field) {
    const auto rows = split(text, ';');
    if (rows.empty()) throw ConfigError("field '" + field + "': empty matrix");
    std::vector<Vec> parsed;
    for (const auto& row : rows) parsed.push_back(parse_double_list(row, field));
    const std::size_t cols = parsed.front().size();
    Matrix m(parsed.size(), cols);
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        if (parsed[i].size() != cols)
            throw ConfigError("field '" + field + "': ragged matrix rows");
        for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = parsed[i][j];
    }
    return m;
}

}  // namespace valagg
