#include "valagg/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "valagg/errors.hpp"

namespace valagg {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

namespace {

constexpr const char* kCsvHeader = "n,x,f_n_xn,F_xn_xn,S_n,step_norm";

double parse_double(const std::string& s, std::size_t row, const char* col) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw IoError("trace csv: malformed " + std::string(col) + " at row " +
                      std::to_string(row) + ": '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : line) {
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

}  // namespace

TraceTable to_table(const RunTrace& trace) {
    TraceTable t;
    const std::size_t len = trace.rounds();
    for (std::size_t i = 0; i < len; ++i) {
        t.n.push_back(static_cast<long>(i + 1));
        t.x.push_back(trace.iterates[i].coords);
        t.f.push_back(trace.per_round_values[i]);
        t.self.push_back(trace.self_values[i]);
        t.s.push_back(i >= 1 ? trace.s_values[i - 1] : 0.0);
        t.step.push_back(i + 1 < len ? trace.step_norms[i] : 0.0);
    }
    return t;
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
    const TraceTable t = to_table(trace);
    std::ostringstream os;
    os << kCsvHeader << "\n";
    for (std::size_t i = 0; i < t.rows(); ++i) {
        os << t.n[i] << ",";
        for (std::size_t j = 0; j < t.x[i].size(); ++j) {
            if (j) os << ";";
            os << format_double(t.x[i][j]);
        }
        os << "," << format_double(t.f[i]) << "," << format_double(t.self[i]) << ","
           << format_double(t.s[i]) << "," << format_double(t.step[i]) << "\n";
    }
    write_text_file(path, os.str());
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace csv: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("trace csv: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw IoError("trace csv: unexpected header at row 1: '" + line + "'");

    TraceTable t;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 6)
            throw IoError("trace csv: expected 6 columns at row " + std::to_string(row));
        t.n.push_back(static_cast<long>(parse_double(parts[0], row, "n")));
        Vec coords;
        for (const auto& c : split(parts[1], ';')) coords.push_back(parse_double(c, row, "x"));
        t.x.push_back(std::move(coords));
        t.f.push_back(parse_double(parts[2], row, "f_n_xn"));
        t.self.push_back(parse_double(parts[3], row, "F_xn_xn"));
        t.s.push_back(parse_double(parts[4], row, "S_n"));
        t.step.push_back(parse_double(parts[5], row, "step_norm"));
    }
    if (t.rows() == 0) throw IoError("trace csv: no data rows in " + path.string());
    return t;
}

namespace {

using json = nlohmann::ordered_json;

json constants_to_json(const StructuralConstants& c) {
    return json{{"alpha", c.alpha},
                {"beta", c.beta},
                {"g2", c.g2},
                {"eps_tilde", c.eps_tilde},
                {"theta", c.theta}};
}

StructuralConstants constants_from_json(const json& j) {
    StructuralConstants c;
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.g2 = j.at("g2").get<double>();
    c.eps_tilde = j.at("eps_tilde").get<double>();
    c.theta = j.at("theta").get<double>();
    return c;
}

}  // namespace

namespace {

nlohmann::ordered_json build_summary_json(const SummaryRecord& rec);

}  // namespace

std::string summary_to_json(const SummaryRecord& rec) {
    return build_summary_json(rec).dump(2) + "\n";
}

std::string summary_to_json_line(const SummaryRecord& rec) {
    return build_summary_json(rec).dump() + "\n";
}

namespace {

nlohmann::ordered_json build_summary_json(const SummaryRecord& rec) {
    json j;
    j["config"] = rec.config;
    j["iterations_completed"] = rec.iterations_completed;
    j["final_self_value"] = rec.final_self_value;
    j["best_index"] = rec.best_index;
    j["best_value"] = rec.best_value;
    j["fitted_exponent"] = rec.fitted_exponent ? json(*rec.fitted_exponent) : json(nullptr);
    j["theoretical_exponent"] = rec.theoretical_exponent;
    j["r_squared"] = rec.r_squared ? json(*rec.r_squared) : json(nullptr);
    j["bounds"] = rec.bounds;
    j["regret_avg"] = rec.regret_avg;
    j["batch_min_avg"] = rec.batch_min_avg;
    j["converged"] = rec.converged;
    j["aborted"] = rec.aborted;
    j["abort_reason"] = rec.abort_reason;
    j["constants"] = constants_to_json(rec.constants);
    j["effective_constants"] = constants_to_json(rec.effective_constants);
    j["wall_time_ms"] = rec.wall_time_ms;
    return j;
}

}  // namespace

SummaryRecord summary_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("summary json: parse error: ") + e.what());
    }
    SummaryRecord rec;
    rec.config = j.at("config").get<std::map<std::string, std::string>>();
    rec.iterations_completed = j.at("iterations_completed").get<long>();
    rec.final_self_value = j.at("final_self_value").get<double>();
    rec.best_index = j.at("best_index").get<long>();
    rec.best_value = j.at("best_value").get<double>();
    if (!j.at("fitted_exponent").is_null())
        rec.fitted_exponent = j.at("fitted_exponent").get<double>();
    rec.theoretical_exponent = j.at("theoretical_exponent").get<double>();
    if (!j.at("r_squared").is_null()) rec.r_squared = j.at("r_squared").get<double>();
    rec.bounds = j.at("bounds").get<std::map<std::string, bool>>();
    rec.regret_avg = j.at("regret_avg").get<double>();
    rec.batch_min_avg = j.at("batch_min_avg").get<double>();
    rec.converged = j.at("converged").get<bool>();
    rec.aborted = j.at("aborted").get<bool>();
    rec.abort_reason = j.at("abort_reason").get<std::string>();
    rec.constants = constants_from_json(j.at("constants"));
    rec.effective_constants = constants_from_json(j.at("effective_constants"));
    rec.wall_time_ms = j.at("wall_time_ms").get<double>();
    return rec;
}

void write_summary_json(const std::filesystem::path& path, const SummaryRecord& rec) {
    write_text_file(path, summary_to_json(rec));
}

SummaryRecord read_summary_json(const std::filesystem::path& path) {
    return summary_from_json(read_text_file(path));
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace valagg
