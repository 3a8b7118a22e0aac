#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "valagg/diagnostics.hpp"
#include "valagg/loop.hpp"

namespace valagg {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

/// Tabular view of a trace as persisted to CSV. Column schema (fixed):
///   n,x,f_n_xn,F_xn_xn,S_n,step_norm
/// with x holding semicolon-joined coordinates. S_n is 0 for n = 1 and
/// step_norm is 0 on the last row (both undefined there).
struct TraceTable {
    std::vector<long> n;
    std::vector<Vec> x;
    std::vector<double> f;
    std::vector<double> self;
    std::vector<double> s;
    std::vector<double> step;

    std::size_t rows() const { return n.size(); }
    bool operator==(const TraceTable&) const = default;
};

TraceTable to_table(const RunTrace& trace);

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);

/// Parses a trace CSV; errors cite the offending row number.
TraceTable read_trace_csv(const std::filesystem::path& path);

/// Serializable per-run summary; parse(serialize(x)) == x.
struct SummaryRecord {
    std::map<std::string, std::string> config;
    long iterations_completed = 0;
    double final_self_value = 0.0;
    long best_index = 0;
    double best_value = 0.0;
    std::optional<double> fitted_exponent;
    double theoretical_exponent = 0.0;
    std::optional<double> r_squared;
    std::map<std::string, bool> bounds;
    double regret_avg = 0.0;
    double batch_min_avg = 0.0;
    bool converged = false;
    bool aborted = false;
    std::string abort_reason;
    StructuralConstants constants;
    StructuralConstants effective_constants;
    double wall_time_ms = 0.0;

    bool operator==(const SummaryRecord&) const = default;
};

std::string summary_to_json(const SummaryRecord& rec);
/// Compact single-line form (JSON-lines sweep output).
std::string summary_to_json_line(const SummaryRecord& rec);
SummaryRecord summary_from_json(const std::string& text);

void write_summary_json(const std::filesystem::path& path, const SummaryRecord& rec);
SummaryRecord read_summary_json(const std::filesystem::path& path);

/// Writes text to path, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace valagg
