#pragma once

#include <filesystem>

#include "valagg/config.hpp"
#include "valagg/instances.hpp"
#include "valagg/loop.hpp"
#include "valagg/trace_io.hpp"

namespace valagg {

/// A configuration materialized into instances and a loop setup.
struct ResolvedRun {
    KeyValues echo;        // effective computational keys (defaults included)
    InstancePtr base;      // instance without transformer or noise
    InstancePtr runnable;  // with the noise wrapper when one is requested
    LoopConfig loop;
    std::pair<std::size_t, std::size_t> fit_window;
    double fit_eps = 0.0;
};

/// Builds instance + loop config from flat keys; ConfigError names the field.
ResolvedRun resolve_run(const KeyValues& kv);

struct RunArtifacts {
    RunTrace trace;
    SummaryRecord summary;
};

/// Executes one configuration in-process (no file output).
RunArtifacts execute_run(const KeyValues& kv);

/// Output directory: `out` key, else $VAL_AGG_OUT, else ./valagg_out.
std::filesystem::path resolve_out_dir(const KeyValues& kv);

// Subcommand bodies. Return the process exit code
// (0 completed, 2 config error, 3 IO error).
int cmd_run(const KeyValues& kv);
int cmd_sweep(const KeyValues& kv);
int cmd_plot(const std::vector<std::string>& trace_paths, const KeyValues& kv);

}  // namespace valagg
