#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "valagg/config.hpp"
#include "valagg/runner.hpp"
#include "valagg/verify.hpp"

namespace {

using valagg::KeyValues;

struct FlagSpec {
    std::string flag;
    std::string key;
    std::string help;
};

// Every value flag maps onto a flat config key; flags override config-file
// entries.
const std::vector<FlagSpec> kFlags = {
    {"--instance", "instance", "instance kind: counterexample | affine | imitation"},
    {"--theta", "theta", "counterexample stability ratio"},
    {"--refradius", "refradius", "reference box radius for constants"},
    {"--M", "M", "affine matrix, rows ';'-separated, entries ','-separated"},
    {"--b", "b", "affine shift vector (comma-separated)"},
    {"--alpha", "alpha", "affine strong-convexity modulus"},
    {"--offset", "offset", "affine objective floor"},
    {"--a", "a", "imitation open-loop state gain"},
    {"--ab", "ab", "imitation action gain"},
    {"--kstar", "kstar", "imitation expert feedback gain"},
    {"--sigma0sq", "sigma0sq", "imitation initial state second moment"},
    {"--horizon", "horizon", "imitation planning horizon"},
    {"--gainlo", "gainlo", "imitation gain box lower bound"},
    {"--gainhi", "gainhi", "imitation gain box upper bound"},
    {"--x1", "x1", "initial iterate (comma-separated coordinates)"},
    {"--iters", "iters", "number of aggregation rounds N"},
    {"--noise", "noise", "noise kind: none | uniform | bernoulli | gaussian"},
    {"--sigma", "sigma", "noise amplitude"},
    {"--unchecked", "unchecked", "allow unbounded noise (gaussian)"},
    {"--m0", "m0", "base per-round sample count"},
    {"--r", "r", "sample growth exponent (m_n = m0 n^r)"},
    {"--seed", "seed", "noise seed"},
    {"--transformer", "transformer", "cost transformer: none | mixing | weighted"},
    {"--q", "q", "mixing rate"},
    {"--lambda", "lambda", "regularization weight"},
    {"--regularizer", "regularizer", "weighted regularizer: quadratic | expert"},
    {"--tol-inner", "tol_inner", "inner solver tolerance"},
    {"--abort", "abort", "abort magnitude for divergent runs"},
    {"--fit-lo", "fit_lo", "rate-fit window lower end"},
    {"--fit-hi", "fit_hi", "rate-fit window upper end"},
    {"--fit-eps", "fit_eps", "floor subtracted before rate fitting"},
    {"--out", "out", "output directory (default $VAL_AGG_OUT or ./valagg_out)"},
    {"--emit", "emit", "outputs to write: comma list of csv,json,svg"},
    {"--jobs", "jobs", "concurrent sweep jobs"},
    {"--thetas", "sweep_theta", "sweep axis over theta"},
    {"--lambdas", "sweep_lambda", "sweep axis over lambda"},
    {"--qs", "sweep_q", "sweep axis over q"},
    {"--m0s", "sweep_m0", "sweep axis over m0"},
    {"--rs", "sweep_r", "sweep axis over r"},
    {"--sweep-iters", "sweep_iters", "sweep axis over N"},
    {"--seeds", "sweep_seed", "sweep axis over seeds"},
    {"--sweep-cap", "sweep_cap", "maximum sweep grid size"},
    {"--kind", "kind", "plot kind: self_value | s_curve | step_norm"},
    {"--scale", "scale", "plot scale: loglog | linear"},
    {"--summary", "summary", "summary json used for plot envelopes"},
};

struct Collected {
    std::string config_path;
    std::map<std::string, std::string> values;

    KeyValues materialize() const {
        KeyValues kv;
        if (!config_path.empty()) kv = valagg::parse_config_file(config_path);
        KeyValues overrides;
        for (const auto& [key, value] : values) overrides[key] = value;
        valagg::merge_overrides(kv, overrides);
        return kv;
    }
};

void attach_flags(CLI::App* app, Collected& collected) {
    app->add_option("--config", collected.config_path, "flat key=value config file");
    for (const auto& spec : kFlags) {
        const std::string key = spec.key;
        app->add_option_function<std::string>(
            spec.flag, [&collected, key](const std::string& v) { collected.values[key] = v; },
            spec.help);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"value-aggregation experiment runner"};
    app.require_subcommand(1);

    Collected run_kv, sweep_kv, plot_kv;
    std::vector<std::string> trace_paths;
    std::string verify_only;
    double corrupt_theta = 1.0;

    CLI::App* run = app.add_subcommand("run", "execute one configuration");
    attach_flags(run, run_kv);

    CLI::App* sweep = app.add_subcommand("sweep", "execute a grid of configurations");
    attach_flags(sweep, sweep_kv);

    CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
    verify->add_option("--only", verify_only, "substring filter on check ids");
    verify->add_option("--corrupt-theta", corrupt_theta,
                       "test hook: scale the declared beta before the checks")
        ->default_val(1.0);

    CLI::App* plot = app.add_subcommand("plot", "render trace CSVs as an SVG chart");
    plot->add_option("traces", trace_paths, "trace csv paths")->required();
    attach_flags(plot, plot_kv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return valagg::cmd_run(run_kv.materialize());
        if (sweep->parsed()) return valagg::cmd_sweep(sweep_kv.materialize());
        if (plot->parsed()) return valagg::cmd_plot(trace_paths, plot_kv.materialize());
        if (verify->parsed()) {
            valagg::VerifyOptions options;
            options.only = verify_only;
            options.theta_scale = corrupt_theta;
            return valagg::run_verify_command(options);
        }
    } catch (const valagg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const valagg::IoError& e) {
        std::cerr << "io error: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 2;
}
