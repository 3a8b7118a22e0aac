#include "valagg/runner.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "valagg/diagnostics.hpp"
#include "valagg/svg_plot.hpp"

namespace valagg {

namespace {

InstancePtr build_base_instance(const KeyValues& kv, KeyValues& echo) {
    const std::string kind = get_string(kv, "instance", "counterexample");
    echo["instance"] = kind;
    if (kind == "counterexample") {
        CounterexampleSpec spec;
        spec.theta = get_double(kv, "theta", 0.5);
        spec.reference_radius = get_double(kv, "refradius", 2.0);
        echo["theta"] = format_double(spec.theta);
        echo["refradius"] = format_double(spec.reference_radius);
        return make_counterexample(spec);
    }
    if (kind == "affine") {
        if (!has_key(kv, "M")) throw ConfigError("field 'M': required for the affine instance");
        AffineQuadraticSpec spec;
        spec.M = parse_matrix(kv.at("M"), "M");
        spec.b = has_key(kv, "b") ? parse_vector(kv.at("b"), "b") : Vec(spec.M.rows, 0.0);
        spec.alpha = get_double(kv, "alpha", 2.0);
        spec.offset = get_double(kv, "offset", 0.0);
        spec.reference_radius = get_double(kv, "refradius", 2.0);
        echo["M"] = kv.at("M");
        echo["alpha"] = format_double(spec.alpha);
        echo["offset"] = format_double(spec.offset);
        echo["refradius"] = format_double(spec.reference_radius);
        if (has_key(kv, "b")) echo["b"] = kv.at("b");
        return make_affine_quadratic(spec);
    }
    if (kind == "imitation") {
        LinearImitationSpec spec;
        spec.a = get_double(kv, "a", 0.0);
        spec.action_gain = get_double(kv, "ab", 1.0);
        spec.expert_gain = get_double(kv, "kstar", 0.0);
        spec.sigma0_sq = get_double(kv, "sigma0sq", 1.0);
        spec.horizon = get_long(kv, "horizon", 2);
        spec.gain_lo = get_double(kv, "gainlo", -1.0);
        spec.gain_hi = get_double(kv, "gainhi", 1.0);
        echo["a"] = format_double(spec.a);
        echo["ab"] = format_double(spec.action_gain);
        echo["kstar"] = format_double(spec.expert_gain);
        echo["sigma0sq"] = format_double(spec.sigma0_sq);
        echo["horizon"] = std::to_string(spec.horizon);
        echo["gainlo"] = format_double(spec.gain_lo);
        echo["gainhi"] = format_double(spec.gain_hi);
        return make_linear_imitation(spec);
    }
    throw ConfigError("field 'instance': unknown kind '" + kind +
                      "' (expected counterexample | affine | imitation)");
}

NoiseKind parse_noise(const std::string& name) {
    if (name == "uniform") return NoiseKind::uniform;
    if (name == "bernoulli") return NoiseKind::scaled_bernoulli;
    if (name == "gaussian") return NoiseKind::gaussian;
    throw ConfigError("field 'noise': unknown kind '" + name +
                      "' (expected none | uniform | bernoulli | gaussian)");
}

}  // namespace

ResolvedRun resolve_run(const KeyValues& kv) {
    ResolvedRun rr;
    rr.base = build_base_instance(kv, rr.echo);

    const std::size_t dim = rr.base->dimension();
    Vec x1 = has_key(kv, "x1") ? parse_vector(kv.at("x1"), "x1") : Vec(dim, 1.0);
    if (x1.size() != dim)
        throw ConfigError("field 'x1': expected dimension " + std::to_string(dim) + ", got " +
                          std::to_string(x1.size()));
    {
        std::string joined;
        for (std::size_t i = 0; i < x1.size(); ++i)
            joined += (i ? "," : "") + format_double(x1[i]);
        rr.echo["x1"] = joined;
    }

    rr.loop.iterations = get_long(kv, "iters", 100);
    if (rr.loop.iterations < 1) throw ConfigError("field 'iters': must be >= 1");
    rr.loop.x1 = ParameterPoint(std::move(x1));
    rr.loop.tol_inner = get_double(kv, "tol_inner", 1e-10);
    rr.loop.abort_magnitude = get_double(kv, "abort", 1e100);
    rr.echo["iters"] = std::to_string(rr.loop.iterations);
    rr.echo["tol_inner"] = format_double(rr.loop.tol_inner);
    rr.echo["abort"] = format_double(rr.loop.abort_magnitude);

    const std::string noise = get_string(kv, "noise", "none");
    rr.echo["noise"] = noise;
    if (noise == "none") {
        rr.runnable = rr.base;
        rr.loop.variant = LoopVariant::deterministic;
    } else {
        StochasticWrapperSpec wrap;
        wrap.base = rr.base;
        wrap.noise = parse_noise(noise);
        wrap.sigma = get_double(kv, "sigma", 1.0);
        wrap.allow_unbounded = get_bool(kv, "unchecked", false);
        rr.runnable = make_stochastic(wrap);
        rr.loop.variant = LoopVariant::stochastic;
        SamplingSchedule sched;
        sched.m0 = get_long(kv, "m0", 1);
        sched.growth_exponent = get_double(kv, "r", 0.0);
        sched.noise_seed = static_cast<std::uint64_t>(get_long(kv, "seed", 0));
        if (sched.m0 < 1) throw ConfigError("field 'm0': must be >= 1");
        if (sched.growth_exponent < 0.0) throw ConfigError("field 'r': must be >= 0");
        rr.loop.sampling = sched;
        rr.echo["sigma"] = format_double(wrap.sigma);
        rr.echo["m0"] = std::to_string(sched.m0);
        rr.echo["r"] = format_double(sched.growth_exponent);
        rr.echo["seed"] = std::to_string(sched.noise_seed);
        if (wrap.allow_unbounded) rr.echo["unchecked"] = "1";
    }

    const std::string transformer = get_string(kv, "transformer", "none");
    rr.echo["transformer"] = transformer;
    if (transformer != "none") {
        CostTransformer t;
        if (transformer == "mixing") {
            t.kind = TransformKind::mixing;
            t.mixing_q = get_double(kv, "q", 0.0);
            rr.echo["q"] = format_double(t.mixing_q);
        } else if (transformer == "weighted") {
            t.kind = TransformKind::weighted_regularization;
            t.lambda = get_double(kv, "lambda", 0.0);
            const std::string reg = get_string(kv, "regularizer", "quadratic");
            if (reg == "quadratic") {
                t.regularizer = Regularizer::quadratic_centered(rr.base->constants().alpha,
                                                                rr.base->reference_box());
                t.r_nonneg = true;
            } else if (reg == "expert") {
                t.regularizer = Regularizer::expert_anchored(rr.base);
                t.r_nonneg = false;
            } else {
                throw ConfigError("field 'regularizer': unknown kind '" + reg +
                                  "' (expected quadratic | expert)");
            }
            rr.echo["lambda"] = format_double(t.lambda);
            rr.echo["regularizer"] = reg;
        } else {
            throw ConfigError("field 'transformer': unknown kind '" + transformer +
                              "' (expected none | mixing | weighted)");
        }
        rr.loop.transformer = t;
    }

    const auto def_window = default_fit_window(static_cast<std::size_t>(rr.loop.iterations));
    rr.fit_window.first = static_cast<std::size_t>(get_long(kv, "fit_lo", static_cast<long>(def_window.first)));
    rr.fit_window.second = static_cast<std::size_t>(get_long(kv, "fit_hi", static_cast<long>(def_window.second)));
    rr.fit_eps = get_double(kv, "fit_eps", rr.base->constants().eps_tilde);
    // echo the problem actually aggregated, transformer included
    rr.echo["describe"] = rr.loop.transformer
                              ? apply_transformer(rr.runnable, *rr.loop.transformer)->describe()
                              : rr.runnable->describe();
    return rr;
}

namespace {

bool infer_converged(const RunTrace& trace, const std::optional<double>& fitted) {
    if (trace.aborted) return false;
    if (fitted) return *fitted < -0.01;
    if (trace.s_values.empty()) return true;
    const double s2 = trace.s_values.front();
    const double sn = trace.s_values.back();
    return sn <= std::max(1e-12, 0.5 * s2);
}

std::map<std::string, bool> applicable_bounds(const RunTrace& trace, const LoopConfig& loop) {
    std::map<std::string, bool> out;
    if (loop.variant == LoopVariant::stochastic) return out;  // property-checked, not pointwise
    const double theta = trace.effective_constants.theta;
    std::set<BoundId> which;
    which.insert(BoundId::lemma3);
    if (!trace.aborted && theta < 1.0) {
        which.insert(BoundId::prop2);
        which.insert(BoundId::corollary1);
        if (!trace.transform) {
            which.insert(BoundId::thm1);
            which.insert(BoundId::thm2);
        } else if (trace.transform->kind == "mixing") {
            which.insert(BoundId::corollary2);
        } else {
            which.insert(BoundId::corollary3);
        }
    }
    if (theta > 1.0 && !trace.transform) which.insert(BoundId::thm3_lower);
    for (const auto& rec : check_bounds(trace, trace.effective_constants, which))
        out[bound_id_name(rec.bound_id)] = rec.passed;
    return out;
}

SummaryRecord summarize(const ResolvedRun& rr, const RunTrace& trace, double wall_ms) {
    SummaryRecord s;
    s.config = rr.echo;
    s.iterations_completed = static_cast<long>(trace.rounds());
    s.final_self_value = trace.self_values.back();
    const auto [best_idx, best_val] = select_best(trace);
    s.best_index = static_cast<long>(best_idx);
    s.best_value = best_val;
    try {
        const RateFit fit = fit_rate(trace, rr.fit_eps, rr.fit_window);
        s.fitted_exponent = fit.fitted_exponent;
        s.r_squared = fit.r_squared;
    } catch (const std::exception&) {
        // sequence at its floor or window too short; leave the fit empty
    }
    s.theoretical_exponent = 2.0 * (trace.effective_constants.theta - 1.0);
    s.bounds = applicable_bounds(trace, rr.loop);
    s.regret_avg = trace.regret_avg;
    s.batch_min_avg = trace.batch_min_avg;
    s.converged = infer_converged(trace, s.fitted_exponent);
    s.aborted = trace.aborted;
    s.abort_reason = trace.abort_reason;
    s.constants = trace.base_constants;
    s.effective_constants = trace.effective_constants;
    s.wall_time_ms = wall_ms;
    return s;
}

void prepare_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto probe = dir / ".write_probe";
    {
        std::string payload = "probe";
        try {
            write_text_file(probe, payload);
        } catch (const IoError&) {
            throw IoError("output directory is not writable: " + dir.string());
        }
    }
    std::filesystem::remove(probe, ec);
}

std::set<std::string> emit_set(const KeyValues& kv) {
    std::set<std::string> emit;
    std::string spec = get_string(kv, "emit", "csv,json");
    std::string cur;
    for (char ch : spec + ",") {
        if (ch == ',') {
            if (!cur.empty()) {
                if (cur != "csv" && cur != "json" && cur != "svg")
                    throw ConfigError("field 'emit': unknown format '" + cur + "'");
                emit.insert(cur);
            }
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(ch))) {
            cur.push_back(ch);
        }
    }
    return emit;
}

std::vector<PlotSeries> self_value_series(const TraceTable& table, const SummaryRecord& summary,
                                          const std::string& label) {
    PlotSeries empirical;
    empirical.label = label;
    PlotSeries envelope;
    envelope.label = label + " envelope";
    envelope.is_envelope = true;
    const StructuralConstants& c = summary.effective_constants;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const double n = static_cast<double>(table.n[i]);
        empirical.xs.push_back(n);
        empirical.ys.push_back(table.self[i]);
        const double coeff = c.theta * std::exp(1.0 - c.theta) * c.g2;
        envelope.xs.push_back(n);
        envelope.ys.push_back(c.eps_tilde +
                              coeff * coeff / (2.0 * c.alpha) * std::pow(n, 2.0 * (c.theta - 1.0)));
    }
    return {empirical, envelope};
}

std::vector<PlotSeries> s_curve_series(const TraceTable& table, const SummaryRecord& summary,
                                       const std::string& label) {
    PlotSeries empirical;
    empirical.label = label;
    PlotSeries envelope;
    envelope.label = label + " envelope";
    envelope.is_envelope = true;
    const StructuralConstants& c = summary.effective_constants;
    const double s2 = table.rows() >= 2 ? table.s[1] : 0.0;
    for (std::size_t i = 1; i < table.rows(); ++i) {
        const double n = static_cast<double>(table.n[i]);
        empirical.xs.push_back(n);
        empirical.ys.push_back(table.s[i]);
        envelope.xs.push_back(n);
        envelope.ys.push_back(std::exp(1.0 - c.theta) * std::pow(n, c.theta - 1.0) * s2);
    }
    return {empirical, envelope};
}

std::vector<PlotSeries> step_norm_series(const TraceTable& table, const SummaryRecord& summary,
                                         const std::string& label) {
    PlotSeries empirical;
    empirical.label = label;
    PlotSeries envelope;
    envelope.label = label + " envelope";
    envelope.is_envelope = true;
    const StructuralConstants& c = summary.effective_constants;
    const double s2 = table.rows() >= 2 ? table.s[1] : 0.0;
    for (std::size_t i = 1; i + 1 < table.rows(); ++i) {
        const double n = static_cast<double>(table.n[i]);
        empirical.xs.push_back(n);
        empirical.ys.push_back(table.step[i]);
        envelope.xs.push_back(n);
        envelope.ys.push_back(c.theta / n * std::exp(1.0 - c.theta) * std::pow(n, c.theta - 1.0) *
                              s2);
    }
    return {empirical, envelope};
}

}  // namespace

RunArtifacts execute_run(const KeyValues& kv) {
    const ResolvedRun rr = resolve_run(kv);
    const auto t0 = std::chrono::steady_clock::now();
    RunTrace trace = rr.loop.variant == LoopVariant::stochastic
                         ? run_stochastic(rr.runnable, rr.loop)
                         : run_deterministic(rr.runnable, rr.loop);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    SummaryRecord summary = summarize(rr, trace, wall_ms);
    return {std::move(trace), std::move(summary)};
}

std::filesystem::path resolve_out_dir(const KeyValues& kv) {
    if (has_key(kv, "out")) return kv.at("out");
    if (const char* env = std::getenv("VAL_AGG_OUT"); env && *env) return env;
    return "valagg_out";
}

int cmd_run(const KeyValues& kv) {
    const auto emit = emit_set(kv);
    const auto out = resolve_out_dir(kv);
    prepare_out_dir(out);
    resolve_run(kv);  // fail on config errors before any computation

    RunArtifacts art = execute_run(kv);
    if (emit.count("csv")) write_trace_csv(out / "trace.csv", art.trace);
    if (emit.count("json")) write_summary_json(out / "summary.json", art.summary);
    if (emit.count("svg")) {
        const auto series = self_value_series(to_table(art.trace), art.summary,
                                              art.summary.config.at("describe"));
        write_text_file(out / "self_value.svg",
                        render_plot_svg(series, "self performance", "n", "F(x_n, x_n)",
                                        PlotScale::loglog));
    }

    std::cout << art.summary.config.at("describe") << ": N=" << art.summary.iterations_completed
              << " final F=" << format_double(art.summary.final_self_value)
              << " best n=" << art.summary.best_index;
    if (art.summary.fitted_exponent)
        std::cout << " fitted exponent=" << format_double(*art.summary.fitted_exponent);
    if (art.summary.aborted) std::cout << " [aborted: " << art.summary.abort_reason << "]";
    std::cout << "\n  outputs in " << out.string() << std::endl;
    return 0;
}

namespace {

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

std::vector<SweepAxis> collect_axes(const KeyValues& kv) {
    std::vector<SweepAxis> axes;
    auto add_doubles = [&](const char* sweep_key, const char* point_key) {
        if (!has_key(kv, sweep_key)) return;
        SweepAxis axis;
        axis.key = point_key;
        for (double v : parse_double_list(kv.at(sweep_key), sweep_key))
            axis.values.push_back(format_double(v));
        axes.push_back(std::move(axis));
    };
    auto add_longs = [&](const char* sweep_key, const char* point_key) {
        if (!has_key(kv, sweep_key)) return;
        SweepAxis axis;
        axis.key = point_key;
        for (long v : parse_long_list(kv.at(sweep_key), sweep_key))
            axis.values.push_back(std::to_string(v));
        axes.push_back(std::move(axis));
    };
    add_doubles("sweep_theta", "theta");
    add_doubles("sweep_lambda", "lambda");
    add_doubles("sweep_q", "q");
    add_longs("sweep_m0", "m0");
    add_doubles("sweep_r", "r");
    add_longs("sweep_iters", "iters");
    add_longs("sweep_seed", "seed");
    return axes;
}

}  // namespace

int cmd_sweep(const KeyValues& kv) {
    const auto axes = collect_axes(kv);
    if (axes.empty())
        throw ConfigError("sweep: at least one sweep axis is required "
                          "(sweep_theta/sweep_lambda/sweep_q/sweep_m0/sweep_r/sweep_iters/"
                          "sweep_seed)");
    std::size_t total = 1;
    const auto cap = static_cast<std::size_t>(get_long(kv, "sweep_cap", 10000));
    for (const auto& axis : axes) {
        total *= axis.values.size();
        if (total > cap)
            throw ConfigError("sweep: grid size exceeds the cap of " + std::to_string(cap));
    }
    const auto emit = emit_set(kv);
    const auto out = resolve_out_dir(kv);
    prepare_out_dir(out);

    // materialize grid points in row-major axis order
    std::vector<KeyValues> points(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        KeyValues point = kv;
        for (const auto& axis : axes) point.erase("sweep_" + axis.key);
        point.erase("sweep_cap");
        std::size_t rem = idx;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& axis = axes[a];
            point[axis.key] = axis.values[rem % axis.values.size()];
            rem /= axis.values.size();
        }
        points[idx] = std::move(point);
    }
    for (const auto& point : points) resolve_run(point);  // validate the whole grid up front

    std::vector<SummaryRecord> results(total);
    const long jobs = std::max(1L, get_long(kv, "jobs", 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            try {
                RunArtifacts art = execute_run(points[i]);
                if (emit.count("csv")) {
                    char tag[16];
                    std::snprintf(tag, sizeof(tag), "%05zu", i);
                    const auto dir = out / "points" / tag;
                    prepare_out_dir(dir);
                    if (emit.count("csv")) write_trace_csv(dir / "trace.csv", art.trace);
                    write_summary_json(dir / "summary.json", art.summary);
                }
                results[i] = std::move(art.summary);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (long j = 0; j < std::min<long>(jobs, static_cast<long>(total)); ++j)
        pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);

    // one summary per grid point, deterministic order
    std::ostringstream jsonl;
    for (const auto& rec : results) jsonl << summary_to_json_line(rec);
    write_text_file(out / "sweep.jsonl", jsonl.str());

    std::ostringstream csv;
    csv << "point";
    for (const auto& axis : axes) csv << "," << axis.key;
    csv << ",final_F,fitted_exponent,theoretical_exponent,r_squared,converged,aborted,"
           "bounds_all_passed\n";
    for (std::size_t i = 0; i < total; ++i) {
        const auto& rec = results[i];
        csv << i;
        for (const auto& axis : axes) csv << "," << rec.config.at(axis.key);
        csv << "," << format_double(rec.final_self_value) << ","
            << (rec.fitted_exponent ? format_double(*rec.fitted_exponent) : "") << ","
            << format_double(rec.theoretical_exponent) << ","
            << (rec.r_squared ? format_double(*rec.r_squared) : "") << ","
            << (rec.converged ? 1 : 0) << "," << (rec.aborted ? 1 : 0) << ",";
        bool all = true;
        for (const auto& [_, ok] : rec.bounds) all = all && ok;
        csv << (all ? 1 : 0) << "\n";
    }
    write_text_file(out / "sweep.csv", csv.str());

    std::cout << "sweep: " << total << " points -> " << (out / "sweep.jsonl").string() << ", "
              << (out / "sweep.csv").string() << std::endl;
    return 0;
}

int cmd_plot(const std::vector<std::string>& trace_paths, const KeyValues& kv) {
    if (trace_paths.empty()) throw ConfigError("plot: at least one trace path is required");
    const std::string kind = get_string(kv, "kind", "self_value");
    if (kind != "self_value" && kind != "s_curve" && kind != "step_norm")
        throw ConfigError("field 'kind': expected self_value | s_curve | step_norm");
    const std::string scale_name = get_string(kv, "scale", "loglog");
    if (scale_name != "loglog" && scale_name != "linear")
        throw ConfigError("field 'scale': expected loglog | linear");
    const PlotScale scale = scale_name == "loglog" ? PlotScale::loglog : PlotScale::linear;
    const std::filesystem::path out =
        has_key(kv, "out") ? std::filesystem::path(kv.at("out")) : std::filesystem::path("plot.svg");

    std::vector<PlotSeries> series;
    for (const auto& path_str : trace_paths) {
        const std::filesystem::path path(path_str);
        const TraceTable table = read_trace_csv(path);
        SummaryRecord summary;
        bool have_summary = false;
        const std::filesystem::path summary_path =
            has_key(kv, "summary") ? std::filesystem::path(kv.at("summary"))
                                   : path.parent_path() / "summary.json";
        if (std::filesystem::exists(summary_path)) {
            summary = read_summary_json(summary_path);
            have_summary = true;
        }
        const std::string label =
            have_summary && summary.config.count("describe") ? summary.config.at("describe")
                                                             : path.filename().string();
        std::vector<PlotSeries> group;
        if (!have_summary) {
            PlotSeries empirical;
            empirical.label = label;
            for (std::size_t i = 0; i < table.rows(); ++i) {
                if (kind == "s_curve" && i == 0) continue;
                if (kind == "step_norm" && (i == 0 || i + 1 >= table.rows())) continue;
                empirical.xs.push_back(static_cast<double>(table.n[i]));
                empirical.ys.push_back(kind == "self_value" ? table.self[i]
                                       : kind == "s_curve"  ? table.s[i]
                                                            : table.step[i]);
            }
            group = {empirical};
        } else if (kind == "self_value") {
            group = self_value_series(table, summary, label);
        } else if (kind == "s_curve") {
            group = s_curve_series(table, summary, label);
        } else {
            group = step_norm_series(table, summary, label);
        }
        for (auto& g : group) series.push_back(std::move(g));
    }

    const std::string y_label = kind == "self_value" ? "F(x_n, x_n)"
                                : kind == "s_curve"  ? "S_n"
                                                     : "||x_{n+1} - x_n||";
    const std::string svg = render_plot_svg(series, kind, "n", y_label, scale);
    write_text_file(out, svg);
    std::cout << "plot: wrote " << out.string() << std::endl;
    return 0;
}

}  // namespace valagg
