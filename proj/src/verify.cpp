#include "valagg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "valagg/diagnostics.hpp"
#include "valagg/measure.hpp"
#include "valagg/rng.hpp"
#include "valagg/runner.hpp"

namespace valagg {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

class Verifier {
public:
    explicit Verifier(const VerifyOptions& options) : options_(options) {}

    void add(const std::string& id, bool passed, double margin, const std::string& detail = "") {
        if (!options_.only.empty() && id.find(options_.only) == std::string::npos) return;
        checks_.push_back({id, passed, margin, detail});
    }

    /// Whether any of the ids a criterion can emit survives the filter;
    /// criteria skip their computation entirely otherwise.
    bool wants(const std::vector<std::string>& ids) const {
        if (options_.only.empty()) return true;
        for (const auto& id : ids)
            if (id.find(options_.only) != std::string::npos) return true;
        return false;
    }

    StructuralConstants tweaked(const StructuralConstants& c) const {
        if (options_.theta_scale == 1.0) return c;
        return StructuralConstants::make(c.alpha, c.beta * options_.theta_scale, c.g2,
                                         c.eps_tilde);
    }

    void fold(const std::string& id, const BoundCheckRecord& rec) {
        add(id, rec.passed, rec.worst_margin(), rec.note);
    }

    std::vector<VerifyCheck> take() { return std::move(checks_); }

private:
    VerifyOptions options_;
    std::vector<VerifyCheck> checks_;
};

RunTrace run_counterexample(double theta, double x1, long iters, double refradius = 2.0) {
    LoopConfig cfg;
    cfg.iterations = iters;
    cfg.x1 = ParameterPoint(x1);
    return run_deterministic(make_counterexample({theta, refradius}), cfg);
}

Matrix rotation3(double angle) {
    // rotation about the (1,1,1)/sqrt(3) axis
    const double s = 1.0 / std::sqrt(3.0);
    const double ax = s, ay = s, az = s;
    Matrix k(3, 3);
    k.at(0, 1) = -az; k.at(0, 2) = ay;
    k.at(1, 0) = az;  k.at(1, 2) = -ax;
    k.at(2, 0) = -ay; k.at(2, 1) = ax;
    Matrix r = Matrix::identity(3);
    const double sa = std::sin(angle);
    const double ca = std::cos(angle);
    // R = I + sin(a)K + (1-cos(a))K^2
    Matrix k2(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t l = 0; l < 3; ++l) k2.at(i, j) += k.at(i, l) * k.at(l, j);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            r.at(i, j) += sa * k.at(i, j) + (1.0 - ca) * k2.at(i, j);
    return r;
}

InstancePtr make_affine_rotation(double scale, double refradius) {
    AffineQuadraticSpec spec;
    spec.M = rotation3(0.7);
    for (auto& v : spec.M.data) v *= scale;
    spec.b = {0.1, -0.2, 0.05};
    spec.alpha = 2.0;
    spec.offset = 0.0;
    spec.reference_radius = refradius;
    return make_affine_quadratic(spec);
}

LinearImitationSpec imitation_setting_a() {
    LinearImitationSpec s;
    s.a = 0.2;
    s.action_gain = 0.3;
    s.expert_gain = 0.1;
    s.sigma0_sq = 1.0;
    s.horizon = 2;
    s.gain_lo = -0.5;
    s.gain_hi = 0.5;
    return s;
}

LinearImitationSpec imitation_setting_b() {
    LinearImitationSpec s;
    s.a = 0.3;
    s.action_gain = 0.4;
    s.expert_gain = 0.0;
    s.sigma0_sq = 0.5;
    s.horizon = 3;
    s.gain_lo = -0.6;
    s.gain_hi = 0.6;
    return s;
}


std::vector<std::string> inequality_run_tags() {
    std::vector<std::string> tags;
    for (double theta : {0.3, 0.5, 0.9}) tags.push_back("counterexample-theta-" + fmt(theta));
    for (double scale : {0.5, 0.9}) tags.push_back("affine-opnorm-" + fmt(scale));
    tags.push_back("imitation-a");
    tags.push_back("imitation-b");
    return tags;
}

struct NamedRun {
    std::string tag;
    RunTrace trace;
};

std::vector<NamedRun> inequality_runs() {
    std::vector<NamedRun> runs;
    for (double theta : {0.3, 0.5, 0.9}) {
        LoopConfig cfg;
        cfg.iterations = 500;
        cfg.x1 = ParameterPoint(1.0);
        runs.push_back({"counterexample-theta-" + fmt(theta),
                        run_deterministic(make_counterexample({theta, 2.0}), cfg)});
    }
    for (double scale : {0.5, 0.9}) {
        LoopConfig cfg;
        cfg.iterations = 500;
        cfg.x1 = ParameterPoint(Vec{1.0, 1.0, 1.0});
        runs.push_back({"affine-opnorm-" + fmt(scale),
                        run_deterministic(make_affine_rotation(scale, 4.0), cfg)});
    }
    {
        LoopConfig cfg;
        cfg.iterations = 500;
        cfg.x1 = ParameterPoint(-0.4);
        runs.push_back({"imitation-a",
                        run_deterministic(make_linear_imitation(imitation_setting_a()), cfg)});
    }
    {
        LoopConfig cfg;
        cfg.iterations = 500;
        cfg.x1 = ParameterPoint(0.5);
        runs.push_back({"imitation-b",
                        run_deterministic(make_linear_imitation(imitation_setting_b()), cfg)});
    }
    return runs;
}

// ---- criterion 1: exact reproduction of the divergent iterate prefix ----
void criterion1(Verifier& v) {
    if (!v.wants({"c1-paper-iterates"})) return;
    const RunTrace trace = run_counterexample(10.0, 1.0, 4);
    const double expected[] = {1.0, 10.0, 55.0, 220.0};
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double got = trace.iterates[i].coords[0];
        worst = std::max(worst, std::fabs(got - expected[i]) / std::fabs(expected[i]));
    }
    v.add("c1-paper-iterates", worst <= 1e-12, 1e-12 - worst,
          "iterates (1,10,55,220), max rel err " + fmt(worst));
}

// ---- criterion 2: fitted rate exponent matches 2(theta-1) ----
void criterion2(Verifier& v) {
    if (!v.wants({"c2-thm2-rate-theta-0.3", "c2-thm2-rate-theta-0.6", "c2-thm2-rate-theta-0.9"}))
        return;
    for (double theta : {0.3, 0.6, 0.9}) {
        const RunTrace trace = run_counterexample(theta, 1.0, 10000);
        const RateFit fit = fit_rate(trace, 0.0, {100, 10000});
        const double target = 2.0 * (theta - 1.0);
        const double err = std::fabs(fit.fitted_exponent - target);
        const bool ok = err <= 0.05 && fit.r_squared >= 0.999;
        v.add("c2-thm2-rate-theta-" + fmt(theta), ok, 0.05 - err,
              "fitted " + fmt(fit.fitted_exponent) + " vs " + fmt(target) + ", r2 " +
                  fmt(fit.r_squared));
    }
}

// ---- criterion 3: divergence for theta>1, neutrality at theta=1 ----
void criterion3(Verifier& v) {
    if (!v.wants({"c3-thm3-divergence-theta-1.5", "c3-thm3-neutral-theta-1.0"})) return;
    {
        const RunTrace trace = run_counterexample(1.5, 1.0, 10000);
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t n = 10; n < trace.rounds(); ++n)
            min_gap = std::min(min_gap, trace.self_values[n] - trace.self_values[n - 1]);
        const RateFit fit = fit_rate(trace, 0.0, {100, 10000});
        const double err = std::fabs(fit.fitted_exponent - 1.0);
        const bool ok = min_gap > 0.0 && err <= 0.05;
        v.add("c3-thm3-divergence-theta-1.5", ok, std::min(min_gap, 0.05 - err),
              "min increase " + fmt(min_gap) + ", fitted " + fmt(fit.fitted_exponent));
    }
    {
        const RunTrace trace = run_counterexample(1.0, 1.0, 200);
        double worst = 0.0;
        for (const auto& p : trace.iterates) worst = std::max(worst, std::fabs(p.coords[0] - 1.0));
        v.add("c3-thm3-neutral-theta-1.0", worst <= 1e-12, 1e-12 - worst,
              "max |x_n - x_1| = " + fmt(worst));
    }
}

// ---- criteria 4 & 5 & 10: the pointwise inequality suite ----
void criteria_4_5_10(Verifier& v) {
    std::vector<std::string> ids;
    for (const auto& tag : inequality_run_tags())
        for (const char* prefix :
             {"c4-lemma3-", "c4-prop2-", "c4-thm1-", "c5-thm2-terminal-", "c10-meanpolicy-"})
            ids.push_back(prefix + tag);
    if (!v.wants(ids)) return;
    for (const auto& [tag, trace] : inequality_runs()) {
        const StructuralConstants c = v.tweaked(trace.effective_constants);
        const auto records =
            check_bounds(trace, c, {BoundId::lemma3, BoundId::prop2, BoundId::thm1});
        for (const auto& rec : records) v.fold("c4-" + bound_id_name(rec.bound_id) + "-" + tag, rec);

        const auto thm2 = check_bounds(trace, c, {BoundId::thm2});
        v.fold("c5-thm2-terminal-" + tag, thm2.front());

        // mean policy: ||x_N - mean|| <= S_N and S_N <= e^{1-theta} N^{theta-1} G2/alpha
        const std::size_t n = trace.rounds();
        Vec mean = vec::zeros(trace.iterates.front().dim());
        for (const auto& p : trace.iterates) vec::axpy(mean, 1.0 / static_cast<double>(n), p.coords);
        const double lhs = vec::dist(trace.iterates.back().coords, mean);
        const double s_n = trace.s_values.back();
        const double margin1 = s_n - lhs;
        const double envelope = std::exp(1.0 - c.theta) *
                                std::pow(static_cast<double>(n), c.theta - 1.0) * c.g2 / c.alpha;
        const double margin2 = envelope - s_n;
        const double tol1 = 1e-9 * std::max({1.0, lhs, s_n});
        const double tol2 = 1e-9 * std::max({1.0, s_n, envelope});
        v.add("c10-meanpolicy-" + tag, margin1 >= -tol1 && margin2 >= -tol2,
              std::min(margin1, margin2),
              "||x_N - mean||=" + fmt(lhs) + " S_N=" + fmt(s_n) + " envelope=" + fmt(envelope));
    }
}

// ---- criterion 6: weighted regularization stabilizes theta=1.5 ----
void criterion6(Verifier& v) {
    if (!v.wants({"c6-corollary3-unregularized-diverges", "c6-corollary3-weighted-rate",
                  "c6-corollary3-weighted-bound", "c6-corollary3-expert-regularizer",
                  "c6-corollary3-expert-bound"}))
        return;
    {
        const RunTrace trace = run_counterexample(1.5, 1.0, 4000);
        const RateFit fit = fit_rate(trace, 0.0, default_fit_window(trace.rounds()));
        v.add("c6-corollary3-unregularized-diverges", fit.fitted_exponent > 0.5,
              fit.fitted_exponent - 0.5, "fitted " + fmt(fit.fitted_exponent));
    }
    const InstancePtr base = make_counterexample({1.5, 2.0});
    {
        CostTransformer t;
        t.kind = TransformKind::weighted_regularization;
        t.lambda = 2.0;
        t.regularizer = Regularizer::quadratic_centered(base->constants().alpha,
                                                        base->reference_box());
        t.r_nonneg = true;
        LoopConfig cfg;
        cfg.iterations = 10000;
        cfg.x1 = ParameterPoint(1.0);
        cfg.transformer = t;
        const RunTrace trace = run_deterministic(base, cfg);
        const RateFit fit = fit_rate(trace, 0.0, default_fit_window(trace.rounds()));
        const double err = std::fabs(fit.fitted_exponent - (-1.0));
        v.add("c6-corollary3-weighted-rate", err <= 0.1, 0.1 - err,
              "theta_eff " + fmt(trace.effective_constants.theta) + ", fitted " +
                  fmt(fit.fitted_exponent));
        const auto rec = check_bounds(trace, trace.effective_constants, {BoundId::corollary3});
        v.fold("c6-corollary3-weighted-bound", rec.front());
    }
    {
        CostTransformer t;
        t.kind = TransformKind::weighted_regularization;
        t.lambda = 2.0;
        t.regularizer = Regularizer::expert_anchored(base);
        t.r_nonneg = false;
        LoopConfig cfg;
        cfg.iterations = 10000;
        cfg.x1 = ParameterPoint(1.0);
        cfg.transformer = t;
        const RunTrace trace = run_deterministic(base, cfg);
        const double theta_eff = trace.effective_constants.theta;
        const RateFit fit = fit_rate(trace, 0.0, default_fit_window(trace.rounds()));
        const bool ok = theta_eff < 1.0 && fit.fitted_exponent < 0.0;
        v.add("c6-corollary3-expert-regularizer", ok,
              std::min(1.0 - theta_eff, -fit.fitted_exponent),
              "theta_eff " + fmt(theta_eff) + ", fitted " + fmt(fit.fitted_exponent));
        const auto rec = check_bounds(trace, trace.effective_constants, {BoundId::corollary3});
        v.fold("c6-corollary3-expert-bound", rec.front());
    }
}

// ---- criterion 7: mixing contracts beta and stabilizes ----
void criterion7(Verifier& v) {
    if (!v.wants({"c7-mixing-beta-q-0.2", "c7-mixing-beta-q-0.5",
                  "c7-mixing-beta-q-0.9", "c7-corollary2-mixing-stabilizes",
                  "c7-corollary2-mixed-bound"}))
        return;
    LinearImitationSpec unstable;
    unstable.a = 0.0;
    unstable.action_gain = 1.0;
    unstable.expert_gain = 0.0;
    unstable.sigma0_sq = 1.0;
    unstable.horizon = 3;
    unstable.gain_lo = -1.5;
    unstable.gain_hi = 1.5;
    const InstancePtr base = make_linear_imitation(unstable);
    const double beta_base = base->constants().beta;
    for (double q : {0.2, 0.5, 0.9}) {
        const InstancePtr mixed = base->mixed(q);
        const StructuralConstants measured =
            measure_constants(*mixed, base->reference_box(), 4000, 11);
        const double bound =
            (1.0 - std::pow(q, static_cast<double>(unstable.horizon))) * beta_base * 1.03;
        v.add("c7-mixing-beta-q-" + fmt(q), measured.beta <= bound, bound - measured.beta,
              "measured " + fmt(measured.beta) + " <= " + fmt(bound));
    }
    {
        CostTransformer t;
        t.kind = TransformKind::mixing;
        t.mixing_q = 0.8;
        LoopConfig cfg;
        cfg.iterations = 10000;
        cfg.x1 = ParameterPoint(1.0);
        cfg.transformer = t;
        const InstancePtr cex = make_counterexample({1.5, 2.0});
        const RunTrace trace = run_deterministic(cex, cfg);
        const double theta_eff = trace.effective_constants.theta;  // 1.5 * (1 - 0.8^2)
        const RateFit fit = fit_rate(trace, 0.0, default_fit_window(trace.rounds()));
        const double target = 2.0 * (theta_eff - 1.0);
        const double err = std::fabs(fit.fitted_exponent - target);
        const double x_final = std::fabs(trace.iterates.back().coords[0]);
        const bool ok = theta_eff < 1.0 && err <= 0.1 && x_final <= 0.05;
        v.add("c7-corollary2-mixing-stabilizes", ok, std::min(0.1 - err, 0.05 - x_final),
              "theta_eff " + fmt(theta_eff) + ", fitted " + fmt(fit.fitted_exponent) +
                  ", |x_N| " + fmt(x_final));
        const auto rec = check_bounds(trace, trace.effective_constants, {BoundId::corollary2});
        v.fold("c7-corollary2-mixed-bound", rec.front());
    }
}

// ---- criterion 8: stochastic plateau and schedule scaling ----
void criterion8(Verifier& v) {
    if (!v.wants({"c8-thm4-plateau-m0", "c8-thm4-rate-r"})) return;
    StochasticWrapperSpec wrap;
    wrap.base = make_counterexample({0.5, 2.0});
    wrap.noise = NoiseKind::uniform;
    wrap.sigma = 1.0;
    const InstancePtr inst = make_stochastic(wrap);

    auto median_final = [&](long m0, double r) {
        std::vector<double> finals;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            LoopConfig cfg;
            cfg.iterations = 500;
            cfg.x1 = ParameterPoint(0.0);
            cfg.variant = LoopVariant::stochastic;
            cfg.sampling = SamplingSchedule{m0, r, seed};
            finals.push_back(run_stochastic(inst, cfg).self_values.back());
        }
        std::sort(finals.begin(), finals.end());
        return 0.5 * (finals[9] + finals[10]);
    };

    const double med_m25_r0 = median_final(25, 0.0);
    const double med_m400_r0 = median_final(400, 0.0);
    const double med_m25_r1 = median_final(25, 1.0);
    v.add("c8-thm4-plateau-m0", med_m400_r0 <= 0.25 * med_m25_r0,
          0.25 * med_m25_r0 - med_m400_r0,
          "median(m0=400) " + fmt(med_m400_r0) + " vs 0.25*median(m0=25) " +
              fmt(0.25 * med_m25_r0));
    v.add("c8-thm4-rate-r", med_m25_r1 <= 0.5 * med_m25_r0, 0.5 * med_m25_r0 - med_m25_r1,
          "median(r=1) " + fmt(med_m25_r1) + " vs 0.5*median(r=0) " + fmt(0.5 * med_m25_r0));
}

// ---- criterion 9: numerical hygiene ----
void criterion9(Verifier& v) {
    if (!v.wants({"c9-hygiene-gradient-counterexample", "c9-hygiene-gradient-affine",
                  "c9-hygiene-gradient-imitation", "c9-hygiene-solver-agreement",
                  "c9-hygiene-reproducibility"}))
        return;
    // gradient vs central finite differences
    struct Probe {
        std::string tag;
        InstancePtr inst;
    };
    AffineQuadraticSpec aff;
    aff.M = rotation3(0.7);
    for (auto& x : aff.M.data) x *= 0.8;
    aff.b = {0.1, -0.2, 0.05};
    aff.alpha = 2.0;
    aff.offset = 0.3;
    aff.reference_radius = 2.0;
    const std::vector<Probe> probes = {
        {"counterexample", make_counterexample({0.7, 2.0})},
        {"affine", make_affine_quadratic(aff)},
        {"imitation", make_linear_imitation(imitation_setting_a())},
    };
    for (const auto& [tag, inst] : probes) {
        Rng rng(5);
        const Domain& box = inst->reference_box();
        double worst = 0.0;
        for (int p = 0; p < 100; ++p) {
            const Vec y = rng.uniform_in_box(box.lower, box.upper);
            const Vec x = rng.uniform_in_box(box.lower, box.upper);
            const Vec g = inst->grad_x(y, x);
            const double h = 1e-5 * std::max(1.0, vec::norm(x));
            Vec fd(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                Vec xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                fd[i] = (inst->value(y, xp) - inst->value(y, xm)) / (2.0 * h);
            }
            worst = std::max(worst, vec::dist(fd, g) / std::max(1.0, vec::norm(g)));
        }
        v.add("c9-hygiene-gradient-" + tag, worst <= 1e-6, 1e-6 - worst,
              "max rel FD error " + fmt(worst));
    }

    // closed-form vs forced projected gradient
    {
        Rng rng(23);
        double worst = 0.0;
        for (int rep = 0; rep < 3; ++rep) {
            CostAggregate agg;
            for (int i = 0; i < 30; ++i) {
                Vec target(3);
                for (auto& t : target) t = rng.uniform(-2.0, 2.0);
                agg.add(PerRoundCost::from_quadratic(
                    ParameterPoint(target),
                    QuadraticCost::from_target(rng.uniform(0.5, 3.0), target, 0.0)));
            }
            const Domain dom = rep == 0 ? Domain::unbounded(3) : Domain::centered_box(3, 0.5);
            const ParameterPoint warm(Vec{0.1, 0.1, 0.1});
            const SolveReport closed = ftl_step(agg, dom, warm, 1e-12);
            SolveOptions opt;
            opt.tol_inner = 1e-12;
            opt.force_method = SolveMethod::projected_gradient;
            const SolveReport iterative = ftl_step(agg, dom, warm, opt);
            worst = std::max(worst,
                             vec::dist(closed.minimizer.coords, iterative.minimizer.coords));
        }
        const RunTrace trace = run_counterexample(0.5, 1.0, 50);
        CostAggregate agg;
        const InstancePtr cex = make_counterexample({0.5, 2.0});
        for (const auto& p : trace.iterates) agg.add(freeze_cost(cex, p));
        const SolveReport closed = ftl_step(agg, cex->domain(), trace.iterates.back(), 1e-12);
        SolveOptions opt;
        opt.tol_inner = 1e-12;
        opt.force_method = SolveMethod::projected_gradient;
        const SolveReport iterative = ftl_step(agg, cex->domain(), trace.iterates.back(), opt);
        worst = std::max(worst, vec::dist(closed.minimizer.coords, iterative.minimizer.coords));
        v.add("c9-hygiene-solver-agreement", worst <= 1e-8, 1e-8 - worst,
              "max |closed - iterative| " + fmt(worst));
    }

    // byte-identical rerun of a seeded stochastic config
    {
        KeyValues kv = {{"instance", "counterexample"}, {"theta", "0.5"}, {"x1", "1"},
                        {"iters", "50"},                {"noise", "uniform"}, {"sigma", "1"},
                        {"m0", "10"},                   {"seed", "7"}};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        const auto dir = std::filesystem::temp_directory_path() /
                         ("valagg-verify-" + std::to_string(stamp));
        std::filesystem::create_directories(dir / "a");
        std::filesystem::create_directories(dir / "b");
        auto emit = [&](const std::filesystem::path& sub) {
            const RunArtifacts art = execute_run(kv);
            write_trace_csv(sub / "trace.csv", art.trace);
            SummaryRecord s = art.summary;
            s.wall_time_ms = 0.0;  // excluded from the byte comparison
            write_summary_json(sub / "summary.json", s);
        };
        emit(dir / "a");
        emit(dir / "b");
        const bool csv_equal =
            read_text_file(dir / "a" / "trace.csv") == read_text_file(dir / "b" / "trace.csv");
        const bool json_equal = read_text_file(dir / "a" / "summary.json") ==
                                read_text_file(dir / "b" / "summary.json");
        std::filesystem::remove_all(dir);
        v.add("c9-hygiene-reproducibility", csv_equal && json_equal,
              csv_equal && json_equal ? 0.0 : -1.0,
              std::string("trace bytes ") + (csv_equal ? "equal" : "differ") + ", summary " +
                  (json_equal ? "equal" : "differ"));
    }
}

}  // namespace

std::vector<VerifyCheck> run_verification(const VerifyOptions& options) {
    Verifier v(options);
    criterion1(v);
    criterion2(v);
    criterion3(v);
    criteria_4_5_10(v);
    criterion6(v);
    criterion7(v);
    criterion8(v);
    criterion9(v);
    return v.take();
}

int run_verify_command(const VerifyOptions& options) {
    const auto checks = run_verification(options);
    bool all = true;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.id << "  margin="
                  << fmt(c.margin);
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
        std::cout << "\n";
        all = all && c.passed;
    }
    std::cout << (all ? "verification: all " : "verification: FAILURES among ") << checks.size()
              << " checks" << std::endl;
    return all ? 0 : 4;
}

}  // namespace valagg
