#include "valagg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace valagg {

double compute_s(const std::vector<ParameterPoint>& iterates, std::size_t n) {
    if (n < 2) throw std::invalid_argument("compute_s: defined for n >= 2");
    if (n > iterates.size())
        throw std::invalid_argument("compute_s: n exceeds the number of iterates");
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k)
        sum += vec::dist(iterates[n - 1].coords, iterates[k].coords);
    return sum / static_cast<double>(n - 1);
}

double compute_s_window(const std::vector<ParameterPoint>& iterates, std::size_t m,
                        std::size_t n) {
    if (m < 1 || m >= n || n > iterates.size())
        throw std::invalid_argument("compute_s_window: requires 1 <= m < n <= length");
    double sum = 0.0;
    for (std::size_t k = m; k < n; ++k)
        sum += vec::dist(iterates[n - 1].coords, iterates[k - 1].coords);
    return sum / static_cast<double>(n - m);
}

std::string bound_id_name(BoundId id) {
    switch (id) {
        case BoundId::thm1: return "thm1";
        case BoundId::thm2: return "thm2";
        case BoundId::thm3_lower: return "thm3_lower";
        case BoundId::lemma3: return "lemma3";
        case BoundId::prop2: return "prop2";
        case BoundId::corollary1: return "corollary1";
        case BoundId::corollary2: return "corollary2";
        case BoundId::corollary3: return "corollary3";
    }
    return "?";
}

std::optional<BoundId> bound_id_from_name(const std::string& name) {
    for (BoundId id : {BoundId::thm1, BoundId::thm2, BoundId::thm3_lower, BoundId::lemma3,
                       BoundId::prop2, BoundId::corollary1, BoundId::corollary2, BoundId::corollary3})
        if (bound_id_name(id) == name) return id;
    return std::nullopt;
}

double BoundCheckRecord::worst_margin() const {
    double w = std::numeric_limits<double>::infinity();
    for (double m : per_iterate_margin) w = std::min(w, m);
    return w;
}

namespace {

constexpr double kTolScale = 1e-9;

struct MarginCollector {
    std::vector<double> margins;
    bool passed = true;

    void add(double lhs, double rhs) {
        const double margin = rhs - lhs;
        margins.push_back(margin);
        const double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        if (!(margin >= -kTolScale * scale)) passed = false;
    }
};

void require_finite(const StructuralConstants& c, const char* who) {
    if (!std::isfinite(c.alpha) || !(c.alpha > 0.0))
        throw std::invalid_argument(std::string(who) + ": missing or invalid constant alpha");
    if (!std::isfinite(c.beta)) throw std::invalid_argument(std::string(who) + ": missing constant beta");
    if (!std::isfinite(c.g2) || !(c.g2 > 0.0))
        throw std::invalid_argument(std::string(who) + ": missing or invalid constant g2");
    if (!std::isfinite(c.eps_tilde))
        throw std::invalid_argument(std::string(who) + ": missing constant eps_tilde");
}

void require_complete(const RunTrace& trace, const char* who) {
    if (trace.aborted)
        throw std::invalid_argument(std::string(who) + ": requires a complete (non-aborted) trace");
}

double thm2_envelope(const StructuralConstants& c, double n) {
    const double coeff = c.theta * std::exp(1.0 - c.theta) * c.g2;
    return c.eps_tilde + coeff * coeff / (2.0 * c.alpha) * std::pow(n, 2.0 * (c.theta - 1.0));
}

BoundCheckRecord check_thm1(const RunTrace& trace, const StructuralConstants& c) {
    require_complete(trace, "thm1");
    BoundCheckRecord rec;
    rec.bound_id = BoundId::thm1;
    rec.constants_used = c;
    const double n = static_cast<double>(trace.rounds());
    double mean_pr = 0.0;
    for (double v : trace.per_round_values) mean_pr += v;
    mean_pr /= n;
    double best = trace.self_values_effective[0];
    for (double v : trace.self_values_effective) best = std::min(best, v);
    MarginCollector mc;
    mc.add(best, mean_pr);
    mc.add(mean_pr, trace.batch_min_avg + c.g2 * c.g2 * (std::log(n) + 1.0) / (2.0 * c.alpha * n));
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    rec.note = "best <= average per-round <= batch floor + regret bound";
    return rec;
}

BoundCheckRecord check_thm2(const RunTrace& trace, const StructuralConstants& c) {
    require_complete(trace, "thm2");
    BoundCheckRecord rec;
    rec.bound_id = BoundId::thm2;
    rec.constants_used = c;
    const double n = static_cast<double>(trace.rounds());
    MarginCollector mc;
    mc.add(trace.self_values_effective.back(), thm2_envelope(c, n));
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    rec.note = "terminal self-performance under the stability envelope";
    return rec;
}

BoundCheckRecord check_thm3(const RunTrace& trace, const StructuralConstants& c) {
    BoundCheckRecord rec;
    rec.bound_id = BoundId::thm3_lower;
    rec.constants_used = c;
    rec.asymptotic = true;
    const std::size_t len = trace.rounds();
    MarginCollector mc;
    const std::size_t start = std::min<std::size_t>(10, len);
    for (std::size_t i = start; i + 1 <= len; ++i)
        mc.add(trace.self_values_effective[i - 1], trace.self_values_effective[i]);

    // Witness constant: largest c0 with F(x_n,x_n) - eps >= c0·n^{2(θ-1)} on the tail.
    double c0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i <= len; ++i) {
        const double shape = std::pow(static_cast<double>(i), 2.0 * (c.theta - 1.0));
        c0 = std::min(c0, (trace.self_values_effective[i - 1] - c.eps_tilde) / shape);
    }
    if (!(c0 > 0.0)) mc.passed = false;
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    std::ostringstream os;
    os << "nondecreasing tail with growth witness c0=" << c0;
    rec.note = os.str();
    return rec;
}

BoundCheckRecord check_lemma3(const RunTrace& trace, const StructuralConstants& c) {
    BoundCheckRecord rec;
    rec.bound_id = BoundId::lemma3;
    rec.constants_used = c;
    MarginCollector mc;
    // step from x_n to x_{n+1} exists for n <= len-1; S_n exists for n >= 2
    for (std::size_t n = 2; n < trace.rounds(); ++n) {
        const double s_n = trace.s_values[n - 2];
        const double step = trace.step_norms[n - 1];
        mc.add(step, c.theta * s_n / static_cast<double>(n));
    }
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    rec.note = "per-step contraction ||x_{n+1}-x_n|| <= theta*S_n/n";
    return rec;
}

BoundCheckRecord check_prop2(const RunTrace& trace, const StructuralConstants& c) {
    require_complete(trace, "prop2");
    BoundCheckRecord rec;
    rec.bound_id = BoundId::prop2;
    rec.constants_used = c;
    MarginCollector mc;
    if (trace.rounds() >= 2) {
        const double s2 = trace.s_values[0];
        mc.add(s2, c.g2 / c.alpha);
        for (std::size_t n = 2; n <= trace.rounds(); ++n) {
            const double envelope =
                std::exp(1.0 - c.theta) * std::pow(static_cast<double>(n), c.theta - 1.0) * s2;
            mc.add(trace.s_values[n - 2], envelope);
        }
    }
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    rec.note = "S_2 <= G2/alpha and S_n <= e^{1-theta} n^{theta-1} S_2";
    return rec;
}

BoundCheckRecord check_corollary1(const RunTrace& trace, const StructuralConstants& c) {
    BoundCheckRecord rec;
    rec.bound_id = BoundId::corollary1;
    rec.constants_used = c;
    rec.asymptotic = true;
    const std::size_t len = trace.rounds();
    if (len < 8) {
        rec.passed = true;
        rec.note = "insufficient rounds for windowed concentration (vacuous)";
        return rec;
    }
    auto shape = [&](std::size_t m, std::size_t n) {
        const double md = static_cast<double>(m);
        const double nd = static_cast<double>(n);
        return c.theta / ((nd - md) * std::pow(md, 2.0 - c.theta)) +
               1.0 / std::pow(nd, 1.0 - c.theta);
    };
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t m : {std::size_t{2}, len / 64, len / 16, len / 4}) {
        if (m < 2) continue;
        for (std::size_t factor : {std::size_t{2}, std::size_t{4}, std::size_t{8}}) {
            const std::size_t n = m * factor;
            if (n > m && n <= len) pairs.emplace_back(m, n);
        }
        if (len > m + 1) pairs.emplace_back(m, len);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    // Fit the hidden constant on the early windows, then require no violation
    // beyond 2x on the late ones.
    double fitted = 0.0;
    for (const auto& [m, n] : pairs)
        if (n <= len / 2) fitted = std::max(fitted, compute_s_window(trace.iterates, m, n) / shape(m, n));
    MarginCollector mc;
    for (const auto& [m, n] : pairs)
        mc.add(compute_s_window(trace.iterates, m, n), 2.0 * fitted * shape(m, n));
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    std::ostringstream os;
    os << "windowed concentration, fitted constant " << fitted << " on " << pairs.size()
       << " windows";
    rec.note = os.str();
    return rec;
}

BoundCheckRecord check_corollary2(const RunTrace& trace, const StructuralConstants& c) {
    require_complete(trace, "corollary2");
    if (!trace.transform || trace.transform->kind != "mixing")
        throw std::invalid_argument("corollary2: requires a trace produced under a mixing transform");
    BoundCheckRecord rec;
    rec.bound_id = BoundId::corollary2;
    rec.constants_used = c;
    const TransformEcho& echo = *trace.transform;
    const double n = static_cast<double>(trace.rounds());
    const double delta_n = thm2_envelope(c, n) - c.eps_tilde;
    const double bias = 2.0 * echo.value_bound *
                        std::min(1.0, static_cast<double>(echo.horizon) * echo.q);
    MarginCollector mc;
    mc.add(trace.self_values.back(), delta_n + trace.base_constants.eps_tilde + bias);
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    rec.note = "mixed-run performance <= Delta_N + eps + 2M*min(1, Tq)";
    return rec;
}

BoundCheckRecord check_corollary3(const RunTrace& trace, const StructuralConstants& c) {
    require_complete(trace, "corollary3");
    if (!trace.transform || trace.transform->kind != "weighted")
        throw std::invalid_argument("corollary3: requires a trace produced under weighted regularization");
    BoundCheckRecord rec;
    rec.bound_id = BoundId::corollary3;
    rec.constants_used = c;
    const TransformEcho& echo = *trace.transform;
    const double n = static_cast<double>(trace.rounds());
    const double lambda = echo.lambda;
    const double eps_base = trace.base_constants.eps_tilde;
    const double delta_n = thm2_envelope(c, n) - c.eps_tilde;
    MarginCollector mc;
    if (echo.r_nonneg) {
        mc.add(trace.self_values.back(), (1.0 + lambda) * (eps_base + delta_n));
        rec.note = "weighted-run performance <= (1+lambda)(eps + Delta_N)";
    } else {
        // Without a sign guarantee on R, the subtracted regularizer is
        // controlled through the Lipschitz modulus instead.
        const double delta_p = (1.0 + lambda) * delta_n;
        const double rhs = delta_p + eps_base +
                           lambda * c.g2 *
                               (2.0 * lambda * c.g2 / c.alpha + std::sqrt(2.0 * delta_p / c.alpha));
        mc.add(trace.self_values.back(), rhs);
        rec.note = "weighted-run performance (sign-free regularizer chain)";
    }
    rec.per_iterate_margin = mc.margins;
    rec.passed = mc.passed;
    return rec;
}

}  // namespace

std::vector<BoundCheckRecord> check_bounds(const RunTrace& trace,
                                           const StructuralConstants& constants,
                                           const std::set<BoundId>& which) {
    require_finite(constants, "check_bounds");
    if (trace.rounds() == 0) throw std::invalid_argument("check_bounds: empty trace");
    std::vector<BoundCheckRecord> records;
    for (BoundId id : which) {
        switch (id) {
            case BoundId::thm1: records.push_back(check_thm1(trace, constants)); break;
            case BoundId::thm2: records.push_back(check_thm2(trace, constants)); break;
            case BoundId::thm3_lower: records.push_back(check_thm3(trace, constants)); break;
            case BoundId::lemma3: records.push_back(check_lemma3(trace, constants)); break;
            case BoundId::prop2: records.push_back(check_prop2(trace, constants)); break;
            case BoundId::corollary1: records.push_back(check_corollary1(trace, constants)); break;
            case BoundId::corollary2: records.push_back(check_corollary2(trace, constants)); break;
            case BoundId::corollary3: records.push_back(check_corollary3(trace, constants)); break;
        }
    }
    return records;
}

std::pair<std::size_t, std::size_t> default_fit_window(std::size_t rounds) {
    return {std::max<std::size_t>(10, rounds / 100), rounds};
}

RateFit fit_rate(const RunTrace& trace, double eps_tilde,
                 std::pair<std::size_t, std::size_t> window) {
    const std::size_t len = trace.rounds();
    const std::size_t lo = std::max<std::size_t>(2, window.first);
    const std::size_t hi = std::min(len, window.second);
    if (lo >= hi) throw std::invalid_argument("fit_rate: empty window");

    // 25-point geometric grid inside the window.
    std::vector<std::size_t> grid;
    const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
    for (int i = 0; i < 25; ++i) {
        const double t = static_cast<double>(i) / 24.0;
        auto n = static_cast<std::size_t>(std::llround(static_cast<double>(lo) * std::pow(ratio, t)));
        n = std::clamp<std::size_t>(n, lo, hi);
        if (grid.empty() || grid.back() != n) grid.push_back(n);
    }

    std::vector<double> xs, ys;
    for (std::size_t n : grid) {
        const double excess = trace.self_values[n - 1] - eps_tilde;
        if (excess > 1e-14) {
            xs.push_back(std::log(static_cast<double>(n)));
            ys.push_back(std::log(excess));
        }
    }
    if (xs.size() < 5)
        throw std::runtime_error(
            "fit_rate: fewer than 5 points with positive excess (sequence already at its floor)");

    const double n_pts = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n_pts;
    my /= n_pts;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = my + slope * (xs[i] - mx);
        ss_res += (ys[i] - pred) * (ys[i] - pred);
    }

    RateFit fit;
    fit.fitted_exponent = slope;
    fit.theoretical_exponent = 2.0 * (trace.effective_constants.theta - 1.0);
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.n_min = lo;
    fit.n_max = hi;
    fit.offset_used = eps_tilde;
    fit.points_used = xs.size();
    return fit;
}

}  // namespace valagg
