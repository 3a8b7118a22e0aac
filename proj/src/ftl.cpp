#include "valagg/ftl.hpp"

#include <cmath>
#include <stdexcept>

namespace valagg {

void CostAggregate::add(PerRoundCost cost) {
    if (!(cost.strong_convexity > 0.0))
        throw std::invalid_argument("CostAggregate: per-round cost must be strongly convex");
    strong_convexity_ += cost.strong_convexity;
    smoothness_ += cost.grad_smoothness;
    if (cost.quadratic && all_quadratic_) {
        if (quad_sum_.linear.empty()) quad_sum_.linear = vec::zeros(cost.quadratic->linear.size());
        quad_sum_ += *cost.quadratic;
    } else {
        all_quadratic_ = false;
    }
    costs_.push_back(std::move(cost));
}

const QuadraticCost& CostAggregate::summed_quadratic() const {
    if (!all_quadratic_ || costs_.empty())
        throw std::logic_error("CostAggregate: no canonical quadratic form available");
    return quad_sum_;
}

double CostAggregate::value(const Vec& x) const {
    double s = 0.0;
    for (const auto& c : costs_) s += c.value(x);
    return s;
}

Vec CostAggregate::gradient(const Vec& x) const {
    Vec g = vec::zeros(x.size());
    for (const auto& c : costs_) {
        Vec gc = c.gradient(x);
        vec::axpy(g, 1.0, gc);
    }
    return g;
}

namespace {

double pg_residual(const CostAggregate& agg, const Domain& domain, const Vec& x, double step_l) {
    Vec g = agg.gradient(x);
    Vec moved = x;
    vec::axpy(moved, -1.0 / step_l, g);
    Vec projected = domain.project(std::move(moved));
    return step_l * vec::dist(x, projected);
}

SolveReport solve_closed_form(const CostAggregate& agg, const Domain& domain) {
    const QuadraticCost& q = agg.summed_quadratic();
    Vec x = domain.project(q.minimizer());
    SolveReport report;
    report.method = SolveMethod::closed_form_quadratic;
    report.minimizer = ParameterPoint(std::move(x));
    report.value = q.value(report.minimizer.coords);
    report.inner_iterations = 0;
    const double l = std::max(agg.total_smoothness(), agg.total_strong_convexity());
    report.gradient_norm = pg_residual(agg, domain, report.minimizer.coords, l);
    return report;
}

SolveReport solve_projected_gradient(const CostAggregate& agg, const Domain& domain,
                                     const ParameterPoint& warm_start, const SolveOptions& opt) {
    const double l = std::max(agg.total_smoothness(), agg.total_strong_convexity());
    Vec x = domain.project(warm_start.coords);
    SolveReport report;
    report.method = SolveMethod::projected_gradient;
    long iters = 0;
    double residual = pg_residual(agg, domain, x, l);
    while (residual > opt.tol_inner) {
        if (iters >= opt.max_inner_iterations)
            throw std::runtime_error("ftl_step: projected gradient exceeded the iteration budget");
        Vec g = agg.gradient(x);
        vec::axpy(x, -1.0 / l, g);
        x = domain.project(std::move(x));
        residual = pg_residual(agg, domain, x, l);
        ++iters;
    }
    report.inner_iterations = iters;
    report.gradient_norm = residual;
    report.value = agg.value(x);
    report.minimizer = ParameterPoint(std::move(x));
    return report;
}

}  // namespace

SolveReport ftl_step(const CostAggregate& aggregate, const Domain& domain,
                     const ParameterPoint& warm_start, const SolveOptions& options) {
    if (aggregate.empty()) throw std::invalid_argument("ftl_step: empty aggregate");
    require_dimension(domain.dimension, warm_start.dim(), "ftl_step(warm_start)");
    if (!std::isfinite(aggregate.value(warm_start.coords)))
        throw std::runtime_error("ftl_step: aggregate is non-finite at the warm start");

    const SolveMethod method =
        options.force_method.value_or(aggregate.all_quadratic()
                                          ? SolveMethod::closed_form_quadratic
                                          : SolveMethod::projected_gradient);
    if (method == SolveMethod::closed_form_quadratic) return solve_closed_form(aggregate, domain);
    return solve_projected_gradient(aggregate, domain, warm_start, options);
}

SolveReport ftl_step(const CostAggregate& aggregate, const Domain& domain,
                     const ParameterPoint& warm_start, double tol_inner) {
    SolveOptions opt;
    opt.tol_inner = tol_inner;
    return ftl_step(aggregate, domain, warm_start, opt);
}

double regret(const std::vector<PerRoundCost>& trace_costs,
              const std::vector<ParameterPoint>& iterates, const Domain& domain) {
    if (trace_costs.size() != iterates.size())
        throw std::invalid_argument("regret: costs and iterates must have equal length, got " +
                                    std::to_string(trace_costs.size()) + " vs " +
                                    std::to_string(iterates.size()));
    if (trace_costs.empty()) throw std::invalid_argument("regret: empty trace");

    const auto n = static_cast<double>(trace_costs.size());
    double played = 0.0;
    CostAggregate agg;
    for (std::size_t i = 0; i < trace_costs.size(); ++i) {
        played += trace_costs[i].value(iterates[i].coords);
        agg.add(trace_costs[i]);
    }
    const SolveReport best = ftl_step(agg, domain, iterates.back(), 1e-12);
    return (played - best.value) / n;
}

}  // namespace valagg
