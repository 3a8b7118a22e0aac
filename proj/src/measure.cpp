#include "valagg/measure.hpp"

#include <algorithm>
#include <stdexcept>

#include "valagg/ftl.hpp"
#include "valagg/rng.hpp"

namespace valagg {

namespace {

// min_x F(y, x) over the instance domain; closed form when the cost is
// quadratic, projected gradient otherwise.
double inner_minimum(const ProblemInstance& inst, const Vec& y) {
    PerRoundCost cost;
    if (auto q = inst.quadratic_cost(y)) {
        cost = PerRoundCost::from_quadratic(ParameterPoint(y), *q, 0);
    } else {
        cost.anchor = ParameterPoint(y);
        cost.value = [&inst, y](const Vec& x) { return inst.value(y, x); };
        cost.gradient = [&inst, y](const Vec& x) { return inst.grad_x(y, x); };
        cost.strong_convexity = inst.constants().alpha;
        cost.grad_smoothness = inst.curvature_bound();
    }
    CostAggregate agg;
    agg.add(std::move(cost));
    return ftl_step(agg, inst.domain(), ParameterPoint(y), 1e-12).value;
}

}  // namespace

StructuralConstants measure_constants(const ProblemInstance& inst, const Domain& box, int probes,
                                      std::uint64_t seed) {
    if (!box.is_bounded())
        throw std::invalid_argument("measure_constants: measurement requires a finite reference box");
    if (probes < 2) throw std::invalid_argument("measure_constants: probes must be >= 2");
    require_dimension(inst.dimension(), box.dimension, "measure_constants(box)");

    Rng rng(seed);
    double beta_sup = 0.0;
    double g2_sup = 0.0;
    double alpha_inf = std::numeric_limits<double>::infinity();

    // Difference quotients on very short segments are dominated by rounding;
    // probes below these separations are skipped.
    const double min_sep = 1e-3;
    for (int p = 0; p < probes; ++p) {
        const Vec y1 = rng.uniform_in_box(box.lower, box.upper);
        const Vec y2 = rng.uniform_in_box(box.lower, box.upper);
        const Vec z = rng.uniform_in_box(box.lower, box.upper);
        const double dy = vec::dist(y1, y2);
        if (dy > min_sep) {
            const double quot = vec::dist(inst.grad_x(y1, z), inst.grad_x(y2, z)) / dy;
            beta_sup = std::max(beta_sup, quot);
        }

        const Vec x = rng.uniform_in_box(box.lower, box.upper);
        g2_sup = std::max(g2_sup, vec::norm(inst.grad_x(z, x)));

        const Vec x1 = rng.uniform_in_box(box.lower, box.upper);
        const Vec x2 = rng.uniform_in_box(box.lower, box.upper);
        const double dx2 = vec::dot(vec::sub(x2, x1), vec::sub(x2, x1));
        if (dx2 > min_sep * min_sep) {
            const double gap = inst.value(z, x2) - inst.value(z, x1) -
                               vec::dot(inst.grad_x(z, x1), vec::sub(x2, x1));
            alpha_inf = std::min(alpha_inf, 2.0 * gap / dx2);
        }
    }

    double eps_sup = -std::numeric_limits<double>::infinity();
    const int eps_probes = std::min(probes, 50);
    for (int p = 0; p < eps_probes; ++p) {
        const Vec y = rng.uniform_in_box(box.lower, box.upper);
        eps_sup = std::max(eps_sup, inner_minimum(inst, y));
    }

    if (!(alpha_inf > 0.0) || !std::isfinite(alpha_inf))
        throw std::runtime_error("measure_constants: no positive curvature observed");
    if (!(g2_sup > 0.0)) g2_sup = std::numeric_limits<double>::min();
    return StructuralConstants::make(alpha_inf, beta_sup, g2_sup, eps_sup);
}

}  // namespace valagg
