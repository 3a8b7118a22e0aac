#include "valagg/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace valagg {

std::shared_ptr<const ProblemInstance> ProblemInstance::mixed(double) const {
    throw std::runtime_error(describe() +
                             ": mixing not supported; the instance does not expose a "
                             "mixed-first-argument evaluation");
}

PerRoundCost ProblemInstance::sample_cost(const Vec&, long, std::uint64_t) const {
    throw std::runtime_error(describe() + ": instance does not provide a sampler");
}

double evaluate_objective(const ProblemInstance& inst, const ParameterPoint& y,
                          const ParameterPoint& x) {
    require_dimension(inst.dimension(), y.dim(), "evaluate_objective(y)");
    require_dimension(inst.dimension(), x.dim(), "evaluate_objective(x)");
    const double v = inst.value(y.coords, x.coords);
    if (!std::isfinite(v)) throw std::runtime_error("evaluate_objective: non-finite value");
    return v;
}

Vec objective_gradient(const ProblemInstance& inst, const ParameterPoint& y,
                       const ParameterPoint& x) {
    require_dimension(inst.dimension(), y.dim(), "objective_gradient(y)");
    require_dimension(inst.dimension(), x.dim(), "objective_gradient(x)");
    return inst.grad_x(y.coords, x.coords);
}

PerRoundCost freeze_cost(const InstancePtr& inst, const ParameterPoint& anchor) {
    require_dimension(inst->dimension(), anchor.dim(), "freeze_cost(anchor)");
    if (auto q = inst->quadratic_cost(anchor.coords))
        return PerRoundCost::from_quadratic(anchor, *q, 0);

    // Generic instances without a canonical form: capture shared ownership so
    // the cost outlives the caller's handle.
    PerRoundCost cost;
    cost.anchor = anchor;
    Vec y = anchor.coords;
    cost.value = [inst, y](const Vec& x) { return inst->value(y, x); };
    cost.gradient = [inst, y](const Vec& x) { return inst->grad_x(y, x); };
    cost.strong_convexity = inst->constants().alpha;
    cost.grad_smoothness = inst->curvature_bound();
    cost.sample_count = 0;
    return cost;
}

Regularizer Regularizer::quadratic_centered(double strong_convexity, const Domain& reference_box) {
    if (!(strong_convexity > 0.0))
        throw std::invalid_argument("Regularizer: strong convexity must be > 0");
    Regularizer r;
    r.name = "quadratic";
    r.strong_convexity = strong_convexity;
    r.nonneg = true;
    QuadraticCost quad;
    quad.curvature = strong_convexity;
    quad.linear = vec::zeros(reference_box.dimension);
    quad.offset = 0.0;
    r.quadratic = quad;
    r.value = [quad](const Vec& x) { return quad.value(x); };
    r.gradient = [quad](const Vec& x) { return quad.gradient(x); };
    // sup ‖s·x‖ over the box is attained at the farthest corner
    double corner_sq = 0.0;
    for (std::size_t i = 0; i < reference_box.dimension; ++i) {
        const double m = std::max(std::fabs(reference_box.lower[i]), std::fabs(reference_box.upper[i]));
        corner_sq += m * m;
    }
    r.grad_bound = strong_convexity * std::sqrt(corner_sq);
    return r;
}

Regularizer Regularizer::expert_anchored(const InstancePtr& base) {
    auto expert = base->expert_parameter();
    if (!expert)
        throw std::runtime_error(base->describe() +
                                 ": expert-anchored regularizer requires an expert parameter");
    Regularizer r;
    r.name = "expert";
    r.strong_convexity = base->constants().alpha;
    r.nonneg = false;
    r.quadratic = base->quadratic_cost(*expert);
    Vec y = *expert;
    r.value = [base, y](const Vec& x) { return base->value(y, x); };
    r.gradient = [base, y](const Vec& x) { return base->grad_x(y, x); };
    r.grad_bound = base->constants().g2;
    return r;
}

}  // namespace valagg
