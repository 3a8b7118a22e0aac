#include "valagg/cost.hpp"

#include <stdexcept>

namespace valagg {

PerRoundCost PerRoundCost::from_quadratic(ParameterPoint anchor, QuadraticCost q, long samples) {
    if (!(q.curvature > 0.0))
        throw std::invalid_argument("PerRoundCost: quadratic curvature must be > 0");
    PerRoundCost cost;
    cost.anchor = std::move(anchor);
    cost.quadratic = q;
    cost.value = [q](const Vec& x) { return q.value(x); };
    cost.gradient = [q](const Vec& x) { return q.gradient(x); };
    cost.strong_convexity = q.curvature;
    cost.grad_smoothness = q.curvature;
    cost.sample_count = samples;
    return cost;
}

}  // namespace valagg
