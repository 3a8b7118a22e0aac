#pragma once

#include <functional>
#include <optional>

#include "valagg/domain.hpp"

namespace valagg {

/// Spherical quadratic q(x) = (curvature/2)·‖x‖² + ⟨linear, x⟩ + offset.
/// Every built-in per-round cost has this canonical form, which keeps the
/// follow-the-leader subproblem solvable in closed form (the curvature is a
/// scalar, so box-constrained minimization is coordinate-wise clamping).
struct QuadraticCost {
    double curvature = 0.0;
    Vec linear;
    double offset = 0.0;

    double value(const Vec& x) const {
        return 0.5 * curvature * vec::dot(x, x) + vec::dot(linear, x) + offset;
    }

    Vec gradient(const Vec& x) const {
        Vec g = linear;
        vec::axpy(g, curvature, x);
        return g;
    }

    // true division keeps exactly representable minimizers exact
    Vec minimizer() const {
        Vec m(linear.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = -linear[i] / curvature;
        return m;
    }

    QuadraticCost& operator+=(const QuadraticCost& o) {
        if (linear.empty()) linear.assign(o.linear.size(), 0.0);
        curvature += o.curvature;
        offset += o.offset;
        vec::axpy(linear, 1.0, o.linear);
        return *this;
    }

    /// (curvature/2)·‖x − target‖² + extra_offset, expanded.
    static QuadraticCost from_target(double curvature, const Vec& target, double extra_offset) {
        QuadraticCost q;
        q.curvature = curvature;
        q.linear = vec::scaled(target, -curvature);
        q.offset = 0.5 * curvature * vec::dot(target, target) + extra_offset;
        return q;
    }
};

/// One frozen per-round cost f_n(·) = F(anchor, ·), or its finite-sample
/// surrogate. The evaluator is deterministic once constructed: stochastic
/// sampling happens at construction, not at evaluation.
struct PerRoundCost {
    ParameterPoint anchor;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::optional<QuadraticCost> quadratic;
    double strong_convexity = 0.0;
    double grad_smoothness = 0.0;  // Lipschitz modulus of the gradient (step size 1/L)
    long sample_count = 0;         // 0 for exact costs, m_n for sampled surrogates

    static PerRoundCost from_quadratic(ParameterPoint anchor, QuadraticCost q, long samples = 0);
};

}  // namespace valagg
