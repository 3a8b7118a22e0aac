#pragma once

#include <vector>

#include "valagg/cost.hpp"
#include "valagg/domain.hpp"

namespace valagg {

/// Running sum f_{1:n} of per-round costs. Immutable once built up; keeps the
/// summed canonical quadratic incrementally so a follow-the-leader step stays
/// O(d) when every member cost is quadratic.
class CostAggregate {
public:
    /// Rejects costs without positive strong convexity.
    void add(PerRoundCost cost);

    const std::vector<PerRoundCost>& costs() const { return costs_; }
    std::size_t size() const { return costs_.size(); }
    bool empty() const { return costs_.empty(); }

    double total_strong_convexity() const { return strong_convexity_; }
    double total_smoothness() const { return smoothness_; }
    bool all_quadratic() const { return all_quadratic_; }

    /// Canonical form of the whole sum; only valid when all_quadratic().
    const QuadraticCost& summed_quadratic() const;

    /// Member-sum evaluation (used by the iterative solver and invariants).
    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;

private:
    std::vector<PerRoundCost> costs_;
    QuadraticCost quad_sum_;
    bool all_quadratic_ = true;
    double strong_convexity_ = 0.0;
    double smoothness_ = 0.0;
};

enum class SolveMethod { closed_form_quadratic, projected_gradient };

struct SolveReport {
    ParameterPoint minimizer;
    double value = 0.0;
    long inner_iterations = 0;
    /// Projected-gradient residual at the solution (plain gradient norm on
    /// unconstrained domains); at most tol_inner.
    double gradient_norm = 0.0;
    SolveMethod method = SolveMethod::closed_form_quadratic;
};

struct SolveOptions {
    double tol_inner = 1e-10;
    std::optional<SolveMethod> force_method;  // tests force the iterative path
    long max_inner_iterations = 50'000'000;
};

/// Solves x_{n+1} = argmin_{x in domain} f_{1:n}(x).
///
/// All-quadratic aggregates use the exact closed form (the spherical
/// curvature makes the box projection of the unconstrained minimizer exact);
/// anything else runs projected gradient with step 1/L until the residual
/// drops below tol_inner.
SolveReport ftl_step(const CostAggregate& aggregate, const Domain& domain,
                     const ParameterPoint& warm_start, const SolveOptions& options);

SolveReport ftl_step(const CostAggregate& aggregate, const Domain& domain,
                     const ParameterPoint& warm_start, double tol_inner = 1e-10);

/// Average regret (1/N)·[Σ f_n(x_n) − min_x f_{1:N}(x)]; nonnegative up to
/// solver tolerance because each x_n is chosen before f_n is revealed.
double regret(const std::vector<PerRoundCost>& trace_costs,
              const std::vector<ParameterPoint>& iterates, const Domain& domain);

}  // namespace valagg
