#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "valagg/constants.hpp"
#include "valagg/cost.hpp"
#include "valagg/domain.hpp"

namespace valagg {

/// Two-argument objective F(y, x): y fixes the data distribution, x is the
/// decision. Instances are immutable after construction and safe to evaluate
/// from multiple threads.
///
/// The run domain may be unbounded; the reference box is a bounded region
/// the instance declares, over which the value-Lipschitz constant g2 (and
/// every bound evaluation that needs it) is taken.
class ProblemInstance {
public:
    virtual ~ProblemInstance() = default;

    virtual std::size_t dimension() const = 0;
    virtual const Domain& domain() const = 0;
    virtual const Domain& reference_box() const = 0;
    virtual const StructuralConstants& constants() const = 0;

    /// Planning horizon of the underlying control problem (1 for purely
    /// synthetic families). Drives the mixing contraction exponent.
    virtual long horizon() const { return 1; }

    virtual double value(const Vec& y, const Vec& x) const = 0;
    virtual Vec grad_x(const Vec& y, const Vec& x) const = 0;

    /// Canonical quadratic form of x ↦ F(y, x) when available.
    virtual std::optional<QuadraticCost> quadratic_cost(const Vec&) const { return std::nullopt; }

    /// Upper bound on the quadratic curvature of x ↦ F(y, x) over the
    /// reference box (used to budget almost-sure gradient bounds of
    /// sampled costs).
    virtual double curvature_bound() const { return constants().alpha; }

    /// sup |F(y, x)| over the reference box.
    virtual double value_bound() const = 0;

    /// Parameter of the demonstrating policy, when the family defines one.
    virtual std::optional<Vec> expert_parameter() const { return std::nullopt; }

    virtual bool supports_mixing() const { return false; }

    /// Problem with the first argument generated by per-step mixing with the
    /// expert at rate q. Throws std::runtime_error when unsupported.
    virtual std::shared_ptr<const ProblemInstance> mixed(double q) const;

    virtual bool supports_sampling() const { return false; }

    /// Finite-sample surrogate (1/count)·Σ f(·; ω_k) frozen at the anchor,
    /// reproducible for a given seed. Throws when the instance has no sampler.
    virtual PerRoundCost sample_cost(const Vec& anchor, long count, std::uint64_t seed) const;

    /// One-line configuration echo, e.g. "counterexample(theta=0.5)".
    virtual std::string describe() const = 0;
};

using InstancePtr = std::shared_ptr<const ProblemInstance>;

/// F(y, x) with dimension/finiteness checks.
double evaluate_objective(const ProblemInstance& inst, const ParameterPoint& y,
                          const ParameterPoint& x);

/// Gradient of F(y, ·) at x, same checks as evaluate_objective.
Vec objective_gradient(const ProblemInstance& inst, const ParameterPoint& y,
                       const ParameterPoint& x);

/// Freezes the exact per-round cost F(anchor, ·). sample_count = 0.
PerRoundCost freeze_cost(const InstancePtr& inst, const ParameterPoint& anchor);

/// Additive decision-space regularizer with a declared strong convexity.
struct Regularizer {
    std::string name;
    double strong_convexity = 0.0;
    bool nonneg = true;  // whether R >= 0 is guaranteed
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::optional<QuadraticCost> quadratic;
    double grad_bound = 0.0;  // sup ‖∇R‖ over the instance reference box

    /// R(x) = (strong_convexity / 2)·‖x‖².
    static Regularizer quadratic_centered(double strong_convexity, const Domain& reference_box);

    /// R(x) = F(expert, x); not guaranteed nonnegative for arbitrary
    /// objectives, hence nonneg = false.
    static Regularizer expert_anchored(const InstancePtr& base);
};

}  // namespace valagg
