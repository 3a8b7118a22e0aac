#pragma once

#include "valagg/problem.hpp"

namespace valagg {

/// Two-stage control family with F(y, x) = (x − θy)², the smallest problem
/// exhibiting the full stability dichotomy: follow-the-leader contracts for
/// θ < 1 and diverges for θ > 1. Closed-form constants: alpha = 2,
/// beta = 2θ, eps_tilde = 0. The accumulated-cost index is
/// J(x) = (θ−1)²·x².
struct CounterexampleSpec {
    double theta = 0.5;
    double reference_radius = 2.0;
};

InstancePtr make_counterexample(const CounterexampleSpec& spec);

/// Reads back the accumulated-cost index J(x) = (θ−1)²x² of a counterexample
/// instance; throws for other instance kinds.
double counterexample_performance_index(const ProblemInstance& inst, double x);

/// Multidimensional affine-target family
///   F(y, x) = (alpha/2)·‖x − My − b‖² + offset,
/// with beta = alpha·‖M‖_op, theta = ‖M‖_op, eps_tilde = offset.
struct AffineQuadraticSpec {
    Matrix M;
    Vec b;
    double alpha = 2.0;
    double offset = 0.0;
    double reference_radius = 2.0;
};

InstancePtr make_affine_quadratic(const AffineQuadraticSpec& spec);

/// Scalar linear-dynamics imitation problem. The state second moment under
/// gain y propagates as m_{t+1} = (a + action_gain·y)²·m_t from
/// m_0 = sigma0_sq, and the squared action-matching loss gives
///   F(y, x) = Σ_{t<T} m_t(y)·(x − expert_gain)².
/// The expert gain is uniformly optimal (eps_tilde = 0); distribution shift
/// enters only through the moment weights. Mixing support propagates the
/// q-blended moments m_{t+1} = [q·ρ* + (1−q)·ρ(y)]·m_t.
struct LinearImitationSpec {
    double a = 0.0;            // open-loop state gain
    double action_gain = 1.0;  // gain multiplying the action in the dynamics
    double expert_gain = 0.0;  // feedback gain of the demonstrating policy
    double sigma0_sq = 1.0;    // initial state second moment
    long horizon = 2;
    double gain_lo = -1.0;  // bounded interval for the policy gain
    double gain_hi = 1.0;
};

InstancePtr make_linear_imitation(const LinearImitationSpec& spec);

enum class NoiseKind { uniform, scaled_bernoulli, gaussian };

/// Stochastic view of a base instance: sampled costs shift the target of the
/// canonical quadratic by zero-mean noise, so E_ω[f(x; ω)] = F(y, x) up to a
/// constant in x and each sample keeps the base strong convexity.
/// uniform(σ) draws from [−σ, σ]; scaled_bernoulli(σ) draws ±σ. Both are
/// bounded almost surely; gaussian is available only behind allow_unbounded
/// and is excluded from bound-checked runs.
struct StochasticWrapperSpec {
    InstancePtr base;
    NoiseKind noise = NoiseKind::uniform;
    double sigma = 1.0;
    bool allow_unbounded = false;
};

InstancePtr make_stochastic(const StochasticWrapperSpec& spec);

/// Finite-sample cost g = (1/count)·Σ f(·; ω_k) at the anchor.
/// Errors on non-stochastic instances or count < 1.
PerRoundCost sample_cost(const InstancePtr& inst, const ParameterPoint& anchor, long count,
                         std::uint64_t seed);

}  // namespace valagg
