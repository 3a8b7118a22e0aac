#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "valagg/ftl.hpp"
#include "valagg/problem.hpp"

namespace valagg {

enum class LoopVariant { deterministic, stochastic };

/// Per-round sample budget m_n = ceil(m0 · n^growth_exponent).
struct SamplingSchedule {
    long m0 = 1;
    double growth_exponent = 0.0;  // r >= 0
    std::uint64_t noise_seed = 0;

    long samples_at(long n) const;
};

enum class TransformKind { mixing, weighted_regularization };

/// Cost transformation applied before the aggregation loop runs.
///   mixing: the per-round data distribution is generated by a q-mix with
///     the expert, contracting the effective beta to (1 − q^T)·beta.
///   weighted_regularization: each per-round cost gains λ·R(x), inflating
///     the effective strong convexity to alpha + λ·alpha_R.
struct CostTransformer {
    TransformKind kind = TransformKind::weighted_regularization;
    double mixing_q = 0.0;
    double lambda = 0.0;
    std::optional<Regularizer> regularizer;
    bool r_nonneg = true;
};

/// Echo of the transformation a trace was produced under; consumed by the
/// regularization bound checks.
struct TransformEcho {
    std::string kind;
    double q = 0.0;
    double lambda = 0.0;
    long horizon = 1;
    double value_bound = 0.0;  // sup |F| over the reference box of the base problem
    bool r_nonneg = true;
};

struct LoopConfig {
    long iterations = 1;
    ParameterPoint x1;
    LoopVariant variant = LoopVariant::deterministic;
    std::optional<SamplingSchedule> sampling;    // required for stochastic runs
    std::optional<CostTransformer> transformer;  // applied before the loop
    double tol_inner = 1e-10;
    double abort_magnitude = 1e100;  // divergent runs stop cleanly past this
};

/// Complete history of one aggregation run. All sequences are aligned with
/// the 1-based round index n; step_norms[i] = ‖x_{i+2} − x_{i+1}‖ and
/// s_values[i] = S_{i+2}. Aborted runs keep the analyzable prefix.
struct RunTrace {
    std::vector<ParameterPoint> iterates;
    std::vector<double> per_round_values;  // f_n(x_n), or g_n(x_n) on sampled runs
    std::vector<double> self_values;       // F(x_n, x_n) of the untransformed objective
    std::vector<double> self_values_effective;  // objective actually aggregated
    std::vector<double> step_norms;
    std::vector<double> s_values;  // concentration statistic S_n, n >= 2
    std::size_t best_index = 1;    // 1-based argmin of self_values (ties -> smallest n)
    bool aborted = false;
    std::string abort_reason;
    double batch_min_avg = 0.0;  // min_x of the aggregated costs divided by N
    double regret_avg = 0.0;
    StructuralConstants base_constants;
    StructuralConstants effective_constants;
    std::optional<TransformEcho> transform;

    std::size_t rounds() const { return iterates.size(); }
};

/// Exact aggregation loop: freeze f_n at x_n, append, re-solve.
RunTrace run_deterministic(const InstancePtr& instance, const LoopConfig& config);

/// Sampled aggregation loop: at round n draw m_n seeded samples, freeze the
/// finite-sample surrogate g_n, aggregate g_{1:n}. Trace records both
/// g_n(x_n) and the exact F(x_n, x_n).
RunTrace run_stochastic(const InstancePtr& instance, const LoopConfig& config);

/// Returns the transformed instance with its declared constants updated
/// (weighted: alpha' = alpha + λ·alpha_R, beta unchanged; mixing:
/// beta' = (1 − q^T)·beta). Errors name the missing capability.
InstancePtr apply_transformer(const InstancePtr& instance, const CostTransformer& transformer);

/// Best policy in the sequence: (1-based index, value) of the minimal
/// self-performance F(x_n, x_n); ties resolve to the smallest index.
std::pair<std::size_t, double> select_best(const RunTrace& trace);

}  // namespace valagg
