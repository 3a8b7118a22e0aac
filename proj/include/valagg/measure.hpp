#pragma once

#include <cstdint>

#include "valagg/problem.hpp"

namespace valagg {

/// Empirically estimates the structural constants of an instance over a
/// bounded probe box:
///   beta  — supremum over sampled triples of ‖∇ₓF(y,z) − ∇ₓF(y',z)‖ / ‖y−y'‖
///   g2    — supremum over sampled pairs of ‖∇ₓF(z,x)‖
///   alpha — minimum sampled curvature of x ↦ F(y, x) along random segments
///   eps_tilde — maximum over sampled y of min_x F(y, x)
/// Sampled suprema underestimate declared moduli; bound checks always prefer
/// declared constants when the instance has them in closed form.
/// Requires a bounded box and probes >= 2; reproducible for a given seed.
StructuralConstants measure_constants(const ProblemInstance& inst, const Domain& box, int probes,
                                      std::uint64_t seed);

}  // namespace valagg
