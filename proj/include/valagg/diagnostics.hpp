#pragma once

#include <set>
#include <string>
#include <vector>

#include "valagg/loop.hpp"

namespace valagg {

/// Concentration statistic S_n = (Σ_{k<n} ‖x_n − x_k‖) / (n − 1), n >= 2:
/// the average distance from the n-th iterate to all earlier ones.
double compute_s(const std::vector<ParameterPoint>& iterates, std::size_t n);

/// Windowed variant S_{m:n} = (Σ_{k=m}^{n-1} ‖x_n − x_k‖) / (n − m);
/// compute_s_window(it, 1, n) == compute_s(it, n).
double compute_s_window(const std::vector<ParameterPoint>& iterates, std::size_t m, std::size_t n);

enum class BoundId {
    thm1,        // best policy <= average per-round cost <= batch floor + regret
    thm2,        // terminal bound: F(x_N,x_N) <= eps + (θ e^{1-θ} G2)²/(2α) · N^{2(θ-1)}
    thm3_lower,  // divergence witness: self-performance nondecreasing and Ω(n^{2(θ-1)})
    lemma3,      // step contraction: ‖x_{n+1} − x_n‖ <= θ·S_n / n
    prop2,       // concentration decay: S_n <= e^{1-θ} n^{θ-1} S_2 and S_2 <= G2/α
    corollary1,  // windowed concentration: slope-consistency of S_{m:n}
    corollary2,  // mixed-run bound: F <= Δ_N + eps + 2M·min(1, Tq)
    corollary3   // weighted-run bound: F <= (1+λ)(eps + Δ_N)
};

std::string bound_id_name(BoundId id);
std::optional<BoundId> bound_id_from_name(const std::string& name);

/// Outcome of evaluating one inequality along a trace. Margins are rhs − lhs
/// per evaluation point; passed means every margin >= −1e-9·scale, where
/// scale = max(1, |lhs|, |rhs|). Fit-based checks are labeled asymptotic.
struct BoundCheckRecord {
    BoundId bound_id;
    std::vector<double> per_iterate_margin;
    bool passed = false;
    bool asymptotic = false;
    StructuralConstants constants_used;
    std::string note;

    double worst_margin() const;
};

/// Evaluates the requested inequalities along a trace with the given
/// constants. lemma3/prop2 run at every applicable n; thm1/thm2 at N;
/// corollary1 on a grid of (m, n) windows with a fitted constant;
/// corollary2/3 need the trace's transform echo. Errors name missing
/// constants or preconditions (e.g. aborted traces for thm1/thm2/prop2).
std::vector<BoundCheckRecord> check_bounds(const RunTrace& trace,
                                           const StructuralConstants& constants,
                                           const std::set<BoundId>& which);

/// Least-squares power-law fit of the excess self-performance.
struct RateFit {
    double fitted_exponent = 0.0;
    double theoretical_exponent = 0.0;  // 2(θ − 1)
    double r_squared = 0.0;
    std::size_t n_min = 0;
    std::size_t n_max = 0;
    double offset_used = 0.0;  // the eps_tilde subtracted before taking logs
    std::size_t points_used = 0;
};

/// Fits log(F(x_n,x_n) − eps_tilde) against log n on a 25-point geometric
/// grid inside the window, using only points whose excess exceeds 1e-14.
/// Fitting is on the untransformed self-performance, so regularized runs
/// report the decay of the quantity the transformation is meant to control.
/// Throws when fewer than 5 usable points remain (sequence already at its
/// floor).
RateFit fit_rate(const RunTrace& trace, double eps_tilde,
                 std::pair<std::size_t, std::size_t> window);

/// Default fit window (max(10, N/100), N).
std::pair<std::size_t, std::size_t> default_fit_window(std::size_t rounds);

}  // namespace valagg
