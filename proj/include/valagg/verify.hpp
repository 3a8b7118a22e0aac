#pragma once

#include <string>
#include <vector>

namespace valagg {

struct VerifyOptions {
    /// Substring filter on check ids; empty runs everything.
    std::string only;
    /// Test hook: scales the declared beta (hence theta) fed into the
    /// inequality checks. Deflating it (< 1.0) must make the step-contraction
    /// checks fail, since those hold with equality on the counterexample.
    double theta_scale = 1.0;
};

struct VerifyCheck {
    std::string id;
    bool passed = false;
    double margin = 0.0;
    std::string detail;
};

/// Runs the full verification suite (paper-iterate reproduction, rate
/// exponents, divergence, the inequality suite, regularization and mixing
/// stabilization, stochastic scaling, numerical hygiene, mean-policy bounds)
/// and returns one record per check, filtered by options.only.
std::vector<VerifyCheck> run_verification(const VerifyOptions& options);

/// Prints one pass/fail line per check with its margin.
/// Returns 0 when every check passed, 4 otherwise.
int run_verify_command(const VerifyOptions& options);

}  // namespace valagg
