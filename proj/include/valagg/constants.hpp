#pragma once

namespace valagg {

/// Structural constants of a two-argument objective F(y, x):
///   alpha     — strong-convexity modulus of F in the decision argument x
///   beta      — Lipschitz modulus of the x-gradient with respect to the
///               distribution argument y
///   g2        — value-Lipschitz modulus of F in x over the reference box
///   eps_tilde — local approximation floor sup_y min_x F(y, x)
///   theta     — stability ratio beta / alpha; the sequence generated by
///               follow-the-leader contracts iff theta < 1
struct StructuralConstants {
    double alpha = 0.0;
    double beta = 0.0;
    double g2 = 0.0;
    double eps_tilde = 0.0;
    double theta = 0.0;

    /// Builds a validated set; theta is derived as beta / alpha.
    static StructuralConstants make(double alpha, double beta, double g2, double eps_tilde);

    /// Enforces alpha > 0, g2 > 0, beta >= 0 and theta == beta / alpha.
    void validate() const;

    bool operator==(const StructuralConstants&) const = default;
};

}  // namespace valagg
