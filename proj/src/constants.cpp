#include "valagg/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace valagg {

StructuralConstants StructuralConstants::make(double alpha, double beta, double g2,
                                              double eps_tilde) {
    StructuralConstants c;
    c.alpha = alpha;
    c.beta = beta;
    c.g2 = g2;
    c.eps_tilde = eps_tilde;
    c.theta = beta / alpha;
    c.validate();
    return c;
}

void StructuralConstants::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("StructuralConstants: alpha must be > 0");
    if (!(g2 > 0.0)) throw std::invalid_argument("StructuralConstants: g2 must be > 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("StructuralConstants: beta must be >= 0");
    if (!std::isfinite(eps_tilde))
        throw std::invalid_argument("StructuralConstants: eps_tilde must be finite");
    if (theta != beta / alpha)
        throw std::invalid_argument("StructuralConstants: theta must equal beta / alpha");
}

}  // namespace valagg
