#pragma once

#include <limits>
#include <string>

#include "valagg/vec.hpp"

namespace valagg {

enum class NormKind { euclidean };

/// Convex box decision set with the norm used for all distance computations.
/// Bounds may be infinite; an all-infinite box is the unconstrained domain.
struct Domain {
    std::size_t dimension = 0;
    Vec lower;
    Vec upper;
    NormKind norm_kind = NormKind::euclidean;

    static Domain unbounded(std::size_t d) {
        Domain dom;
        dom.dimension = d;
        dom.lower.assign(d, -std::numeric_limits<double>::infinity());
        dom.upper.assign(d, std::numeric_limits<double>::infinity());
        return dom;
    }

    /// Box domain; requires lower[i] < upper[i] for every coordinate.
    static Domain box(Vec lower, Vec upper);

    /// Symmetric box [-radius, radius]^d.
    static Domain centered_box(std::size_t d, double radius);

    bool is_bounded() const {
        for (std::size_t i = 0; i < dimension; ++i)
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
        return dimension > 0;
    }

    bool contains(const Vec& x, double tol = 0.0) const {
        if (x.size() != dimension) return false;
        for (std::size_t i = 0; i < dimension; ++i)
            if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
        return true;
    }

    Vec project(Vec x) const {
        for (std::size_t i = 0; i < dimension; ++i) {
            if (x[i] < lower[i]) x[i] = lower[i];
            if (x[i] > upper[i]) x[i] = upper[i];
        }
        return x;
    }
};

/// A point in the decision set: the policy parameter vector.
/// Construction rejects NaN/Inf coordinates.
struct ParameterPoint {
    Vec coords;

    ParameterPoint() = default;
    explicit ParameterPoint(Vec c);
    explicit ParameterPoint(double scalar) : ParameterPoint(Vec{scalar}) {}

    std::size_t dim() const { return coords.size(); }
};

/// Throws std::invalid_argument naming expected vs actual dimension.
void require_dimension(std::size_t expected, std::size_t actual, const std::string& what);

}  // namespace valagg
