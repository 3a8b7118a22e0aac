#include "valagg/domain.hpp"

#include <stdexcept>

namespace valagg {

Domain Domain::box(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("Domain::box: bound vectors must be nonempty and equally sized");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (std::isnan(lower[i]) || std::isnan(upper[i]))
            throw std::invalid_argument("Domain::box: NaN bound");
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("Domain::box: requires lower < upper in every coordinate");
    }
    Domain d;
    d.dimension = lower.size();
    d.lower = std::move(lower);
    d.upper = std::move(upper);
    return d;
}

Domain Domain::centered_box(std::size_t d, double radius) {
    return box(Vec(d, -radius), Vec(d, radius));
}

ParameterPoint::ParameterPoint(Vec c) : coords(std::move(c)) {
    if (coords.empty()) throw std::invalid_argument("ParameterPoint: dimension must be >= 1");
    if (!vec::all_finite(coords))
        throw std::invalid_argument("ParameterPoint: coordinates must be finite");
}

void require_dimension(std::size_t expected, std::size_t actual, const std::string& what) {
    if (expected != actual)
        throw std::invalid_argument(what + ": dimension mismatch: expected " +
                                    std::to_string(expected) + ", got " + std::to_string(actual));
}

}  // namespace valagg
