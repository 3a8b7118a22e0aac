#include "valagg/vec.hpp"

#include <algorithm>

#include "valagg/rng.hpp"

namespace valagg {

double operator_norm(const Matrix& m, double tol, int restarts) {
    if (!m.square() || m.rows == 0) throw std::invalid_argument("operator_norm: matrix must be square and nonempty");
    const std::size_t d = m.rows;
    double best = 0.0;
    Rng rng(0x9buLL);
    for (int r = 0; r < restarts; ++r) {
        Vec v(d);
        for (auto& vi : v) vi = rng.uniform(-1.0, 1.0);
        double nv = vec::norm(v);
        if (nv == 0.0) continue;
        for (auto& vi : v) vi /= nv;
        double lambda = 0.0;
        for (int it = 0; it < 100000; ++it) {
            Vec w = m.apply_transpose(m.apply(v));
            double next = vec::dot(v, w);
            double nw = vec::norm(w);
            if (nw == 0.0) {
                lambda = 0.0;
                break;
            }
            for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / nw;
            if (std::fabs(next - lambda) <= tol * std::max(1.0, std::fabs(next))) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        best = std::max(best, lambda);
    }
    return std::sqrt(std::max(0.0, best));
}

Vec solve_linear(Matrix a, Vec rhs) {
    if (!a.square() || a.rows != rhs.size()) throw std::invalid_argument("solve_linear: shape mismatch");
    const std::size_t n = a.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
        if (std::fabs(a.at(pivot, col)) < 1e-14) throw std::runtime_error("solve_linear: singular matrix");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a.at(pivot, c), a.at(col, c));
            std::swap(rhs[pivot], rhs[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) / a.at(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
            rhs[r] -= f * rhs[col];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a.at(i, c) * x[c];
        x[i] = s / a.at(i, i);
    }
    return x;
}

}  // namespace valagg
