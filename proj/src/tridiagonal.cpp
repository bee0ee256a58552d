#include "bdrl/tridiagonal.hpp"

#include <cmath>

namespace bdrl {

std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    if (n == 0) return {};

    std::vector<double> c(n), d(n);
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw SolveError("solve_tridiagonal: zero pivot at row 0");
    c[0] = n > 1 ? sup[0] / pivot : 0.0;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - sub[i] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot))
            throw SolveError("solve_tridiagonal: zero pivot at row " + std::to_string(i));
        c[i] = i + 1 < n ? sup[i] / pivot : 0.0;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

} // namespace bdrl
