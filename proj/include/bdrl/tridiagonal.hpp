#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace bdrl {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Thomas elimination for a tridiagonal system
 *   sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i].
 * sub[0] and sup[n-1] are ignored. No pivoting: intended for the
 * (irreducibly) diagonally dominant systems of birth-death chains.
 * Throws SolveError on a zero pivot.
 */
std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs);

} // namespace bdrl
