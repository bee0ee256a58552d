#include "bdrl/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace bdrl::kernels::scalar {

// Edge entries drop the missing neighbour instead of multiplying by zero;
// the AVX2 variant uses the same edge code.

void propagate_left(TridiagonalView p, std::span<const double> in, std::span<double> out) {
    const std::size_t n = in.size();
    if (n == 1) {
        out[0] = in[0] * p.stay[0];
        return;
    }
    out[0] = in[0] * p.stay[0] + in[1] * p.down[1];
    for (std::size_t j = 1; j + 1 < n; ++j)
        out[j] = (in[j - 1] * p.up[j - 1] + in[j] * p.stay[j]) + in[j + 1] * p.down[j + 1];
    out[n - 1] = in[n - 2] * p.up[n - 2] + in[n - 1] * p.stay[n - 1];
}

void apply_right(TridiagonalView p, std::span<const double> in, std::span<double> out) {
    const std::size_t n = in.size();
    if (n == 1) {
        out[0] = p.stay[0] * in[0];
        return;
    }
    out[0] = p.stay[0] * in[0] + p.up[0] * in[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (p.down[i] * in[i - 1] + p.stay[i] * in[i]) + p.up[i] * in[i + 1];
    out[n - 1] = p.down[n - 1] * in[n - 2] + p.stay[n - 1] * in[n - 1];
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum;
}

} // namespace bdrl::kernels::scalar
