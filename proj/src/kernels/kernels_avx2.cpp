#include "bdrl/kernels.hpp"

#include <cmath>
#include <cstddef>

#if defined(__x86_64__) || defined(__i386__)
#define BDRL_HAVE_X86 1
#include <immintrin.h>
#else
#define BDRL_HAVE_X86 0
#endif

namespace bdrl::kernels::avx2 {

#if BDRL_HAVE_X86

__attribute__((target("avx2"))) void propagate_left(TridiagonalView p, std::span<const double> in,
                                                    std::span<double> out) {
    const std::size_t n = in.size();
    if (n < 6) {
        scalar::propagate_left(p, in, out);
        return;
    }
    out[0] = in[0] * p.stay[0] + in[1] * p.down[1];

    const double* x = in.data();
    const double* dn = p.down.data();
    const double* st = p.stay.data();
    const double* upp = p.up.data();
    std::size_t j = 1;
    for (; j + 4 < n; j += 4) {
        const __m256d left = _mm256_mul_pd(_mm256_loadu_pd(x + j - 1), _mm256_loadu_pd(upp + j - 1));
        const __m256d self = _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(st + j));
        const __m256d right = _mm256_mul_pd(_mm256_loadu_pd(x + j + 1), _mm256_loadu_pd(dn + j + 1));
        _mm256_storeu_pd(out.data() + j, _mm256_add_pd(_mm256_add_pd(left, self), right));
    }
    for (; j + 1 < n; ++j) out[j] = (x[j - 1] * upp[j - 1] + x[j] * st[j]) + x[j + 1] * dn[j + 1];

    out[n - 1] = in[n - 2] * p.up[n - 2] + in[n - 1] * p.stay[n - 1];
}

__attribute__((target("avx2"))) void apply_right(TridiagonalView p, std::span<const double> in,
                                                 std::span<double> out) {
    const std::size_t n = in.size();
    if (n < 6) {
        scalar::apply_right(p, in, out);
        return;
    }
    out[0] = p.stay[0] * in[0] + p.up[0] * in[1];

    const double* x = in.data();
    const double* dn = p.down.data();
    const double* st = p.stay.data();
    const double* upp = p.up.data();
    std::size_t i = 1;
    for (; i + 4 < n; i += 4) {
        const __m256d left = _mm256_mul_pd(_mm256_loadu_pd(dn + i), _mm256_loadu_pd(x + i - 1));
        const __m256d self = _mm256_mul_pd(_mm256_loadu_pd(st + i), _mm256_loadu_pd(x + i));
        const __m256d right = _mm256_mul_pd(_mm256_loadu_pd(upp + i), _mm256_loadu_pd(x + i + 1));
        _mm256_storeu_pd(out.data() + i, _mm256_add_pd(_mm256_add_pd(left, self), right));
    }
    for (; i + 1 < n; ++i) out[i] = (dn[i] * x[i - 1] + st[i] * x[i]) + upp[i] * x[i + 1];

    out[n - 1] = p.down[n - 1] * in[n - 2] + p.stay[n - 1] * in[n - 1];
}

__attribute__((target("avx2"))) double l1_distance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) sum += std::abs(a[i] - b[i]);
    return sum;
}

#else

void propagate_left(TridiagonalView p, std::span<const double> in, std::span<double> out) {
    scalar::propagate_left(p, in, out);
}
void apply_right(TridiagonalView p, std::span<const double> in, std::span<double> out) {
    scalar::apply_right(p, in, out);
}
double l1_distance(std::span<const double> a, std::span<const double> b) { return scalar::l1_distance(a, b); }

#endif

} // namespace bdrl::kernels::avx2
