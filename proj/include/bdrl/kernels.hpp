#pragma once

// Data-parallel inner loops over birth-death kernels.
//
// Each kernel has a scalar reference implementation and an AVX2 variant.
// The stencils evaluate the same products and sums in the same order in
// both variants, so their results are bit-identical; reductions (l1_distance)
// agree only up to rounding. The active variant is chosen once at startup
// from the CPU features and can be overridden for testing.

#include <span>

namespace bdrl::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Throws std::invalid_argument if the requested variant is not available on this CPU.
void set_isa(Isa isa);

/// Read-only view of a tridiagonal stochastic kernel (see BirthDeathKernel).
struct TridiagonalView {
    std::span<const double> down;
    std::span<const double> stay;
    std::span<const double> up;
};

/// out = in * P  (row vector times kernel): distribution propagation.
void propagate_left(TridiagonalView p, std::span<const double> in, std::span<double> out);
/// out = P * in  (kernel times column vector): expected next value.
void apply_right(TridiagonalView p, std::span<const double> in, std::span<double> out);
/// sum_i |a_i - b_i|
double l1_distance(std::span<const double> a, std::span<const double> b);

namespace scalar {
void propagate_left(TridiagonalView p, std::span<const double> in, std::span<double> out);
void apply_right(TridiagonalView p, std::span<const double> in, std::span<double> out);
double l1_distance(std::span<const double> a, std::span<const double> b);
} // namespace scalar

namespace avx2 {
void propagate_left(TridiagonalView p, std::span<const double> in, std::span<double> out);
void apply_right(TridiagonalView p, std::span<const double> in, std::span<double> out);
double l1_distance(std::span<const double> a, std::span<const double> b);
} // namespace avx2

} // namespace bdrl::kernels
