#include "bdrl/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace bdrl::kernels {

const char* to_string(Isa isa) noexcept {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

namespace {

Isa detect() noexcept {
    // BDRL_ISA=scalar forces the reference kernels
    if (const char* forced = std::getenv("BDRL_ISA"); forced && std::strcmp(forced, "scalar") == 0)
        return Isa::scalar;
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& active() noexcept {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

} // namespace

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (!isa_available(isa)) throw std::invalid_argument(std::string("ISA not available: ") + to_string(isa));
    active().store(isa, std::memory_order_relaxed);
}

void propagate_left(TridiagonalView p, std::span<const double> in, std::span<double> out) {
    if (active_isa() == Isa::avx2)
        avx2::propagate_left(p, in, out);
    else
        scalar::propagate_left(p, in, out);
}

void apply_right(TridiagonalView p, std::span<const double> in, std::span<double> out) {
    if (active_isa() == Isa::avx2)
        avx2::apply_right(p, in, out);
    else
        scalar::apply_right(p, in, out);
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    return active_isa() == Isa::avx2 ? avx2::l1_distance(a, b) : scalar::l1_distance(a, b);
}

} // namespace bdrl::kernels
