#include "bdrl/kernels.hpp"
#include "bdrl/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace bdrl;
namespace k = bdrl::kernels;

namespace {

struct Case {
    std::vector<double> down, stay, up, x;
};

Case random_case(RngStream& rng, int n) {
    Case c{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        c.down[i] = i == 0 ? 0.0 : rng.uniform();
        c.up[i] = i + 1 == n ? 0.0 : rng.uniform();
        c.stay[i] = rng.uniform();
        c.x[i] = rng.uniform() * 2.0 - 1.0;
    }
    return c;
}

} // namespace

TEST_CASE("scalar stencils match a naive dense product") {
    RngStream rng(3);
    for (int n : {1, 2, 3, 7, 33}) {
        Case c = random_case(rng, n);
        const k::TridiagonalView v{c.down, c.stay, c.up};
        std::vector<double> left(n), right(n);
        k::scalar::propagate_left(v, c.x, left);
        k::scalar::apply_right(v, c.x, right);
        for (int j = 0; j < n; ++j) {
            double l = 0.0, r = 0.0;
            for (int i = 0; i < n; ++i) {
                double pij = 0.0, pji = 0.0;
                if (i == j) pij = pji = c.stay[i];
                if (j == i + 1) pij = c.up[i];
                if (j == i - 1) pij = c.down[i];
                if (i == j + 1) pji = c.up[j];
                if (i == j - 1) pji = c.down[j];
                l += c.x[i] * pij;
                r += pji * c.x[i];
            }
            CHECK(left[j] == doctest::Approx(l).epsilon(1e-14));
            CHECK(right[j] == doctest::Approx(r).epsilon(1e-14));
        }
    }
}

TEST_CASE("AVX2 stencils are bit-identical to the scalar ones") {
    if (!k::isa_available(k::Isa::avx2)) {
        MESSAGE("AVX2 not available on this CPU, skipping");
        return;
    }
    RngStream rng(11);
    for (int n = 1; n <= 70; ++n) {
        Case c = random_case(rng, n);
        const k::TridiagonalView v{c.down, c.stay, c.up};
        std::vector<double> a(n), b(n);
        k::scalar::propagate_left(v, c.x, a);
        k::avx2::propagate_left(v, c.x, b);
        REQUIRE(a == b);
        k::scalar::apply_right(v, c.x, a);
        k::avx2::apply_right(v, c.x, b);
        REQUIRE(a == b);
        const double l1s = k::scalar::l1_distance(c.x, c.stay);
        const double l1v = k::avx2::l1_distance(c.x, c.stay);
        CHECK(std::abs(l1s - l1v) <= 1e-14 * std::max(1.0, l1s));
    }
}

TEST_CASE("dispatch can be forced") {
    const k::Isa before = k::active_isa();
    k::set_isa(k::Isa::scalar);
    CHECK(k::active_isa() == k::Isa::scalar);
    if (k::isa_available(k::Isa::avx2)) {
        k::set_isa(k::Isa::avx2);
        CHECK(k::active_isa() == k::Isa::avx2);
    } else {
        CHECK_THROWS_AS(k::set_isa(k::Isa::avx2), std::invalid_argument);
    }
    k::set_isa(before);
}
