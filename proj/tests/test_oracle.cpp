#include "bdrl/analytics.hpp"
#include "bdrl/oracle.hpp"
#include "bdrl/planner.hpp"
#include "bdrl/verify.hpp"

#include <doctest.h>

#include <cmath>

using namespace bdrl;

TEST_CASE("dense solve") {
    const oracle::Matrix a{{2.0, 1.0}, {1.0, 3.0}};
    const auto x = oracle::dense_solve(a, {3.0, 5.0});
    CHECK(x[0] == doctest::Approx(0.8));
    CHECK(x[1] == doctest::Approx(1.4));
    CHECK_THROWS_AS(oracle::dense_solve({{1.0, 2.0}, {2.0, 4.0}}, {1.0, 1.0}), oracle::OracleError);
    const auto inv = oracle::dense_inverse(a);
    CHECK(inv[0][0] == doctest::Approx(0.6));
    CHECK(inv[0][1] == doctest::Approx(-0.2));
    CHECK(oracle::inf_norm(a) == 4.0);
}

TEST_CASE("power iteration refuses reducible kernels") {
    BirthDeathKernel k;
    k.down = {0.0, 0.0, 0.0};
    k.stay = {1.0, 1.0, 1.0};
    k.up = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(oracle::power_iteration_measure(k), oracle::OracleError);
}

TEST_CASE("dense evaluation on the fixture") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    const auto ev = oracle::dense_gain_bias(spec, Policy::zero(spec));
    CHECK(ev.gain == doctest::Approx(8.0 / 3.0));
    CHECK(ev.bias[0] == 0.0);
    const auto tau = oracle::dense_hitting_times(spec, Policy::zero(spec), 0);
    CHECK(tau[1] == doctest::Approx(5.0));
    CHECK(tau[2] == doctest::Approx(7.0));
}

TEST_CASE("policy enumeration") {
    const MdpSpec spec = MdpSpec::build(fixture_queue(3));
    const auto all = oracle::enumerate_policies(spec);
    CHECK(all.size() == 27);
    CHECK(all.front() == Policy::zero(spec));
    CHECK(all.back() == Policy::full_speed(spec));
    CHECK(all[1].speeds() == std::vector<Action>{0, 0, 1});
    CHECK_THROWS_AS(oracle::enumerate_policies(MdpSpec::build(fixture_queue(12)), 1000), oracle::OracleError);
}

TEST_CASE("grid inner max") {
    const std::vector<double> p{0.2, 0.5, 0.3}, u{1.0, 0.0, 2.0};
    const auto g = oracle::grid_inner_max(p, 0.0, u, Support{0, 2}, 0.1);
    CHECK(g.in_ball);
    CHECK(g.value == doctest::Approx(0.8));
    // a point that is not on the grid cannot be matched with eps = 0
    const std::vector<double> off{0.25, 0.75, 0.0};
    const auto h = oracle::grid_inner_max(off, 0.0, u, Support{0, 1}, 0.1);
    CHECK_FALSE(h.in_ball);
    CHECK_THROWS_AS(oracle::grid_inner_max(p, 0.1, u, Support{0, 3}, 0.1), oracle::OracleError);
}

TEST_CASE("distribution propagation and tails") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    const auto start = oracle::point_mass(3, 0);
    const auto slow = oracle::exact_distribution_propagation(spec, Policy::zero(spec), 100, start);
    const auto fast = oracle::exact_distribution_propagation(spec, Policy::full_speed(spec), 100, start);
    CHECK(slow.marginals.size() == 101);
    for (const auto& m : slow.marginals) CHECK(m[0] + m[1] + m[2] == doctest::Approx(1.0));
    CHECK(oracle::tail_excess(fast, slow) <= 1e-12);
    CHECK(oracle::tail_excess(slow, fast) > 0.0);
    // the law of the zero-speed chain converges to its stationary measure
    const auto& end = slow.marginals.back();
    CHECK(end[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-6));

    const auto m0 = pi0_closed_form(spec);
    const auto vt = oracle::visit_tail(fast, m0.probabilities, [](State) { return 1.0; });
    CHECK(vt.lhs[0] == doctest::Approx(100.0));
    CHECK(vt.rhs[0] == doctest::Approx(100.0));
    for (std::size_t s = 0; s < 3; ++s) CHECK(vt.lhs[s] <= vt.rhs[s] + 1e-9);
}
