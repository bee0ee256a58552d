#include "bdrl/analytics.hpp"
#include "bdrl/oracle.hpp"
#include "bdrl/planner.hpp"
#include "bdrl/verify.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bdrl;

TEST_CASE("stationary law of the three-state fixture") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    const StationaryMeasure m = stationary_measure(spec, Policy::zero(spec));
    CHECK(m[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK(m[1] == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK(m[2] == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(detailed_balance_residual(spec, Policy::zero(spec), m) <= 1e-15);

    const Policy full = Policy::full_speed(spec);
    const StationaryMeasure mx = stationary_measure(spec, full);
    for (State s = 0; s + 1 < spec.num_states(); ++s)
        CHECK(mx[s + 1] / mx[s] == doctest::Approx(spec.arrival_rate(s) / (spec.mu() * (s + 1) + 1.0)));
}

TEST_CASE("stationary law agrees with power iteration") {
    RngStream rng(17);
    for (int i = 0; i < 20; ++i) {
        const int S = 2 + static_cast<int>(rng.next_u64() % 49);
        const MdpSpec spec = MdpSpec::build(random_spec_params(rng, S, 2));
        const Policy pi = random_policy(spec, rng);
        const auto fast = stationary_measure(spec, pi);
        const auto slow = oracle::power_iteration_measure(kernel_of(spec, pi));
        double sum = 0.0;
        for (std::size_t s = 0; s < fast.size(); ++s) {
            CHECK(std::abs(fast[s] - slow[s]) <= 1e-10);
            sum += fast[s];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("gain and bias") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    const SolveResult r = gain_and_bias(spec, Policy::zero(spec));
    CHECK(r.gain == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(r.bias[0] == 0.0);
    CHECK(bellman_residual(spec, r) <= 1e-9);

    RngStream rng(23);
    for (int i = 0; i < 30; ++i) {
        const MdpSpec rs = MdpSpec::build(random_spec_params(rng, 2 + static_cast<int>(rng.next_u64() % 25), 3));
        const Policy pi = random_policy(rs, rng);
        const SolveResult fast = gain_and_bias(rs, pi);
        const auto dense = oracle::dense_gain_bias(rs, pi);
        CHECK(fast.gain == doctest::Approx(dense.gain).epsilon(1e-10));
        for (std::size_t s = 0; s < dense.bias.size(); ++s)
            CHECK(std::abs(fast.bias[s] - dense.bias[s]) <= 1e-8 * std::max(1.0, std::abs(dense.bias[s])));
        CHECK(bellman_residual(rs, fast) <= 1e-9);
        double dot = 0.0;
        const auto r = policy_rewards(rs, pi);
        for (std::size_t s = 0; s < r.size(); ++s) dot += r[s] * fast.measure[s];
        CHECK(std::abs(dot - fast.gain) <= 1e-9);
        const auto [lo, hi] = std::minmax_element(fast.bias.begin(), fast.bias.end());
        CHECK(fast.span == doctest::Approx(*hi - *lo));
    }
}

TEST_CASE("gain matches a long simulation") {
    const MdpSpec spec = MdpSpec::build(fixture_queue(5));
    const Policy pi(spec, {0, 1, 1, 2, 2});
    const double rho = gain_and_bias(spec, pi).gain;
    RngStream rng(77);
    const long n = 10000000;
    State s = 0;
    double sum = 0.0, sq = 0.0;
    // batch means for a dependence-robust standard error
    const long batch = 100000;
    double batch_sum = 0.0;
    for (long t = 1; t <= n; ++t) {
        const StepOutcome o = sample_step(spec, s, pi(s), rng);
        batch_sum += o.reward;
        s = o.next;
        if (t % batch == 0) {
            const double m = batch_sum / batch;
            sum += m;
            sq += m * m;
            batch_sum = 0.0;
        }
    }
    const double k = static_cast<double>(n / batch);
    const double mean = sum / k;
    const double se = std::sqrt((sq / k - mean * mean) / (k - 1));
    CHECK(std::abs(mean - rho) <= 3.0 * se + 1e-3);
}

TEST_CASE("policy iteration finds the enumerated optimum") {
    RngStream rng(31);
    for (int i = 0; i < 25; ++i) {
        const int S = 2 + static_cast<int>(rng.next_u64() % 4);
        const int amax = static_cast<int>(rng.next_u64() % 3);
        const MdpSpec spec = MdpSpec::build(random_spec_params(rng, S, amax));
        const SolveResult best = optimal_policy(spec);
        double brute = -1e300;
        Policy arg;
        for (const Policy& pi : oracle::enumerate_policies(spec)) {
            const double g = gain_and_bias(spec, pi).gain;
            if (g > brute + kActionTieTolerance) {
                brute = g;
                arg = pi;
            }
        }
        CHECK(best.gain == doctest::Approx(brute).epsilon(1e-12));
        CHECK(bellman_residual(spec, best) <= 1e-9);
    }

    const MdpSpec s4 = MdpSpec::build(fixture_queue(4));
    CHECK(optimal_policy(s4).gain == doctest::Approx(oracle::enumerate_optimal_gain(s4)).epsilon(1e-12));
}

TEST_CASE("optimal policy on the fixture and reference policies") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    const SolveResult best = optimal_policy(spec);
    CHECK(best.gain >= 8.0 / 3.0);
    CHECK(best.gain >= gain_and_bias(spec, Policy::full_speed(spec)).gain);
    for (std::size_t s = 1; s < best.bias.size(); ++s) CHECK(best.bias[s] <= best.bias[s - 1]);
    CHECK(best.span <= spec.deadline_cost() * (spec.num_states() - 1));
}

TEST_CASE("single-action class has the zero policy as optimum") {
    SpecParams p = fixture_queue(6);
    p.max_speed = 0;
    p.energy_table = {0.3};
    const MdpSpec spec = MdpSpec::build(p);
    const SolveResult best = optimal_policy(spec);
    CHECK(best.policy == Policy::zero(spec));
    CHECK(best.gain == doctest::Approx(gain_and_bias(spec, Policy::zero(spec)).gain));
}

TEST_CASE("two-state class") {
    const MdpSpec spec = MdpSpec::build(fixture_two_state());
    for (const Policy& pi : oracle::enumerate_policies(spec)) {
        const SolveResult r = gain_and_bias(spec, pi);
        const double a = mean_reward(spec, 0, pi(0)), b = mean_reward(spec, 1, pi(1));
        CHECK(r.gain >= std::min(a, b) - 1e-12);
        CHECK(r.gain <= std::max(a, b) + 1e-12);
    }
}

TEST_CASE("bias variations") {
    SUBCASE("constant rewards give a flat bias") {
        SpecParams p = fixture_queue(6);
        p.deadline_cost = 0.0;
        p.energy_table = {0.0, 0.0, 0.0};
        const MdpSpec spec = MdpSpec::build(p);
        const BiasVariations v = bias_variations(gain_and_bias(spec, Policy(spec, {0, 1, 2, 0, 1, 2})));
        for (double d : v.variations) CHECK(std::abs(d) <= 1e-12);
        CHECK(v.span <= 1e-12);
    }
    SUBCASE("span from variations equals max minus min") {
        RngStream rng(41);
        for (int i = 0; i < 20; ++i) {
            const MdpSpec spec = MdpSpec::build(random_spec_params(rng, 2 + static_cast<int>(rng.next_u64() % 20), 2));
            const SolveResult r = gain_and_bias(spec, random_policy(spec, rng));
            const BiasVariations v = bias_variations(r);
            CHECK(v.span == doctest::Approx(r.span).epsilon(1e-12));
            for (int s = 1; s < spec.num_states(); ++s)
                CHECK(v.variations[static_cast<std::size_t>(s)] ==
                      doctest::Approx(r.bias[static_cast<std::size_t>(s)] - r.bias[static_cast<std::size_t>(s - 1)]));
        }
    }
    SUBCASE("optimal variations under the analytic bound") {
        const MdpSpec spec = MdpSpec::build(fixture_three_state());
        const BiasVariations v = bias_variations(optimal_policy(spec));
        for (int s = 1; s < spec.num_states(); ++s)
            CHECK(std::abs(v.variations[static_cast<std::size_t>(s)]) <= delta(spec, s));
    }
}

TEST_CASE("stationary tails are dominated by the zero-speed law") {
    RngStream rng(53);
    for (int i = 0; i < 30; ++i) {
        const MdpSpec spec = MdpSpec::build(random_spec_params(rng, 2 + static_cast<int>(rng.next_u64() % 30), 3));
        const auto ref = stationary_measure(spec, Policy::zero(spec));
        const auto m = stationary_measure(spec, random_policy(spec, rng));
        double ta = 0.0, tb = 0.0;
        for (std::size_t s = m.size(); s-- > 0;) {
            ta += m[s];
            tb += ref[s];
            CHECK(ta <= tb + 1e-12);
        }
    }
}

TEST_CASE("gain perturbation bound") {
    RngStream rng(59);
    for (int i = 0; i < 40; ++i) {
        const MdpSpec spec = MdpSpec::build(random_spec_params(rng, 2 + static_cast<int>(rng.next_u64() % 10), 3));
        const Policy a = random_policy(spec, rng), b = random_policy(spec, rng);
        const auto pa = oracle::dense_kernel(spec, a), pb = oracle::dense_kernel(spec, b);
        const auto ra = policy_rewards(spec, a), rb = policy_rewards(spec, b);
        double dr = 0.0, dp = 0.0;
        for (std::size_t s = 0; s < ra.size(); ++s) {
            dr = std::max(dr, std::abs(ra[s] - rb[s]));
            double row = 0.0;
            for (std::size_t j = 0; j < ra.size(); ++j) row += std::abs(pa[s][j] - pb[s][j]);
            dp = std::max(dp, row);
        }
        const double d_pi = policy_diameter(spec, a).value;
        const double gap = std::abs(gain_and_bias(spec, a).gain - gain_and_bias(spec, b).gain);
        CHECK(gap <= dr + spec.r_max() * d_pi * dp + 1e-12);
    }
}

TEST_CASE("degenerate rates are rejected at solve time") {
    SpecParams p = fixture_three_state();
    p.lambda = 0.0;
    const MdpSpec spec = MdpSpec::build(p);
    CHECK_THROWS_AS(gain_and_bias(spec, Policy::zero(spec)), SolveError);
    CHECK_THROWS_AS(optimal_policy(spec), SolveError);
    CHECK_THROWS_AS(stationary_measure(spec, Policy::zero(spec)), SolveError);
}

TEST_CASE("tridiagonal solver") {
    // 2x - y = 1, -x + 2y - z = 0, -y + 2z = 1  ->  x = y = z = 1
    const auto x = solve_tridiagonal(std::vector<double>{0, -1, -1}, std::vector<double>{2, 2, 2},
                                     std::vector<double>{-1, -1, 0}, std::vector<double>{1, 0, 1});
    for (double v : x) CHECK(v == doctest::Approx(1.0));
    CHECK_THROWS_AS(solve_tridiagonal(std::vector<double>{0, 0}, std::vector<double>{0, 1},
                                      std::vector<double>{0, 0}, std::vector<double>{1, 1}),
                    SolveError);
}
