#include "bdrl/harness.hpp"
#include "bdrl/oracle.hpp"
#include "bdrl/planner.hpp"
#include "bdrl/ucrl2.hpp"
#include "bdrl/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace bdrl;

namespace {

LearnerConfig config_for(const MdpSpec& spec, ConfidenceMode mode = ConfidenceMode::tweaked) {
    LearnerConfig c;
    c.mode = mode;
    c.r_max_known = spec.r_max();
    return c;
}

Estimates true_estimates(const MdpSpec& spec) {
    Estimates e;
    e.num_states = spec.num_states();
    e.num_actions = spec.num_actions();
    for (State s = 0; s < spec.num_states(); ++s) {
        for (Action a = 0; a < spec.num_actions(); ++a) {
            const TransitionRow row = transition_row(spec, s, a);
            e.reward.push_back(mean_reward(spec, s, a));
            e.transition.push_back({s > 0 ? row.down : 0.0, row.stay, s + 1 < spec.num_states() ? row.up : 0.0});
        }
    }
    return e;
}

RadiiTable uniform_radii(const Estimates& e, double r, double p) {
    return RadiiTable{std::vector<double>(e.reward.size(), r), std::vector<double>(e.reward.size(), p)};
}

} // namespace

TEST_CASE("confidence radii") {
    LearnerConfig c;
    c.r_max_known = 3.0;
    SUBCASE("clamped at the cold start") {
        const ConfidenceRadii r = confidence_radii(c, 1.0, 0.0, 3, 2);
        CHECK(r.reward == 3.0);
        CHECK(r.transition == 2.0);
    }
    SUBCASE("tweaked formulas") {
        const ConfidenceRadii r = confidence_radii(c, 1000.0, 500.0, 3, 2);
        CHECK(r.reward == doctest::Approx(3.0 * std::sqrt(2.0 * std::log(4000.0) / 500.0)));
        CHECK(r.transition == doctest::Approx(std::sqrt(8.0 * std::log(4000.0) / 500.0)));
    }
    SUBCASE("classic formulas") {
        c.mode = ConfidenceMode::classic;
        c.delta = 0.1;
        const ConfidenceRadii r = confidence_radii(c, 1e6, 1e5, 20, 3);
        CHECK(r.reward == doctest::Approx(3.0 * std::sqrt(7.0 * std::log(2.0 * 60 * 1e6 / 0.1) / 2e5)));
        CHECK(r.transition == doctest::Approx(std::sqrt(14.0 * 20 * std::log(6e6 / 0.1) / 1e5)));
    }
    SUBCASE("radii vanish with the count") {
        const ConfidenceRadii r = confidence_radii(c, 100.0, 1e16, 3, 2);
        CHECK(r.reward < 1e-6);
        CHECK(r.transition < 1e-6);
    }
    SUBCASE("tweaked transition radius is smaller than classic") {
        LearnerConfig classic = c;
        classic.mode = ConfidenceMode::classic;
        for (double n : {10.0, 1e3, 1e5}) {
            const double t = confidence_radii(c, 1e6, n, 20, 3).transition;
            const double k = confidence_radii(classic, 1e6, n, 20, 3).transition;
            if (k < 2.0) CHECK(k / t >= std::sqrt(14.0 * 20 / 8.0));
        }
    }
    CHECK_THROWS_AS(confidence_radii(c, 0.5, 1.0, 3, 2), std::invalid_argument);
}

TEST_CASE("empirical estimates") {
    LearnerState st(3, 1);
    const std::size_t i = st.index(1, 0);
    st.visit_counts[i] = 3;
    st.transition_counts[i] = {2, 1, 0};
    st.reward_sums[i] = 2.0 + 2.0 + (2.0 - 1.5);
    const Estimates e = empirical_estimates(st);
    CHECK(e.transition[i][0] == doctest::Approx(2.0 / 3.0));
    CHECK(e.transition[i][1] == doctest::Approx(1.0 / 3.0));
    CHECK(e.transition[i][2] == 0.0);
    CHECK(e.reward[i] == doctest::Approx(2.0 - 1.5 / 3.0));

    // unvisited pairs: uniform on the support, zero reward
    const std::size_t j0 = st.index(0, 0), j2 = st.index(2, 0);
    CHECK(e.transition[j0][0] == 0.0);
    CHECK(e.transition[j0][1] == 0.5);
    CHECK(e.transition[j0][2] == 0.5);
    CHECK(e.transition[j2][0] == 0.5);
    CHECK(e.transition[j2][1] == 0.5);
    CHECK(e.transition[j2][2] == 0.0);
    CHECK(e.reward[j0] == 0.0);

    LearnerState mid(5, 1);
    const Estimates em = empirical_estimates(mid);
    for (double x : em.transition[mid.index(2, 0)]) CHECK(x == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("inner maximization") {
    SUBCASE("worked instance") {
        const std::vector<double> p{0.2, 0.5, 0.3}, u{1.0, 0.0, 2.0};
        const auto q = inner_max(p, 0.2, u, Support{0, 2});
        CHECK(q[0] == doctest::Approx(0.2));
        CHECK(q[1] == doctest::Approx(0.4));
        CHECK(q[2] == doctest::Approx(0.4));
        CHECK(q[0] * u[0] + q[1] * u[1] + q[2] * u[2] == doctest::Approx(1.0));
        const auto g = oracle::grid_inner_max(p, 0.2, u, Support{0, 2}, 0.001);
        CHECK(g.value == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("zero radius keeps the estimate") {
        const std::vector<double> p{0.2, 0.5, 0.3}, u{1.0, 0.0, 2.0};
        CHECK(inner_max(p, 0.0, u, Support{0, 2}) == p);
    }
    SUBCASE("full radius puts everything on the best state") {
        const std::vector<double> p{0.2, 0.5, 0.3}, u{1.0, 0.0, 2.0};
        const auto q = inner_max(p, 2.0, u, Support{0, 2});
        CHECK(q[0] == doctest::Approx(0.0));
        CHECK(q[1] == doctest::Approx(0.0));
        CHECK(q[2] == doctest::Approx(1.0));
        const auto g = oracle::grid_inner_max(p, 2.0, u, Support{0, 2}, 0.01);
        CHECK(g.q[2] == doctest::Approx(1.0));
    }
    SUBCASE("mass never leaves the support") {
        const std::vector<double> p{0.0, 0.0, 0.6, 0.4, 0.0}, u{9.0, 9.0, 0.0, 1.0, 9.0};
        const auto q = inner_max(p, 2.0, u, Support{2, 3});
        CHECK(q == std::vector<double>{0.0, 0.0, 0.0, 1.0, 0.0});
    }
    SUBCASE("random instances against the grid oracle") {
        RngStream rng(97);
        const double step = 0.01;
        for (int it = 0; it < 10000; ++it) {
            const int k = 1 + static_cast<int>(rng.next_u64() % 3);
            std::vector<double> p(3, 0.0), u(3);
            long left = 100;
            for (int j = 0; j < k; ++j) {
                const long c = j + 1 == k ? left : static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(left + 1));
                p[j] = c / 100.0;
                left -= c;
            }
            for (double& x : u) x = rng.uniform() * 4.0 - 2.0;
            const double eps = rng.uniform() * 2.0;
            const Support sup{0, k - 1};
            const auto q = inner_max(p, eps, u, sup);
            double l1 = 0.0, mass = 0.0, value = 0.0, unorm = 0.0;
            for (int j = 0; j < 3; ++j) {
                REQUIRE(q[j] >= 0.0);
                if (j >= k) REQUIRE(q[j] == 0.0);
                l1 += std::abs(q[j] - p[j]);
                mass += q[j];
                value += q[j] * u[j];
                unorm = std::max(unorm, std::abs(u[j]));
            }
            REQUIRE(l1 <= eps + 1e-12);
            REQUIRE(mass == doctest::Approx(1.0).epsilon(1e-14));
            const auto g = oracle::grid_inner_max(p, eps, u, sup, step);
            REQUIRE(g.in_ball);
            REQUIRE(value >= g.value - 1e-12);
            REQUIRE(value <= g.value + 2.0 * step * unorm + 1e-12);
        }
    }
}

TEST_CASE("EVI on the true model recovers the optimum") {
    for (int S : {3, 5, 8}) {
        const MdpSpec spec = MdpSpec::build(fixture_queue(S));
        const Estimates e = true_estimates(spec);
        const RadiiTable zero = uniform_radii(e, 0.0, 0.0);
        const double t_k = 1e6;
        const EviResult r = extended_value_iteration(e, zero, t_k, config_for(spec));
        const SolveResult best = optimal_policy(spec);
        CHECK(r.converged);
        CHECK(r.policy == best.policy.speeds());
        CHECK(std::abs(r.optimistic_gain - best.gain) <= spec.r_max() / std::sqrt(t_k));
        CHECK(r.final_span < r.threshold);
    }
}

TEST_CASE("EVI is optimistic and bounded") {
    const MdpSpec spec = MdpSpec::build(fixture_queue(4));
    const Estimates e = true_estimates(spec);
    const double rho = optimal_policy(spec).gain;
    for (double r : {0.0, 0.1, 1.0}) {
        for (double p : {0.0, 0.05, 0.5, 2.0}) {
            const EviResult res = extended_value_iteration(e, uniform_radii(e, r, p), 1e4, config_for(spec));
            CHECK(res.optimistic_gain >= rho - spec.r_max() / 100.0);
            CHECK(res.optimistic_gain <= spec.r_max() + res.threshold);
        }
    }
    // fully clamped radii: every pair is worth r_max
    const EviResult top = extended_value_iteration(e, uniform_radii(e, spec.r_max(), 2.0), 100.0, config_for(spec));
    CHECK(top.optimistic_gain == doctest::Approx(spec.r_max()));
    CHECK(top.policy == std::vector<Action>(4, 0));
}

TEST_CASE("EVI gives up with an error when the sweep cap is hit") {
    const MdpSpec spec = MdpSpec::build(fixture_queue(4));
    const Estimates e = true_estimates(spec);
    LearnerConfig c = config_for(spec);
    c.max_evi_iterations = 1;
    CHECK_THROWS_AS(extended_value_iteration(e, uniform_radii(e, 0.0, 0.0), 1e12, c), EviError);
}

TEST_CASE("membership check") {
    const MdpSpec spec = MdpSpec::build(fixture_queue(4));
    const Estimates exact = true_estimates(spec);
    CHECK(membership_check(spec, exact, uniform_radii(exact, 1e-9, 1e-9)));
    CHECK(membership_check(spec, exact, uniform_radii(exact, 0.0, 0.0)));

    LearnerState cold(4, 3);
    const Estimates e = empirical_estimates(cold);
    CHECK(membership_check(spec, e, uniform_radii(e, spec.r_max(), 2.0)));
    CHECK_FALSE(membership_check(spec, e, uniform_radii(e, 0.1, 0.1)));
}

TEST_CASE("episode schedule") {
    // three states, one action: feed self-loops at state 0 and watch the doubling test
    LearnerConfig c;
    c.r_max_known = 1.0;
    Ucrl2 learner(3, 1, c);
    CHECK(learner.act(0) == 0);
    CHECK(learner.state().episode == 1);
    CHECK(learner.state().episode_start == 1);

    // episode 1 has N_tk = 0, so one visit ends it
    learner.observe({0, 0, 1.0, 0});
    learner.act(0);
    CHECK(learner.state().episode == 2);
    CHECK(learner.state().episode_start == 2);

    // episode 2 starts with N = 1: the second visit of the episode is never reached inside it
    learner.observe({0, 0, 1.0, 0});
    learner.act(0);
    CHECK(learner.state().episode == 3);
    CHECK(learner.state().start_counts[0] == 2);

    // episode 3: N = 2, so two visits end it exactly
    learner.observe({0, 0, 1.0, 0});
    learner.act(0);
    CHECK(learner.state().episode == 3);
    learner.observe({0, 0, 1.0, 0});
    learner.act(0);
    CHECK(learner.state().episode == 4);
    learner.finish();
    const auto& ep = learner.episodes();
    REQUIRE(ep.size() == 4);
    for (std::size_t k = 1; k < ep.size(); ++k) CHECK(ep[k].start > ep[k - 1].start);
    CHECK(ep[2].length == 2);

    CHECK_THROWS_AS(learner.observe({0, 0, 1.0, 0}), std::logic_error);
}

TEST_CASE("observations outside the birth-death support are rejected") {
    LearnerConfig c;
    c.r_max_known = 1.0;
    Ucrl2 learner(4, 2, c);
    learner.act(0);
    CHECK_THROWS_AS(learner.observe({0, 0, 0.0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(learner.observe({0, 2, 0.0, 0}), std::out_of_range);
}

TEST_CASE("learner invariants along a run") {
    const MdpSpec spec = MdpSpec::build(fixture_queue(5));
    Ucrl2 learner(5, 3, config_for(spec));
    RngStream rng(101);
    State s = 0;
    for (long t = 1; t <= 20000; ++t) {
        const auto& st = learner.state();
        REQUIRE(std::accumulate(st.visit_counts.begin(), st.visit_counts.end(), 0L) == t - 1);
        const Action a = learner.act(s);
        REQUIRE(learner.last_evi().final_span < learner.last_evi().threshold);
        REQUIRE(learner.last_evi().optimistic_gain <= spec.r_max() + learner.last_evi().threshold);
        const StepOutcome o = sample_step(spec, s, a, rng);
        learner.observe({s, a, o.reward, o.next});
        s = o.next;
    }
    for (State x = 0; x < 5; ++x) {
        for (Action a = 0; a < 3; ++a) {
            const auto& counts = learner.state().transition_counts[learner.state().index(x, a)];
            if (x == 0) CHECK(counts[0] == 0);
            if (x == 4) CHECK(counts[2] == 0);
        }
    }
}

TEST_CASE("estimates converge under a fixed exploration schedule") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    LearnerState st(3, 2);
    RngStream rng(103);
    State s = 0;
    for (long t = 0; t < 1000000; ++t) {
        const Action a = static_cast<Action>(t % 2);
        const StepOutcome o = sample_step(spec, s, a, rng);
        const std::size_t i = st.index(s, a);
        ++st.visit_counts[i];
        st.reward_sums[i] += o.reward;
        ++st.transition_counts[i][static_cast<std::size_t>(o.next - s + 1)];
        s = o.next;
    }
    const Estimates e = empirical_estimates(st);
    for (State x = 0; x < 3; ++x) {
        for (Action a = 0; a < 2; ++a) {
            const std::size_t i = st.index(x, a);
            const double n = static_cast<double>(st.visit_counts[i]);
            const double pmiss = x * spec.mu() / spec.uniformization();
            const double sd_r = spec.deadline_cost() * std::sqrt(pmiss * (1 - pmiss) / n);
            CHECK(std::abs(e.reward[i] - mean_reward(spec, x, a)) <= 3.0 * sd_r + 1e-12);
            const TransitionRow row = transition_row(spec, x, a);
            const double want[3] = {x > 0 ? row.down : 0.0, row.stay, x < 2 ? row.up : 0.0};
            for (int j = 0; j < 3; ++j) {
                const double sd = std::sqrt(want[j] * (1 - want[j]) / n);
                CHECK(std::abs(e.transition[i][static_cast<std::size_t>(j)] - want[j]) <= 3.0 * sd + 1e-12);
            }
        }
    }
}

TEST_CASE("optimism whenever the confidence set holds") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    const double rho = optimal_policy(spec).gain;
    int checked = 0;
    for (int seed = 0; seed < 100; ++seed) {
        RunOptions o;
        o.optimal_gain = rho;
        const RegretTrace tr = run_experiment(spec, LearnerConfig{}, 10000, derive_seed(5, static_cast<std::uint64_t>(seed)), o);
        for (const auto& e : tr.episodes) {
            if (!e.membership) continue;
            ++checked;
            CHECK(e.optimistic_gain >= rho - spec.r_max() / std::sqrt(static_cast<double>(e.start)));
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("classic mode runs") {
    const MdpSpec spec = MdpSpec::build(fixture_three_state());
    LearnerConfig c;
    c.mode = ConfidenceMode::classic;
    c.delta = 0.1;
    const RegretTrace tr = run_experiment(spec, c, 20000, 3);
    CHECK(tr.num_episodes >= 1);
    CHECK(tr.membership_failures == 0);
}
