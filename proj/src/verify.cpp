#include "bdrl/verify.hpp"

#include "bdrl/analytics.hpp"
#include "bdrl/kernels.hpp"
#include "bdrl/oracle.hpp"
#include "bdrl/planner.hpp"
#include "bdrl/ucrl2.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace bdrl {

SpecParams fixture_three_state() {
    return SpecParams{1.0, 1.0, 2.0, 3, 1, 1.0, 1.0, {0.0, 1.0}};
}

SpecParams fixture_two_state() {
    return SpecParams{1.0, 1.0, 2.0, 2, 2, 1.0, 1.0, {0.0, 1.0, 4.0}};
}

SpecParams fixture_queue(int num_states) {
    return SpecParams{1.0, 1.0, 2.0, num_states, 2, 1.0, 1.0, {0.0, 1.0, 4.0}};
}

SpecParams random_spec_params(RngStream& rng, int num_states, int max_speed) {
    SpecParams p;
    p.num_states = num_states;
    p.max_speed = max_speed;
    p.lambda_max = 0.5 + 1.5 * rng.uniform();
    p.mu_max = 0.5 + 1.5 * rng.uniform();
    p.lambda = p.lambda_max * (0.2 + 0.8 * rng.uniform());
    p.mu = p.mu_max * (0.2 + 0.8 * rng.uniform());
    p.deadline_cost = 5.0 * rng.uniform();
    std::vector<double> steps(static_cast<std::size_t>(max_speed));
    for (double& d : steps) d = 2.0 * rng.uniform();
    std::sort(steps.begin(), steps.end());
    p.energy_table.push_back(rng.uniform());
    for (double d : steps) p.energy_table.push_back(p.energy_table.back() + d);
    return p;
}

Policy random_policy(const MdpSpec& spec, RngStream& rng) {
    std::vector<Action> speeds(static_cast<std::size_t>(spec.num_states()));
    for (Action& a : speeds) a = static_cast<Action>(rng.next_u64() % static_cast<std::uint64_t>(spec.num_actions()));
    return Policy(spec, std::move(speeds));
}

namespace {

struct Suite {
    std::vector<CheckResult> results;

    void run(const std::string& name, const std::function<std::string()>& body) {
        CheckResult r;
        r.name = name;
        try {
            r.detail = body();
            r.passed = r.detail.empty();
            if (r.passed) r.detail = "ok";
        } catch (const std::exception& e) {
            r.detail = std::string("exception: ") + e.what();
        }
        results.push_back(std::move(r));
    }
};

std::string mismatch(const std::string& what, double got, double want, double tol) {
    if (std::abs(got - want) <= tol) return {};
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << got << ", expected " << want << " (tol " << tol << ")";
    return os.str();
}

std::string stationary_check(const MdpSpec& spec, double tol) {
    const auto closed = pi0_closed_form(spec);
    const auto power = oracle::power_iteration_measure(kernel_of(spec, Policy::zero(spec)));
    for (std::size_t s = 0; s < closed.size(); ++s) {
        auto m = mismatch("m0(" + std::to_string(s) + ")", closed[s], power[s], tol);
        if (!m.empty()) return m;
    }
    return {};
}

std::string hitting_check(const MdpSpec& spec, const Policy& pi, double tol) {
    const auto rec = hitting_times_to_zero_recursion(spec, pi);
    const auto lin = hitting_times(spec, pi, 0).expected_times;
    for (std::size_t s = 0; s < rec.size(); ++s) {
        auto m = mismatch("E tau_" + std::to_string(s), rec[s], lin[s], tol * std::max(1.0, std::abs(lin[s])));
        if (!m.empty()) return m;
    }
    return {};
}

std::string diameter_check(const MdpSpec& spec) {
    const double fast = diameter(spec).value;
    const double slow = oracle::enumerate_diameter(spec);
    return mismatch("diameter", fast, slow, 1e-6 * std::max(1.0, slow));
}

std::string bias_bound_check(const MdpSpec& spec, const Policy& pi) {
    const auto sol = gain_and_bias(spec, pi);
    for (int s = 1; s < spec.num_states(); ++s) {
        const double v = std::abs(sol.variations[static_cast<std::size_t>(s)]);
        if (v > delta(spec, s)) {
            std::ostringstream os;
            os << "|dH(" << s << ")| = " << v << " exceeds " << delta(spec, s);
            return os.str();
        }
    }
    return {};
}

std::string gain_check(const MdpSpec& spec) {
    const double pi_gain = optimal_policy(spec).gain;
    const double brute = oracle::enumerate_optimal_gain(spec);
    return mismatch("optimal gain", pi_gain, brute, 1e-10);
}

std::string inner_max_check(RngStream& rng, int instances) {
    const double step = 0.01;
    for (int it = 0; it < instances; ++it) {
        const int n = 3;
        const int k = 2 + static_cast<int>(rng.next_u64() % 2);
        std::vector<double> p(n, 0.0), u(n, 0.0);
        const Support sup{0, k - 1};
        // p_hat on the 0.01 grid, so the oracle's ball always contains a grid point
        long left = 100;
        for (int j = 0; j < k; ++j) {
            const long c = j + 1 == k ? left : static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(left + 1));
            p[j] = static_cast<double>(c) / 100.0;
            left -= c;
            u[j] = 10.0 * rng.uniform() - 5.0;
        }
        const double eps = 2.0 * rng.uniform();
        const auto fast = inner_max(p, eps, u, sup);
        double fast_value = 0.0, unorm = 0.0;
        for (int j = 0; j < n; ++j) {
            fast_value += fast[j] * u[j];
            unorm = std::max(unorm, std::abs(u[j]));
        }
        const auto grid = oracle::grid_inner_max(p, eps, u, sup, step);
        // the exact optimum may sit between grid points: allow one cell in each coordinate
        if (grid.value > fast_value + 1e-12 || fast_value > grid.value + 2.0 * step * unorm + 1e-12) {
            std::ostringstream os;
            os << "instance " << it << ": sorted shift " << fast_value << " vs grid " << grid.value;
            return os.str();
        }
    }
    return {};
}

std::string tail_check(const MdpSpec& spec, const Policy& pi, long horizon) {
    const auto start = oracle::point_mass(spec.num_states(), 0);
    const auto ref = oracle::exact_distribution_propagation(spec, Policy::zero(spec), horizon, start);
    const auto run = oracle::exact_distribution_propagation(spec, pi, horizon, start);
    const double excess = oracle::tail_excess(run, ref);
    if (excess > 1e-12) {
        std::ostringstream os;
        os << "tail excess " << excess;
        return os.str();
    }
    return {};
}

std::string isa_check(RngStream& rng) {
    if (!kernels::isa_available(kernels::Isa::avx2)) return {};
    for (int n : {2, 3, 5, 8, 17, 64, 101}) {
        std::vector<double> d(n), st(n), up(n), x(n), a(n), b(n);
        for (int i = 0; i < n; ++i) {
            d[i] = rng.uniform();
            st[i] = rng.uniform();
            up[i] = rng.uniform();
            x[i] = rng.uniform() - 0.5;
        }
        const kernels::TridiagonalView view{d, st, up};
        kernels::scalar::propagate_left(view, x, a);
        kernels::avx2::propagate_left(view, x, b);
        if (a != b) return "propagate_left differs at n=" + std::to_string(n);
        kernels::scalar::apply_right(view, x, a);
        kernels::avx2::apply_right(view, x, b);
        if (a != b) return "apply_right differs at n=" + std::to_string(n);
    }
    return {};
}

} // namespace

std::vector<CheckResult> run_verification(bool small) {
    Suite suite;
    const MdpSpec s3 = MdpSpec::build(fixture_three_state());
    const MdpSpec s2 = MdpSpec::build(fixture_two_state());
    RngStream rng(20240607, "verify");

    suite.run("stationary law, three-state fixture", [&] {
        const auto power = oracle::power_iteration_measure(kernel_of(s3, Policy::zero(s3)));
        const double want[3] = {4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0};
        for (std::size_t s = 0; s < 3; ++s) {
            auto m = mismatch("m0(" + std::to_string(s) + ")", power[s], want[s], 1e-12);
            if (!m.empty()) return m;
        }
        return stationary_check(s3, 1e-12);
    });
    suite.run("hitting times, three-state fixture", [&] {
        const auto rec = hitting_times_to_zero_recursion(s3, Policy::zero(s3));
        auto m = mismatch("E tau_1", rec[1], 5.0, 1e-12);
        if (m.empty()) m = mismatch("E tau_2", rec[2], 7.0, 1e-12);
        if (m.empty()) m = hitting_check(s3, Policy::zero(s3), 1e-9);
        return m;
    });
    suite.run("diameter, fixtures", [&] {
        auto m = mismatch("D three-state", oracle::enumerate_diameter(s3), 20.0, 1e-9);
        if (m.empty()) m = mismatch("D two-state", oracle::enumerate_diameter(s2), 4.0, 1e-9);
        if (m.empty()) m = diameter_check(s3);
        if (m.empty()) m = diameter_check(s2);
        return m;
    });
    suite.run("policy iteration vs enumeration, fixtures", [&] {
        auto m = gain_check(s3);
        if (m.empty()) m = gain_check(s2);
        if (m.empty()) m = gain_check(MdpSpec::build(fixture_queue(5)));
        return m;
    });
    suite.run("bias variation bound, fixtures", [&] {
        for (const MdpSpec* spec : {&s3, &s2}) {
            for (const Policy& pi : {Policy::zero(*spec), Policy::full_speed(*spec), optimal_policy(*spec).policy}) {
                auto m = bias_bound_check(*spec, pi);
                if (!m.empty()) return m;
            }
        }
        return std::string();
    });
    suite.run("inner maximization vs grid search", [&] { return inner_max_check(rng, small ? 300 : 10000); });
    suite.run("stochastic ordering, three-state fixture", [&] { return tail_check(s3, Policy::full_speed(s3), 200); });
    suite.run("scalar and AVX2 kernels agree", [&] { return isa_check(rng); });

    if (small) return suite.results;

    suite.run("stationary law, random specs", [&] {
        for (int i = 0; i < 30; ++i) {
            const int S = 3 + static_cast<int>(rng.next_u64() % 198);
            auto m = stationary_check(MdpSpec::build(random_spec_params(rng, S, 2)), 1e-10);
            if (!m.empty()) return "S=" + std::to_string(S) + ": " + m;
        }
        return std::string();
    });
    suite.run("hitting times, random specs", [&] {
        for (int i = 0; i < 50; ++i) {
            const int S = 2 + static_cast<int>(rng.next_u64() % 30);
            const MdpSpec spec = MdpSpec::build(random_spec_params(rng, S, 3));
            auto m = hitting_check(spec, random_policy(spec, rng), 1e-9);
            if (!m.empty()) return m;
        }
        return std::string();
    });
    suite.run("diameter, small random specs", [&] {
        for (int S = 2; S <= 5; ++S) {
            for (int a = 0; a <= 2; ++a) {
                auto m = diameter_check(MdpSpec::build(random_spec_params(rng, S, a)));
                if (!m.empty()) return "S=" + std::to_string(S) + ": " + m;
            }
        }
        return std::string();
    });
    suite.run("bias variation bound, random specs", [&] {
        for (int i = 0; i < 20; ++i) {
            const MdpSpec spec = MdpSpec::build(random_spec_params(rng, 2 + static_cast<int>(rng.next_u64() % 20), 3));
            for (int j = 0; j < 20; ++j) {
                auto m = bias_bound_check(spec, random_policy(spec, rng));
                if (!m.empty()) return m;
            }
        }
        return std::string();
    });
    suite.run("stochastic ordering, random specs", [&] {
        for (int i = 0; i < 10; ++i) {
            const MdpSpec spec = MdpSpec::build(random_spec_params(rng, 2 + static_cast<int>(rng.next_u64() % 10), 2));
            auto m = tail_check(spec, random_policy(spec, rng), 500);
            if (!m.empty()) return m;
        }
        return std::string();
    });
    return suite.results;
}

} // namespace bdrl
