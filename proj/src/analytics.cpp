#include "bdrl/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdrl {

namespace {

constexpr double kLogDoubleMax = 709.782712893384;

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Log expected one-step passage times of the chain under a policy:
// ascent[i] for i -> i+1 (i < S-1), descent[i] for i -> i-1 (i >= 1).
struct PassageLogTimes {
    std::vector<double> ascent;
    std::vector<double> descent;
};

PassageLogTimes passage_log_times(const MdpSpec& spec, const Policy& policy) {
    const StationaryMeasure m = stationary_measure(spec, policy);
    const int S = spec.num_states();
    const double log_u = std::log(spec.uniformization());
    PassageLogTimes out;
    out.ascent.assign(static_cast<std::size_t>(S), -std::numeric_limits<double>::infinity());
    out.descent.assign(static_cast<std::size_t>(S), -std::numeric_limits<double>::infinity());

    // time(i -> i+1) = sum_{j <= i} m_j / (m_i P(i, i+1))
    double below = -std::numeric_limits<double>::infinity();
    for (State i = 0; i + 1 < S; ++i) {
        const double lm = m.log_probabilities[static_cast<std::size_t>(i)];
        below = log_add(below, lm);
        out.ascent[static_cast<std::size_t>(i)] = below - lm - (std::log(spec.arrival_rate(i)) - log_u);
    }
    // time(i -> i-1) = sum_{j >= i} m_j / (m_i P(i, i-1))
    double above = -std::numeric_limits<double>::infinity();
    for (State i = S - 1; i >= 1; --i) {
        const double lm = m.log_probabilities[static_cast<std::size_t>(i)];
        above = log_add(above, lm);
        out.descent[static_cast<std::size_t>(i)] = above - lm - (std::log(spec.departure_rate(i, policy(i))) - log_u);
    }
    return out;
}

double log_total(const std::vector<double>& logs) {
    double acc = -std::numeric_limits<double>::infinity();
    for (double x : logs) acc = log_add(acc, x);
    return acc;
}

} // namespace

LogScalar LogScalar::from_log(double log_value) {
    LogScalar out;
    out.log_value = log_value;
    out.log_scale = !(log_value < kLogDoubleMax);
    out.value = out.log_scale ? std::numeric_limits<double>::infinity() : std::exp(log_value);
    return out;
}

StationaryMeasure pi0_closed_form(const MdpSpec& spec) {
    require_irreducible(spec);
    const int S = spec.num_states();
    const double n = S - 1;
    const double q = spec.lambda() / (n * spec.mu());
    const double log_q = std::log(q);
    const double log_norm = n * std::log1p(q);

    StationaryMeasure m;
    m.log_probabilities.resize(static_cast<std::size_t>(S));
    m.probabilities.resize(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
        const double log_binom = std::lgamma(n + 1.0) - std::lgamma(s + 1.0) - std::lgamma(n - s + 1.0);
        const double lp = log_binom + s * log_q - log_norm;
        m.log_probabilities[static_cast<std::size_t>(s)] = lp;
        m.probabilities[static_cast<std::size_t>(s)] = std::exp(lp);
    }
    return m;
}

HittingProfile hitting_times(const MdpSpec& spec, const Policy& policy, State target) {
    require_irreducible(spec);
    if (!spec.valid_state(target)) throw std::out_of_range("hitting_times: target out of range");
    const BirthDeathKernel k = kernel_of(spec, policy);
    const auto n = static_cast<std::size_t>(spec.num_states());

    // (I - P) tau = 1 off the target, tau(target) = 0
    std::vector<double> sub(n), diag(n), sup(n), rhs(n, 1.0);
    for (std::size_t s = 0; s < n; ++s) {
        sub[s] = -k.down[s];
        diag[s] = k.down[s] + k.up[s];
        sup[s] = -k.up[s];
    }
    const auto t = static_cast<std::size_t>(target);
    sub[t] = sup[t] = 0.0;
    diag[t] = 1.0;
    rhs[t] = 0.0;

    HittingProfile out;
    out.policy = policy;
    out.target = target;
    out.expected_times = solve_tridiagonal(sub, diag, sup, rhs);
    out.expected_times[t] = 0.0;
    return out;
}

std::vector<double> hitting_times_to_zero_recursion(const MdpSpec& spec, const Policy& policy) {
    require_irreducible(spec);
    const int S = spec.num_states();
    const double U = spec.uniformization();
    auto departure = [&](int i) { return spec.departure_rate(i, policy(i)); };

    std::vector<double> tau(static_cast<std::size_t>(S), 0.0);
    for (int s = 1; s < S; ++s) {
        double sum = 0.0;
        for (int s2 = s; s2 < S; ++s2) {
            double prod = 1.0;
            for (int i = s + 1; i <= s2; ++i) prod *= spec.arrival_rate(i - 1) / departure(i);
            sum += prod;
        }
        tau[static_cast<std::size_t>(s)] = tau[static_cast<std::size_t>(s - 1)] + U / departure(s) * sum;
    }
    return tau;
}

std::vector<double> hit_zero_upper_bound(const MdpSpec& spec, const Policy& policy) {
    const StationaryMeasure m = stationary_measure(spec, policy);
    const double U = spec.uniformization();
    const double inv_m0 = std::exp(-m.log_probabilities[0]);
    std::vector<double> bound(static_cast<std::size_t>(spec.num_states()), 0.0);
    double sum = 0.0;
    for (int i = 1; i < spec.num_states(); ++i) {
        sum += U / spec.departure_rate(i, policy(i));
        bound[static_cast<std::size_t>(i)] = inv_m0 * sum;
    }
    return bound;
}

LogScalar diameter(const MdpSpec& spec) {
    const PassageLogTimes up = passage_log_times(spec, Policy::zero(spec));
    const PassageLogTimes down = passage_log_times(spec, Policy::full_speed(spec));
    return LogScalar::from_log(std::max(log_total(up.ascent), log_total(down.descent)));
}

LogScalar policy_diameter(const MdpSpec& spec, const Policy& policy) {
    const PassageLogTimes t = passage_log_times(spec, policy);
    return LogScalar::from_log(std::max(log_total(t.ascent), log_total(t.descent)));
}

double delta(const MdpSpec& spec, int s) {
    return 2.0 * spec.r_max() * std::exp(spec.lambda() / spec.mu()) * (1.0 + std::log(static_cast<double>(s)));
}

std::vector<double> delta_bound(const MdpSpec& spec) {
    std::vector<double> out(static_cast<std::size_t>(spec.num_states()), 0.0);
    for (int s = 1; s < spec.num_states(); ++s) out[static_cast<std::size_t>(s)] = delta(spec, s);
    return out;
}

AnalyticsBundle e2_constants(const MdpSpec& spec) {
    const int S = spec.num_states();
    const double r_max = spec.r_max();
    AnalyticsBundle b;
    b.delta = delta_bound(spec);
    b.m_pi0 = pi0_closed_form(spec);
    b.f_table.resize(static_cast<std::size_t>(S));

    double expectation = 0.0;
    for (int s = 0; s < S; ++s) {
        const double weight = std::max(1.0, static_cast<double>(s) * (s - 1));
        const double scale = delta(spec, s + 1) + r_max;
        const double f = weight / (scale * scale);
        b.f_table[static_cast<std::size_t>(s)] = f;
        b.big_f += 1.0 / f;
        expectation += f * scale * scale * b.m_pi0[static_cast<std::size_t>(s)];
    }
    b.e2 = b.big_f * expectation;

    b.diameter = diameter(spec);
    const StationaryMeasure m_max = stationary_measure(spec, Policy::full_speed(spec));
    b.log_m_max_last = m_max.log_probabilities.back();
    b.m_max_last = m_max.probabilities.back();

    // Q_max = X^2 log(X^4) = 4 X^2 log X with X = 10 D / m_max(S-1)
    const double log_x = std::log(10.0) + b.diameter.log_value - b.log_m_max_last;
    b.q_max = LogScalar::from_log(2.0 * log_x + std::log(4.0 * log_x));
    return b;
}

double f_cap(const MdpSpec& spec) {
    return 60.0 * std::exp(2.0 * spec.lambda() / spec.mu()) * spec.r_max() * spec.r_max();
}

double e2_cap(const MdpSpec& spec) {
    const double ratio = spec.lambda() / spec.mu();
    return f_cap(spec) * (1.0 + ratio * ratio);
}

RegretBounds regret_bounds(const MdpSpec& spec, double horizon) {
    return regret_bounds(spec, e2_constants(spec), horizon);
}

RegretBounds regret_bounds(const MdpSpec& spec, const AnalyticsBundle& bundle, double horizon) {
    if (!(horizon >= 2.0)) throw std::invalid_argument("regret_bounds: horizon must be at least 2");
    const double A = spec.num_actions();
    const double S = spec.num_states();
    const double log_2at = std::log(2.0 * A * horizon);

    RegretBounds out;
    out.horizon = horizon;
    out.upper_main = 19.0 * std::sqrt(bundle.e2 * A * horizon * log_2at);

    const double log_secondary = std::log(97.0) + std::log(spec.r_max()) + 2.0 * bundle.diameter.log_value +
                                 std::log(S) + std::log(A) +
                                 std::max(bundle.q_max.log_value, 0.25 * std::log(horizon)) +
                                 2.0 * std::log(log_2at);
    out.upper_secondary = LogScalar::from_log(log_secondary);

    const double log_lower =
        std::log(0.015) + 0.5 * (bundle.diameter.log_value + std::log(S) + std::log(A) + std::log(horizon));
    out.minimax_lower = LogScalar::from_log(log_lower);
    return out;
}

double minimax_lower_bound(double diameter, int num_states, int num_actions, double horizon) {
    return 0.015 * std::sqrt(diameter * num_states * num_actions * horizon);
}

} // namespace bdrl
