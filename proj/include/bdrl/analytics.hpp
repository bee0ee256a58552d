#pragma once

// Closed-form and semi-closed-form quantities of the birth-death class:
// zero-speed stationary law, hitting times, diameter, bias-variation bound,
// the E2 functional and the regret reference bounds.

#include "bdrl/mdp.hpp"
#include "bdrl/planner.hpp"

#include <string_view>
#include <vector>

namespace bdrl {

/// A positive quantity that may exceed double range. value is +inf when log_scale is set.
struct LogScalar {
    double log_value = 0.0;
    double value = 1.0;
    bool log_scale = false;

    static LogScalar from_log(double log_value);
};

/// Binomial law m(s) = C(S-1,s) q^s / (1+q)^(S-1), q = lambda/((S-1) mu); log space throughout.
StationaryMeasure pi0_closed_form(const MdpSpec& spec);

struct HittingProfile {
    Policy policy;
    State target = 0;
    /// expected_times[s] = E[time to reach target from s]
    std::vector<double> expected_times;
};

/// First-passage system solved by tridiagonal elimination.
HittingProfile hitting_times(const MdpSpec& spec, const Policy& policy, State target);

/// Explicit recursion for E[tau_s] with target 0:
/// E tau_s = E tau_{s-1} + U/mu_s * sum_{s'=s}^{S-1} prod_{i=s+1}^{s'} lambda_{i-1}/mu_i, mu_i = pi(i) + mu i.
std::vector<double> hitting_times_to_zero_recursion(const MdpSpec& spec, const Policy& policy);

/// m(0)^{-1} sum_{i<=s} U/(pi(i) + mu i): upper bound on the time to empty the queue.
std::vector<double> hit_zero_upper_bound(const MdpSpec& spec, const Policy& policy);

/// Diameter: ascents under the zero-speed policy, descents under full speed.
LogScalar diameter(const MdpSpec& spec);

/// Largest expected travel time between two states when following one fixed policy.
LogScalar policy_diameter(const MdpSpec& spec, const Policy& policy);

/// 2 r_max e^{lambda/mu} (1 + ln s), s >= 1.
double delta(const MdpSpec& spec, int s);
/// delta_table[s] for 1 <= s <= S-1; entry 0 is 0 and unused.
std::vector<double> delta_bound(const MdpSpec& spec);

struct AnalyticsBundle {
    std::vector<double> delta;    ///< indexed by state, entry 0 unused
    std::vector<double> f_table;  ///< f(s) = max{1, s(s-1)} / (delta(s+1) + r_max)^2
    double big_f = 0.0;           ///< F = sum_s 1/f(s)
    double e2 = 0.0;              ///< F * E_{m0}[(delta + r_max)^2 f]
    LogScalar diameter;
    LogScalar q_max;
    double m_max_last = 0.0;      ///< full-speed stationary mass of the last state
    double log_m_max_last = 0.0;
    StationaryMeasure m_pi0;
};

AnalyticsBundle e2_constants(const MdpSpec& spec);

/// 60 e^{2 lambda/mu} r_max^2, the cap on F.
double f_cap(const MdpSpec& spec);
/// 60 e^{2 lambda/mu} r_max^2 (1 + lambda^2/mu^2), the cap on E2.
double e2_cap(const MdpSpec& spec);

inline constexpr std::string_view kMinimaxLabel = "worst-case over MDP class, not instance-specific";

struct RegretBounds {
    double horizon = 0.0;
    double upper_main = 0.0;     ///< 19 sqrt(E2 A T log(2AT))
    LogScalar upper_secondary;   ///< 97 r_max D^2 S A max{Q_max, T^{1/4}} log^2(2AT)
    LogScalar minimax_lower;     ///< 0.015 sqrt(D S A T), see kMinimaxLabel
};

RegretBounds regret_bounds(const MdpSpec& spec, double horizon);
RegretBounds regret_bounds(const MdpSpec& spec, const AnalyticsBundle& bundle, double horizon);

/// 0.015 sqrt(D S A T)
double minimax_lower_bound(double diameter, int num_states, int num_actions, double horizon);

} // namespace bdrl
