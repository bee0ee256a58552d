#pragma once

// Controlled birth-death MDPs for speed scaling with soft deadlines.
//
// States 0..S-1 count the jobs in the system, actions 0..A_max are processor
// speeds. The discrete-time chain is the uniformization of the continuous
// one with constant U = lambda_max + (S-1) mu_max + A_max.

#include "bdrl/rng.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdrl {

using State = int;
using Action = int;

enum class SpecErrc {
    non_finite,
    negative_parameter,
    zero_mu,
    lambda_above_max,
    mu_above_max,
    too_few_states,
    energy_table_size,
    energy_decreasing,
    energy_nonconvex,
    invalid_policy,
};

const char* to_string(SpecErrc code) noexcept;

/// Validation failure when building an MDP or a policy.
class SpecError : public std::invalid_argument {
public:
    SpecError(SpecErrc code, const std::string& what)
        : std::invalid_argument(what), code_(code) {}
    SpecErrc code() const noexcept { return code_; }

private:
    SpecErrc code_;
};

/// Raw parameters, exactly as they appear in the spec JSON.
struct SpecParams {
    double lambda = 0.0;
    double mu = 0.0;
    double deadline_cost = 0.0;
    int num_states = 0;
    int max_speed = 0;
    double lambda_max = 0.0;
    double mu_max = 0.0;
    std::vector<double> energy_table;
};

/**
 * Validated MDP of the speed-scaling class together with its derived
 * constants. Immutable after construction.
 */
class MdpSpec {
public:
    /// Validates the parameters; throws SpecError with a distinct code per failure.
    static MdpSpec build(const SpecParams& params);

    const SpecParams& params() const noexcept { return params_; }

    double lambda() const noexcept { return params_.lambda; }
    double mu() const noexcept { return params_.mu; }
    double deadline_cost() const noexcept { return params_.deadline_cost; }
    int num_states() const noexcept { return params_.num_states; }
    int max_speed() const noexcept { return params_.max_speed; }
    int num_actions() const noexcept { return params_.max_speed + 1; }
    double lambda_max() const noexcept { return params_.lambda_max; }
    double mu_max() const noexcept { return params_.mu_max; }
    double energy(Action a) const { return params_.energy_table.at(static_cast<std::size_t>(a)); }

    double uniformization() const noexcept { return uniformization_; }
    /// Decaying arrival rate lambda_i = lambda (1 - i/(S-1)).
    double arrival_rate(State i) const { return arrival_.at(static_cast<std::size_t>(i)); }
    /// Total departure rate a + i mu (service plus deadline misses).
    double departure_rate(State i, Action a) const noexcept { return a + i * params_.mu; }
    double r_max() const noexcept { return r_max_; }

    bool valid_state(State s) const noexcept { return s >= 0 && s < params_.num_states; }
    bool valid_action(Action a) const noexcept { return a >= 0 && a <= params_.max_speed; }

private:
    explicit MdpSpec(SpecParams params);

    SpecParams params_;
    double uniformization_ = 0.0;
    double r_max_ = 0.0;
    std::vector<double> arrival_;
};

inline MdpSpec build_spec(const SpecParams& params) { return MdpSpec::build(params); }

/// Stationary deterministic policy: one speed per state.
class Policy {
public:
    Policy() = default;
    /// Throws SpecError if the length or any speed is invalid for the spec.
    Policy(const MdpSpec& spec, std::vector<Action> speeds);
    /// For callers that only know the action count (the learner).
    Policy(std::vector<Action> speeds, int num_actions);

    static Policy zero(const MdpSpec& spec);
    static Policy full_speed(const MdpSpec& spec);

    Action operator()(State s) const { return speeds_.at(static_cast<std::size_t>(s)); }
    const std::vector<Action>& speeds() const noexcept { return speeds_; }
    std::size_t size() const noexcept { return speeds_.size(); }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    std::vector<Action> speeds_;
};

/// Structural support {s-1, s, s+1} clipped to the state space.
struct Support {
    State lo = 0;
    State hi = 0;

    int size() const noexcept { return hi - lo + 1; }
    bool contains(State s) const noexcept { return s >= lo && s <= hi; }
    std::vector<State> states() const;
};

Support support_of(const MdpSpec& spec, State s, Action a);

/// One row of the transition kernel; only the three neighbours can be nonzero.
struct TransitionRow {
    State from = 0;
    double down = 0.0;
    double stay = 0.0;
    double up = 0.0;

    double probability(State to) const noexcept;
    std::vector<double> dense(int num_states) const;
};

TransitionRow transition_row(const MdpSpec& spec, State s, Action a);

/// r_max - w(a)/U - C s mu / U
double mean_reward(const MdpSpec& spec, State s, Action a);

struct StepOutcome {
    State next = 0;
    double reward = 0.0;
    bool missed_deadline = false;
};

/// Draws the next state first, then the deadline-miss Bernoulli, from one stream.
StepOutcome sample_step(const MdpSpec& spec, State s, Action a, RngStream& rng);

/**
 * Tridiagonal kernel of the chain under a fixed policy.
 * down[i] = P(i, i-1), stay[i] = P(i, i), up[i] = P(i, i+1);
 * down[0] = up[S-1] = 0.
 */
struct BirthDeathKernel {
    std::vector<double> down;
    std::vector<double> stay;
    std::vector<double> up;

    int num_states() const noexcept { return static_cast<int>(stay.size()); }
};

BirthDeathKernel kernel_of(const MdpSpec& spec, const Policy& policy);

/// Mean rewards r(s, pi(s)) under a policy.
std::vector<double> policy_rewards(const MdpSpec& spec, const Policy& policy);

} // namespace bdrl
