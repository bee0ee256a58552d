#pragma once

// UCRL2 restricted to birth-death supports: counts, empirical estimates,
// confidence radii, extended value iteration and the count-doubling
// episode schedule.

#include "bdrl/mdp.hpp"

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdrl {

enum class ConfidenceMode { classic, tweaked };
/// Stopping scale of extended value iteration: r_max/sqrt(t_k) or 1/sqrt(t_k).
enum class EviAccuracy { rmax_scaled, unit };

const char* to_string(ConfidenceMode mode) noexcept;
ConfidenceMode parse_confidence_mode(const std::string& text);

struct LearnerConfig {
    ConfidenceMode mode = ConfidenceMode::tweaked;
    /// Only read in classic mode.
    double delta = 0.05;
    /// Must be positive; the harness fills it from the spec when left at 0.
    double r_max_known = 0.0;
    EviAccuracy evi_accuracy = EviAccuracy::rmax_scaled;
    int max_evi_iterations = 200000;
    /// Damping weight of the aperiodicity fallback.
    double aperiodicity_kappa = 0.01;

    /// Throws std::invalid_argument.
    void validate() const;
};

struct ConfidenceRadii {
    double reward = 0.0;
    double transition = 0.0;
};

/// Radii for a pair visited `count` times before episode start t_k.
ConfidenceRadii confidence_radii(const LearnerConfig& config, double t_k, double count, int num_states,
                                 int num_actions);

/// Three slots for next states s-1, s, s+1; slots outside the state space stay 0.
using LocalRow = std::array<double, 3>;

struct Estimates {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> reward;
    std::vector<LocalRow> transition;

    std::size_t index(State s, Action a) const noexcept {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) + static_cast<std::size_t>(a);
    }
};

struct RadiiTable {
    std::vector<double> reward;
    std::vector<double> transition;
};

/// Counts and sums kept by the learner. Pair index is s * A + a.
struct LearnerState {
    int num_states = 0;
    int num_actions = 0;
    std::vector<long> visit_counts;        ///< N_t(s,a)
    std::vector<long> start_counts;        ///< N_{t_k}(s,a)
    std::vector<long> episode_counts;      ///< nu_k(s,a)
    std::vector<double> reward_sums;
    std::vector<std::array<long, 3>> transition_counts;
    int episode = 0;                       ///< k, 0 before the first episode
    long episode_start = 0;                ///< t_k
    long time = 1;                         ///< t
    std::vector<Action> policy;            ///< current optimistic policy

    LearnerState() = default;
    LearnerState(int num_states, int num_actions);

    std::size_t index(State s, Action a) const noexcept {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) + static_cast<std::size_t>(a);
    }
};

/// r_hat = sums / max{1,N}; p_hat = counts / max{1,N}, uniform on the support when N = 0.
Estimates empirical_estimates(const LearnerState& state);

/// Radii of every pair from the counts in `state.visit_counts`, evaluated at time t.
RadiiTable radii_table(const LearnerConfig& config, const LearnerState& state, double t);

/// Structural support of pair (s, .) in a chain with num_states states.
Support local_support(int num_states, State s) noexcept;

/**
 * Optimistic distribution in the L1 ball of radius eps around p_hat.
 * p_hat and u are dense over all states; mass stays on `support`.
 * Moves min(eps/2, 1 - p_hat(best)) onto the best-valued state and removes
 * it from the worst-valued states first.
 */
std::vector<double> inner_max(std::span<const double> p_hat, double eps, std::span<const double> u,
                              Support support);

/// Same procedure on compact arrays of length n (n <= 3); returns q . u.
double inner_max_local(const double* p_hat, double eps, const double* u, int n, double* q);

struct EviResult {
    std::vector<Action> policy;
    double optimistic_gain = 0.0;  ///< midpoint of the range of u_{i+1} - u_i
    std::vector<double> values;
    int iterations = 0;
    bool converged = false;
    bool damped = false;           ///< aperiodicity fallback was used
    double final_span = 0.0;
    double threshold = 0.0;
};

class EviError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double evi_threshold(const LearnerConfig& config, double t_k);

/// Extended value iteration from u_0 = 0 with rewards capped at r_max_known.
/// Throws EviError if neither the plain nor the damped iteration stops.
EviResult extended_value_iteration(const Estimates& estimates, const RadiiTable& radii, double t_k,
                                   const LearnerConfig& config);

/// True iff every pair satisfies |r_hat - r| <= eps_r and ||p_hat - P||_1 <= eps_p.
bool membership_check(const MdpSpec& spec, const Estimates& estimates, const RadiiTable& radii);
bool membership_check(const MdpSpec& spec, const LearnerState& state, const RadiiTable& radii);

struct Observation {
    State state = 0;
    Action action = 0;
    double reward = 0.0;
    State next = 0;
};

struct EpisodeRecord {
    int k = 0;
    long start = 0;                 ///< t_k
    long length = 0;                ///< filled when the episode closes
    double optimistic_gain = 0.0;
    int evi_iterations = 0;
    bool evi_damped = false;
    bool membership = true;         ///< set by the harness, unknown to the learner
    std::size_t min_count_pair = 0; ///< argmin N_{t_k}(s,a), smallest index on ties
    long min_count = 0;
    long min_count_visits = 0;      ///< nu_k of that pair
};

class Ucrl2 {
public:
    Ucrl2(int num_states, int num_actions, LearnerConfig config);

    /// Records (s_{t-1}, a_{t-1}, r_{t-1}, s_t) and advances time.
    void observe(const Observation& obs);
    /// Starts a new episode when the doubling test fires, then returns pi_k(s_t).
    Action act(State s_t);
    Action next_action(State s_t, const std::optional<Observation>& last = std::nullopt);
    /// Closes the running episode's bookkeeping at the end of a run.
    void finish();

    const LearnerState& state() const noexcept { return state_; }
    const LearnerConfig& config() const noexcept { return config_; }
    const Estimates& estimates() const noexcept { return estimates_; }
    const RadiiTable& radii() const noexcept { return radii_; }
    const EviResult& last_evi() const noexcept { return evi_; }
    std::vector<EpisodeRecord>& episodes() noexcept { return episodes_; }
    const std::vector<EpisodeRecord>& episodes() const noexcept { return episodes_; }

    /// sum_k nu_k(s,a) / sqrt(max{1, N_{t_k}(s,a)}) over closed episodes.
    const std::vector<double>& visit_ratio_sums() const noexcept { return ratio_sums_; }

private:
    void start_episode();
    void close_episode();

    LearnerConfig config_;
    LearnerState state_;
    Estimates estimates_;
    RadiiTable radii_;
    EviResult evi_;
    std::vector<EpisodeRecord> episodes_;
    std::vector<double> ratio_sums_;
    bool finished_ = false;
};

} // namespace bdrl
