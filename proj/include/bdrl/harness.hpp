#pragma once

// Seeded experiment runner: regret traces, sweeps, aggregation, diagnostics
// and CSV/JSON export.

#include "bdrl/analytics.hpp"
#include "bdrl/mdp.hpp"
#include "bdrl/ucrl2.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdrl {

/// Powers of two up to the horizon, plus the horizon itself.
std::vector<long> default_checkpoints(long horizon);

struct RegretTrace {
    std::string spec_id;
    std::uint64_t seed = 0;
    int num_states = 0;
    int num_actions = 0;
    double optimal_gain = 0.0;
    std::vector<long> times;
    std::vector<double> realized_regret;   ///< t rho* - sum of realized rewards
    std::vector<double> pseudo_regret;     ///< t rho* - sum of mean rewards
    std::vector<int> episode_index;        ///< running episode at each checkpoint
    std::vector<bool> membership;          ///< true MDP inside the running confidence set
    std::vector<bool> current_membership;  ///< true MDP inside the set built from N_t at t; RunOptions::current_membership
    std::vector<EpisodeRecord> episodes;
    int num_episodes = 0;                  ///< K_T
    int membership_failures = 0;           ///< episodes whose confidence set missed the true MDP
    std::vector<double> visit_ratio_sums;  ///< per pair, see Ucrl2::visit_ratio_sums
    std::vector<long> final_counts;        ///< N_{T+1}(s,a)
    double wall_time = 0.0;                ///< seconds, never exported
};

/// Failure inside one run, tagged with the run's identity.
class RunError : public std::runtime_error {
public:
    RunError(const std::string& spec_id, std::uint64_t seed, const std::string& what)
        : std::runtime_error(spec_id + " (seed " + std::to_string(seed) + "): " + what), spec_id_(spec_id), seed_(seed) {}
    const std::string& spec_id() const noexcept { return spec_id_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::string spec_id_;
    std::uint64_t seed_;
};

struct RunOptions {
    std::string spec_id = "spec";
    /// Empty means default_checkpoints(horizon).
    std::vector<long> checkpoints;
    /// Cached optimal gain; computed by the planner when absent.
    std::optional<double> optimal_gain;
    bool check_membership = true;
    /// Also test the confidence set at each checkpoint t with counts N_t and radii at t.
    bool current_membership = false;
};

/// Simulates T steps from s = 0. The learner's r_max_known is taken from the spec when unset (<= 0).
RegretTrace run_experiment(const MdpSpec& spec, LearnerConfig config, long horizon, std::uint64_t seed,
                           const RunOptions& options = {});

struct GridPoint {
    std::string id;
    SpecParams spec;
    LearnerConfig learner;
    long horizon = 0;
    std::vector<long> checkpoints;
};

struct SweepOptions {
    int seeds = 1;
    std::uint64_t master_seed = 0;
    int parallelism = 1;
};

struct RunFailure {
    std::size_t point = 0;
    int seed_index = 0;
    std::string spec_id;
    std::uint64_t seed = 0;
    std::string message;
};

struct SweepResult {
    std::vector<RegretTrace> traces;   ///< ordered by (point, seed index)
    std::vector<RunFailure> failures;
};

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t point, int seed_index) noexcept;

SweepResult sweep(const std::vector<GridPoint>& grid, const SweepOptions& options);

/// Experiment grid document: {"points": [{"id", "spec", "learner", "T", "checkpoints"}]}.
std::vector<GridPoint> grid_from_json(const nlohmann::json& doc);
LearnerConfig learner_from_json(const nlohmann::json& doc);

struct TraceSummary {
    std::string spec_id;
    std::size_t num_traces = 0;
    std::vector<long> times;
    std::vector<double> mean_realized, se_realized;
    std::vector<double> mean_pseudo, se_pseudo;
    /// 10%, 50%, 90% quantiles per checkpoint
    std::vector<std::array<double, 3>> realized_quantiles, pseudo_quantiles;
    /// least-squares slope of log mean pseudo-regret against log t over [T/10, T]
    double slope = 0.0;
    int slope_points = 0;
};

/// Throws std::invalid_argument for fewer than two traces or mismatched checkpoints.
TraceSummary aggregate_traces(std::span<const RegretTrace> traces);

/// Slope of log(values) against log(times) over times >= t_min with positive values.
double fit_loglog_slope(std::span<const long> times, std::span<const double> values, double t_min,
                        int* points_used = nullptr);

struct EpisodeDiagnostics {
    int num_episodes = 0;
    double episode_bound = 0.0;   ///< SA log2(8T/SA)
    bool bound_applies = false;   ///< T > SA
    bool episodes_ok = true;
    int visit_sum_violations = 0; ///< pairs with sum_k nu_k/sqrt(max{1,N_tk}) > 3 sqrt(N_{T+1})
    double worst_visit_sum_ratio = 0.0;
    /// (k, nu_k(x_k,a_k) / (m_max(S-1) I_k)) for episodes longer than the threshold
    std::vector<std::pair<int, double>> worst_count_ratios;
};

EpisodeDiagnostics episode_diagnostics(const RegretTrace& trace, const MdpSpec& spec,
                                       long length_threshold = 0);

// ---- export ----

/// Shortest round-trip decimal form, '.' separator, locale independent.
std::string format_double(double x);

/// Header spec_id,seed,t,realized_regret,pseudo_regret,episode_index; one row per checkpoint.
void write_traces_csv(std::ostream& out, std::span<const RegretTrace> traces);
void write_traces_csv(const std::filesystem::path& path, std::span<const RegretTrace> traces);
/// Reads back the columns written by write_traces_csv.
std::vector<RegretTrace> read_traces_csv(std::istream& in);
std::vector<RegretTrace> read_traces_csv(const std::filesystem::path& path);

/// Header spec_id,seed,k,t_k,episode_length,rho_tilde,evi_iterations,membership_flag.
void write_episodes_csv(std::ostream& out, std::span<const RegretTrace> traces);

/// Aggregates plus bound overlays at every checkpoint.
nlohmann::json summary_json(const TraceSummary& summary, const MdpSpec& spec);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

} // namespace bdrl
