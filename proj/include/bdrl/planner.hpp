#pragma once

// Exact average-reward evaluation and optimization on the birth-death class.

#include "bdrl/mdp.hpp"
#include "bdrl/tridiagonal.hpp"

#include <vector>

namespace bdrl {

struct StationaryMeasure {
    std::vector<double> probabilities;
    /// Natural logs of the probabilities; finite even where probabilities underflow.
    std::vector<double> log_probabilities;

    std::size_t size() const noexcept { return probabilities.size(); }
    double operator[](std::size_t s) const { return probabilities[s]; }
};

/// Product-form (detailed balance) stationary law, built in log space.
StationaryMeasure stationary_measure(const MdpSpec& spec, const Policy& policy);

/// max_s |m(s) lambda_s / U - m(s+1) (pi(s+1) + mu (s+1)) / U|
double detailed_balance_residual(const MdpSpec& spec, const Policy& policy, const StationaryMeasure& m);

/// Gain, bias (anchored at h(0) = 0) and derived quantities for one policy.
struct SolveResult {
    double gain = 0.0;
    std::vector<double> bias;
    /// variations[s] = h(s) - h(s-1) for s >= 1; variations[0] is 0 and unused.
    std::vector<double> variations;
    double span = 0.0;
    Policy policy;
    StationaryMeasure measure;
    /// Policy-iteration sweeps (0 for a plain evaluation).
    int iterations = 0;
};

SolveResult gain_and_bias(const MdpSpec& spec, const Policy& policy);

/// max_s |r(s, pi(s)) - gain + (P h)(s) - h(s)|
double bellman_residual(const MdpSpec& spec, const SolveResult& result);

/// Tie tolerance for greedy action choice; the smallest speed wins among ties.
inline constexpr double kActionTieTolerance = 1e-12;

/// Policy iteration from the zero-speed policy.
SolveResult optimal_policy(const MdpSpec& spec, int max_iterations = 1000);

struct BiasVariations {
    std::vector<double> variations;
    double span = 0.0;
};

BiasVariations bias_variations(const SolveResult& result);

/// Irreducibility precondition shared by the solvers: lambda > 0 and mu > 0.
void require_irreducible(const MdpSpec& spec);

} // namespace bdrl
