#pragma once

// Brute-force reference computations for tests and the verify command.
// Dense, slow and independent of the fast paths; nothing in the production
// code calls into this namespace.

#include "bdrl/mdp.hpp"
#include "bdrl/planner.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bdrl::oracle {

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Matrix = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting. Throws OracleError when singular.
std::vector<double> dense_solve(Matrix a, std::vector<double> b);
Matrix dense_inverse(const Matrix& a);
double inf_norm(const Matrix& a);

/// Full S x S transition matrix of the chain under a policy.
Matrix dense_kernel(const MdpSpec& spec, const Policy& policy);

/// Iterates m <- mP from the uniform law until the L1 step is below tol.
/// Throws OracleError for reducible kernels or when max_iterations is reached.
StationaryMeasure power_iteration_measure(const BirthDeathKernel& kernel, double tol = 1e-13,
                                          long max_iterations = 1000000);

/// Gain and bias (h(0) = 0) from one dense solve of the Poisson equation.
struct DenseEvaluation {
    double gain = 0.0;
    std::vector<double> bias;
};
DenseEvaluation dense_gain_bias(const MdpSpec& spec, const Policy& policy);

/// E[time to reach target] from every state, dense first-passage solve.
std::vector<double> dense_hitting_times(const MdpSpec& spec, const Policy& policy, State target);

/// All (A_max+1)^S deterministic policies in lexicographic order. Throws OracleError above cap.
std::vector<Policy> enumerate_policies(const MdpSpec& spec, long cap = 100000);

/// max over s != s' of min over policies of E[tau_{s -> s'}].
double enumerate_diameter(const MdpSpec& spec, long cap = 100000);

/// Best gain over all deterministic policies.
double enumerate_optimal_gain(const MdpSpec& spec, long cap = 100000);

struct GridMax {
    std::vector<double> q;   ///< dense over all states
    double value = 0.0;      ///< q . u
    bool in_ball = true;     ///< false when no grid point was inside the ball and p_hat was rounded
};

/// Exhaustive search over grid distributions on `support` inside the L1 ball around p_hat.
GridMax grid_inner_max(std::span<const double> p_hat, double eps, std::span<const double> u, Support support,
                       double step);

struct DistributionTrajectory {
    /// marginals[t][s] = P(s_t = s), t = 0..T
    std::vector<std::vector<double>> marginals;
};

DistributionTrajectory exact_distribution_propagation(const MdpSpec& spec, const Policy& policy, long horizon,
                                                      std::span<const double> initial);

/// Point mass at state 0.
std::vector<double> point_mass(int num_states, State s = 0);

/// max over (t, s) of P(s_t >= s) - P(s'_t >= s); <= 0 when `lower` is dominated by `upper`.
double tail_excess(const DistributionTrajectory& lower, const DistributionTrajectory& upper);

struct VisitTail {
    /// lhs[s] = sum_{t < T} sum_{s' >= s} f(s') P(s_t = s')  (expected weighted visits)
    std::vector<double> lhs;
    /// rhs[s] = T sum_{s' >= s} f(s') m(s')
    std::vector<double> rhs;
};

/// Weighted visit tails over the first T marginals against a reference stationary law.
VisitTail visit_tail(const DistributionTrajectory& traj, std::span<const double> measure,
                     const std::function<double(State)>& f);

} // namespace bdrl::oracle
