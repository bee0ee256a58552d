#include "bdrl/planner.hpp"

#include "bdrl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace bdrl {

void require_irreducible(const MdpSpec& spec) {
    if (!(spec.lambda() > 0.0)) throw SolveError("chain is not irreducible: lambda = 0");
    if (!(spec.mu() > 0.0)) throw SolveError("chain is not irreducible: mu = 0");
}

namespace {

double log_sum_exp(const std::vector<double>& xs) {
    const double hi = *std::max_element(xs.begin(), xs.end());
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - hi);
    return hi + std::log(sum);
}

} // namespace

StationaryMeasure stationary_measure(const MdpSpec& spec, const Policy& policy) {
    require_irreducible(spec);
    const int S = spec.num_states();
    StationaryMeasure m;
    m.log_probabilities.resize(static_cast<std::size_t>(S));
    m.log_probabilities[0] = 0.0;
    for (State s = 0; s + 1 < S; ++s) {
        const double birth = spec.arrival_rate(s);
        const double death = spec.departure_rate(s + 1, policy(s + 1));
        m.log_probabilities[static_cast<std::size_t>(s + 1)] =
            m.log_probabilities[static_cast<std::size_t>(s)] + std::log(birth) - std::log(death);
    }
    const double log_z = log_sum_exp(m.log_probabilities);
    m.probabilities.resize(static_cast<std::size_t>(S));
    for (std::size_t s = 0; s < m.log_probabilities.size(); ++s) {
        m.log_probabilities[s] -= log_z;
        m.probabilities[s] = std::exp(m.log_probabilities[s]);
    }
    return m;
}

double detailed_balance_residual(const MdpSpec& spec, const Policy& policy, const StationaryMeasure& m) {
    const double U = spec.uniformization();
    double worst = 0.0;
    for (State s = 0; s + 1 < spec.num_states(); ++s) {
        const double flow_up = m[static_cast<std::size_t>(s)] * spec.arrival_rate(s) / U;
        const double flow_down = m[static_cast<std::size_t>(s + 1)] * spec.departure_rate(s + 1, policy(s + 1)) / U;
        worst = std::max(worst, std::abs(flow_up - flow_down));
    }
    return worst;
}

namespace {

void fill_variations(SolveResult& r) {
    const std::size_t S = r.bias.size();
    r.variations.assign(S, 0.0);
    for (std::size_t s = 1; s < S; ++s) r.variations[s] = r.bias[s] - r.bias[s - 1];
    const auto [lo, hi] = std::minmax_element(r.bias.begin(), r.bias.end());
    r.span = *hi - *lo;
}

} // namespace

SolveResult gain_and_bias(const MdpSpec& spec, const Policy& policy) {
    require_irreducible(spec);
    const int S = spec.num_states();
    const auto n = static_cast<std::size_t>(S);

    SolveResult out;
    out.policy = policy;
    out.measure = stationary_measure(spec, policy);
    const std::vector<double> r = policy_rewards(spec, policy);
    for (std::size_t s = 0; s < n; ++s) out.gain += r[s] * out.measure[s];

    // Rows 1..S-1 of (I - P) h = r - gain with h(0) = 0; row 0 is implied by the gain.
    const BirthDeathKernel k = kernel_of(spec, policy);
    out.bias.assign(n, 0.0);
    const std::size_t m = n - 1;
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t s = i + 1;
        sub[i] = -k.down[s];
        diag[i] = k.down[s] + k.up[s];
        sup[i] = -k.up[s];
        rhs[i] = r[s] - out.gain;
    }
    const std::vector<double> h = solve_tridiagonal(sub, diag, sup, rhs);
    std::copy(h.begin(), h.end(), out.bias.begin() + 1);
    fill_variations(out);

    const double residual = bellman_residual(spec, out);
    double scale = 1.0;
    for (double x : out.bias) scale = std::max(scale, std::abs(x));
    if (!(residual <= 1e-8 * scale)) {
        std::ostringstream os;
        os << "gain_and_bias: Bellman residual " << residual << " exceeds tolerance";
        throw SolveError(os.str());
    }
    return out;
}

double bellman_residual(const MdpSpec& spec, const SolveResult& result) {
    const BirthDeathKernel k = kernel_of(spec, result.policy);
    const std::vector<double> r = policy_rewards(spec, result.policy);
    std::vector<double> ph(result.bias.size());
    kernels::apply_right({k.down, k.stay, k.up}, result.bias, ph);
    double worst = 0.0;
    for (std::size_t s = 0; s < ph.size(); ++s)
        worst = std::max(worst, std::abs(r[s] - result.gain + ph[s] - result.bias[s]));
    return worst;
}

SolveResult optimal_policy(const MdpSpec& spec, int max_iterations) {
    require_irreducible(spec);
    const int S = spec.num_states();
    const int A = spec.num_actions();
    const double U = spec.uniformization();

    Policy current = Policy::zero(spec);
    std::set<std::vector<Action>> seen{current.speeds()};
    for (int it = 1; it <= max_iterations; ++it) {
        SolveResult eval = gain_and_bias(spec, current);
        std::vector<Action> next(static_cast<std::size_t>(S));
        for (State s = 0; s < S; ++s) {
            // q(s,a) - h(s) = r(s,a) + up (h(s+1) - h(s)) - down_a (h(s) - h(s-1))
            const double up_gain = s + 1 < S ? spec.arrival_rate(s) / U * eval.variations[static_cast<std::size_t>(s + 1)] : 0.0;
            const double dh = s > 0 ? eval.variations[static_cast<std::size_t>(s)] : 0.0;
            double best = -std::numeric_limits<double>::infinity();
            std::vector<double> q(static_cast<std::size_t>(A));
            for (Action a = 0; a < A; ++a) {
                const double down = s > 0 ? spec.departure_rate(s, a) / U : 0.0;
                q[static_cast<std::size_t>(a)] = mean_reward(spec, s, a) + up_gain - down * dh;
                best = std::max(best, q[static_cast<std::size_t>(a)]);
            }
            Action choice = 0;
            while (q[static_cast<std::size_t>(choice)] < best - kActionTieTolerance) ++choice;
            next[static_cast<std::size_t>(s)] = choice;
        }
        if (next == current.speeds()) {
            eval.iterations = it;
            return eval;
        }
        if (!seen.insert(next).second) throw SolveError("optimal_policy: policy iteration cycled");
        current = Policy(spec, std::move(next));
    }
    throw SolveError("optimal_policy: iteration cap exceeded");
}

BiasVariations bias_variations(const SolveResult& result) {
    BiasVariations out;
    const std::size_t S = result.bias.size();
    out.variations.assign(S, 0.0);
    double level = 0.0, lo = 0.0, hi = 0.0;
    for (std::size_t s = 1; s < S; ++s) {
        const double d = result.bias[s] - result.bias[s - 1];
        out.variations[s] = d;
        level += d;
        lo = std::min(lo, level);
        hi = std::max(hi, level);
    }
    // running extremes of the cumulative variations reproduce max h - min h
    out.span = hi - lo;
    return out;
}

} // namespace bdrl
