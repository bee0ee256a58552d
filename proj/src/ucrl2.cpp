#include "bdrl/ucrl2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bdrl {

const char* to_string(ConfidenceMode mode) noexcept {
    return mode == ConfidenceMode::classic ? "classic" : "tweaked";
}

ConfidenceMode parse_confidence_mode(const std::string& text) {
    if (text == "classic") return ConfidenceMode::classic;
    if (text == "tweaked") return ConfidenceMode::tweaked;
    throw std::invalid_argument("unknown confidence mode '" + text + "' (expected classic or tweaked)");
}

void LearnerConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("learner delta must lie in (0,1)");
    if (!(r_max_known > 0.0) || !std::isfinite(r_max_known))
        throw std::invalid_argument("learner r_max_known must be positive");
    if (max_evi_iterations < 1) throw std::invalid_argument("max_evi_iterations must be positive");
    if (!(aperiodicity_kappa > 0.0 && aperiodicity_kappa < 1.0))
        throw std::invalid_argument("aperiodicity_kappa must lie in (0,1)");
}

ConfidenceRadii confidence_radii(const LearnerConfig& config, double t_k, double count, int num_states,
                                 int num_actions) {
    if (!(t_k >= 1.0)) throw std::invalid_argument("confidence_radii: t_k must be at least 1");
    const double n = std::max(1.0, count);
    const double S = num_states;
    const double A = num_actions;
    const double r_max = config.r_max_known;
    ConfidenceRadii out;
    if (config.mode == ConfidenceMode::classic) {
        out.reward = r_max * std::sqrt(7.0 * std::log(2.0 * S * A * t_k / config.delta) / (2.0 * n));
        out.transition = std::sqrt(14.0 * S * std::log(2.0 * A * t_k / config.delta) / n);
    } else {
        out.reward = r_max * std::sqrt(2.0 * std::log(2.0 * A * t_k) / n);
        out.transition = std::sqrt(8.0 * std::log(2.0 * A * t_k) / n);
    }
    out.reward = std::min(out.reward, r_max);
    out.transition = std::min(out.transition, 2.0);
    return out;
}

LearnerState::LearnerState(int S, int A)
    : num_states(S), num_actions(A) {
    const auto pairs = static_cast<std::size_t>(S) * static_cast<std::size_t>(A);
    visit_counts.assign(pairs, 0);
    start_counts.assign(pairs, 0);
    episode_counts.assign(pairs, 0);
    reward_sums.assign(pairs, 0.0);
    transition_counts.assign(pairs, {0, 0, 0});
    policy.assign(static_cast<std::size_t>(S), 0);
}

Support local_support(int num_states, State s) noexcept {
    return Support{s > 0 ? s - 1 : 0, s + 1 < num_states ? s + 1 : s};
}

Estimates empirical_estimates(const LearnerState& st) {
    Estimates e;
    e.num_states = st.num_states;
    e.num_actions = st.num_actions;
    const std::size_t pairs = st.visit_counts.size();
    e.reward.assign(pairs, 0.0);
    e.transition.assign(pairs, {0.0, 0.0, 0.0});
    for (State s = 0; s < st.num_states; ++s) {
        const Support sup = local_support(st.num_states, s);
        for (Action a = 0; a < st.num_actions; ++a) {
            const std::size_t i = st.index(s, a);
            const long n = st.visit_counts[i];
            const double denom = static_cast<double>(std::max(1L, n));
            e.reward[i] = st.reward_sums[i] / denom;
            LocalRow& row = e.transition[i];
            for (int slot = 0; slot < 3; ++slot) {
                const State next = s - 1 + slot;
                if (!sup.contains(next)) continue;
                row[static_cast<std::size_t>(slot)] =
                    n == 0 ? 1.0 / sup.size() : static_cast<double>(st.transition_counts[i][static_cast<std::size_t>(slot)]) / denom;
            }
        }
    }
    return e;
}

namespace {

// Positions 0..n-1 sorted by decreasing u; ties keep the lower position first.
void order_by_value(const double* u, int n, int* order) {
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order, order + n, [u](int a, int b) { return u[a] > u[b]; });
}

double shift_mass(const double* p, double eps, const double* u, const int* order, int n, double* q) {
    for (int i = 0; i < n; ++i) q[i] = p[i];
    const int best = order[0];
    double excess = std::min(eps / 2.0, 1.0 - p[best]);
    if (excess > 0.0) {
        q[best] = p[best] + excess;
        for (int l = n - 1; l >= 1 && excess > 0.0; --l) {
            const int pos = order[l];
            const double take = std::min(q[pos], excess);
            q[pos] -= take;
            excess -= take;
        }
    }
    double value = 0.0;
    for (int i = 0; i < n; ++i) value += q[i] * u[i];
    return value;
}

} // namespace

double inner_max_local(const double* p_hat, double eps, const double* u, int n, double* q) {
    int order[3];
    order_by_value(u, n, order);
    return shift_mass(p_hat, eps, u, order, n, q);
}

std::vector<double> inner_max(std::span<const double> p_hat, double eps, std::span<const double> u,
                              Support support) {
    if (p_hat.size() != u.size()) throw std::invalid_argument("inner_max: size mismatch");
    const int n = support.size();
    if (n < 1 || n > 3 || support.lo < 0 || static_cast<std::size_t>(support.hi) >= u.size())
        throw std::invalid_argument("inner_max: support must be 1 to 3 states inside the state space");
    double p[3], uu[3], q[3];
    for (int i = 0; i < n; ++i) {
        p[i] = p_hat[static_cast<std::size_t>(support.lo + i)];
        uu[i] = u[static_cast<std::size_t>(support.lo + i)];
    }
    inner_max_local(p, eps, uu, n, q);
    std::vector<double> out(u.size(), 0.0);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(support.lo + i)] = q[i];
    return out;
}

double evi_threshold(const LearnerConfig& config, double t_k) {
    const double scale = config.evi_accuracy == EviAccuracy::rmax_scaled ? config.r_max_known : 1.0;
    return scale / std::sqrt(t_k);
}

namespace {

struct EviPair {
    double reward;     // optimistic reward, capped at r_max
    double radius;
    double p[3];       // compact over the support
};

EviResult run_evi(const Estimates& est, const RadiiTable& radii, double t_k, const LearnerConfig& config,
                  double kappa) {
    const int S = est.num_states;
    const int A = est.num_actions;
    const double threshold = evi_threshold(config, t_k);
    const double keep = kappa;               // weight on the previous iterate
    const double scale = 1.0 - kappa;        // the damped operator has gain scale * rho

    std::vector<EviPair> pairs(est.reward.size());
    std::vector<int> lo(static_cast<std::size_t>(S)), width(static_cast<std::size_t>(S));
    for (State s = 0; s < S; ++s) {
        const Support sup = local_support(S, s);
        lo[static_cast<std::size_t>(s)] = sup.lo;
        width[static_cast<std::size_t>(s)] = sup.size();
        for (Action a = 0; a < A; ++a) {
            const std::size_t i = est.index(s, a);
            EviPair& pr = pairs[i];
            pr.reward = std::min(est.reward[i] + radii.reward[i], config.r_max_known);
            pr.radius = radii.transition[i];
            for (int j = 0; j < sup.size(); ++j)
                pr.p[j] = est.transition[i][static_cast<std::size_t>(sup.lo + j - (s - 1))];
        }
    }

    EviResult out;
    out.threshold = threshold;
    out.damped = kappa > 0.0;
    out.policy.assign(static_cast<std::size_t>(S), 0);
    std::vector<double> u(static_cast<std::size_t>(S), 0.0), next(static_cast<std::size_t>(S));
    std::vector<double> candidates(static_cast<std::size_t>(A));

    for (int it = 1; it <= config.max_evi_iterations; ++it) {
        for (State s = 0; s < S; ++s) {
            const int n = width[static_cast<std::size_t>(s)];
            const double* uu = u.data() + lo[static_cast<std::size_t>(s)];
            int order[3];
            order_by_value(uu, n, order);
            double best = -std::numeric_limits<double>::infinity();
            for (Action a = 0; a < A; ++a) {
                const EviPair& pr = pairs[est.index(s, a)];
                double q[3];
                const double v = pr.reward + shift_mass(pr.p, pr.radius, uu, order, n, q);
                candidates[static_cast<std::size_t>(a)] = v;
                best = std::max(best, v);
            }
            Action choice = 0;
            while (candidates[static_cast<std::size_t>(choice)] < best - 1e-12) ++choice;
            out.policy[static_cast<std::size_t>(s)] = choice;
            next[static_cast<std::size_t>(s)] = kappa > 0.0 ? scale * best + keep * u[static_cast<std::size_t>(s)] : best;
        }

        double dmin = std::numeric_limits<double>::infinity();
        double dmax = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < next.size(); ++s) {
            const double d = next[s] - u[s];
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
        dmin /= scale;
        dmax /= scale;
        out.iterations = it;
        out.final_span = dmax - dmin;

        const double shift = *std::min_element(next.begin(), next.end());
        if (out.final_span < threshold) {
            out.converged = true;
            out.optimistic_gain = 0.5 * (dmax + dmin);
            out.values = next;
            return out;
        }
        // the update commutes with constant shifts; keep u anchored at 0
        for (std::size_t s = 0; s < next.size(); ++s) u[s] = next[s] - shift;
    }
    out.values = u;
    return out;
}

} // namespace

EviResult extended_value_iteration(const Estimates& estimates, const RadiiTable& radii, double t_k,
                                   const LearnerConfig& config) {
    if (radii.reward.size() != estimates.reward.size() || radii.transition.size() != estimates.reward.size())
        throw std::invalid_argument("extended_value_iteration: radii table size mismatch");
    EviResult plain = run_evi(estimates, radii, t_k, config, 0.0);
    if (plain.converged) return plain;
    EviResult damped = run_evi(estimates, radii, t_k, config, config.aperiodicity_kappa);
    if (damped.converged) return damped;
    std::ostringstream os;
    os << "extended value iteration did not stop within " << config.max_evi_iterations
       << " sweeps (t_k=" << t_k << ", span=" << damped.final_span << ", threshold=" << damped.threshold << ")";
    throw EviError(os.str());
}

RadiiTable radii_table(const LearnerConfig& config, const LearnerState& state, double t) {
    RadiiTable out;
    out.reward.resize(state.visit_counts.size());
    out.transition.resize(state.visit_counts.size());
    for (std::size_t i = 0; i < out.reward.size(); ++i) {
        const ConfidenceRadii r = confidence_radii(config, t, static_cast<double>(state.visit_counts[i]),
                                                   state.num_states, state.num_actions);
        out.reward[i] = r.reward;
        out.transition[i] = r.transition;
    }
    return out;
}

bool membership_check(const MdpSpec& spec, const Estimates& est, const RadiiTable& radii) {
    const int S = spec.num_states();
    const int A = spec.num_actions();
    if (est.num_states != S || est.num_actions != A) throw std::invalid_argument("membership_check: shape mismatch");
    for (State s = 0; s < S; ++s) {
        for (Action a = 0; a < A; ++a) {
            const std::size_t i = est.index(s, a);
            if (std::abs(est.reward[i] - mean_reward(spec, s, a)) > radii.reward[i]) return false;
            const TransitionRow row = transition_row(spec, s, a);
            const LocalRow& p = est.transition[i];
            const double l1 = std::abs(p[0] - (s > 0 ? row.down : 0.0)) + std::abs(p[1] - row.stay) +
                              std::abs(p[2] - (s + 1 < S ? row.up : 0.0));
            if (l1 > radii.transition[i]) return false;
        }
    }
    return true;
}

bool membership_check(const MdpSpec& spec, const LearnerState& state, const RadiiTable& radii) {
    return membership_check(spec, empirical_estimates(state), radii);
}

Ucrl2::Ucrl2(int num_states, int num_actions, LearnerConfig config)
    : config_(config), state_(num_states, num_actions) {
    if (num_states < 2 || num_actions < 1) throw std::invalid_argument("Ucrl2: need S >= 2 and A >= 1");
    config_.validate();
    ratio_sums_.assign(state_.visit_counts.size(), 0.0);
}

void Ucrl2::observe(const Observation& obs) {
    if (finished_) throw std::logic_error("Ucrl2::observe after finish");
    if (obs.state < 0 || obs.state >= state_.num_states || obs.action < 0 || obs.action >= state_.num_actions)
        throw std::out_of_range("Ucrl2::observe: pair out of range");
    const int slot = obs.next - obs.state + 1;
    if (slot < 0 || slot > 2 || obs.next < 0 || obs.next >= state_.num_states)
        throw std::invalid_argument("Ucrl2::observe: transition outside the birth-death support");
    const std::size_t i = state_.index(obs.state, obs.action);
    ++state_.visit_counts[i];
    ++state_.episode_counts[i];
    state_.reward_sums[i] += obs.reward;
    ++state_.transition_counts[i][static_cast<std::size_t>(slot)];
    ++state_.time;
}

Action Ucrl2::act(State s_t) {
    if (s_t < 0 || s_t >= state_.num_states) throw std::out_of_range("Ucrl2::act: state out of range");
    if (state_.episode == 0) {
        start_episode();
    } else {
        const std::size_t i = state_.index(s_t, state_.policy[static_cast<std::size_t>(s_t)]);
        if (state_.episode_counts[i] >= std::max(1L, state_.start_counts[i])) {
            close_episode();
            start_episode();
        }
    }
    return state_.policy[static_cast<std::size_t>(s_t)];
}

Action Ucrl2::next_action(State s_t, const std::optional<Observation>& last) {
    if (last) observe(*last);
    return act(s_t);
}

void Ucrl2::close_episode() {
    EpisodeRecord& rec = episodes_.back();
    rec.length = state_.time - state_.episode_start;
    rec.min_count_visits = state_.episode_counts[rec.min_count_pair];
    for (std::size_t i = 0; i < ratio_sums_.size(); ++i) {
        ratio_sums_[i] += static_cast<double>(state_.episode_counts[i]) /
                          std::sqrt(static_cast<double>(std::max(1L, state_.start_counts[i])));
    }
}

void Ucrl2::start_episode() {
    state_.start_counts = state_.visit_counts;
    std::fill(state_.episode_counts.begin(), state_.episode_counts.end(), 0L);
    ++state_.episode;
    state_.episode_start = state_.time;
    const double t_k = static_cast<double>(state_.time);

    estimates_ = empirical_estimates(state_);
    radii_ = radii_table(config_, state_, t_k);
    evi_ = extended_value_iteration(estimates_, radii_, t_k, config_);
    state_.policy = evi_.policy;

    EpisodeRecord rec;
    rec.k = state_.episode;
    rec.start = state_.episode_start;
    rec.optimistic_gain = evi_.optimistic_gain;
    rec.evi_iterations = evi_.iterations;
    rec.evi_damped = evi_.damped;
    rec.min_count_pair = static_cast<std::size_t>(
        std::min_element(state_.start_counts.begin(), state_.start_counts.end()) - state_.start_counts.begin());
    rec.min_count = state_.start_counts[rec.min_count_pair];
    episodes_.push_back(rec);
}

void Ucrl2::finish() {
    if (finished_ || state_.episode == 0) return;
    close_episode();
    finished_ = true;
}

} // namespace bdrl
