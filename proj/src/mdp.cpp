#include "bdrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bdrl {

const char* to_string(SpecErrc code) noexcept {
    switch (code) {
    case SpecErrc::non_finite: return "non_finite";
    case SpecErrc::negative_parameter: return "negative_parameter";
    case SpecErrc::zero_mu: return "zero_mu";
    case SpecErrc::lambda_above_max: return "lambda_above_max";
    case SpecErrc::mu_above_max: return "mu_above_max";
    case SpecErrc::too_few_states: return "too_few_states";
    case SpecErrc::energy_table_size: return "energy_table_size";
    case SpecErrc::energy_decreasing: return "energy_decreasing";
    case SpecErrc::energy_nonconvex: return "energy_nonconvex";
    case SpecErrc::invalid_policy: return "invalid_policy";
    }
    return "unknown";
}

namespace {

[[noreturn]] void fail(SpecErrc code, const std::string& msg) {
    throw SpecError(code, std::string(to_string(code)) + ": " + msg);
}

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) fail(SpecErrc::non_finite, std::string(name) + " is not finite");
}

void require_nonnegative(double x, const char* name) {
    if (x < 0.0) fail(SpecErrc::negative_parameter, std::string(name) + " is negative");
}

} // namespace

MdpSpec MdpSpec::build(const SpecParams& p) {
    require_finite(p.lambda, "lambda");
    require_finite(p.mu, "mu");
    require_finite(p.deadline_cost, "deadline_cost");
    require_finite(p.lambda_max, "lambda_max");
    require_finite(p.mu_max, "mu_max");
    for (double w : p.energy_table) require_finite(w, "energy_table entry");

    require_nonnegative(p.lambda, "lambda");
    require_nonnegative(p.mu, "mu");
    require_nonnegative(p.deadline_cost, "deadline_cost");
    require_nonnegative(p.lambda_max, "lambda_max");
    require_nonnegative(p.mu_max, "mu_max");
    if (p.max_speed < 0) fail(SpecErrc::negative_parameter, "max_speed is negative");

    // r_max = C + w(A_max)/mu needs mu > 0
    if (p.mu == 0.0) fail(SpecErrc::zero_mu, "mu must be positive");
    if (p.lambda > p.lambda_max) fail(SpecErrc::lambda_above_max, "lambda exceeds lambda_max");
    if (p.mu > p.mu_max) fail(SpecErrc::mu_above_max, "mu exceeds mu_max");
    if (p.num_states < 2) fail(SpecErrc::too_few_states, "num_states must be at least 2");

    const auto& w = p.energy_table;
    if (w.size() != static_cast<std::size_t>(p.max_speed) + 1) {
        std::ostringstream os;
        os << "energy_table has " << w.size() << " entries, expected " << p.max_speed + 1;
        fail(SpecErrc::energy_table_size, os.str());
    }
    if (w[0] < 0.0) fail(SpecErrc::negative_parameter, "w(0) is negative");
    for (std::size_t a = 1; a < w.size(); ++a) {
        if (w[a] < w[a - 1]) {
            std::ostringstream os;
            os << "w(" << a << ") < w(" << a - 1 << ")";
            fail(SpecErrc::energy_decreasing, os.str());
        }
    }
    for (std::size_t a = 1; a + 1 < w.size(); ++a) {
        const double second = w[a + 1] - 2.0 * w[a] + w[a - 1];
        const double scale = std::max({1.0, std::abs(w[a + 1]), std::abs(w[a - 1])});
        if (second < -1e-12 * scale) {
            std::ostringstream os;
            os << "second difference at a=" << a << " is " << second;
            fail(SpecErrc::energy_nonconvex, os.str());
        }
    }
    return MdpSpec(p);
}

MdpSpec::MdpSpec(SpecParams params) : params_(std::move(params)) {
    const int S = params_.num_states;
    uniformization_ = params_.lambda_max + (S - 1) * params_.mu_max + params_.max_speed;
    r_max_ = params_.deadline_cost + params_.energy_table.back() / params_.mu;
    arrival_.resize(static_cast<std::size_t>(S));
    for (int i = 0; i < S; ++i)
        arrival_[static_cast<std::size_t>(i)] = params_.lambda * (1.0 - static_cast<double>(i) / (S - 1));
    arrival_.back() = 0.0;
}

Policy::Policy(const MdpSpec& spec, std::vector<Action> speeds) : speeds_(std::move(speeds)) {
    if (speeds_.size() != static_cast<std::size_t>(spec.num_states()))
        throw SpecError(SpecErrc::invalid_policy, "policy length does not match num_states");
    for (Action a : speeds_) {
        if (!spec.valid_action(a))
            throw SpecError(SpecErrc::invalid_policy, "policy speed out of range");
    }
}

Policy::Policy(std::vector<Action> speeds, int num_actions) : speeds_(std::move(speeds)) {
    for (Action a : speeds_) {
        if (a < 0 || a >= num_actions) throw SpecError(SpecErrc::invalid_policy, "policy speed out of range");
    }
}

Policy Policy::zero(const MdpSpec& spec) {
    return Policy(spec, std::vector<Action>(static_cast<std::size_t>(spec.num_states()), 0));
}

Policy Policy::full_speed(const MdpSpec& spec) {
    return Policy(spec, std::vector<Action>(static_cast<std::size_t>(spec.num_states()), spec.max_speed()));
}

std::vector<State> Support::states() const {
    std::vector<State> out;
    for (State s = lo; s <= hi; ++s) out.push_back(s);
    return out;
}

namespace {

void check_pair(const MdpSpec& spec, State s, Action a) {
    if (!spec.valid_state(s)) throw std::out_of_range("state " + std::to_string(s) + " out of range");
    if (!spec.valid_action(a)) throw std::out_of_range("action " + std::to_string(a) + " out of range");
}

} // namespace

Support support_of(const MdpSpec& spec, State s, Action a) {
    check_pair(spec, s, a);
    return Support{s > 0 ? s - 1 : 0, s + 1 < spec.num_states() ? s + 1 : s};
}

double TransitionRow::probability(State to) const noexcept {
    if (to == from - 1) return down;
    if (to == from) return stay;
    if (to == from + 1) return up;
    return 0.0;
}

std::vector<double> TransitionRow::dense(int num_states) const {
    std::vector<double> row(static_cast<std::size_t>(num_states), 0.0);
    if (from > 0) row[static_cast<std::size_t>(from - 1)] = down;
    row[static_cast<std::size_t>(from)] = stay;
    if (from + 1 < num_states) row[static_cast<std::size_t>(from + 1)] = up;
    return row;
}

TransitionRow transition_row(const MdpSpec& spec, State s, Action a) {
    check_pair(spec, s, a);
    const double U = spec.uniformization();
    TransitionRow row;
    row.from = s;
    row.up = s + 1 < spec.num_states() ? spec.arrival_rate(s) / U : 0.0;
    row.down = s > 0 ? spec.departure_rate(s, a) / U : 0.0;
    // residual keeps the row sum at exactly 1
    row.stay = 1.0 - row.up - row.down;
    return row;
}

double mean_reward(const MdpSpec& spec, State s, Action a) {
    check_pair(spec, s, a);
    const double U = spec.uniformization();
    return spec.r_max() - spec.energy(a) / U - spec.deadline_cost() * s * spec.mu() / U;
}

StepOutcome sample_step(const MdpSpec& spec, State s, Action a, RngStream& rng) {
    const TransitionRow row = transition_row(spec, s, a);
    const double U = spec.uniformization();
    StepOutcome out;

    const double x = rng.uniform();
    if (x < row.down)
        out.next = s - 1;
    else if (x < row.down + row.up)
        out.next = s + 1;
    else
        out.next = s;

    const double miss_probability = s * spec.mu() / U;
    out.missed_deadline = rng.uniform() < miss_probability;
    out.reward = spec.r_max() - spec.energy(a) / U - (out.missed_deadline ? spec.deadline_cost() : 0.0);
    return out;
}

BirthDeathKernel kernel_of(const MdpSpec& spec, const Policy& policy) {
    const int S = spec.num_states();
    if (policy.size() != static_cast<std::size_t>(S))
        throw std::invalid_argument("policy length does not match num_states");
    BirthDeathKernel k;
    k.down.resize(static_cast<std::size_t>(S));
    k.stay.resize(static_cast<std::size_t>(S));
    k.up.resize(static_cast<std::size_t>(S));
    for (State s = 0; s < S; ++s) {
        const TransitionRow row = transition_row(spec, s, policy(s));
        const auto i = static_cast<std::size_t>(s);
        k.down[i] = row.down;
        k.stay[i] = row.stay;
        k.up[i] = row.up;
    }
    return k;
}

std::vector<double> policy_rewards(const MdpSpec& spec, const Policy& policy) {
    std::vector<double> r(policy.size());
    for (std::size_t s = 0; s < r.size(); ++s) r[s] = mean_reward(spec, static_cast<State>(s), policy(static_cast<State>(s)));
    return r;
}

} // namespace bdrl
