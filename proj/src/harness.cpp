#include "bdrl/harness.hpp"

#include "bdrl/planner.hpp"
#include "bdrl/spec_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace bdrl {

std::vector<long> default_checkpoints(long horizon) {
    std::vector<long> out;
    for (long t = 1; t <= horizon; t *= 2) {
        out.push_back(t);
        if (t > std::numeric_limits<long>::max() / 2) break;
    }
    if (out.empty() || out.back() != horizon) out.push_back(horizon);
    return out;
}

namespace {

std::vector<long> checked_checkpoints(std::vector<long> cps, long horizon) {
    if (cps.empty()) return default_checkpoints(horizon);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    if (cps.front() < 1 || cps.back() > horizon)
        throw std::invalid_argument("checkpoints must lie in [1, T]");
    return cps;
}

} // namespace

RegretTrace run_experiment(const MdpSpec& spec, LearnerConfig config, long horizon, std::uint64_t seed,
                           const RunOptions& options) {
    if (horizon < 1) throw std::invalid_argument("run_experiment: horizon must be positive");
    if (!(config.r_max_known > 0.0)) config.r_max_known = spec.r_max();
    const std::vector<long> cps = checked_checkpoints(options.checkpoints, horizon);
    const auto started = std::chrono::steady_clock::now();

    const int S = spec.num_states();
    const int A = spec.num_actions();
    const double rho = options.optimal_gain ? *options.optimal_gain : optimal_policy(spec).gain;

    std::vector<double> mean(static_cast<std::size_t>(S) * static_cast<std::size_t>(A));
    for (State s = 0; s < S; ++s)
        for (Action a = 0; a < A; ++a) mean[static_cast<std::size_t>(s * A + a)] = mean_reward(spec, s, a);

    RegretTrace trace;
    trace.spec_id = options.spec_id;
    trace.seed = seed;
    trace.num_states = S;
    trace.num_actions = A;
    trace.optimal_gain = rho;
    trace.times.reserve(cps.size());

    Ucrl2 learner(S, A, config);
    RngStream rng(seed);
    State s = 0;
    long double realized = 0.0L;
    long double pseudo = 0.0L;
    std::size_t next_cp = 0;
    std::size_t seen_episodes = 0;

    try {
        for (long t = 1; t <= horizon; ++t) {
            if (options.current_membership && next_cp < cps.size() && cps[next_cp] == t) {
                const LearnerState& st = learner.state();
                trace.current_membership.push_back(membership_check(
                    spec, empirical_estimates(st), radii_table(learner.config(), st, static_cast<double>(t))));
            }
            const Action a = learner.act(s);
            if (learner.episodes().size() != seen_episodes) {
                seen_episodes = learner.episodes().size();
                if (options.check_membership) {
                    const bool inside = membership_check(spec, learner.estimates(), learner.radii());
                    learner.episodes().back().membership = inside;
                    if (!inside) ++trace.membership_failures;
                }
            }
            const StepOutcome step = sample_step(spec, s, a, rng);
            realized += step.reward;
            pseudo += mean[static_cast<std::size_t>(s * A + a)];
            learner.observe({s, a, step.reward, step.next});
            s = step.next;

            if (next_cp < cps.size() && cps[next_cp] == t) {
                const long double target = static_cast<long double>(t) * rho;
                trace.times.push_back(t);
                trace.realized_regret.push_back(static_cast<double>(target - realized));
                trace.pseudo_regret.push_back(static_cast<double>(target - pseudo));
                trace.episode_index.push_back(learner.state().episode);
                trace.membership.push_back(learner.episodes().back().membership);
                ++next_cp;
            }
        }
    } catch (const EviError& e) {
        throw RunError(options.spec_id, seed, e.what());
    }
    learner.finish();

    trace.episodes = learner.episodes();
    trace.num_episodes = static_cast<int>(trace.episodes.size());
    trace.visit_ratio_sums = learner.visit_ratio_sums();
    trace.final_counts = learner.state().visit_counts;
    trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return trace;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t point, int seed_index) noexcept {
    return derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(point)),
                       static_cast<std::uint64_t>(seed_index));
}

SweepResult sweep(const std::vector<GridPoint>& grid, const SweepOptions& options) {
    if (options.seeds < 0) throw std::invalid_argument("sweep: negative seed count");
    const auto seeds = static_cast<std::size_t>(options.seeds);
    const std::size_t total = grid.size() * seeds;

    // Specs and optimal gains are shared by every seed of a point.
    std::vector<std::optional<MdpSpec>> specs(grid.size());
    std::vector<double> gains(grid.size(), 0.0);
    std::vector<std::string> setup_errors(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        try {
            specs[p] = MdpSpec::build(grid[p].spec);
            gains[p] = optimal_policy(*specs[p]).gain;
        } catch (const std::exception& e) {
            specs[p].reset();
            setup_errors[p] = e.what();
        }
    }

    std::vector<std::optional<RegretTrace>> slots(total);
    std::vector<std::optional<RunFailure>> failed(total);
    std::atomic<std::size_t> cursor{0};

    auto worker = [&] {
        for (std::size_t job = cursor++; job < total; job = cursor++) {
            const std::size_t p = job / seeds;
            const int k = static_cast<int>(job % seeds);
            const GridPoint& point = grid[p];
            const std::uint64_t seed = run_seed(options.master_seed, p, k);
            if (!specs[p]) {
                failed[job] = RunFailure{p, k, point.id, seed, setup_errors[p]};
                continue;
            }
            try {
                RunOptions ro;
                ro.spec_id = point.id;
                ro.checkpoints = point.checkpoints;
                ro.optimal_gain = gains[p];
                slots[job] = run_experiment(*specs[p], point.learner, point.horizon, seed, ro);
            } catch (const std::exception& e) {
                failed[job] = RunFailure{p, k, point.id, seed, e.what()};
            }
        }
    };

    const int threads = std::clamp(options.parallelism, 1, static_cast<int>(std::max<std::size_t>(1, total)));
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    SweepResult out;
    for (std::size_t j = 0; j < total; ++j) {
        if (slots[j]) out.traces.push_back(std::move(*slots[j]));
        if (failed[j]) out.failures.push_back(std::move(*failed[j]));
    }
    return out;
}

LearnerConfig learner_from_json(const nlohmann::json& doc) {
    LearnerConfig c;
    if (doc.is_null()) return c;
    if (!doc.is_object()) throw InputError("learner: expected an object");
    try {
        if (doc.contains("mode")) c.mode = parse_confidence_mode(doc.at("mode").get<std::string>());
        if (doc.contains("delta")) c.delta = doc.at("delta").get<double>();
        if (doc.contains("r_max_known")) c.r_max_known = doc.at("r_max_known").get<double>();
        if (doc.contains("max_evi_iterations")) c.max_evi_iterations = doc.at("max_evi_iterations").get<int>();
        if (doc.contains("aperiodicity_kappa")) c.aperiodicity_kappa = doc.at("aperiodicity_kappa").get<double>();
        if (doc.contains("evi_accuracy")) {
            const auto v = doc.at("evi_accuracy").get<std::string>();
            if (v == "rmax_scaled") c.evi_accuracy = EviAccuracy::rmax_scaled;
            else if (v == "unit") c.evi_accuracy = EviAccuracy::unit;
            else throw InputError("learner: unknown evi_accuracy '" + v + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("learner: ") + e.what());
    }
    return c;
}

std::vector<GridPoint> grid_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("points") || !doc.at("points").is_array())
        throw InputError("grid: expected {\"points\": [...]}");
    std::vector<GridPoint> grid;
    std::size_t i = 0;
    for (const auto& item : doc.at("points")) {
        GridPoint g;
        try {
            g.id = item.value("id", "p" + std::to_string(i));
            g.spec = spec_params_from_json(item.at("spec"));
            g.learner = learner_from_json(item.value("learner", nlohmann::json()));
            g.horizon = item.at("T").get<long>();
            if (item.contains("checkpoints")) g.checkpoints = item.at("checkpoints").get<std::vector<long>>();
        } catch (const nlohmann::json::exception& e) {
            throw InputError("grid point " + std::to_string(i) + ": " + e.what());
        }
        if (g.horizon < 1) throw InputError("grid point " + g.id + ": T must be positive");
        grid.push_back(std::move(g));
        ++i;
    }
    return grid;
}

namespace {

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

} // namespace

TraceSummary aggregate_traces(std::span<const RegretTrace> traces) {
    if (traces.size() < 2) throw std::invalid_argument("aggregate_traces: need at least two traces");
    const auto& times = traces.front().times;
    for (const auto& t : traces)
        if (t.times != times) throw std::invalid_argument("aggregate_traces: checkpoint grids differ");

    TraceSummary out;
    out.spec_id = traces.front().spec_id;
    out.num_traces = traces.size();
    out.times = times;
    const double n = static_cast<double>(traces.size());
    constexpr std::array<double, 3> probs{0.1, 0.5, 0.9};

    auto column = [&](std::size_t j, bool pseudo) {
        std::vector<double> v;
        v.reserve(traces.size());
        for (const auto& t : traces) v.push_back(pseudo ? t.pseudo_regret[j] : t.realized_regret[j]);
        return v;
    };
    auto moments = [&](const std::vector<double>& v, std::vector<double>& mean, std::vector<double>& se) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        mean.push_back(m);
        se.push_back(std::sqrt(ss / (n - 1.0) / n));
    };

    for (std::size_t j = 0; j < times.size(); ++j) {
        const auto real = column(j, false);
        const auto pse = column(j, true);
        moments(real, out.mean_realized, out.se_realized);
        moments(pse, out.mean_pseudo, out.se_pseudo);
        std::array<double, 3> qr{}, qp{};
        for (std::size_t q = 0; q < probs.size(); ++q) {
            qr[q] = quantile(real, probs[q]);
            qp[q] = quantile(pse, probs[q]);
        }
        out.realized_quantiles.push_back(qr);
        out.pseudo_quantiles.push_back(qp);
    }
    if (!times.empty())
        out.slope = fit_loglog_slope(out.times, out.mean_pseudo, static_cast<double>(times.back()) / 10.0,
                                     &out.slope_points);
    return out;
}

double fit_loglog_slope(std::span<const long> times, std::span<const double> values, double t_min,
                        int* points_used) {
    if (times.size() != values.size()) throw std::invalid_argument("fit_loglog_slope: length mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (static_cast<double>(times[i]) >= t_min && times[i] > 0 && values[i] > 0.0) {
            xs.push_back(std::log(static_cast<double>(times[i])));
            ys.push_back(std::log(values[i]));
        }
    }
    if (points_used) *points_used = static_cast<int>(xs.size());
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double k = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

EpisodeDiagnostics episode_diagnostics(const RegretTrace& trace, const MdpSpec& spec, long length_threshold) {
    EpisodeDiagnostics d;
    const double SA = static_cast<double>(trace.num_states) * trace.num_actions;
    const double T = trace.times.empty() ? 0.0 : static_cast<double>(trace.times.back());
    d.num_episodes = trace.num_episodes;
    d.bound_applies = T > SA;
    if (d.bound_applies) {
        d.episode_bound = SA * std::log2(8.0 * T / SA);
        d.episodes_ok = d.num_episodes <= d.episode_bound;
    }

    for (std::size_t i = 0; i < trace.visit_ratio_sums.size(); ++i) {
        const double cap = 3.0 * std::sqrt(static_cast<double>(trace.final_counts.at(i)));
        const double sum = trace.visit_ratio_sums[i];
        if (sum > cap) ++d.visit_sum_violations;
        const double ratio = cap > 0.0 ? sum / cap : (sum > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        d.worst_visit_sum_ratio = std::max(d.worst_visit_sum_ratio, ratio);
    }

    const double m_last = stationary_measure(spec, Policy::full_speed(spec)).probabilities.back();
    for (const auto& e : trace.episodes) {
        if (e.length > length_threshold && e.length > 0)
            d.worst_count_ratios.emplace_back(e.k, static_cast<double>(e.min_count_visits) /
                                                       (m_last * static_cast<double>(e.length)));
    }
    return d;
}

} // namespace bdrl
