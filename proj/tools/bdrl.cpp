// bdrl: planner, learner and analytics for birth-death speed-scaling MDPs.

#include "bdrl/analytics.hpp"
#include "bdrl/harness.hpp"
#include "bdrl/planner.hpp"
#include "bdrl/spec_io.hpp"
#include "bdrl/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitMismatch = 3;

nlohmann::json log_scalar_json(const bdrl::LogScalar& x) {
    return {{"log", x.log_value}, {"value", x.log_scale ? nlohmann::json(nullptr) : nlohmann::json(x.value)}};
}

int cmd_solve(const std::string& path) {
    const bdrl::MdpSpec spec = bdrl::load_spec(path);
    const bdrl::SolveResult r = bdrl::optimal_policy(spec);
    nlohmann::json out = {
        {"gain", r.gain},
        {"policy", r.policy.speeds()},
        {"span", r.span},
        {"bias", r.bias},
        {"iterations", r.iterations},
    };
    std::cout << out.dump(2) << '\n';
    return kExitOk;
}

int cmd_analyze(const std::string& path, std::vector<long> horizons, const std::string& out_dir) {
    if (horizons.empty()) horizons.push_back(1000000);
    const bdrl::MdpSpec spec = bdrl::load_spec(path);
    const bdrl::AnalyticsBundle b = bdrl::e2_constants(spec);
    nlohmann::json out = {
        {"uniformization", spec.uniformization()},
        {"r_max", spec.r_max()},
        {"m_pi0", b.m_pi0.probabilities},
        {"delta", b.delta},
        {"f", b.f_table},
        {"F", b.big_f},
        {"F_cap", bdrl::f_cap(spec)},
        {"E2", b.e2},
        {"E2_cap", bdrl::e2_cap(spec)},
        {"diameter", log_scalar_json(b.diameter)},
        {"q_max", log_scalar_json(b.q_max)},
        {"m_max_last", b.m_max_last},
        {"minimax_label", std::string(bdrl::kMinimaxLabel)},
    };
    nlohmann::json bounds = nlohmann::json::array();
    for (long t : horizons) {
        const bdrl::RegretBounds r = bdrl::regret_bounds(spec, b, static_cast<double>(t));
        bounds.push_back({{"T", t},
                          {"upper_main", r.upper_main},
                          {"upper_secondary", log_scalar_json(r.upper_secondary)},
                          {"minimax_lower", log_scalar_json(r.minimax_lower)}});
    }
    out["bounds"] = bounds;
    if (out_dir.empty()) {
        std::cout << out.dump(2) << '\n';
        return kExitOk;
    }
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "states.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open '" + (dir / "states.csv").string() + "' for writing");
    csv << "s,m_pi0,delta,f\n";
    for (int s = 0; s < spec.num_states(); ++s) {
        const auto i = static_cast<std::size_t>(s);
        csv << s << ',' << bdrl::format_double(b.m_pi0[i]) << ',' << bdrl::format_double(b.delta[i]) << ','
            << bdrl::format_double(b.f_table[i]) << '\n';
    }
    out.erase("m_pi0");
    out.erase("delta");
    out.erase("f");
    bdrl::write_json(dir / "summary.json", out);
    return kExitOk;
}

int cmd_learn(const std::string& path, long horizon, std::uint64_t seed, const std::string& mode, double delta,
              const std::vector<long>& checkpoints, const std::string& out_path, const std::string& episodes_path) {
    const bdrl::MdpSpec spec = bdrl::load_spec(path);
    bdrl::LearnerConfig config;
    config.mode = bdrl::parse_confidence_mode(mode);
    config.delta = delta;
    bdrl::RunOptions options;
    options.spec_id = std::filesystem::path(path).stem().string();
    options.checkpoints = checkpoints;
    const bdrl::RegretTrace trace = bdrl::run_experiment(spec, config, horizon, seed, options);
    const std::span<const bdrl::RegretTrace> one(&trace, 1);
    if (out_path.empty()) {
        bdrl::write_traces_csv(std::cout, one);
    } else {
        bdrl::write_traces_csv(std::filesystem::path(out_path), one);
    }
    if (!episodes_path.empty()) {
        std::ofstream ep(episodes_path, std::ios::binary);
        if (!ep) throw std::runtime_error("cannot open '" + episodes_path + "' for writing");
        bdrl::write_episodes_csv(ep, one);
    }
    std::cerr << "episodes=" << trace.num_episodes << " membership_failures=" << trace.membership_failures
              << " rho*=" << bdrl::format_double(trace.optimal_gain) << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& path, int seeds, std::uint64_t master_seed, int jobs, const std::string& out_dir) {
    const auto grid = bdrl::grid_from_json(bdrl::load_json(path));
    bdrl::SweepOptions options;
    options.seeds = seeds;
    options.master_seed = master_seed;
    options.parallelism = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const bdrl::SweepResult result = bdrl::sweep(grid, options);

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    bdrl::write_traces_csv(dir / "traces.csv", result.traces);
    {
        std::ofstream ep(dir / "episodes.csv", std::ios::binary);
        if (!ep) throw std::runtime_error("cannot open '" + (dir / "episodes.csv").string() + "' for writing");
        bdrl::write_episodes_csv(ep, result.traces);
    }

    nlohmann::json summaries = nlohmann::json::array();
    for (std::size_t p = 0; p < grid.size(); ++p) {
        std::vector<bdrl::RegretTrace> group;
        for (const auto& t : result.traces)
            if (t.spec_id == grid[p].id) group.push_back(t);
        if (group.size() < 2) continue;
        const bdrl::MdpSpec spec = bdrl::MdpSpec::build(grid[p].spec);
        summaries.push_back(bdrl::summary_json(bdrl::aggregate_traces(group), spec));
    }
    bdrl::write_json(dir / "summary.json", summaries);

    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : result.failures) {
        failures.push_back({{"spec_id", f.spec_id}, {"seed_index", f.seed_index}, {"seed", f.seed}, {"error", f.message}});
        std::cerr << "run failed: " << f.spec_id << " seed " << f.seed << ": " << f.message << '\n';
    }
    bdrl::write_json(dir / "failures.json", failures);
    std::cerr << result.traces.size() << " runs written to " << dir.string() << ", " << result.failures.size()
              << " failed\n";
    return kExitOk;
}

int cmd_verify(bool small) {
    const auto results = bdrl::run_verification(small);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.passed) {
            std::cout << ": " << r.detail;
            ++failed;
        }
        std::cout << '\n';
    }
    std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitMismatch;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning and planning on birth-death speed-scaling MDPs"};
    app.require_subcommand(1);

    std::string spec_path;
    long horizon = 100000;
    std::uint64_t seed = 1;
    std::uint64_t master_seed = 1;
    std::string mode = "tweaked";
    double delta = 0.05;
    std::vector<long> checkpoints;
    std::vector<long> horizons;
    std::string out;
    std::string episodes_out;
    int seeds = 20;
    int jobs = 0;
    bool small = false;

    auto* solve = app.add_subcommand("solve", "optimal gain, policy and bias span");
    solve->add_option("spec", spec_path, "spec JSON")->required()->check(CLI::ExistingFile);

    auto* learn = app.add_subcommand("learn", "run the learner once and print its regret trace");
    learn->add_option("spec", spec_path, "spec JSON")->required()->check(CLI::ExistingFile);
    learn->add_option("--T", horizon, "horizon")->check(CLI::PositiveNumber);
    learn->add_option("--seed", seed, "run seed");
    learn->add_option("--mode", mode, "confidence radii")->check(CLI::IsMember({"tweaked", "classic"}));
    learn->add_option("--delta", delta, "confidence level of classic mode");
    learn->add_option("--checkpoints", checkpoints, "comma-separated times (default: powers of two and T)")
        ->delimiter(',');
    learn->add_option("--out", out, "CSV path (default: stdout)");
    learn->add_option("--episodes", episodes_out, "episode log CSV path");

    auto* sweep = app.add_subcommand("sweep", "run a grid of specs over seeds");
    sweep->add_option("grid", spec_path, "grid JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seeds", seeds, "seeds per grid point")->check(CLI::NonNegativeNumber);
    sweep->add_option("--master-seed", master_seed, "seed that derives every run seed");
    sweep->add_option("--jobs,-j", jobs, "worker threads (default: hardware concurrency)");
    sweep->add_option("--out", out, "output directory")->required();

    auto* analyze = app.add_subcommand("analyze", "closed-form constants and regret bounds");
    analyze->add_option("spec", spec_path, "spec JSON")->required()->check(CLI::ExistingFile);
    analyze->add_option("--T", horizons, "horizons for the bound overlay (default 1e6)")->delimiter(',');
    analyze->add_option("--out", out, "write states.csv and summary.json here instead of printing");

    auto* verify = app.add_subcommand("verify", "oracle agreement suite on built-in fixtures");
    verify->add_flag("--small", small, "sub-second checks only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*solve) return cmd_solve(spec_path);
        if (*learn) return cmd_learn(spec_path, horizon, seed, mode, delta, checkpoints, out, episodes_out);
        if (*sweep) return cmd_sweep(spec_path, seeds, master_seed, jobs, out);
        if (*analyze) return cmd_analyze(spec_path, horizons, out);
        if (*verify) return cmd_verify(small);
    } catch (const bdrl::SpecError& e) {
        std::cerr << "invalid spec (" << bdrl::to_string(e.code()) << "): " << e.what() << '\n';
        return kExitValidation;
    } catch (const bdrl::InputError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
