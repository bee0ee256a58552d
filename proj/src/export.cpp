#include "bdrl/harness.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace bdrl {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

void check_id(const std::string& id) {
    if (id.find_first_of(",\n\r\"") != std::string::npos)
        throw std::invalid_argument("spec_id '" + id + "' contains a CSV delimiter");
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

template <class T>
T parse_field(std::string_view text, std::size_t line) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::runtime_error("line " + std::to_string(line) + ": bad field '" + std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

constexpr const char* kTraceHeader = "spec_id,seed,t,realized_regret,pseudo_regret,episode_index";

} // namespace

void write_traces_csv(std::ostream& out, std::span<const RegretTrace> traces) {
    out << kTraceHeader << '\n';
    for (const auto& tr : traces) {
        check_id(tr.spec_id);
        for (std::size_t j = 0; j < tr.times.size(); ++j) {
            out << tr.spec_id << ',' << tr.seed << ',' << tr.times[j] << ',' << format_double(tr.realized_regret[j])
                << ',' << format_double(tr.pseudo_regret[j]) << ',' << tr.episode_index[j] << '\n';
        }
    }
}

void write_traces_csv(const std::filesystem::path& path, std::span<const RegretTrace> traces) {
    auto out = open_out(path);
    write_traces_csv(out, traces);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<RegretTrace> read_traces_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) throw std::runtime_error("traces CSV: unexpected header");
    std::vector<RegretTrace> traces;
    std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 6) throw std::runtime_error("line " + std::to_string(lineno) + ": expected 6 fields");
        const std::string id(f[0]);
        const auto seed = parse_field<std::uint64_t>(f[1], lineno);
        auto [it, fresh] = index.try_emplace({id, seed}, traces.size());
        if (fresh) {
            traces.emplace_back();
            traces.back().spec_id = id;
            traces.back().seed = seed;
        }
        RegretTrace& tr = traces[it->second];
        tr.times.push_back(parse_field<long>(f[2], lineno));
        tr.realized_regret.push_back(parse_field<double>(f[3], lineno));
        tr.pseudo_regret.push_back(parse_field<double>(f[4], lineno));
        tr.episode_index.push_back(parse_field<int>(f[5], lineno));
    }
    return traces;
}

std::vector<RegretTrace> read_traces_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_traces_csv(in);
}

void write_episodes_csv(std::ostream& out, std::span<const RegretTrace> traces) {
    out << "spec_id,seed,k,t_k,episode_length,rho_tilde,evi_iterations,membership_flag\n";
    for (const auto& tr : traces) {
        check_id(tr.spec_id);
        for (const auto& e : tr.episodes) {
            out << tr.spec_id << ',' << tr.seed << ',' << e.k << ',' << e.start << ',' << e.length << ','
                << format_double(e.optimistic_gain) << ',' << e.evi_iterations << ',' << (e.membership ? 1 : 0)
                << '\n';
        }
    }
}

nlohmann::json summary_json(const TraceSummary& summary, const MdpSpec& spec) {
    using nlohmann::json;
    const AnalyticsBundle bundle = e2_constants(spec);
    json rows = json::array();
    for (std::size_t j = 0; j < summary.times.size(); ++j) {
        const long t = summary.times[j];
        json row = {
            {"t", t},
            {"mean_realized", summary.mean_realized[j]},
            {"se_realized", summary.se_realized[j]},
            {"mean_pseudo", summary.mean_pseudo[j]},
            {"se_pseudo", summary.se_pseudo[j]},
            {"realized_quantiles", summary.realized_quantiles[j]},
            {"pseudo_quantiles", summary.pseudo_quantiles[j]},
        };
        if (t >= 2) {
            const RegretBounds b = regret_bounds(spec, bundle, static_cast<double>(t));
            row["upper_main"] = b.upper_main;
            row["log_upper_secondary"] = b.upper_secondary.log_value;
            row["minimax_lower"] = b.minimax_lower.log_scale ? json(nullptr) : json(b.minimax_lower.value);
            row["log_minimax_lower"] = b.minimax_lower.log_value;
        } else {
            row["upper_main"] = nullptr;
            row["log_upper_secondary"] = nullptr;
            row["minimax_lower"] = nullptr;
            row["log_minimax_lower"] = nullptr;
        }
        rows.push_back(std::move(row));
    }
    return json{
        {"spec_id", summary.spec_id},
        {"num_traces", summary.num_traces},
        {"quantile_levels", {0.1, 0.5, 0.9}},
        {"slope", summary.slope},
        {"slope_points", summary.slope_points},
        {"minimax_label", std::string(kMinimaxLabel)},
        {"analytics",
         {{"E2", bundle.e2},
          {"F", bundle.big_f},
          {"log_diameter", bundle.diameter.log_value},
          {"log_q_max", bundle.q_max.log_value}}},
        {"checkpoints", std::move(rows)},
    };
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace bdrl
