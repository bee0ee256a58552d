#include "bdrl/spec_io.hpp"

#include <fstream>

namespace bdrl {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& doc, const char* key) {
    if (!doc.contains(key)) throw InputError(std::string("spec is missing key '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("spec key '") + key + "': " + e.what());
    }
}

} // namespace

SpecParams spec_params_from_json(const json& doc) {
    if (!doc.is_object()) throw InputError("spec document must be a JSON object");
    SpecParams p;
    p.lambda = required<double>(doc, "lambda");
    p.mu = required<double>(doc, "mu");
    p.deadline_cost = required<double>(doc, "deadline_cost");
    p.num_states = required<int>(doc, "num_states");
    p.max_speed = required<int>(doc, "max_speed");
    p.lambda_max = required<double>(doc, "lambda_max");
    p.mu_max = required<double>(doc, "mu_max");
    p.energy_table = required<std::vector<double>>(doc, "energy_table");
    return p;
}

json spec_params_to_json(const SpecParams& p) {
    return json{{"lambda", p.lambda},         {"mu", p.mu},
                {"deadline_cost", p.deadline_cost}, {"num_states", p.num_states},
                {"max_speed", p.max_speed},   {"lambda_max", p.lambda_max},
                {"mu_max", p.mu_max},         {"energy_table", p.energy_table}};
}

MdpSpec spec_from_json(const json& doc) { return MdpSpec::build(spec_params_from_json(doc)); }

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

MdpSpec load_spec(const std::filesystem::path& path) { return spec_from_json(load_json(path)); }

} // namespace bdrl
