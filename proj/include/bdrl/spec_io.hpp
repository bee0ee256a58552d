#pragma once

#include "bdrl/mdp.hpp"

#include <filesystem>
#include <json.hpp>
#include <stdexcept>
#include <string>

namespace bdrl {

/// Malformed or missing input document (exit code 1 territory for the CLI).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

SpecParams spec_params_from_json(const nlohmann::json& doc);
nlohmann::json spec_params_to_json(const SpecParams& params);

MdpSpec spec_from_json(const nlohmann::json& doc);
MdpSpec load_spec(const std::filesystem::path& path);

nlohmann::json load_json(const std::filesystem::path& path);

} // namespace bdrl
