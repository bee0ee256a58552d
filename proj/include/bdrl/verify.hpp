#pragma once

// Built-in fixtures and the oracle suite run by `bdrl verify`.

#include "bdrl/mdp.hpp"
#include "bdrl/rng.hpp"

#include <string>
#include <vector>

namespace bdrl {

/// lambda = mu = 1, C = 2, S = 3, A_max = 1, w = [0, 1].
SpecParams fixture_three_state();
/// lambda = mu = 1, C = 2, S = 2, A_max = 2, w = [0, 1, 4].
SpecParams fixture_two_state();
/// lambda = mu = 1, C = 2, A_max = 2, w = [0, 1, 4] with S states.
SpecParams fixture_queue(int num_states);

/// Random member of the class: rates in (0, max], convex nondecreasing energy table.
SpecParams random_spec_params(RngStream& rng, int num_states, int max_speed);
Policy random_policy(const MdpSpec& spec, RngStream& rng);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Oracle agreement checks on the fixtures; `small` keeps only sub-second ones.
std::vector<CheckResult> run_verification(bool small);

} // namespace bdrl
