#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edrl/rng.hpp"

namespace edrl {

// Every environment runs episodes of exactly max_time_step steps; there is
// no early termination.
struct EnvSpec {
    std::string name;
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    std::size_t max_time_step = 0; // H
    std::vector<double> action_low;
    std::vector<double> action_high;

    void validate() const; // throws std::invalid_argument
};

struct EnvState {
    std::vector<double> internal; // dynamics state (may differ from the observation)
    std::size_t step_index = 0;
    Rng rng; // consumed at reset; reserved for stochastic dynamics
};

struct StepResult {
    std::vector<double> next_state; // observation
    double reward = 0.0;
    bool done = false;
};

// Built-in environments: point_mass, sparse_goal, pendulum_hold.
EnvSpec env_spec_by_name(const std::string& name); // throws on unknown name
std::vector<std::string> env_names();

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed);
std::vector<double> env_observe(const EnvSpec& spec, const EnvState& state);

// Advances the state in place. Out-of-bounds actions are clipped to the
// action box. Throws if the episode already finished.
StepResult env_step(const EnvSpec& spec, EnvState& state, std::span<const double> action);

std::vector<double> clip_action(const EnvSpec& spec, std::span<const double> action);

} // namespace edrl
