#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "edrl/envs.hpp"
#include "edrl/rng.hpp"
#include "edrl/tensor_net.hpp"

namespace edrl {

struct Transition {
    std::vector<double> s;
    std::vector<double> a;
    std::vector<double> s_next;
    double r = 0.0;

    bool operator==(const Transition&) const = default;
};

// One complete execution: exactly H transitions plus its total reward.
struct EpisodeSequence {
    std::vector<Transition> transitions;
    double total_reward = 0.0;

    bool operator==(const EpisodeSequence&) const = default;
};

EpisodeSequence make_episode(std::vector<Transition> transitions);
void validate_episode(const EpisodeSequence& ep, const EnvSpec& spec); // throws

// Whole episodes, ring-evicted oldest first. Capacity counts episodes, not
// transitions: the elite pipeline needs complete sequences by total reward.
struct ReplayBuffer {
    std::size_t capacity = 200;
    std::deque<EpisodeSequence> episodes;

    std::size_t transition_count() const;
};

void store_episode(ReplayBuffer& buffer, EpisodeSequence ep, const EnvSpec& spec);

using Batch = std::vector<const Transition*>;

// Uniform with replacement over all stored transitions.
Batch sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng);

enum class Algo { ddpg, td3 };

std::string algo_name(Algo a);
Algo algo_by_name(const std::string& name);

struct AgentHyperparams {
    double gamma = 0.99;
    double tau = 0.005;
    std::size_t batch_size = 64;
    double explore_noise_frac = 0.1; // sigma = frac * (high - low), per action dimension 0
    std::size_t policy_delay = 2;    // td3
    double target_noise = 0.2;       // td3
    double target_noise_clip = 0.5;  // td3
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    std::size_t warmup_steps = 500;
    std::vector<std::size_t> hidden_sizes = {64, 64};
    std::size_t replay_capacity = 200; // episodes

    void validate() const;
};

struct Agent {
    Algo algo = Algo::td3;
    EnvSpec env_spec;
    AgentHyperparams hp;
    MLPState actor;
    MLPState actor_target;
    std::vector<MLPState> critics;        // 1 for ddpg, 2 for td3
    std::vector<MLPState> critic_targets;
    AdamState actor_opt;
    std::vector<AdamState> critic_opts;
    ReplayBuffer buffer;
    std::size_t update_counter = 0;
    std::size_t env_steps = 0; // lifetime exploration steps (drives warmup)

    double explore_noise_scale() const {
        return hp.explore_noise_frac * (env_spec.action_high[0] - env_spec.action_low[0]);
    }
};

Agent agent_init(Algo algo, const EnvSpec& spec, std::uint64_t seed, AgentHyperparams hp = {});

// Deterministic policy output: tanh head scaled to the action box.
std::vector<double> policy_action(const MLPState& actor, const EnvSpec& spec, std::span<const double> s);

// clip(pi(s) + eps), eps ~ Normal(0, noise_scale^2) per dimension.
std::vector<double> select_action(const Agent& agent, std::span<const double> s, double noise_scale,
                                  Rng& rng);

// TD targets y = r + gamma * Q_target(s', a'), algo-specific; rng feeds the
// td3 target-policy smoothing noise.
std::vector<double> compute_td_targets(const Agent& agent, const Batch& batch, Rng& rng);

struct LossGrad {
    double loss = 0.0;
    FlatParams grad;
};

// Mean squared error of critic(s,a) against fixed targets.
LossGrad critic_loss_grad(const MLPState& critic, const Batch& batch, const std::vector<double>& targets);

// Deterministic policy-gradient loss: -mean Q(s, pi(s)), critic held fixed.
LossGrad actor_loss_grad(const MLPState& actor, const MLPState& critic, const EnvSpec& spec,
                         const Batch& batch);

void soft_update(MLPState& target, const MLPState& online, double tau);

void ddpg_update(Agent& agent, const Batch& batch);
void td3_update(Agent& agent, const Batch& batch, Rng& rng);

// n_updates rounds of sample + algo-appropriate update.
void train_from_buffer(Agent& agent, const ReplayBuffer& buffer, std::size_t n_updates,
                       std::size_t batch_size, Rng& rng);

// One exploration episode: uniform random actions during warmup, then the
// policy plus exploration noise. Counts env steps; does not store or train.
EpisodeSequence collect_episode(Agent& agent, std::uint64_t env_seed, Rng& noise_rng);

} // namespace edrl
