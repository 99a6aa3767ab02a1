#include "edrl/drl_agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edrl {

namespace {

bool finite_vec(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> critic_input(std::span<const double> s, std::span<const double> a) {
    std::vector<double> in;
    in.reserve(s.size() + a.size());
    in.insert(in.end(), s.begin(), s.end());
    in.insert(in.end(), a.begin(), a.end());
    return in;
}

MLPSpec actor_spec(const EnvSpec& env, const AgentHyperparams& hp) {
    MLPSpec spec;
    spec.layer_sizes.push_back(env.state_dim);
    for (std::size_t h : hp.hidden_sizes) spec.layer_sizes.push_back(h);
    spec.layer_sizes.push_back(env.action_dim);
    spec.hidden_activation = Activation::relu;
    spec.output_activation = Activation::tanh;
    return spec;
}

MLPSpec critic_spec(const EnvSpec& env, const AgentHyperparams& hp) {
    MLPSpec spec;
    spec.layer_sizes.push_back(env.state_dim + env.action_dim);
    for (std::size_t h : hp.hidden_sizes) spec.layer_sizes.push_back(h);
    spec.layer_sizes.push_back(1);
    spec.hidden_activation = Activation::relu;
    spec.output_activation = Activation::identity;
    return spec;
}

constexpr double kFinalActorInit = 3e-3;

} // namespace

EpisodeSequence make_episode(std::vector<Transition> transitions) {
    EpisodeSequence ep;
    ep.transitions = std::move(transitions);
    double total = 0.0;
    for (const Transition& t : ep.transitions) total += t.r;
    ep.total_reward = total;
    return ep;
}

void validate_episode(const EpisodeSequence& ep, const EnvSpec& spec) {
    if (ep.transitions.size() != spec.max_time_step)
        throw std::invalid_argument("episode must contain exactly max_time_step transitions");
    double total = 0.0;
    for (std::size_t t = 0; t < ep.transitions.size(); ++t) {
        const Transition& tr = ep.transitions[t];
        if (tr.s.size() != spec.state_dim || tr.s_next.size() != spec.state_dim ||
            tr.a.size() != spec.action_dim)
            throw std::invalid_argument("transition dimensions do not match env spec");
        if (!finite_vec(tr.s) || !finite_vec(tr.a) || !finite_vec(tr.s_next) || !std::isfinite(tr.r))
            throw std::invalid_argument("non-finite transition value");
        if (t + 1 < ep.transitions.size() && tr.s_next != ep.transitions[t + 1].s)
            throw std::invalid_argument("episode transitions are not chained");
        total += tr.r;
    }
    if (std::abs(total - ep.total_reward) > 1e-9)
        throw std::invalid_argument("episode total_reward does not match sum of rewards");
}

std::size_t ReplayBuffer::transition_count() const {
    std::size_t n = 0;
    for (const EpisodeSequence& ep : episodes) n += ep.transitions.size();
    return n;
}

void store_episode(ReplayBuffer& buffer, EpisodeSequence ep, const EnvSpec& spec) {
    validate_episode(ep, spec);
    buffer.episodes.push_back(std::move(ep));
    while (buffer.episodes.size() > buffer.capacity) buffer.episodes.pop_front();
}

Batch sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng) {
    const std::size_t total = buffer.transition_count();
    if (total == 0) throw std::invalid_argument("sample_batch: empty buffer");
    std::vector<std::size_t> cum;
    cum.reserve(buffer.episodes.size());
    std::size_t acc = 0;
    for (const EpisodeSequence& ep : buffer.episodes) {
        acc += ep.transitions.size();
        cum.push_back(acc);
    }
    std::uniform_int_distribution<std::size_t> dist(0, total - 1);
    Batch batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t idx = dist(rng);
        const auto it = std::upper_bound(cum.begin(), cum.end(), idx);
        const std::size_t e = static_cast<std::size_t>(it - cum.begin());
        const std::size_t base = (e == 0) ? 0 : cum[e - 1];
        batch.push_back(&buffer.episodes[e].transitions[idx - base]);
    }
    return batch;
}

std::string algo_name(Algo a) { return a == Algo::ddpg ? "ddpg" : "td3"; }

Algo algo_by_name(const std::string& name) {
    if (name == "ddpg") return Algo::ddpg;
    if (name == "td3") return Algo::td3;
    throw std::invalid_argument("unknown algo: " + name);
}

void AgentHyperparams::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (policy_delay == 0) throw std::invalid_argument("policy_delay must be >= 1");
    if (hidden_sizes.empty()) throw std::invalid_argument("need at least one hidden layer");
    if (replay_capacity == 0) throw std::invalid_argument("replay_capacity must be >= 1");
}

Agent agent_init(Algo algo, const EnvSpec& spec, std::uint64_t seed, AgentHyperparams hp) {
    spec.validate();
    hp.validate();
    Agent agent;
    agent.algo = algo;
    agent.env_spec = spec;
    agent.hp = hp;
    agent.actor = mlp_init(actor_spec(spec, hp), derive_seed(seed, {1}), kFinalActorInit);
    agent.actor_target = agent.actor;
    const std::size_t n_critics = (algo == Algo::td3) ? 2 : 1;
    for (std::size_t c = 0; c < n_critics; ++c) {
        agent.critics.push_back(mlp_init(critic_spec(spec, hp), derive_seed(seed, {2, c})));
        agent.critic_targets.push_back(agent.critics.back());
        agent.critic_opts.push_back(AdamState::for_size(agent.critics.back().spec.param_count()));
    }
    agent.actor_opt = AdamState::for_size(agent.actor.spec.param_count());
    agent.buffer.capacity = hp.replay_capacity;
    return agent;
}

std::vector<double> policy_action(const MLPState& actor, const EnvSpec& spec, std::span<const double> s) {
    std::vector<double> out = mlp_forward(actor, s);
    for (std::size_t d = 0; d < out.size(); ++d) {
        const double center = 0.5 * (spec.action_low[d] + spec.action_high[d]);
        const double half = 0.5 * (spec.action_high[d] - spec.action_low[d]);
        out[d] = center + half * out[d];
    }
    return out;
}

std::vector<double> select_action(const Agent& agent, std::span<const double> s, double noise_scale,
                                  Rng& rng) {
    if (noise_scale < 0.0) throw std::invalid_argument("noise_scale must be >= 0");
    std::vector<double> a = policy_action(agent.actor, agent.env_spec, s);
    if (noise_scale > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_scale);
        for (double& v : a) v += noise(rng);
    }
    return clip_action(agent.env_spec, a);
}

std::vector<double> compute_td_targets(const Agent& agent, const Batch& batch, Rng& rng) {
    const EnvSpec& spec = agent.env_spec;
    std::vector<double> targets;
    targets.reserve(batch.size());
    std::normal_distribution<double> smooth(0.0, agent.hp.target_noise);
    for (const Transition* tr : batch) {
        std::vector<double> a_next = policy_action(agent.actor_target, spec, tr->s_next);
        if (agent.algo == Algo::td3 && agent.hp.target_noise > 0.0) {
            const double c = agent.hp.target_noise_clip;
            for (std::size_t d = 0; d < a_next.size(); ++d) {
                const double eps = std::clamp(smooth(rng), -c, c);
                a_next[d] = std::clamp(a_next[d] + eps, spec.action_low[d], spec.action_high[d]);
            }
        }
        const std::vector<double> in = critic_input(tr->s_next, a_next);
        double q = mlp_forward(agent.critic_targets[0], in)[0];
        if (agent.algo == Algo::td3)
            q = std::min(q, mlp_forward(agent.critic_targets[1], in)[0]);
        targets.push_back(tr->r + agent.hp.gamma * q);
    }
    return targets;
}

LossGrad critic_loss_grad(const MLPState& critic, const Batch& batch, const std::vector<double>& targets) {
    if (batch.empty() || batch.size() != targets.size())
        throw std::invalid_argument("critic_loss_grad: batch/target size mismatch");
    LossGrad out;
    out.grad.layout = param_layout(critic.spec);
    out.grad.values.assign(critic.spec.param_count(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    ForwardCache cache;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::vector<double> in = critic_input(batch[i]->s, batch[i]->a);
        const double q = mlp_forward(critic, in, &cache)[0];
        const double err = q - targets[i];
        out.loss += err * err * inv_n;
        const double gq = 2.0 * err * inv_n;
        BackwardResult bw = mlp_backward(critic, cache, std::span<const double>(&gq, 1));
        for (std::size_t j = 0; j < out.grad.values.size(); ++j)
            out.grad.values[j] += bw.param_grad.values[j];
    }
    return out;
}

LossGrad actor_loss_grad(const MLPState& actor, const MLPState& critic, const EnvSpec& spec,
                         const Batch& batch) {
    if (batch.empty()) throw std::invalid_argument("actor_loss_grad: empty batch");
    LossGrad out;
    out.grad.layout = param_layout(actor.spec);
    out.grad.values.assign(actor.spec.param_count(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    ForwardCache actor_cache, critic_cache;
    for (const Transition* tr : batch) {
        std::vector<double> u = mlp_forward(actor, tr->s, &actor_cache); // tanh output in [-1,1]
        std::vector<double> a(u.size());
        std::vector<double> half(u.size());
        for (std::size_t d = 0; d < u.size(); ++d) {
            const double center = 0.5 * (spec.action_low[d] + spec.action_high[d]);
            half[d] = 0.5 * (spec.action_high[d] - spec.action_low[d]);
            a[d] = center + half[d] * u[d];
        }
        const std::vector<double> in = critic_input(tr->s, a);
        const double q = mlp_forward(critic, in, &critic_cache)[0];
        out.loss -= q * inv_n;
        const double gq = -inv_n; // d(loss)/dQ
        BackwardResult cbw = mlp_backward(critic, critic_cache, std::span<const double>(&gq, 1));
        std::vector<double> gu(u.size());
        for (std::size_t d = 0; d < u.size(); ++d)
            gu[d] = cbw.input_grad[spec.state_dim + d] * half[d];
        BackwardResult abw = mlp_backward(actor, actor_cache, gu);
        for (std::size_t j = 0; j < out.grad.values.size(); ++j)
            out.grad.values[j] += abw.param_grad.values[j];
    }
    return out;
}

void soft_update(MLPState& target, const MLPState& online, double tau) {
    if (target.spec != online.spec) throw std::invalid_argument("soft_update: spec mismatch");
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        for (std::size_t i = 0; i < target.weights[l].values.size(); ++i)
            target.weights[l].values[i] =
                tau * online.weights[l].values[i] + (1.0 - tau) * target.weights[l].values[i];
        for (std::size_t i = 0; i < target.biases[l].size(); ++i)
            target.biases[l][i] = tau * online.biases[l][i] + (1.0 - tau) * target.biases[l][i];
    }
}

namespace {

void apply_grad_step(MLPState& net, const FlatParams& grad, AdamState& opt, double lr) {
    FlatParams params = flatten_params(net);
    adam_step(params, grad, opt, lr);
    net = unflatten_params(params, net.spec);
}

} // namespace

void ddpg_update(Agent& agent, const Batch& batch) {
    if (agent.algo != Algo::ddpg) throw std::invalid_argument("ddpg_update: agent is not ddpg");
    Rng unused(0); // ddpg targets are noise-free
    const std::vector<double> targets = compute_td_targets(agent, batch, unused);
    const LossGrad cg = critic_loss_grad(agent.critics[0], batch, targets);
    apply_grad_step(agent.critics[0], cg.grad, agent.critic_opts[0], agent.hp.critic_lr);
    const LossGrad ag = actor_loss_grad(agent.actor, agent.critics[0], agent.env_spec, batch);
    apply_grad_step(agent.actor, ag.grad, agent.actor_opt, agent.hp.actor_lr);
    soft_update(agent.actor_target, agent.actor, agent.hp.tau);
    soft_update(agent.critic_targets[0], agent.critics[0], agent.hp.tau);
    agent.update_counter += 1;
}

void td3_update(Agent& agent, const Batch& batch, Rng& rng) {
    if (agent.algo != Algo::td3) throw std::invalid_argument("td3_update: agent is not td3");
    const std::vector<double> targets = compute_td_targets(agent, batch, rng);
    for (std::size_t c = 0; c < 2; ++c) {
        const LossGrad cg = critic_loss_grad(agent.critics[c], batch, targets);
        apply_grad_step(agent.critics[c], cg.grad, agent.critic_opts[c], agent.hp.critic_lr);
    }
    agent.update_counter += 1;
    if (agent.update_counter % agent.hp.policy_delay == 0) {
        const LossGrad ag = actor_loss_grad(agent.actor, agent.critics[0], agent.env_spec, batch);
        apply_grad_step(agent.actor, ag.grad, agent.actor_opt, agent.hp.actor_lr);
        soft_update(agent.actor_target, agent.actor, agent.hp.tau);
        for (std::size_t c = 0; c < 2; ++c)
            soft_update(agent.critic_targets[c], agent.critics[c], agent.hp.tau);
    }
}

void train_from_buffer(Agent& agent, const ReplayBuffer& buffer, std::size_t n_updates,
                       std::size_t batch_size, Rng& rng) {
    if (n_updates == 0) return;
    if (buffer.episodes.empty()) throw std::invalid_argument("train_from_buffer: empty buffer");
    for (std::size_t i = 0; i < n_updates; ++i) {
        const Batch batch = sample_batch(buffer, batch_size, rng);
        if (agent.algo == Algo::ddpg)
            ddpg_update(agent, batch);
        else
            td3_update(agent, batch, rng);
    }
}

EpisodeSequence collect_episode(Agent& agent, std::uint64_t env_seed, Rng& noise_rng) {
    const EnvSpec& spec = agent.env_spec;
    EnvState env = env_reset(spec, env_seed);
    std::vector<double> obs = env_observe(spec, env);
    std::vector<Transition> transitions;
    transitions.reserve(spec.max_time_step);
    for (std::size_t t = 0; t < spec.max_time_step; ++t) {
        std::vector<double> a;
        if (agent.env_steps < agent.hp.warmup_steps) {
            a.resize(spec.action_dim);
            for (std::size_t d = 0; d < spec.action_dim; ++d) {
                std::uniform_real_distribution<double> u(spec.action_low[d], spec.action_high[d]);
                a[d] = u(noise_rng);
            }
        } else {
            a = select_action(agent, obs, agent.explore_noise_scale(), noise_rng);
        }
        StepResult res = env_step(spec, env, a);
        transitions.push_back({obs, a, res.next_state, res.reward});
        obs = std::move(res.next_state);
        agent.env_steps += 1;
    }
    return make_episode(std::move(transitions));
}

} // namespace edrl
