#include "edrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace edrl {

namespace {

constexpr double kDt = 0.05;

double clampd(double v, double lo, double hi) { return std::max(lo, std::min(hi, v)); }

double wrap_angle(double theta) {
    const double pi = std::numbers::pi;
    theta = std::fmod(theta + pi, 2.0 * pi);
    if (theta < 0.0) theta += 2.0 * pi;
    return theta - pi;
}

enum class EnvKind { point_mass, sparse_goal, pendulum_hold };

EnvKind kind_of(const std::string& name) {
    if (name == "point_mass") return EnvKind::point_mass;
    if (name == "sparse_goal") return EnvKind::sparse_goal;
    if (name == "pendulum_hold") return EnvKind::pendulum_hold;
    throw std::invalid_argument("unknown environment: " + name);
}

// point_mass: 2-D double integrator, spawn box [-1,1]^2, goal at origin.
constexpr double kPmSpawn = 1.0;
constexpr double kPmVelMax = 2.0;
constexpr double kPmPosMax = 3.0;
// sparse_goal: 1-D double integrator, spawn in [-0.6,-0.4], reward band [0.5,1.5].
constexpr double kSgSpawnLo = -0.6;
constexpr double kSgSpawnHi = -0.4;
constexpr double kSgBandLo = 0.5;
constexpr double kSgBandHi = 1.5;
constexpr double kSgVelMax = 2.0;
constexpr double kSgPosMax = 2.0;
// pendulum_hold: gym-style pendulum, theta = 0 upright.
constexpr double kPenG = 10.0;
constexpr double kPenOmegaMax = 8.0;

} // namespace

void EnvSpec::validate() const {
    if (state_dim < 1 || action_dim < 1 || max_time_step < 1)
        throw std::invalid_argument("EnvSpec: dimensions and max_time_step must be >= 1");
    if (action_low.size() != action_dim || action_high.size() != action_dim)
        throw std::invalid_argument("EnvSpec: action bounds must have action_dim entries");
    for (std::size_t d = 0; d < action_dim; ++d)
        if (!(action_low[d] < action_high[d]))
            throw std::invalid_argument("EnvSpec: action_low must be < action_high");
}

std::vector<std::string> env_names() { return {"point_mass", "sparse_goal", "pendulum_hold"}; }

EnvSpec env_spec_by_name(const std::string& name) {
    switch (kind_of(name)) {
        case EnvKind::point_mass:
            return {"point_mass", 4, 2, 100, {-1.0, -1.0}, {1.0, 1.0}};
        case EnvKind::sparse_goal:
            return {"sparse_goal", 2, 1, 60, {-1.0}, {1.0}};
        case EnvKind::pendulum_hold:
            return {"pendulum_hold", 3, 1, 100, {-2.0}, {2.0}};
    }
    throw std::invalid_argument("unknown environment: " + name);
}

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed) {
    spec.validate();
    EnvState st;
    st.rng = make_rng(seed, {0x656E76u}); // "env"
    st.step_index = 0;
    switch (kind_of(spec.name)) {
        case EnvKind::point_mass: {
            std::uniform_real_distribution<double> pos(-kPmSpawn, kPmSpawn);
            st.internal = {pos(st.rng), pos(st.rng), 0.0, 0.0};
            break;
        }
        case EnvKind::sparse_goal: {
            std::uniform_real_distribution<double> pos(kSgSpawnLo, kSgSpawnHi);
            st.internal = {pos(st.rng), 0.0};
            break;
        }
        case EnvKind::pendulum_hold: {
            std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi);
            std::uniform_real_distribution<double> om(-1.0, 1.0);
            st.internal = {th(st.rng), om(st.rng)};
            break;
        }
    }
    return st;
}

std::vector<double> env_observe(const EnvSpec& spec, const EnvState& state) {
    if (kind_of(spec.name) == EnvKind::pendulum_hold) {
        const double th = state.internal[0], om = state.internal[1];
        return {std::cos(th), std::sin(th), om};
    }
    return state.internal;
}

std::vector<double> clip_action(const EnvSpec& spec, std::span<const double> action) {
    if (action.size() != spec.action_dim)
        throw std::invalid_argument("clip_action: action length != action_dim");
    std::vector<double> a(action.begin(), action.end());
    for (std::size_t d = 0; d < a.size(); ++d)
        a[d] = clampd(a[d], spec.action_low[d], spec.action_high[d]);
    return a;
}

StepResult env_step(const EnvSpec& spec, EnvState& state, std::span<const double> action) {
    if (state.step_index >= spec.max_time_step)
        throw std::logic_error("env_step: episode already finished");
    const std::vector<double> a = clip_action(spec, action);

    double reward = 0.0;
    switch (kind_of(spec.name)) {
        case EnvKind::point_mass: {
            double& px = state.internal[0];
            double& py = state.internal[1];
            double& vx = state.internal[2];
            double& vy = state.internal[3];
            vx = clampd(vx + a[0] * kDt, -kPmVelMax, kPmVelMax);
            vy = clampd(vy + a[1] * kDt, -kPmVelMax, kPmVelMax);
            px = clampd(px + vx * kDt, -kPmPosMax, kPmPosMax);
            py = clampd(py + vy * kDt, -kPmPosMax, kPmPosMax);
            reward = -std::sqrt(px * px + py * py) - 0.01 * (a[0] * a[0] + a[1] * a[1]);
            break;
        }
        case EnvKind::sparse_goal: {
            double& x = state.internal[0];
            double& v = state.internal[1];
            v = clampd(v + a[0] * kDt, -kSgVelMax, kSgVelMax);
            x = clampd(x + v * kDt, -kSgPosMax, kSgPosMax);
            reward = (x >= kSgBandLo && x <= kSgBandHi) ? 1.0 : 0.0;
            break;
        }
        case EnvKind::pendulum_hold: {
            double& th = state.internal[0];
            double& om = state.internal[1];
            om = clampd(om + (1.5 * kPenG * std::sin(th) + 3.0 * a[0]) * kDt, -kPenOmegaMax, kPenOmegaMax);
            th = wrap_angle(th + om * kDt);
            reward = -(th * th + 0.1 * om * om + 0.001 * a[0] * a[0]);
            break;
        }
    }

    state.step_index += 1;
    StepResult res;
    res.next_state = env_observe(spec, state);
    res.reward = reward;
    res.done = (state.step_index == spec.max_time_step);
    return res;
}

} // namespace edrl
