#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "environment.hpp"
#include "errors.hpp"
#include "random.hpp"
#include "shaping.hpp"

namespace shapeopt::lander {

/// Physical constants of the toy lander. The pad is centred at the origin
/// and the ground is the line y = 0.
struct LanderConfig {
    double gravity = 1.62;
    double dt = 0.05;
    int episode_cap = 1000;

    double main_accel = 4.0; ///< acceleration at full main thrust
    double side_accel = 1.0; ///< lateral acceleration at full side thrust
    double side_torque = 0.5;
    double angular_damping = 1.5;
    double righting = 1.0; ///< restoring torque per radian of tilt

    double spawn_height = 10.0;
    double spawn_jitter = 1.0;   ///< initial x uniform in [-jitter, jitter]
    double spawn_velocity = 0.3; ///< initial vx, vy uniform in [-v, v]

    double pad_half_width = 2.0;
    double world_half_width = 15.0;
    double ceiling = 20.0;

    double safe_vertical_speed = 1.0;
    double safe_horizontal_speed = 1.0;
    double safe_tilt = 0.3;

    double terminal_bonus = 100.0;
    double terminal_penalty = 100.0;
    double main_fuel = 0.3;
    double side_fuel = 0.03;
};

enum class Outcome { running, landed, crashed, timeout };

inline const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::running:
        return "running";
    case Outcome::landed:
        return "landed";
    case Outcome::crashed:
        return "crashed";
    case Outcome::timeout:
        return "timeout";
    }
    return "?";
}

struct LanderState {
    double x = 0.0, y = 0.0;
    double vx = 0.0, vy = 0.0;
    double theta = 0.0, omega = 0.0;
    std::array<bool, 2> legs_contact{false, false};
    double fuel_used = 0.0;
    int step_count = 0;
    Outcome outcome = Outcome::running;

    double distance() const { return std::hypot(x, y); }
    double speed() const { return std::hypot(vx, vy); }
    int legs_down() const { return int(legs_contact[0]) + int(legs_contact[1]); }
};

struct LanderAction {
    double main_thrust = 0.0;
    double side_thrust = 0.0;

    LanderAction clipped() const
    {
        auto finite_or_zero = [](double v) { return std::isfinite(v) ? v : 0.0; };
        return {std::clamp(finite_or_zero(main_thrust), 0.0, 1.0), std::clamp(finite_or_zero(side_thrust), -1.0, 1.0)};
    }
};

inline const std::vector<ComponentDecl>& default_components()
{
    static const std::vector<ComponentDecl> decls{
        {"distance", +1, 100.0, true},
        {"velocity", -1, 100.0, true},
        {"tilting", -1, 100.0, true},
        {"contact", +1, 10.0, true},
        {"fuel", -1, 1.0, false},
    };
    return decls;
}

inline LanderState reset(const LanderConfig& cfg, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, 0x1a4d));
    LanderState s;
    s.x = rng.uniform(-cfg.spawn_jitter, cfg.spawn_jitter);
    s.y = cfg.spawn_height;
    s.vx = rng.uniform(-cfg.spawn_velocity, cfg.spawn_velocity);
    s.vy = rng.uniform(-cfg.spawn_velocity, cfg.spawn_velocity);
    return s;
}

struct Transition {
    LanderState state;
    RewardComponents components;
    Outcome outcome = Outcome::running;
};

/// One semi-implicit Euler step. Distance, speed and tilt enter the reward
/// as potential differences (previous minus current for distance, current
/// minus previous for speed and tilt) so that shaping rewards progress.
inline Transition step(const LanderConfig& cfg, const LanderState& state, const LanderAction& raw_action)
{
    if (state.outcome != Outcome::running)
        throw contract_violation("lander step after terminal state");
    const LanderAction a = raw_action.clipped();
    LanderState s = state;

    const double ax = -a.main_thrust * cfg.main_accel * std::sin(s.theta) + a.side_thrust * cfg.side_accel;
    const double ay = a.main_thrust * cfg.main_accel * std::cos(s.theta) - cfg.gravity;
    s.vx += ax * cfg.dt;
    s.vy += ay * cfg.dt;
    s.x += s.vx * cfg.dt;
    s.y += s.vy * cfg.dt;
    s.omega += (a.side_thrust * cfg.side_torque - cfg.angular_damping * s.omega - cfg.righting * s.theta) * cfg.dt;
    s.theta += s.omega * cfg.dt;

    const double fuel = a.main_thrust * cfg.main_fuel + std::abs(a.side_thrust) * cfg.side_fuel;
    s.fuel_used += fuel;
    ++s.step_count;

    Transition t;
    t.components.shaping["distance"] = state.distance() - s.distance();
    t.components.shaping["velocity"] = s.speed() - state.speed();
    t.components.shaping["tilting"] = std::abs(s.theta) - std::abs(state.theta);
    t.components.shaping["contact"] = 0.0;
    t.components.fixed["fuel"] = fuel;

    if (s.y <= 0.0) {
        s.y = 0.0;
        const bool upright = std::abs(s.theta) <= cfg.safe_tilt;
        s.legs_contact = {true, upright};
        t.components.shaping["contact"] = static_cast<double>(s.legs_down() - state.legs_down());
        const bool safe = upright && std::abs(s.vy) <= cfg.safe_vertical_speed &&
                          std::abs(s.vx) <= cfg.safe_horizontal_speed && std::abs(s.x) <= cfg.pad_half_width;
        s.outcome = safe ? Outcome::landed : Outcome::crashed;
        t.components.base = safe ? cfg.terminal_bonus : -cfg.terminal_penalty;
    } else if (std::abs(s.x) > cfg.world_half_width || s.y > cfg.ceiling) {
        s.outcome = Outcome::crashed;
        t.components.base = -cfg.terminal_penalty;
    } else if (s.step_count >= cfg.episode_cap) {
        s.outcome = Outcome::timeout;
    }
    t.outcome = s.outcome;
    t.state = s;
    return t;
}

struct TrajectoryStep {
    LanderState state;
    LanderAction action;
    double shaped_reward = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    Outcome outcome = Outcome::running;
    int episode_cap = 1000;
};

/// Steps to touchdown on a safe landing; the episode cap otherwise. Lower is better.
inline double task_score(const Trajectory& trajectory)
{
    switch (trajectory.outcome) {
    case Outcome::running:
        throw contract_violation("task_score of an incomplete trajectory");
    case Outcome::landed:
        return static_cast<double>(trajectory.steps.size());
    case Outcome::crashed:
    case Outcome::timeout:
        break;
    }
    return static_cast<double>(trajectory.episode_cap);
}

/// Normalised feature vector used as the policy observation.
inline std::vector<double> observe(const LanderConfig& cfg, const LanderState& s)
{
    return {s.x / cfg.spawn_height,
            s.y / cfg.spawn_height,
            s.vx / 2.0,
            s.vy / 2.0,
            s.theta,
            s.omega,
            static_cast<double>(s.legs_down()) / 2.0};
}

/// Environment-interface adapter around the free functions above.
class LanderEnv {
public:
    explicit LanderEnv(LanderConfig cfg = {}, std::vector<ComponentDecl> components = default_components())
        : cfg_(cfg), decls_(std::move(components))
    {
    }

    std::size_t observation_size() const { return 7; }
    std::size_t action_size() const { return 2; }

    std::vector<double> reset(std::uint64_t seed)
    {
        state_ = lander::reset(cfg_, seed);
        return observe(cfg_, state_);
    }

    StepResult step(std::span<const double> action)
    {
        auto t = lander::step(cfg_, state_, {action[0], action[1]});
        state_ = t.state;
        return {observe(cfg_, state_), std::move(t.components), t.outcome != Outcome::running};
    }

    double task_score() const
    {
        if (state_.outcome == Outcome::running)
            throw contract_violation("task_score before the episode ended");
        return state_.outcome == Outcome::landed ? static_cast<double>(state_.step_count)
                                                 : static_cast<double>(cfg_.episode_cap);
    }

    Direction direction() const { return Direction::minimize; }
    const std::vector<ComponentDecl>& components() const { return decls_; }
    const LanderConfig& config() const { return cfg_; }
    const LanderState& state() const { return state_; }

private:
    LanderConfig cfg_;
    std::vector<ComponentDecl> decls_;
    LanderState state_;
};

/// Runs a controller from `seed` until the episode ends and records the trajectory.
template <typename Controller>
Trajectory rollout(const LanderConfig& cfg, std::uint64_t seed, Controller&& controller,
                   const RewardParams& params = RewardParams::defaults(default_components()),
                   const std::vector<ComponentDecl>& decls = default_components())
{
    const auto signs = signs_of(decls);
    Trajectory traj;
    traj.episode_cap = cfg.episode_cap;
    LanderState s = reset(cfg, seed);
    while (s.outcome == Outcome::running) {
        const LanderAction a = controller(s);
        auto t = step(cfg, s, a);
        traj.steps.push_back({t.state, a.clipped(), shaped_reward(t.components, params, signs)});
        s = t.state;
    }
    traj.outcome = s.outcome;
    return traj;
}

/// Hand-written descend-then-brake controller used as a reference fixture.
inline LanderAction scripted_controller(const LanderConfig& cfg, const LanderState& s)
{
    const double target_vy = -std::clamp(0.25 * s.y + 0.3, 0.3, 3.0);
    const double main = std::clamp((cfg.gravity + 2.0 * (target_vy - s.vy)) / cfg.main_accel, 0.0, 1.0);
    const double side = std::clamp(-0.3 * s.x - 1.0 * s.vx, -0.5, 0.5);
    return {main, side};
}

} // namespace shapeopt::lander
