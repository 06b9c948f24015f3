#include <gtest/gtest.h>

#include <cmath>

#include "shapeopt/lander.hpp"

using namespace shapeopt;
using namespace shapeopt::lander;

namespace {

LanderState airborne(double x, double y, double vx, double vy)
{
    LanderState s;
    s.x = x;
    s.y = y;
    s.vx = vx;
    s.vy = vy;
    return s;
}

double total_return(const Trajectory& t)
{
    double r = 0.0;
    for (const auto& s : t.steps)
        r += s.shaped_reward;
    return r;
}

LanderAction do_nothing(const LanderState&) { return {0.0, 0.0}; }

} // namespace

TEST(Reset, Deterministic)
{
    const LanderConfig cfg;
    const auto a = reset(cfg, 12);
    const auto b = reset(cfg, 12);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.vx, b.vx);
    EXPECT_EQ(a.vy, b.vy);
    EXPECT_EQ(a.step_count, 0);
    EXPECT_EQ(a.fuel_used, 0.0);
    EXPECT_EQ(a.outcome, Outcome::running);
}

TEST(Reset, SpawnDistribution)
{
    const LanderConfig cfg;
    double min_x = 1e9, max_x = -1e9;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto s = reset(cfg, seed);
        EXPECT_EQ(s.y, cfg.spawn_height);
        EXPECT_LE(std::abs(s.x), cfg.spawn_jitter);
        EXPECT_LE(std::abs(s.vx), cfg.spawn_velocity);
        EXPECT_LE(std::abs(s.vy), cfg.spawn_velocity);
        min_x = std::min(min_x, s.x);
        max_x = std::max(max_x, s.x);
    }
    EXPECT_LT(min_x, -0.9 * cfg.spawn_jitter);
    EXPECT_GT(max_x, 0.9 * cfg.spawn_jitter);
}

TEST(Step, FreeFallVelocity)
{
    const LanderConfig cfg;
    const auto s = airborne(0.5, 8.0, 0.1, -0.4);
    const auto t = step(cfg, s, {0.0, 0.0});
    EXPECT_EQ(t.state.vy, s.vy + (-cfg.gravity) * cfg.dt);
    EXPECT_NEAR(t.state.vy - s.vy, -cfg.gravity * cfg.dt, 1e-15);
    EXPECT_EQ(t.state.vx, s.vx);
    EXPECT_EQ(t.components.base, 0.0);
    EXPECT_EQ(t.outcome, Outcome::running);
}

TEST(Step, SafeLandingOnPad)
{
    const LanderConfig cfg;
    const auto t = step(cfg, airborne(0.5, 0.01, 0.1, -0.5), {0.0, 0.0});
    EXPECT_EQ(t.outcome, Outcome::landed);
    EXPECT_EQ(t.components.base, cfg.terminal_bonus);
    EXPECT_EQ(t.state.legs_down(), 2);
    EXPECT_EQ(t.components.shaping.at("contact"), 2.0);
}

TEST(Step, HardTouchdownCrashes)
{
    const LanderConfig cfg;
    const auto t = step(cfg, airborne(0.0, 0.1, 0.0, -5.0), {0.0, 0.0});
    EXPECT_EQ(t.outcome, Outcome::crashed);
    EXPECT_EQ(t.components.base, -cfg.terminal_penalty);
}

TEST(Step, OffPadTouchdownCrashes)
{
    const LanderConfig cfg;
    const auto t = step(cfg, airborne(cfg.pad_half_width + 1.0, 0.01, 0.0, -0.2), {0.0, 0.0});
    EXPECT_EQ(t.outcome, Outcome::crashed);
}

TEST(Step, LeavingTheWorldCrashes)
{
    const LanderConfig cfg;
    const auto t = step(cfg, airborne(cfg.world_half_width - 0.001, 5.0, 1.0, 0.0), {0.0, 0.0});
    EXPECT_EQ(t.outcome, Outcome::crashed);
    EXPECT_EQ(t.components.base, -cfg.terminal_penalty);
}

TEST(Step, TimeoutAtCap)
{
    LanderConfig cfg;
    cfg.episode_cap = 5;
    auto s = airborne(0.0, 10.0, 0.0, 0.0);
    Transition t;
    for (int i = 0; i < 5; ++i) {
        t = step(cfg, s, {0.0, 0.0});
        s = t.state;
    }
    EXPECT_EQ(t.outcome, Outcome::timeout);
    EXPECT_EQ(t.components.base, 0.0);
    EXPECT_EQ(s.step_count, 5);
}

TEST(Step, AfterTerminalIsAContractViolation)
{
    const LanderConfig cfg;
    const auto t = step(cfg, airborne(0.0, 0.01, 0.0, -0.3), {0.0, 0.0});
    ASSERT_NE(t.outcome, Outcome::running);
    EXPECT_THROW(step(cfg, t.state, {0.0, 0.0}), contract_violation);
}

TEST(Step, ActionsAreClipped)
{
    const LanderConfig cfg;
    const auto s = airborne(0.0, 8.0, 0.0, 0.0);
    const auto a = step(cfg, s, {5.0, -7.0});
    const auto b = step(cfg, s, {1.0, -1.0});
    EXPECT_EQ(a.state.vy, b.state.vy);
    EXPECT_EQ(a.state.vx, b.state.vx);
    EXPECT_EQ(a.components.fixed.at("fuel"), cfg.main_fuel + cfg.side_fuel);
}

TEST(Step, DistanceComponentRewardsApproach)
{
    const LanderConfig cfg;
    const auto down = step(cfg, airborne(0.0, 5.0, 0.0, -1.0), {0.0, 0.0});
    EXPECT_GT(down.components.shaping.at("distance"), 0.0);
    const auto up = step(cfg, airborne(0.0, 5.0, 0.0, 3.0), {0.0, 0.0});
    EXPECT_LT(up.components.shaping.at("distance"), 0.0);
}

TEST(Step, EnergyNonIncreasingWithoutThrust)
{
    const LanderConfig cfg;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto s = reset(cfg, seed);
        auto energy = [&](const LanderState& st) {
            return 0.5 * (st.vx * st.vx + st.vy * st.vy) + cfg.gravity * st.y;
        };
        while (s.outcome == Outcome::running) {
            const auto t = step(cfg, s, {0.0, 0.0});
            if (t.outcome != Outcome::running)
                break;
            ASSERT_LE(energy(t.state), energy(s) + 1e-12);
            s = t.state;
        }
    }
}

TEST(Rollout, DeterministicGivenSeedAndActions)
{
    const LanderConfig cfg;
    auto controller = [&](const LanderState& s) { return scripted_controller(cfg, s); };
    const auto a = rollout(cfg, 5, controller);
    const auto b = rollout(cfg, 5, controller);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        EXPECT_EQ(a.steps[i].state.x, b.steps[i].state.x);
        EXPECT_EQ(a.steps[i].state.y, b.steps[i].state.y);
        EXPECT_EQ(a.steps[i].shaped_reward, b.steps[i].shaped_reward);
    }
}

TEST(Rollout, DefaultShapedRewardMatchesHandFormula)
{
    const LanderConfig cfg;
    auto s = reset(cfg, 3);
    const auto traj = rollout(cfg, 3, [&](const LanderState& st) { return scripted_controller(cfg, st); });
    for (const auto& rec : traj.steps) {
        const auto t = step(cfg, s, rec.action);
        const auto& f = t.components.shaping;
        const double hand = t.components.base + 100.0 * f.at("distance") - 100.0 * f.at("velocity") -
                            100.0 * f.at("tilting") + 10.0 * f.at("contact") - t.components.fixed.at("fuel");
        ASSERT_NEAR(rec.shaped_reward, hand, 1e-12);
        s = t.state;
    }
}

TEST(TaskScore, Rules)
{
    Trajectory landed;
    landed.steps.resize(250);
    landed.outcome = Outcome::landed;
    EXPECT_EQ(task_score(landed), 250.0);

    Trajectory crashed;
    crashed.steps.resize(10);
    crashed.outcome = Outcome::crashed;
    EXPECT_EQ(task_score(crashed), 1000.0);

    Trajectory timeout;
    timeout.steps.resize(1000);
    timeout.outcome = Outcome::timeout;
    EXPECT_EQ(task_score(timeout), 1000.0);

    Trajectory running;
    EXPECT_THROW(task_score(running), contract_violation);
}

TEST(Controllers, ScriptedLandsAndBeatsDoingNothing)
{
    const LanderConfig cfg;
    int landed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto t = rollout(cfg, seed, [&](const LanderState& s) { return scripted_controller(cfg, s); });
        landed += t.outcome == Outcome::landed;
        EXPECT_LT(task_score(t), cfg.episode_cap);
    }
    EXPECT_EQ(landed, 100);

    const auto idle = rollout(cfg, 0, do_nothing);
    EXPECT_EQ(task_score(idle), cfg.episode_cap);
    const auto scripted = rollout(cfg, 0, [&](const LanderState& s) { return scripted_controller(cfg, s); });
    EXPECT_GT(total_return(scripted), total_return(idle));
}

TEST(Controllers, FrozenShapedReturns)
{
    const LanderConfig cfg;
    const auto idle = rollout(cfg, 0, do_nothing);
    const auto scripted = rollout(cfg, 0, [&](const LanderState& s) { return scripted_controller(cfg, s); });
    EXPECT_NEAR(total_return(idle), 255.63932612482745, 1e-6);
    EXPECT_NEAR(total_return(scripted), 1076.9677808451277, 1e-6);
    EXPECT_EQ(scripted.steps.size(), 178u);
    EXPECT_EQ(idle.outcome, Outcome::crashed);
}

TEST(LanderEnv, AdapterMatchesFreeFunctions)
{
    LanderEnv env;
    EXPECT_EQ(env.observation_size(), 7u);
    EXPECT_EQ(env.action_size(), 2u);
    EXPECT_EQ(env.direction(), Direction::minimize);
    const auto obs = env.reset(4);
    EXPECT_EQ(obs.size(), 7u);
    EXPECT_THROW(env.task_score(), contract_violation);
    const std::vector<double> zero{0.0, 0.0};
    StepResult r;
    do {
        r = env.step(zero);
    } while (!r.done);
    EXPECT_EQ(env.task_score(), 1000.0);
}
