#include <gtest/gtest.h>

#include <cmath>

#include "shapeopt/lander.hpp"
#include "shapeopt/shaping.hpp"

using namespace shapeopt;

namespace {

const std::vector<ComponentDecl>& decls() { return lander::default_components(); }

RewardComponents components(double base, double dist, double vel, double tilt, double contact, double fuel)
{
    RewardComponents c;
    c.base = base;
    c.shaping = {{"distance", dist}, {"velocity", vel}, {"tilting", tilt}, {"contact", contact}};
    c.fixed = {{"fuel", fuel}};
    return c;
}

RewardParams zero_weights(double alpha = 1.0)
{
    return RewardParams(alpha, {{"distance", 0}, {"velocity", 0}, {"tilting", 0}, {"contact", 0}});
}

} // namespace

TEST(ShapedReward, ShapingOff)
{
    EXPECT_EQ(shaped_reward(components(100, 0.3, 0.2, 0.1, 1, 0), zero_weights(), signs_of(decls())), 100.0);
}

TEST(ShapedReward, DistanceTerm)
{
    auto p = zero_weights();
    p.weights["distance"] = 100;
    EXPECT_NEAR(shaped_reward(components(0, 0.02, 0, 0, 0, 0), p, signs_of(decls())), 2.0, 1e-12);
}

TEST(ShapedReward, SignsAndUnweightedFuel)
{
    const auto p = RewardParams::defaults(decls());
    const double r = shaped_reward(components(-100, 0.5, 0.25, 0.125, 2, 0.3), p, signs_of(decls()));
    EXPECT_NEAR(r, -100 + 100 * 0.5 - 100 * 0.25 - 100 * 0.125 + 10 * 2 - 0.3, 1e-12);
}

TEST(ShapedReward, AlphaDoubles)
{
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto c = components(rng.uniform(-100, 100), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                                  rng.uniform(0, 2), rng.uniform(0, 1));
        auto p1 = RewardParams::defaults(decls(), 1.0);
        auto p2 = RewardParams::defaults(decls(), 2.0);
        EXPECT_NEAR(shaped_reward(c, p2, signs_of(decls())), 2.0 * shaped_reward(c, p1, signs_of(decls())), 1e-9);
    }
}

TEST(ShapedReward, LinearInEachWeight)
{
    const auto c = components(3, 0.4, 0.7, 0.2, 1, 0.5);
    const auto signs = signs_of(decls());
    for (const char* name : {"distance", "velocity", "tilting", "contact"}) {
        auto at = [&](double w) {
            auto p = RewardParams::defaults(decls());
            p.weights[name] = w;
            return shaped_reward(c, p, signs);
        };
        const double slope1 = (at(2.0) - at(1.0)) / 1.0;
        const double slope2 = (at(50.0) - at(10.0)) / 40.0;
        EXPECT_NEAR(slope1, slope2, 1e-9) << name;
    }
}

TEST(ShapedReward, MissingWeightNamesComponent)
{
    RewardParams p(1.0, {{"distance", 1}, {"velocity", 1}, {"tilting", 1}});
    try {
        shaped_reward(components(0, 1, 1, 1, 1, 0), p, signs_of(decls()));
        FAIL() << "expected domain_error";
    } catch (const domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("contact"), std::string::npos);
    }
}

TEST(ShapedReward, UndeclaredSignRejected)
{
    RewardComponents c;
    c.fixed["mystery"] = 1.0;
    EXPECT_THROW(shaped_reward(c, zero_weights(), signs_of(decls())), domain_error);
}

TEST(RewardParams, AlphaMustBePositive)
{
    EXPECT_THROW(RewardParams(0.0, {}), domain_error);
    EXPECT_THROW(RewardParams(-1.0, {}), domain_error);
    EXPECT_THROW(RewardParams(std::nan(""), {}), domain_error);
}

TEST(ExplicitScale, Examples)
{
    const std::vector<double> w{2, 2, 1};
    const auto out = explicit_scale(w, 2.5);
    EXPECT_NEAR(out[0], 1.0, 1e-15);
    EXPECT_NEAR(out[1], 1.0, 1e-15);
    EXPECT_NEAR(out[2], 0.5, 1e-15);

    const std::vector<double> fixed{0.5, 1.5, 0.5};
    const std::vector<double> hat{1, 1, 0.5};
    const auto same = explicit_scale(fixed, hat);
    for (std::size_t i = 0; i < fixed.size(); ++i)
        EXPECT_NEAR(same[i], fixed[i], 1e-15);

    const std::vector<double> h{6.35, 0, 0};
    EXPECT_EQ(explicit_scale(h, 6.35), h);
}

TEST(ExplicitScale, NormInvariantProperty)
{
    Rng rng(2);
    for (double target : {2.5, 6.35}) {
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> w(1 + rng.index(8));
            for (auto& x : w)
                x = rng.uniform(-10, 10);
            const auto out = explicit_scale(w, target);
            EXPECT_NEAR(l1_norm(out), target, 1e-12);
            for (std::size_t j = 0; j < w.size(); ++j)
                EXPECT_NEAR(out[j] * l1_norm(w), w[j] * target, 1e-9);
        }
    }
}

TEST(ExplicitScale, ZeroWeightsAreDegenerate)
{
    const std::vector<double> zero{0, 0, 0};
    EXPECT_THROW(explicit_scale(zero, 2.5), degenerate_weights);
}

TEST(ExplicitScale, MapFormUsesDefaultNorm)
{
    const std::map<std::string, double> defaults{{"a", 1.0}, {"b", 1.5}};
    const auto out = explicit_scale(std::map<std::string, double>{{"a", 4.0}, {"b", 1.0}}, defaults);
    EXPECT_NEAR(out.at("a"), 2.0, 1e-15);
    EXPECT_NEAR(out.at("b"), 0.5, 1e-15);
}

TEST(ImplicitRanges, ScalesWeightsAndDropsAlpha)
{
    SearchSpace s({ParamSpec::continuous("learning_rate", 1e-4, 1e-2, true),
                   ParamSpec::continuous("w_dist", 0, 10, false, ParamRole::reward_weight),
                   ParamSpec::continuous("w_force", 0, 1, false, ParamRole::reward_weight),
                   ParamSpec::continuous("alpha", 0, 10, false, ParamRole::reward_scale)});
    const auto ant = implicit_ranges(s, 2.5);
    EXPECT_EQ(ant.dimension(), 3u);
    EXPECT_FALSE(ant.index_of("alpha"));
    EXPECT_EQ(ant[*ant.index_of("w_dist")].hi(), 25.0);
    EXPECT_EQ(ant[*ant.index_of("w_dist")].lo(), 0.0);
    EXPECT_EQ(ant[*ant.index_of("learning_rate")].hi(), 1e-2);

    const auto humanoid = implicit_ranges(s, 6.35);
    EXPECT_EQ(humanoid[*humanoid.index_of("w_force")].hi(), 6.35);

    const auto unit = implicit_ranges(s, 1.0);
    EXPECT_EQ(unit.dimension(), 3u);
    for (const auto& p : unit.params()) {
        const auto& orig = s[*s.index_of(p.name())];
        EXPECT_EQ(p.lo(), orig.lo());
        EXPECT_EQ(p.hi(), orig.hi());
    }
    EXPECT_THROW(implicit_ranges(s, 0.0), domain_error);
}
