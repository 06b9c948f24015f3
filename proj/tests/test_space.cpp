#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "shapeopt/space.hpp"

using namespace shapeopt;

namespace {

ParamSpec lr_spec() { return ParamSpec::continuous("learning_rate", 1e-6, 0.01, true); }
ParamSpec batch_spec() { return ParamSpec::categorical("batch_size", {128, 256, 512}); }

} // namespace

TEST(Decode, LogBoundaries)
{
    const auto p = lr_spec();
    EXPECT_EQ(p.decode(0.0), 1e-6);
    EXPECT_EQ(p.decode(1.0), 0.01);
}

TEST(Decode, LogMidpointIsGeometricMean)
{
    EXPECT_NEAR(lr_spec().decode(0.5), std::sqrt(1e-6 * 0.01), 1e-18);
    EXPECT_NEAR(lr_spec().decode(0.5), 1e-4, 1e-16);
}

TEST(Decode, CategoricalBins)
{
    const auto p = batch_spec();
    EXPECT_EQ(p.decode(0.40), 256);
    EXPECT_EQ(p.decode(0.0), 128);
    EXPECT_EQ(p.decode(1.0), 512);
    EXPECT_EQ(p.decode(2.0 / 3.0), 512);
    EXPECT_EQ(p.decode(0.3333), 128);
}

TEST(Decode, LinearInterpolates)
{
    const auto p = ParamSpec::continuous("w", 0.0, 1000.0);
    EXPECT_EQ(p.decode(0.25), 250.0);
}

TEST(Decode, RejectsOutOfCubeAndWrongDimension)
{
    SearchSpace s({lr_spec(), batch_spec()});
    const std::vector<double> bad{0.5, 1.5};
    EXPECT_THROW(decode(s, bad), contract_violation);
    const std::vector<double> negative{-0.1, 0.5};
    EXPECT_THROW(decode(s, negative), contract_violation);
    const std::vector<double> short_unit{0.5};
    EXPECT_THROW(decode(s, short_unit), contract_violation);
    const std::vector<double> nan_unit{std::nan(""), 0.5};
    EXPECT_THROW(decode(s, nan_unit), contract_violation);
}

TEST(Encode, InverseExamples)
{
    EXPECT_NEAR(lr_spec().encode(1e-4), 0.5, 1e-12);
    EXPECT_EQ(ParamSpec::continuous("x", -3.0, 7.0).encode(-3.0), 0.0);
    EXPECT_EQ(lr_spec().encode(1e-6), 0.0);
    EXPECT_DOUBLE_EQ(batch_spec().encode(256), 0.5);
}

TEST(Encode, OutOfRangeNamesParameter)
{
    try {
        lr_spec().encode(0.5);
        FAIL() << "expected domain_error";
    } catch (const domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
    }
    EXPECT_THROW(batch_spec().encode(300), domain_error);
}

TEST(Encode, MissingNameIsRejected)
{
    SearchSpace s({lr_spec(), batch_spec()});
    EXPECT_THROW(encode(s, {{"learning_rate", 1e-4}}), domain_error);
}

TEST(Encode, RoundTripProperty)
{
    const std::vector<ParamSpec> specs{lr_spec(), ParamSpec::continuous("w", 0.0, 1000.0),
                                       ParamSpec::continuous("neg", -100.0, 0.0),
                                       ParamSpec::continuous("d", 0.001, 0.02, true)};
    Rng rng(11);
    for (const auto& p : specs)
        for (int i = 0; i < 20000; ++i) {
            const double u = rng.uniform();
            ASSERT_LE(std::abs(p.encode(p.decode(u)) - u), 1e-12) << p.name() << " u=" << u;
        }
}

TEST(Encode, CategoricalRoundTripsThroughBinMidpoints)
{
    const auto p = batch_spec();
    for (double v : p.choices())
        EXPECT_EQ(p.decode(p.encode(v)), v);
}

TEST(Decode, MonotoneProperty)
{
    const std::vector<ParamSpec> specs{lr_spec(), batch_spec(), ParamSpec::continuous("w", -5.0, 5.0)};
    Rng rng(3);
    for (const auto& p : specs)
        for (int i = 0; i < 5000; ++i) {
            double a = rng.uniform(), b = rng.uniform();
            if (a > b)
                std::swap(a, b);
            ASSERT_LE(p.decode(a), p.decode(b));
        }
}

TEST(Decode, LogMidpointProperty)
{
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double lo = std::exp(rng.uniform(-20.0, 5.0));
        const double hi = lo * std::exp(rng.uniform(0.01, 15.0));
        const auto p = ParamSpec::continuous("x", lo, hi, true);
        ASSERT_NEAR(p.decode(0.5), std::sqrt(lo * hi), 1e-12 * std::sqrt(lo * hi));
    }
}

TEST(ParamSpec, InvalidDeclarations)
{
    EXPECT_THROW(ParamSpec::continuous("x", 1.0, 1.0), domain_error);
    EXPECT_THROW(ParamSpec::continuous("x", 2.0, 1.0), domain_error);
    EXPECT_THROW(ParamSpec::continuous("x", 0.0, 1.0, true), domain_error);
    EXPECT_THROW(ParamSpec::continuous("x", -1.0, -0.1, true), domain_error);
    EXPECT_THROW(ParamSpec::categorical("x", {}), domain_error);
}

TEST(SearchSpace, Invariants)
{
    EXPECT_THROW(SearchSpace({}), domain_error);
    EXPECT_THROW(SearchSpace({lr_spec(), lr_spec()}), domain_error);
    SearchSpace s({lr_spec(), batch_spec()});
    EXPECT_EQ(s.dimension(), 2u);
    EXPECT_EQ(s.index_of("batch_size"), 1u);
    EXPECT_FALSE(s.index_of("nope").has_value());
}

TEST(WeightSearchRange, TableRows)
{
    const std::vector<std::pair<double, std::pair<double, double>>> rows{
        {100, {0, 1000}}, {10, {0, 100}},  {1, {0, 10}},   {1.25, {0, 10}}, {5, {0, 10}},    {0.5, {0, 1}},
        {0.05, {0, 1}},   {0.01, {0, 1}},  {0, {0, 1}},    {50, {0, 100}},  {-10, {-100, 0}}};
    for (const auto& [w, range] : rows)
        EXPECT_EQ(weight_search_range(w), range) << "default " << w;
}

TEST(WeightSearchRange, SmallestExponentProperty)
{
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const double w = std::exp(rng.uniform(-10.0, 12.0)) * (rng.uniform() < 0.3 ? -1.0 : 1.0);
        const auto [lo, hi] = weight_search_range(w);
        const double bound = w < 0 ? -lo : hi;
        EXPECT_EQ(w < 0 ? hi : lo, 0.0);
        EXPECT_LT(std::abs(w), bound);
        if (bound > 1.0)
            EXPECT_GE(std::abs(w), bound / 10.0 * (1 - 1e-15));
    }
}

TEST(WeightSearchRange, NonFiniteRejected)
{
    EXPECT_THROW(weight_search_range(std::nan("")), domain_error);
    EXPECT_THROW(weight_search_range(INFINITY), domain_error);
}

TEST(SampleUniform, Deterministic)
{
    SearchSpace s({lr_spec(), batch_spec()});
    Rng a(7), b(7);
    const auto ca = sample_uniform(s, a);
    const auto cb = sample_uniform(s, b);
    EXPECT_EQ(ca.unit(), cb.unit());
    EXPECT_EQ(ca.values(), cb.values());
    EXPECT_EQ(ca.id(), cb.id());
}

TEST(SampleUniform, LinearMean)
{
    SearchSpace s({ParamSpec::continuous("x", 0.0, 1.0)});
    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i)
        sum += sample_uniform(s, rng).value("x");
    EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
}

TEST(SampleUniform, LogMedianNearGeometricMean)
{
    SearchSpace s({lr_spec()});
    Rng rng(2);
    std::vector<double> v;
    for (int i = 0; i < 100000; ++i)
        v.push_back(sample_uniform(s, rng).value("learning_rate"));
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    const double med = v[v.size() / 2];
    EXPECT_LT(med, 1e-4 * 1.2);
    EXPECT_GT(med, 1e-4 / 1.2);
}

TEST(Configuration, DecodedValuesMatchUnitAndIdIsStable)
{
    SearchSpace s({lr_spec(), batch_spec()});
    const Configuration c(s, {0.5, 0.4});
    EXPECT_EQ(c.values(), decode(s, c.unit()));
    EXPECT_EQ(c.value("batch_size"), 256);
    EXPECT_EQ(c.id(), Configuration(s, {0.5, 0.4}).id());
    EXPECT_NE(c.id(), Configuration(s, {0.5, 0.41}).id());
    EXPECT_EQ(c.id().size(), 16u);
}

TEST(Configuration, IdsRarelyCollide)
{
    std::set<std::string> ids;
    Rng rng(9);
    for (int i = 0; i < 10000; ++i)
        ids.insert(unit_id(std::vector<double>{rng.uniform(), rng.uniform()}));
    EXPECT_EQ(ids.size(), 10000u);
}

TEST(SearchSpace, FilterKeepsOrderAndRoles)
{
    SearchSpace s({lr_spec(), ParamSpec::continuous("distance", 0, 1000, false, ParamRole::reward_weight), batch_spec()});
    const auto hp = s.filter([](const ParamSpec& p) { return p.role() == ParamRole::hyperparameter; });
    ASSERT_TRUE(hp);
    EXPECT_EQ(hp->dimension(), 2u);
    EXPECT_EQ((*hp)[1].name(), "batch_size");
    EXPECT_FALSE(s.filter([](const ParamSpec& p) { return p.role() == ParamRole::reward_scale; }));
}
