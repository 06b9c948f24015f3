#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shapeopt/experiment.hpp"
#include "shapeopt/landscape.hpp"

using namespace shapeopt;
namespace fs = std::filesystem;

namespace {

LandscapeGrid random_grid(Rng& rng, Direction dir)
{
    const std::size_t ra = 2 + rng.index(8), rb = 2 + rng.index(8);
    LandscapeGrid g{make_axis(ParamSpec::continuous("a", 0, 1), ra), make_axis(ParamSpec::continuous("b", 1, 2), rb),
                    dir, {}, std::vector<GridCell>(ra * rb)};
    for (auto& c : g.cells) {
        // Coarse values so ties occur.
        c.mean = static_cast<double>(rng.index(6));
        c.n = 1;
        c.failed = rng.uniform() < 0.1;
    }
    return g;
}

/// Independent scan: first index attaining the best score, failed cells last.
std::vector<std::size_t> scan(const LandscapeGrid& g, bool rows)
{
    const std::size_t ra = g.axis_a.values.size(), rb = g.axis_b.values.size();
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < (rows ? ra : rb); ++l) {
        std::vector<double> line;
        for (std::size_t k = 0; k < (rows ? rb : ra); ++k) {
            const auto& c = rows ? g.cells[l * rb + k] : g.cells[k * rb + l];
            const double s = g.direction == Direction::maximize ? c.mean : -c.mean;
            line.push_back(c.failed ? -1e300 : s);
        }
        std::size_t best = 0;
        for (std::size_t k = 0; k < line.size(); ++k)
            if (line[k] > line[best])
                best = k;
        out.push_back(best);
    }
    return out;
}

fs::path scratch_dir(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("shapeopt_landscape_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig tiny_lander_config()
{
    return load_config(SHAPEOPT_CONFIG_DIR "/lander.json",
                       {"trainer.budget=1024", "trainer.eval_episodes=2", "trainer.baseline.batch_size=256"});
}

} // namespace

TEST(MakeAxis, Examples)
{
    const auto log_axis = make_axis(ParamSpec::continuous("d", 0.001, 0.1, true), 3);
    ASSERT_EQ(log_axis.values.size(), 3u);
    EXPECT_EQ(log_axis.values[0], 0.001);
    EXPECT_NEAR(log_axis.values[1], 0.01, 1e-15);
    EXPECT_EQ(log_axis.values[2], 0.1);

    const auto lin = make_axis(ParamSpec::continuous("w", 0, 1000), 5);
    EXPECT_EQ(lin.values, (std::vector<double>{0, 250, 500, 750, 1000}));

    const auto cat = make_axis(ParamSpec::categorical("batch", {256, 512}), 10);
    EXPECT_EQ(cat.values, (std::vector<double>{256, 512}));
    EXPECT_STREQ(cat.scale(), "categorical");
    EXPECT_STREQ(log_axis.scale(), "log");
    EXPECT_STREQ(lin.scale(), "linear");
}

TEST(MakeAxis, Errors)
{
    EXPECT_THROW(make_axis(ParamSpec::continuous("w", 0, 1), 1), domain_error);
}

TEST(MakeAxis, ConstantRatioAndDifference)
{
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const double lo = std::exp(rng.uniform(-12, 2));
        const double hi = lo * std::exp(rng.uniform(0.5, 10));
        const std::size_t res = 2 + rng.index(99);
        const auto axis = make_axis(ParamSpec::continuous("x", lo, hi, true), res);
        ASSERT_EQ(axis.values.front(), lo);
        ASSERT_EQ(axis.values.back(), hi);
        const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(res - 1));
        for (std::size_t k = 1; k < res; ++k)
            ASSERT_NEAR(axis.values[k] / axis.values[k - 1], ratio, 1e-12);

        const auto lin = make_axis(ParamSpec::continuous("y", -lo, hi), res);
        const double diff = (hi + lo) / static_cast<double>(res - 1);
        for (std::size_t k = 1; k < res; ++k)
            ASSERT_NEAR(lin.values[k] - lin.values[k - 1], diff, 1e-12 * (hi + lo));
    }
}

TEST(BestResponse, MatchesExhaustiveScan)
{
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        const auto g = random_grid(rng, i % 2 ? Direction::maximize : Direction::minimize);
        ASSERT_EQ(best_response(g, Along::axis_b), scan(g, true));
        ASSERT_EQ(best_response(g, Along::axis_a), scan(g, false));
    }
}

TEST(BestResponse, ConstantGridPicksFirstIndex)
{
    Rng rng(1);
    auto g = random_grid(rng, Direction::maximize);
    for (auto& c : g.cells)
        c = {4.0, 0.0, 1, false};
    for (auto idx : best_response(g, Along::axis_b))
        EXPECT_EQ(idx, 0u);
    for (auto idx : best_response(g, Along::axis_a))
        EXPECT_EQ(idx, 0u);
}

TEST(BestResponse, MinimizePicksRowMinima)
{
    LandscapeGrid g{make_axis(ParamSpec::continuous("a", 0, 1), 2), make_axis(ParamSpec::continuous("b", 0, 1), 3),
                    Direction::minimize, {}, {}};
    for (double m : {5.0, 2.0, 9.0, 1.0, 7.0, 3.0})
        g.cells.push_back({m, 0.0, 1, false});
    EXPECT_EQ(best_response(g, Along::axis_b), (std::vector<std::size_t>{1, 0}));
    g.at(1, 0).failed = true;
    EXPECT_EQ(best_response(g, Along::axis_b), (std::vector<std::size_t>{1, 2}));
}

TEST(Sweep, AccountingAndSubstitution)
{
    const auto a = make_axis(ParamSpec::continuous("x", 0, 1), 3);
    const auto b = make_axis(ParamSpec::continuous("y", 10, 20), 2);
    const std::vector<std::uint64_t> seeds{1, 2};
    std::size_t calls = 0, observed = 0;
    const auto g = sweep(
        a, b, {{"x", -1.0}, {"y", -1.0}, {"z", 7.0}}, seeds, Direction::maximize,
        [&](const ValueMap& v, std::uint64_t seed) {
            ++calls;
            EXPECT_EQ(v.at("z"), 7.0);
            return v.at("x") + v.at("y") + static_cast<double>(seed);
        },
        [&](const CellRun&) { ++observed; });
    EXPECT_EQ(calls, 12u);
    EXPECT_EQ(observed, 12u);
    ASSERT_EQ(g.cells.size(), 6u);
    EXPECT_DOUBLE_EQ(g.at(2, 1).mean, 1.0 + 20.0 + 1.5);
    EXPECT_DOUBLE_EQ(g.at(2, 1).std, std::sqrt(0.5));
    EXPECT_EQ(g.at(2, 1).n, 2u);
}

TEST(Sweep, FailedTrainingsMarkCellsWithoutAborting)
{
    const auto a = make_axis(ParamSpec::continuous("x", 0, 1), 2);
    const auto b = make_axis(ParamSpec::continuous("y", 0, 1), 2);
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto g = sweep(a, b, {}, seeds, Direction::maximize, [](const ValueMap& v, std::uint64_t seed) -> double {
        if (v.at("x") == 1.0 && seed == 2)
            throw training_diverged("x");
        return 1.0;
    });
    EXPECT_FALSE(g.at(0, 0).failed);
    EXPECT_TRUE(g.at(1, 0).failed);
    EXPECT_TRUE(g.at(1, 1).failed);
    EXPECT_EQ(g.at(1, 1).n, 1u);
    EXPECT_EQ(best_response(g, Along::axis_a), (std::vector<std::size_t>{0, 0}));
}

TEST(Sweep, OverlappingAxesRejected)
{
    const auto a = make_axis(ParamSpec::continuous("x", 0, 1), 2);
    const std::vector<std::uint64_t> seeds{1};
    EXPECT_THROW(sweep(a, a, {}, seeds, Direction::maximize, [](const ValueMap&, std::uint64_t) { return 0.0; }),
                 domain_error);
    const std::vector<std::uint64_t> none;
    const auto b = make_axis(ParamSpec::continuous("y", 0, 1), 2);
    EXPECT_THROW(sweep(a, b, {}, none, Direction::maximize, [](const ValueMap&, std::uint64_t) { return 0.0; }),
                 domain_error);
}

TEST(GridCsv, Headers)
{
    LandscapeGrid g{make_axis(ParamSpec::continuous("learning_rate", 0.001, 0.1, true), 2),
                    make_axis(ParamSpec::continuous("distance", 0, 1000), 2), Direction::minimize, {},
                    std::vector<GridCell>(4, GridCell{500.0, 1.0, 3, false})};
    std::ostringstream grid, best;
    write_grid_csv(grid, g);
    write_best_response_csv(best, g);
    std::string line;
    std::istringstream gs(grid.str());
    std::getline(gs, line);
    EXPECT_EQ(line, "learning_rate:log,distance:linear,mean,std,n,failed");
    std::size_t rows = 0;
    while (std::getline(gs, line))
        ++rows;
    EXPECT_EQ(rows, 4u);
    std::istringstream bs(best.str());
    std::getline(bs, line);
    EXPECT_EQ(line, "fixed_param,fixed_value,best_param,best_value,best_mean");
    std::getline(bs, line);
    EXPECT_EQ(line.rfind("learning_rate:log,", 0), 0u) << line;
    EXPECT_NE(line.find(",distance:linear,0,500"), std::string::npos) << line;
}

TEST(LanderSweep, JournalsOneRecordPerTraining)
{
    const auto cfg = tiny_lander_config();
    const auto dir = scratch_dir("journal");
    const auto grid = run_sweep(cfg, "entropy_coef", "contact", 2, 1, dir);
    const auto contents = read_journal(dir / "landscape" / "entropy_coef__contact.jsonl");
    EXPECT_EQ(contents.header.kind, "sweep");
    EXPECT_EQ(contents.header.config_hash, cfg.hash);
    ASSERT_EQ(contents.entries.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(contents.entries[i].at("seq"), i);
        EXPECT_EQ(contents.entries[i].at("status"), "ok");
    }
    EXPECT_EQ(grid.cells.size(), 4u);
    for (const auto& c : grid.cells) {
        EXPECT_EQ(c.n, 1u);
        EXPECT_GE(c.mean, 0.0);
        EXPECT_LE(c.mean, 1000.0);
    }
    const auto saved = grid_from_json(read_json_file((dir / "landscape" / "entropy_coef__contact.json").string()));
    EXPECT_EQ(saved.axis_a.values, grid.axis_a.values);
    ASSERT_EQ(saved.cells.size(), grid.cells.size());
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
        EXPECT_EQ(saved.cells[i].mean, grid.cells[i].mean);
}

TEST(LanderSweep, BaselineCellMatchesStandaloneTraining)
{
    const auto cfg = tiny_lander_config();
    const auto dir = scratch_dir("baseline");
    // entropy_coef's lower bound and contact's default both sit on the grid.
    const auto grid = run_sweep(cfg, "entropy_coef", "contact", 11, 1, dir);
    const auto frozen = cfg.frozen_values();
    ASSERT_EQ(grid.axis_a.values[0], frozen.at("entropy_coef"));
    ASSERT_EQ(grid.axis_b.values[1], frozen.at("contact"));
    const std::uint64_t seed = derive_seed(cfg.protocol.master_seed, 0x5eebu, 0);
    const double standalone = mean_of(task_scores(train_and_evaluate(cfg, frozen, cfg.trainer.budget, seed)));
    EXPECT_EQ(grid.at(0, 1).mean, standalone);
    EXPECT_EQ(read_journal(dir / "landscape" / "entropy_coef__contact.jsonl").entries.size(), 121u);
}

TEST(LanderSweep, UnknownParameterIsAConfigError)
{
    const auto cfg = tiny_lander_config();
    EXPECT_THROW(run_sweep(cfg, "nope", "contact", 2, 1, scratch_dir("unknown")), config_error);
}
