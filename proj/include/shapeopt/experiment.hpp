#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "dehb.hpp"
#include "errors.hpp"
#include "journal.hpp"
#include "lander.hpp"
#include "landscape.hpp"
#include "metrics.hpp"
#include "trainer.hpp"

namespace shapeopt {

namespace fs = std::filesystem;

/// Every random stream of an experiment is a hash of the master seed, the
/// arm, the optimization run and a purpose tag.
struct SeedPlan {
    const ExperimentConfig& cfg;

    std::uint64_t optimizer(std::size_t run) const
    {
        return derive_seed(cfg.protocol.master_seed, cfg.arm_code(), run, 0xde4bu);
    }

    std::uint64_t fitness(std::size_t run, std::uint64_t seq, std::size_t k) const
    {
        if (cfg.optimizer.fixed_fitness_seeds)
            return derive_seed(cfg.protocol.master_seed, cfg.arm_code(), run, 0xf1edu, k);
        return derive_seed(cfg.protocol.master_seed, cfg.arm_code(), run, 0xf17eu, seq, k);
    }

    std::uint64_t reward_sample(std::size_t run, std::uint64_t seq) const
    {
        return derive_seed(cfg.protocol.master_seed, cfg.arm_code(), run, 0x5a5u, seq);
    }

    std::uint64_t evaluation(std::size_t run, std::size_t index) const
    {
        return derive_seed(cfg.protocol.master_seed, cfg.arm_code(), run, 0xe7au, index);
    }

    std::uint64_t sweep(std::size_t index) const { return derive_seed(cfg.protocol.master_seed, 0x5eebu, index); }
};

inline RewardParams reward_params_for(const ExperimentConfig& cfg, const ValueMap& values)
{
    const auto defaults = cfg.environment.default_weights();
    std::map<std::string, double> weights;
    for (const auto& [name, def] : defaults) {
        const auto it = values.find(name);
        weights[name] = it == values.end() ? def : it->second;
    }
    double alpha = cfg.default_alpha;
    for (const auto& p : cfg.space)
        if (p.role() == ParamRole::reward_scale && values.contains(p.name()))
            alpha = values.at(p.name());
    if (cfg.scaling.mode == ScalingMode::implicit_norm)
        alpha = cfg.default_alpha;
    if (cfg.scaling.mode == ScalingMode::explicit_norm) {
        std::vector<double> raw;
        for (const auto& [name, w] : weights)
            raw.push_back(w);
        const auto scaled = explicit_scale(raw, cfg.scaling_norm());
        std::size_t i = 0;
        for (auto& [name, w] : weights)
            w = scaled[i++];
    }
    if (!(alpha > 0.0))
        throw degenerate_weights("reward scale alpha must be positive");
    return RewardParams(alpha, std::move(weights));
}

inline RewardParams default_reward_params(const ExperimentConfig& cfg)
{
    return RewardParams::defaults(cfg.environment.components, cfg.default_alpha);
}

inline TrainerSpec trainer_spec_for(const ExperimentConfig& cfg, const ValueMap& values, Budget budget,
                                    std::uint64_t seed)
{
    TrainerSpec spec;
    spec.initial_log_std = cfg.trainer.initial_log_std;
    spec = spec.with_values(values);
    spec.budget = budget;
    spec.seed = seed;
    return spec;
}

inline auto environment_factory(const ExperimentConfig& cfg)
{
    return [&cfg] { return lander::LanderEnv(cfg.environment.constants, cfg.environment.components); };
}

/// Trains with the reward implied by `values` and evaluates the policy.
/// `eval_reward` only changes the reported shaped return, not the task score.
inline std::vector<EpisodeResult> train_and_evaluate(const ExperimentConfig& cfg, const ValueMap& values,
                                                     Budget budget, std::uint64_t seed,
                                                     const std::optional<RewardParams>& eval_reward = std::nullopt)
{
    const auto reward = reward_params_for(cfg, values);
    auto factory = environment_factory(cfg);
    const auto policy = train(factory, reward, trainer_spec_for(cfg, values, budget, seed));
    return evaluate(policy, factory, eval_reward ? *eval_reward : reward, cfg.trainer.eval_episodes,
                    derive_seed(seed, 0xe7a1u), cfg.trainer.stochastic_eval);
}

inline std::vector<double> task_scores(const std::vector<EpisodeResult>& episodes)
{
    std::vector<double> out;
    out.reserve(episodes.size());
    for (const auto& e : episodes)
        out.push_back(e.task_score);
    return out;
}

/// The configured metric of one training run in the optimizer orientation.
inline double per_seed_metric(const ExperimentConfig& cfg, const ValueMap& values, Budget budget, std::uint64_t seed)
{
    const auto episodes = train_and_evaluate(cfg, values, budget, seed);
    return apply_metric(cfg.optimizer.metric, ScoreSample{task_scores(episodes), Direction::minimize},
                        cfg.optimizer.std_estimator);
}

struct RunOptions {
    bool resume = false;
    std::optional<std::size_t> stop_after; ///< stop once this many records are journaled
    std::function<void(const EvalRecord&)> on_record;
};

struct RunResult {
    std::optional<Incumbent> incumbent;
    std::optional<EvalRecord> incumbent_record;
    std::vector<TrajectoryPoint> trajectory;
    std::size_t evaluations = 0;
    std::size_t replayed = 0;
    Budget steps = 0;
    bool complete = false;
};

inline fs::path run_directory(const fs::path& exp_dir, std::size_t run)
{
    return exp_dir / ("seed-" + std::to_string(run));
}

namespace detail {

inline EvalRecord prepare_record(const ExperimentConfig& cfg, std::size_t run, const Job& job,
                                 const std::optional<SearchSpace>& rs_space, const ValueMap& frozen)
{
    const SeedPlan seeds{cfg};
    EvalRecord rec;
    rec.seq = job.id;
    rec.unit = job.config.unit();
    rec.config_id = job.config.id();
    rec.budget = job.budget;
    rec.rung = job.rung;
    rec.values = frozen;
    for (const auto& [name, v] : job.config.values())
        rec.values[name] = v;
    if (rs_space) {
        Rng rng(seeds.reward_sample(run, job.id));
        std::vector<double> u(rs_space->dimension());
        for (auto& x : u)
            x = rng.uniform();
        for (const auto& [name, v] : decode(*rs_space, u))
            rec.values[name] = v;
        rec.rs_unit = std::move(u);
    }
    for (std::size_t k = 0; k < cfg.optimizer.seeds_per_fitness; ++k)
        rec.seeds.push_back(seeds.fitness(run, job.id, k));
    return rec;
}

inline void score_record(const ExperimentConfig& cfg, EvalRecord& rec)
{
    const auto report =
        fitness(rec.seeds, [&](std::uint64_t seed) { return per_seed_metric(cfg, rec.values, rec.budget, seed); });
    rec.per_seed = report.per_seed;
    rec.status = report.failed ? EvalStatus::failed : EvalStatus::ok;
    rec.fitness = report.fitness;
    rec.failure = report.failure;
}

inline nlohmann::json incumbent_json(std::size_t run, const RunResult& r)
{
    nlohmann::json j{{"run_index", run}, {"complete", r.complete}, {"evaluations", r.evaluations},
                     {"steps", r.steps}};
    nlohmann::json traj = nlohmann::json::array();
    for (const auto& p : r.trajectory)
        traj.push_back({{"evaluation", p.evaluation}, {"steps", p.cumulative_steps}, {"fitness", p.fitness}});
    j["trajectory"] = traj;
    if (r.incumbent && r.incumbent_record) {
        j["incumbent"] = {{"seq", r.incumbent_record->seq},         {"config_id", r.incumbent_record->config_id},
                          {"unit", r.incumbent_record->unit},       {"values", r.incumbent_record->values},
                          {"fitness", r.incumbent->fitness},        {"budget", r.incumbent->budget},
                          {"found_at", r.incumbent->found_at}};
    } else {
        j["incumbent"] = nullptr;
    }
    return j;
}

inline void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
}

} // namespace detail

/// Drives ask / fitness / tell for one optimization seed, journaling every
/// evaluation. With `resume`, an existing journal is replayed into a fresh
/// optimizer (each record must match the regenerated ask) before continuing.
inline RunResult run_optimization(const ExperimentConfig& cfg, std::size_t run, const fs::path& run_dir,
                                  const RunOptions& options = {})
{
    const SeedPlan seeds{cfg};
    const auto space = cfg.dehb_space();
    const auto rs_space = cfg.random_reward_space();
    const auto frozen = cfg.frozen_values();
    DehbSettings settings{cfg.ladder(),
                          cfg.optimizer.total_budget,
                          cfg.optimizer.mutation_factor,
                          cfg.optimizer.crossover_prob,
                          cfg.optimizer.in_flight,
                          seeds.optimizer(run)};
    Dehb dehb(space, settings);
    const fs::path journal_path = run_dir / "journal.jsonl";
    const JournalHeader header{"optimization", cfg.hash, to_string(cfg.arm), run};

    RunResult result;
    std::deque<Job> queue;
    std::size_t changes_seen = 0;

    auto fetch = [&] {
        if (!queue.empty())
            return;
        for (;;) {
            auto r = dehb.ask();
            if (r.status != AskStatus::ready)
                break;
            queue.push_back(std::move(*r.job));
        }
    };
    auto absorb = [&](const EvalRecord& rec, std::uint64_t job_id) {
        dehb.tell(job_id, rec.status == EvalStatus::ok ? rec.fitness : failed_fitness);
        if (dehb.incumbent_changes().size() != changes_seen) {
            changes_seen = dehb.incumbent_changes().size();
            result.incumbent_record = rec;
        }
        ++result.evaluations;
    };

    std::optional<JournalWriter> writer;
    if (options.resume && fs::exists(journal_path)) {
        const auto contents = read_journal(journal_path);
        if (contents.header.config_hash != cfg.hash)
            throw integrity_error("journal '" + journal_path.string() + "' was written for config " +
                                      contents.header.config_hash + ", not " + cfg.hash,
                                  1);
        if (contents.header.kind != header.kind || contents.header.arm != header.arm ||
            contents.header.run_index != run)
            throw integrity_error("journal header does not match this run", 1);
        for (std::size_t i = 0; i < contents.entries.size(); ++i) {
            const long line = contents.lines[i];
            const auto rec = EvalRecord::from_json(contents.entries[i], line);
            validate_record(rec, space, rs_space, line);
            fetch();
            if (queue.empty())
                throw integrity_error("journal continues past the end of the optimization", line);
            const Job job = std::move(queue.front());
            queue.pop_front();
            auto expected = detail::prepare_record(cfg, run, job, rs_space, frozen);
            if (rec.seq != expected.seq || rec.unit != expected.unit || rec.budget != expected.budget ||
                rec.rung != expected.rung || rec.values != expected.values || rec.seeds != expected.seeds ||
                rec.rs_unit != expected.rs_unit)
                throw integrity_error("record does not match the regenerated ask sequence", line);
            absorb(rec, job.id);
            if (options.on_record)
                options.on_record(rec);
        }
        result.replayed = contents.entries.size();
        if (contents.torn_tail)
            truncate_journal(journal_path, contents, contents.entries.size());
        writer.emplace(journal_path, true);
    } else {
        writer.emplace(journal_path, false);
        writer->write(header.to_json());
    }

    std::ofstream timings(run_dir / "timings.jsonl", std::ios::app);
    for (;;) {
        fetch();
        if (queue.empty())
            break;
        if (options.stop_after && result.evaluations >= *options.stop_after)
            break;
        std::vector<Job> batch;
        while (!queue.empty()) {
            if (options.stop_after && result.evaluations + batch.size() >= *options.stop_after)
                break;
            batch.push_back(std::move(queue.front()));
            queue.pop_front();
        }
        std::vector<EvalRecord> records;
        std::vector<double> seconds(batch.size());
        for (const auto& job : batch)
            records.push_back(detail::prepare_record(cfg, run, job, rs_space, frozen));
        auto work = [&](std::size_t i) {
            const auto t0 = std::chrono::steady_clock::now();
            detail::score_record(cfg, records[i]);
            seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };
        if (batch.size() == 1) {
            work(0);
        } else {
            std::vector<std::future<void>> futures;
            for (std::size_t i = 0; i < batch.size(); ++i)
                futures.push_back(std::async(std::launch::async, work, i));
            for (auto& f : futures)
                f.get();
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            writer->write(records[i].to_json());
            timings << nlohmann::json{{"seq", records[i].seq}, {"seconds", seconds[i]}}.dump() << '\n';
            absorb(records[i], batch[i].id);
            if (options.on_record)
                options.on_record(records[i]);
        }
        timings.flush();
    }

    result.complete = queue.empty() && dehb.outstanding() == 0 && dehb.ask().status == AskStatus::exhausted;
    result.incumbent = dehb.incumbent();
    result.trajectory = dehb.incumbent_trajectory();
    result.steps = dehb.told_steps();
    detail::write_text(run_dir / "incumbent.json", detail::incumbent_json(run, result).dump(2) + "\n");
    return result;
}

inline RunResult resume(const ExperimentConfig& cfg, std::size_t run, const fs::path& run_dir,
                        RunOptions options = {})
{
    if (!fs::exists(run_dir / "journal.jsonl"))
        throw integrity_error("no journal to resume in '" + run_dir.string() + "'");
    options.resume = true;
    return run_optimization(cfg, run, run_dir, options);
}

inline void save_config(const ExperimentConfig& cfg, const fs::path& exp_dir)
{
    detail::write_text(exp_dir / "config.json", cfg.raw.dump(2) + "\n");
}

/// Runs (or resumes) every optimization seed of the protocol.
inline std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const fs::path& exp_dir,
                                             const RunOptions& options = {})
{
    save_config(cfg, exp_dir);
    std::vector<RunResult> out;
    for (std::size_t run = 0; run < cfg.protocol.optimization_seeds; ++run)
        out.push_back(run_optimization(cfg, run, run_directory(exp_dir, run), options));
    return out;
}

struct EvaluationRun {
    std::size_t run = 0;
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double task_score = 0.0;
    std::optional<double> shaped_return; ///< under the default reward; empty if training failed
    bool failed = false;
    std::string failure;

    nlohmann::json to_json() const
    {
        nlohmann::json j{{"type", "evaluation"},
                         {"run", run},
                         {"index", index},
                         {"seed", seed},
                         {"task_score", task_score},
                         {"shaped_return", shaped_return ? nlohmann::json(*shaped_return) : nlohmann::json(nullptr)},
                         {"status", failed ? "failed" : "ok"}};
        if (!failure.empty())
            j["failure"] = failure;
        return j;
    }
};

struct IncumbentReport {
    std::size_t run = 0;
    ValueMap values;
    std::vector<EvaluationRun> evaluations;
};

struct ExperimentReport {
    std::string arm;
    std::string config_hash;
    std::vector<IncumbentReport> incumbents;
    ExperimentAggregate task;
    std::optional<ExperimentAggregate> shaped;

    std::vector<std::vector<double>> task_runs() const
    {
        std::vector<std::vector<double>> out;
        for (const auto& inc : incumbents) {
            out.emplace_back();
            for (const auto& e : inc.evaluations)
                out.back().push_back(e.task_score);
        }
        return out;
    }

    std::vector<double> pooled_task_scores() const
    {
        std::vector<double> out;
        for (const auto& r : task_runs())
            out.insert(out.end(), r.begin(), r.end());
        return out;
    }
};

inline nlohmann::json aggregate_json(const ExperimentAggregate& a)
{
    return {{"median_performance", a.median_performance},
            {"median_cv", a.median_cv},
            {"run_medians", a.run_medians},
            {"run_cvs", a.run_cvs}};
}

inline ExperimentAggregate aggregate_from_json(const nlohmann::json& j)
{
    ExperimentAggregate a;
    a.median_performance = j.at("median_performance").get<double>();
    a.median_cv = j.at("median_cv").get<double>();
    a.run_medians = j.at("run_medians").get<std::vector<double>>();
    a.run_cvs = j.at("run_cvs").get<std::vector<double>>();
    return a;
}

inline nlohmann::json report_json(const ExperimentReport& r)
{
    nlohmann::json incs = nlohmann::json::array();
    for (const auto& inc : r.incumbents) {
        nlohmann::json evals = nlohmann::json::array();
        for (const auto& e : inc.evaluations)
            evals.push_back(e.to_json());
        incs.push_back({{"run", inc.run}, {"values", inc.values}, {"evaluations", evals}});
    }
    return {{"arm", r.arm},
            {"config_hash", r.config_hash},
            {"task_score", aggregate_json(r.task)},
            {"default_shaped_return", r.shaped ? aggregate_json(*r.shaped) : nlohmann::json(nullptr)},
            {"incumbents", incs}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j)
{
    ExperimentReport r;
    try {
        r.arm = j.at("arm").get<std::string>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.task = aggregate_from_json(j.at("task_score"));
        if (!j.at("default_shaped_return").is_null())
            r.shaped = aggregate_from_json(j.at("default_shaped_return"));
        for (const auto& inc : j.at("incumbents")) {
            IncumbentReport ir;
            ir.run = inc.at("run").get<std::size_t>();
            ir.values = inc.at("values").get<ValueMap>();
            for (const auto& e : inc.at("evaluations")) {
                EvaluationRun ev;
                ev.run = e.at("run").get<std::size_t>();
                ev.index = e.at("index").get<std::size_t>();
                ev.seed = e.at("seed").get<std::uint64_t>();
                ev.task_score = e.at("task_score").get<double>();
                if (!e.at("shaped_return").is_null())
                    ev.shaped_return = e.at("shaped_return").get<double>();
                ev.failed = e.at("status") == "failed";
                ir.evaluations.push_back(ev);
            }
            r.incumbents.push_back(std::move(ir));
        }
    } catch (const nlohmann::json::exception& e) {
        throw integrity_error(std::string("malformed report: ") + e.what());
    }
    return r;
}

/// Loads the incumbent of every optimization seed, trains it on
/// `evaluation_seeds` fresh seeds at the full budget and aggregates task
/// scores and default-shaped returns.
inline ExperimentReport evaluate_incumbents(const ExperimentConfig& cfg, const fs::path& exp_dir,
                                            const std::function<void(const EvaluationRun&)>& on_run = {})
{
    const SeedPlan seeds{cfg};
    std::vector<std::pair<std::size_t, ValueMap>> incumbents;
    for (std::size_t run = 0; run < cfg.protocol.optimization_seeds; ++run) {
        const auto path = run_directory(exp_dir, run) / "incumbent.json";
        if (!fs::exists(path))
            throw evaluation_error("optimization seed " + std::to_string(run) + " has no incumbent (" +
                                   path.string() + " missing)");
        std::ifstream in(path);
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded())
            throw integrity_error("'" + path.string() + "' is not valid JSON");
        if (!j.value("complete", false))
            throw evaluation_error("optimization seed " + std::to_string(run) + " has not finished");
        if (j.at("incumbent").is_null())
            throw evaluation_error("optimization seed " + std::to_string(run) +
                                   " finished without a successful full-budget evaluation");
        incumbents.emplace_back(run, j.at("incumbent").at("values").get<ValueMap>());
    }

    ExperimentReport report;
    report.arm = to_string(cfg.arm);
    report.config_hash = cfg.hash;
    const auto default_reward = default_reward_params(cfg);
    JournalWriter journal(exp_dir / "evaluations.jsonl", false);
    journal.write(JournalHeader{"evaluation", cfg.hash, to_string(cfg.arm), 0}.to_json());
    for (const auto& [run, values] : incumbents) {
        IncumbentReport inc{run, values, {}};
        for (std::size_t j = 0; j < cfg.protocol.evaluation_seeds; ++j) {
            EvaluationRun ev{run, j, seeds.evaluation(run, j), 0.0, std::nullopt, false, {}};
            try {
                const auto episodes = train_and_evaluate(cfg, values, cfg.trainer.budget, ev.seed, default_reward);
                double shaped = 0.0;
                for (const auto& e : episodes)
                    shaped += e.shaped_return;
                ev.task_score = mean_of(task_scores(episodes));
                ev.shaped_return = shaped / static_cast<double>(episodes.size());
            } catch (const training_diverged& e) {
                ev.failed = true;
                ev.failure = e.what();
            } catch (const degenerate_weights& e) {
                ev.failed = true;
                ev.failure = e.what();
            }
            if (ev.failed)
                ev.task_score = static_cast<double>(cfg.environment.constants.episode_cap);
            journal.write(ev.to_json());
            if (on_run)
                on_run(ev);
            inc.evaluations.push_back(ev);
        }
        report.incumbents.push_back(std::move(inc));
    }

    report.task = aggregate_experiment(report.task_runs());
    std::vector<std::vector<double>> shaped_runs;
    for (const auto& inc : report.incumbents) {
        std::vector<double> r;
        for (const auto& e : inc.evaluations)
            if (e.shaped_return)
                r.push_back(*e.shaped_return);
        if (!r.empty())
            shaped_runs.push_back(std::move(r));
    }
    if (!shaped_runs.empty())
        report.shaped = aggregate_experiment(shaped_runs);
    detail::write_text(exp_dir / "report.json", report_json(report).dump(2) + "\n");
    return report;
}

inline std::string landscape_stem(const std::string& a, const std::string& b) { return a + "__" + b; }

inline nlohmann::json param_json(const ParamSpec& p)
{
    nlohmann::json j{{"name", p.name()}, {"role", to_string(p.role())}};
    if (p.kind() == ParamKind::categorical) {
        j["kind"] = "categorical";
        j["choices"] = p.choices();
    } else {
        j["kind"] = "continuous";
        j["lo"] = p.lo();
        j["hi"] = p.hi();
        j["log"] = p.log_scale();
    }
    return j;
}

inline ParamSpec param_from_json(const nlohmann::json& j)
{
    const auto role = parse_role(j.at("role").get<std::string>());
    if (j.at("kind") == "categorical")
        return ParamSpec::categorical(j.at("name"), j.at("choices").get<std::vector<double>>(), role);
    return ParamSpec::continuous(j.at("name"), j.at("lo").get<double>(), j.at("hi").get<double>(),
                                 j.at("log").get<bool>(), role);
}

inline nlohmann::json grid_json(const LandscapeGrid& g)
{
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : g.cells)
        cells.push_back({{"mean", c.mean}, {"std", c.std}, {"n", c.n}, {"failed", c.failed}});
    return {{"axis_a", {{"param", param_json(g.axis_a.spec)}, {"values", g.axis_a.values}}},
            {"axis_b", {{"param", param_json(g.axis_b.spec)}, {"values", g.axis_b.values}}},
            {"direction", to_string(g.direction)},
            {"frozen", g.frozen},
            {"cells", cells}};
}

inline LandscapeGrid grid_from_json(const nlohmann::json& j)
{
    try {
        LandscapeGrid g{{param_from_json(j.at("axis_a").at("param")), j.at("axis_a").at("values")},
                        {param_from_json(j.at("axis_b").at("param")), j.at("axis_b").at("values")},
                        parse_direction(j.at("direction").get<std::string>()),
                        j.at("frozen").get<ValueMap>(),
                        {}};
        for (const auto& c : j.at("cells"))
            g.cells.push_back({c.at("mean").get<double>(), c.at("std").get<double>(), c.at("n").get<std::size_t>(),
                               c.at("failed").get<bool>()});
        if (g.cells.size() != g.axis_a.resolution() * g.axis_b.resolution())
            throw integrity_error("landscape grid has the wrong number of cells");
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw integrity_error(std::string("malformed landscape grid: ") + e.what());
    }
}

/// Two-parameter landscape over the full (scaled) space with every other
/// parameter at its baseline. Each training is journaled; the grid is saved
/// next to the journal for later export.
inline LandscapeGrid run_sweep(const ExperimentConfig& cfg, const std::string& name_a, const std::string& name_b,
                               std::size_t resolution, std::size_t n_seeds, const fs::path& exp_dir)
{
    const auto space = cfg.full_space();
    auto spec_of = [&](const std::string& name) {
        const auto idx = space.index_of(name);
        if (!idx)
            throw config_error("sweep: '" + name + "' is not a parameter of the search space");
        return space[*idx];
    };
    const auto axis_a = make_axis(spec_of(name_a), resolution);
    const auto axis_b = make_axis(spec_of(name_b), resolution);
    if (n_seeds < 1)
        throw config_error("sweep: need at least one seed");
    const SeedPlan plan{cfg};
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = 0; s < n_seeds; ++s)
        seeds.push_back(plan.sweep(s));

    const auto dir = exp_dir / "landscape";
    const auto stem = landscape_stem(name_a, name_b);
    JournalWriter journal(dir / (stem + ".jsonl"), false);
    journal.write(JournalHeader{"sweep", cfg.hash, to_string(cfg.arm), 0}.to_json());
    auto run_cell = [&](const ValueMap& values, std::uint64_t seed) {
        return mean_of(task_scores(train_and_evaluate(cfg, values, cfg.trainer.budget, seed)));
    };
    std::uint64_t seq = 0;
    auto on_run = [&](const CellRun& r) {
        journal.write({{"type", "cell"},
                       {"seq", seq++},
                       {"row", r.row},
                       {"col", r.col},
                       {"seed", r.seed},
                       {"values", r.values},
                       {"score", r.failed ? nlohmann::json(nullptr) : nlohmann::json(r.score)},
                       {"status", r.failed ? "failed" : "ok"}});
    };
    auto grid = sweep(axis_a, axis_b, cfg.frozen_values(), seeds, Direction::minimize, run_cell, on_run);
    detail::write_text(dir / (stem + ".json"), grid_json(grid).dump(2) + "\n");
    return grid;
}

} // namespace shapeopt
