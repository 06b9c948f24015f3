#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dehb.hpp"
#include "errors.hpp"
#include "lander.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "shaping.hpp"
#include "space.hpp"

namespace shapeopt {

using json = nlohmann::json;

inline constexpr int config_format_version = 1;

enum class Arm { hpo_only, rpo_only, combined, combined_rs };

inline const char* to_string(Arm arm)
{
    switch (arm) {
    case Arm::hpo_only:
        return "hpo-only";
    case Arm::rpo_only:
        return "rpo-only";
    case Arm::combined:
        return "combined";
    case Arm::combined_rs:
        return "combined-rs";
    }
    return "?";
}

inline Arm parse_arm(const std::string& s)
{
    if (s == "hpo-only")
        return Arm::hpo_only;
    if (s == "rpo-only")
        return Arm::rpo_only;
    if (s == "combined")
        return Arm::combined;
    if (s == "combined-rs")
        return Arm::combined_rs;
    throw config_error("unknown arm '" + s + "' (expected hpo-only, rpo-only, combined or combined-rs)");
}

enum class ScalingMode { none, explicit_norm, implicit_norm };

struct EnvironmentBlock {
    std::string name = "lander";
    lander::LanderConfig constants;
    std::vector<ComponentDecl> components = lander::default_components();

    std::map<std::string, double> default_weights() const
    {
        std::map<std::string, double> w;
        for (const auto& c : components)
            if (c.weighted)
                w.emplace(c.name, c.default_weight);
        return w;
    }
};

struct TrainerBlock {
    std::string name = "reinforce";
    ValueMap baseline{{"learning_rate", 0.03}, {"discounting", 0.01}, {"entropy_coef", 0.0}, {"batch_size", 1024}};
    Budget budget = 90000;
    std::size_t eval_episodes = 30;
    double initial_log_std = -0.7;
    bool stochastic_eval = false;
};

struct OptimizerBlock {
    int eta = 3;
    int rungs = 3;
    double total_budget = 133.0;
    double mutation_factor = 0.5;
    double crossover_prob = 0.5;
    Metric metric = Metric::single_objective;
    StdEstimator std_estimator = StdEstimator::sample;
    std::size_t seeds_per_fitness = 3;
    std::size_t in_flight = 1;
    bool fixed_fitness_seeds = false;
};

struct ProtocolBlock {
    std::size_t optimization_seeds = 5;
    std::size_t evaluation_seeds = 10;
    std::uint64_t master_seed = 0;
};

struct ScalingBlock {
    ScalingMode mode = ScalingMode::none;
    std::optional<double> norm; ///< defaults to the L1 norm of the default weights
};

/// Parsed experiment description. `raw` keeps the resolved JSON document;
/// its hash ties journals to the configuration that produced them.
struct ExperimentConfig {
    json raw;
    std::string hash;

    EnvironmentBlock environment;
    TrainerBlock trainer;
    std::vector<ParamSpec> space;
    OptimizerBlock optimizer;
    Arm arm = Arm::combined;
    ProtocolBlock protocol;
    ScalingBlock scaling;
    double default_alpha = 1.0;

    BudgetLadder ladder() const { return budget_ladder(trainer.budget, optimizer.eta, optimizer.rungs); }

    double scaling_norm() const
    {
        if (scaling.norm)
            return *scaling.norm;
        double s = 0.0;
        for (const auto& [name, w] : environment.default_weights())
            s += std::abs(w);
        return s;
    }

    /// Parameters the optimizer sees after scaling transforms, before arm filtering.
    SearchSpace full_space() const
    {
        SearchSpace s(space);
        if (scaling.mode == ScalingMode::implicit_norm)
            return implicit_ranges(s, scaling_norm());
        return s;
    }

    /// Search space driven by DEHB for this arm.
    SearchSpace dehb_space() const
    {
        const auto full = full_space();
        std::optional<SearchSpace> out;
        switch (arm) {
        case Arm::hpo_only:
        case Arm::combined_rs:
            out = full.filter([](const ParamSpec& p) { return p.role() == ParamRole::hyperparameter; });
            break;
        case Arm::rpo_only:
            out = full.filter([](const ParamSpec& p) { return p.role() != ParamRole::hyperparameter; });
            break;
        case Arm::combined:
            out = full;
            break;
        }
        if (!out)
            throw config_error(std::string("arm ") + to_string(arm) + " has no parameters to optimise");
        return *out;
    }

    /// Reward parameters sampled uniformly per ask in the combined-rs arm.
    std::optional<SearchSpace> random_reward_space() const
    {
        if (arm != Arm::combined_rs)
            return std::nullopt;
        return full_space().filter([](const ParamSpec& p) { return p.role() != ParamRole::hyperparameter; });
    }

    /// Baseline hyperparameters, default reward weights and default alpha.
    ValueMap frozen_values() const
    {
        ValueMap v = trainer.baseline;
        for (const auto& [name, w] : environment.default_weights())
            v[name] = w;
        for (const auto& p : space)
            if (p.role() == ParamRole::reward_scale)
                v[p.name()] = default_alpha;
        return v;
    }

    std::uint64_t arm_code() const { return fnv1a(to_string(arm)); }
};

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        throw config_error(where + ": missing key '" + key + "'");
    return j.at(key);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("key '") + key + "': " + e.what());
    }
}

inline void parse_lander_constants(const json& j, lander::LanderConfig& c)
{
    static const std::map<std::string, double lander::LanderConfig::*> fields{
        {"gravity", &lander::LanderConfig::gravity},
        {"dt", &lander::LanderConfig::dt},
        {"main_accel", &lander::LanderConfig::main_accel},
        {"side_accel", &lander::LanderConfig::side_accel},
        {"side_torque", &lander::LanderConfig::side_torque},
        {"angular_damping", &lander::LanderConfig::angular_damping},
        {"righting", &lander::LanderConfig::righting},
        {"spawn_height", &lander::LanderConfig::spawn_height},
        {"spawn_jitter", &lander::LanderConfig::spawn_jitter},
        {"spawn_velocity", &lander::LanderConfig::spawn_velocity},
        {"pad_half_width", &lander::LanderConfig::pad_half_width},
        {"world_half_width", &lander::LanderConfig::world_half_width},
        {"ceiling", &lander::LanderConfig::ceiling},
        {"safe_vertical_speed", &lander::LanderConfig::safe_vertical_speed},
        {"safe_horizontal_speed", &lander::LanderConfig::safe_horizontal_speed},
        {"safe_tilt", &lander::LanderConfig::safe_tilt},
        {"terminal_bonus", &lander::LanderConfig::terminal_bonus},
        {"terminal_penalty", &lander::LanderConfig::terminal_penalty},
        {"main_fuel", &lander::LanderConfig::main_fuel},
        {"side_fuel", &lander::LanderConfig::side_fuel},
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "episode_cap") {
            c.episode_cap = value.get<int>();
            if (c.episode_cap < 1)
                throw config_error("environment.constants.episode_cap must be >= 1");
            continue;
        }
        const auto it = fields.find(key);
        if (it == fields.end())
            throw config_error("environment.constants: unknown constant '" + key + "'");
        c.*(it->second) = value.get<double>();
    }
}

inline ParamSpec parse_param(const json& j, const EnvironmentBlock& env)
{
    const auto name = require(j, "name", "space entry").get<std::string>();
    const std::string where = "space entry '" + name + "'";
    ParamRole role;
    try {
        role = parse_role(get_or<std::string>(j, "role", "hyperparameter"));
    } catch (const domain_error& e) {
        throw config_error(where + ": " + e.what());
    }
    const auto kind = get_or<std::string>(j, "kind", "continuous");
    try {
        if (kind == "categorical") {
            return ParamSpec::categorical(name, require(j, "choices", where).get<std::vector<double>>(), role);
        }
        if (kind != "continuous")
            throw config_error(where + ": unknown kind '" + kind + "'");
        const bool log = get_or<bool>(j, "log", false);
        if (j.contains("lo") || j.contains("hi"))
            return ParamSpec::continuous(name, require(j, "lo", where).get<double>(),
                                         require(j, "hi", where).get<double>(), log, role);
        if (role != ParamRole::reward_weight)
            throw config_error(where + ": bounds required for non-reward-weight parameters");
        double def;
        if (j.contains("default")) {
            def = j.at("default").get<double>();
        } else {
            const auto it = std::find_if(env.components.begin(), env.components.end(),
                                         [&](const ComponentDecl& c) { return c.name == name; });
            if (it == env.components.end())
                throw config_error(where + ": no default weight declared");
            def = it->default_weight;
        }
        const auto [lo, hi] = weight_search_range(def);
        return ParamSpec::continuous(name, lo, hi, false, role);
    } catch (const domain_error& e) {
        throw config_error(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw config_error(where + ": " + e.what());
    }
}

} // namespace detail

inline std::string hash_json(const json& j)
{
    const auto h = fnv1a(j.dump());
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

inline ExperimentConfig parse_config(const json& raw)
{
    using detail::get_or;
    using detail::require;
    ExperimentConfig cfg;
    cfg.raw = raw;
    cfg.hash = hash_json(raw);
    try {
        if (get_or<int>(raw, "version", config_format_version) != config_format_version)
            throw config_error("unsupported config version");

        if (raw.contains("environment")) {
            const auto& e = raw.at("environment");
            cfg.environment.name = get_or<std::string>(e, "name", "lander");
            if (cfg.environment.name != "lander")
                throw config_error("environment '" + cfg.environment.name + "' is not available");
            if (e.contains("constants"))
                detail::parse_lander_constants(e.at("constants"), cfg.environment.constants);
            if (e.contains("components")) {
                cfg.environment.components.clear();
                for (const auto& c : e.at("components")) {
                    ComponentDecl d;
                    d.name = require(c, "name", "component").get<std::string>();
                    d.sign = get_or<int>(c, "sign", +1);
                    d.default_weight = get_or<double>(c, "default_weight", 1.0);
                    d.weighted = get_or<bool>(c, "weighted", true);
                    if (d.sign != 1 && d.sign != -1)
                        throw config_error("component '" + d.name + "': sign must be +1 or -1");
                    cfg.environment.components.push_back(d);
                }
                for (const auto& builtin : lander::default_components()) {
                    const bool declared =
                        std::any_of(cfg.environment.components.begin(), cfg.environment.components.end(),
                                    [&](const ComponentDecl& d) { return d.name == builtin.name; });
                    if (!declared)
                        throw config_error("environment.components: lander component '" + builtin.name +
                                           "' is not declared");
                }
            }
        }

        if (raw.contains("trainer")) {
            const auto& t = raw.at("trainer");
            cfg.trainer.name = get_or<std::string>(t, "name", "reinforce");
            if (cfg.trainer.name != "reinforce")
                throw config_error("trainer '" + cfg.trainer.name + "' is not available");
            if (t.contains("baseline")) {
                cfg.trainer.baseline.clear();
                for (const auto& [k, v] : t.at("baseline").items())
                    cfg.trainer.baseline[k] = v.get<double>();
            }
            cfg.trainer.budget = get_or<Budget>(t, "budget", cfg.trainer.budget);
            cfg.trainer.eval_episodes = get_or<std::size_t>(t, "eval_episodes", cfg.trainer.eval_episodes);
            cfg.trainer.initial_log_std = get_or<double>(t, "initial_log_std", cfg.trainer.initial_log_std);
            cfg.trainer.stochastic_eval = get_or<bool>(t, "stochastic_eval", cfg.trainer.stochastic_eval);
        }
        for (const char* hp : {"learning_rate", "discounting", "entropy_coef", "batch_size"})
            if (!cfg.trainer.baseline.contains(hp))
                throw config_error(std::string("trainer.baseline: missing '") + hp + "'");
        if (cfg.trainer.eval_episodes < 1)
            throw config_error("trainer.eval_episodes must be >= 1");

        for (const auto& p : require(raw, "space", "config"))
            cfg.space.push_back(detail::parse_param(p, cfg.environment));
        SearchSpace check(cfg.space);
        for (const auto& p : cfg.space) {
            if (p.role() == ParamRole::reward_weight) {
                const auto w = cfg.environment.default_weights();
                if (!w.contains(p.name()))
                    throw config_error("space entry '" + p.name() + "' is not a weighted environment component");
            }
            if (p.role() == ParamRole::hyperparameter && !cfg.trainer.baseline.contains(p.name()))
                throw config_error("space entry '" + p.name() + "' has no trainer baseline");
        }

        if (raw.contains("optimizer")) {
            const auto& o = raw.at("optimizer");
            auto& opt = cfg.optimizer;
            opt.eta = get_or<int>(o, "eta", opt.eta);
            opt.rungs = get_or<int>(o, "rungs", opt.rungs);
            opt.total_budget = get_or<double>(o, "total_budget", opt.total_budget);
            opt.mutation_factor = get_or<double>(o, "F", opt.mutation_factor);
            opt.crossover_prob = get_or<double>(o, "p_cross", opt.crossover_prob);
            opt.metric = parse_metric(get_or<std::string>(o, "metric", "so"));
            const auto est = get_or<std::string>(o, "std_estimator", "sample");
            if (est != "sample" && est != "population")
                throw config_error("optimizer.std_estimator must be sample or population");
            opt.std_estimator = est == "sample" ? StdEstimator::sample : StdEstimator::population;
            opt.seeds_per_fitness = get_or<std::size_t>(o, "seeds_per_fitness", opt.seeds_per_fitness);
            opt.in_flight = get_or<std::size_t>(o, "in_flight", opt.in_flight);
            opt.fixed_fitness_seeds = get_or<bool>(o, "fixed_fitness_seeds", opt.fixed_fitness_seeds);
        }
        if (cfg.optimizer.seeds_per_fitness < 1 || cfg.optimizer.in_flight < 1)
            throw config_error("optimizer: seeds_per_fitness and in_flight must be >= 1");
        if (cfg.optimizer.metric == Metric::multi_objective && cfg.trainer.eval_episodes < 2)
            throw config_error("the mo metric needs trainer.eval_episodes >= 2");
        (void)cfg.ladder();

        cfg.arm = parse_arm(get_or<std::string>(raw, "arm", "combined"));

        if (raw.contains("protocol")) {
            const auto& p = raw.at("protocol");
            cfg.protocol.optimization_seeds = get_or<std::size_t>(p, "optimization_seeds", 5);
            cfg.protocol.evaluation_seeds = get_or<std::size_t>(p, "evaluation_seeds", 10);
            cfg.protocol.master_seed = get_or<std::uint64_t>(p, "master_seed", 0);
        }
        if (cfg.protocol.optimization_seeds < 1 || cfg.protocol.evaluation_seeds < 1)
            throw config_error("protocol: seed counts must be >= 1");

        if (raw.contains("scaling")) {
            const auto& s = raw.at("scaling");
            const auto mode = get_or<std::string>(s, "mode", "none");
            if (mode == "none")
                cfg.scaling.mode = ScalingMode::none;
            else if (mode == "explicit")
                cfg.scaling.mode = ScalingMode::explicit_norm;
            else if (mode == "implicit")
                cfg.scaling.mode = ScalingMode::implicit_norm;
            else
                throw config_error("scaling.mode must be none, explicit or implicit");
            if (s.contains("norm"))
                cfg.scaling.norm = s.at("norm").get<double>();
        }
        cfg.default_alpha = get_or<double>(raw, "default_alpha", 1.0);
        (void)cfg.dehb_space();
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    } catch (const domain_error& e) {
        throw config_error(e.what());
    }
    return cfg;
}

/// Applies a dotted-path override such as `optimizer.total_budget=10`. The
/// value is parsed as JSON when possible and kept as a string otherwise.
inline void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw config_error("override '" + assignment + "' is not of the form key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;

    json* node = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.'))
        parts.push_back(part);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const bool last = i + 1 == parts.size();
        const auto& key = parts[i];
        if (node->is_array()) {
            std::size_t idx;
            try {
                idx = std::stoul(key);
            } catch (const std::exception&) {
                throw config_error("override '" + path + "': '" + key + "' is not an array index");
            }
            if (idx >= node->size())
                throw config_error("override '" + path + "': index " + key + " out of range");
            node = &(*node)[idx];
        } else {
            if (!node->is_object() && !node->is_null())
                throw config_error("override '" + path + "': '" + key + "' is not inside an object");
            node = &(*node)[key];
        }
        if (last)
            *node = value;
    }
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config file '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw config_error("config file '" + path + "' is not valid JSON");
    return j;
}

inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {})
{
    json raw = read_json_file(path);
    for (const auto& o : overrides)
        apply_override(raw, o);
    return parse_config(raw);
}

} // namespace shapeopt
