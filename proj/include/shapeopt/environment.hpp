#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "shaping.hpp"

namespace shapeopt {

enum class Direction { maximize, minimize };

inline const char* to_string(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }

inline Direction parse_direction(const std::string& s)
{
    if (s == "maximize")
        return Direction::maximize;
    if (s == "minimize")
        return Direction::minimize;
    throw domain_error("unknown direction '" + s + "'");
}

struct StepResult {
    std::vector<double> observation;
    RewardComponents components;
    bool done = false;
};

/// What the trainer needs from an episodic environment that reports its
/// reward as a component decomposition and scores finished episodes.
template <typename E>
concept Environment = requires(E& env, const E& cenv, std::uint64_t seed, std::span<const double> action) {
    { cenv.observation_size() } -> std::convertible_to<std::size_t>;
    { cenv.action_size() } -> std::convertible_to<std::size_t>;
    { env.reset(seed) } -> std::same_as<std::vector<double>>;
    { env.step(action) } -> std::same_as<StepResult>;
    { cenv.task_score() } -> std::convertible_to<double>;
    { cenv.direction() } -> std::same_as<Direction>;
    { cenv.components() } -> std::convertible_to<const std::vector<ComponentDecl>&>;
};

} // namespace shapeopt
