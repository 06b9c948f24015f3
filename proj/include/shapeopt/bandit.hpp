#pragma once

#include <span>
#include <vector>

#include "environment.hpp"

namespace shapeopt {

/// One-step continuous bandit with reward -(a - optimum)^2.
class QuadraticBandit {
public:
    explicit QuadraticBandit(double optimum = 0.7) : optimum_(optimum) {}

    std::size_t observation_size() const { return 1; }
    std::size_t action_size() const { return 1; }

    std::vector<double> reset(std::uint64_t) { return {1.0}; }

    StepResult step(std::span<const double> action)
    {
        const double d = action[0] - optimum_;
        last_ = -d * d;
        StepResult r;
        r.observation = {1.0};
        r.components.base = last_;
        r.done = true;
        return r;
    }

    double task_score() const { return last_; }
    Direction direction() const { return Direction::maximize; }
    const std::vector<ComponentDecl>& components() const { return decls_; }

    double optimum() const { return optimum_; }

private:
    double optimum_;
    double last_ = 0.0;
    std::vector<ComponentDecl> decls_;
};

} // namespace shapeopt
