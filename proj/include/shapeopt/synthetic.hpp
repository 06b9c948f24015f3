#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "dehb.hpp"
#include "random.hpp"
#include "space.hpp"

namespace shapeopt::synthetic {

/// Negated squared distance to a fixed centre plus Gaussian noise whose
/// standard deviation shrinks with the square root of the budget.
struct NoisySphere {
    std::vector<double> centre;
    double noise_at_max = 0.01;
    Budget max_budget = 1;

    static NoisySphere make(std::size_t dimension, Budget max_budget, double noise_at_max = 0.01)
    {
        NoisySphere f;
        f.max_budget = max_budget;
        f.noise_at_max = noise_at_max;
        for (std::size_t i = 0; i < dimension; ++i)
            f.centre.push_back(0.2 + 0.6 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(dimension - 1, 1)));
        return f;
    }

    double sigma(Budget budget) const
    {
        return noise_at_max * std::sqrt(static_cast<double>(max_budget) / static_cast<double>(budget));
    }

    double true_value(std::span<const double> x) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            s += (x[i] - centre[i]) * (x[i] - centre[i]);
        return -s;
    }

    double regret(std::span<const double> x) const { return -true_value(x); }

    double operator()(std::span<const double> x, Budget budget, Rng& rng) const
    {
        return true_value(x) + sigma(budget) * rng.normal();
    }
};

/// Two discrete options with Gaussian outcomes: the default instance pits a
/// high-mean noisy option against a slightly lower but steady one.
struct MeanVarianceTradeoff {
    double mean_a = 1.0;
    double sigma_a = 0.5;
    double mean_b = 0.95;
    double sigma_b = 0.05;

    /// Unit coordinate below 0.5 selects option A.
    static bool is_a(double unit) { return unit < 0.5; }

    std::vector<double> sample(bool option_a, std::size_t n, Rng& rng) const
    {
        std::vector<double> out(n);
        for (auto& v : out)
            v = option_a ? rng.normal(mean_a, sigma_a) : rng.normal(mean_b, sigma_b);
        return out;
    }
};

struct SearchOutcome {
    std::optional<Incumbent> incumbent;
    Budget steps_used = 0;
    std::size_t evaluations = 0;
};

/// Uniform random search evaluating every sample at the maximum budget.
template <typename Objective>
SearchOutcome random_search(const SearchSpace& space, Objective&& objective, Budget max_budget, Budget total_steps,
                            Rng& rng)
{
    SearchOutcome out;
    while (out.steps_used + max_budget <= total_steps) {
        const auto config = sample_uniform(space, rng);
        const double f = objective(config.unit(), max_budget);
        out.steps_used += max_budget;
        ++out.evaluations;
        if (std::isfinite(f) && (!out.incumbent || f > out.incumbent->fitness))
            out.incumbent = Incumbent{config.unit(), f, max_budget, out.evaluations};
    }
    return out;
}

/// Sequential ask/tell loop until the optimizer reports exhaustion.
template <typename Objective>
SearchOutcome run_dehb(Dehb& dehb, Objective&& objective)
{
    SearchOutcome out;
    for (;;) {
        auto r = dehb.ask();
        if (r.status != AskStatus::ready)
            break;
        const double f = objective(r.job->config.unit(), r.job->budget);
        dehb.tell(r.job->id, f);
        ++out.evaluations;
    }
    out.incumbent = dehb.incumbent();
    out.steps_used = dehb.told_steps();
    return out;
}

} // namespace shapeopt::synthetic
