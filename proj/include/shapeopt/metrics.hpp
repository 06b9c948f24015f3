#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "environment.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace shapeopt {

enum class StdEstimator { sample, population };

enum class Metric { single_objective, multi_objective };

inline Metric parse_metric(const std::string& s)
{
    if (s == "so")
        return Metric::single_objective;
    if (s == "mo")
        return Metric::multi_objective;
    throw domain_error("unknown metric '" + s + "' (expected so or mo)");
}

inline const char* to_string(Metric m) { return m == Metric::single_objective ? "so" : "mo"; }

struct ScoreSample {
    std::vector<double> scores;
    Direction direction = Direction::maximize;
};

inline double mean_of(std::span<const double> xs)
{
    if (xs.empty())
        throw contract_violation("mean of an empty sample");
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

/// Standard deviation; singletons have zero spread under either estimator.
inline double stddev_of(std::span<const double> xs, StdEstimator est = StdEstimator::sample)
{
    const double mu = mean_of(xs);
    if (xs.size() == 1)
        return 0.0;
    double sq = 0.0;
    for (double x : xs)
        sq += (x - mu) * (x - mu);
    const double denom = static_cast<double>(xs.size()) - (est == StdEstimator::sample ? 1.0 : 0.0);
    return std::sqrt(sq / denom);
}

inline double median_of(std::vector<double> xs)
{
    if (xs.empty())
        throw contract_violation("median of an empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double oriented(double value, Direction d) { return d == Direction::maximize ? value : -value; }

/// Mean task score, negated for minimisation so the optimizer always maximises.
inline double single_objective(const ScoreSample& sample)
{
    if (sample.scores.empty())
        throw contract_violation("single_objective: empty sample");
    return oriented(mean_of(sample.scores), sample.direction);
}

/// Mean minus standard deviation of the task score, in the optimizer-facing orientation.
inline double multi_objective(const ScoreSample& sample, StdEstimator est = StdEstimator::sample)
{
    if (sample.scores.size() < 2)
        throw domain_error("multi_objective: standard deviation needs at least two scores");
    const double mu = oriented(mean_of(sample.scores), sample.direction);
    return mu - stddev_of(sample.scores, est);
}

inline double apply_metric(Metric m, const ScoreSample& sample, StdEstimator est = StdEstimator::sample)
{
    return m == Metric::single_objective ? single_objective(sample) : multi_objective(sample, est);
}

/// 100 * sigma / |mu| over raw scores.
inline double coefficient_of_variation(std::span<const double> scores, StdEstimator est = StdEstimator::sample)
{
    const double mu = mean_of(scores);
    if (mu == 0.0)
        throw domain_error("coefficient_of_variation: zero mean");
    return 100.0 * stddev_of(scores, est) / std::abs(mu);
}

struct FitnessReport {
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_seed;
    double fitness = -std::numeric_limits<double>::infinity();
    bool failed = false;
    std::string failure;
};

/// Seed-averaged fitness. `per_seed_metric` trains and evaluates for one
/// seed; a single diverged seed marks the whole report failed.
inline FitnessReport fitness(std::span<const std::uint64_t> seeds,
                             const std::function<double(std::uint64_t)>& per_seed_metric)
{
    if (seeds.empty())
        throw contract_violation("fitness: empty seed list");
    FitnessReport report;
    report.seeds.assign(seeds.begin(), seeds.end());
    for (const auto seed : seeds) {
        try {
            const double v = per_seed_metric(seed);
            if (!std::isfinite(v)) {
                report.failed = true;
                report.failure = "non-finite metric for seed " + std::to_string(seed);
                report.per_seed.push_back(v);
                continue;
            }
            report.per_seed.push_back(v);
        } catch (const training_diverged& e) {
            report.failed = true;
            report.failure = e.what();
            report.per_seed.push_back(std::numeric_limits<double>::quiet_NaN());
        } catch (const degenerate_weights& e) {
            report.failed = true;
            report.failure = e.what();
            report.per_seed.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    if (!report.failed)
        report.fitness = mean_of(report.per_seed);
    return report;
}

struct ExperimentAggregate {
    double median_performance = 0.0;
    double median_cv = 0.0;
    std::vector<double> run_medians;
    std::vector<double> run_cvs;
};

/// Median over each run's evaluations, then the median of those run medians.
/// The coefficient of variation is aggregated the same way.
inline ExperimentAggregate aggregate_experiment(const std::vector<std::vector<double>>& runs)
{
    if (runs.empty())
        throw contract_violation("aggregate_experiment: no runs");
    ExperimentAggregate agg;
    for (const auto& run : runs) {
        if (run.empty())
            throw contract_violation("aggregate_experiment: run without evaluations");
        agg.run_medians.push_back(median_of(run));
        const double mu = mean_of(run);
        agg.run_cvs.push_back(mu == 0.0 ? 0.0 : coefficient_of_variation(run));
    }
    agg.median_performance = median_of(agg.run_medians);
    agg.median_cv = median_of(agg.run_cvs);
    return agg;
}

struct BootstrapResult {
    double median_difference = 0.0; ///< median(a) - median(b)
    double p_value = 1.0;
};

inline constexpr std::size_t bootstrap_min_samples = 5;

/// Unpaired percentile bootstrap of the difference of medians. The two-sided
/// p-estimate is twice the smaller tail mass of the resampled difference on
/// either side of zero, capped at 1.
inline BootstrapResult bootstrap_compare(std::span<const double> a, std::span<const double> b, std::size_t n_resamples,
                                         std::uint64_t seed)
{
    if (a.size() < bootstrap_min_samples || b.size() < bootstrap_min_samples)
        throw domain_error("bootstrap_compare: both samples need at least " + std::to_string(bootstrap_min_samples) +
                           " values");
    if (n_resamples < 1)
        throw domain_error("bootstrap_compare: need at least one resample");
    BootstrapResult out;
    out.median_difference = median_of({a.begin(), a.end()}) - median_of({b.begin(), b.end()});

    Rng rng(derive_seed(seed, 0xb007));
    std::vector<double> ra(a.size()), rb(b.size());
    std::size_t at_most_zero = 0, at_least_zero = 0;
    for (std::size_t r = 0; r < n_resamples; ++r) {
        for (auto& v : ra)
            v = a[rng.index(a.size())];
        for (auto& v : rb)
            v = b[rng.index(b.size())];
        const double d = median_of(ra) - median_of(rb);
        at_most_zero += d <= 0.0;
        at_least_zero += d >= 0.0;
    }
    const double tail = static_cast<double>(std::min(at_most_zero, at_least_zero)) / static_cast<double>(n_resamples);
    out.p_value = std::min(1.0, 2.0 * tail);
    return out;
}

} // namespace shapeopt
