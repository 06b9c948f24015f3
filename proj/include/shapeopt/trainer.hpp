#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dehb.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "random.hpp"
#include "shaping.hpp"
#include "space.hpp"

namespace shapeopt {

/// Hyperparameters of the reference policy-gradient trainer. `discounting`
/// is 1 - gamma.
struct TrainerSpec {
    double learning_rate = 0.01;
    double discounting = 0.01;
    double entropy_coef = 0.0;
    std::int64_t batch_size = 512;
    Budget budget = 0; ///< environment steps
    std::uint64_t seed = 0;

    double initial_log_std = -0.7;
    double baseline_decay = 0.9;
    bool normalize_advantages = true;

    double gamma() const { return 1.0 - discounting; }

    void validate() const
    {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw domain_error("trainer: learning_rate must be positive");
        if (!(discounting > 0.0 && discounting < 1.0))
            throw domain_error("trainer: discounting (1 - gamma) must lie in (0, 1)");
        if (!(entropy_coef >= 0.0))
            throw domain_error("trainer: entropy_coef must be non-negative");
        if (batch_size < 1)
            throw domain_error("trainer: batch_size must be >= 1");
        if (budget < 0)
            throw domain_error("trainer: budget must be non-negative");
    }

    /// Fills the four named hyperparameters from a value map; absent names keep their current value.
    TrainerSpec with_values(const ValueMap& values) const
    {
        TrainerSpec s = *this;
        auto take = [&](const char* name, auto& field) {
            const auto it = values.find(name);
            if (it != values.end())
                field = static_cast<std::remove_reference_t<decltype(field)>>(it->second);
        };
        take("learning_rate", s.learning_rate);
        take("discounting", s.discounting);
        take("entropy_coef", s.entropy_coef);
        double batch = static_cast<double>(s.batch_size);
        take("batch_size", batch);
        s.batch_size = static_cast<std::int64_t>(std::llround(batch));
        return s;
    }
};

/// Linear-Gaussian policy: action_k ~ N(w_k . [1, obs], exp(log_std_k)^2).
class Policy {
public:
    Policy() = default;
    Policy(std::size_t observation_size, std::size_t action_size, double initial_log_std)
        : obs_(observation_size), act_(action_size), weights_(action_size * (observation_size + 1), 0.0),
          log_std_(action_size, initial_log_std)
    {
    }

    std::size_t observation_size() const { return obs_; }
    std::size_t action_size() const { return act_; }
    std::size_t parameter_count() const { return weights_.size() + log_std_.size(); }
    std::int64_t steps_trained = 0;

    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& log_std() { return log_std_; }
    const std::vector<double>& log_std() const { return log_std_; }

    std::vector<double> mean(std::span<const double> obs) const
    {
        std::vector<double> mu(act_);
        for (std::size_t k = 0; k < act_; ++k) {
            const double* w = &weights_[k * (obs_ + 1)];
            double m = w[0];
            for (std::size_t j = 0; j < obs_; ++j)
                m += w[j + 1] * obs[j];
            mu[k] = m;
        }
        return mu;
    }

    std::vector<double> sample(std::span<const double> obs, Rng& rng) const
    {
        auto a = mean(obs);
        for (std::size_t k = 0; k < act_; ++k)
            a[k] += std::exp(log_std_[k]) * rng.normal();
        return a;
    }

    /// Gradient of log pi(action | obs) over [weights..., log_std...].
    void accumulate_log_prob_gradient(std::span<const double> obs, std::span<const double> action, double scale,
                                      std::span<double> grad) const
    {
        const auto mu = mean(obs);
        for (std::size_t k = 0; k < act_; ++k) {
            const double var = std::exp(2.0 * log_std_[k]);
            const double diff = action[k] - mu[k];
            const double dmu = diff / var;
            double* g = &grad[k * (obs_ + 1)];
            g[0] += scale * dmu;
            for (std::size_t j = 0; j < obs_; ++j)
                g[j + 1] += scale * dmu * obs[j];
            grad[weights_.size() + k] += scale * (diff * diff / var - 1.0);
        }
    }

    bool finite() const
    {
        return std::all_of(weights_.begin(), weights_.end(), [](double v) { return std::isfinite(v); }) &&
               std::all_of(log_std_.begin(), log_std_.end(), [](double v) { return std::isfinite(v); });
    }

    void apply_update(std::span<const double> delta)
    {
        for (std::size_t i = 0; i < weights_.size(); ++i)
            weights_[i] += delta[i];
        for (std::size_t k = 0; k < act_; ++k)
            log_std_[k] = std::clamp(log_std_[k] + delta[weights_.size() + k], -5.0, 1.0);
    }

    bool operator==(const Policy&) const = default;

private:
    std::size_t obs_ = 0;
    std::size_t act_ = 0;
    std::vector<double> weights_;
    std::vector<double> log_std_;
};

struct Sample {
    std::vector<double> observation;
    std::vector<double> action;
    double advantage = 0.0;
};

/// Score-function estimate of grad E[A log pi] averaged over the batch, plus
/// the entropy bonus gradient (d entropy / d log_std = 1 per action dimension).
inline std::vector<double> policy_gradient(const Policy& policy, std::span<const Sample> batch, double entropy_coef)
{
    std::vector<double> grad(policy.parameter_count(), 0.0);
    if (batch.empty())
        return grad;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& s : batch)
        policy.accumulate_log_prob_gradient(s.observation, s.action, s.advantage * inv_n, grad);
    const std::size_t offset = policy.parameter_count() - policy.action_size();
    for (std::size_t k = 0; k < policy.action_size(); ++k)
        grad[offset + k] += entropy_coef;
    return grad;
}

/// Adam, used for gradient ascent.
class Adam {
public:
    Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

    std::vector<double> step(std::span<const double> grad)
    {
        ++t_;
        std::vector<double> delta(grad.size());
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < grad.size(); ++i) {
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
            delta[i] = lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
        return delta;
    }

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;

private:
    double lr_;
    std::vector<double> m_;
    std::vector<double> v_;
    long t_ = 0;
};

/// REINFORCE with a moving-average return baseline and an entropy bonus.
/// Training runs floor(budget / batch_size) batches of exactly batch_size
/// environment steps; an episode still running at a batch boundary is cut.
template <typename Factory>
    requires Environment<std::invoke_result_t<Factory&>>
Policy train(Factory&& make_env, const RewardParams& reward, const TrainerSpec& spec)
{
    spec.validate();
    auto env = make_env();
    const auto signs = signs_of(env.components());
    Policy policy(env.observation_size(), env.action_size(), spec.initial_log_std);
    Adam adam(policy.parameter_count(), spec.learning_rate);
    Rng rng(derive_seed(spec.seed, 0x7a11));
    const double gamma = spec.gamma();

    const std::int64_t batches = spec.budget / spec.batch_size;
    std::uint64_t episode = 0;
    double baseline = 0.0;
    bool baseline_ready = false;

    std::vector<Sample> batch;
    std::vector<double> rewards;
    batch.reserve(static_cast<std::size_t>(spec.batch_size));
    rewards.reserve(static_cast<std::size_t>(spec.batch_size));

    for (std::int64_t b = 0; b < batches; ++b) {
        batch.clear();
        rewards.clear();
        std::vector<std::size_t> episode_ends;
        auto obs = env.reset(derive_seed(spec.seed, 0xe915, episode++));
        for (std::int64_t t = 0; t < spec.batch_size; ++t) {
            auto action = policy.sample(obs, rng);
            auto res = env.step(action);
            batch.push_back({std::move(obs), std::move(action), 0.0});
            rewards.push_back(shaped_reward(res.components, reward, signs));
            if (res.done) {
                episode_ends.push_back(batch.size());
                if (t + 1 < spec.batch_size)
                    obs = env.reset(derive_seed(spec.seed, 0xe915, episode++));
            } else {
                obs = std::move(res.observation);
            }
        }
        if (episode_ends.empty() || episode_ends.back() != batch.size())
            episode_ends.push_back(batch.size());

        // Discounted returns-to-go within each episode segment.
        std::size_t start = 0;
        for (const auto end : episode_ends) {
            double g = 0.0;
            for (std::size_t i = end; i-- > start;) {
                g = rewards[i] + gamma * g;
                batch[i].advantage = g;
            }
            start = end;
        }

        double mean_return = 0.0;
        for (const auto& s : batch)
            mean_return += s.advantage;
        mean_return /= static_cast<double>(batch.size());
        if (!baseline_ready) {
            baseline = mean_return;
            baseline_ready = true;
        }
        for (auto& s : batch)
            s.advantage -= baseline;
        baseline = spec.baseline_decay * baseline + (1.0 - spec.baseline_decay) * mean_return;

        if (spec.normalize_advantages && batch.size() > 1) {
            double sq = 0.0, mu = 0.0;
            for (const auto& s : batch)
                mu += s.advantage;
            mu /= static_cast<double>(batch.size());
            for (const auto& s : batch)
                sq += (s.advantage - mu) * (s.advantage - mu);
            const double sd = std::sqrt(sq / static_cast<double>(batch.size()));
            if (sd > 1e-12)
                for (auto& s : batch)
                    s.advantage = (s.advantage - mu) / sd;
        }

        const auto grad = policy_gradient(policy, batch, spec.entropy_coef);
        if (!std::all_of(grad.begin(), grad.end(), [](double v) { return std::isfinite(v); }))
            throw training_diverged("non-finite policy gradient in batch " + std::to_string(b));
        policy.apply_update(adam.step(grad));
        if (!policy.finite())
            throw training_diverged("non-finite policy parameters after batch " + std::to_string(b));
        policy.steps_trained += spec.batch_size;
    }
    return policy;
}

struct EpisodeResult {
    double task_score = 0.0;
    double shaped_return = 0.0;
};

/// Runs `n_episodes` episodes with seeds derived from `seed`. Actions are
/// the policy mean unless `stochastic` is set.
template <typename Factory>
    requires Environment<std::invoke_result_t<Factory&>>
std::vector<EpisodeResult> evaluate(const Policy& policy, Factory&& make_env, const RewardParams& reward,
                                    std::size_t n_episodes, std::uint64_t seed, bool stochastic = false)
{
    if (n_episodes < 1)
        throw contract_violation("evaluate: need at least one episode");
    auto env = make_env();
    const auto signs = signs_of(env.components());
    Rng rng(derive_seed(seed, 0xe7a1));
    std::vector<EpisodeResult> out;
    out.reserve(n_episodes);
    for (std::size_t i = 0; i < n_episodes; ++i) {
        auto obs = env.reset(derive_seed(seed, 0xe915, i));
        double ret = 0.0;
        for (;;) {
            const auto action = stochastic ? policy.sample(obs, rng) : policy.mean(obs);
            auto res = env.step(action);
            ret += shaped_reward(res.components, reward, signs);
            if (res.done)
                break;
            obs = std::move(res.observation);
        }
        out.push_back({env.task_score(), ret});
    }
    return out;
}

} // namespace shapeopt
