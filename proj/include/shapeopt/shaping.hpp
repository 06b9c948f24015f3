#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "space.hpp"

namespace shapeopt {

/// Declared shaping term of an environment. Unweighted terms (fuel) enter
/// the shaped reward with their sign but are never optimised.
struct ComponentDecl {
    std::string name;
    int sign = +1;
    double default_weight = 1.0;
    bool weighted = true;
};

/// Scale alpha and named weights of r~ = alpha * (r + f^w).
struct RewardParams {
    double alpha = 1.0;
    std::map<std::string, double> weights;

    RewardParams() = default;
    RewardParams(double a, std::map<std::string, double> w) : alpha(a), weights(std::move(w))
    {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw domain_error("reward scale alpha must be positive and finite");
    }

    static RewardParams defaults(const std::vector<ComponentDecl>& decls, double alpha = 1.0)
    {
        std::map<std::string, double> w;
        for (const auto& d : decls)
            if (d.weighted)
                w.emplace(d.name, d.default_weight);
        return RewardParams(alpha, std::move(w));
    }
};

/// Per-step reward decomposition: sparse base reward plus unsigned shaping magnitudes.
struct RewardComponents {
    double base = 0.0;
    std::map<std::string, double> shaping; ///< weighted terms
    std::map<std::string, double> fixed;   ///< unweighted terms
};

using SignMap = std::map<std::string, int>;

inline SignMap signs_of(const std::vector<ComponentDecl>& decls)
{
    SignMap s;
    for (const auto& d : decls)
        s.emplace(d.name, d.sign);
    return s;
}

inline double shaped_reward(const RewardComponents& components, const RewardParams& params, const SignMap& signs)
{
    auto sign_of = [&](const std::string& name) {
        const auto it = signs.find(name);
        if (it == signs.end())
            throw domain_error("no sign declared for reward component '" + name + "'");
        return static_cast<double>(it->second);
    };
    double total = components.base;
    for (const auto& [name, magnitude] : components.shaping) {
        const auto w = params.weights.find(name);
        if (w == params.weights.end())
            throw domain_error("no weight for reward component '" + name + "'");
        total += sign_of(name) * w->second * magnitude;
    }
    for (const auto& [name, magnitude] : components.fixed)
        total += sign_of(name) * magnitude;
    return params.alpha * total;
}

inline double l1_norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += std::abs(x);
    return s;
}

/// w' = ||w_hat||_1 * w / ||w||_1
inline std::vector<double> explicit_scale(std::span<const double> w, double target_norm)
{
    const double norm = l1_norm(w);
    if (!(norm > 0.0))
        throw degenerate_weights("explicit_scale: weight vector has zero L1 norm");
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] = target_norm * (w[i] / norm);
    return out;
}

inline std::vector<double> explicit_scale(std::span<const double> w, std::span<const double> w_hat)
{
    if (w.size() != w_hat.size())
        throw contract_violation("explicit_scale: weight vectors differ in length");
    return explicit_scale(w, l1_norm(w_hat));
}

/// Map form: only the weights present in `defaults` take part in the norm.
inline std::map<std::string, double> explicit_scale(const std::map<std::string, double>& w,
                                                    const std::map<std::string, double>& defaults)
{
    std::vector<double> raw;
    std::vector<double> hat;
    for (const auto& [name, value] : defaults) {
        const auto it = w.find(name);
        if (it == w.end())
            throw domain_error("explicit_scale: missing weight '" + name + "'");
        raw.push_back(it->second);
        hat.push_back(value);
    }
    const auto scaled = explicit_scale(raw, hat);
    auto out = w;
    std::size_t i = 0;
    for (const auto& [name, value] : defaults)
        out[name] = scaled[i++];
    return out;
}

/// Implicit scaling: reward-weight ranges multiplied by `norm_upper`; the
/// reward scale is removed from the space (and therefore frozen at 1).
inline SearchSpace implicit_ranges(const SearchSpace& space, double norm_upper)
{
    if (!(norm_upper > 0.0))
        throw domain_error("implicit_ranges: norm must be positive");
    std::vector<ParamSpec> out;
    for (const auto& p : space.params()) {
        switch (p.role()) {
        case ParamRole::reward_weight:
            out.push_back(p.scaled(norm_upper));
            break;
        case ParamRole::reward_scale:
            break;
        case ParamRole::hyperparameter:
            out.push_back(p);
            break;
        }
    }
    return SearchSpace(std::move(out));
}

} // namespace shapeopt
