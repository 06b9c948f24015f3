#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace shapeopt {

enum class ParamKind { continuous, categorical };

enum class ParamRole { hyperparameter, reward_weight, reward_scale };

inline const char* to_string(ParamRole role)
{
    switch (role) {
    case ParamRole::hyperparameter:
        return "hyperparameter";
    case ParamRole::reward_weight:
        return "reward_weight";
    case ParamRole::reward_scale:
        return "reward_scale";
    }
    return "?";
}

inline ParamRole parse_role(const std::string& s)
{
    if (s == "hyperparameter")
        return ParamRole::hyperparameter;
    if (s == "reward_weight")
        return ParamRole::reward_weight;
    if (s == "reward_scale")
        return ParamRole::reward_scale;
    throw domain_error("unknown parameter role '" + s + "'");
}

using ValueMap = std::map<std::string, double>;

/// One optimisable parameter: a continuous interval (optionally log-scaled)
/// or a finite list of numeric choices.
class ParamSpec {
public:
    static ParamSpec continuous(std::string name, double lo, double hi, bool log_scale = false,
                                ParamRole role = ParamRole::hyperparameter)
    {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw domain_error("parameter '" + name + "': requires finite lo < hi");
        if (log_scale && !(lo > 0.0))
            throw domain_error("parameter '" + name + "': log scale requires lo > 0");
        ParamSpec p;
        p.name_ = std::move(name);
        p.kind_ = ParamKind::continuous;
        p.lo_ = lo;
        p.hi_ = hi;
        p.log_scale_ = log_scale;
        p.role_ = role;
        return p;
    }

    static ParamSpec categorical(std::string name, std::vector<double> choices,
                                 ParamRole role = ParamRole::hyperparameter)
    {
        if (choices.empty())
            throw domain_error("parameter '" + name + "': empty choice list");
        ParamSpec p;
        p.name_ = std::move(name);
        p.kind_ = ParamKind::categorical;
        p.lo_ = *std::min_element(choices.begin(), choices.end());
        p.hi_ = *std::max_element(choices.begin(), choices.end());
        p.choices_ = std::move(choices);
        p.role_ = role;
        return p;
    }

    const std::string& name() const { return name_; }
    ParamKind kind() const { return kind_; }
    ParamRole role() const { return role_; }
    bool log_scale() const { return log_scale_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<double>& choices() const { return choices_; }

    double decode(double u) const
    {
        if (!(u >= 0.0 && u <= 1.0))
            throw contract_violation("parameter '" + name_ + "': unit value outside [0,1]");
        if (kind_ == ParamKind::categorical) {
            const auto k = choices_.size();
            const auto idx = std::min(static_cast<std::size_t>(std::floor(u * static_cast<double>(k))), k - 1);
            return choices_[idx];
        }
        if (u == 0.0)
            return lo_;
        if (u == 1.0)
            return hi_;
        if (log_scale_) {
            const double llo = std::log(lo_);
            return std::exp(llo + u * (std::log(hi_) - llo));
        }
        return lo_ + u * (hi_ - lo_);
    }

    /// Categorical values map to the midpoint of their bin.
    double encode(double value) const
    {
        if (kind_ == ParamKind::categorical) {
            const auto it = std::find(choices_.begin(), choices_.end(), value);
            if (it == choices_.end())
                throw domain_error("parameter '" + name_ + "': value " + std::to_string(value) + " is not a declared choice");
            const auto idx = static_cast<double>(it - choices_.begin());
            return (idx + 0.5) / static_cast<double>(choices_.size());
        }
        if (!(value >= lo_ && value <= hi_))
            throw domain_error("parameter '" + name_ + "': value " + std::to_string(value) + " outside [" +
                               std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
        double u;
        if (log_scale_) {
            const double llo = std::log(lo_);
            u = (std::log(value) - llo) / (std::log(hi_) - llo);
        } else {
            u = (value - lo_) / (hi_ - lo_);
        }
        return std::clamp(u, 0.0, 1.0);
    }

    /// Copy with both bounds multiplied by `factor` (continuous only).
    ParamSpec scaled(double factor) const
    {
        if (kind_ != ParamKind::continuous)
            throw domain_error("parameter '" + name_ + "': cannot rescale a categorical parameter");
        return continuous(name_, lo_ * factor, hi_ * factor, log_scale_, role_);
    }

private:
    ParamSpec() = default;

    std::string name_;
    ParamKind kind_ = ParamKind::continuous;
    double lo_ = 0.0;
    double hi_ = 1.0;
    std::vector<double> choices_;
    bool log_scale_ = false;
    ParamRole role_ = ParamRole::hyperparameter;
};

class SearchSpace {
public:
    explicit SearchSpace(std::vector<ParamSpec> params) : params_(std::move(params))
    {
        if (params_.empty())
            throw domain_error("search space needs at least one parameter");
        for (std::size_t i = 0; i < params_.size(); ++i)
            for (std::size_t j = i + 1; j < params_.size(); ++j)
                if (params_[i].name() == params_[j].name())
                    throw domain_error("duplicate parameter name '" + params_[i].name() + "'");
    }

    std::size_t dimension() const { return params_.size(); }
    const std::vector<ParamSpec>& params() const { return params_; }
    const ParamSpec& operator[](std::size_t i) const { return params_[i]; }

    std::optional<std::size_t> index_of(const std::string& name) const
    {
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i].name() == name)
                return i;
        return std::nullopt;
    }

    /// Subspace holding only the parameters whose role satisfies `pred`; nullopt when empty.
    template <typename Pred>
    std::optional<SearchSpace> filter(Pred pred) const
    {
        std::vector<ParamSpec> kept;
        for (const auto& p : params_)
            if (pred(p))
                kept.push_back(p);
        if (kept.empty())
            return std::nullopt;
        return SearchSpace(std::move(kept));
    }

private:
    std::vector<ParamSpec> params_;
};

inline ValueMap decode(const SearchSpace& space, std::span<const double> unit)
{
    if (unit.size() != space.dimension())
        throw contract_violation("decode: expected " + std::to_string(space.dimension()) + " components, got " +
                                 std::to_string(unit.size()));
    ValueMap values;
    for (std::size_t i = 0; i < unit.size(); ++i)
        values.emplace(space[i].name(), space[i].decode(unit[i]));
    return values;
}

inline std::vector<double> encode(const SearchSpace& space, const ValueMap& values)
{
    std::vector<double> unit(space.dimension());
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        const auto it = values.find(space[i].name());
        if (it == values.end())
            throw domain_error("encode: missing value for parameter '" + space[i].name() + "'");
        unit[i] = space[i].encode(it->second);
    }
    return unit;
}

/// Stable identifier of a unit vector (FNV-1a over the IEEE bytes).
inline std::string unit_id(std::span<const double> unit)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : unit) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4)
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
}

/// A point of the unit hypercube together with its decoded values.
class Configuration {
public:
    Configuration(const SearchSpace& space, std::vector<double> unit)
        : unit_(std::move(unit)), values_(decode(space, unit_)), id_(unit_id(unit_))
    {
    }

    const std::vector<double>& unit() const { return unit_; }
    const ValueMap& values() const { return values_; }
    const std::string& id() const { return id_; }

    double value(const std::string& name) const
    {
        const auto it = values_.find(name);
        if (it == values_.end())
            throw contract_violation("configuration has no parameter '" + name + "'");
        return it->second;
    }

private:
    std::vector<double> unit_;
    ValueMap values_;
    std::string id_;
};

inline Configuration sample_uniform(const SearchSpace& space, Rng& rng)
{
    std::vector<double> unit(space.dimension());
    for (auto& u : unit)
        u = rng.uniform();
    return Configuration(space, std::move(unit));
}

/// Search range for a reward weight: [0, 10^n] with the smallest n >= 0 such
/// that w < 10^n; negative defaults mirror to [-10^n, 0].
inline std::pair<double, double> weight_search_range(double default_weight)
{
    if (!std::isfinite(default_weight))
        throw domain_error("weight_search_range: default weight must be finite");
    const double magnitude = std::abs(default_weight);
    double bound = 1.0;
    while (!(magnitude < bound))
        bound *= 10.0;
    if (default_weight < 0.0)
        return {-bound, 0.0};
    return {0.0, bound};
}

} // namespace shapeopt
