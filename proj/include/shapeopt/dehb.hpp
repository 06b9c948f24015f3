#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "random.hpp"
#include "space.hpp"

namespace shapeopt {

using Budget = std::int64_t;

inline constexpr double failed_fitness = -std::numeric_limits<double>::infinity();

/// Ascending training-step budgets, each `eta` times the previous one.
struct BudgetLadder {
    std::vector<Budget> rungs;
    int eta = 3;

    Budget max_budget() const { return rungs.back(); }
    Budget min_budget() const { return rungs.front(); }
    std::size_t size() const { return rungs.size(); }
};

inline BudgetLadder budget_ladder(Budget max_budget, int eta, int num_rungs)
{
    if (eta < 2)
        throw domain_error("budget_ladder: eta must be >= 2");
    if (num_rungs < 1)
        throw domain_error("budget_ladder: need at least one rung");
    Budget divisor = 1;
    for (int r = 1; r < num_rungs; ++r)
        divisor *= eta;
    if (max_budget < divisor)
        throw domain_error("budget_ladder: max budget " + std::to_string(max_budget) + " too small for " +
                           std::to_string(num_rungs) + " rungs at eta " + std::to_string(eta));
    BudgetLadder ladder;
    ladder.eta = eta;
    for (int r = num_rungs - 1; r >= 0; --r) {
        Budget b = max_budget;
        for (int k = 0; k < r; ++k)
            b /= eta;
        ladder.rungs.push_back(b);
    }
    return ladder;
}

struct RungPlan {
    std::size_t rung = 0; ///< index into the ladder
    Budget budget = 0;
    std::size_t count = 0;

    bool operator==(const RungPlan&) const = default;
};

struct Bracket {
    int s = 0;
    std::vector<RungPlan> rungs;

    bool operator==(const Bracket&) const = default;
};

/// HyperBand schedule: bracket s starts ceil((s_max+1)/(s+1) * eta^s)
/// configurations at rung s_max - s and keeps floor(n/eta) per promotion.
inline std::vector<Bracket> hyperband_brackets(const BudgetLadder& ladder)
{
    const int s_max = static_cast<int>(ladder.size()) - 1;
    const auto eta = static_cast<std::size_t>(ladder.eta);
    std::vector<Bracket> out;
    for (int s = s_max; s >= 0; --s) {
        std::size_t eta_s = 1;
        for (int k = 0; k < s; ++k)
            eta_s *= eta;
        const auto num = static_cast<std::size_t>(s_max + 1) * eta_s;
        const auto den = static_cast<std::size_t>(s + 1);
        std::size_t n = (num + den - 1) / den;

        Bracket b;
        b.s = s;
        for (int i = 0; i <= s; ++i) {
            const auto rung = static_cast<std::size_t>(s_max - s + i);
            b.rungs.push_back({rung, ladder.rungs[rung], n});
            n /= eta;
        }
        out.push_back(std::move(b));
    }
    return out;
}

/// Total training steps of one pass over all brackets.
inline Budget hyperband_iteration_cost(const std::vector<Bracket>& brackets)
{
    Budget total = 0;
    for (const auto& b : brackets)
        for (const auto& r : b.rungs)
            total += r.budget * static_cast<Budget>(r.count);
    return total;
}

/// rand/1 donor from explicit parents, clipped into the unit cube.
inline std::vector<double> de_donor(std::span<const double> base, std::span<const double> a, std::span<const double> b,
                                    double f)
{
    if (base.size() != a.size() || base.size() != b.size())
        throw contract_violation("de_donor: parent dimensions differ");
    std::vector<double> donor(base.size());
    for (std::size_t j = 0; j < donor.size(); ++j)
        donor[j] = std::clamp(base[j] + f * (a[j] - b[j]), 0.0, 1.0);
    return donor;
}

/// rand/1 mutation over a population of unit vectors. Parents are drawn
/// without replacement; when fewer than three members exist the missing
/// parents are sampled uniformly from the unit cube.
inline std::vector<double> de_mutate(const std::vector<std::vector<double>>& members, double f, Rng& rng)
{
    if (members.empty())
        throw contract_violation("de_mutate: empty population");
    const std::size_t dim = members.front().size();
    std::vector<std::size_t> idx(members.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;

    std::vector<std::vector<double>> parents;
    for (std::size_t k = 0; k < 3 && k < idx.size(); ++k) {
        const std::size_t pick = k + rng.index(idx.size() - k);
        std::swap(idx[k], idx[pick]);
        parents.push_back(members[idx[k]]);
    }
    while (parents.size() < 3) {
        std::vector<double> random_parent(dim);
        for (auto& v : random_parent)
            v = rng.uniform();
        parents.push_back(std::move(random_parent));
    }
    return de_donor(parents[0], parents[1], parents[2], f);
}

/// Binomial crossover with one forced donor dimension.
inline std::vector<double> de_crossover(std::span<const double> target, std::span<const double> donor, double p_cross,
                                        Rng& rng)
{
    if (target.size() != donor.size())
        throw contract_violation("de_crossover: dimension mismatch");
    if (!(p_cross >= 0.0 && p_cross <= 1.0))
        throw contract_violation("de_crossover: crossover probability outside [0,1]");
    const std::size_t forced = rng.index(target.size());
    std::vector<double> trial(target.begin(), target.end());
    for (std::size_t j = 0; j < trial.size(); ++j)
        if (j == forced || rng.uniform() < p_cross)
            trial[j] = donor[j];
    return trial;
}

struct Member {
    std::vector<double> unit;
    double fitness = failed_fitness;
};

struct Subpopulation {
    Budget budget = 0;
    std::size_t capacity = 0;
    std::vector<Member> members;
    std::size_t cursor = 0;

    std::vector<std::vector<double>> units() const
    {
        std::vector<std::vector<double>> out;
        out.reserve(members.size());
        for (const auto& m : members)
            out.push_back(m.unit);
        return out;
    }

    std::size_t worst_index() const
    {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < members.size(); ++i)
            if (members[i].fitness < members[worst].fitness)
                worst = i;
        return worst;
    }
};

struct Incumbent {
    std::vector<double> unit;
    double fitness = failed_fitness;
    Budget budget = 0;
    std::uint64_t found_at = 0; ///< 1-based count of completed evaluations
};

struct TrajectoryPoint {
    std::uint64_t evaluation = 0;
    Budget cumulative_steps = 0;
    double fitness = 0.0;

    bool operator==(const TrajectoryPoint&) const = default;
};

struct DehbSettings {
    BudgetLadder ladder;
    double total_budget = 133.0; ///< in full-training equivalents
    double mutation_factor = 0.5;
    double crossover_prob = 0.5;
    std::size_t in_flight = 1;
    std::uint64_t seed = 0;
};

enum class SlotKind { random_init, trial, promotion };

struct Job {
    std::uint64_t id = 0; ///< issue order, starting at 0
    Configuration config;
    Budget budget = 0;
    std::size_t rung = 0;
    SlotKind kind = SlotKind::random_init;
};

enum class AskStatus { ready, pending, exhausted };

struct AskResult {
    AskStatus status = AskStatus::exhausted;
    std::optional<Job> job;
};

/// Multi-fidelity differential evolution driven by HyperBand brackets
/// through an ask/tell interface. Fitness is maximised.
class Dehb {
public:
    Dehb(SearchSpace space, DehbSettings settings)
        : space_(std::move(space)), settings_(std::move(settings)), rng_(settings_.seed),
          brackets_(hyperband_brackets(settings_.ladder))
    {
        if (settings_.in_flight < 1)
            throw domain_error("dehb: in-flight limit must be >= 1");
        if (!(settings_.total_budget > 0.0))
            throw domain_error("dehb: total budget must be positive");
        total_steps_ = static_cast<Budget>(
            std::llround(settings_.total_budget * static_cast<double>(settings_.ladder.max_budget())));
        for (std::size_t r = 0; r < settings_.ladder.size(); ++r) {
            Subpopulation pop;
            pop.budget = settings_.ladder.rungs[r];
            for (const auto& b : brackets_)
                for (const auto& plan : b.rungs)
                    if (plan.rung == r)
                        pop.capacity = std::max(pop.capacity, plan.count);
            subpops_.push_back(std::move(pop));
        }
        start_bracket();
    }

    const SearchSpace& space() const { return space_; }
    const DehbSettings& settings() const { return settings_; }
    const std::vector<Bracket>& brackets() const { return brackets_; }
    const std::vector<Subpopulation>& subpopulations() const { return subpops_; }
    const std::optional<Incumbent>& incumbent() const { return incumbent_; }
    const std::vector<TrajectoryPoint>& incumbent_changes() const { return changes_; }
    Budget issued_steps() const { return issued_steps_; }
    Budget told_steps() const { return told_steps_; }
    Budget total_steps() const { return total_steps_; }
    std::uint64_t completed() const { return completed_; }
    std::size_t outstanding() const { return pending_.size(); }

    AskResult ask()
    {
        if (exhausted_)
            return {AskStatus::exhausted, std::nullopt};
        if (pending_.size() >= settings_.in_flight)
            return {AskStatus::pending, std::nullopt};
        if (active_.next_issue >= active_.slots.size())
            return {AskStatus::pending, std::nullopt};

        const RungPlan& plan = active_.plan.rungs[active_.rung_pos];
        if (issued_steps_ + plan.budget > total_steps_) {
            exhausted_ = true;
            return {AskStatus::exhausted, std::nullopt};
        }

        const std::size_t slot_index = active_.next_issue++;
        Slot& slot = active_.slots[slot_index];
        if (slot.kind != SlotKind::promotion)
            fill_new_slot(slot, plan.rung);

        Job job{next_id_++, Configuration(space_, slot.unit), plan.budget, plan.rung, slot.kind};
        slot.job_id = job.id;
        pending_.emplace(job.id, slot_index);
        issued_steps_ += plan.budget;
        return {AskStatus::ready, std::move(job)};
    }

    /// Report the fitness of an issued job. Non-finite fitness counts as failed.
    void tell(std::uint64_t job_id, double fitness)
    {
        const auto it = pending_.find(job_id);
        if (it == pending_.end())
            throw contract_violation("tell: job " + std::to_string(job_id) + " was not issued or already told");
        if (!std::isfinite(fitness))
            fitness = failed_fitness;
        Slot& slot = active_.slots[it->second];
        pending_.erase(it);

        const RungPlan& plan = active_.plan.rungs[active_.rung_pos];
        slot.fitness = fitness;
        slot.told = true;
        ++active_.told;
        ++completed_;
        told_steps_ += plan.budget;
        if (slot.kind == SlotKind::random_init)
            --active_.reserved_inits;

        apply_to_subpopulation(slot, plan.rung);

        if (plan.rung + 1 == settings_.ladder.size() && fitness != failed_fitness &&
            (!incumbent_ || fitness > incumbent_->fitness)) {
            incumbent_ = Incumbent{slot.unit, fitness, plan.budget, completed_};
            changes_.push_back({completed_, told_steps_, fitness});
        }
        last_eval_ = {completed_, told_steps_, incumbent_ ? incumbent_->fitness : failed_fitness};

        if (active_.told == active_.slots.size())
            advance_rung();
    }

    void tell(const Configuration& config, Budget budget, double fitness)
    {
        for (const auto& [id, slot_index] : pending_) {
            const Slot& slot = active_.slots[slot_index];
            if (active_.plan.rungs[active_.rung_pos].budget == budget && slot.unit == config.unit()) {
                tell(id, fitness);
                return;
            }
        }
        throw contract_violation("tell: configuration " + config.id() + " at budget " + std::to_string(budget) +
                                 " is not outstanding");
    }

    /// Incumbent changes plus a closing point at the latest evaluation.
    std::vector<TrajectoryPoint> incumbent_trajectory() const
    {
        std::vector<TrajectoryPoint> out = changes_;
        if (!out.empty() && last_eval_.evaluation > out.back().evaluation)
            out.push_back(last_eval_);
        return out;
    }

private:
    struct Slot {
        SlotKind kind = SlotKind::random_init;
        std::vector<double> unit;
        std::size_t target = 0;
        std::uint64_t job_id = 0;
        double fitness = failed_fitness;
        bool told = false;
    };

    struct ActiveBracket {
        Bracket plan;
        std::size_t rung_pos = 0;
        std::vector<Slot> slots;
        std::size_t next_issue = 0;
        std::size_t told = 0;
        std::size_t reserved_inits = 0;
    };

    void start_bracket()
    {
        active_ = ActiveBracket{};
        active_.plan = brackets_[bracket_cursor_];
        bracket_cursor_ = (bracket_cursor_ + 1) % brackets_.size();
        active_.slots.resize(active_.plan.rungs.front().count);
    }

    // Initial members fill an under-capacity subpopulation; afterwards every
    // slot is a rand/1/bin trial against the next target in rotation.
    void fill_new_slot(Slot& slot, std::size_t rung)
    {
        Subpopulation& pop = subpops_[rung];
        if (pop.members.empty() || pop.members.size() + active_.reserved_inits < pop.capacity) {
            slot.kind = SlotKind::random_init;
            slot.unit.resize(space_.dimension());
            for (auto& u : slot.unit)
                u = rng_.uniform();
            ++active_.reserved_inits;
            return;
        }
        slot.kind = SlotKind::trial;
        slot.target = pop.cursor % pop.members.size();
        pop.cursor = (pop.cursor + 1) % pop.members.size();
        const auto donor = de_mutate(pop.units(), settings_.mutation_factor, rng_);
        slot.unit = de_crossover(pop.members[slot.target].unit, donor, settings_.crossover_prob, rng_);
    }

    void apply_to_subpopulation(const Slot& slot, std::size_t rung)
    {
        Subpopulation& pop = subpops_[rung];
        switch (slot.kind) {
        case SlotKind::random_init:
            if (pop.members.size() < pop.capacity) {
                pop.members.push_back({slot.unit, slot.fitness});
            } else {
                const auto w = pop.worst_index();
                if (slot.fitness >= pop.members[w].fitness)
                    pop.members[w] = {slot.unit, slot.fitness};
            }
            break;
        case SlotKind::trial:
            if (slot.fitness >= pop.members[slot.target].fitness)
                pop.members[slot.target] = {slot.unit, slot.fitness};
            break;
        case SlotKind::promotion: {
            if (slot.fitness == failed_fitness)
                break;
            const auto same = std::find_if(pop.members.begin(), pop.members.end(),
                                           [&](const Member& m) { return m.unit == slot.unit; });
            if (same != pop.members.end())
                same->fitness = slot.fitness;
            else if (pop.members.size() < pop.capacity)
                pop.members.push_back({slot.unit, slot.fitness});
            else
                pop.members[pop.worst_index()] = {slot.unit, slot.fitness};
            break;
        }
        }
    }

    void advance_rung()
    {
        if (active_.rung_pos + 1 >= active_.plan.rungs.size()) {
            start_bracket();
            return;
        }
        const std::size_t keep = active_.plan.rungs[active_.rung_pos + 1].count;
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < active_.slots.size(); ++i)
            if (active_.slots[i].fitness != failed_fitness)
                order.push_back(i);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return active_.slots[a].fitness > active_.slots[b].fitness;
        });
        if (order.size() > keep)
            order.resize(keep);
        if (order.empty()) {
            start_bracket();
            return;
        }
        std::vector<Slot> next;
        for (const auto i : order) {
            Slot s;
            s.kind = SlotKind::promotion;
            s.unit = active_.slots[i].unit;
            next.push_back(std::move(s));
        }
        ++active_.rung_pos;
        active_.slots = std::move(next);
        active_.next_issue = 0;
        active_.told = 0;
        active_.reserved_inits = 0;
    }

    SearchSpace space_;
    DehbSettings settings_;
    Rng rng_;
    std::vector<Bracket> brackets_;
    std::vector<Subpopulation> subpops_;
    std::size_t bracket_cursor_ = 0;
    ActiveBracket active_;
    std::map<std::uint64_t, std::size_t> pending_;
    std::uint64_t next_id_ = 0;
    std::uint64_t completed_ = 0;
    Budget issued_steps_ = 0;
    Budget told_steps_ = 0;
    Budget total_steps_ = 0;
    bool exhausted_ = false;
    std::optional<Incumbent> incumbent_;
    std::vector<TrajectoryPoint> changes_;
    TrajectoryPoint last_eval_;
};

} // namespace shapeopt
