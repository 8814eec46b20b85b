// False-demand injection: the four forge shapes (pulse, scaling, ramping,
// random) and the run_dr hook that re-injects them every iteration.
#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "drsim/engine.hpp"

namespace drsim {

enum class AttackKind { Pulse, Scaling, Ramping, Random };

inline const char* to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::Pulse: return "pulse";
        case AttackKind::Scaling: return "scaling";
        case AttackKind::Ramping: return "ramping";
        default: return "random";
    }
}

inline AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "pulse") return AttackKind::Pulse;
    if (s == "scaling") return AttackKind::Scaling;
    if (s == "ramping") return AttackKind::Ramping;
    if (s == "random") return AttackKind::Random;
    throw std::invalid_argument("unknown attack kind: " + s);
}

struct AttackSpec {
    AttackKind kind = AttackKind::Pulse;
    std::vector<int> target_slots;   // pricing-slot indices; pulse/ramping contiguous
    double magnitude = 0.0;          // fraction of daily controllable demand, > 0
    std::uint64_t seed = 0;          // drives the random kind
    bool persistent = true;          // re-inject every iteration

    void validate(int pricing_slots) const {
        if (!(magnitude > 0.0)) throw std::invalid_argument("AttackSpec: magnitude must be > 0");
        if (target_slots.empty()) throw std::invalid_argument("AttackSpec: no target slots");
        for (int s : target_slots)
            if (s < 0 || s >= pricing_slots)
                throw std::invalid_argument("AttackSpec: target slot out of range");
        if (kind == AttackKind::Pulse || kind == AttackKind::Ramping)
            for (std::size_t i = 1; i < target_slots.size(); ++i)
                if (target_slots[i] != target_slots[i - 1] + 1)
                    throw std::invalid_argument("AttackSpec: pulse/ramping slots must be contiguous");
    }
};

struct ForgeResult {
    std::vector<double> attacked;
    std::vector<double> fd;   // attacked - genuine, zero off target slots
};

// Sum over all appliances of demand_per_slot * duration; the paper's
// injection percentages are fractions of this quantity.
inline double controllable_daily_demand(const std::vector<House>& houses) {
    double sum = 0.0;
    for (const House& h : houses)
        for (const Appliance& a : h.appliances) sum += a.demand_per_slot * a.duration;
    return sum;
}

// All four kinds inject the same budget = magnitude * controllable demand;
// they differ only in how the budget is spread over the target slots.
inline ForgeResult forge(const std::vector<double>& forecast, const AttackSpec& spec,
                         double controllable_demand) {
    spec.validate(static_cast<int>(forecast.size()));
    const double budget = spec.magnitude * controllable_demand;
    if (!(budget > 0.0)) throw std::invalid_argument("forge: non-positive budget");

    const std::size_t n = spec.target_slots.size();
    std::vector<double> weights(n, 0.0);
    switch (spec.kind) {
        case AttackKind::Pulse:
            weights.assign(n, 1.0);
            break;
        case AttackKind::Scaling: {
            // Multiply target slots by a common factor so the added energy
            // equals the budget; all-zero targets degrade to a pulse.
            double base = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                base += forecast[static_cast<std::size_t>(spec.target_slots[i])];
            if (base > 0.0) {
                for (std::size_t i = 0; i < n; ++i)
                    weights[i] = forecast[static_cast<std::size_t>(spec.target_slots[i])];
            } else {
                weights.assign(n, 1.0);
            }
            break;
        }
        case AttackKind::Ramping:
            // Linear rise to a peak then fall, e.g. 1,2,1 for three slots.
            for (std::size_t i = 0; i < n; ++i)
                weights[i] = static_cast<double>(std::min(i + 1, n - i));
            break;
        case AttackKind::Random: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) weights[i] = uni(rng);
            double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
            if (sum <= 0.0) weights.assign(n, 1.0);
            break;
        }
    }
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);

    ForgeResult out;
    out.attacked = forecast;
    out.fd.assign(forecast.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t slot = static_cast<std::size_t>(spec.target_slots[i]);
        const double add = budget * weights[i] / wsum;
        out.fd[slot] = add;
        out.attacked[slot] += add;
    }
    return out;
}

struct AttackTrace {
    std::vector<std::vector<double>> injected;   // fd per iteration
    double cumulative_energy = 0.0;
};

// run_dr hook: injects fd into the aggregated forecast. Persistent specs
// re-inject every iteration; otherwise only iteration 0 is touched.
class AttackHook : public RoundHook {
  public:
    AttackHook(AttackSpec spec, double controllable_demand)
        : spec_(std::move(spec)), controllable_(controllable_demand) {}

    std::vector<double> apply(const std::vector<double>& forecast, int iteration) override {
        if (iteration > 0 && !spec_.persistent) {
            trace_.injected.emplace_back(forecast.size(), 0.0);
            return forecast;
        }
        ForgeResult forged = forge(forecast, spec_, controllable_);
        for (double x : forged.fd) trace_.cumulative_energy += x;
        trace_.injected.push_back(std::move(forged.fd));
        return forged.attacked;
    }

    const AttackTrace& trace() const { return trace_; }

  private:
    AttackSpec spec_;
    double controllable_;
    AttackTrace trace_;
};

}  // namespace drsim
