// Day-ahead pricing, per-house scheduling, the iterative community
// optimisation loop and the cost algebra (total bill / penalty / cost).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "drsim/domain.hpp"

namespace drsim {

// Prices below this floor are clipped up; keeps unit_price strictly positive
// even with a zero base price.
inline constexpr double kPriceFloor = 1e-6;

struct PriceModel {
    enum class Form { Linear, Quadratic };

    Form form = Form::Quadratic;
    double base = 0.1;                // a, >= 0
    double slope = 0.4;               // b, > 0
    double reference_demand = 30.0;   // d_ref, > 0, normalises demand

    void validate() const {
        if (base < 0.0) throw std::invalid_argument("PriceModel: base must be >= 0");
        if (!(slope > 0.0)) throw std::invalid_argument("PriceModel: slope must be > 0");
        if (!(reference_demand > 0.0))
            throw std::invalid_argument("PriceModel: reference_demand must be > 0");
    }
};

inline double unit_price(double demand, const PriceModel& model) {
    if (demand < 0.0) throw std::invalid_argument("unit_price: negative demand");
    const double x = demand / model.reference_demand;
    const double raw = model.form == PriceModel::Form::Linear
                           ? model.base + model.slope * x
                           : model.base + model.slope * x * x;
    return std::max(raw, std::max(model.base, kPriceFloor));
}

// Element-wise map; no cross-slot coupling.
inline PriceSignal price_signal(const std::vector<double>& forecast, const PriceModel& model,
                                const SlotGrid& grid) {
    if (static_cast<int>(forecast.size()) != grid.pricing_slots)
        throw std::invalid_argument("price_signal: forecast length != pricing_slots");
    PriceSignal out;
    out.values.reserve(forecast.size());
    for (double d : forecast) out.values.push_back(unit_price(d, model));
    return out;
}

// ---------------------------------------------------------------------------
// Appliance footprints
// ---------------------------------------------------------------------------

// Energy an appliance run starting at `start` puts into each pricing slot.
// Touches at most duration/m + 1 slots.
struct Footprint {
    int first_slot = 0;                // first pricing slot touched
    std::vector<double> energy;        // energy per touched pricing slot
};

inline Footprint pricing_footprint(const Appliance& a, int start, const SlotGrid& grid) {
    Footprint fp;
    fp.first_slot = grid.pricing_slot_of(start);
    const int last = grid.pricing_slot_of(start + a.duration - 1);
    fp.energy.assign(static_cast<std::size_t>(last - fp.first_slot + 1), 0.0);
    for (int t = start; t < start + a.duration; ++t)
        fp.energy[static_cast<std::size_t>(grid.pricing_slot_of(t) - fp.first_slot)] += a.demand_per_slot;
    return fp;
}

// ---------------------------------------------------------------------------
// Cost algebra (the community-level quantities)
// ---------------------------------------------------------------------------

inline double total_bill(const std::vector<double>& forecast, const PriceSignal& prices) {
    if (forecast.size() != prices.values.size())
        throw std::invalid_argument("total_bill: length mismatch");
    double sum = 0.0;
    for (std::size_t p = 0; p < forecast.size(); ++p) sum += forecast[p] * prices.values[p];
    return sum;
}

inline double total_penalty(const std::vector<House>& houses, const std::vector<Schedule>& schedules) {
    if (houses.size() != schedules.size())
        throw std::invalid_argument("total_penalty: houses/schedules size mismatch");
    double sum = 0.0;
    for (std::size_t h = 0; h < houses.size(); ++h)
        for (const Appliance& a : houses[h].appliances)
            sum += std::abs(schedules[h].start_of(a.id) - a.preferred_start) * a.penalty_factor;
    return sum;
}

inline double total_cost(double bill, double penalty) {
    if (bill < 0.0 || penalty < 0.0) throw std::invalid_argument("total_cost: negative input");
    return bill + penalty;
}

// Sum per-house scheduling-slot profiles, then fold each group of m
// scheduling slots into one pricing slot.
inline std::vector<double> aggregate(const std::vector<std::vector<double>>& profiles,
                                     const SlotGrid& grid) {
    const int day = grid.day_slots();
    std::vector<double> day_sum(static_cast<std::size_t>(day), 0.0);
    for (const auto& profile : profiles) {
        if (static_cast<int>(profile.size()) != day)
            throw std::invalid_argument("aggregate: profile length != day slots");
        for (int t = 0; t < day; ++t) day_sum[static_cast<std::size_t>(t)] += profile[static_cast<std::size_t>(t)];
    }
    std::vector<double> out(static_cast<std::size_t>(grid.pricing_slots), 0.0);
    for (int t = 0; t < day; ++t)
        out[static_cast<std::size_t>(grid.pricing_slot_of(t))] += day_sum[static_cast<std::size_t>(t)];
    return out;
}

// ---------------------------------------------------------------------------
// Price-taking house schedule (standalone operation)
// ---------------------------------------------------------------------------

// Each appliance independently picks the start minimising
//   sum over occupied pricing slots of energy * price  +  displacement * penalty_factor
// against the posted prices. Ties: smaller displacement, then smaller start.
inline std::pair<Schedule, std::vector<double>> schedule_house(const House& house,
                                                               const PriceSignal& prices,
                                                               const SlotGrid& grid) {
    if (static_cast<int>(prices.values.size()) != grid.pricing_slots)
        throw std::invalid_argument("schedule_house: price signal length != pricing_slots");
    for (double p : prices.values)
        if (!(p > 0.0)) throw std::invalid_argument("schedule_house: prices must be positive");
    require_valid(house, grid);

    Schedule schedule;
    std::vector<double> profile(static_cast<std::size_t>(grid.day_slots()), 0.0);
    for (const Appliance& a : house.appliances) {
        int best_start = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        int best_disp = 0;
        for (int s = a.earliest_start; s <= a.latest_start(); ++s) {
            const Footprint fp = pricing_footprint(a, s, grid);
            double cost = std::abs(s - a.preferred_start) * a.penalty_factor;
            for (std::size_t i = 0; i < fp.energy.size(); ++i)
                cost += fp.energy[i] * prices.values[static_cast<std::size_t>(fp.first_slot) + i];
            const int disp = std::abs(s - a.preferred_start);
            if (cost < best_cost || (cost == best_cost && disp < best_disp)) {
                best_cost = cost;
                best_start = s;
                best_disp = disp;
            }
        }
        schedule.starts[a.id] = best_start;
        for (int t = best_start; t < best_start + a.duration; ++t)
            profile[static_cast<std::size_t>(t)] += a.demand_per_slot;
    }
    return {schedule, profile};
}

// ---------------------------------------------------------------------------
// Iterative community optimisation
// ---------------------------------------------------------------------------

// A hook transforms the aggregated pricing-slot forecast once per iteration,
// between aggregation and pricing (attack injection, detection/mitigation).
class RoundHook {
  public:
    virtual ~RoundHook() = default;
    virtual std::vector<double> apply(const std::vector<double>& forecast, int iteration) = 0;
};

struct DrOptions {
    int max_iterations = 50;
    double convergence_eps = 1e-6;
};

struct TraceEntry {
    std::vector<double> genuine;   // aggregate of actual schedules, pricing resolution
    std::vector<double> received;  // after hooks; what the utility prices
    PriceSignal prices;
    double total_bill = 0.0;       // received x prices
    double total_penalty = 0.0;
    double total_cost = 0.0;
};

struct DrOutcome {
    std::vector<Schedule> schedules;        // aligned with the input house order
    std::vector<double> converged_forecast; // genuine aggregate at the last iteration
    std::vector<double> received_forecast;  // priced (post-hook) forecast at the last iteration
    PriceSignal final_prices;
    std::vector<TraceEntry> trace;
    bool converged = false;
    int iterations_used = 0;
};

namespace detail {

// v * unit_price(v) with the negative range clamped; mid-round corrections can
// push a perceived slot value slightly below zero.
inline double slot_bill(double v, const PriceModel& model) {
    if (v <= 0.0) return 0.0;
    return v * unit_price(v, model);
}

}  // namespace detail

// Gauss-Seidel round-robin: iteration 0 puts every appliance at its preferred
// start; each later round walks houses in ascending id order and moves one
// appliance at a time to the start that minimises the community total cost
// (own bill impact priced on the full aggregate plus own penalty). Ties:
// smaller displacement, then smaller start. Converges when a full round moves
// nothing or the relative total-cost change drops under convergence_eps.
inline DrOutcome run_dr(const std::vector<House>& houses, const SlotGrid& grid,
                        const PriceModel& price_model, const DrOptions& options = {},
                        const std::vector<RoundHook*>& hooks = {}) {
    grid.validate();
    price_model.validate();
    if (options.max_iterations < 1) throw std::invalid_argument("run_dr: max_iterations must be >= 1");
    for (const House& h : houses) require_valid(h, grid);

    std::vector<std::size_t> order(houses.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return houses[a].id < houses[b].id; });

    DrOutcome outcome;
    outcome.schedules.resize(houses.size());
    for (std::size_t h = 0; h < houses.size(); ++h)
        for (const Appliance& a : houses[h].appliances)
            outcome.schedules[h].starts[a.id] = a.preferred_start;

    const std::size_t slots = static_cast<std::size_t>(grid.pricing_slots);
    auto rebuild_aggregate = [&]() {
        std::vector<double> agg(slots, 0.0);
        for (std::size_t h = 0; h < houses.size(); ++h)
            for (const Appliance& a : houses[h].appliances) {
                const Footprint fp = pricing_footprint(a, outcome.schedules[h].start_of(a.id), grid);
                for (std::size_t i = 0; i < fp.energy.size(); ++i)
                    agg[static_cast<std::size_t>(fp.first_slot) + i] += fp.energy[i];
            }
        return agg;
    };

    // One full round of per-appliance coordinate descent; corr is the additive
    // difference between the priced and the genuine forecast for this round.
    auto run_round = [&](std::vector<double>& agg, const std::vector<double>& corr) {
        bool moved = false;
        for (std::size_t idx : order) {
            const House& house = houses[idx];
            Schedule& schedule = outcome.schedules[idx];
            for (const Appliance& a : house.appliances) {
                if (a.earliest_start == a.latest_start()) continue;
                const int current = schedule.start_of(a.id);

                const Footprint cur_fp = pricing_footprint(a, current, grid);
                for (std::size_t i = 0; i < cur_fp.energy.size(); ++i)
                    agg[static_cast<std::size_t>(cur_fp.first_slot) + i] -= cur_fp.energy[i];

                int best_start = current;
                double best_cost = std::numeric_limits<double>::infinity();
                int best_disp = std::numeric_limits<int>::max();
                for (int s = a.earliest_start; s <= a.latest_start(); ++s) {
                    const Footprint fp = pricing_footprint(a, s, grid);
                    double cost = std::abs(s - a.preferred_start) * a.penalty_factor;
                    for (std::size_t i = 0; i < fp.energy.size(); ++i) {
                        const std::size_t p = static_cast<std::size_t>(fp.first_slot) + i;
                        const double before = agg[p] + corr[p];
                        cost += detail::slot_bill(before + fp.energy[i], price_model) -
                                detail::slot_bill(before, price_model);
                    }
                    const int disp = std::abs(s - a.preferred_start);
                    if (cost < best_cost || (cost == best_cost && disp < best_disp) ||
                        (cost == best_cost && disp == best_disp && s < best_start)) {
                        best_cost = cost;
                        best_start = s;
                        best_disp = disp;
                    }
                }

                const Footprint new_fp = pricing_footprint(a, best_start, grid);
                for (std::size_t i = 0; i < new_fp.energy.size(); ++i)
                    agg[static_cast<std::size_t>(new_fp.first_slot) + i] += new_fp.energy[i];
                if (best_start != current) {
                    schedule.starts[a.id] = best_start;
                    moved = true;
                }
            }
        }
        return moved;
    };

    for (int iter = 0;; ++iter) {
        std::vector<double> genuine = rebuild_aggregate();
        std::vector<double> received = genuine;
        for (RoundHook* hook : hooks)
            if (hook) received = hook->apply(received, iter);
        if (received.size() != slots) throw std::runtime_error("run_dr: hook changed forecast length");

        TraceEntry entry;
        entry.genuine = genuine;
        entry.received = received;
        entry.prices = price_signal(received, price_model, grid);
        entry.total_bill = total_bill(received, entry.prices);
        entry.total_penalty = total_penalty(houses, outcome.schedules);
        entry.total_cost = total_cost(entry.total_bill, entry.total_penalty);
        outcome.trace.push_back(std::move(entry));

        if (iter > 0) {
            const double prev = outcome.trace[static_cast<std::size_t>(iter - 1)].total_cost;
            const double cur = outcome.trace.back().total_cost;
            if (std::abs(cur - prev) <= options.convergence_eps * std::max(std::abs(prev), 1e-12)) {
                outcome.converged = true;
                break;
            }
        }
        if (iter + 1 >= options.max_iterations) break;

        std::vector<double> corr(slots);
        for (std::size_t p = 0; p < slots; ++p)
            corr[p] = outcome.trace.back().received[p] - outcome.trace.back().genuine[p];

        std::vector<double> agg = outcome.trace.back().genuine;
        if (!run_round(agg, corr)) {
            outcome.converged = true;
            break;
        }
    }

    outcome.converged_forecast = outcome.trace.back().genuine;
    outcome.received_forecast = outcome.trace.back().received;
    outcome.final_prices = outcome.trace.back().prices;
    outcome.iterations_used = static_cast<int>(outcome.trace.size());
    return outcome;
}

}  // namespace drsim
