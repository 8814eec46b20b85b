// Scenario runner: wires attack and mitigation hooks into run_dr for one
// corpus day and computes the billing-side quantities (attacker device bill
// at real-time prices, realized community cost, forecast MAPE).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drsim/corpus.hpp"
#include "drsim/detector.hpp"
#include "drsim/engine.hpp"
#include "drsim/io.hpp"
#include "drsim/isolator.hpp"
#include "drsim/mitigator.hpp"

namespace drsim {

enum class Scenario { Clean, Attack, Mitigated };

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::Clean: return "clean";
        case Scenario::Attack: return "attack";
        default: return "mitigated";
    }
}

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "clean") return Scenario::Clean;
    if (s == "attack") return Scenario::Attack;
    if (s == "mitigated") return Scenario::Mitigated;
    throw std::invalid_argument("unknown scenario: " + s);
}

struct DayOutcome {
    Scenario scenario = Scenario::Clean;
    int method = 0;                      // mitigation method, 0 = none
    std::int64_t day_id = 0;
    double attacker_bill = 0.0;          // realized demand x real-time prices
    double community_cost = 0.0;         // realized bill + total penalty
    std::vector<double> realized;        // converged genuine aggregate
    std::vector<double> priced_forecast; // converged received (rectified) forecast
    bool converged = false;
    int iterations = 0;
    bool mitigation_triggered = false;
    std::vector<int> isolated_slots;
    std::vector<std::string> diagnostics;
};

inline IsolationVerdict run_isolator(IsolationMethod method, const std::vector<double>& forecast,
                                     const DetectionReport& report, const ClusterModel& model,
                                     const DetectorSettings& settings, const IsolationConfig& cfg) {
    switch (method) {
        case IsolationMethod::IsolationPath: return beam_search_isolate(forecast, model, cfg);
        case IsolationMethod::Lof: return lof_isolate(forecast, model, cfg);
        default: return csr_isolate(report, settings.csr.threshold, cfg.max_subspace);
    }
}

struct ScenarioInputs {
    SlotGrid grid;
    PriceModel price;
    DrOptions dr;
    const ClusterModel* model = nullptr;         // required for Mitigated
    DetectorSettings detector;
    IsolationConfig isolation;
    IsolationMethod isolator = IsolationMethod::IsolationPath;
};

// Billing is two-stage: day-ahead prices drive the scheduling inside run_dr,
// real-time prices are recomputed on what was actually consumed (injected
// demand is never consumed, so attacks depress the attacked slot's realized
// price once flexible neighbours have fled).
inline DayOutcome run_day(const DayRecord& day, Scenario scenario, int method_number,
                          const ScenarioInputs& in) {
    if (scenario != Scenario::Clean && !day.attack)
        throw std::invalid_argument("day " + std::to_string(day.day_id) + " has no attack spec");

    std::optional<AttackHook> attack_hook;
    std::optional<MitigationHook> mitigation_hook;
    std::vector<RoundHook*> hooks;
    if (scenario != Scenario::Clean) {
        attack_hook.emplace(day.attack->spec, controllable_daily_demand(day.houses));
        hooks.push_back(&*attack_hook);
    }
    if (scenario == Scenario::Mitigated) {
        if (!in.model || !in.model->fitted())
            throw std::invalid_argument("mitigated scenario needs a fitted cluster model");
        const ClusterModel& model = *in.model;
        const DetectorSettings& settings = in.detector;
        const IsolationConfig& iso = in.isolation;
        const IsolationMethod isolator = in.isolator;
        mitigation_hook.emplace(
            mitigation_method(method_number), model, settings.csr,
            [&model, &settings, &iso, isolator](const std::vector<double>& forecast,
                                                const DetectionReport& report) {
                return run_isolator(isolator, forecast, report, model, settings, iso);
            });
        hooks.push_back(&*mitigation_hook);
    }

    const DrOutcome dr = run_dr(day.houses, in.grid, in.price, in.dr, hooks);

    DayOutcome out;
    out.scenario = scenario;
    out.method = scenario == Scenario::Mitigated ? method_number : 0;
    out.day_id = day.day_id;
    out.realized = dr.converged_forecast;
    out.priced_forecast = dr.received_forecast;
    out.converged = dr.converged;
    out.iterations = dr.iterations_used;

    const PriceSignal rt_prices = price_signal(out.realized, in.price, in.grid);
    const House& attacker_house = day.houses[static_cast<std::size_t>(day.attacker_house)];
    const Schedule& attacker_schedule =
        dr.schedules[static_cast<std::size_t>(day.attacker_house)];
    const Appliance* attacker = nullptr;
    for (const Appliance& a : attacker_house.appliances)
        if (a.id == day.attacker_appliance) attacker = &a;
    if (!attacker) throw std::invalid_argument("day has no designated attacker appliance");
    const Footprint fp =
        pricing_footprint(*attacker, attacker_schedule.start_of(attacker->id), in.grid);
    for (std::size_t i = 0; i < fp.energy.size(); ++i)
        out.attacker_bill +=
            fp.energy[i] * rt_prices.values[static_cast<std::size_t>(fp.first_slot) + i];

    out.community_cost = total_cost(total_bill(out.realized, rt_prices),
                                    total_penalty(day.houses, dr.schedules));

    if (mitigation_hook) {
        out.mitigation_triggered = mitigation_hook->triggered();
        if (mitigation_hook->isolation())
            out.isolated_slots = mitigation_hook->isolation()->attacked_slots;
        out.diagnostics = mitigation_hook->diagnostics();
    }
    return out;
}

}  // namespace drsim
