// Core value types shared by every module: the slot grid, appliances,
// houses, schedules, demand forecasts and price signals, plus validation.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace drsim {

// A day is split into P pricing slots (default 48 half-hours), each pricing
// slot into m scheduling slots. Appliances start on scheduling slots; prices,
// forecasts, attacks and corrections live at pricing-slot resolution.
struct SlotGrid {
    int pricing_slots = 48;            // P
    int scheduling_per_pricing = 2;    // m, > 1

    int day_slots() const { return pricing_slots * scheduling_per_pricing; }  // D
    int pricing_slot_of(int scheduling_slot) const {
        return scheduling_slot / scheduling_per_pricing;
    }

    void validate() const {
        if (pricing_slots < 2) throw std::invalid_argument("SlotGrid: pricing_slots must be >= 2");
        if (scheduling_per_pricing < 2)
            throw std::invalid_argument("SlotGrid: scheduling_per_pricing must be > 1");
    }
};

struct Appliance {
    int id = 0;
    double demand_per_slot = 0.0;   // kWh drawn in each occupied scheduling slot, > 0
    int duration = 1;               // scheduling slots, >= 1, contiguous run
    int earliest_start = 0;
    int latest_finish = 0;          // inclusive scheduling-slot index, < D
    int preferred_start = 0;
    double penalty_factor = 0.0;    // cost per scheduling slot of displacement, >= 0

    int latest_start() const { return latest_finish - duration + 1; }
    bool window_contains(int start) const {
        return start >= earliest_start && start <= latest_start();
    }
};

struct House {
    int id = 0;
    std::vector<Appliance> appliances;
};

// Chosen start per appliance id, one Schedule per house.
struct Schedule {
    std::map<int, int> starts;

    int start_of(int appliance_id) const {
        auto it = starts.find(appliance_id);
        if (it == starts.end())
            throw std::out_of_range("Schedule: no start for appliance " + std::to_string(appliance_id));
        return it->second;
    }
};

enum class ForecastLabel { Normal, Attacked, Unknown };

inline const char* to_string(ForecastLabel label) {
    switch (label) {
        case ForecastLabel::Normal: return "normal";
        case ForecastLabel::Attacked: return "attacked";
        default: return "unknown";
    }
}

inline ForecastLabel forecast_label_from_string(const std::string& s) {
    if (s == "normal") return ForecastLabel::Normal;
    if (s == "attacked") return ForecastLabel::Attacked;
    if (s == "unknown") return ForecastLabel::Unknown;
    throw std::invalid_argument("unknown forecast label: " + s);
}

// Aggregated demand per pricing slot. All forecasts in one experiment share
// the same length; values are energies and never negative.
struct DemandForecast {
    std::vector<double> values;
    std::int64_t day_id = 0;
    ForecastLabel label = ForecastLabel::Unknown;

    DemandForecast() = default;
    DemandForecast(std::vector<double> v, std::int64_t day, ForecastLabel lab)
        : values(std::move(v)), day_id(day), label(lab) {
        for (double x : values)
            if (x < 0.0) throw std::invalid_argument("DemandForecast: negative value");
    }

    std::size_t size() const { return values.size(); }
};

// Unit price per pricing slot, strictly positive.
struct PriceSignal {
    std::vector<double> values;
};

// One violation per broken appliance invariant; violations are data, not errors.
struct Violation {
    int house_id = 0;
    int appliance_id = 0;
    std::string message;
};

inline std::vector<Violation> validate_house(const House& house, const SlotGrid& grid) {
    std::vector<Violation> out;
    const int day = grid.day_slots();
    std::map<int, int> seen;
    for (const Appliance& a : house.appliances) {
        auto fail = [&](const std::string& msg) {
            out.push_back({house.id, a.id, msg});
        };
        if (++seen[a.id] == 2) fail("duplicate appliance id within house");
        if (!(a.demand_per_slot > 0.0)) fail("demand_per_slot must be > 0");
        if (a.duration < 1) fail("duration must be >= 1");
        if (a.earliest_start < 0) fail("earliest_start before start of day");
        if (a.latest_finish >= day) fail("latest_finish beyond end of day");
        if (a.earliest_start > a.preferred_start) fail("preferred_start before earliest_start");
        if (a.preferred_start + a.duration - 1 > a.latest_finish)
            fail("preferred run overruns latest_finish");
        if (a.latest_finish - a.earliest_start + 1 < a.duration)
            fail("feasible window smaller than duration");
        if (a.penalty_factor < 0.0) fail("penalty_factor must be >= 0");
    }
    return out;
}

inline void require_valid(const House& house, const SlotGrid& grid) {
    auto v = validate_house(house, grid);
    if (!v.empty())
        throw std::invalid_argument("house " + std::to_string(house.id) + " invalid: " +
                                    v.front().message + " (appliance " +
                                    std::to_string(v.front().appliance_id) + ")");
}

}  // namespace drsim
