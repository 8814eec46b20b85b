// Synthetic community and corpus generation: per-day household draws around
// shared diurnal templates, iteration-0 aggregate forecasts, and planted
// false-demand injections on test days.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "drsim/attacks.hpp"
#include "drsim/domain.hpp"
#include "drsim/engine.hpp"

namespace drsim {

struct GeneratorConfig {
    int houses = 40;
    int appliances_min = 3;
    int appliances_max = 5;
    double demand_min = 0.4;          // kWh per scheduling slot
    double demand_max = 1.6;
    int duration_min = 2;             // scheduling slots
    int duration_max = 8;
    double penalty_min = 0.8;         // per scheduling slot of displacement
    double penalty_max = 2.5;
    int flex_max = 12;                // scheduling slots of window slack each side
    double inflexible_fraction = 0.3;
    double jitter_fraction = 0.25;    // appliances re-jittered around their sampled start
    int jitter_span = 4;              // scheduling slots
    double attacker_demand = 2.0;
    int attacker_duration = 0;        // scheduling slots; 0 = one pricing slot
    int days = 200;
    double attacked_fraction = 0.05;  // of all days; attacks land in the test split
    std::vector<double> magnitudes = {0.001, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035,
                                      0.04,  0.045, 0.05, 0.06, 0.07,  0.08,  0.09,
                                      0.10,  0.125, 0.15, 0.20, 0.25};
    std::vector<AttackKind> kinds = {AttackKind::Pulse, AttackKind::Scaling,
                                     AttackKind::Ramping, AttackKind::Random};
    std::uint64_t seed = 1;

    void validate() const {
        if (houses < 1) throw std::invalid_argument("GeneratorConfig: houses >= 1");
        if (appliances_min < 1 || appliances_max < appliances_min)
            throw std::invalid_argument("GeneratorConfig: bad appliance count range");
        if (!(demand_min > 0.0) || demand_max < demand_min)
            throw std::invalid_argument("GeneratorConfig: bad demand range");
        if (duration_min < 1 || duration_max < duration_min)
            throw std::invalid_argument("GeneratorConfig: bad duration range");
        if (penalty_min < 0.0 || penalty_max < penalty_min)
            throw std::invalid_argument("GeneratorConfig: bad penalty range");
        if (attacked_fraction < 0.0 || attacked_fraction > 1.0)
            throw std::invalid_argument("GeneratorConfig: attacked_fraction in [0,1]");
        if (days < 3) throw std::invalid_argument("GeneratorConfig: days >= 3");
        for (double m : magnitudes)
            if (!(m > 0.0)) throw std::invalid_argument("GeneratorConfig: magnitudes > 0");
        if (attacked_fraction > 0.0 && (magnitudes.empty() || kinds.empty()))
            throw std::invalid_argument("GeneratorConfig: attacks need magnitudes and kinds");
    }
};

struct AttackRecord {
    AttackSpec spec;
    DemandForecast attacked;      // label = Attacked
    std::vector<int> planted_slots;
};

struct DayRecord {
    std::int64_t day_id = 0;
    std::vector<House> houses;
    int attacker_house = 0;
    int attacker_appliance = -1;
    DemandForecast genuine;       // iteration-0 aggregate, label = Normal
    std::optional<AttackRecord> attack;

    // what the utility receives: the attacked forecast when one was planted
    const DemandForecast& received() const { return attack ? attack->attacked : genuine; }
};

struct Corpus {
    SlotGrid grid;
    int train_days = 0;   // first two thirds; attack-free by construction
    std::vector<DayRecord> days;

    bool is_train(std::int64_t day_id) const { return day_id < train_days; }
};

namespace gen_detail {

inline std::uint64_t day_seed(std::uint64_t seed, std::int64_t day, std::uint64_t salt) {
    std::uint64_t h = seed;
    h = (h ^ static_cast<std::uint64_t>(day)) * 0x9e3779b97f4a7c15ULL;
    h = (h ^ salt) * 0xbf58476d1ce4e5b9ULL;
    return h ^ (h >> 31);
}

// Latent day types: weekday/weekend pattern x mild/hot amplitude. Discrete
// types give the cluster module genuine structure to find.
struct DayShape {
    double morning_slot;
    double morning_sigma;
    double morning_weight;
    double evening_slot;
    double evening_sigma;
    double evening_weight;
    double base;
    double amplitude;
};

// Peak-to-base ratios stay modest (about 2x) so the preferred-start pattern
// is already close to the clean DR equilibrium; attacks displace demand via
// the injected price shock, not a steep genuine peak.
inline DayShape day_shape(std::int64_t day, bool hot) {
    const bool weekend = (day % 7) >= 5;
    DayShape s;
    if (weekend) {
        s = {20.0, 5.0, 0.75, 38.0, 5.0, 0.7, 1.05, 1.0};
    } else {
        s = {15.0, 3.0, 0.5, 37.0, 4.0, 0.9, 1.0, 1.0};
    }
    if (hot) s.amplitude = 1.15;
    return s;
}

inline std::vector<double> slot_weights(const DayShape& s, int pricing_slots) {
    std::vector<double> w(static_cast<std::size_t>(pricing_slots));
    for (int p = 0; p < pricing_slots; ++p) {
        const double m = s.morning_weight *
                         std::exp(-0.5 * std::pow((p - s.morning_slot) / s.morning_sigma, 2.0));
        const double e = s.evening_weight *
                         std::exp(-0.5 * std::pow((p - s.evening_slot) / s.evening_sigma, 2.0));
        w[static_cast<std::size_t>(p)] = s.amplitude * (s.base + m + e);
    }
    return w;
}

}  // namespace gen_detail

namespace gen_detail {

// One persistent community routine per latent day type; day-to-day variation
// comes from re-jittering a fraction of its appliances.
inline std::vector<House> base_community(const GeneratorConfig& cfg, const SlotGrid& grid,
                                         const DayShape& shape, bool weekend_type,
                                         std::uint64_t type_seed) {
    std::mt19937_64 rng(type_seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int day_slots = grid.day_slots();
    const std::vector<double> weights = slot_weights(shape, grid.pricing_slots);
    std::discrete_distribution<int> slot_dist(weights.begin(), weights.end());
    std::uniform_int_distribution<int> count_dist(cfg.appliances_min, cfg.appliances_max);
    std::uniform_real_distribution<double> demand_dist(cfg.demand_min, cfg.demand_max);
    std::uniform_int_distribution<int> duration_dist(cfg.duration_min, cfg.duration_max);
    std::uniform_real_distribution<double> penalty_dist(cfg.penalty_min, cfg.penalty_max);
    std::uniform_int_distribution<int> flex_dist(0, cfg.flex_max);
    std::uniform_int_distribution<int> sub_slot(0, grid.scheduling_per_pricing - 1);

    std::vector<House> houses;
    houses.reserve(static_cast<std::size_t>(cfg.houses));
    for (int h = 0; h < cfg.houses; ++h) {
        House house;
        house.id = h;
        const int count = count_dist(rng);
        for (int a = 0; a < count; ++a) {
            Appliance appl;
            appl.id = a;
            appl.demand_per_slot = demand_dist(rng);
            appl.duration = duration_dist(rng);
            const int preferred =
                std::clamp(slot_dist(rng) * grid.scheduling_per_pricing + sub_slot(rng), 0,
                           day_slots - appl.duration);
            appl.preferred_start = preferred;
            if (uni(rng) < cfg.inflexible_fraction) {
                appl.earliest_start = preferred;
                appl.latest_finish = preferred + appl.duration - 1;
            } else {
                appl.earliest_start = std::max(0, preferred - flex_dist(rng));
                appl.latest_finish =
                    std::min(day_slots - 1, preferred + appl.duration - 1 + flex_dist(rng));
            }
            appl.penalty_factor = penalty_dist(rng);
            house.appliances.push_back(appl);
        }
        houses.push_back(std::move(house));
    }

    // The attacker's device sits on the type's peak pricing slot with no
    // flexibility (weekday evening, weekend morning).
    const int peak = static_cast<int>(weekend_type ? shape.morning_slot : shape.evening_slot);
    const int duration =
        cfg.attacker_duration > 0 ? cfg.attacker_duration : grid.scheduling_per_pricing;
    Appliance attacker;
    attacker.id = static_cast<int>(houses.front().appliances.size());
    attacker.demand_per_slot = cfg.attacker_demand;
    attacker.duration = duration;
    attacker.preferred_start = std::min(peak * grid.scheduling_per_pricing, day_slots - duration);
    attacker.earliest_start = attacker.preferred_start;
    attacker.latest_finish = attacker.preferred_start + duration - 1;
    attacker.penalty_factor = 0.0;
    houses.front().appliances.push_back(attacker);
    return houses;
}

// Shift the preferred start, dragging the flexibility window along.
inline void shift_preferred(Appliance& a, int delta, int day_slots) {
    const int flex_before = a.preferred_start - a.earliest_start;
    const int flex_after = a.latest_finish - (a.preferred_start + a.duration - 1);
    a.preferred_start = std::clamp(a.preferred_start + delta, 0, day_slots - a.duration);
    a.earliest_start = std::max(0, a.preferred_start - flex_before);
    a.latest_finish = std::min(day_slots - 1, a.preferred_start + a.duration - 1 + flex_after);
}

}  // namespace gen_detail

// Deterministic for a fixed config: every day derives its own sub-seed, the
// attacked-day set is an exact count sampled from the test split.
inline Corpus generate(const GeneratorConfig& cfg, const SlotGrid& grid = {}) {
    cfg.validate();
    grid.validate();

    Corpus corpus;
    corpus.grid = grid;
    corpus.train_days = cfg.days * 2 / 3;

    const int day_slots = grid.day_slots();

    // pick the attacked days: exact count, test split only
    const int attacked_count = static_cast<int>(std::llround(cfg.attacked_fraction * cfg.days));
    const int test_days = cfg.days - corpus.train_days;
    if (attacked_count > test_days)
        throw std::invalid_argument("generate: attacked_fraction leaves no room in the test split");
    std::vector<int> test_ids(static_cast<std::size_t>(test_days));
    for (int i = 0; i < test_days; ++i) test_ids[static_cast<std::size_t>(i)] = corpus.train_days + i;
    std::mt19937_64 pick_rng(gen_detail::day_seed(cfg.seed, -1, 0xa77ac4ULL));
    for (int i = 0; i < attacked_count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                        test_ids.size() - 1);
        std::swap(test_ids[static_cast<std::size_t>(i)], test_ids[pick(pick_rng)]);
    }
    std::vector<bool> is_attacked(static_cast<std::size_t>(cfg.days), false);
    std::vector<int> attacked_days(test_ids.begin(), test_ids.begin() + attacked_count);
    std::sort(attacked_days.begin(), attacked_days.end());
    for (int d : attacked_days) is_attacked[static_cast<std::size_t>(d)] = true;

    // persistent weekday/weekend routines; hot days scale their demand
    const std::vector<House> weekday_base =
        gen_detail::base_community(cfg, grid, gen_detail::day_shape(0, false), false,
                                   gen_detail::day_seed(cfg.seed, -2, 0xbaedULL));
    const std::vector<House> weekend_base =
        gen_detail::base_community(cfg, grid, gen_detail::day_shape(5, false), true,
                                   gen_detail::day_seed(cfg.seed, -3, 0xbaedULL));

    corpus.days.reserve(static_cast<std::size_t>(cfg.days));
    int attack_serial = 0;
    for (int day = 0; day < cfg.days; ++day) {
        std::mt19937_64 rng(gen_detail::day_seed(cfg.seed, day, 0xd45ULL));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::uniform_int_distribution<int> jitter_dist(-cfg.jitter_span, cfg.jitter_span);

        const bool weekend = (day % 7) >= 5;
        const bool hot = uni(rng) < 0.3;

        DayRecord record;
        record.day_id = day;
        record.houses = weekend ? weekend_base : weekday_base;
        if (hot)
            for (House& house : record.houses)
                for (Appliance& a : house.appliances) a.demand_per_slot *= 1.15;

        // per-day routine churn: a random fraction of appliances shifts
        for (House& house : record.houses)
            for (Appliance& a : house.appliances) {
                const bool is_attacker_device =
                    house.id == 0 && a.id == static_cast<int>(house.appliances.size()) - 1;
                if (is_attacker_device) continue;
                if (uni(rng) < cfg.jitter_fraction)
                    gen_detail::shift_preferred(a, jitter_dist(rng), day_slots);
            }

        record.attacker_house = 0;
        record.attacker_appliance =
            static_cast<int>(record.houses.front().appliances.size()) - 1;

        // iteration-0 aggregate of preferred-start schedules
        std::vector<double> genuine(static_cast<std::size_t>(grid.pricing_slots), 0.0);
        for (const House& house : record.houses)
            for (const Appliance& a : house.appliances) {
                const Footprint fp = pricing_footprint(a, a.preferred_start, grid);
                for (std::size_t i = 0; i < fp.energy.size(); ++i)
                    genuine[static_cast<std::size_t>(fp.first_slot) + i] += fp.energy[i];
            }
        record.genuine = DemandForecast(genuine, day, ForecastLabel::Normal);

        if (is_attacked[static_cast<std::size_t>(day)]) {
            const Appliance& attacker =
                record.houses[static_cast<std::size_t>(record.attacker_house)]
                    .appliances.back();
            const Footprint fp = pricing_footprint(attacker, attacker.preferred_start, grid);
            AttackSpec spec;
            spec.kind = cfg.kinds[static_cast<std::size_t>(attack_serial) % cfg.kinds.size()];
            spec.magnitude =
                cfg.magnitudes[static_cast<std::size_t>(attack_serial) % cfg.magnitudes.size()];
            for (std::size_t i = 0; i < fp.energy.size(); ++i)
                spec.target_slots.push_back(fp.first_slot + static_cast<int>(i));
            spec.seed = gen_detail::day_seed(cfg.seed, day, 0xfd1aULL);
            spec.persistent = true;
            ++attack_serial;

            const ForgeResult forged =
                forge(genuine, spec, controllable_daily_demand(record.houses));
            AttackRecord attack;
            attack.spec = spec;
            attack.attacked = DemandForecast(forged.attacked, day, ForecastLabel::Attacked);
            attack.planted_slots = spec.target_slots;
            record.attack = std::move(attack);
        }

        corpus.days.push_back(std::move(record));
    }
    return corpus;
}

}  // namespace drsim
