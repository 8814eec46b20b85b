// Persistence: the forecast/attack/house CSV formats, JSON documents for
// cluster models and experiment configs, atomic writes and strict parsing.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "drsim/corpus.hpp"
#include "drsim/detector.hpp"
#include "drsim/isolator.hpp"

namespace drsim {

inline constexpr int kFormatVersion = 1;

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// low-level helpers
// ---------------------------------------------------------------------------

namespace io_detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& file, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, "bad number '" + s + "'");
    }
}

inline std::int64_t parse_int(const std::string& s, const std::string& file, std::size_t line) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, "bad integer '" + s + "'");
    }
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

}  // namespace io_detail

// Writes via a temp file and renames into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// forecast CSV:  day_id,label,slot_0,...,slot_{P-1}
// ---------------------------------------------------------------------------

inline std::string forecast_csv(const std::vector<DemandForecast>& forecasts, int pricing_slots) {
    std::ostringstream out;
    out << "day_id,label";
    for (int p = 0; p < pricing_slots; ++p) out << ",slot_" << p;
    out << "\n";
    for (const DemandForecast& f : forecasts) {
        if (static_cast<int>(f.size()) != pricing_slots)
            throw std::invalid_argument("forecast_csv: length mismatch");
        out << f.day_id << "," << to_string(f.label);
        for (double v : f.values) out << "," << io_detail::format_double(v);
        out << "\n";
    }
    return out.str();
}

inline std::vector<DemandForecast> parse_forecast_csv(const std::string& content,
                                                      const std::string& name) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name, 1, "empty file");
    const auto header = io_detail::split(line, ',');
    if (header.size() < 3 || header[0] != "day_id" || header[1] != "label")
        throw ParseError(name, 1, "expected header day_id,label,slot_0,...");
    const std::size_t slots = header.size() - 2;
    for (std::size_t p = 0; p < slots; ++p)
        if (header[p + 2] != "slot_" + std::to_string(p))
            throw ParseError(name, 1, "bad slot column '" + header[p + 2] + "'");

    std::vector<DemandForecast> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = io_detail::split(line, ',');
        if (fields.size() != slots + 2)
            throw ParseError(name, lineno,
                             "expected " + std::to_string(slots + 2) + " fields, got " +
                                 std::to_string(fields.size()));
        DemandForecast f;
        f.day_id = io_detail::parse_int(fields[0], name, lineno);
        try {
            f.label = forecast_label_from_string(fields[1]);
        } catch (const std::exception& e) {
            throw ParseError(name, lineno, e.what());
        }
        f.values.reserve(slots);
        for (std::size_t p = 0; p < slots; ++p)
            f.values.push_back(io_detail::parse_double(fields[p + 2], name, lineno));
        out.push_back(std::move(f));
    }
    return out;
}

// ---------------------------------------------------------------------------
// attack sidecar CSV:  day_id,kind,magnitude,slots   (slots ';'-separated)
// ---------------------------------------------------------------------------

struct AttackRow {
    std::int64_t day_id = 0;
    AttackKind kind = AttackKind::Pulse;
    double magnitude = 0.0;
    std::vector<int> slots;
};

inline std::string attack_csv(const std::vector<AttackRow>& rows) {
    std::ostringstream out;
    out << "day_id,kind,magnitude,slots\n";
    for (const AttackRow& r : rows) {
        out << r.day_id << "," << to_string(r.kind) << "," << io_detail::format_double(r.magnitude)
            << ",";
        for (std::size_t i = 0; i < r.slots.size(); ++i) {
            if (i) out << ";";
            out << r.slots[i];
        }
        out << "\n";
    }
    return out.str();
}

inline std::vector<AttackRow> parse_attack_csv(const std::string& content, const std::string& name) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name, 1, "empty file");
    if (line != "day_id,kind,magnitude,slots")
        throw ParseError(name, 1, "expected header day_id,kind,magnitude,slots");
    std::vector<AttackRow> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = io_detail::split(line, ',');
        if (fields.size() != 4) throw ParseError(name, lineno, "expected 4 fields");
        AttackRow r;
        r.day_id = io_detail::parse_int(fields[0], name, lineno);
        try {
            r.kind = attack_kind_from_string(fields[1]);
        } catch (const std::exception& e) {
            throw ParseError(name, lineno, e.what());
        }
        r.magnitude = io_detail::parse_double(fields[2], name, lineno);
        for (const std::string& s : io_detail::split(fields[3], ';'))
            if (!s.empty()) r.slots.push_back(static_cast<int>(io_detail::parse_int(s, name, lineno)));
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// house CSV
// ---------------------------------------------------------------------------

inline const char* kHouseCsvHeader =
    "day_id,house_id,appliance_id,demand_per_slot,duration,earliest_start,latest_finish,"
    "preferred_start,penalty_factor,role";

inline std::string house_csv(const Corpus& corpus) {
    std::ostringstream out;
    out << kHouseCsvHeader << "\n";
    for (const DayRecord& day : corpus.days)
        for (const House& h : day.houses)
            for (const Appliance& a : h.appliances) {
                const bool attacker =
                    h.id == day.attacker_house && a.id == day.attacker_appliance;
                out << day.day_id << "," << h.id << "," << a.id << ","
                    << io_detail::format_double(a.demand_per_slot) << "," << a.duration << ","
                    << a.earliest_start << "," << a.latest_finish << "," << a.preferred_start << ","
                    << io_detail::format_double(a.penalty_factor) << ","
                    << (attacker ? "attacker" : "normal") << "\n";
            }
    return out.str();
}

// ---------------------------------------------------------------------------
// corpus directory
// ---------------------------------------------------------------------------

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const int slots = corpus.grid.pricing_slots;

    std::vector<DemandForecast> received, genuine;
    std::vector<AttackRow> attacks;
    nlohmann::json attack_extras = nlohmann::json::array();
    for (const DayRecord& day : corpus.days) {
        received.push_back(day.received());
        genuine.push_back(day.genuine);
        if (day.attack) {
            attacks.push_back({day.day_id, day.attack->spec.kind, day.attack->spec.magnitude,
                               day.attack->planted_slots});
            attack_extras.push_back({{"day_id", day.day_id},
                                     {"seed", day.attack->spec.seed},
                                     {"persistent", day.attack->spec.persistent}});
        }
    }

    nlohmann::json meta;
    meta["format_version"] = kFormatVersion;
    meta["kind"] = "corpus";
    meta["pricing_slots"] = corpus.grid.pricing_slots;
    meta["scheduling_per_pricing"] = corpus.grid.scheduling_per_pricing;
    meta["days"] = corpus.days.size();
    meta["train_days"] = corpus.train_days;
    meta["attacked_days"] = attacks.size();
    meta["attack_extras"] = attack_extras;

    nlohmann::json attackers = nlohmann::json::array();
    for (const DayRecord& day : corpus.days)
        attackers.push_back({{"day_id", day.day_id},
                             {"house", day.attacker_house},
                             {"appliance", day.attacker_appliance}});
    meta["attackers"] = attackers;

    atomic_write(dir / "meta.json", meta.dump(2) + "\n");
    atomic_write(dir / "forecasts.csv", forecast_csv(received, slots));
    atomic_write(dir / "genuine.csv", forecast_csv(genuine, slots));
    atomic_write(dir / "attacks.csv", attack_csv(attacks));
    atomic_write(dir / "houses.csv", house_csv(corpus));
}

inline Corpus load_corpus(const std::filesystem::path& dir) {
    const std::filesystem::path meta_path = dir / "meta.json";
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(meta_path.string() + ": " + e.what());
    }
    if (!meta.contains("format_version"))
        throw ParseError(meta_path.string() + ": missing format_version");
    if (meta["format_version"].get<int>() != kFormatVersion)
        throw ParseError(meta_path.string() + ": unsupported format_version " +
                         meta["format_version"].dump());

    Corpus corpus;
    corpus.grid.pricing_slots = meta.at("pricing_slots").get<int>();
    corpus.grid.scheduling_per_pricing = meta.at("scheduling_per_pricing").get<int>();
    corpus.train_days = meta.at("train_days").get<int>();

    const auto received =
        parse_forecast_csv(read_file(dir / "forecasts.csv"), (dir / "forecasts.csv").string());

    std::vector<DemandForecast> genuine;
    if (std::filesystem::exists(dir / "genuine.csv"))
        genuine = parse_forecast_csv(read_file(dir / "genuine.csv"), (dir / "genuine.csv").string());

    std::vector<AttackRow> attacks;
    if (std::filesystem::exists(dir / "attacks.csv"))
        attacks = parse_attack_csv(read_file(dir / "attacks.csv"), (dir / "attacks.csv").string());

    corpus.days.resize(received.size());
    for (std::size_t i = 0; i < received.size(); ++i) {
        DayRecord& day = corpus.days[i];
        day.day_id = received[i].day_id;
        if (received[i].label == ForecastLabel::Attacked) {
            AttackRecord attack;
            attack.attacked = received[i];
            day.attack = std::move(attack);
        } else {
            day.genuine = received[i];
        }
    }
    auto day_by_id = [&](std::int64_t id) -> DayRecord& {
        for (DayRecord& d : corpus.days)
            if (d.day_id == id) return d;
        throw ParseError(dir.string() + ": unknown day_id " + std::to_string(id));
    };
    for (const DemandForecast& g : genuine) {
        DayRecord& day = day_by_id(g.day_id);
        day.genuine = g;
        day.genuine.label = ForecastLabel::Normal;
    }
    for (const AttackRow& row : attacks) {
        DayRecord& day = day_by_id(row.day_id);
        if (!day.attack) throw ParseError(dir.string() + ": attack row for unattacked day " +
                                          std::to_string(row.day_id));
        day.attack->spec.kind = row.kind;
        day.attack->spec.magnitude = row.magnitude;
        day.attack->spec.target_slots = row.slots;
        day.attack->planted_slots = row.slots;
    }
    if (meta.contains("attack_extras"))
        for (const auto& extra : meta["attack_extras"]) {
            DayRecord& day = day_by_id(extra.at("day_id").get<std::int64_t>());
            if (day.attack) {
                day.attack->spec.seed = extra.at("seed").get<std::uint64_t>();
                day.attack->spec.persistent = extra.at("persistent").get<bool>();
            }
        }

    if (std::filesystem::exists(dir / "houses.csv")) {
        const std::string name = (dir / "houses.csv").string();
        std::istringstream in(read_file(dir / "houses.csv"));
        std::string line;
        if (!std::getline(in, line) || line != kHouseCsvHeader)
            throw ParseError(name, 1, "bad house header");
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto f = io_detail::split(line, ',');
            if (f.size() != 10) throw ParseError(name, lineno, "expected 10 fields");
            DayRecord& day = day_by_id(io_detail::parse_int(f[0], name, lineno));
            const int house_id = static_cast<int>(io_detail::parse_int(f[1], name, lineno));
            while (static_cast<int>(day.houses.size()) <= house_id) {
                House h;
                h.id = static_cast<int>(day.houses.size());
                day.houses.push_back(h);
            }
            Appliance a;
            a.id = static_cast<int>(io_detail::parse_int(f[2], name, lineno));
            a.demand_per_slot = io_detail::parse_double(f[3], name, lineno);
            a.duration = static_cast<int>(io_detail::parse_int(f[4], name, lineno));
            a.earliest_start = static_cast<int>(io_detail::parse_int(f[5], name, lineno));
            a.latest_finish = static_cast<int>(io_detail::parse_int(f[6], name, lineno));
            a.preferred_start = static_cast<int>(io_detail::parse_int(f[7], name, lineno));
            a.penalty_factor = io_detail::parse_double(f[8], name, lineno);
            if (f[9] == "attacker") {
                day.attacker_house = house_id;
                day.attacker_appliance = a.id;
            } else if (f[9] != "normal") {
                throw ParseError(name, lineno, "bad role '" + f[9] + "'");
            }
            day.houses[static_cast<std::size_t>(house_id)].appliances.push_back(a);
        }
    }

    for (DayRecord& day : corpus.days) {
        if (day.genuine.values.empty() && day.attack)
            day.genuine = DemandForecast(day.attack->attacked.values, day.day_id,
                                         ForecastLabel::Normal);
        if (static_cast<int>(day.received().size()) != corpus.grid.pricing_slots)
            throw ParseError(dir.string() + ": forecast length does not match pricing_slots");
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// cluster model JSON
// ---------------------------------------------------------------------------

struct DetectorSettings {
    CsrConfig csr;                 // csr.threshold = calibrated CSR threshold
    double sr_threshold = 0.0;     // calibrated threshold for the SR baseline
    double percentile = 99.5;      // calibration percentile
};

inline void save_cluster_model(const ClusterModel& model, const DetectorSettings& settings,
                               const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "cluster_model";
    doc["k"] = model.k;
    doc["seed"] = model.seed;
    doc["centroids"] = model.centroids;
    doc["objective_trace"] = model.objective_trace;
    nlohmann::json db = nlohmann::json::array();
    for (const StoredForecast& f : model.database)
        db.push_back({{"day_id", f.day_id}, {"cluster", f.cluster}, {"values", f.values}});
    doc["database"] = db;
    doc["detector"] = {{"q", settings.csr.q},
                       {"threshold", settings.csr.threshold},
                       {"sr_threshold", settings.sr_threshold},
                       {"percentile", settings.percentile},
                       {"conventional_sr_order", settings.csr.conventional_sr_order}};
    atomic_write(path, doc.dump(2) + "\n");
}

inline std::pair<ClusterModel, DetectorSettings> load_cluster_model(
    const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!doc.contains("format_version")) throw ParseError(path.string() + ": missing format_version");
    if (doc["format_version"].get<int>() != kFormatVersion)
        throw ParseError(path.string() + ": unsupported format_version");
    if (doc.value("kind", "") != "cluster_model")
        throw ParseError(path.string() + ": not a cluster model document");

    ClusterModel model;
    DetectorSettings settings;
    try {
        model.k = doc.at("k").get<int>();
        model.seed = doc.at("seed").get<std::uint64_t>();
        model.centroids = doc.at("centroids").get<std::vector<std::vector<double>>>();
        model.objective_trace = doc.at("objective_trace").get<std::vector<double>>();
        for (const auto& f : doc.at("database"))
            model.database.push_back({f.at("day_id").get<std::int64_t>(),
                                      f.at("cluster").get<int>(),
                                      f.at("values").get<std::vector<double>>()});
        const auto& det = doc.at("detector");
        settings.csr.q = det.at("q").get<int>();
        settings.csr.threshold = det.at("threshold").get<double>();
        settings.csr.k = model.k;
        settings.csr.conventional_sr_order = det.at("conventional_sr_order").get<bool>();
        settings.sr_threshold = det.at("sr_threshold").get<double>();
        settings.percentile = det.at("percentile").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return {model, settings};
}

// ---------------------------------------------------------------------------
// experiment config JSON
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    SlotGrid grid;
    PriceModel price;
    GeneratorConfig generator;
    int cluster_k = 0;            // 0 = desk-scale default
    int csr_q = 3;
    double threshold_percentile = 99.5;
    bool conventional_sr_order = false;
    IsolationConfig isolation;
    DrOptions dr;
};

inline ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::string& name) {
    if (!doc.contains("format_version")) throw ParseError(name + ": missing format_version");
    if (doc["format_version"].get<int>() != kFormatVersion)
        throw ParseError(name + ": unsupported format_version");
    ExperimentConfig cfg;
    try {
        if (doc.contains("grid")) {
            cfg.grid.pricing_slots = doc["grid"].value("pricing_slots", cfg.grid.pricing_slots);
            cfg.grid.scheduling_per_pricing =
                doc["grid"].value("scheduling_per_pricing", cfg.grid.scheduling_per_pricing);
        }
        if (doc.contains("price")) {
            const auto& p = doc["price"];
            const std::string form = p.value("form", "quadratic");
            if (form == "linear") cfg.price.form = PriceModel::Form::Linear;
            else if (form == "quadratic") cfg.price.form = PriceModel::Form::Quadratic;
            else throw ParseError(name + ": bad price form '" + form + "'");
            cfg.price.base = p.value("base", cfg.price.base);
            cfg.price.slope = p.value("slope", cfg.price.slope);
            cfg.price.reference_demand = p.value("reference_demand", cfg.price.reference_demand);
        }
        if (doc.contains("generator")) {
            const auto& g = doc["generator"];
            GeneratorConfig& gen = cfg.generator;
            gen.houses = g.value("houses", gen.houses);
            gen.appliances_min = g.value("appliances_min", gen.appliances_min);
            gen.appliances_max = g.value("appliances_max", gen.appliances_max);
            gen.demand_min = g.value("demand_min", gen.demand_min);
            gen.demand_max = g.value("demand_max", gen.demand_max);
            gen.duration_min = g.value("duration_min", gen.duration_min);
            gen.duration_max = g.value("duration_max", gen.duration_max);
            gen.penalty_min = g.value("penalty_min", gen.penalty_min);
            gen.penalty_max = g.value("penalty_max", gen.penalty_max);
            gen.flex_max = g.value("flex_max", gen.flex_max);
            gen.inflexible_fraction = g.value("inflexible_fraction", gen.inflexible_fraction);
            gen.jitter_fraction = g.value("jitter_fraction", gen.jitter_fraction);
            gen.jitter_span = g.value("jitter_span", gen.jitter_span);
            gen.attacker_demand = g.value("attacker_demand", gen.attacker_demand);
            gen.attacker_duration = g.value("attacker_duration", gen.attacker_duration);
            gen.days = g.value("days", gen.days);
            gen.attacked_fraction = g.value("attacked_fraction", gen.attacked_fraction);
            gen.seed = g.value("seed", gen.seed);
            if (g.contains("magnitudes")) gen.magnitudes = g["magnitudes"].get<std::vector<double>>();
            if (g.contains("kinds")) {
                gen.kinds.clear();
                for (const auto& k : g["kinds"])
                    gen.kinds.push_back(attack_kind_from_string(k.get<std::string>()));
            }
        }
        if (doc.contains("detector")) {
            const auto& d = doc["detector"];
            cfg.cluster_k = d.value("k", cfg.cluster_k);
            cfg.csr_q = d.value("q", cfg.csr_q);
            cfg.threshold_percentile = d.value("threshold_percentile", cfg.threshold_percentile);
            cfg.conventional_sr_order = d.value("conventional_sr_order", cfg.conventional_sr_order);
        }
        if (doc.contains("isolation")) {
            const auto& i = doc["isolation"];
            cfg.isolation.max_subspace = i.value("max_subspace", cfg.isolation.max_subspace);
            cfg.isolation.beam_width = i.value("beam_width", cfg.isolation.beam_width);
            cfg.isolation.ensemble_trees = i.value("ensemble_trees", cfg.isolation.ensemble_trees);
            cfg.isolation.subsample = i.value("subsample", cfg.isolation.subsample);
            cfg.isolation.seed = i.value("seed", cfg.isolation.seed);
            cfg.isolation.lof_neighbors = i.value("lof_neighbors", cfg.isolation.lof_neighbors);
            cfg.isolation.lof_threshold = i.value("lof_threshold", cfg.isolation.lof_threshold);
        }
        if (doc.contains("dr")) {
            cfg.dr.max_iterations = doc["dr"].value("max_iterations", cfg.dr.max_iterations);
            cfg.dr.convergence_eps = doc["dr"].value("convergence_eps", cfg.dr.convergence_eps);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(name + ": " + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return parse_experiment_config(doc, path.string());
}

}  // namespace drsim
