// Command implementations behind the CLI: corpus generation, cluster
// training, detection / isolation / simulation reports and the evaluation
// join. Every command is deterministic for a fixed config and seed.
#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "drsim/io.hpp"
#include "drsim/pipeline.hpp"

namespace drsim {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

namespace cmd_detail {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string join_slots(const std::vector<int>& slots) {
    std::ostringstream out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i) out << ";";
        out << slots[i];
    }
    return out.str();
}

inline nlohmann::json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

inline nlohmann::json experiment_config_json(const ExperimentConfig& cfg) {
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["grid"] = {{"pricing_slots", cfg.grid.pricing_slots},
                   {"scheduling_per_pricing", cfg.grid.scheduling_per_pricing}};
    doc["price"] = {{"form", cfg.price.form == PriceModel::Form::Linear ? "linear" : "quadratic"},
                    {"base", cfg.price.base},
                    {"slope", cfg.price.slope},
                    {"reference_demand", cfg.price.reference_demand}};
    nlohmann::json kinds = nlohmann::json::array();
    for (AttackKind k : cfg.generator.kinds) kinds.push_back(to_string(k));
    doc["generator"] = {{"houses", cfg.generator.houses},
                        {"appliances_min", cfg.generator.appliances_min},
                        {"appliances_max", cfg.generator.appliances_max},
                        {"demand_min", cfg.generator.demand_min},
                        {"demand_max", cfg.generator.demand_max},
                        {"duration_min", cfg.generator.duration_min},
                        {"duration_max", cfg.generator.duration_max},
                        {"penalty_min", cfg.generator.penalty_min},
                        {"penalty_max", cfg.generator.penalty_max},
                        {"flex_max", cfg.generator.flex_max},
                        {"inflexible_fraction", cfg.generator.inflexible_fraction},
                        {"jitter_fraction", cfg.generator.jitter_fraction},
                        {"jitter_span", cfg.generator.jitter_span},
                        {"attacker_demand", cfg.generator.attacker_demand},
                        {"attacker_duration", cfg.generator.attacker_duration},
                        {"days", cfg.generator.days},
                        {"attacked_fraction", cfg.generator.attacked_fraction},
                        {"magnitudes", cfg.generator.magnitudes},
                        {"kinds", kinds},
                        {"seed", cfg.generator.seed}};
    doc["detector"] = {{"k", cfg.cluster_k},
                       {"q", cfg.csr_q},
                       {"threshold_percentile", cfg.threshold_percentile},
                       {"conventional_sr_order", cfg.conventional_sr_order}};
    doc["isolation"] = {{"max_subspace", cfg.isolation.max_subspace},
                        {"beam_width", cfg.isolation.beam_width},
                        {"ensemble_trees", cfg.isolation.ensemble_trees},
                        {"subsample", cfg.isolation.subsample},
                        {"seed", cfg.isolation.seed},
                        {"lof_neighbors", cfg.isolation.lof_neighbors},
                        {"lof_threshold", cfg.isolation.lof_threshold}};
    doc["dr"] = {{"max_iterations", cfg.dr.max_iterations},
                 {"convergence_eps", cfg.dr.convergence_eps}};
    return doc;
}

inline ExperimentConfig corpus_config(const fs::path& corpus_dir) {
    const fs::path cfg_path = corpus_dir / "config.json";
    if (fs::exists(cfg_path)) return load_experiment_config(cfg_path);
    return {};
}

struct TestDay {
    const DayRecord* day = nullptr;
    bool attacked = false;
    double magnitude = 0.0;
};

inline std::vector<TestDay> test_split(const Corpus& corpus) {
    std::vector<TestDay> out;
    for (const DayRecord& day : corpus.days) {
        if (corpus.is_train(day.day_id)) continue;
        TestDay t;
        t.day = &day;
        t.attacked = day.attack.has_value();
        t.magnitude = day.attack ? day.attack->spec.magnitude : 0.0;
        out.push_back(t);
    }
    return out;
}

}  // namespace cmd_detail

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions {
    std::optional<fs::path> config;
    fs::path out;
    std::optional<std::uint64_t> seed;
};

inline void cmd_generate(const GenerateOptions& opt, std::ostream& log = std::cout) {
    ExperimentConfig cfg;
    if (opt.config) cfg = load_experiment_config(*opt.config);
    if (opt.seed) cfg.generator.seed = *opt.seed;

    const Corpus corpus = generate(cfg.generator, cfg.grid);
    fs::create_directories(opt.out);
    atomic_write(opt.out / "config.json", cmd_detail::experiment_config_json(cfg).dump(2) + "\n");
    save_corpus(corpus, opt.out);

    std::map<double, int> histogram;
    int attacked = 0;
    for (const DayRecord& day : corpus.days)
        if (day.attack) {
            ++attacked;
            ++histogram[day.attack->spec.magnitude];
        }
    log << "corpus: " << corpus.days.size() << " days (" << corpus.train_days << " train, "
        << corpus.days.size() - static_cast<std::size_t>(corpus.train_days) << " test), " << attacked
        << " attacked\n";
    log << "magnitude histogram:\n";
    for (const auto& [mag, count] : histogram)
        log << "  " << mag * 100.0 << "% -> " << count << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
    fs::path corpus;
    fs::path out;          // model file path
    int k = 0;             // 0 = config value or desk-scale default
};

inline void cmd_train(const TrainOptions& opt, std::ostream& log = std::cout) {
    const Corpus corpus = load_corpus(opt.corpus);
    const ExperimentConfig cfg = cmd_detail::corpus_config(opt.corpus);

    std::vector<DemandForecast> train;
    for (const DayRecord& day : corpus.days)
        if (corpus.is_train(day.day_id) && !day.attack) train.push_back(day.genuine);
    if (train.empty()) throw std::invalid_argument("cmd_train: no attack-free train forecasts");

    int k = opt.k > 0 ? opt.k : cfg.cluster_k;
    if (k <= 0) k = desk_scale_k(train.size());

    const ClusterModel model = fit_clusters(train, k, cfg.generator.seed);

    DetectorSettings settings;
    settings.csr.q = cfg.csr_q;
    settings.csr.k = k;
    settings.csr.conventional_sr_order = cfg.conventional_sr_order;
    settings.percentile = cfg.threshold_percentile;
    settings.csr.threshold =
        calibrate_threshold(train, model, settings.csr, settings.percentile, true);
    settings.sr_threshold =
        calibrate_threshold(train, model, settings.csr, settings.percentile, false);

    fs::create_directories(opt.out.parent_path().empty() ? fs::path(".") : opt.out.parent_path());
    save_cluster_model(model, settings, opt.out);

    log << "trained k=" << k << " on " << train.size() << " attack-free forecasts\n";
    log << "lloyd objective:";
    for (double o : model.objective_trace) log << " " << o;
    log << "\ncsr threshold=" << settings.csr.threshold
        << " sr threshold=" << settings.sr_threshold << " (p" << settings.percentile << ")\n";
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectOptions {
    fs::path corpus;
    fs::path model;
    std::string classifier = "csr";   // csr | sr
    fs::path out;
};

inline void cmd_detect(const DetectOptions& opt, std::ostream& log = std::cout) {
    if (opt.classifier != "csr" && opt.classifier != "sr")
        throw std::invalid_argument("cmd_detect: classifier must be csr or sr");
    const Corpus corpus = load_corpus(opt.corpus);
    auto [model, settings] = load_cluster_model(opt.model);
    const bool use_csr = opt.classifier == "csr";
    CsrConfig csr_cfg = settings.csr;
    if (!use_csr) csr_cfg.threshold = settings.sr_threshold;

    std::ostringstream report;
    report << "day_id,truth,verdict,peak_slot,peak_value,nearest_cluster,magnitude\n";
    std::vector<Verdict> verdicts;
    std::vector<bool> truth;
    std::map<double, RecallBucket> buckets;
    for (const cmd_detail::TestDay& t : cmd_detail::test_split(corpus)) {
        const DetectionReport r = use_csr ? csr_classify(t.day->received().values, model, csr_cfg)
                                          : sr_classify(t.day->received().values, csr_cfg);
        verdicts.push_back(r.verdict);
        truth.push_back(t.attacked);
        report << t.day->day_id << "," << (t.attacked ? "attacked" : "normal") << ","
               << (r.verdict == Verdict::Attacked ? "attacked" : "normal") << ","
               << r.saliency.peak_index << "," << io_detail::format_double(r.saliency.peak_value)
               << "," << r.nearest_cluster << "," << io_detail::format_double(t.magnitude) << "\n";
        if (t.attacked) {
            RecallBucket& b = buckets[t.magnitude];
            b.magnitude = t.magnitude;
            ++b.attacked;
            if (r.verdict == Verdict::Attacked) ++b.detected;
        }
    }
    if (verdicts.empty()) throw std::invalid_argument("cmd_detect: empty test split");
    const ClassificationMetrics metrics = classification_metrics(verdicts, truth);

    nlohmann::json summary;
    summary["format_version"] = kFormatVersion;
    summary["kind"] = "detect_summary";
    summary["classifier"] = opt.classifier;
    summary["threshold"] = csr_cfg.threshold;
    summary["counts"] = {{"tp", metrics.tp}, {"fp", metrics.fp}, {"tn", metrics.tn}, {"fn", metrics.fn}};
    summary["accuracy"] = metrics.accuracy;
    summary["precision"] = cmd_detail::opt_json(metrics.precision);
    summary["recall"] = cmd_detail::opt_json(metrics.recall);
    summary["f1"] = cmd_detail::opt_json(metrics.f1);
    summary["fpr"] = cmd_detail::opt_json(metrics.fpr);
    nlohmann::json per_mag = nlohmann::json::array();
    for (const auto& [mag, b] : buckets)
        per_mag.push_back({{"magnitude", mag},
                           {"attacked", b.attacked},
                           {"detected", b.detected},
                           {"recall", b.recall()}});
    summary["per_magnitude"] = per_mag;

    fs::create_directories(opt.out);
    atomic_write(opt.out / "detect_report.csv", report.str());
    atomic_write(opt.out / "detect_summary.json", summary.dump(2) + "\n");

    log << opt.classifier << ": accuracy=" << metrics.accuracy
        << " recall=" << (metrics.recall ? std::to_string(*metrics.recall) : "n/a")
        << " fpr=" << (metrics.fpr ? std::to_string(*metrics.fpr) : "n/a") << " (tp=" << metrics.tp
        << " fp=" << metrics.fp << " tn=" << metrics.tn << " fn=" << metrics.fn << ")\n";
}

// ---------------------------------------------------------------------------
// isolate
// ---------------------------------------------------------------------------

struct IsolateOptions {
    fs::path corpus;
    fs::path model;
    std::string isolator = "beam";   // beam | lof | csr
    fs::path out;
};

inline IsolationMethod isolation_method_from_string(const std::string& s) {
    if (s == "beam") return IsolationMethod::IsolationPath;
    if (s == "lof") return IsolationMethod::Lof;
    if (s == "csr") return IsolationMethod::Csr;
    throw std::invalid_argument("unknown isolator: " + s);
}

inline void cmd_isolate(const IsolateOptions& opt, std::ostream& log = std::cout) {
    const IsolationMethod method = isolation_method_from_string(opt.isolator);
    const Corpus corpus = load_corpus(opt.corpus);
    const ExperimentConfig cfg = cmd_detail::corpus_config(opt.corpus);
    auto [model, settings] = load_cluster_model(opt.model);

    std::ostringstream report;
    report << "day_id,kind,magnitude,planted,verdict,exact_match\n";
    std::vector<std::vector<int>> verdict_slots, planted_slots;
    std::vector<double> magnitudes;
    for (const cmd_detail::TestDay& t : cmd_detail::test_split(corpus)) {
        if (!t.attacked) continue;
        const DayRecord& day = *t.day;
        std::vector<int> slots;
        if (method == IsolationMethod::Csr) {
            const DetectionReport r = csr_classify(day.received().values, model, settings.csr);
            if (r.verdict == Verdict::Attacked)
                slots = csr_isolate(r, settings.csr.threshold, cfg.isolation.max_subspace)
                            .attacked_slots;
        } else if (method == IsolationMethod::Lof) {
            slots = lof_isolate(day.received().values, model, cfg.isolation).attacked_slots;
        } else {
            slots = beam_search_isolate(day.received().values, model, cfg.isolation).attacked_slots;
        }
        const bool exact = slots == day.attack->planted_slots;
        report << day.day_id << "," << to_string(day.attack->spec.kind) << ","
               << io_detail::format_double(t.magnitude) << ","
               << cmd_detail::join_slots(day.attack->planted_slots) << ","
               << cmd_detail::join_slots(slots) << "," << (exact ? 1 : 0) << "\n";
        verdict_slots.push_back(slots);
        planted_slots.push_back(day.attack->planted_slots);
        magnitudes.push_back(t.magnitude);
    }

    nlohmann::json summary;
    summary["format_version"] = kFormatVersion;
    summary["kind"] = "isolate_summary";
    summary["isolator"] = opt.isolator;
    int total_attacked = 0, total_detected = 0;
    nlohmann::json per_mag = nlohmann::json::array();
    if (!verdict_slots.empty()) {
        for (const RecallBucket& b : isolation_recall(verdict_slots, planted_slots, magnitudes)) {
            per_mag.push_back({{"magnitude", b.magnitude},
                               {"attacked", b.attacked},
                               {"detected", b.detected},
                               {"recall", b.recall()}});
            total_attacked += b.attacked;
            total_detected += b.detected;
        }
    }
    summary["per_magnitude"] = per_mag;
    summary["attacked"] = total_attacked;
    summary["detected"] = total_detected;
    summary["recall"] =
        total_attacked == 0 ? 0.0 : static_cast<double>(total_detected) / total_attacked;

    fs::create_directories(opt.out);
    atomic_write(opt.out / "isolate_report.csv", report.str());
    atomic_write(opt.out / "isolate_summary.json", summary.dump(2) + "\n");

    log << opt.isolator << ": exact-match " << total_detected << "/" << total_attacked << "\n";
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
    fs::path corpus;
    std::optional<fs::path> model;   // required for the mitigated scenario
    std::string scenario = "attack"; // clean | attack | mitigated
    int method = 0;                  // 1..6 for mitigated
    std::string isolator = "beam";
    fs::path out;
};

inline void cmd_simulate(const SimulateOptions& opt, std::ostream& log = std::cout) {
    const Scenario scenario = scenario_from_string(opt.scenario);
    if (scenario == Scenario::Mitigated && (opt.method < 1 || opt.method > 6))
        throw std::invalid_argument("cmd_simulate: mitigated scenario needs --method 1..6");
    const Corpus corpus = load_corpus(opt.corpus);
    const ExperimentConfig cfg = cmd_detail::corpus_config(opt.corpus);

    ScenarioInputs inputs;
    inputs.grid = corpus.grid;
    inputs.price = cfg.price;
    inputs.dr = cfg.dr;
    inputs.isolation = cfg.isolation;
    inputs.isolator = isolation_method_from_string(opt.isolator);
    ClusterModel model;
    DetectorSettings settings;
    if (scenario == Scenario::Mitigated) {
        if (!opt.model) throw std::invalid_argument("cmd_simulate: mitigated scenario needs --model");
        std::tie(model, settings) = load_cluster_model(*opt.model);
        inputs.model = &model;
        inputs.detector = settings;
    }

    std::ostringstream report;
    report << "day_id,scenario,method,kind,magnitude,attacker_bill,clean_attacker_bill,"
              "attacker_delta_pct,community_cost,clean_community_cost,community_delta_pct,"
              "mape_pct,mape_excluded,isolated,converged,iterations\n";
    std::vector<double> attacker_deltas, community_deltas, mapes;
    for (const cmd_detail::TestDay& t : cmd_detail::test_split(corpus)) {
        if (!t.attacked) continue;
        const DayRecord& day = *t.day;
        const DayOutcome clean = run_day(day, Scenario::Clean, 0, inputs);
        const DayOutcome run = scenario == Scenario::Clean
                                   ? clean
                                   : run_day(day, scenario, opt.method, inputs);
        const double attacker_delta =
            (run.attacker_bill - clean.attacker_bill) / clean.attacker_bill * 100.0;
        const double community_delta =
            (run.community_cost - clean.community_cost) / clean.community_cost * 100.0;
        const MapeResult m = mape(run.priced_forecast, clean.realized);
        attacker_deltas.push_back(attacker_delta);
        community_deltas.push_back(community_delta);
        mapes.push_back(m.value);
        report << day.day_id << "," << to_string(scenario) << "," << run.method << ","
               << to_string(day.attack->spec.kind) << "," << io_detail::format_double(t.magnitude)
               << "," << io_detail::format_double(run.attacker_bill) << ","
               << io_detail::format_double(clean.attacker_bill) << ","
               << io_detail::format_double(attacker_delta) << ","
               << io_detail::format_double(run.community_cost) << ","
               << io_detail::format_double(clean.community_cost) << ","
               << io_detail::format_double(community_delta) << ","
               << io_detail::format_double(m.value) << "," << m.excluded_slots << ","
               << cmd_detail::join_slots(run.isolated_slots) << "," << (run.converged ? 1 : 0)
               << "," << run.iterations << "\n";
    }
    if (attacker_deltas.empty())
        throw std::invalid_argument("cmd_simulate: corpus has no attacked test days");

    nlohmann::json summary;
    summary["format_version"] = kFormatVersion;
    summary["kind"] = "simulate_summary";
    summary["scenario"] = opt.scenario;
    summary["method"] = scenario == Scenario::Mitigated ? opt.method : 0;
    summary["days"] = attacker_deltas.size();
    summary["attacker_delta_pct"] = {{"mean", cmd_detail::mean(attacker_deltas)},
                                     {"median", cmd_detail::median(attacker_deltas)}};
    summary["community_delta_pct"] = {{"mean", cmd_detail::mean(community_deltas)},
                                      {"median", cmd_detail::median(community_deltas)}};
    summary["mape_pct"] = {{"mean", cmd_detail::mean(mapes)},
                           {"median", cmd_detail::median(mapes)}};

    fs::create_directories(opt.out);
    atomic_write(opt.out / "simulate_report.csv", report.str());
    atomic_write(opt.out / "simulate_summary.json", summary.dump(2) + "\n");

    log << opt.scenario << (scenario == Scenario::Mitigated ? " method " + std::to_string(opt.method) : "")
        << ": attacker delta mean " << cmd_detail::mean(attacker_deltas) << "% median "
        << cmd_detail::median(attacker_deltas) << "%, community delta mean "
        << cmd_detail::mean(community_deltas) << "%, mape mean " << cmd_detail::mean(mapes) << "%\n";
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOptions {
    std::vector<fs::path> reports;   // directories holding *_summary.json files
    fs::path out;
};

inline void cmd_evaluate(const EvaluateOptions& opt, std::ostream& log = std::cout) {
    std::map<std::string, nlohmann::json> detect, isolate;
    std::map<std::pair<std::string, int>, nlohmann::json> simulate;

    for (const fs::path& dir : opt.reports) {
        auto try_load = [&](const fs::path& p) -> std::optional<nlohmann::json> {
            if (!fs::exists(p)) return std::nullopt;
            try {
                return nlohmann::json::parse(read_file(p));
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(p.string() + ": " + e.what());
            }
        };
        if (auto d = try_load(dir / "detect_summary.json"))
            detect[d->at("classifier").get<std::string>()] = *d;
        if (auto i = try_load(dir / "isolate_summary.json"))
            isolate[i->at("isolator").get<std::string>()] = *i;
        if (auto s = try_load(dir / "simulate_summary.json"))
            simulate[{s->at("scenario").get<std::string>(), s->at("method").get<int>()}] = *s;
    }
    if (detect.empty() && isolate.empty() && simulate.empty())
        throw std::invalid_argument("cmd_evaluate: no summaries found in the given reports");

    fs::create_directories(opt.out);
    auto num = [](const nlohmann::json& v) {
        return v.is_null() ? "" : io_detail::format_double(v.get<double>());
    };

    {
        std::ostringstream out;
        out << "classifier,accuracy,precision,recall,f1,fpr\n";
        for (const auto& [name, d] : detect)
            out << name << "," << num(d["accuracy"]) << "," << num(d["precision"]) << ","
                << num(d["recall"]) << "," << num(d["f1"]) << "," << num(d["fpr"]) << "\n";
        atomic_write(opt.out / "classifier_table.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "isolator,attacked,detected,recall\n";
        for (const auto& [name, i] : isolate)
            out << name << "," << i["attacked"].get<int>() << "," << i["detected"].get<int>() << ","
                << num(i["recall"]) << "\n";
        atomic_write(opt.out / "isolation_table.csv", out.str());
    }
    {
        // Fig 2 / Table 4 layout: one row per magnitude bucket
        std::map<double, std::map<std::string, std::pair<int, int>>> rows;
        for (const auto& [name, i] : isolate)
            for (const auto& b : i["per_magnitude"])
                rows[b["magnitude"].get<double>()][name] = {b["attacked"].get<int>(),
                                                            b["detected"].get<int>()};
        std::ostringstream out;
        out << "magnitude";
        for (const auto& [name, i] : isolate)
            out << "," << name << "_attacked," << name << "_detected," << name << "_recall";
        out << "\n";
        for (const auto& [mag, cells] : rows) {
            out << io_detail::format_double(mag);
            for (const auto& [name, i] : isolate) {
                auto it = cells.find(name);
                if (it == cells.end()) {
                    out << ",,,";
                } else {
                    const auto [attacked, detected] = it->second;
                    out << "," << attacked << "," << detected << ","
                        << io_detail::format_double(
                               attacked ? static_cast<double>(detected) / attacked : 0.0);
                }
            }
            out << "\n";
        }
        atomic_write(opt.out / "isolation_by_magnitude.csv", out.str());
    }
    {
        std::ostringstream costs, mapes;
        costs << "scenario,method,days,attacker_delta_mean_pct,attacker_delta_median_pct,"
                 "community_delta_mean_pct,community_delta_median_pct\n";
        mapes << "scenario,method,mape_mean_pct,mape_median_pct\n";
        for (const auto& [key, s] : simulate) {
            costs << key.first << "," << key.second << "," << s["days"].get<int>() << ","
                  << num(s["attacker_delta_pct"]["mean"]) << ","
                  << num(s["attacker_delta_pct"]["median"]) << ","
                  << num(s["community_delta_pct"]["mean"]) << ","
                  << num(s["community_delta_pct"]["median"]) << "\n";
            mapes << key.first << "," << key.second << "," << num(s["mape_pct"]["mean"]) << ","
                  << num(s["mape_pct"]["median"]) << "\n";
        }
        atomic_write(opt.out / "mitigation_costs.csv", costs.str());
        atomic_write(opt.out / "mitigation_mape.csv", mapes.str());
    }

    log << "evaluation tables written to " << opt.out.string() << " (" << detect.size()
        << " classifiers, " << isolate.size() << " isolators, " << simulate.size()
        << " simulations)\n";
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineOptions {
    std::optional<fs::path> config;
    fs::path out;
    std::optional<std::uint64_t> seed;
};

inline void cmd_pipeline(const PipelineOptions& opt, std::ostream& log = std::cout) {
    const fs::path corpus_dir = opt.out / "corpus";
    const fs::path model_path = opt.out / "model.json";
    cmd_generate({opt.config, corpus_dir, opt.seed}, log);
    cmd_train({corpus_dir, model_path, 0}, log);
    std::vector<fs::path> reports;
    for (const std::string classifier : {"csr", "sr"}) {
        const fs::path dir = opt.out / ("detect_" + classifier);
        cmd_detect({corpus_dir, model_path, classifier, dir}, log);
        reports.push_back(dir);
    }
    for (const std::string isolator : {"beam", "lof", "csr"}) {
        const fs::path dir = opt.out / ("isolate_" + isolator);
        cmd_isolate({corpus_dir, model_path, isolator, dir}, log);
        reports.push_back(dir);
    }
    {
        const fs::path dir = opt.out / "simulate_attack";
        cmd_simulate({corpus_dir, std::nullopt, "attack", 0, "beam", dir}, log);
        reports.push_back(dir);
    }
    for (int method = 1; method <= 6; ++method) {
        const fs::path dir = opt.out / ("simulate_m" + std::to_string(method));
        cmd_simulate({corpus_dir, model_path, "mitigated", method, "beam", dir}, log);
        reports.push_back(dir);
    }
    cmd_evaluate({reports, opt.out / "evaluation"}, log);
}

}  // namespace drsim
