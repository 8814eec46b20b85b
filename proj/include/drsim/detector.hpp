// Unsupervised attack detection: the k-means cluster module over attack-free
// forecasts, spectral-residual saliency, the CSR classifier, the plain-SR
// baseline and confusion-matrix metrics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "drsim/domain.hpp"
#include "drsim/fft.hpp"

namespace drsim {

inline constexpr double kLogEps = 1e-8;   // added before log; zero spectral magnitudes occur

// ---------------------------------------------------------------------------
// Cluster module
// ---------------------------------------------------------------------------

struct StoredForecast {
    std::int64_t day_id = 0;
    int cluster = 0;
    std::vector<double> values;
};

struct ClusterModel {
    int k = 0;
    std::vector<std::vector<double>> centroids;   // k x P
    std::vector<StoredForecast> database;         // train forecasts with final indices
    std::uint64_t seed = 0;
    std::vector<double> objective_trace;          // within-cluster sum of squares per Lloyd step

    bool fitted() const { return !centroids.empty(); }
    std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().size(); }
};

// Suggested cluster count for small generated corpora; 400 is the value used
// at full data scale and needs thousands of training days.
inline int desk_scale_k(std::size_t train_size) {
    return std::max<int>(4, static_cast<int>(train_size / 25));
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("squared_distance: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

inline std::pair<int, double> closest_centroid(const std::vector<double>& forecast,
                                               const ClusterModel& model) {
    if (!model.fitted()) throw std::invalid_argument("closest_centroid: model not fitted");
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < model.k; ++j) {
        const double d = squared_distance(forecast, model.centroids[static_cast<std::size_t>(j)]);
        if (d < best_dist) {
            best_dist = d;
            best = j;
        }
    }
    return {best, best_dist};
}

// Lloyd's algorithm with k-means++ seeding. Deterministic for a fixed seed:
// sequential assignment, ties to the smallest index, empty clusters re-seeded
// to the point farthest from its assigned centroid.
inline ClusterModel fit_clusters(const std::vector<DemandForecast>& train, int k,
                                 std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("fit_clusters: k must be >= 1");
    if (train.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("fit_clusters: train set smaller than k");
    const std::size_t n = train.size();
    const std::size_t dim = train.front().size();
    for (const DemandForecast& f : train) {
        if (f.size() != dim) throw std::invalid_argument("fit_clusters: mixed forecast lengths");
        if (f.label == ForecastLabel::Attacked)
            throw std::invalid_argument("fit_clusters: attacked forecast in train set");
    }

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    std::mt19937_64 rng(seed);

    // k-means++ seeding
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    model.centroids.push_back(train[first(rng)].values);
    std::vector<double> dist2(n, 0.0);
    while (model.centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : model.centroids)
                best = std::min(best, squared_distance(train[i].values, c));
            dist2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> uni(0.0, total);
            double r = uni(rng);
            for (; pick + 1 < n; ++pick) {
                r -= dist2[pick];
                if (r <= 0.0) break;
            }
        } else {
            pick = first(rng);   // all points coincide with chosen centroids
        }
        model.centroids.push_back(train[pick].values);
    }

    std::vector<int> assign(n, -1);
    auto assign_all = [&]() {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto [j, d] = closest_centroid(train[i].values, model);
            (void)d;
            if (j != assign[i]) {
                assign[i] = j;
                changed = true;
            }
        }
        return changed;
    };

    constexpr int kMaxLloyd = 300;
    for (int step = 0; step < kMaxLloyd; ++step) {
        const bool changed = assign_all();

        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = sums[static_cast<std::size_t>(assign[i])];
            for (std::size_t t = 0; t < dim; ++t) s[t] += train[i].values[t];
            ++counts[static_cast<std::size_t>(assign[i])];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] == 0) {
                // re-seed to the point farthest from its assigned centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = squared_distance(
                        train[i].values, model.centroids[static_cast<std::size_t>(assign[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                model.centroids[static_cast<std::size_t>(j)] = train[far].values;
            } else {
                for (std::size_t t = 0; t < dim; ++t)
                    model.centroids[static_cast<std::size_t>(j)][t] =
                        sums[static_cast<std::size_t>(j)][t] / counts[static_cast<std::size_t>(j)];
            }
        }

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            objective += squared_distance(train[i].values,
                                          model.centroids[static_cast<std::size_t>(assign[i])]);
        model.objective_trace.push_back(objective);

        if (!changed && step > 0) break;
    }
    assign_all();   // final indices against final centroids

    model.database.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        model.database.push_back({train[i].day_id, assign[i], train[i].values});
    return model;
}

// ---------------------------------------------------------------------------
// Spectral-residual saliency
// ---------------------------------------------------------------------------

struct SaliencyMap {
    std::vector<double> values;
    int peak_index = 0;
    double peak_value = 0.0;
};

struct CsrConfig {
    int q = 3;                       // moving-average window on the log spectrum, odd
    double threshold = 0.0;          // saliency cutoff, calibrated on attack-free data
    int k = 0;                       // cluster count (0 = desk-scale default at fit time)
    bool conventional_sr_order = false;   // flip the residual to log - avg(log)

    void validate() const {
        if (q < 1 || q % 2 == 0) throw std::invalid_argument("CsrConfig: q must be odd and >= 1");
    }
};

// Whitened-spectrum saliency. The spectral residual of the log amplitude
// spectrum is avg(log) - log by default (conventional_sr_order flips the
// sign); exp(residual) acts as a filter on the amplitude spectrum, keeping
// the original phase, so peak values scale with the injection size and a
// zero residual maps to a (near) zero saliency map.
inline SaliencyMap spectral_saliency(const std::vector<double>& residual, const CsrConfig& cfg) {
    cfg.validate();
    const std::size_t n = residual.size();
    if (n == 0) throw std::invalid_argument("spectral_saliency: empty residual");
    if (static_cast<std::size_t>(cfg.q) > n)
        throw std::invalid_argument("spectral_saliency: q larger than forecast length");

    const std::vector<fft::cdouble> spectrum = fft::forward_real(residual);
    std::vector<double> log_spec(n), phase(n);
    for (std::size_t i = 0; i < n; ++i) {
        log_spec[i] = std::log(std::abs(spectrum[i]) + kLogEps);
        phase[i] = std::arg(spectrum[i]);
    }

    // circular moving average, window q
    const int half = cfg.q / 2;
    std::vector<double> avg_log(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int d = -half; d <= half; ++d) {
            const std::size_t j = (i + n + static_cast<std::size_t>(d + static_cast<int>(n))) % n;
            sum += log_spec[j];
        }
        avg_log[i] = sum / cfg.q;
    }

    std::vector<fft::cdouble> whitened(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = cfg.conventional_sr_order ? log_spec[i] - avg_log[i]
                                                   : avg_log[i] - log_spec[i];
        whitened[i] = std::polar(std::exp(log_spec[i] + r), phase[i]);
    }
    const std::vector<fft::cdouble> back = fft::inverse(std::move(whitened));

    SaliencyMap map;
    map.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) map.values[i] = std::abs(back[i]);
    map.peak_index = static_cast<int>(
        std::max_element(map.values.begin(), map.values.end()) - map.values.begin());
    map.peak_value = map.values[static_cast<std::size_t>(map.peak_index)];
    return map;
}

// ---------------------------------------------------------------------------
// Classifiers
// ---------------------------------------------------------------------------

enum class Verdict { Normal, Attacked };

struct DetectionReport {
    Verdict verdict = Verdict::Normal;
    SaliencyMap saliency;
    int nearest_cluster = -1;        // -1 for the SR baseline
    std::vector<double> residual;
};

inline DetectionReport csr_classify(const std::vector<double>& forecast, const ClusterModel& model,
                                    const CsrConfig& cfg) {
    if (!model.fitted()) throw std::invalid_argument("csr_classify: model not fitted");
    if (forecast.size() != model.dim())
        throw std::invalid_argument("csr_classify: forecast length != model dimension");
    DetectionReport report;
    auto [cluster, dist] = closest_centroid(forecast, model);
    (void)dist;
    report.nearest_cluster = cluster;
    report.residual.resize(forecast.size());
    const auto& centroid = model.centroids[static_cast<std::size_t>(cluster)];
    for (std::size_t i = 0; i < forecast.size(); ++i)
        report.residual[i] = forecast[i] - centroid[i];
    report.saliency = spectral_saliency(report.residual, cfg);
    report.verdict = report.saliency.peak_value >= cfg.threshold ? Verdict::Attacked : Verdict::Normal;
    return report;
}

// SR baseline: same pipeline with the forecast itself as the residual
// (equivalently, CSR with a single all-zero centroid).
inline DetectionReport sr_classify(const std::vector<double>& forecast, const CsrConfig& cfg) {
    DetectionReport report;
    report.residual = forecast;
    report.saliency = spectral_saliency(report.residual, cfg);
    report.verdict = report.saliency.peak_value >= cfg.threshold ? Verdict::Attacked : Verdict::Normal;
    return report;
}

// Threshold = p-th percentile (nearest rank) of peak saliency over attack-free
// forecasts; use_cluster_residual selects the CSR or plain-SR pipeline.
inline double calibrate_threshold(const std::vector<DemandForecast>& normals,
                                  const ClusterModel& model, const CsrConfig& cfg,
                                  double percentile, bool use_cluster_residual = true) {
    if (normals.empty()) throw std::invalid_argument("calibrate_threshold: no forecasts");
    if (percentile <= 0.0 || percentile > 100.0)
        throw std::invalid_argument("calibrate_threshold: percentile out of (0, 100]");
    std::vector<double> peaks;
    peaks.reserve(normals.size());
    CsrConfig probe = cfg;
    probe.threshold = std::numeric_limits<double>::infinity();
    for (const DemandForecast& f : normals) {
        const DetectionReport r = use_cluster_residual ? csr_classify(f.values, model, probe)
                                                       : sr_classify(f.values, probe);
        peaks.push_back(r.saliency.peak_value);
    }
    std::sort(peaks.begin(), peaks.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(peaks.size())));
    return peaks[std::min(peaks.size(), std::max<std::size_t>(rank, 1)) - 1];
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ClassificationMetrics {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    std::optional<double> precision;   // absent when nothing was flagged
    std::optional<double> recall;      // absent when truth has no positives
    std::optional<double> f1;
    std::optional<double> fpr;         // absent when truth has no negatives
};

inline ClassificationMetrics classification_metrics(const std::vector<Verdict>& verdicts,
                                                    const std::vector<bool>& truth_attacked) {
    if (verdicts.size() != truth_attacked.size())
        throw std::invalid_argument("classification_metrics: length mismatch");
    if (verdicts.empty()) throw std::invalid_argument("classification_metrics: empty input");
    ClassificationMetrics m;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const bool flagged = verdicts[i] == Verdict::Attacked;
        if (flagged && truth_attacked[i]) ++m.tp;
        else if (flagged && !truth_attacked[i]) ++m.fp;
        else if (!flagged && truth_attacked[i]) ++m.fn;
        else ++m.tn;
    }
    const double n = static_cast<double>(verdicts.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    if (m.fp + m.tn > 0) m.fpr = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
    return m;
}

}  // namespace drsim
