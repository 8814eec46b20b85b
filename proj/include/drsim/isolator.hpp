// Attacked-slot isolation: beam search over slot subspaces scored by
// isolation path length, with per-slot LOF and CSR saliency benchmarks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "drsim/detector.hpp"

namespace drsim {

inline constexpr double kEulerGamma = 0.5772;   // as used by the path-length correction

struct IsolationConfig {
    int max_subspace = 3;      // attacks assumed to span at most 1.5 hours
    int beam_width = 10;       // l, stage-2 survivors extended in stage 3
    int ensemble_trees = 50;
    int subsample = 64;        // psi, capped at the population size + query
    std::uint64_t seed = 1;
    int lof_neighbors = 10;
    double lof_threshold = 1.5;   // "significantly greater than 1"

    void validate() const {
        if (max_subspace < 1) throw std::invalid_argument("IsolationConfig: max_subspace >= 1");
        if (beam_width < 1) throw std::invalid_argument("IsolationConfig: beam_width >= 1");
        if (ensemble_trees < 1) throw std::invalid_argument("IsolationConfig: ensemble_trees >= 1");
        if (subsample < 2) throw std::invalid_argument("IsolationConfig: subsample >= 2");
    }
};

enum class IsolationMethod { IsolationPath, Lof, Csr };

inline const char* to_string(IsolationMethod m) {
    switch (m) {
        case IsolationMethod::IsolationPath: return "beam";
        case IsolationMethod::Lof: return "lof";
        default: return "csr";
    }
}

struct SubspaceScore {
    std::vector<int> slots;
    double score = 0.0;
};

struct IsolationVerdict {
    std::vector<int> attacked_slots;        // ascending, size <= max_subspace
    IsolationMethod method = IsolationMethod::IsolationPath;
    std::vector<SubspaceScore> audit;       // every explored subspace with its score
};

// Expected path length of an unsuccessful search in a tree over n points;
// normalises raw path lengths so scores compare across subspaces.
inline double expected_path_length(int n) {
    if (n < 2) return 0.0;
    return 2.0 * (std::log(static_cast<double>(n - 1)) + kEulerGamma) -
           2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One sub-seed per (base seed, subspace, tree) so parallel and serial
// evaluation orders agree exactly.
inline std::uint64_t subspace_tree_seed(std::uint64_t base, const std::vector<int>& slots,
                                        int tree) {
    std::uint64_t h = splitmix64(base);
    for (int s : slots) h = splitmix64(h ^ static_cast<std::uint64_t>(s + 1));
    return splitmix64(h ^ static_cast<std::uint64_t>(tree + 1));
}

}  // namespace detail

// Mean random-binary-split depth needed to isolate the query from the
// population, restricted to the subspace features, normalised by the
// expected path length; lower means more isolated. The population must not
// contain the query itself; every tree's subsample includes the query.
inline double isolation_path_score(const std::vector<double>& query,
                                   const std::vector<std::vector<double>>& population,
                                   const std::vector<int>& subspace, const IsolationConfig& cfg) {
    cfg.validate();
    if (population.size() < 2) throw std::invalid_argument("isolation_path_score: population < 2");
    if (subspace.empty()) throw std::invalid_argument("isolation_path_score: empty subspace");

    const int psi = std::min<int>(cfg.subsample, static_cast<int>(population.size()) + 1);
    const double norm = expected_path_length(psi);

    // project once; column-major by subspace feature
    const std::size_t dims = subspace.size();
    std::vector<double> q(dims);
    for (std::size_t d = 0; d < dims; ++d) q[d] = query[static_cast<std::size_t>(subspace[d])];
    std::vector<std::vector<double>> pop(population.size(), std::vector<double>(dims));
    for (std::size_t i = 0; i < population.size(); ++i)
        for (std::size_t d = 0; d < dims; ++d)
            pop[i][d] = population[i][static_cast<std::size_t>(subspace[d])];

    bool all_equal = true;
    for (const auto& p : pop)
        if (p != q) {
            all_equal = false;
            break;
        }
    if (all_equal) return norm;   // nothing can ever separate the query

    double path_sum = 0.0;
    std::vector<std::size_t> indices(pop.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    for (int tree = 0; tree < cfg.ensemble_trees; ++tree) {
        std::mt19937_64 rng(detail::subspace_tree_seed(cfg.seed, subspace, tree));

        // subsample psi-1 population points without replacement, plus the query
        std::vector<std::size_t> pool = indices;
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(psi - 1), pool.size());
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        std::vector<const std::vector<double>*> node;
        node.reserve(take);
        for (std::size_t i = 0; i < take; ++i) node.push_back(&pop[pool[i]]);

        double path = 0.0;
        while (true) {
            if (node.empty()) break;   // query alone
            // features that still have spread across node + query
            std::vector<std::size_t> splittable;
            for (std::size_t d = 0; d < dims; ++d) {
                double lo = q[d], hi = q[d];
                for (const auto* p : node) {
                    lo = std::min(lo, (*p)[d]);
                    hi = std::max(hi, (*p)[d]);
                }
                if (hi > lo) splittable.push_back(d);
            }
            if (splittable.empty()) {
                path += expected_path_length(static_cast<int>(node.size()) + 1);
                break;
            }
            std::uniform_int_distribution<std::size_t> fpick(0, splittable.size() - 1);
            const std::size_t d = splittable[fpick(rng)];
            double lo = q[d], hi = q[d];
            for (const auto* p : node) {
                lo = std::min(lo, (*p)[d]);
                hi = std::max(hi, (*p)[d]);
            }
            std::uniform_real_distribution<double> spick(lo, hi);
            const double split = spick(rng);
            const bool query_left = q[d] <= split;
            std::vector<const std::vector<double>*> next;
            for (const auto* p : node)
                if (((*p)[d] <= split) == query_left) next.push_back(p);
            node.swap(next);
            path += 1.0;
        }
        path_sum += path;
    }
    return path_sum / cfg.ensemble_trees / norm;
}

namespace detail {

// Members of the query's nearest cluster; clusters too small to provide
// contrast fall back to the whole database.
inline std::vector<std::vector<double>> cluster_population(const std::vector<double>& forecast,
                                                           const ClusterModel& model,
                                                           std::size_t min_size) {
    const auto [cluster, dist] = closest_centroid(forecast, model);
    (void)dist;
    std::vector<std::vector<double>> population;
    for (const StoredForecast& f : model.database)
        if (f.cluster == cluster) population.push_back(f.values);
    if (population.size() < min_size) {
        population.clear();
        for (const StoredForecast& f : model.database) population.push_back(f.values);
    }
    return population;
}

inline bool better_subspace(const SubspaceScore& a, const SubspaceScore& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.slots.size() != b.slots.size()) return a.slots.size() < b.slots.size();
    return a.slots < b.slots;
}

}  // namespace detail

// Staged subspace exploration: every singleton, every pair, then the top-l
// pairs extended by one more slot. The verdict is the best-scoring explored
// subspace (ties: smaller subspace, then lexicographic slot order).
inline IsolationVerdict beam_search_isolate(const std::vector<double>& attacked,
                                            const ClusterModel& model,
                                            const IsolationConfig& cfg) {
    cfg.validate();
    if (!model.fitted()) throw std::invalid_argument("beam_search_isolate: model not fitted");
    const int slots = static_cast<int>(attacked.size());
    const std::vector<std::vector<double>> population =
        detail::cluster_population(attacked, model, 2);

    IsolationVerdict verdict;
    verdict.method = IsolationMethod::IsolationPath;

    auto score_subspace = [&](std::vector<int> subspace) {
        const double s = isolation_path_score(attacked, population, subspace, cfg);
        verdict.audit.push_back({std::move(subspace), s});
    };

    for (int a = 0; a < slots; ++a) score_subspace({a});

    if (cfg.max_subspace >= 2) {
        for (int a = 0; a < slots; ++a)
            for (int b = a + 1; b < slots; ++b) score_subspace({a, b});
    }

    if (cfg.max_subspace >= 3) {
        std::vector<SubspaceScore> pairs;
        for (const SubspaceScore& s : verdict.audit)
            if (s.slots.size() == 2) pairs.push_back(s);
        std::sort(pairs.begin(), pairs.end(), detail::better_subspace);
        const std::size_t beam = std::min<std::size_t>(static_cast<std::size_t>(cfg.beam_width),
                                                       pairs.size());
        for (std::size_t i = 0; i < beam; ++i) {
            for (int c = 0; c < slots; ++c) {
                if (c == pairs[i].slots[0] || c == pairs[i].slots[1]) continue;
                std::vector<int> ext = pairs[i].slots;
                ext.push_back(c);
                std::sort(ext.begin(), ext.end());
                score_subspace(std::move(ext));
            }
        }
    }

    const SubspaceScore* best = &verdict.audit.front();
    for (const SubspaceScore& s : verdict.audit)
        if (detail::better_subspace(s, *best)) best = &s;
    verdict.attacked_slots = best->slots;
    return verdict;
}

// ---------------------------------------------------------------------------
// LOF benchmark (one-dimensional, per slot)
// ---------------------------------------------------------------------------

namespace detail {

// Novelty-style LOF of an external query value against a 1-d population:
// k-distances and neighbourhoods of population points never include the query.
inline double lof_1d(double query, const std::vector<double>& values, int k) {
    const std::size_t n = values.size();
    auto kth_distance = [&](double from, bool exclude_self) {
        std::vector<double> d;
        d.reserve(n);
        bool skipped = false;
        for (double v : values) {
            const double dist = std::abs(from - v);
            if (exclude_self && !skipped && dist == 0.0) {
                skipped = true;   // drop one copy of the point itself
                continue;
            }
            d.push_back(dist);
        }
        std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
        return d[static_cast<std::size_t>(k - 1)];
    };
    auto neighbourhood = [&](double from, double kdist, bool exclude_self) {
        std::vector<double> out;
        bool skipped = false;
        for (double v : values) {
            const double dist = std::abs(from - v);
            if (exclude_self && !skipped && dist == 0.0) {
                skipped = true;
                continue;
            }
            if (dist <= kdist) out.push_back(v);
        }
        return out;
    };
    auto lrd = [&](double from, bool exclude_self) {
        const double kdist = kth_distance(from, exclude_self);
        const std::vector<double> nbrs = neighbourhood(from, kdist, exclude_self);
        double sum = 0.0;
        for (double v : nbrs) sum += std::max(kth_distance(v, true), std::abs(from - v));
        if (sum == 0.0) return std::numeric_limits<double>::infinity();
        return static_cast<double>(nbrs.size()) / sum;
    };

    const double lrd_q = lrd(query, false);
    const double kdist_q = kth_distance(query, false);
    const std::vector<double> nbrs = neighbourhood(query, kdist_q, false);
    double ratio_sum = 0.0;
    for (double v : nbrs) {
        const double lrd_v = lrd(v, true);
        if (std::isinf(lrd_v) && std::isinf(lrd_q)) ratio_sum += 1.0;
        else ratio_sum += lrd_v / lrd_q;
    }
    return ratio_sum / static_cast<double>(nbrs.size());
}

}  // namespace detail

// Flags slots whose per-slot LOF is at least cfg.lof_threshold, keeping the
// max_subspace highest-LOF slots.
inline IsolationVerdict lof_isolate(const std::vector<double>& attacked, const ClusterModel& model,
                                    const IsolationConfig& cfg) {
    cfg.validate();
    if (!model.fitted()) throw std::invalid_argument("lof_isolate: model not fitted");
    const std::vector<std::vector<double>> population = detail::cluster_population(
        attacked, model, static_cast<std::size_t>(cfg.lof_neighbors) + 1);
    if (population.size() < static_cast<std::size_t>(cfg.lof_neighbors) + 1)
        throw std::invalid_argument("lof_isolate: population smaller than lof_neighbors + 1");

    IsolationVerdict verdict;
    verdict.method = IsolationMethod::Lof;
    std::vector<std::pair<double, int>> flagged;   // (lof, slot)
    std::vector<double> column(population.size());
    for (std::size_t s = 0; s < attacked.size(); ++s) {
        for (std::size_t i = 0; i < population.size(); ++i) column[i] = population[i][s];
        const double lof = detail::lof_1d(attacked[s], column, cfg.lof_neighbors);
        verdict.audit.push_back({{static_cast<int>(s)}, lof});
        if (lof >= cfg.lof_threshold) flagged.emplace_back(lof, static_cast<int>(s));
    }
    std::sort(flagged.begin(), flagged.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (flagged.size() > static_cast<std::size_t>(cfg.max_subspace))
        flagged.resize(static_cast<std::size_t>(cfg.max_subspace));
    for (const auto& [lof, slot] : flagged) verdict.attacked_slots.push_back(slot);
    std::sort(verdict.attacked_slots.begin(), verdict.attacked_slots.end());
    return verdict;
}

// ---------------------------------------------------------------------------
// CSR benchmark
// ---------------------------------------------------------------------------

// Slots whose saliency clears the detection threshold, highest saliency
// first, capped at max_subspace; the peak slot is always included.
inline IsolationVerdict csr_isolate(const DetectionReport& report, double threshold,
                                    int max_subspace) {
    if (report.verdict != Verdict::Attacked)
        throw std::logic_error("csr_isolate: report verdict is not attacked");
    if (max_subspace < 1) throw std::invalid_argument("csr_isolate: max_subspace >= 1");

    IsolationVerdict verdict;
    verdict.method = IsolationMethod::Csr;
    std::vector<std::pair<double, int>> candidates;
    for (std::size_t s = 0; s < report.saliency.values.size(); ++s) {
        verdict.audit.push_back({{static_cast<int>(s)}, report.saliency.values[s]});
        if (report.saliency.values[s] >= threshold)
            candidates.emplace_back(report.saliency.values[s], static_cast<int>(s));
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (candidates.empty()) candidates.emplace_back(report.saliency.peak_value, report.saliency.peak_index);
    if (candidates.size() > static_cast<std::size_t>(max_subspace))
        candidates.resize(static_cast<std::size_t>(max_subspace));
    for (const auto& [sal, slot] : candidates) verdict.attacked_slots.push_back(slot);
    std::sort(verdict.attacked_slots.begin(), verdict.attacked_slots.end());
    return verdict;
}

// ---------------------------------------------------------------------------
// Recall per injection percentage
// ---------------------------------------------------------------------------

struct RecallBucket {
    double magnitude = 0.0;
    int attacked = 0;
    int detected = 0;

    double recall() const { return attacked == 0 ? 0.0 : static_cast<double>(detected) / attacked; }
};

// Exact-match rule: a forecast counts as correctly isolated only when the
// verdict set equals the planted set.
inline std::vector<RecallBucket> isolation_recall(const std::vector<std::vector<int>>& verdicts,
                                                  const std::vector<std::vector<int>>& planted,
                                                  const std::vector<double>& magnitudes) {
    if (verdicts.size() != planted.size() || verdicts.size() != magnitudes.size())
        throw std::invalid_argument("isolation_recall: length mismatch");
    std::map<double, RecallBucket> buckets;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        RecallBucket& b = buckets[magnitudes[i]];
        b.magnitude = magnitudes[i];
        ++b.attacked;
        std::vector<int> v = verdicts[i], p = planted[i];
        std::sort(v.begin(), v.end());
        std::sort(p.begin(), p.end());
        if (v == p) ++b.detected;
    }
    std::vector<RecallBucket> out;
    for (const auto& [mag, bucket] : buckets) out.push_back(bucket);
    return out;
}

}  // namespace drsim
