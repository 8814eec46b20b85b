#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drsim/isolator.hpp"
#include "support/oracles.hpp"

using namespace drsim;

namespace {

// Single-cluster population shaped like an aggregated day: template plus
// per-day noise, stored in a hand-built model.
ClusterModel synthetic_cluster(int members, double sigma, std::uint64_t seed,
                               std::size_t slots = 48) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    ClusterModel model;
    model.k = 1;
    std::vector<double> centroid(slots, 0.0);
    for (int i = 0; i < members; ++i) {
        std::vector<double> v(slots);
        for (std::size_t p = 0; p < slots; ++p) {
            const double base =
                10.0 + 8.0 * std::exp(-0.5 * std::pow((static_cast<double>(p) - 37.0) / 4.0, 2.0)) +
                4.0 * std::exp(-0.5 * std::pow((static_cast<double>(p) - 15.0) / 3.0, 2.0));
            v[p] = std::max(0.0, base + noise(rng));
        }
        for (std::size_t p = 0; p < slots; ++p) centroid[p] += v[p] / members;
        model.database.push_back({i, 0, v});
    }
    model.centroids.push_back(centroid);
    return model;
}

std::vector<double> sample_day(const ClusterModel& model, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> v = model.centroids[0];
    for (double& x : v) x = std::max(0.0, x + noise(rng));
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// isolation_path_score
// ---------------------------------------------------------------------------

TEST(IsolationPathScore, DegeneratePopulationScoresMaximallyUnisolated) {
    IsolationConfig cfg;
    cfg.subsample = 16;
    const std::vector<double> query = {0.0};
    const std::vector<std::vector<double>> population(20, std::vector<double>{0.0});
    const double score = isolation_path_score(query, population, {0}, cfg);
    EXPECT_DOUBLE_EQ(score, expected_path_length(16));
}

TEST(IsolationPathScore, ExtremeOutlierIsolatesAlmostImmediately) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<std::vector<double>> population;
    for (int i = 0; i < 63; ++i) population.push_back({uni(rng)});
    const std::vector<double> query = {100.0};
    IsolationConfig cfg;
    cfg.subsample = 64;
    cfg.ensemble_trees = 400;
    const double score = isolation_path_score(query, population, {0}, cfg);
    const double raw_mean_path = score * expected_path_length(64);
    EXPECT_LT(raw_mean_path, 2.0);

    // the 10^4-tree Monte-Carlo oracle agrees within 10%
    const double oracle_path = oracle::mc_mean_path({100.0}, population, 10000, 99);
    EXPECT_NEAR(raw_mean_path, oracle_path, 0.1 * oracle_path);
}

TEST(IsolationPathScore, MedianInlierScoresNearOne) {
    std::vector<std::vector<double>> population;
    for (int i = 0; i < 63; ++i) population.push_back({static_cast<double>(i) / 62.0});
    const std::vector<double> query = {0.5};
    IsolationConfig cfg;
    cfg.subsample = 64;
    cfg.ensemble_trees = 2000;
    const double score = isolation_path_score(query, population, {0}, cfg);
    EXPECT_NEAR(score, 1.0, 0.2);

    const double raw = score * expected_path_length(64);
    const double oracle_path = oracle::mc_mean_path(query, population, 10000, 101);
    EXPECT_NEAR(raw, oracle_path, 0.1 * oracle_path);
}

TEST(IsolationPathScore, NormalisationStableAcrossSubsampleSizes) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<std::vector<double>> population;
    for (int i = 0; i < 200; ++i) population.push_back({uni(rng)});
    for (int psi : {16, 64}) {
        IsolationConfig cfg;
        cfg.subsample = psi;
        cfg.ensemble_trees = 800;
        double mean_score = 0.0;
        const int probes = 20;
        for (int t = 0; t < probes; ++t) {
            cfg.seed = static_cast<std::uint64_t>(t) + 1;
            mean_score += isolation_path_score({uni(rng)}, population, {0}, cfg) / probes;
        }
        EXPECT_NEAR(mean_score, 1.0, 0.25) << "psi " << psi;
    }
}

TEST(IsolationPathScore, PreconditionsEnforced) {
    IsolationConfig cfg;
    EXPECT_THROW(isolation_path_score({1.0}, {{1.0}}, {0}, cfg), std::invalid_argument);
    EXPECT_THROW(isolation_path_score({1.0}, {{1.0}, {2.0}}, {}, cfg), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// beam_search_isolate
// ---------------------------------------------------------------------------

TEST(BeamSearch, RecoversPlantedPulseSlot) {
    const ClusterModel model = synthetic_cluster(40, 2.0, 1);
    std::vector<double> attacked = sample_day(model, 2.0, 500);
    attacked[17] += 30.0;   // ~10% of a desk-scale controllable demand
    IsolationConfig cfg;
    const IsolationVerdict v = beam_search_isolate(attacked, model, cfg);
    EXPECT_EQ(v.attacked_slots, std::vector<int>{17});
    EXPECT_EQ(v.method, IsolationMethod::IsolationPath);
    EXPECT_FALSE(v.audit.empty());
}

TEST(BeamSearch, FixedSeedGivesIdenticalVerdict) {
    const ClusterModel model = synthetic_cluster(30, 2.0, 3);
    std::vector<double> attacked = sample_day(model, 2.0, 42);
    attacked[9] += 25.0;
    IsolationConfig cfg;
    cfg.seed = 77;
    const IsolationVerdict a = beam_search_isolate(attacked, model, cfg);
    const IsolationVerdict b = beam_search_isolate(attacked, model, cfg);
    EXPECT_EQ(a.attacked_slots, b.attacked_slots);
    ASSERT_EQ(a.audit.size(), b.audit.size());
    for (std::size_t i = 0; i < a.audit.size(); ++i)
        EXPECT_DOUBLE_EQ(a.audit[i].score, b.audit[i].score) << i;
}

// Equal-split two-slot injections: the verdict lands inside the planted pair
// in nearly every seeded run (a 1-d subset of an equally injected pair is at
// least as isolated as the pair itself, so exact pair recovery is rare).
TEST(BeamSearch, RampingVerdictStaysWithinPlantedPair) {
    const ClusterModel model = synthetic_cluster(40, 2.0, 5);
    int within = 0;
    const int runs = 20;
    for (int t = 0; t < runs; ++t) {
        std::vector<double> attacked = sample_day(model, 2.0, 1000 + static_cast<std::uint64_t>(t));
        attacked[20] += 16.0;
        attacked[21] += 16.0;
        IsolationConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(t) + 1;
        const IsolationVerdict v = beam_search_isolate(attacked, model, cfg);
        bool subset = !v.attacked_slots.empty();
        for (int s : v.attacked_slots)
            if (s != 20 && s != 21) subset = false;
        if (subset) ++within;
    }
    EXPECT_GE(within, 18);   // >= 90% of seeded runs
}

TEST(BeamSearch, MemberQueryShowsFlatScores) {
    const ClusterModel model = synthetic_cluster(40, 2.0, 9);
    const std::vector<double> query = model.database[7].values;
    IsolationConfig cfg;
    const IsolationVerdict v = beam_search_isolate(query, model, cfg);
    double best = std::numeric_limits<double>::infinity();
    for (const SubspaceScore& s : v.audit) best = std::min(best, s.score);
    // nothing materially more isolated than an inlier; a planted attack on
    // this population scores around 0.2
    EXPECT_GT(best, 0.35);
}

TEST(BeamSearch, TinyClusterFallsBackToWholeDatabase) {
    // two clusters, one with a single member; query lands in the tiny one
    ClusterModel model = synthetic_cluster(20, 1.0, 13, 8);
    std::vector<double> far(8, 500.0);
    model.k = 2;
    model.centroids.push_back(far);
    model.database.push_back({99, 1, far});
    std::vector<double> query = far;
    query[3] += 50.0;
    IsolationConfig cfg;
    EXPECT_NO_THROW(beam_search_isolate(query, model, cfg));
}

TEST(BeamSearch, MaxSubspaceOneSkipsPairs) {
    const ClusterModel model = synthetic_cluster(20, 2.0, 15, 8);
    std::vector<double> attacked = sample_day(model, 2.0, 77);
    attacked[4] += 40.0;
    IsolationConfig cfg;
    cfg.max_subspace = 1;
    const IsolationVerdict v = beam_search_isolate(attacked, model, cfg);
    EXPECT_EQ(v.attacked_slots, std::vector<int>{4});
    for (const SubspaceScore& s : v.audit) EXPECT_EQ(s.slots.size(), 1u);
}

// ---------------------------------------------------------------------------
// lof_isolate
// ---------------------------------------------------------------------------

TEST(Lof, CentreOfDensePopulationIsInlier) {
    ClusterModel model;
    model.k = 1;
    std::vector<double> centroid(4, 0.0);
    for (int i = 0; i < 41; ++i) {
        // slot 0 sweeps [0, 1]; other slots nearly constant
        std::vector<double> v = {static_cast<double>(i) / 40.0, 5.0 + 0.01 * i, 3.0,
                                 1.0 + 0.005 * i};
        for (std::size_t p = 0; p < 4; ++p) centroid[p] += v[p] / 41.0;
        model.database.push_back({i, 0, v});
    }
    model.centroids.push_back(centroid);
    IsolationConfig cfg;
    std::vector<double> query = {0.5, 5.2, 3.0, 1.1};
    const IsolationVerdict v = lof_isolate(query, model, cfg);
    EXPECT_NEAR(v.audit[0].score, 1.0, 0.3);
}

TEST(Lof, ExtremeSlotFlaggedWithHighestScore) {
    const ClusterModel model = synthetic_cluster(40, 1.0, 21, 8);
    std::vector<double> query = sample_day(model, 1.0, 88);
    query[5] = 10.0 * 25.0;   // far beyond the population maximum
    IsolationConfig cfg;
    const IsolationVerdict v = lof_isolate(query, model, cfg);
    ASSERT_FALSE(v.attacked_slots.empty());
    EXPECT_NE(std::find(v.attacked_slots.begin(), v.attacked_slots.end(), 5),
              v.attacked_slots.end());
    double lof5 = 0.0, best = 0.0;
    for (const SubspaceScore& s : v.audit) {
        if (s.slots[0] == 5) lof5 = s.score;
        best = std::max(best, s.score);
    }
    EXPECT_DOUBLE_EQ(lof5, best);
    EXPECT_LE(v.attacked_slots.size(), 3u);
}

TEST(Lof, DuplicateQueryIsInlier) {
    ClusterModel model;
    model.k = 1;
    std::vector<double> centroid(2, 0.0);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> dup = {0.4, 0.6};
    for (int i = 0; i < 30; ++i) {
        std::vector<double> v = {uni(rng), uni(rng)};
        if (i == 12) v = dup;   // an identical point exists
        for (std::size_t p = 0; p < 2; ++p) centroid[p] += v[p] / 30.0;
        model.database.push_back({i, 0, v});
    }
    model.centroids.push_back(centroid);
    IsolationConfig cfg;
    const IsolationVerdict v = lof_isolate(dup, model, cfg);
    for (const SubspaceScore& s : v.audit) EXPECT_NEAR(s.score, 1.0, 0.5);
}

TEST(Lof, MatchesDirectEquationOracle) {
    // 18-point fixture, k = 4; library vs the matrix-style direct computation
    std::vector<double> population = {0.1,  0.2, 0.25, 0.3, 0.42, 0.5,  0.55, 0.61, 0.7,
                                      0.75, 0.8, 0.85, 0.9, 1.0,  1.15, 1.3,  1.45, 1.6};
    ClusterModel model;
    model.k = 1;
    std::vector<double> centroid(1, 0.0);
    for (std::size_t i = 0; i < population.size(); ++i) {
        model.database.push_back({static_cast<std::int64_t>(i), 0, {population[i]}});
        centroid[0] += population[i] / static_cast<double>(population.size());
    }
    model.centroids.push_back(centroid);
    IsolationConfig cfg;
    cfg.lof_neighbors = 4;
    for (double query : {0.05, 0.5, 1.02, 3.0}) {
        const IsolationVerdict v = lof_isolate(std::vector<double>{query}, model, cfg);
        const double direct = oracle::direct_lof(query, population, 4);
        EXPECT_NEAR(v.audit[0].score, direct, 1e-9 * std::max(1.0, direct)) << "query " << query;
    }
}

TEST(Lof, PopulationSmallerThanNeighboursRejected) {
    ClusterModel model = synthetic_cluster(5, 1.0, 3, 4);
    IsolationConfig cfg;
    cfg.lof_neighbors = 10;
    EXPECT_THROW(lof_isolate(model.centroids[0], model, cfg), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// csr_isolate
// ---------------------------------------------------------------------------

namespace {

DetectionReport report_with_saliency(std::vector<double> sal) {
    DetectionReport r;
    r.verdict = Verdict::Attacked;
    r.saliency.values = std::move(sal);
    r.saliency.peak_index =
        static_cast<int>(std::max_element(r.saliency.values.begin(), r.saliency.values.end()) -
                         r.saliency.values.begin());
    r.saliency.peak_value = r.saliency.values[static_cast<std::size_t>(r.saliency.peak_index)];
    return r;
}

}  // namespace

TEST(CsrIsolate, SingleSpikeGivesArgmax) {
    std::vector<double> sal(48, 0.1);
    sal[17] = 5.0;
    const IsolationVerdict v = csr_isolate(report_with_saliency(sal), 1.0, 3);
    EXPECT_EQ(v.attacked_slots, std::vector<int>{17});
    EXPECT_EQ(v.method, IsolationMethod::Csr);
}

TEST(CsrIsolate, EqualMaximaReturnedInSlotOrder) {
    std::vector<double> sal(48, 0.1);
    sal[40] = 5.0;
    sal[5] = 5.0;
    const IsolationVerdict v = csr_isolate(report_with_saliency(sal), 1.0, 3);
    EXPECT_EQ(v.attacked_slots, (std::vector<int>{5, 40}));
}

TEST(CsrIsolate, CapsAtMaxSubspaceByDescendingSaliency) {
    std::vector<double> sal(48, 0.1);
    sal[3] = 9.0;
    sal[10] = 8.0;
    sal[20] = 7.0;
    sal[30] = 6.0;   // above threshold but outside the cap
    const IsolationVerdict v = csr_isolate(report_with_saliency(sal), 1.0, 3);
    EXPECT_EQ(v.attacked_slots, (std::vector<int>{3, 10, 20}));
}

TEST(CsrIsolate, NormalVerdictIsContractViolation) {
    DetectionReport r;
    r.verdict = Verdict::Normal;
    EXPECT_THROW(csr_isolate(r, 1.0, 3), std::logic_error);
}

TEST(CsrIsolate, PeakAlwaysIncluded) {
    std::vector<double> sal(48, 0.0);
    sal[11] = 0.5;
    // threshold above every value; the report is attacked by contract
    const IsolationVerdict v = csr_isolate(report_with_saliency(sal), 2.0, 3);
    EXPECT_EQ(v.attacked_slots, std::vector<int>{11});
}

// ---------------------------------------------------------------------------
// isolation_recall
// ---------------------------------------------------------------------------

TEST(IsolationRecall, ExactMatchesOnly) {
    const std::vector<std::vector<int>> verdicts = {{17}, {17, 18}, {20, 21}, {21, 20}};
    const std::vector<std::vector<int>> planted = {{17}, {17}, {20, 21}, {20, 21}};
    const std::vector<double> magnitudes = {0.01, 0.01, 0.04, 0.04};
    const auto buckets = isolation_recall(verdicts, planted, magnitudes);
    ASSERT_EQ(buckets.size(), 2u);
    EXPECT_DOUBLE_EQ(buckets[0].magnitude, 0.01);
    EXPECT_EQ(buckets[0].attacked, 2);
    EXPECT_EQ(buckets[0].detected, 1);   // the superset counts as a miss
    EXPECT_EQ(buckets[1].detected, 2);   // order inside the verdict is irrelevant
    EXPECT_DOUBLE_EQ(buckets[1].recall(), 1.0);
}

TEST(IsolationRecall, HandCountedMixedBucket) {
    // ten cases at one magnitude: 6 exact, 2 supersets, 1 empty, 1 wrong slot
    std::vector<std::vector<int>> verdicts = {{1},    {2},     {3}, {4},  {5}, {6},
                                              {7, 8}, {9, 10}, {},  {40}};
    std::vector<std::vector<int>> planted = {{1}, {2}, {3},  {4},  {5}, {6},
                                             {7}, {9}, {11}, {12}};
    std::vector<double> magnitudes(10, 0.02);
    const auto buckets = isolation_recall(verdicts, planted, magnitudes);
    ASSERT_EQ(buckets.size(), 1u);
    EXPECT_EQ(buckets[0].attacked, 10);
    EXPECT_EQ(buckets[0].detected, 6);
    EXPECT_DOUBLE_EQ(buckets[0].recall(), 0.6);
}

TEST(IsolationRecall, LengthMismatchRejected) {
    EXPECT_THROW(isolation_recall({{1}}, {{1}, {2}}, {0.1, 0.1}), std::invalid_argument);
}
