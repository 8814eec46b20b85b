#include <gtest/gtest.h>

#include <cmath>

#include "drsim/mitigator.hpp"

using namespace drsim;

namespace {

// Two well-separated centroids; slot 5 is where attacks land in these tests.
ClusterModel two_centroid_model() {
    ClusterModel model;
    model.k = 2;
    std::vector<double> a(8), b(8);
    for (std::size_t p = 0; p < 8; ++p) {
        a[p] = 10.0 + static_cast<double>(p);
        b[p] = 40.0 - static_cast<double>(p);
    }
    model.centroids = {a, b};
    model.database.push_back({0, 0, a});
    model.database.push_back({1, 1, b});
    return model;
}

}  // namespace

TEST(MitigationMethod, TableMappingRoundTrips) {
    for (int n = 1; n <= 6; ++n) EXPECT_EQ(mitigation_method_number(mitigation_method(n)), n);
    EXPECT_EQ(mitigation_method(1).basis, MitigationBasis::SingleCluster);
    EXPECT_EQ(mitigation_method(1).rectification, Rectification::Fixed);
    EXPECT_EQ(mitigation_method(4).basis, MitigationBasis::DoubleCluster);
    EXPECT_EQ(mitigation_method(4).rectification, Rectification::Adaptive);
    EXPECT_EQ(mitigation_method(6).basis, MitigationBasis::Interpolation);
    EXPECT_EQ(mitigation_method(6).rectification, Rectification::Adaptive);
    EXPECT_THROW(mitigation_method(0), std::invalid_argument);
    EXPECT_THROW(mitigation_method(7), std::invalid_argument);
}

TEST(CorrectInitial, SingleClusterRestoresCentroidValues) {
    const ClusterModel model = two_centroid_model();
    std::vector<double> attacked = model.centroids[0];
    attacked[5] += 9.0;
    const auto [rdf, state] = correct_initial(attacked, {5}, mitigation_method(1), model);
    EXPECT_DOUBLE_EQ(rdf[5], model.centroids[0][5]);
    for (std::size_t p = 0; p < 8; ++p)
        if (p != 5) EXPECT_DOUBLE_EQ(rdf[p], attacked[p]);
    EXPECT_EQ(state.attacked_slots, std::vector<int>{5});
}

// The pulse drags the first nearest-centroid lookup to the wrong cluster;
// the second lookup on the corrected forecast re-assigns it, and the
// rectified forecast moves strictly closer to the genuine one.
TEST(CorrectInitial, DoubleClusterRecoversFromMisassignment) {
    const ClusterModel model = two_centroid_model();
    const std::vector<double> genuine = model.centroids[0];
    std::vector<double> attacked = genuine;
    attacked[5] += 120.0;   // large enough to flip the nearest centroid

    const auto [first_idx, d1] = closest_centroid(attacked, model);
    (void)d1;
    ASSERT_EQ(first_idx, 1);   // misassigned by construction

    const auto [rdf_single, s1] = correct_initial(attacked, {5}, mitigation_method(1), model);
    const auto [rdf_double, s2] = correct_initial(attacked, {5}, mitigation_method(3), model);
    EXPECT_DOUBLE_EQ(rdf_single[5], model.centroids[1][5]);
    EXPECT_DOUBLE_EQ(rdf_double[5], model.centroids[0][5]);
    EXPECT_LT(squared_distance(rdf_double, genuine), squared_distance(rdf_single, genuine));
    EXPECT_EQ(s2.legitimate_pattern, model.centroids[0]);
}

TEST(CorrectInitial, InterpolationContinuesTheSlope) {
    const ClusterModel model = two_centroid_model();
    std::vector<double> attacked = {1.0, 2.0, 3.0, 4.0, 5.0, 99.0, 7.0, 8.0};
    const auto [rdf, state] = correct_initial(attacked, {5}, mitigation_method(5), model);
    EXPECT_NEAR(rdf[5], 6.0, 1e-9);
    for (std::size_t p = 0; p < 8; ++p)
        if (p != 5) EXPECT_DOUBLE_EQ(rdf[p], attacked[p]);
    EXPECT_TRUE(state.warnings.empty());
}

TEST(CorrectInitial, InterpolationWithoutHistoryFallsBackToCluster) {
    const ClusterModel model = two_centroid_model();
    std::vector<double> attacked = model.centroids[0];
    attacked[1] += 9.0;
    const auto [rdf, state] = correct_initial(attacked, {1}, mitigation_method(5), model);
    EXPECT_DOUBLE_EQ(rdf[1], model.centroids[0][1]);
    ASSERT_EQ(state.warnings.size(), 1u);
    EXPECT_NE(state.warnings[0].find("fell back"), std::string::npos);
}

TEST(CorrectInitial, NegativeExtrapolationClipsToZero) {
    const ClusterModel model = two_centroid_model();
    std::vector<double> attacked = {8.0, 6.0, 4.0, 2.0, 0.5, 70.0, 1.0, 1.0};
    const auto [rdf, state] = correct_initial(attacked, {5}, mitigation_method(5), model);
    (void)state;
    EXPECT_GE(rdf[5], 0.0);   // the fitted slope extrapolates below zero
}

TEST(CorrectInitial, EmptySlotsRejected) {
    const ClusterModel model = two_centroid_model();
    EXPECT_THROW(correct_initial(model.centroids[0], {}, mitigation_method(1), model),
                 std::invalid_argument);
}

TEST(CorrectIteration, ZeroDeltaKeepsPattern) {
    const ClusterModel model = two_centroid_model();
    std::vector<double> attacked = model.centroids[0];
    attacked[5] += 9.0;
    auto [rdf0, state] = correct_initial(attacked, {5}, mitigation_method(2), model);
    (void)rdf0;
    const double cp_before = state.legitimate_pattern[5];
    const auto rdf = correct_iteration(attacked, state);   // current == previous
    EXPECT_DOUBLE_EQ(rdf[5], cp_before);
    EXPECT_DOUBLE_EQ(state.legitimate_pattern[5], cp_before);
}

TEST(CorrectIteration, FixedPinsAttackedSlotAcrossIterations) {
    const ClusterModel model = two_centroid_model();
    std::vector<double> attacked = model.centroids[0];
    attacked[5] += 9.0;
    auto [rdf0, state] = correct_initial(attacked, {5}, mitigation_method(1), model);
    const double pin = rdf0[5];
    std::vector<double> current = attacked;
    for (int iter = 1; iter <= 5; ++iter) {
        current[5] += 1.0;    // optimiser movement in the attacked slot
        current[2] += 0.5;    // and elsewhere
        const auto rdf = correct_iteration(current, state);
        EXPECT_DOUBLE_EQ(rdf[5], pin) << "iteration " << iter;
        EXPECT_DOUBLE_EQ(rdf[2], current[2]);
    }
}

// Hand trace of the adaptive branch: genuine demand drops by 2 between
// iterations, so the rectified value drops by 2 as well.
TEST(CorrectIteration, AdaptiveTracksGenuineMovement) {
    const ClusterModel model = two_centroid_model();
    const double fd = 9.0;
    std::vector<double> genuine0 = model.centroids[0];
    std::vector<double> attacked0 = genuine0;
    attacked0[5] += fd;
    auto [rdf0, state] = correct_initial(attacked0, {5}, mitigation_method(2), model);
    const double base = rdf0[5];

    std::vector<double> genuine1 = genuine0;
    genuine1[5] -= 2.0;
    std::vector<double> attacked1 = genuine1;
    attacked1[5] += fd;   // stationary attack
    const auto rdf1 = correct_iteration(attacked1, state);
    EXPECT_NEAR(rdf1[5], base - 2.0, 1e-12);

    // and it telescopes across a second iteration
    std::vector<double> genuine2 = genuine1;
    genuine2[5] += 0.75;
    std::vector<double> attacked2 = genuine2;
    attacked2[5] += fd;
    const auto rdf2 = correct_iteration(attacked2, state);
    EXPECT_NEAR(rdf2[5], base - 2.0 + 0.75, 1e-12);
}

TEST(CorrectIteration, LengthMismatchRejected) {
    const ClusterModel model = two_centroid_model();
    std::vector<double> attacked = model.centroids[0];
    attacked[5] += 9.0;
    auto [rdf0, state] = correct_initial(attacked, {5}, mitigation_method(1), model);
    (void)rdf0;
    EXPECT_THROW(correct_iteration(std::vector<double>(5, 1.0), state), std::invalid_argument);
}

TEST(Mape, Examples) {
    const std::vector<double> base = {1.0, 2.0, 4.0};
    EXPECT_DOUBLE_EQ(mape(base, base).value, 0.0);
    const std::vector<double> scaled = {1.1, 2.2, 4.4};
    EXPECT_NEAR(mape(scaled, base).value, 10.0, 1e-9);
}

TEST(Mape, ZeroSlotsExcludedWithCount) {
    const std::vector<double> reference = {0.0, 2.0, 4.0};
    const std::vector<double> rectified = {5.0, 2.0, 5.0};
    const MapeResult r = mape(rectified, reference);
    EXPECT_EQ(r.excluded_slots, 1);
    EXPECT_NEAR(r.value, (0.0 + 0.25) / 2.0 * 100.0, 1e-12);
}

TEST(Mape, MatchesDirectFormula) {
    std::vector<double> rect(48), free(48);
    for (int i = 0; i < 48; ++i) {
        free[static_cast<std::size_t>(i)] = 2.0 + 0.1 * i;
        rect[static_cast<std::size_t>(i)] = 2.0 + 0.1 * i + ((i % 3) - 1) * 0.05;
    }
    double expected = 0.0;
    for (int i = 0; i < 48; ++i)
        expected += std::abs(rect[static_cast<std::size_t>(i)] - free[static_cast<std::size_t>(i)]) /
                    free[static_cast<std::size_t>(i)];
    expected = expected / 48.0 * 100.0;
    EXPECT_NEAR(mape(rect, free).value, expected, 1e-12);
}

// ---------------------------------------------------------------------------
// hook
// ---------------------------------------------------------------------------

TEST(MitigationHook, CleanForecastPassesThrough) {
    const ClusterModel model = two_centroid_model();
    CsrConfig cfg;
    cfg.threshold = 1.0;
    MitigationHook hook(mitigation_method(2), model, cfg,
                        [](const std::vector<double>&, const DetectionReport& r) {
                            return csr_isolate(r, 1.0, 3);
                        });
    const std::vector<double> forecast = model.centroids[0];
    for (int iter = 0; iter < 3; ++iter) EXPECT_EQ(hook.apply(forecast, iter), forecast);
    EXPECT_FALSE(hook.triggered());
}

TEST(MitigationHook, AttackedForecastGetsIsolatedAndCorrected) {
    const ClusterModel model = two_centroid_model();
    CsrConfig cfg;
    cfg.threshold = 3.0;
    MitigationHook hook(mitigation_method(1), model, cfg,
                        [&cfg](const std::vector<double>&, const DetectionReport& r) {
                            return csr_isolate(r, cfg.threshold, 3);
                        });
    std::vector<double> attacked = model.centroids[0];
    attacked[5] += 20.0;
    const auto rdf = hook.apply(attacked, 0);
    EXPECT_TRUE(hook.triggered());
    ASSERT_TRUE(hook.isolation().has_value());
    EXPECT_EQ(hook.isolation()->attacked_slots, std::vector<int>{5});
    EXPECT_DOUBLE_EQ(rdf[5], model.centroids[0][5]);

    // later iterations run the per-iteration branch on the frozen slots
    attacked[5] += 1.0;
    const auto rdf2 = hook.apply(attacked, 1);
    EXPECT_DOUBLE_EQ(rdf2[5], model.centroids[0][5]);
}

TEST(MitigationHook, EmptyIsolationPassesThroughWithDiagnostic) {
    const ClusterModel model = two_centroid_model();
    CsrConfig cfg;
    cfg.threshold = 3.0;
    MitigationHook hook(mitigation_method(1), model, cfg,
                        [](const std::vector<double>&, const DetectionReport&) {
                            IsolationVerdict v;
                            v.method = IsolationMethod::Lof;
                            return v;   // no slots
                        });
    std::vector<double> attacked = model.centroids[0];
    attacked[5] += 20.0;
    EXPECT_EQ(hook.apply(attacked, 0), attacked);
    EXPECT_FALSE(hook.triggered());
    ASSERT_EQ(hook.diagnostics().size(), 1u);
}
