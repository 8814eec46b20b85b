// Forecast rectification: the six mitigation methods (single / double
// cluster and interpolation bases, fixed / adaptive rectification), the
// per-iteration correction state machine and the run_dr hook wiring
// detector -> isolator -> correction.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drsim/detector.hpp"
#include "drsim/engine.hpp"
#include "drsim/isolator.hpp"

namespace drsim {

enum class MitigationBasis { SingleCluster, DoubleCluster, Interpolation };
enum class Rectification { Fixed, Adaptive };

struct MitigationMethod {
    MitigationBasis basis = MitigationBasis::SingleCluster;
    Rectification rectification = Rectification::Fixed;
};

// Methods 1..6: single/fixed, single/adaptive, double/fixed, double/adaptive,
// interpolation/fixed, interpolation/adaptive.
inline MitigationMethod mitigation_method(int number) {
    switch (number) {
        case 1: return {MitigationBasis::SingleCluster, Rectification::Fixed};
        case 2: return {MitigationBasis::SingleCluster, Rectification::Adaptive};
        case 3: return {MitigationBasis::DoubleCluster, Rectification::Fixed};
        case 4: return {MitigationBasis::DoubleCluster, Rectification::Adaptive};
        case 5: return {MitigationBasis::Interpolation, Rectification::Fixed};
        case 6: return {MitigationBasis::Interpolation, Rectification::Adaptive};
        default: throw std::invalid_argument("mitigation method must be 1..6");
    }
}

inline int mitigation_method_number(const MitigationMethod& m) {
    const int base = m.basis == MitigationBasis::SingleCluster   ? 1
                     : m.basis == MitigationBasis::DoubleCluster ? 3
                                                                 : 5;
    return base + (m.rectification == Rectification::Adaptive ? 1 : 0);
}

struct MitigationState {
    std::vector<double> legitimate_pattern;   // cp
    std::vector<int> attacked_slots;          // frozen at first detection
    std::vector<double> previous_forecast;    // df' (received, pre-correction)
    MitigationMethod method;
    std::vector<std::string> warnings;
};

// Least-squares slope/intercept over the window slots preceding the earliest
// attacked slot; single-point extrapolation is degenerate, hence the window.
inline constexpr int kInterpolationWindow = 4;

namespace detail {

inline std::vector<double> extrapolated_pattern(const std::vector<double>& forecast,
                                                int earliest_attacked) {
    const int lo = std::max(0, earliest_attacked - kInterpolationWindow);
    const int n = earliest_attacked - lo;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int t = lo; t < earliest_attacked; ++t) {
        sx += t;
        sy += forecast[static_cast<std::size_t>(t)];
        sxx += static_cast<double>(t) * t;
        sxy += t * forecast[static_cast<std::size_t>(t)];
    }
    const double denom = n * sxx - sx * sx;
    double slope = 0.0, intercept = sy / n;
    if (denom != 0.0) {
        slope = (n * sxy - sx * sy) / denom;
        intercept = (sy - slope * sx) / n;
    }
    std::vector<double> pattern = forecast;
    for (std::size_t t = static_cast<std::size_t>(earliest_attacked); t < forecast.size(); ++t)
        pattern[t] = std::max(0.0, intercept + slope * static_cast<double>(t));
    return pattern;
}

}  // namespace detail

// Initial-iteration correction. Only the attacked slots are ever written;
// negative rectified values are clipped to zero.
inline std::pair<std::vector<double>, MitigationState> correct_initial(
    const std::vector<double>& attacked, const std::vector<int>& slots,
    const MitigationMethod& method, const ClusterModel& model) {
    if (slots.empty()) throw std::invalid_argument("correct_initial: no attacked slots");
    for (int s : slots)
        if (s < 0 || s >= static_cast<int>(attacked.size()))
            throw std::invalid_argument("correct_initial: slot out of range");

    MitigationState state;
    state.method = method;
    state.attacked_slots = slots;
    std::sort(state.attacked_slots.begin(), state.attacked_slots.end());

    MitigationBasis basis = method.basis;
    const int earliest = state.attacked_slots.front();
    if (basis == MitigationBasis::Interpolation && earliest < 2) {
        state.warnings.push_back("interpolation basis needs history before slot " +
                                 std::to_string(earliest) + "; fell back to single cluster");
        basis = MitigationBasis::SingleCluster;
    }
    if (basis != MitigationBasis::Interpolation && !model.fitted())
        throw std::invalid_argument("correct_initial: cluster basis needs a fitted model");

    std::vector<double> rdf = attacked;
    auto overwrite = [&](const std::vector<double>& pattern) {
        for (int s : state.attacked_slots)
            rdf[static_cast<std::size_t>(s)] = std::max(0.0, pattern[static_cast<std::size_t>(s)]);
    };

    if (basis == MitigationBasis::Interpolation) {
        state.legitimate_pattern = detail::extrapolated_pattern(attacked, earliest);
        overwrite(state.legitimate_pattern);
    } else {
        const auto [first, d1] = closest_centroid(attacked, model);
        (void)d1;
        state.legitimate_pattern = model.centroids[static_cast<std::size_t>(first)];
        overwrite(state.legitimate_pattern);
        if (basis == MitigationBasis::DoubleCluster) {
            const auto [second, d2] = closest_centroid(rdf, model);
            (void)d2;
            state.legitimate_pattern = model.centroids[static_cast<std::size_t>(second)];
            overwrite(state.legitimate_pattern);
        }
    }

    state.previous_forecast = attacked;
    return {rdf, state};
}

// Correction during iterations >= 1. Fixed pins the attacked slots to cp;
// adaptive shifts cp by the inter-iteration movement of the received
// forecast (delta = previous - current) and then adopts the corrected
// forecast as the next legitimate pattern.
inline std::vector<double> correct_iteration(const std::vector<double>& current,
                                             MitigationState& state) {
    if (state.attacked_slots.empty())
        throw std::invalid_argument("correct_iteration: state not initialised");
    if (current.size() != state.legitimate_pattern.size())
        throw std::invalid_argument("correct_iteration: length mismatch with state");

    std::vector<double> rdf = current;
    for (int s : state.attacked_slots) {
        const std::size_t i = static_cast<std::size_t>(s);
        if (state.method.rectification == Rectification::Fixed) {
            rdf[i] = std::max(0.0, state.legitimate_pattern[i]);
        } else {
            const double delta = state.previous_forecast[i] - current[i];
            rdf[i] = std::max(0.0, state.legitimate_pattern[i] - delta);
        }
    }
    if (state.method.rectification == Rectification::Adaptive) {
        state.legitimate_pattern = rdf;
        state.previous_forecast = current;
    }
    return rdf;
}

// ---------------------------------------------------------------------------
// MAPE
// ---------------------------------------------------------------------------

struct MapeResult {
    double value = 0.0;       // percent
    int excluded_slots = 0;   // slots with zero attack-free demand
};

inline MapeResult mape(const std::vector<double>& rectified, const std::vector<double>& attack_free) {
    if (rectified.size() != attack_free.size()) throw std::invalid_argument("mape: length mismatch");
    if (rectified.empty()) throw std::invalid_argument("mape: empty input");
    double sum = 0.0;
    int used = 0, excluded = 0;
    for (std::size_t i = 0; i < rectified.size(); ++i) {
        if (attack_free[i] > 0.0) {
            sum += std::abs(rectified[i] - attack_free[i]) / attack_free[i];
            ++used;
        } else {
            ++excluded;
        }
    }
    if (used == 0) throw std::invalid_argument("mape: no non-zero reference slots");
    return {sum / used * 100.0, excluded};
}

// ---------------------------------------------------------------------------
// run_dr hook
// ---------------------------------------------------------------------------

// Classifies the iteration's aggregate; on the first flagged iteration
// isolates the attacked slots (frozen from then on) and applies the initial
// correction, afterwards the per-iteration correction. Unflagged forecasts
// pass through untouched.
class MitigationHook : public RoundHook {
  public:
    using IsolateFn =
        std::function<IsolationVerdict(const std::vector<double>&, const DetectionReport&)>;

    MitigationHook(MitigationMethod method, const ClusterModel& model, CsrConfig csr_cfg,
                   IsolateFn isolate)
        : method_(method), model_(model), csr_cfg_(csr_cfg), isolate_(std::move(isolate)) {}

    std::vector<double> apply(const std::vector<double>& forecast, int iteration) override {
        (void)iteration;
        const DetectionReport report = csr_classify(forecast, model_, csr_cfg_);
        if (report.verdict == Verdict::Normal) return forecast;
        if (state_) return correct_iteration(forecast, *state_);

        const IsolationVerdict verdict = isolate_(forecast, report);
        if (verdict.attacked_slots.empty()) {
            diagnostics_.push_back("detector flagged forecast but isolator returned no slots");
            return forecast;
        }
        auto [rdf, state] = correct_initial(forecast, verdict.attacked_slots, method_, model_);
        state_ = std::move(state);
        isolation_ = verdict;
        return rdf;
    }

    bool triggered() const { return state_.has_value(); }
    const std::optional<MitigationState>& state() const { return state_; }
    const std::optional<IsolationVerdict>& isolation() const { return isolation_; }
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

  private:
    MitigationMethod method_;
    const ClusterModel& model_;
    CsrConfig csr_cfg_;
    IsolateFn isolate_;
    std::optional<MitigationState> state_;
    std::optional<IsolationVerdict> isolation_;
    std::vector<std::string> diagnostics_;
};

}  // namespace drsim
