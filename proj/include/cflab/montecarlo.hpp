#pragma once

// Monte Carlo sampling of the crest factor and comparison of empirical tails
// against the four concentration bounds.

#include "cflab/bounds.hpp"
#include "cflab/ofdm.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace cflab {

struct SimulationConfig {
    static constexpr std::size_t kMinTrials = 100;
    static constexpr double kDefaultCostBudget = 1e11;

    std::size_t n = 1;
    Constellation constellation = Constellation::psk(4);
    std::size_t trials = 100'000;
    std::uint64_t seed = 1;
    std::size_t oversampling = SignalParams::kDefaultOversampling;
    std::vector<double> alphas;
    std::size_t workers = 1;           // 0 = hardware concurrency
    double cost_budget = kDefaultCostBudget;  // limit on trials * n * oversampling

    void validate() const;
    SignalParams signal_params() const { return {n, oversampling}; }
};

struct CfSample {
    std::vector<double> values;   // indexed by trial
    double mean = 0.0;
    double median = 0.0;          // lower median
    double variance = 0.0;        // unbiased
    double min = 0.0;
    double max = 0.0;
    std::map<double, double> quantiles;

    /// Summary statistics of `values`, in trial order.
    static CfSample from_values(std::vector<double> values);
};

/// Probabilities reported in CfSample::quantiles.
inline constexpr double kReportedQuantiles[] = {0.01, 0.05, 0.1, 0.25, 0.5,
                                                0.75, 0.9, 0.95, 0.99};

/// Lower empirical quantile: the ceil(p N)-th smallest value.
double empirical_quantile(std::span<const double> sorted, double probability);

/// Trial k uses the stream derive_seed(seed, {k}); results are bitwise
/// identical for any worker count.
CfSample run_cf_simulation(const SimulationConfig& config);

struct TailEstimate {
    double probability = 0.0;
    double standard_error = 0.0;
};

/// Fraction of values with |value - center| >= alpha and its binomial
/// standard error.
TailEstimate empirical_tail(const CfSample& sample, double center, double alpha);

struct TailRecord {
    double alpha = 0.0;
    TailEstimate mean_tail;
    TailEstimate median_tail;
    OfdmBounds bounds;
    bool azuma_violated = false;
    bool refined_violated = false;
    bool mcdiarmid_violated = false;
    bool talagrand_violated = false;

    bool any_violation() const
    {
        return azuma_violated || refined_violated || mcdiarmid_violated || talagrand_violated;
    }
};

struct TailReport {
    static constexpr double kSlackStandardErrors = 3.0;

    double mean_center = 0.0;
    double median_center = 0.0;
    std::vector<TailRecord> records;

    std::size_t violation_count() const;
};

/// Mean-centred tails against the Azuma, refined and McDiarmid bounds and the
/// median-centred tail against Talagrand's, all in capped form. A violation
/// is an empirical tail above capped bound + 3 standard errors.
TailReport compare_bounds(const CfSample& sample, std::span<const double> alphas,
                          const SymbolBoundModel& model = {});

struct GapReport {
    double gap = 0.0;
    double bound = 0.0;
    bool satisfied = true;
};

/// |mean - median| against 4 sigma sqrt(pi) with sigma = 2r.
GapReport median_mean_gap(const CfSample& sample, const SymbolBoundModel& model = {});

struct ScalingRow {
    std::size_t n = 0;
    double mean_cf = 0.0;
    double median_cf = 0.0;
    std::optional<double> ratio_ln;     // mean / sqrt(ln n); empty for n = 1
    std::optional<double> ratio_log2;   // mean / sqrt(log2 n); empty for n = 1
    std::optional<double> band_half_width;   // c ln ln n / sqrt(ln n), c = 2.5
    std::optional<bool> within_band;
};

struct ScalingTable {
    static constexpr double kBandConstant = 2.5;

    std::vector<ScalingRow> rows;
    bool mean_nondecreasing = true;
    bool mean_strictly_increasing = true;

    /// (max - min) / min of the ln-ratio column over rows where it exists.
    double ratio_ln_spread() const;
};

ScalingTable scaling_study(std::span<const std::size_t> n_list, const SimulationConfig& base);

} // namespace cflab
