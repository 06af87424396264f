#pragma once

// Doob martingale Y_i = E[CF_n | X_0..X_{i-1}], i = 0..n, of the OFDM crest
// factor under the uniform product measure on a constellation, computed
// exactly by enumeration or estimated by nested Monte Carlo.

#include "cflab/ofdm.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cflab {

enum class TraceMode { Exact, MonteCarlo };

struct DoobTrace {
    TraceMode mode = TraceMode::Exact;
    std::size_t inner_samples = 0;              // MonteCarlo only
    std::vector<double> values;                 // Y_0..Y_n
    std::vector<double> standard_errors;        // per value; zeros in Exact mode
    std::vector<double> increments;             // Y_i - Y_{i-1}, i = 1..n
    std::vector<double> cond_second_moments;    // E[(Y_i - Y_{i-1})^2 | F_{i-1}]
};

/// Default cap on M^n for exact enumeration.
inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Enumeration cap, overridable through the CF_LAB_MAX_ENUM environment
/// variable.
std::uint64_t enumeration_cap();

/// M^n, saturating at UINT64_MAX.
std::uint64_t codeword_count(std::size_t order, std::size_t n);

struct ExhaustiveReport {
    std::uint64_t codewords = 0;
    double expected_cf = 0.0;
    double max_tower_error = 0.0;
    double max_increment = 0.0;
    double increment_bound = 0.0;
    double max_second_moment = 0.0;
    double second_moment_bound = 0.0;
    std::uint64_t increment_violations = 0;
    std::uint64_t second_moment_violations = 0;
    std::uint64_t tower_violations = 0;

    static constexpr double kTowerTolerance = 1e-10;

    bool satisfied() const
    {
        return increment_violations == 0 && second_moment_violations == 0 &&
               tower_violations == 0;
    }
};

/// Crest factor of every codeword in C^n, indexed in base M with X_0 as the
/// most significant digit, so each revealed prefix owns a contiguous block.
class CodewordEnumeration {
public:
    CodewordEnumeration(const Constellation& constellation, const SignalParams& params,
                        std::size_t workers = 1, std::uint64_t cap = enumeration_cap());

    const Constellation& constellation() const { return constellation_; }
    const SignalParams& params() const { return params_; }
    std::span<const double> crest_factors() const { return cf_; }

    /// E[CF | X_0..X_{k-1} = prefix], averaged over all M^{n-k} completions.
    double conditional_mean(std::span<const std::size_t> prefix) const;

    /// E[(Y_i - Y_{i-1})^2 | X_0..X_{i-2} = prefix] with i = prefix.size() + 1.
    double conditional_second_moment(std::span<const std::size_t> prefix) const;

    DoobTrace trace(const Codeword& codeword) const;

    /// Checks the tower property, the jump bound 2r/sqrt(n) and the
    /// conditional second moment bound s2/n on every edge of the prefix tree,
    /// which covers every step of every codeword's trace.
    ExhaustiveReport verify() const;

private:
    std::vector<std::size_t> indices_of(const Codeword& codeword) const;
    std::uint64_t block_offset(std::span<const std::size_t> prefix) const;

    Constellation constellation_;
    SignalParams params_;
    std::vector<double> cf_;
};

DoobTrace exact_doob_trace(const Constellation& constellation, const Codeword& codeword,
                           const SignalParams& params);

struct ConditionalEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Monte Carlo estimate of E[CF | X_0..X_{k-1} = prefix] from `samples`
/// uniform completions; sample s uses the stream derive_seed(seed, {s}).
ConditionalEstimate mc_conditional_mean(const Constellation& constellation,
                                        std::span<const std::size_t> prefix,
                                        const SignalParams& params, std::size_t samples,
                                        std::uint64_t seed, std::size_t workers = 1);

/// Each Y_i is the average crest factor over `inner_samples` i.i.d.
/// completions of the revealed prefix. The conditional second moment at step
/// i is estimated from the M sibling estimates of Y_i around Y_{i-1}.
/// Completion streams are seeded from (seed, step, symbol, sample), so the
/// result does not depend on `workers`. Y_n is the exact crest factor.
DoobTrace mc_doob_trace(const Constellation& constellation, const Codeword& codeword,
                        const SignalParams& params, std::size_t inner_samples,
                        std::uint64_t seed, std::size_t workers = 1);

inline constexpr std::size_t kMinInnerSamples = 1000;

struct BoundedDifferenceReport {
    double max_increment = 0.0;
    double bound = 0.0;
    bool satisfied = true;
};

/// max_i |Y_i - Y_{i-1}| against 2 r / sqrt(n). Monte Carlo traces get a
/// slack of 4 combined standard errors per step.
BoundedDifferenceReport verify_bounded_differences(const DoobTrace& trace, std::size_t n,
                                                   double peak_amplitude = 1.0);

double exact_conditional_second_moment(const Constellation& constellation,
                                       std::span<const Symbol> prefix,
                                       const SignalParams& params);

/// (4/M) sum_{l=1}^{M-1} sin^2(pi l / M).
double psk_variance_identity(std::size_t order);

/// (1/M) sum_p |fixed - p|^2 over the constellation points.
double pairwise_symbol_second_moment(const Constellation& constellation, const Symbol& fixed);

/// Peak amplitude and worst-case pairwise second moment of a constellation.
SymbolBoundModel symbol_bound_model(const Constellation& constellation);

} // namespace cflab
