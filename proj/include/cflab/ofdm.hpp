#pragma once

// OFDM baseband symbol s(t) = n^{-1/2} sum_i X_i exp(j 2 pi i t) on t in [0, 1]
// and its crest factor max_t |s(t)|.

#include "cflab/bounds.hpp"
#include "cflab/rng.hpp"
#include "cflab/types.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cflab {

enum class Modulation { Psk, SquareQam };

class Constellation {
public:
    /// M-PSK with points exp(j (2l+1) pi / M), l = 0..M-1.
    static Constellation psk(std::size_t order);
    /// Square M-QAM grid scaled to unit average energy.
    static Constellation square_qam(std::size_t order);
    /// Parses "pskM", "qamM", "bpsk" or "qpsk".
    static Constellation parse(std::string_view name);

    Modulation kind() const { return kind_; }
    std::size_t order() const { return points_.size(); }
    std::span<const Symbol> points() const { return points_; }
    const Symbol& point(std::size_t index) const { return points_.at(index); }

    std::optional<std::size_t> index_of(const Symbol& symbol) const;
    bool contains(const Symbol& symbol) const { return index_of(symbol).has_value(); }

    double peak_amplitude() const;
    std::string name() const;

private:
    Constellation(Modulation kind, std::vector<Symbol> points);

    Modulation kind_;
    std::vector<Symbol> points_;
};

/// Length-n vector of data symbols.
class Codeword {
public:
    explicit Codeword(std::vector<Symbol> symbols);
    static Codeword from_indices(const Constellation& constellation,
                                 std::span<const std::size_t> indices);

    std::size_t size() const { return symbols_.size(); }
    std::span<const Symbol> symbols() const { return symbols_; }
    const Symbol& operator[](std::size_t i) const { return symbols_[i]; }

private:
    std::vector<Symbol> symbols_;
};

struct SignalParams {
    static constexpr std::size_t kMinOversampling = 4;
    static constexpr std::size_t kDefaultOversampling = 16;

    std::size_t n = 1;
    std::size_t oversampling = kDefaultOversampling;

    void validate() const;
};

/// n i.i.d. symbols drawn uniformly from the constellation.
Codeword sample_codeword(const Constellation& constellation, std::size_t n, Rng& rng);

/// s(t) for t in [0, 1].
Symbol evaluate_signal(const Codeword& codeword, double t);

/// max_{0<=t<=1} |s(t)|: oversampled grid of L n points followed by
/// golden-section refinement near every grid value within 0.5% of the grid
/// peak.
double crest_factor(const Codeword& codeword, const SignalParams& params);

/// (1/n) sum |X_i|^2, the time average of |s|^2 over the symbol.
double average_power(const Codeword& codeword);

/// n^{-1/2} sum |x_i - y_i|, a uniform bound on |s_x(t) - s_y(t)|.
double signal_distance_bound(const Codeword& x, const Codeword& y);

/// Reusable peak-search workspace for one (n, L) pair. Not thread-safe; give
/// each worker its own instance.
class PeakSearcher {
public:
    static constexpr double kCandidateFraction = 0.995;
    static constexpr double kTimeTolerance = 1e-10;
    static constexpr int kMaxIterations = 200;

    explicit PeakSearcher(const SignalParams& params);
    ~PeakSearcher();
    PeakSearcher(PeakSearcher&&) noexcept;
    PeakSearcher& operator=(PeakSearcher&&) noexcept;
    PeakSearcher(const PeakSearcher&) = delete;
    PeakSearcher& operator=(const PeakSearcher&) = delete;

    const SignalParams& params() const { return params_; }

    /// Largest |s(t_k)| on the uniform grid t_k = k / (L n).
    double grid_peak(std::span<const Symbol> symbols);
    double crest_factor(std::span<const Symbol> symbols);

private:
    struct Plan;
    SignalParams params_;
    std::unique_ptr<Plan> plan_;
};

} // namespace cflab
