#pragma once

// Closed-form concentration inequalities for bounded-difference martingales
// and functions of independent symbols, plus their OFDM crest-factor
// specializations.
//
// All functions are pure and thread-safe. Invalid arguments raise
// std::domain_error (or std::invalid_argument for shape mismatches).

#include "cflab/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cflab {

/// Right-hand side of a tail inequality. `raw` is the closed form as written
/// (it may exceed 1); `capped` is min(raw, 1) for use as a probability.
/// `asymptotic` marks leading-order values whose finite-n correction is not
/// included.
struct BoundValue {
    double raw = 0.0;
    double capped = 0.0;
    bool asymptotic = false;

    static BoundValue from_raw(double raw, bool asymptotic = false);
};

/// Bounded-difference martingale parameters: |X_k - X_{k-1}| <= d and
/// E[(X_k - X_{k-1})^2 | F_{k-1}] <= sigma2 for k = 1..n.
struct MartingaleParams {
    double d = 1.0;
    double sigma2 = 0.0;
    std::size_t n = 1;

    void validate() const;
    double gamma() const { return sigma2 / (d * d); }
    double delta(double alpha) const { return alpha / d; }
};

/// Nonnegative weight vector with unit Euclidean norm.
class WeightVector {
public:
    static constexpr double kNormTolerance = 1e-12;

    explicit WeightVector(std::vector<double> weights);
    static WeightVector uniform(std::size_t n);

    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return weights_.size(); }

private:
    std::vector<double> weights_;
};

/// Binary relative entropy D(p||q) in nats. Returns +inf when q is 0 or 1
/// and p differs from q.
double kl_divergence(double p, double q);

/// 2 exp(-r^2 / (2 sum d_k^2)).
BoundValue azuma_bound(double r, std::span<const double> d_list);

/// Bound on P(|X_n - X_0| >= alpha n) using the conditional variance:
/// 2 exp(-n D((delta+gamma)/(1+gamma) || gamma/(1+gamma))), and exactly 0 for
/// delta > 1.
BoundValue refined_azuma_bound(double alpha, const MartingaleParams& params);

/// Leading term 2 exp(-delta^2 / (2 gamma)) of the bound on
/// P(|X_n - X_0| >= alpha sqrt(n)). Always flagged asymptotic.
BoundValue refined_azuma_asymptotic(double alpha, const MartingaleParams& params);

/// 2 exp(-2 alpha^2 / sum c_k^2).
BoundValue mcdiarmid_bound(double alpha, std::span<const double> c_list);

/// Median-centred bound 4 exp(-alpha^2 / (4 sigma^2)).
BoundValue talagrand_bound(double alpha, double sigma);

/// |E f - median| <= 4 sigma sqrt(pi), obtained by integrating the
/// median-centred tail bound.
double median_mean_gap_bound(double sigma);

/// Per-symbol quantities that drive the OFDM specializations. For M-PSK the
/// peak amplitude is 1 and the worst-case pairwise second moment
/// max_x E|x - X'|^2 is 2.
struct SymbolBoundModel {
    double peak_amplitude = 1.0;
    double pair_second_moment = 2.0;
};

struct OfdmBounds {
    BoundValue azuma;
    BoundValue refined;
    BoundValue mcdiarmid;
    BoundValue talagrand;
};

/// Exponent coefficients c in lead * exp(-c alpha^2) for each OFDM bound.
struct OfdmExponents {
    double azuma = 0.0;
    double refined = 0.0;
    double mcdiarmid = 0.0;
    double talagrand = 0.0;
};

/// Crest-factor bounds around the mean (Azuma, refined, McDiarmid) and the
/// median (Talagrand) for unit-modulus symbols.
OfdmBounds ofdm_bounds(double alpha);
OfdmBounds ofdm_bounds(double alpha, const SymbolBoundModel& model);

OfdmExponents ofdm_exponents(const SymbolBoundModel& model = {});

std::size_t hamming_distance(std::span<const Symbol> x, std::span<const Symbol> y);

/// sum_i a_i [x_i != y_i].
double weighted_distance(const WeightVector& a, std::span<const Symbol> x,
                         std::span<const Symbol> y);

} // namespace cflab
