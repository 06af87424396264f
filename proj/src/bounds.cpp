#include "cflab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace cflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative(double value, const char* what)
{
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw std::domain_error(std::string(what) + " must be a finite nonnegative number");
    }
}

void require_positive(double value, const char* what)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::domain_error(std::string(what) + " must be a finite positive number");
    }
}

double sum_of_squares(std::span<const double> values, const char* what)
{
    if (values.empty()) {
        throw std::domain_error(std::string(what) + " must not be empty");
    }
    double total = 0.0;
    for (double v : values) {
        require_positive(v, what);
        total += v * v;
    }
    return total;
}

// p ln(p/q) with 0 ln(0/q) = 0 and p ln(p/0) = +inf.
double relative_entropy_term(double p, double q)
{
    if (p == 0.0) {
        return 0.0;
    }
    if (q == 0.0) {
        return kInf;
    }
    return p * std::log(p / q);
}

} // namespace

BoundValue BoundValue::from_raw(double raw, bool asymptotic)
{
    return BoundValue{raw, std::min(raw, 1.0), asymptotic};
}

void MartingaleParams::validate() const
{
    require_positive(d, "d");
    require_nonnegative(sigma2, "sigma2");
    if (n < 1) {
        throw std::domain_error("n must be at least 1");
    }
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights))
{
    if (weights_.empty()) {
        throw std::invalid_argument("weight vector must not be empty");
    }
    double norm2 = 0.0;
    for (double a : weights_) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw std::domain_error("weights must be finite and nonnegative");
        }
        norm2 += a * a;
    }
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
        throw std::domain_error("weights must have unit Euclidean norm");
    }
}

WeightVector WeightVector::uniform(std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("weight vector must not be empty");
    }
    return WeightVector(std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n))));
}

double kl_divergence(double p, double q)
{
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
        throw std::domain_error("kl_divergence: p and q must lie in [0, 1]");
    }
    if (p == q) {
        return 0.0;
    }
    const double d = relative_entropy_term(p, q) + relative_entropy_term(1.0 - p, 1.0 - q);
    // Rounding can push nearly-equal arguments a hair below zero.
    return std::max(d, 0.0);
}

BoundValue azuma_bound(double r, std::span<const double> d_list)
{
    require_nonnegative(r, "r");
    const double total = sum_of_squares(d_list, "d_k");
    return BoundValue::from_raw(2.0 * std::exp(-r * r / (2.0 * total)));
}

BoundValue refined_azuma_bound(double alpha, const MartingaleParams& params)
{
    require_nonnegative(alpha, "alpha");
    params.validate();
    const double gamma = params.gamma();
    const double delta = params.delta(alpha);
    if (delta > 1.0) {
        return BoundValue::from_raw(0.0);
    }
    const double p = (delta + gamma) / (1.0 + gamma);
    const double q = gamma / (1.0 + gamma);
    // p can round above 1 when delta == 1 and gamma is large.
    const double divergence = kl_divergence(std::min(p, 1.0), q);
    const double exponent = static_cast<double>(params.n) * divergence;
    return BoundValue::from_raw(2.0 * std::exp(-exponent));
}

BoundValue refined_azuma_asymptotic(double alpha, const MartingaleParams& params)
{
    require_nonnegative(alpha, "alpha");
    params.validate();
    const double gamma = params.gamma();
    if (gamma == 0.0) {
        throw SingularParametersError("refined_azuma_asymptotic: gamma = sigma2/d^2 must be positive");
    }
    const double delta = params.delta(alpha);
    return BoundValue::from_raw(2.0 * std::exp(-delta * delta / (2.0 * gamma)), true);
}

BoundValue mcdiarmid_bound(double alpha, std::span<const double> c_list)
{
    require_nonnegative(alpha, "alpha");
    const double total = sum_of_squares(c_list, "c_k");
    return BoundValue::from_raw(2.0 * std::exp(-2.0 * alpha * alpha / total));
}

BoundValue talagrand_bound(double alpha, double sigma)
{
    require_nonnegative(alpha, "alpha");
    require_positive(sigma, "sigma");
    return BoundValue::from_raw(4.0 * std::exp(-alpha * alpha / (4.0 * sigma * sigma)));
}

double median_mean_gap_bound(double sigma)
{
    require_positive(sigma, "sigma");
    return 4.0 * sigma * std::sqrt(std::numbers::pi);
}

OfdmBounds ofdm_bounds(double alpha)
{
    return ofdm_bounds(alpha, SymbolBoundModel{});
}

// Changing one symbol moves s(t) by at most 2r/sqrt(n) uniformly in t, so the
// n per-coordinate constants have sum of squares 4r^2 independent of n. The
// rescaled Doob martingale sqrt(n) Y_i has jumps <= 2r and conditional
// variance <= pair_second_moment.
OfdmBounds ofdm_bounds(double alpha, const SymbolBoundModel& model)
{
    require_nonnegative(alpha, "alpha");
    require_positive(model.peak_amplitude, "peak_amplitude");
    require_positive(model.pair_second_moment, "pair_second_moment");
    const double jump = 2.0 * model.peak_amplitude;
    const double jumps[] = {jump};
    const MartingaleParams scaled{jump, model.pair_second_moment, 1};
    return OfdmBounds{
        azuma_bound(alpha, jumps),
        refined_azuma_asymptotic(alpha, scaled),
        mcdiarmid_bound(alpha, jumps),
        talagrand_bound(alpha, jump),
    };
}

OfdmExponents ofdm_exponents(const SymbolBoundModel& model)
{
    require_positive(model.peak_amplitude, "peak_amplitude");
    require_positive(model.pair_second_moment, "pair_second_moment");
    const double jump2 = 4.0 * model.peak_amplitude * model.peak_amplitude;
    return OfdmExponents{
        1.0 / (2.0 * jump2),
        1.0 / (2.0 * model.pair_second_moment),
        2.0 / jump2,
        1.0 / (4.0 * jump2),
    };
}

std::size_t hamming_distance(std::span<const Symbol> x, std::span<const Symbol> y)
{
    if (x.size() != y.size()) {
        throw std::invalid_argument("hamming_distance: length mismatch");
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        count += (x[i] != y[i]) ? 1 : 0;
    }
    return count;
}

double weighted_distance(const WeightVector& a, std::span<const Symbol> x,
                         std::span<const Symbol> y)
{
    if (x.size() != y.size() || a.size() != x.size()) {
        throw std::invalid_argument("weighted_distance: length mismatch");
    }
    const auto w = a.weights();
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != y[i]) {
            total += w[i];
        }
    }
    return total;
}

} // namespace cflab
