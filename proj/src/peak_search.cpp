#include "cflab/ofdm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

namespace cflab {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

// |sum_i X_i z^i|^2 with z = exp(j 2 pi t); Horner keeps |z| = 1 exact.
double power_at(std::span<const Symbol> symbols, double t)
{
    const Symbol z = std::polar(1.0, 2.0 * std::numbers::pi * t);
    Symbol acc = symbols.back();
    for (std::size_t i = symbols.size() - 1; i-- > 0;) {
        acc = acc * z + symbols[i];
    }
    return std::norm(acc);
}

// Golden-section search for the maximum of power_at on [lo, hi].
double golden_section_max(std::span<const Symbol> symbols, double lo, double hi)
{
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = power_at(symbols, c);
    double fd = power_at(symbols, d);
    for (int iter = 0; iter < PeakSearcher::kMaxIterations && (b - a) > PeakSearcher::kTimeTolerance;
         ++iter) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = power_at(symbols, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = power_at(symbols, d);
        }
    }
    return std::max(fc, fd);
}

} // namespace

struct PeakSearcher::Plan {
    std::size_t size = 0;
    fftw_complex* buffer = nullptr;
    fftw_plan plan = nullptr;
    std::vector<double> grid_power;

    explicit Plan(std::size_t n)
        : size(n), grid_power(n)
    {
        std::lock_guard lock(fftw_planner_mutex());
        buffer = fftw_alloc_complex(size);
        plan = fftw_plan_dft_1d(static_cast<int>(size), buffer, buffer, FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    }

    ~Plan()
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
        fftw_free(buffer);
    }

    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
};

PeakSearcher::PeakSearcher(const SignalParams& params) : params_(params)
{
    params_.validate();
    plan_ = std::make_unique<Plan>(params_.n * params_.oversampling);
}

PeakSearcher::~PeakSearcher() = default;
PeakSearcher::PeakSearcher(PeakSearcher&&) noexcept = default;
PeakSearcher& PeakSearcher::operator=(PeakSearcher&&) noexcept = default;

double PeakSearcher::grid_peak(std::span<const Symbol> symbols)
{
    if (symbols.size() != params_.n) {
        throw std::invalid_argument("PeakSearcher: codeword length does not match params.n");
    }
    // Zero-padded inverse DFT of length L n gives sum_i X_i exp(j 2 pi i k / (L n)).
    auto* data = reinterpret_cast<std::complex<double>*>(plan_->buffer);
    std::copy(symbols.begin(), symbols.end(), data);
    std::fill(data + symbols.size(), data + plan_->size, std::complex<double>{});
    fftw_execute(plan_->plan);
    double peak = 0.0;
    for (std::size_t k = 0; k < plan_->size; ++k) {
        plan_->grid_power[k] = std::norm(data[k]);
        peak = std::max(peak, plan_->grid_power[k]);
    }
    return std::sqrt(peak / static_cast<double>(params_.n));
}

double PeakSearcher::crest_factor(std::span<const Symbol> symbols)
{
    const double grid = grid_peak(symbols);
    if (params_.n == 1) {
        return grid;
    }
    const double n = static_cast<double>(params_.n);
    const double threshold = kCandidateFraction * kCandidateFraction * grid * grid * n;
    const double step = 1.0 / static_cast<double>(plan_->size);
    double best = grid * grid * n;
    for (std::size_t k = 0; k < plan_->size; ++k) {
        if (plan_->grid_power[k] < threshold) {
            continue;
        }
        // s is 1-periodic, so brackets may straddle t = 0.
        const double centre = static_cast<double>(k) * step;
        best = std::max(best, golden_section_max(symbols, centre - step, centre + step));
    }
    return std::sqrt(best / n);
}

} // namespace cflab
