#include "cflab/montecarlo.hpp"

#include "cflab/martingale.hpp"
#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cflab {

void SimulationConfig::validate() const
{
    signal_params().validate();
    if (trials < kMinTrials) {
        throw std::invalid_argument("trials must be at least " + std::to_string(kMinTrials));
    }
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i])) {
            throw std::invalid_argument("alphas must be finite and positive");
        }
        if (i > 0 && !(alphas[i] > alphas[i - 1])) {
            throw std::invalid_argument("alphas must be strictly increasing");
        }
    }
    if (!(cost_budget > 0.0)) {
        throw std::invalid_argument("cost budget must be positive");
    }
}

double empirical_quantile(std::span<const double> sorted, double probability)
{
    if (sorted.empty()) {
        throw std::invalid_argument("empirical_quantile: empty sample");
    }
    if (!(probability > 0.0 && probability <= 1.0)) {
        throw std::domain_error("empirical_quantile: probability must lie in (0, 1]");
    }
    const double rank = std::ceil(probability * static_cast<double>(sorted.size()));
    const auto index = static_cast<std::size_t>(std::max(rank, 1.0)) - 1;
    return sorted[std::min(index, sorted.size() - 1)];
}

CfSample CfSample::from_values(std::vector<double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("CfSample: no values");
    }
    CfSample sample;
    sample.values = std::move(values);
    const auto& v = sample.values;
    sample.mean = detail::compensated_mean(v);
    if (v.size() > 1) {
        detail::CompensatedSum ss;
        for (double x : v) {
            ss.add((x - sample.mean) * (x - sample.mean));
        }
        sample.variance = ss.value() / static_cast<double>(v.size() - 1);
    }
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    sample.min = sorted.front();
    sample.max = sorted.back();
    sample.median = sorted[(sorted.size() - 1) / 2];
    for (double p : kReportedQuantiles) {
        sample.quantiles[p] = empirical_quantile(sorted, p);
    }
    return sample;
}

CfSample run_cf_simulation(const SimulationConfig& config)
{
    config.validate();
    const double cost = static_cast<double>(config.trials) * static_cast<double>(config.n) *
                        static_cast<double>(config.oversampling);
    if (cost > config.cost_budget) {
        throw ResourceError("simulation cost trials*n*L = " + std::to_string(cost) +
                            " exceeds the budget of " + std::to_string(config.cost_budget));
    }
    const SignalParams params = config.signal_params();
    std::vector<double> values(config.trials);
    detail::parallel_chunks(config.trials, config.workers,
                            [&](std::size_t, std::size_t begin, std::size_t end) {
        if (begin == end) {
            return;
        }
        PeakSearcher searcher(params);
        for (std::size_t k = begin; k < end; ++k) {
            Rng rng = make_stream(config.seed, {k});
            const Codeword codeword = sample_codeword(config.constellation, config.n, rng);
            values[k] = searcher.crest_factor(codeword.symbols());
        }
    });
    return CfSample::from_values(std::move(values));
}

TailEstimate empirical_tail(const CfSample& sample, double center, double alpha)
{
    if (!(alpha > 0.0)) {
        throw std::domain_error("empirical_tail: alpha must be positive");
    }
    if (sample.values.empty()) {
        throw std::invalid_argument("empirical_tail: empty sample");
    }
    std::size_t hits = 0;
    for (double v : sample.values) {
        if (std::abs(v - center) >= alpha) {
            ++hits;
        }
    }
    const double trials = static_cast<double>(sample.values.size());
    const double p = static_cast<double>(hits) / trials;
    return {p, std::sqrt(p * (1.0 - p) / trials)};
}

std::size_t TailReport::violation_count() const
{
    std::size_t count = 0;
    for (const auto& r : records) {
        count += static_cast<std::size_t>(r.azuma_violated) + r.refined_violated +
                 r.mcdiarmid_violated + r.talagrand_violated;
    }
    return count;
}

TailReport compare_bounds(const CfSample& sample, std::span<const double> alphas,
                          const SymbolBoundModel& model)
{
    if (sample.values.empty()) {
        throw std::invalid_argument("compare_bounds: empty sample");
    }
    TailReport report;
    report.mean_center = sample.mean;
    report.median_center = sample.median;
    auto exceeds = [](const TailEstimate& tail, const BoundValue& bound) {
        return tail.probability >
               bound.capped + TailReport::kSlackStandardErrors * tail.standard_error;
    };
    for (double alpha : alphas) {
        TailRecord r;
        r.alpha = alpha;
        r.mean_tail = empirical_tail(sample, sample.mean, alpha);
        r.median_tail = empirical_tail(sample, sample.median, alpha);
        r.bounds = ofdm_bounds(alpha, model);
        r.azuma_violated = exceeds(r.mean_tail, r.bounds.azuma);
        r.refined_violated = exceeds(r.mean_tail, r.bounds.refined);
        r.mcdiarmid_violated = exceeds(r.mean_tail, r.bounds.mcdiarmid);
        r.talagrand_violated = exceeds(r.median_tail, r.bounds.talagrand);
        report.records.push_back(r);
    }
    return report;
}

GapReport median_mean_gap(const CfSample& sample, const SymbolBoundModel& model)
{
    if (sample.values.empty()) {
        throw std::invalid_argument("median_mean_gap: empty sample");
    }
    GapReport report;
    report.gap = std::abs(sample.mean - sample.median);
    report.bound = median_mean_gap_bound(2.0 * model.peak_amplitude);
    report.satisfied = report.gap <= report.bound;
    return report;
}

double ScalingTable::ratio_ln_spread() const
{
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const auto& row : rows) {
        if (!row.ratio_ln) {
            continue;
        }
        lo = any ? std::min(lo, *row.ratio_ln) : *row.ratio_ln;
        hi = any ? std::max(hi, *row.ratio_ln) : *row.ratio_ln;
        any = true;
    }
    return any ? (hi - lo) / lo : 0.0;
}

ScalingTable scaling_study(std::span<const std::size_t> n_list, const SimulationConfig& base)
{
    if (n_list.size() < 3) {
        throw std::invalid_argument("scaling_study: need at least three values of n");
    }
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (!(n_list[i] > n_list[i - 1])) {
            throw std::invalid_argument("scaling_study: n values must be strictly increasing");
        }
    }
    ScalingTable table;
    for (std::size_t n : n_list) {
        SimulationConfig config = base;
        config.n = n;
        const CfSample sample = run_cf_simulation(config);
        ScalingRow row;
        row.n = n;
        row.mean_cf = sample.mean;
        row.median_cf = sample.median;
        if (n > 1) {
            const double ln_n = std::log(static_cast<double>(n));
            row.ratio_ln = sample.mean / std::sqrt(ln_n);
            row.ratio_log2 = sample.mean / std::sqrt(std::log2(static_cast<double>(n)));
            if (n >= 3) {
                row.band_half_width = ScalingTable::kBandConstant * std::log(ln_n) / std::sqrt(ln_n);
                row.within_band = std::abs(sample.mean - std::sqrt(ln_n)) < *row.band_half_width;
            }
        }
        if (!table.rows.empty()) {
            const double previous = table.rows.back().mean_cf;
            table.mean_nondecreasing = table.mean_nondecreasing && row.mean_cf >= previous;
            table.mean_strictly_increasing = table.mean_strictly_increasing && row.mean_cf > previous;
        }
        table.rows.push_back(row);
    }
    return table;
}

} // namespace cflab
