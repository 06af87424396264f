#include "cflab/martingale.hpp"

#include "detail.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cflab {

namespace {

ConditionalEstimate summarize(std::span<const double> draws)
{
    const double mean = detail::compensated_mean(draws);
    if (draws.size() < 2) {
        return {mean, 0.0};
    }
    detail::CompensatedSum ss;
    for (double v : draws) {
        ss.add((v - mean) * (v - mean));
    }
    const double variance = ss.value() / static_cast<double>(draws.size() - 1);
    return {mean, std::sqrt(variance / static_cast<double>(draws.size()))};
}

void fill_increments(DoobTrace& trace)
{
    trace.increments.resize(trace.values.size() - 1);
    for (std::size_t i = 1; i < trace.values.size(); ++i) {
        trace.increments[i - 1] = trace.values[i] - trace.values[i - 1];
    }
}

std::vector<std::size_t> symbol_indices(const Constellation& constellation,
                                        std::span<const Symbol> symbols)
{
    std::vector<std::size_t> indices;
    indices.reserve(symbols.size());
    for (const auto& s : symbols) {
        const auto index = constellation.index_of(s);
        if (!index) {
            throw std::invalid_argument("symbol is not a point of the constellation");
        }
        indices.push_back(*index);
    }
    return indices;
}

} // namespace

std::uint64_t enumeration_cap()
{
    const char* raw = std::getenv("CF_LAB_MAX_ENUM");
    if (raw == nullptr || *raw == '\0') {
        return kDefaultEnumerationCap;
    }
    const std::string_view text(raw);
    std::uint64_t cap = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec != std::errc{} || ptr != text.data() + text.size() || cap == 0) {
        throw std::invalid_argument("CF_LAB_MAX_ENUM must be a positive integer");
    }
    return cap;
}

std::uint64_t codeword_count(std::size_t order, std::size_t n)
{
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (count > std::numeric_limits<std::uint64_t>::max() / order) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        count *= order;
    }
    return count;
}

CodewordEnumeration::CodewordEnumeration(const Constellation& constellation,
                                         const SignalParams& params, std::size_t workers,
                                         std::uint64_t cap)
    : constellation_(constellation), params_(params)
{
    params_.validate();
    const std::size_t order = constellation_.order();
    const std::uint64_t total = codeword_count(order, params_.n);
    if (total > cap) {
        throw FeasibilityError("exact enumeration needs " + constellation_.name() + "^" +
                               std::to_string(params_.n) + " codewords, above the cap of " +
                               std::to_string(cap));
    }
    cf_.resize(static_cast<std::size_t>(total));
    const std::size_t n = params_.n;
    detail::parallel_chunks(cf_.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        if (begin == end) {
            return;
        }
        PeakSearcher searcher(params_);
        std::vector<Symbol> symbols(n);
        for (std::size_t index = begin; index < end; ++index) {
            std::size_t rest = index;
            for (std::size_t pos = n; pos-- > 0;) {
                symbols[pos] = constellation_.point(rest % order);
                rest /= order;
            }
            cf_[index] = searcher.crest_factor(symbols);
        }
    });
}

std::uint64_t CodewordEnumeration::block_offset(std::span<const std::size_t> prefix) const
{
    if (prefix.size() > params_.n) {
        throw std::invalid_argument("prefix longer than the codeword");
    }
    const std::size_t order = constellation_.order();
    std::uint64_t offset = 0;
    for (std::size_t digit : prefix) {
        if (digit >= order) {
            throw std::out_of_range("symbol index outside the constellation");
        }
        offset = offset * order + digit;
    }
    return offset * codeword_count(order, params_.n - prefix.size());
}

double CodewordEnumeration::conditional_mean(std::span<const std::size_t> prefix) const
{
    const std::uint64_t offset = block_offset(prefix);
    const std::uint64_t width = codeword_count(constellation_.order(), params_.n - prefix.size());
    return detail::compensated_mean(std::span<const double>(cf_).subspan(offset, width));
}

double CodewordEnumeration::conditional_second_moment(std::span<const std::size_t> prefix) const
{
    if (prefix.size() >= params_.n) {
        throw std::invalid_argument("conditional_second_moment: prefix must be shorter than n");
    }
    const double parent = conditional_mean(prefix);
    std::vector<std::size_t> child(prefix.begin(), prefix.end());
    child.push_back(0);
    detail::CompensatedSum total;
    for (std::size_t x = 0; x < constellation_.order(); ++x) {
        child.back() = x;
        const double diff = conditional_mean(child) - parent;
        total.add(diff * diff);
    }
    return total.value() / static_cast<double>(constellation_.order());
}

std::vector<std::size_t> CodewordEnumeration::indices_of(const Codeword& codeword) const
{
    if (codeword.size() != params_.n) {
        throw std::invalid_argument("codeword length does not match params.n");
    }
    return symbol_indices(constellation_, codeword.symbols());
}

DoobTrace CodewordEnumeration::trace(const Codeword& codeword) const
{
    const auto digits = indices_of(codeword);
    const std::size_t n = params_.n;
    DoobTrace trace;
    trace.mode = TraceMode::Exact;
    trace.values.resize(n + 1);
    trace.standard_errors.assign(n + 1, 0.0);
    trace.cond_second_moments.resize(n);
    const std::span<const std::size_t> all(digits);
    for (std::size_t i = 0; i <= n; ++i) {
        trace.values[i] = conditional_mean(all.first(i));
    }
    for (std::size_t i = 1; i <= n; ++i) {
        trace.cond_second_moments[i - 1] = conditional_second_moment(all.first(i - 1));
    }
    fill_increments(trace);
    return trace;
}

ExhaustiveReport CodewordEnumeration::verify() const
{
    const std::size_t order = constellation_.order();
    const std::size_t n = params_.n;
    const SymbolBoundModel model = symbol_bound_model(constellation_);

    ExhaustiveReport report;
    report.codewords = cf_.size();
    report.increment_bound = 2.0 * model.peak_amplitude / std::sqrt(static_cast<double>(n));
    report.second_moment_bound = model.pair_second_moment / static_cast<double>(n);

    // Level k holds Y for every length-k prefix, each computed directly from
    // its block of crest factors (never from the level below), so the tower
    // check compares two independent summations.
    auto level_means = [&](std::size_t k) {
        const std::uint64_t blocks = codeword_count(order, k);
        const std::uint64_t width = codeword_count(order, n - k);
        std::vector<double> means(static_cast<std::size_t>(blocks));
        const std::span<const double> cf(cf_);
        for (std::size_t b = 0; b < means.size(); ++b) {
            means[b] = detail::compensated_mean(cf.subspan(b * width, width));
        }
        return means;
    };

    std::vector<double> parent = level_means(0);
    report.expected_cf = parent[0];
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<double> child = level_means(k);
        for (std::size_t p = 0; p < parent.size(); ++p) {
            detail::CompensatedSum child_sum;
            detail::CompensatedSum second_moment;
            for (std::size_t x = 0; x < order; ++x) {
                const double y = child[p * order + x];
                const double jump = y - parent[p];
                child_sum.add(y);
                second_moment.add(jump * jump);
                report.max_increment = std::max(report.max_increment, std::abs(jump));
                if (std::abs(jump) > report.increment_bound) {
                    ++report.increment_violations;
                }
            }
            const double tower = std::abs(child_sum.value() / static_cast<double>(order) - parent[p]);
            report.max_tower_error = std::max(report.max_tower_error, tower);
            if (tower > ExhaustiveReport::kTowerTolerance) {
                ++report.tower_violations;
            }
            const double moment = second_moment.value() / static_cast<double>(order);
            report.max_second_moment = std::max(report.max_second_moment, moment);
            if (moment > report.second_moment_bound) {
                ++report.second_moment_violations;
            }
        }
        parent = std::move(child);
    }
    return report;
}

DoobTrace exact_doob_trace(const Constellation& constellation, const Codeword& codeword,
                           const SignalParams& params)
{
    return CodewordEnumeration(constellation, params).trace(codeword);
}

ConditionalEstimate mc_conditional_mean(const Constellation& constellation,
                                        std::span<const std::size_t> prefix,
                                        const SignalParams& params, std::size_t samples,
                                        std::uint64_t seed, std::size_t workers)
{
    params.validate();
    if (samples < 1) {
        throw std::invalid_argument("mc_conditional_mean: need at least one sample");
    }
    const std::size_t n = params.n;
    const std::size_t order = constellation.order();
    if (prefix.size() > n) {
        throw std::invalid_argument("prefix longer than the codeword");
    }
    std::vector<double> draws(samples);
    detail::parallel_chunks(samples, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        if (begin == end) {
            return;
        }
        PeakSearcher searcher(params);
        std::uniform_int_distribution<std::size_t> pick(0, order - 1);
        std::vector<Symbol> symbols(n);
        for (std::size_t pos = 0; pos < prefix.size(); ++pos) {
            symbols[pos] = constellation.point(prefix[pos]);
        }
        for (std::size_t s = begin; s < end; ++s) {
            Rng rng = make_stream(seed, {s});
            for (std::size_t pos = prefix.size(); pos < n; ++pos) {
                symbols[pos] = constellation.point(pick(rng));
            }
            draws[s] = searcher.crest_factor(symbols);
        }
    });
    return summarize(draws);
}

DoobTrace mc_doob_trace(const Constellation& constellation, const Codeword& codeword,
                        const SignalParams& params, std::size_t inner_samples,
                        std::uint64_t seed, std::size_t workers)
{
    params.validate();
    if (inner_samples < kMinInnerSamples) {
        throw std::invalid_argument("mc_doob_trace: inner_samples must be at least 1000");
    }
    if (codeword.size() != params.n) {
        throw std::invalid_argument("codeword length does not match params.n");
    }
    const auto digits = symbol_indices(constellation, codeword.symbols());
    const std::size_t n = params.n;
    const std::size_t order = constellation.order();

    auto estimate = [&](std::span<const std::size_t> prefix, std::uint64_t step,
                        std::uint64_t symbol) {
        return mc_conditional_mean(constellation, prefix, params, inner_samples,
                                   derive_seed(seed, {step, symbol}), workers);
    };

    DoobTrace trace;
    trace.mode = TraceMode::MonteCarlo;
    trace.inner_samples = inner_samples;
    trace.values.resize(n + 1);
    trace.standard_errors.resize(n + 1);
    trace.cond_second_moments.resize(n);

    const ConditionalEstimate root = estimate({}, 0, order);
    trace.values[0] = root.mean;
    trace.standard_errors[0] = root.standard_error;

    PeakSearcher exact(params);
    std::vector<std::size_t> prefix;
    for (std::size_t i = 1; i <= n; ++i) {
        // Sibling estimates of Y_i for every value of X_{i-1}.
        std::vector<ConditionalEstimate> siblings(order);
        prefix.assign(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(i - 1));
        prefix.push_back(0);
        for (std::size_t x = 0; x < order; ++x) {
            prefix.back() = x;
            if (i == n) {
                const auto full = Codeword::from_indices(constellation, prefix);
                siblings[x] = {exact.crest_factor(full.symbols()), 0.0};
            } else {
                siblings[x] = estimate(prefix, i, x);
            }
        }
        trace.values[i] = siblings[digits[i - 1]].mean;
        trace.standard_errors[i] = siblings[digits[i - 1]].standard_error;
        detail::CompensatedSum moment;
        for (const auto& e : siblings) {
            const double diff = e.mean - trace.values[i - 1];
            moment.add(diff * diff);
        }
        trace.cond_second_moments[i - 1] = moment.value() / static_cast<double>(order);
    }
    fill_increments(trace);
    return trace;
}

BoundedDifferenceReport verify_bounded_differences(const DoobTrace& trace, std::size_t n,
                                                   double peak_amplitude)
{
    if (n < 1 || trace.values.size() != n + 1 || trace.increments.size() != n) {
        throw std::invalid_argument("verify_bounded_differences: trace does not have n steps");
    }
    BoundedDifferenceReport report;
    report.bound = 2.0 * peak_amplitude / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 1; i <= n; ++i) {
        const double jump = std::abs(trace.increments[i - 1]);
        double slack = 0.0;
        if (trace.mode == TraceMode::MonteCarlo) {
            slack = 4.0 * std::hypot(trace.standard_errors[i], trace.standard_errors[i - 1]);
        }
        report.max_increment = std::max(report.max_increment, jump);
        if (jump > report.bound + slack) {
            report.satisfied = false;
        }
    }
    return report;
}

double exact_conditional_second_moment(const Constellation& constellation,
                                       std::span<const Symbol> prefix,
                                       const SignalParams& params)
{
    const auto digits = symbol_indices(constellation, prefix);
    if (digits.size() >= params.n) {
        throw std::invalid_argument("prefix must be shorter than the codeword");
    }
    return CodewordEnumeration(constellation, params).conditional_second_moment(digits);
}

double psk_variance_identity(std::size_t order)
{
    if (order < 2) {
        throw std::invalid_argument("psk_variance_identity: M must be at least 2");
    }
    const double m = static_cast<double>(order);
    double total = 0.0;
    for (std::size_t l = 1; l < order; ++l) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(l) / m);
        total += s * s;
    }
    return 4.0 * total / m;
}

double pairwise_symbol_second_moment(const Constellation& constellation, const Symbol& fixed)
{
    if (!constellation.contains(fixed)) {
        throw std::invalid_argument("fixed symbol is not a point of the constellation");
    }
    double total = 0.0;
    for (const auto& p : constellation.points()) {
        total += std::norm(fixed - p);
    }
    return total / static_cast<double>(constellation.order());
}

SymbolBoundModel symbol_bound_model(const Constellation& constellation)
{
    if (constellation.kind() == Modulation::Psk) {
        // Unit modulus, and E|x - X'|^2 = 2 for every x by symmetry.
        return SymbolBoundModel{1.0, 2.0};
    }
    SymbolBoundModel model;
    model.peak_amplitude = constellation.peak_amplitude();
    model.pair_second_moment = 0.0;
    for (const auto& p : constellation.points()) {
        model.pair_second_moment =
            std::max(model.pair_second_moment, pairwise_symbol_second_moment(constellation, p));
    }
    return model;
}

} // namespace cflab
