#include "cflab/ofdm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cflab {

namespace {

std::size_t parse_order(std::string_view digits, std::string_view name)
{
    std::size_t order = 0;
    const auto* end = digits.data() + digits.size();
    auto [ptr, ec] = std::from_chars(digits.data(), end, order);
    if (digits.empty() || ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("unrecognized modulation '" + std::string(name) + "'");
    }
    return order;
}

} // namespace

Constellation::Constellation(Modulation kind, std::vector<Symbol> points)
    : kind_(kind), points_(std::move(points))
{
}

Constellation Constellation::psk(std::size_t order)
{
    if (order < 2) {
        throw std::invalid_argument("PSK order must be at least 2");
    }
    std::vector<Symbol> points;
    points.reserve(order);
    const double m = static_cast<double>(order);
    for (std::size_t l = 0; l < order; ++l) {
        points.push_back(std::polar(1.0, (2.0 * static_cast<double>(l) + 1.0) * std::numbers::pi / m));
    }
    return Constellation(Modulation::Psk, std::move(points));
}

Constellation Constellation::square_qam(std::size_t order)
{
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(order))));
    if (order < 4 || side * side != order) {
        throw std::invalid_argument("QAM order must be a perfect square >= 4");
    }
    // Per-axis levels -(side-1), ..., side-1 in steps of 2 have mean square
    // (order-1)/3, so the 2-D grid has average energy 2(order-1)/3.
    const double scale = 1.0 / std::sqrt(2.0 * (static_cast<double>(order) - 1.0) / 3.0);
    std::vector<Symbol> points;
    points.reserve(order);
    for (std::size_t re = 0; re < side; ++re) {
        for (std::size_t im = 0; im < side; ++im) {
            const double x = 2.0 * static_cast<double>(re) - static_cast<double>(side - 1);
            const double y = 2.0 * static_cast<double>(im) - static_cast<double>(side - 1);
            points.emplace_back(scale * x, scale * y);
        }
    }
    return Constellation(Modulation::SquareQam, std::move(points));
}

Constellation Constellation::parse(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "bpsk") {
        return psk(2);
    }
    if (lower == "qpsk") {
        return psk(4);
    }
    if (lower.starts_with("psk")) {
        return psk(parse_order(std::string_view(lower).substr(3), name));
    }
    if (lower.starts_with("qam")) {
        return square_qam(parse_order(std::string_view(lower).substr(3), name));
    }
    throw std::invalid_argument("unrecognized modulation '" + std::string(name) + "'");
}

std::optional<std::size_t> Constellation::index_of(const Symbol& symbol) const
{
    const auto it = std::find(points_.begin(), points_.end(), symbol);
    if (it == points_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - points_.begin());
}

double Constellation::peak_amplitude() const
{
    double peak = 0.0;
    for (const auto& p : points_) {
        peak = std::max(peak, std::abs(p));
    }
    return peak;
}

std::string Constellation::name() const
{
    return (kind_ == Modulation::Psk ? "psk" : "qam") + std::to_string(order());
}

Codeword::Codeword(std::vector<Symbol> symbols) : symbols_(std::move(symbols))
{
    if (symbols_.empty()) {
        throw std::invalid_argument("codeword must contain at least one symbol");
    }
}

Codeword Codeword::from_indices(const Constellation& constellation,
                                std::span<const std::size_t> indices)
{
    std::vector<Symbol> symbols;
    symbols.reserve(indices.size());
    for (std::size_t index : indices) {
        if (index >= constellation.order()) {
            throw std::out_of_range("symbol index outside the constellation");
        }
        symbols.push_back(constellation.point(index));
    }
    return Codeword(std::move(symbols));
}

void SignalParams::validate() const
{
    if (n < 1) {
        throw std::invalid_argument("number of sub-carriers must be at least 1");
    }
    if (oversampling < kMinOversampling) {
        throw std::invalid_argument("oversampling factor must be at least 4");
    }
}

Codeword sample_codeword(const Constellation& constellation, std::size_t n, Rng& rng)
{
    if (n < 1) {
        throw std::invalid_argument("sample_codeword: n must be at least 1");
    }
    std::uniform_int_distribution<std::size_t> pick(0, constellation.order() - 1);
    std::vector<Symbol> symbols(n);
    for (auto& s : symbols) {
        s = constellation.point(pick(rng));
    }
    return Codeword(std::move(symbols));
}

Symbol evaluate_signal(const Codeword& codeword, double t)
{
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("evaluate_signal: t must lie in [0, 1]");
    }
    const auto symbols = codeword.symbols();
    const Symbol z = std::polar(1.0, 2.0 * std::numbers::pi * t);
    Symbol acc = symbols.back();
    for (std::size_t i = symbols.size() - 1; i-- > 0;) {
        acc = acc * z + symbols[i];
    }
    return acc / std::sqrt(static_cast<double>(symbols.size()));
}

double crest_factor(const Codeword& codeword, const SignalParams& params)
{
    params.validate();
    if (params.n != codeword.size()) {
        throw std::invalid_argument("crest_factor: codeword length does not match params.n");
    }
    // One cached workspace per thread; rebuilt when the geometry changes.
    thread_local std::unique_ptr<PeakSearcher> searcher;
    if (!searcher || searcher->params().n != params.n ||
        searcher->params().oversampling != params.oversampling) {
        searcher = std::make_unique<PeakSearcher>(params);
    }
    return searcher->crest_factor(codeword.symbols());
}

double average_power(const Codeword& codeword)
{
    double total = 0.0;
    for (const auto& x : codeword.symbols()) {
        total += std::norm(x);
    }
    return total / static_cast<double>(codeword.size());
}

double signal_distance_bound(const Codeword& x, const Codeword& y)
{
    if (x.size() != y.size()) {
        throw std::invalid_argument("signal_distance_bound: length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        total += std::abs(x[i] - y[i]);
    }
    return total / std::sqrt(static_cast<double>(x.size()));
}

} // namespace cflab
