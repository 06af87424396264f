#include "cflab/martingale.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace cflab;

namespace {

// Exhaustive Doob checks with the crest factor evaluated by the dense-grid
// oracle instead of the production peak search.
double oracle_cf(const Constellation& c, const std::vector<std::size_t>& idx)
{
    return oracle::dense_grid_cf(Codeword::from_indices(c, idx).symbols(), 1024);
}

} // namespace

TEST_CASE("single sub-carrier trace is constant one")
{
    for (std::size_t m : {2u, 4u, 8u}) {
        const auto c = Constellation::psk(m);
        const std::vector<std::size_t> idx = {1};
        const auto trace = exact_doob_trace(c, Codeword::from_indices(c, idx), SignalParams{1, 16});
        REQUIRE(trace.values.size() == 2);
        CHECK(trace.values[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(trace.values[1] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(trace.increments[0] == doctest::Approx(0.0).epsilon(1e-15));
        const auto report = verify_bounded_differences(trace, 1);
        CHECK(report.max_increment < 1e-15);
        CHECK(report.satisfied);
        CHECK(report.bound == 2.0);
    }
}

TEST_CASE("M=2, n=2 trace matches brute-force enumeration")
{
    const auto c = Constellation::psk(2);
    const std::vector<std::size_t> idx = {0, 0};   // (e^{j pi/2}, e^{j pi/2})
    const auto trace = exact_doob_trace(c, Codeword::from_indices(c, idx), SignalParams{2, 16});
    auto f = [&](const std::vector<std::size_t>& w) { return oracle_cf(c, w); };
    const double y0 = oracle::brute_conditional_mean(2, 2, {}, f);
    const double y1 = oracle::brute_conditional_mean(2, 2, {0}, f);
    const double y2 = oracle::brute_conditional_mean(2, 2, {0, 0}, f);
    CHECK(trace.values[0] == doctest::Approx(y0).epsilon(1e-6));
    CHECK(trace.values[1] == doctest::Approx(y1).epsilon(1e-6));
    CHECK(trace.values[2] == doctest::Approx(y2).epsilon(1e-6));
    // Every two-carrier BPSK codeword peaks at sqrt(2).
    CHECK(y0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(y2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("exact trace agrees with brute-force conditional means, M=2 n=6 and M=3 n=4")
{
    for (auto [m, n] : {std::pair<std::size_t, std::size_t>{2, 6}, {3, 4}}) {
        const auto c = Constellation::psk(m);
        const SignalParams params{n, 16};
        const CodewordEnumeration enumeration(c, params);
        auto f = [&](const std::vector<std::size_t>& w) { return oracle_cf(c, w); };
        for (const auto& idx : oracle::all_index_vectors(m, n)) {
            const auto trace = enumeration.trace(Codeword::from_indices(c, idx));
            for (std::size_t i = 0; i <= n; ++i) {
                const std::vector<std::size_t> prefix(idx.begin(), idx.begin() + i);
                REQUIRE(trace.values[i] ==
                        doctest::Approx(oracle::brute_conditional_mean(m, n, prefix, f)).epsilon(1e-6));
            }
            // Y_n - Y_0 = CF - E[CF]
            REQUIRE(trace.values[n] == doctest::Approx(crest_factor(Codeword::from_indices(c, idx), params)).epsilon(1e-15));
            REQUIRE(trace.values[0] == doctest::Approx(enumeration.verify().expected_cf).epsilon(1e-15));
        }
    }
}

TEST_CASE("tower property, bounded differences and conditional variance, exhaustive")
{
    struct Case { std::size_t m; std::size_t n; };
    for (const Case k : {Case{2, 1}, Case{2, 2}, Case{2, 3}, Case{2, 4}, Case{2, 5}, Case{2, 6},
                         Case{2, 7}, Case{2, 8}, Case{4, 1}, Case{4, 2}, Case{4, 3}, Case{4, 4},
                         Case{4, 5}, Case{8, 3}}) {
        CAPTURE(k.m);
        CAPTURE(k.n);
        const auto c = Constellation::psk(k.m);
        const CodewordEnumeration enumeration(c, SignalParams{k.n, 16});
        const auto report = enumeration.verify();
        CHECK(report.codewords == codeword_count(k.m, k.n));
        CHECK(report.max_tower_error <= 1e-10);
        CHECK(report.increment_bound == doctest::Approx(2.0 / std::sqrt(double(k.n))));
        CHECK(report.max_increment <= report.increment_bound);
        CHECK(report.second_moment_bound == doctest::Approx(2.0 / double(k.n)));
        CHECK(report.max_second_moment <= report.second_moment_bound);
        CHECK(report.satisfied());
    }
}

TEST_CASE("independent tower check through conditional means")
{
    const auto c = Constellation::psk(2);
    const std::size_t n = 6;
    const CodewordEnumeration enumeration(c, SignalParams{n, 16});
    for (std::size_t len = 0; len < n; ++len) {
        for (const auto& prefix : oracle::all_index_vectors(2, len)) {
            auto child = prefix;
            child.push_back(0);
            const double y0 = enumeration.conditional_mean(child);
            child.back() = 1;
            const double y1 = enumeration.conditional_mean(child);
            REQUIRE(std::abs(0.5 * (y0 + y1) - enumeration.conditional_mean(prefix)) < 1e-10);
        }
    }
}

TEST_CASE("every M=2, n=8 codeword trace satisfies the jump bound")
{
    const auto c = Constellation::psk(2);
    const std::size_t n = 8;
    const CodewordEnumeration enumeration(c, SignalParams{n, 16});
    for (const auto& idx : oracle::all_index_vectors(2, n)) {
        const auto trace = enumeration.trace(Codeword::from_indices(c, idx));
        const auto report = verify_bounded_differences(trace, n);
        REQUIRE(report.bound == doctest::Approx(2.0 / std::sqrt(8.0)));
        REQUIRE(report.satisfied);
        for (double m2 : trace.cond_second_moments) {
            REQUIRE(m2 >= 0.0);
            REQUIRE(m2 <= 0.25);
        }
    }
}

TEST_CASE("exact_conditional_second_moment")
{
    const auto c = Constellation::psk(2);
    SUBCASE("single carrier")
    {
        CHECK(exact_conditional_second_moment(c, {}, SignalParams{1, 16}) ==
              doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("all prefixes, M=2 n=8")
    {
        const SignalParams params{8, 16};
        for (std::size_t len = 0; len < 8; len += 3) {
            for (const auto& prefix : oracle::all_index_vectors(2, len)) {
                std::vector<Symbol> w;
                for (std::size_t k : prefix) {
                    w.push_back(c.point(k));
                }
                const double m2 = exact_conditional_second_moment(c, w, params);
                REQUIRE(m2 >= 0.0);
                REQUIRE(m2 <= 0.25);
            }
        }
    }
    SUBCASE("errors")
    {
        const std::vector<Symbol> bad = {Symbol(1.0, 0.0)};
        CHECK_THROWS_AS(exact_conditional_second_moment(c, bad, SignalParams{3, 16}), std::invalid_argument);
        const std::vector<Symbol> too_long(3, c.point(0));
        CHECK_THROWS_AS(exact_conditional_second_moment(c, too_long, SignalParams{3, 16}),
                        std::invalid_argument);
    }
}

TEST_CASE("enumeration cap")
{
    const auto c = Constellation::psk(16);
    CHECK_THROWS_AS(CodewordEnumeration(c, SignalParams{16, 16}), FeasibilityError);
    CHECK_THROWS_AS(exact_doob_trace(c, Codeword(std::vector<Symbol>(16, c.point(0))), SignalParams{16, 16}),
                    FeasibilityError);
    CHECK(codeword_count(16, 16) == std::numeric_limits<std::uint64_t>::max());
    CHECK(codeword_count(10, 7) == 10'000'000);
    CHECK_NOTHROW(CodewordEnumeration(Constellation::psk(2), SignalParams{4, 16}, 1, 16));
    CHECK_THROWS_AS(CodewordEnumeration(Constellation::psk(2), SignalParams{5, 16}, 1, 16), FeasibilityError);

    CHECK(enumeration_cap() == kDefaultEnumerationCap);
    ::setenv("CF_LAB_MAX_ENUM", "100", 1);
    CHECK(enumeration_cap() == 100);
    CHECK_THROWS_AS(CodewordEnumeration(Constellation::psk(2), SignalParams{7, 16}), FeasibilityError);
    ::setenv("CF_LAB_MAX_ENUM", "abc", 1);
    CHECK_THROWS_AS(enumeration_cap(), std::invalid_argument);
    ::unsetenv("CF_LAB_MAX_ENUM");
}

TEST_CASE("enumeration is identical for any worker count")
{
    const auto c = Constellation::psk(4);
    const SignalParams params{5, 16};
    const CodewordEnumeration one(c, params, 1);
    const CodewordEnumeration three(c, params, 3);
    const auto a = one.crest_factors();
    const auto b = three.crest_factors();
    REQUIRE(a.size() == b.size());
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
}

TEST_CASE("mc_doob_trace agrees with the exact trace, M=2 n=8")
{
    const auto c = Constellation::psk(2);
    const std::size_t n = 8;
    const SignalParams params{n, 16};
    const std::vector<std::size_t> idx = {0, 1, 1, 0, 1, 0, 0, 0};
    const auto w = Codeword::from_indices(c, idx);
    const auto exact = exact_doob_trace(c, w, params);
    const auto mc = mc_doob_trace(c, w, params, 10'000, 77, 2);
    CHECK(mc.mode == TraceMode::MonteCarlo);
    CHECK(mc.inner_samples == 10'000);
    for (std::size_t i = 0; i <= n; ++i) {
        CAPTURE(i);
        CHECK(std::abs(mc.values[i] - exact.values[i]) <= std::max(4.0 * mc.standard_errors[i], 1e-12));
    }
    CHECK(mc.standard_errors[n] == 0.0);
    CHECK(verify_bounded_differences(mc, n).satisfied);
}

TEST_CASE("mc_doob_trace is deterministic and validates inner_samples")
{
    const auto c = Constellation::psk(4);
    const SignalParams params{6, 16};
    Rng rng = make_stream(5, {0});
    const auto w = sample_codeword(c, 6, rng);
    const auto a = mc_doob_trace(c, w, params, 1000, 123, 1);
    const auto b = mc_doob_trace(c, w, params, 1000, 123, 4);
    CHECK(a.values == b.values);
    CHECK(a.standard_errors == b.standard_errors);
    CHECK(a.cond_second_moments == b.cond_second_moments);
    CHECK_THROWS_AS(mc_doob_trace(c, w, params, 1, 123), std::invalid_argument);
    CHECK_THROWS_AS(mc_doob_trace(c, w, params, 999, 123), std::invalid_argument);
}

TEST_CASE("Monte Carlo error of Y_0 shrinks like inner_samples^{-1/2}")
{
    const auto c = Constellation::psk(2);
    const SignalParams params{8, 16};
    const double exact = CodewordEnumeration(c, params).verify().expected_cf;
    const std::size_t replicates = 16;
    std::vector<double> log_n;
    std::vector<double> log_rms;
    for (std::size_t samples : {1'000u, 10'000u, 100'000u}) {
        double sq = 0.0;
        for (std::uint64_t r = 0; r < replicates; ++r) {
            const auto est = mc_conditional_mean(c, {}, params, samples, derive_seed(9, {samples, r}), 2);
            sq += (est.mean - exact) * (est.mean - exact);
        }
        log_n.push_back(std::log10(double(samples)));
        log_rms.push_back(0.5 * std::log10(sq / double(replicates)));
    }
    // Least-squares slope over the three points.
    const double mx = (log_n[0] + log_n[1] + log_n[2]) / 3.0;
    const double my = (log_rms[0] + log_rms[1] + log_rms[2]) / 3.0;
    double sxy = 0.0;
    double sxx = 0.0;
    for (int i = 0; i < 3; ++i) {
        sxy += (log_n[i] - mx) * (log_rms[i] - my);
        sxx += (log_n[i] - mx) * (log_n[i] - mx);
    }
    const double slope = sxy / sxx;
    MESSAGE("log-log slope = " << slope);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));
    CHECK(std::abs(slope + 0.5) <= 0.15);
}

TEST_CASE("verify_bounded_differences")
{
    DoobTrace t;
    t.mode = TraceMode::Exact;
    t.values = {1.0, 1.5, 1.2, 1.9, 2.0};
    t.standard_errors.assign(5, 0.0);
    t.increments = {0.5, -0.3, 0.7, 0.1};
    t.cond_second_moments.assign(4, 0.0);
    auto r = verify_bounded_differences(t, 4);
    CHECK(r.bound == 1.0);
    CHECK(r.max_increment == 0.7);
    CHECK(r.satisfied);

    t.values = {1.0, 2.2};
    t.increments = {1.2};
    t.standard_errors = {0.0, 0.0};
    CHECK_FALSE(verify_bounded_differences(t, 1).satisfied == false);   // bound is 2 at n = 1

    // Monte Carlo slack: jump 1.1 against bound 1.0 with 4 * sqrt(2) * 0.02 slack.
    t.mode = TraceMode::MonteCarlo;
    t.values = {1.0, 2.1, 2.1, 2.1, 2.1};
    t.increments = {1.1, 0.0, 0.0, 0.0};
    t.standard_errors = {0.02, 0.02, 0.0, 0.0, 0.0};
    CHECK(verify_bounded_differences(t, 4).satisfied);
    t.standard_errors = {0.01, 0.01, 0.0, 0.0, 0.0};
    CHECK_FALSE(verify_bounded_differences(t, 4).satisfied);
    CHECK_THROWS_AS(verify_bounded_differences(t, 3), std::invalid_argument);
}

TEST_CASE("PSK variance identity")
{
    for (std::size_t m : {2u, 3u, 4u, 8u, 16u, 64u, 256u}) {
        CHECK(std::abs(psk_variance_identity(m) - 2.0) <= 1e-12);
    }
    CHECK(psk_variance_identity(2) == 2.0);
    CHECK(psk_variance_identity(4) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(psk_variance_identity(1), std::invalid_argument);
}

TEST_CASE("pairwise symbol second moment")
{
    for (std::size_t m : {2u, 3u, 4u, 8u, 16u, 64u}) {
        const auto c = Constellation::psk(m);
        for (const auto& p : c.points()) {
            REQUIRE(std::abs(pairwise_symbol_second_moment(c, p) - 2.0) <= 1e-12);
        }
    }
    const auto bpsk = Constellation::psk(2);
    CHECK(pairwise_symbol_second_moment(bpsk, bpsk.point(0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(pairwise_symbol_second_moment(bpsk, Symbol(1.0, 0.0)), std::invalid_argument);

    // 16-QAM corner (3+3j)/sqrt(10) against the 16 grid points, summed directly.
    const auto qam = Constellation::square_qam(16);
    const Symbol corner(3.0 / std::sqrt(10.0), 3.0 / std::sqrt(10.0));
    double direct = 0.0;
    for (int a = -3; a <= 3; a += 2) {
        for (int b = -3; b <= 3; b += 2) {
            direct += std::norm(corner - Symbol(a, b) / std::sqrt(10.0));
        }
    }
    direct /= 16.0;
    const auto idx = qam.index_of(qam.point(15));
    REQUIRE(idx);
    CHECK(qam.point(15) == corner);
    CHECK(pairwise_symbol_second_moment(qam, corner) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(direct == doctest::Approx(2.8).epsilon(1e-14));

    const auto model = symbol_bound_model(qam);
    CHECK(model.pair_second_moment == doctest::Approx(2.8));
    CHECK(model.peak_amplitude == doctest::Approx(std::sqrt(1.8)));
}

TEST_CASE("QAM exhaustive check uses the widened bounds")
{
    const auto c = Constellation::square_qam(4);
    const auto report = CodewordEnumeration(c, SignalParams{5, 16}).verify();
    CHECK(report.satisfied());
    CHECK(report.increment_bound == doctest::Approx(2.0 * c.peak_amplitude() / std::sqrt(5.0)));
}
