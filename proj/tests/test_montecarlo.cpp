#include "cflab/martingale.hpp"
#include "cflab/montecarlo.hpp"
#include "cflab/rng.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace cflab;

namespace {

SimulationConfig config(std::size_t n, std::size_t trials, std::uint64_t seed = 1)
{
    SimulationConfig c;
    c.n = n;
    c.trials = trials;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("single sub-carrier: every trial has crest factor one")
{
    for (std::size_t m : {2u, 4u, 16u}) {
        auto c = config(1, 1000);
        c.constellation = Constellation::psk(m);
        const auto s = run_cf_simulation(c);
        REQUIRE(s.values.size() == 1000);
        CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s.median == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s.variance == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(s.min == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s.max == doctest::Approx(1.0).epsilon(1e-15));

        const std::vector<double> alphas = {0.01, 0.5, 1.0};
        const auto report = compare_bounds(s, alphas);
        CHECK(report.violation_count() == 0);
        for (const auto& r : report.records) {
            CHECK(r.mean_tail.probability == 0.0);
            CHECK(r.median_tail.probability == 0.0);
        }
    }
}

TEST_CASE("simulation trials follow their derived streams")
{
    auto c = config(8, 200, 42);
    const auto s = run_cf_simulation(c);
    for (std::uint64_t k : {0u, 1u, 57u, 199u}) {
        Rng rng = make_stream(42, {k});
        const auto w = sample_codeword(c.constellation, 8, rng);
        CHECK(s.values[k] == doctest::Approx(oracle::dense_grid_cf(w.symbols(), 4096)).epsilon(1e-6));
    }
}

TEST_CASE("simulation is bitwise identical for any worker count")
{
    auto c = config(32, 2000, 7);
    c.workers = 1;
    const auto a = run_cf_simulation(c);
    c.workers = 3;
    const auto b = run_cf_simulation(c);
    c.workers = 8;
    const auto d = run_cf_simulation(c);
    CHECK(a.values == b.values);
    CHECK(a.values == d.values);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == d.variance);

    c.seed = 8;
    CHECK(run_cf_simulation(c).values != a.values);
}

TEST_CASE("summary statistics")
{
    const auto s = CfSample::from_values({4.0, 1.0, 3.0, 2.0});
    CHECK(s.values == std::vector<double>{4.0, 1.0, 3.0, 2.0});
    CHECK(s.mean == 2.5);
    CHECK(s.median == 2.0);
    CHECK(s.variance == doctest::Approx(5.0 / 3.0));
    CHECK(s.min == 1.0);
    CHECK(s.max == 4.0);
    CHECK(s.quantiles.at(0.5) == 2.0);
    CHECK(s.quantiles.at(0.99) == 4.0);
    CHECK(s.quantiles.at(0.01) == 1.0);
    CHECK_THROWS_AS(CfSample::from_values({}), std::invalid_argument);

    const std::vector<double> sorted = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(empirical_quantile(sorted, 0.1) == 1.0);
    CHECK(empirical_quantile(sorted, 0.11) == 2.0);
    CHECK(empirical_quantile(sorted, 1.0) == 10.0);
    CHECK_THROWS_AS(empirical_quantile(sorted, 0.0), std::domain_error);
    CHECK_THROWS_AS(empirical_quantile(sorted, 1.5), std::domain_error);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST_CASE("empirical_tail")
{
    const auto s = CfSample::from_values({1.0, 2.0, 3.0, 4.0});
    auto t = empirical_tail(s, 2.5, 1.5);
    CHECK(t.probability == 0.5);
    CHECK(t.standard_error == doctest::Approx(std::sqrt(0.25 / 4.0)));
    t = empirical_tail(s, 2.5, 0.5);   // boundary values count
    CHECK(t.probability == 1.0);
    CHECK(t.standard_error == 0.0);
    CHECK(empirical_tail(s, 2.5, 10.0).probability == 0.0);
    CHECK_THROWS_AS(empirical_tail(s, 2.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(empirical_tail(s, 2.5, -1.0), std::domain_error);
}

TEST_CASE("compare_bounds flags tails above bound plus three standard errors")
{
    // Values at -8 and +8 around mean 0 and lower median -8; every bound at
    // alpha = 8 is far below the median-centred tail of 0.5.
    std::vector<double> values;
    for (int i = 0; i < 50; ++i) {
        values.push_back(-8.0);
        values.push_back(8.0);
    }
    const auto s = CfSample::from_values(values);
    const std::vector<double> alphas = {8.0};
    const auto report = compare_bounds(s, alphas);
    REQUIRE(report.records.size() == 1);
    const auto& r = report.records[0];
    CHECK(r.mean_tail.probability == 1.0);
    CHECK(r.azuma_violated);
    CHECK(r.refined_violated);
    CHECK(r.mcdiarmid_violated);
    CHECK(r.talagrand_violated);
    CHECK(report.violation_count() == 4);
    CHECK(r.median_tail.probability == 0.5);
    CHECK(r.bounds.mcdiarmid.raw == doctest::Approx(2.0 * std::exp(-32.0)));

    // Tiny alpha: bounds cap at one and nothing can exceed them.
    const auto small = compare_bounds(s, std::vector<double>{0.01});
    CHECK(small.records[0].bounds.azuma.capped == 1.0);
    CHECK(small.records[0].bounds.talagrand.capped == 1.0);
    CHECK(small.violation_count() == 0);
}

TEST_CASE("empirical tails of a real simulation sit below the bounds and decrease in alpha")
{
    auto c = config(64, 20'000, 3);
    const auto s = run_cf_simulation(c);
    const std::vector<double> alphas = {0.1, 0.25, 0.5, 1.0, 2.0, 3.0};
    const auto report = compare_bounds(s, alphas);
    CHECK(report.violation_count() == 0);
    CHECK(report.mean_center == s.mean);
    CHECK(report.median_center == s.median);
    for (std::size_t i = 1; i < report.records.size(); ++i) {
        CHECK(report.records[i].mean_tail.probability <= report.records[i - 1].mean_tail.probability);
        CHECK(report.records[i].median_tail.probability <= report.records[i - 1].median_tail.probability);
    }
}

TEST_CASE("median-mean gap")
{
    const auto s = CfSample::from_values({1.0, 1.0, 1.0, 10.0});
    const auto g = median_mean_gap(s);
    CHECK(g.gap == doctest::Approx(2.25));
    CHECK(g.bound == doctest::Approx(8.0 * std::sqrt(std::numbers::pi)));
    CHECK(g.satisfied);

    const auto wide = CfSample::from_values({0.0, 0.0, 0.0, 100.0});
    CHECK_FALSE(median_mean_gap(wide).satisfied);

    const SymbolBoundModel model{2.0, 8.0};
    CHECK(median_mean_gap(s, model).bound == doctest::Approx(16.0 * std::sqrt(std::numbers::pi)));
}

TEST_CASE("Monte Carlo mean agrees with the exhaustive mean, M=2 n=8")
{
    const auto bpsk = Constellation::psk(2);
    const double exact = CodewordEnumeration(bpsk, SignalParams{8, 16}).verify().expected_cf;
    auto c = config(8, 100'000, 11);
    c.constellation = bpsk;
    const auto s = run_cf_simulation(c);
    const double se = std::sqrt(s.variance / double(c.trials));
    CHECK(std::abs(s.mean - exact) <= 4.0 * se);
}

TEST_CASE("mean crest factor at n=256 lies near sqrt(ln n)")
{
    const auto s = run_cf_simulation(config(256, 5'000, 5));
    const double centre = std::sqrt(std::log(256.0));
    CHECK(s.mean > centre - 1.0);
    CHECK(s.mean < centre + 1.0);
}

TEST_CASE("scaling study")
{
    auto base = config(1, 2'000, 13);
    const std::vector<std::size_t> ns = {1, 4, 16, 64};
    const auto table = scaling_study(ns, base);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0].mean_cf == doctest::Approx(1.0));
    CHECK_FALSE(table.rows[0].ratio_ln.has_value());
    CHECK_FALSE(table.rows[0].ratio_log2.has_value());
    CHECK_FALSE(table.rows[0].band_half_width.has_value());
    for (std::size_t i = 1; i < 4; ++i) {
        REQUIRE(table.rows[i].ratio_ln.has_value());
        CHECK(std::isfinite(*table.rows[i].ratio_ln));
        CHECK(*table.rows[i].ratio_log2 ==
              doctest::Approx(table.rows[i].mean_cf / std::sqrt(std::log2(double(ns[i])))));
    }
    CHECK(table.rows[1].band_half_width.has_value());
    CHECK(table.rows[2].band_half_width.has_value());
    CHECK(table.mean_strictly_increasing);
    CHECK(table.mean_nondecreasing);

    const double lo = std::min({*table.rows[1].ratio_ln, *table.rows[2].ratio_ln, *table.rows[3].ratio_ln});
    const double hi = std::max({*table.rows[1].ratio_ln, *table.rows[2].ratio_ln, *table.rows[3].ratio_ln});
    CHECK(table.ratio_ln_spread() == doctest::Approx((hi - lo) / lo));

    CHECK_THROWS_AS(scaling_study(std::vector<std::size_t>{4, 16}, base), std::invalid_argument);
    CHECK_THROWS_AS(scaling_study(std::vector<std::size_t>{4, 16, 16}, base), std::invalid_argument);
}

TEST_CASE("configuration validation")
{
    auto c = config(8, 99);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.trials = 100;
    CHECK_NOTHROW(c.validate());
    c.n = 0;
    CHECK_THROWS(c.validate());
    c.n = 8;
    c.oversampling = 3;
    CHECK_THROWS(c.validate());
    c.oversampling = 16;
    c.alphas = {0.5, 0.5};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.alphas = {0.0, 0.5};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.alphas = {0.25, 0.5};
    CHECK_NOTHROW(c.validate());

    c.trials = 1'000'000;
    c.n = 4096;
    c.cost_budget = 1e9;
    CHECK_THROWS_AS(run_cf_simulation(c), ResourceError);
}
