#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "seqband/error.hpp"
#include "seqband/gos.hpp"

using namespace seqband;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected seqband::Error");
    return ErrorCode::NumericalError;
}

}  // namespace

TEST_CASE("single exponential waiting time per row")
{
    const LoadSharingParams params({1.0});
    const auto data = sample_gos(params, Baseline::exponential(), 100000, 3);
    CHECK(data.M() == 100000);
    CHECK(data.r() == 1);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double x : data.data()) {
        sum += x;
        sum_sq += x * x;
    }
    const double n = static_cast<double>(data.M());
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("gamma (2,1) with uniform baseline matches two uniform order statistics")
{
    const std::size_t n = 100000;
    const auto data = sample_gos(LoadSharingParams({2.0, 1.0}), Baseline::uniform(), n, 11);

    std::mt19937_64 eng(99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double m1 = 0.0, m1_sq = 0.0, b1 = 0.0, b1_sq = 0.0;
    double m2 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = unif(eng);
        const double b = unif(eng);
        const double lo = std::min(a, b);
        b1 += lo;
        b1_sq += lo * lo;
        b2 += std::max(a, b);
        m1 += data(i, 0);
        m1_sq += data(i, 0) * data(i, 0);
        m2 += data(i, 1);
    }
    const double dn = static_cast<double>(n);
    m1 /= dn;
    b1 /= dn;
    m2 /= dn;
    b2 /= dn;
    const double se = std::sqrt((m1_sq / dn - m1 * m1) / dn + (b1_sq / dn - b1 * b1) / dn);
    CHECK(std::abs(m1 - b1) < 4.0 * se);
    CHECK(std::abs(m1 - 1.0 / 3.0) < 4.0 * se);
    CHECK(std::abs(m2 - b2) < 0.01);
}

TEST_CASE("illustration setting: 4-out-of-10 systems")
{
    const LoadSharingParams params({10.0, 9.0, 11.0, 13.0});
    const auto data = sample_gos(params, Baseline::exponential(), 40, 2024);
    CHECK(data.M() == 40);
    CHECK(data.r() == 4);
    for (std::size_t i = 0; i < data.M(); ++i) {
        for (std::size_t j = 1; j < data.r(); ++j) {
            CHECK(data(i, j) > data(i, j - 1));
        }
    }
}

TEST_CASE("sampling is deterministic and independent of the worker count")
{
    const LoadSharingParams params({3.0, 2.0, 1.5});
    const auto baseline = Baseline::weibull(1.7, 2.0);
    const auto a = sample_gos(params, baseline, 500, 42, Execution::serial);
    const auto b = sample_gos(params, baseline, 500, 42, Execution::parallel);
    const auto c = sample_gos(params, baseline, 500, 43, Execution::serial);
    CHECK(a == b);
    CHECK_FALSE(a == c);

    // rows depend only on (seed, row)
    const auto shorter = sample_gos(params, baseline, 10, 42);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(shorter(i, j) == a(i, j));
        }
    }
}

TEST_CASE("hazard-scale draws map to any baseline")
{
    const LoadSharingParams params({2.0, 1.0});
    const auto z = sample_gos_hazard(params, 50, 5);
    const auto x = sample_gos(params, Baseline::uniform(), 50, 5);
    for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(x(i, j) == doctest::Approx(1.0 - std::exp(-z(i, j))).epsilon(1e-14));
        }
    }
}

TEST_CASE("order statistics: first GOS has the minimum-of-n law")
{
    // gamma_j = n - j + 1 with n = 5
    const LoadSharingParams params({5.0, 4.0, 3.0});
    const std::size_t reps = 100000;
    const auto data = sample_gos(params, Baseline::uniform(), reps, 8);
    std::vector<double> first(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        first[i] = data(i, 0);
    }
    std::sort(first.begin(), first.end());
    double dist = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
        const double f = 1.0 - std::pow(1.0 - first[i], 5.0);
        dist = std::max({dist, std::abs(f - static_cast<double>(i) / reps),
                         std::abs(f - static_cast<double>(i + 1) / reps)});
    }
    CHECK(dist < 0.01);
}

TEST_CASE("empty requests and invalid rows")
{
    CHECK(code_of([] { sample_gos(LoadSharingParams({1.0}), Baseline::uniform(), 0, 1); }) ==
          ErrorCode::EmptyRequest);
    CHECK(code_of([] { SampleSet(0, 2, {}); }) == ErrorCode::EmptyRequest);
    CHECK(code_of([] { SampleSet(1, 2, {2.0, 2.0}); }) == ErrorCode::InvalidSample);
    CHECK(code_of([] { SampleSet(1, 2, {-1.0, 2.0}); }) == ErrorCode::InvalidSample);
    CHECK(code_of([] { LoadSharingParams({1.0, 0.0}); }) == ErrorCode::InvalidParams);
    CHECK(code_of([] { LoadSharingParams(std::vector<double>{}); }) == ErrorCode::InvalidParams);
}

TEST_CASE("baselines")
{
    CHECK(code_of([] { Baseline::custom([](double p) { return 1.0 - p; }); }) == ErrorCode::InvalidBaseline);
    CHECK(code_of([] { Baseline::tabulated({0.0, 0.5, 1.0}, {0.0, 2.0, 1.0}); }) == ErrorCode::InvalidBaseline);
    CHECK(code_of([] { Baseline::parse("gamma:2"); }) == ErrorCode::InvalidBaseline);
    CHECK(code_of([] { Baseline::exponential(-1.0); }) == ErrorCode::InvalidBaseline);

    for (const auto& b : {Baseline::exponential(2.0), Baseline::uniform(), Baseline::weibull(0.7, 3.0),
                          Baseline::parse("weibull:2,0.5"), Baseline::tabulated({0.0, 0.3, 1.0}, {0.0, 1.0, 4.0})}) {
        for (double p : {0.05, 0.3, 0.5, 0.9}) {
            CHECK(b.cdf(b.quantile(p)) == doctest::Approx(p).epsilon(1e-12));
        }
        CHECK(b.from_hazard(0.7) == doctest::Approx(b.quantile(1.0 - std::exp(-0.7))).epsilon(1e-12));
    }
    CHECK(Baseline::parse("exp:2").quantile(0.5) == doctest::Approx(std::log(2.0) / 2.0));
}

TEST_CASE("pooled events: single system")
{
    const SampleSet data(1, 2, {1.0, 2.0});
    const auto ev = pooled_events(data, LoadSharingParams({2.0, 1.0}));
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].time == 1.0);
    CHECK(ev[0].gamma_bar == 2.0);
    CHECK(ev[0].rank == 1);
    CHECK(ev[1].time == 2.0);
    CHECK(ev[1].gamma_bar == 1.0);
    CHECK(ev[1].rank == 2);
    CHECK(ev[1].delta_bar[1] == 1.0);
}

TEST_CASE("pooled events: absorbed systems contribute zero")
{
    const SampleSet data(2, 1, {1.0, 3.0});
    const auto ev = pooled_events(data, LoadSharingParams({5.0}));
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].gamma_bar == 5.0);
    CHECK(ev[1].gamma_bar == 2.5);
    CHECK(ev[0].system == 0);
    CHECK(ev[1].system == 1);
}

TEST_CASE("pooled events: ties share the left-limit occupancy")
{
    const SampleSet data(3, 2, {1.0, 2.0, 1.0, 4.0, 0.5, 3.0});
    const LoadSharingParams params({3.0, 7.0});
    const auto ev = pooled_events(data, params);
    REQUIRE(ev.size() == 6);
    CHECK(ev[0].time == 0.5);
    // two systems fail at t = 1, both see the state before t = 1
    CHECK(ev[1].time == 1.0);
    CHECK(ev[2].time == 1.0);
    CHECK(ev[1].system == 0);
    CHECK(ev[2].system == 1);
    CHECK(ev[1].gamma_bar == doctest::Approx((3.0 + 3.0 + 7.0) / 3.0));
    CHECK(ev[2].gamma_bar == ev[1].gamma_bar);
    CHECK(ev[3].gamma_bar == doctest::Approx(7.0));

    CHECK_THROWS_AS(pooled_events(data, LoadSharingParams({1.0})), Error);
}

TEST_CASE("pooled gamma-bar stays in [0, max gamma]")
{
    const LoadSharingParams params({4.0, 9.0, 1.0, 6.0});
    const auto data = sample_gos(params, Baseline::exponential(), 200, 17);
    for (const auto& e : pooled_events(data, params)) {
        CHECK(e.gamma_bar >= 0.0);
        CHECK(e.gamma_bar <= 9.0);
        double total = 0.0;
        for (double d : e.delta_bar) {
            total += d;
        }
        CHECK(total <= 1.0 + 1e-15);
    }
}

TEST_CASE("step functions are right-continuous")
{
    const StepFunction f({1.0, 2.0}, {0.5, 0.75}, 0.1);
    CHECK(f(0.5) == 0.1);
    CHECK(f(1.0) == 0.5);
    CHECK(f.left_limit(1.0) == 0.1);
    CHECK(f(1.5) == 0.5);
    CHECK(f(2.0) == 0.75);
    CHECK(f.left_limit(2.0) == 0.5);
    CHECK(f.final_value() == 0.75);
    CHECK_THROWS_AS(StepFunction({2.0, 1.0}, {0.0, 1.0}), Error);
}

TEST_CASE("config validation")
{
    McConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_reps = 0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = McConfig{};
    c.grid_size = 1;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = McConfig{};
    c.tolerance = 0.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("alphas use n - j + 1")
{
    const LoadSharingParams params({10.0, 9.0, 11.0, 13.0});
    const auto a = params.alphas(10.0);
    CHECK(a[0] == doctest::Approx(1.0));
    CHECK(a[1] == doctest::Approx(1.0));
    CHECK(a[2] == doctest::Approx(11.0 / 8.0));
    CHECK(a[3] == doctest::Approx(13.0 / 7.0));
}
