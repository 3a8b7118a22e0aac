#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "valagg/diagnostics.hpp"
#include "valagg/instances.hpp"

using namespace valagg;

namespace {

std::vector<ParameterPoint> points(std::initializer_list<double> xs) {
    std::vector<ParameterPoint> out;
    for (double x : xs) out.push_back(ParameterPoint(x));
    return out;
}

RunTrace run_cex(double theta, double x1, long iters, double abort_magnitude = 1e100) {
    LoopConfig cfg;
    cfg.iterations = iters;
    cfg.x1 = ParameterPoint(x1);
    cfg.abort_magnitude = abort_magnitude;
    return run_deterministic(make_counterexample({theta, 2.0}), cfg);
}

/// Synthetic trace whose self-performance is an exact power law c·n^p.
RunTrace power_law_trace(double c, double p, std::size_t n) {
    RunTrace trace;
    trace.effective_constants = StructuralConstants::make(2.0, 1.0, 4.0, 0.0);
    trace.base_constants = trace.effective_constants;
    for (std::size_t i = 1; i <= n; ++i) {
        trace.iterates.push_back(ParameterPoint(static_cast<double>(i)));
        const double v = c * std::pow(static_cast<double>(i), p);
        trace.self_values.push_back(v);
        trace.self_values_effective.push_back(v);
        trace.per_round_values.push_back(v);
    }
    return trace;
}

}  // namespace

TEST_CASE("concentration statistic") {
    SUBCASE("constant sequences concentrate perfectly") {
        const auto it = points({2.0, 2.0, 2.0, 2.0});
        for (std::size_t n = 2; n <= 4; ++n) CHECK(compute_s(it, n) == 0.0);
    }
    SUBCASE("S_2 is the first step length") {
        CHECK(compute_s(points({0.0, 1.0}), 2) == doctest::Approx(1.0));
    }
    SUBCASE("direct formula") {
        CHECK(compute_s(points({0.0, 1.0, 3.0}), 3) == doctest::Approx(2.5));
    }
    SUBCASE("window of one term is the last step") {
        const auto it = points({0.0, 1.0, 3.0, 3.5});
        CHECK(compute_s_window(it, 3, 4) == doctest::Approx(0.5));
    }
    SUBCASE("windowed example") {
        CHECK(compute_s_window(points({0.0, 1.0, 3.0}), 2, 3) == doctest::Approx(2.0));
    }
    SUBCASE("full window coincides with the plain statistic") {
        const auto it = points({0.4, -1.0, 2.0, 0.3, 0.9});
        for (std::size_t n = 2; n <= 5; ++n)
            CHECK(compute_s_window(it, 1, n) == doctest::Approx(compute_s(it, n)));
    }
    SUBCASE("bad indices are rejected") {
        const auto it = points({0.0, 1.0});
        CHECK_THROWS_AS(compute_s(it, 1), std::invalid_argument);
        CHECK_THROWS_AS(compute_s(it, 3), std::invalid_argument);
        CHECK_THROWS_AS(compute_s_window(it, 0, 2), std::invalid_argument);
        CHECK_THROWS_AS(compute_s_window(it, 2, 2), std::invalid_argument);
    }
}

TEST_CASE("step-contraction margins match direct evaluation") {
    const RunTrace trace = run_cex(0.5, 1.0, 500);
    const auto records = check_bounds(trace, trace.effective_constants, {BoundId::lemma3});
    REQUIRE(records.size() == 1);
    const auto& rec = records.front();
    CHECK(rec.passed);
    // oracle: recompute theta*S_n/n - ||x_{n+1} - x_n|| from raw iterates
    std::size_t idx = 0;
    for (std::size_t n = 2; n < trace.rounds(); ++n, ++idx) {
        const double s_n = compute_s(trace.iterates, n);
        const double step =
            vec::dist(trace.iterates[n].coords, trace.iterates[n - 1].coords);
        const double expected = 0.5 * s_n / static_cast<double>(n) - step;
        CHECK(rec.per_iterate_margin[idx] == doctest::Approx(expected).epsilon(1e-9));
        CHECK(rec.per_iterate_margin[idx] >= -1e-9);
    }
}

TEST_CASE("concentration decay passes on contracting runs and trivially on constant ones") {
    SUBCASE("contracting run") {
        const RunTrace trace = run_cex(0.5, 1.0, 400);
        const auto rec = check_bounds(trace, trace.effective_constants, {BoundId::prop2}).front();
        CHECK(rec.passed);
        // first margin is the G2/alpha headroom of S_2
        CHECK(rec.per_iterate_margin.front() ==
              doctest::Approx(trace.effective_constants.g2 / 2.0 - 0.5));
    }
    SUBCASE("constant iterates give zero concentration against a nonnegative envelope") {
        const RunTrace trace = run_cex(1.0, 1.0, 50);
        const auto rec = check_bounds(trace, trace.effective_constants, {BoundId::prop2}).front();
        CHECK(rec.passed);
        for (std::size_t i = 1; i < rec.per_iterate_margin.size(); ++i)
            CHECK(rec.per_iterate_margin[i] >= 0.0);
    }
}

TEST_CASE("divergence witness on an aborted prefix") {
    const RunTrace trace = run_cex(10.0, 1.0, 100, 1e6);
    REQUIRE(trace.aborted);
    const auto rec =
        check_bounds(trace, trace.effective_constants, {BoundId::thm3_lower}).front();
    CHECK(rec.passed);
    CHECK(rec.asymptotic);
    CHECK(rec.note.find("c0=") != std::string::npos);
}

TEST_CASE("windowed concentration consistency check") {
    const RunTrace trace = run_cex(0.5, 1.0, 512);
    const auto rec =
        check_bounds(trace, trace.effective_constants, {BoundId::corollary1}).front();
    CHECK(rec.passed);
    CHECK(rec.asymptotic);
    CHECK_FALSE(rec.per_iterate_margin.empty());
}

TEST_CASE("thm1 chain record on a deterministic run") {
    const RunTrace trace = run_cex(0.9, 1.0, 300);
    const auto rec = check_bounds(trace, trace.effective_constants, {BoundId::thm1}).front();
    CHECK(rec.passed);
    REQUIRE(rec.per_iterate_margin.size() == 2);
    CHECK(rec.per_iterate_margin[0] >= -1e-9);
    CHECK(rec.per_iterate_margin[1] >= -1e-9);
}

TEST_CASE("rate fitting") {
    SUBCASE("contracting counterexample fits 2(theta-1)") {
        const RunTrace trace = run_cex(0.5, 1.0, 10000);
        const RateFit fit = fit_rate(trace, 0.0, {100, 10000});
        CHECK(std::fabs(fit.fitted_exponent - (-1.0)) <= 0.05);
        CHECK(fit.r_squared >= 0.999);
        CHECK(fit.theoretical_exponent == doctest::Approx(-1.0));
    }
    SUBCASE("divergent counterexample fits the positive branch") {
        const RunTrace trace = run_cex(1.5, 1.0, 10000);
        const RateFit fit = fit_rate(trace, 0.0, {100, 10000});
        CHECK(std::fabs(fit.fitted_exponent - 1.0) <= 0.05);
    }
    SUBCASE("an exact power law is recovered to machine precision") {
        const RunTrace trace = power_law_trace(3.7, -1.35, 2000);
        const RateFit fit = fit_rate(trace, 0.0, {20, 2000});
        CHECK(std::fabs(fit.fitted_exponent - (-1.35)) <= 1e-10);
        CHECK(fit.r_squared == doctest::Approx(1.0));
    }
    SUBCASE("an injected floor is subtracted before the logs") {
        RunTrace trace = power_law_trace(2.0, -0.8, 2000);
        for (auto& v : trace.self_values) v += 0.125;
        const RateFit fit = fit_rate(trace, 0.125, {20, 2000});
        CHECK(std::fabs(fit.fitted_exponent - (-0.8)) <= 1e-10);
        CHECK(fit.offset_used == doctest::Approx(0.125));
    }
    SUBCASE("sequences at their floor are reported as unusable") {
        const RunTrace trace = run_cex(0.5, 0.0, 2000);  // identically zero excess
        CHECK_THROWS_AS(fit_rate(trace, 0.0, {20, 2000}), std::runtime_error);
    }
    SUBCASE("empty windows are rejected") {
        const RunTrace trace = run_cex(0.5, 1.0, 100);
        CHECK_THROWS_AS(fit_rate(trace, 0.0, {90, 20}), std::invalid_argument);
    }
}

TEST_CASE("mean-policy distance is dominated by the concentration statistic") {
    for (double theta : {0.3, 0.7, 0.95}) {
        const RunTrace trace = run_cex(theta, 1.0, 300);
        const std::size_t n = trace.rounds();
        Vec mean = vec::zeros(1);
        for (const auto& p : trace.iterates)
            vec::axpy(mean, 1.0 / static_cast<double>(n), p.coords);
        const double lhs = vec::dist(trace.iterates.back().coords, mean);
        CHECK(lhs <= trace.s_values.back() + 1e-12);
    }
}

TEST_CASE("total movement is summable on contracting runs") {
    // partial sums of step norms at N and 2N differ by less than the
    // envelope tail sum_{k=N}^{2N-1} theta/k * e^{1-theta} k^{theta-1} S_2
    const double theta = 0.5;
    const RunTrace trace = run_cex(theta, 1.0, 800);
    double p400 = 0.0, p800 = 0.0;
    for (std::size_t i = 0; i < trace.step_norms.size(); ++i) {
        if (i < 399) p400 += trace.step_norms[i];
        p800 += trace.step_norms[i];
    }
    const double s2 = trace.s_values.front();
    double tail = 0.0;
    for (std::size_t k = 400; k < 800; ++k)
        tail += theta / static_cast<double>(k) * std::exp(1.0 - theta) *
                std::pow(static_cast<double>(k), theta - 1.0) * s2;
    CHECK(p800 - p400 <= tail + 1e-9);
}

TEST_CASE("regularization records require transform context") {
    const RunTrace plain = run_cex(0.5, 1.0, 50);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(check_bounds(plain, plain.effective_constants, {BoundId::corollary2})),
        doctest::Contains("mixing"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(check_bounds(plain, plain.effective_constants, {BoundId::corollary3})),
        doctest::Contains("weighted"), std::invalid_argument);
}

TEST_CASE("bound checks refuse aborted traces where completeness matters") {
    const RunTrace trace = run_cex(10.0, 1.0, 100, 1e6);
    REQUIRE(trace.aborted);
    CHECK_THROWS_AS(
        static_cast<void>(check_bounds(trace, trace.effective_constants, {BoundId::thm2})),
        std::invalid_argument);
    CHECK_THROWS_AS(
        static_cast<void>(check_bounds(trace, trace.effective_constants, {BoundId::prop2})),
        std::invalid_argument);
}

TEST_CASE("missing constants are reported by name") {
    const RunTrace trace = run_cex(0.5, 1.0, 50);
    StructuralConstants broken = trace.effective_constants;
    broken.g2 = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(static_cast<void>(check_bounds(trace, broken, {BoundId::thm2})),
                         doctest::Contains("g2"), std::invalid_argument);
}

TEST_CASE("bound identifiers round-trip through their names") {
    for (BoundId id : {BoundId::thm1, BoundId::thm2, BoundId::thm3_lower, BoundId::lemma3,
                       BoundId::prop2, BoundId::corollary1, BoundId::corollary2,
                       BoundId::corollary3}) {
        const auto back = bound_id_from_name(bound_id_name(id));
        REQUIRE(back.has_value());
        CHECK(*back == id);
    }
    CHECK_FALSE(bound_id_from_name("nope").has_value());
}
