#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "valagg/ftl.hpp"
#include "valagg/instances.hpp"
#include "valagg/measure.hpp"
#include "valagg/rng.hpp"

using namespace valagg;

namespace {

InstancePtr affine_scalar(double m, double b = 0.0, double alpha = 2.0) {
    AffineQuadraticSpec spec;
    spec.M = Matrix::scaled_identity(1, m);
    spec.b = {b};
    spec.alpha = alpha;
    return make_affine_quadratic(spec);
}

double inner_min(const InstancePtr& inst, const Vec& y) {
    CostAggregate agg;
    agg.add(freeze_cost(inst, ParameterPoint(y)));
    return ftl_step(agg, inst->domain(), ParameterPoint(y), 1e-12).value;
}

std::vector<InstancePtr> builtin_instances() {
    AffineQuadraticSpec aff;
    aff.M = Matrix(2, 2);
    aff.M.at(0, 0) = 0.3;
    aff.M.at(0, 1) = 0.5;
    aff.M.at(1, 1) = -0.2;
    aff.b = {0.4, -0.1};
    aff.alpha = 1.5;
    aff.offset = 0.2;
    LinearImitationSpec imit;
    imit.a = 0.2;
    imit.action_gain = 0.3;
    imit.expert_gain = 0.1;
    imit.sigma0_sq = 1.0;
    imit.horizon = 3;
    imit.gain_lo = -0.5;
    imit.gain_hi = 0.5;
    return {make_counterexample({0.7, 2.0}), make_affine_quadratic(aff),
            make_linear_imitation(imit)};
}

}  // namespace

TEST_CASE("objective evaluation matches the closed forms") {
    const auto cex = make_counterexample({10.0, 2.0});
    CHECK(evaluate_objective(*cex, ParameterPoint(1.0), ParameterPoint(1.0)) == doctest::Approx(81.0));
    // plugging the minimizer in reaches the floor eps_tilde = 0
    CHECK(evaluate_objective(*cex, ParameterPoint(3.0), ParameterPoint(30.0)) ==
          doctest::Approx(0.0));

    const auto aff = affine_scalar(0.5);
    CHECK(evaluate_objective(*aff, ParameterPoint(2.0), ParameterPoint(1.0)) ==
          doctest::Approx(0.0));
}

TEST_CASE("dimension mismatch names expected and actual") {
    const auto cex = make_counterexample({0.5, 2.0});
    try {
        evaluate_objective(*cex, ParameterPoint(Vec{1.0, 2.0}), ParameterPoint(1.0));
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("expected 1") != std::string::npos);
        CHECK(msg.find("got 2") != std::string::npos);
    }
}

TEST_CASE("analytic gradients") {
    const auto cex = make_counterexample({10.0, 2.0});
    CHECK(objective_gradient(*cex, ParameterPoint(1.0), ParameterPoint(1.0))[0] ==
          doctest::Approx(-18.0));

    // zero gradient at the per-round minimizer
    CHECK(std::fabs(objective_gradient(*cex, ParameterPoint(3.0), ParameterPoint(30.0))[0]) <
          1e-12);

    AffineQuadraticSpec spec;
    spec.M = Matrix(2, 2);
    spec.M.at(0, 0) = 0.4;
    spec.M.at(1, 0) = -0.3;
    spec.M.at(1, 1) = 0.6;
    spec.b = {0.1, 0.2};
    spec.alpha = 1.7;
    const auto aff = make_affine_quadratic(spec);
    const Vec y = {0.3, -0.8};
    const Vec x = {0.5, 0.25};
    Vec expected = vec::sub(x, vec::add(spec.M.apply(y), spec.b));
    expected = vec::scaled(expected, spec.alpha);
    const Vec got = aff->grad_x(y, x);
    CHECK(vec::dist(got, expected) < 1e-14);
}

TEST_CASE("gradient consistency with central finite differences") {
    for (const auto& inst : builtin_instances()) {
        Rng rng(7);
        const Domain& box = inst->reference_box();
        for (int probe = 0; probe < 100; ++probe) {
            const Vec y = rng.uniform_in_box(box.lower, box.upper);
            const Vec x = rng.uniform_in_box(box.lower, box.upper);
            const Vec g = inst->grad_x(y, x);
            const double h = 1e-5 * std::max(1.0, vec::norm(x));
            Vec fd(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                Vec xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                fd[i] = (inst->value(y, xp) - inst->value(y, xm)) / (2.0 * h);
            }
            CHECK(vec::dist(fd, g) <= 1e-6 * std::max(1.0, vec::norm(g)));
        }
    }
}

TEST_CASE("strong convexity holds with the declared modulus") {
    for (const auto& inst : builtin_instances()) {
        Rng rng(11);
        const Domain& box = inst->reference_box();
        const double alpha = inst->constants().alpha;
        for (int probe = 0; probe < 100; ++probe) {
            const Vec y = rng.uniform_in_box(box.lower, box.upper);
            const Vec x1 = rng.uniform_in_box(box.lower, box.upper);
            const Vec x2 = rng.uniform_in_box(box.lower, box.upper);
            const Vec d = vec::sub(x2, x1);
            const double lhs = inst->value(y, x2);
            const double rhs = inst->value(y, x1) + vec::dot(inst->grad_x(y, x1), d) +
                               0.5 * alpha * vec::dot(d, d);
            CHECK(lhs >= rhs - 1e-9);
        }
    }
}

TEST_CASE("first-argument smoothness holds with the declared modulus") {
    for (const auto& inst : builtin_instances()) {
        Rng rng(13);
        const Domain& box = inst->reference_box();
        const double beta = inst->constants().beta;
        for (int probe = 0; probe < 100; ++probe) {
            const Vec y1 = rng.uniform_in_box(box.lower, box.upper);
            const Vec y2 = rng.uniform_in_box(box.lower, box.upper);
            const Vec x = rng.uniform_in_box(box.lower, box.upper);
            const double lhs = vec::dist(inst->grad_x(y1, x), inst->grad_x(y2, x));
            CHECK(lhs <= beta * vec::dist(y1, y2) + 1e-9);
        }
    }
}

TEST_CASE("declared eps_tilde upper-bounds the per-distribution floor") {
    for (const auto& inst : builtin_instances()) {
        Rng rng(17);
        const Domain& box = inst->reference_box();
        const double eps = inst->constants().eps_tilde;
        for (int probe = 0; probe < 50; ++probe) {
            const Vec y = rng.uniform_in_box(box.lower, box.upper);
            CHECK(inner_min(inst, y) <= eps + 1e-8);
        }
    }
}

TEST_CASE("measure_constants recovers analytic ratios") {
    SUBCASE("counterexample theta") {
        const auto inst = make_counterexample({0.5, 2.0});
        const auto measured = measure_constants(*inst, Domain::centered_box(1, 2.0), 500, 3);
        CHECK(measured.theta >= 0.48);
        CHECK(measured.theta <= 0.5 + 1e-9);
        CHECK(measured.alpha == doctest::Approx(2.0));
    }
    SUBCASE("affine scalar contraction") {
        const auto inst = affine_scalar(0.8);
        const auto measured = measure_constants(*inst, Domain::centered_box(1, 2.0), 500, 5);
        CHECK(std::fabs(measured.beta / measured.alpha - 0.8) <= 0.02);
    }
    SUBCASE("first-argument-independent objective has beta exactly zero") {
        const auto inst = affine_scalar(0.0);
        const auto measured = measure_constants(*inst, Domain::centered_box(1, 2.0), 200, 9);
        CHECK(measured.beta == 0.0);
    }
    SUBCASE("reproducible for a fixed seed") {
        const auto inst = make_counterexample({0.5, 2.0});
        const auto a = measure_constants(*inst, Domain::centered_box(1, 2.0), 100, 42);
        const auto b = measure_constants(*inst, Domain::centered_box(1, 2.0), 100, 42);
        CHECK(a.alpha == b.alpha);
        CHECK(a.beta == b.beta);
        CHECK(a.g2 == b.g2);
        CHECK(a.eps_tilde == b.eps_tilde);
    }
    SUBCASE("unbounded box is rejected") {
        const auto inst = make_counterexample({0.5, 2.0});
        CHECK_THROWS_AS(measure_constants(*inst, Domain::unbounded(1), 100, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(measure_constants(*inst, Domain::centered_box(1, 2.0), 1, 1),
                        std::invalid_argument);
    }
    SUBCASE("measured moduli never exceed the declared ones") {
        for (const auto& inst : builtin_instances()) {
            const auto measured = measure_constants(*inst, inst->reference_box(), 2000, 21);
            const auto& declared = inst->constants();
            CHECK(measured.beta <= declared.beta + 1e-9);
            CHECK(measured.g2 <= declared.g2 + 1e-9);
            CHECK(measured.alpha >= declared.alpha - 1e-9);
        }
    }
}

TEST_CASE("freeze_cost snapshots the per-round objective") {
    const auto cex = make_counterexample({10.0, 2.0});
    SUBCASE("minimizer sits at theta times the anchor") {
        const PerRoundCost cost = freeze_cost(cex, ParameterPoint(1.0));
        CHECK(cost.sample_count == 0);
        REQUIRE(cost.quadratic.has_value());
        CHECK(cost.quadratic->minimizer()[0] == doctest::Approx(10.0));
    }
    SUBCASE("a fixed point freezes to a cost minimized at itself") {
        const PerRoundCost cost = freeze_cost(cex, ParameterPoint(0.0));
        CHECK(cost.quadratic->minimizer()[0] == doctest::Approx(0.0));
    }
    SUBCASE("value at the anchor equals the self-performance") {
        const PerRoundCost cost = freeze_cost(cex, ParameterPoint(0.7));
        CHECK(cost.value({0.7}) ==
              doctest::Approx(evaluate_objective(*cex, ParameterPoint(0.7), ParameterPoint(0.7))));
    }
    SUBCASE("frozen gradient matches finite differences") {
        const PerRoundCost cost = freeze_cost(cex, ParameterPoint(0.3));
        Rng rng(29);
        for (int probe = 0; probe < 20; ++probe) {
            const Vec x = {rng.uniform(-2.0, 2.0)};
            const double h = 1e-5 * std::max(1.0, std::fabs(x[0]));
            const double fd = (cost.value({x[0] + h}) - cost.value({x[0] - h})) / (2.0 * h);
            const double g = cost.gradient(x)[0];
            CHECK(std::fabs(fd - g) <= 1e-6 * std::max(1.0, std::fabs(g)));
        }
    }
}

TEST_CASE("domain and parameter validation") {
    CHECK_THROWS_AS(Domain::box({0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Domain::box({0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(ParameterPoint(Vec{1.0, std::nan("")}), std::invalid_argument);
    CHECK_THROWS_AS(ParameterPoint(Vec{}), std::invalid_argument);

    const Domain box = Domain::box({-1.0, 0.0}, {1.0, 2.0});
    CHECK(box.contains({0.0, 1.0}));
    CHECK_FALSE(box.contains({0.0, 3.0}));
    CHECK(box.project({5.0, -5.0}) == Vec{1.0, 0.0});
    CHECK(box.is_bounded());
    CHECK_FALSE(Domain::unbounded(2).is_bounded());
}

TEST_CASE("structural constants validate their relations") {
    const auto c = StructuralConstants::make(2.0, 1.0, 4.0, 0.0);
    CHECK(c.theta == doctest::Approx(0.5));
    CHECK_THROWS_AS(StructuralConstants::make(0.0, 1.0, 4.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(StructuralConstants::make(2.0, -1.0, 4.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(StructuralConstants::make(2.0, 1.0, 0.0, 0.0), std::invalid_argument);
    StructuralConstants broken = c;
    broken.theta = 0.3;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}
