#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "geoflow/catalog.hpp"

using namespace geoflow;
using Catch::Matchers::WithinAbs;

TEST_CASE("gaussian solitons", "[catalog]") {
    SECTION("steady with a linear potential") {
        const auto inst = make_gaussian(3, 0.0, {1, 0, 0});
        const std::vector<double> p{0.3, -0.2, 0.7};
        const auto b = evaluate_bundle(inst.metric, p);
        CHECK(b.scalar == 0.0);
        CHECK(b.grad_potential(0) == 1.0);
        CHECK(b.grad_potential(1) == 0.0);
        CHECK(max_abs(soliton_residual(inst, p)) == 0.0);
    }
    SECTION("shrinking: the Hessian is the metric") {
        const auto inst = make_gaussian(4, 1.0, {});
        const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
        const auto b = evaluate_bundle(inst.metric, p);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK_THAT(b.hess_potential(i, j), WithinAbs(b.g(i, j), 1e-14));
    }
    SECTION("expanding: the trace identity gives lap f = n lambda") {
        const auto inst = make_gaussian(3, -1.0, {});
        const std::vector<double> p{0.5, 0.1, -0.3};
        CHECK_THAT(evaluate_bundle(inst.metric, p).lap_potential, WithinAbs(-3.0, 1e-13));
    }
}

TEST_CASE("rigid solitons fix lambda from the fiber", "[catalog]") {
    CHECK_THAT(make_rigid(2, FiberSpec::sphere(2), 0.0).lambda, WithinAbs(1.0, 1e-15));
    CHECK_THAT(make_rigid(1, FiberSpec::sphere(2), 0.25).lambda, WithinAbs(0.5, 1e-15));
    CHECK_THAT(make_rigid(2, FiberSpec::hyperbolic(2), 0.0).lambda, WithinAbs(-1.0, 1e-15));

    const auto inst = make_rigid(2, FiberSpec::sphere(2), 0.0);
    const auto pts = sample_regular_points(inst, 10, 31);
    for (const auto& p : pts) CHECK(max_abs(soliton_residual(inst, p)) < 1e-9);
}

TEST_CASE("warped traceless examples", "[catalog]") {
    SECTION("values at the origin of the chart") {
        const auto a1 = make_agila(1);
        const auto t0 = std::vector<double>{0.0, 0.1, 0.2};
        const auto& tag1 = a1.metric.warped();
        REQUIRE(tag1.has_value());
        const Jet4 h1 = tag1->h(Jet4::variable(3, 0, 0.0));
        const Jet4 f1 = (*tag1->f)(Jet4::variable(3, 0, 0.0));
        CHECK_THAT(h1.value(), WithinAbs(std::sqrt(2.0), 1e-14));
        CHECK_THAT(f1.value(), WithinAbs(std::log(2.0) / 3.0, 1e-14));
        CHECK_THAT(a1.rho, WithinAbs(1.0 / 3.0, 1e-15));
        CHECK(a1.lambda == 0.0);

        const auto a2 = make_agila(2);
        const auto& tag2 = a2.metric.warped();
        const Jet4 h2 = tag2->h(Jet4::variable(3, 0, 0.0));
        const Jet4 f2 = (*tag2->f)(Jet4::variable(3, 0, 0.0));
        CHECK_THAT(h2.value(), WithinAbs(1.0, 1e-15));
        CHECK_THAT(f2.value(), WithinAbs(1.0 / 12.0, 1e-15));
        CHECK_THAT(a2.lambda, WithinAbs(1.0 / 3.0, 1e-15));
        (void)t0;
    }
    SECTION("radial sectional curvature is negative at t = 0") {
        const auto a1 = make_agila(1);
        const Jet4 h = a1.metric.warped()->h(Jet4::variable(3, 0, 0.0));
        std::array<int, 3> e{2, 0, 0};
        const double hpp = h.partial(MultiIndex::from_exponents(3, std::span<const int>(e)));
        const double k_rad = -hpp / h.value();
        CHECK_THAT(k_rad, WithinAbs(-0.75, 1e-12));
        const std::array<int, 3> e1{1, 0, 0};
        const double hp = h.partial(MultiIndex::from_exponents(3, std::span<const int>(e1)));
        const double k_tan = (0.0 - hp * hp) / (h.value() * h.value());
        CHECK_THAT(k_tan, WithinAbs(-0.25, 1e-12));  // not rotationally symmetric: flat fiber
    }
    SECTION("locally conformally flat: the Cotton tensor vanishes") {
        for (int which : {1, 2}) {
            const auto inst = make_agila(which);
            const auto pts = sample_points(inst.metric, 20, 77);
            for (const auto& p : pts)
                CHECK(max_abs(evaluate_bundle(inst.metric, p).cotton) < 1e-7);
        }
    }
    SECTION("soliton residual across the sampling domain") {
        for (int which : {1, 2}) {
            const auto inst = make_agila(which);
            const auto pts = sample_regular_points(inst, 50, 42);
            double worst = 0.0;
            for (const auto& p : pts)
                worst = std::max(worst, max_abs(soliton_residual(inst, p)));
            CHECK(worst < 1e-8);
        }
    }
    SECTION("only two constructions exist") {
        CHECK_THROWS_AS(make_agila(3), config_error);
    }
}

TEST_CASE("product cylinders", "[catalog]") {
    SECTION("unit sphere fiber") {
        const ChartMetric m = make_cylinder(FiberSpec::Kind::sphere, 3);
        const std::vector<double> p{0.2, 0.1, -0.3};
        const auto b = evaluate_bundle(m, p);
        CHECK_THAT(b.scalar, WithinAbs(2.0, 1e-11));
    }
    SECTION("hyperbolic fiber") {
        const ChartMetric m = make_cylinder(FiberSpec::Kind::hyperbolic, 3);
        const std::vector<double> p{0.2, 0.1, -0.3};
        const auto b = evaluate_bundle(m, p);
        CHECK_THAT(b.scalar, WithinAbs(-2.0, 1e-11));
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(to_eigen(b.ricci),
                                                                      to_eigen(b.g));
        CHECK_THAT(ges.eigenvalues()(0), WithinAbs(-1.0, 1e-11));
        CHECK_THAT(ges.eigenvalues()(1), WithinAbs(-1.0, 1e-11));
        CHECK_THAT(ges.eigenvalues()(2), WithinAbs(0.0, 1e-11));
    }
    SECTION("the four-dimensional sphere cylinder is Bach flat") {
        const ChartMetric m = make_cylinder(FiberSpec::Kind::sphere, 4);
        const auto pts = sample_points(m, 10, 4);
        for (const auto& p : pts) CHECK(max_abs(evaluate_bundle(m, p).bach) < 1e-8);
    }
}

TEST_CASE("general warped charts", "[catalog]") {
    SECTION("constant warping over a flat fiber is flat") {
        WarpedSpec spec;
        spec.fiber = FiberSpec::flat(2);
        spec.h = named_univariate("one");
        const ChartMetric m = warped_chart(spec, "flat-disguise");
        const std::vector<double> p{0.7, 0.3, -0.2};
        const auto b = evaluate_bundle(m, p);
        CHECK(max_abs(b.riem) < 1e-14);
    }
    SECTION("sine warping over a sphere fiber is the round sphere") {
        for (int n : {3, 4}) {
            WarpedSpec spec;
            spec.fiber = FiberSpec::sphere(n - 1);
            spec.h = named_univariate("sin");
            spec.t_min = 0.4;
            spec.t_max = 2.7;
            const ChartMetric m = warped_chart(spec, "round-sphere");
            const auto pts = sample_points(m, 10, 6);
            for (const auto& p : pts) {
                const auto b = evaluate_bundle(m, p);
                CHECK_THAT(b.scalar, WithinAbs(n * (n - 1.0), 1e-9));
                double einstein = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        einstein = std::max(einstein,
                                            std::abs(b.ricci(i, j) - (n - 1.0) * b.g(i, j)));
                CHECK(einstein < 1e-8);
            }
        }
    }
    SECTION("linear warping over a unit sphere fiber is polar-coordinate flat space") {
        WarpedSpec spec;
        spec.fiber = FiberSpec::sphere(2);
        spec.h = named_univariate("t");
        spec.t_min = 0.5;
        spec.t_max = 3.0;
        const ChartMetric m = warped_chart(spec, "polar");
        const auto pts = sample_points(m, 10, 8);
        for (const auto& p : pts) CHECK(max_abs(evaluate_bundle(m, p).riem) < 1e-11);
    }
    SECTION("non-positive warping is rejected at evaluation") {
        WarpedSpec spec;
        spec.fiber = FiberSpec::flat(2);
        spec.h = named_univariate("t");
        spec.t_min = -2.0;
        spec.t_max = 2.0;
        const ChartMetric m = warped_chart(spec, "collapsing");
        CHECK_THROWS_AS(m.metric_jets(std::vector<double>{-1.0, 0.1, 0.1}), evaluation_error);
    }
    SECTION("hyperbolic fiber chart is confined to the ball") {
        const ChartMetric m = make_cylinder(FiberSpec::Kind::hyperbolic, 3);
        CHECK_THROWS_AS(m.metric_jets(std::vector<double>{0.0, 1.2, 0.4}), evaluation_error);
    }
}

TEST_CASE("fiber specifications validate their curvature sign", "[catalog]") {
    CHECK_THROWS_AS(FiberSpec(FiberSpec::Kind::sphere, 2, -1.0), config_error);
    CHECK_THROWS_AS(FiberSpec(FiberSpec::Kind::flat, 2, 0.5), config_error);
    CHECK_THROWS_AS(FiberSpec(FiberSpec::Kind::hyperbolic, 2, 1.0), config_error);
    CHECK_THROWS_AS(FiberSpec(FiberSpec::Kind::sphere, 1, 1.0), config_error);
    CHECK(FiberSpec::sphere(2).scalar_curvature() == 2.0);
    CHECK(FiberSpec::hyperbolic(3).scalar_curvature() == -6.0);
}

TEST_CASE("point sampling is seeded and constrained", "[catalog]") {
    const auto inst = make_agila(1);
    const auto a = sample_points(inst.metric, 20, 42);
    const auto b = sample_points(inst.metric, 20, 42);
    const auto c = sample_points(inst.metric, 20, 43);
    CHECK(a == b);
    CHECK(a != c);
    for (const auto& p : a) {
        CHECK(p[0] >= -3.0);
        CHECK(p[0] <= 3.0);
        CHECK(p[1] * p[1] + p[2] * p[2] <= 0.64 + 1e-12);
    }
}

TEST_CASE("catalog lookup by name", "[catalog]") {
    CHECK(catalog_lookup("gaussian", {}, {}).soliton.has_value());
    CHECK(catalog_lookup("rigid-r2xs2", {}, {}).soliton->dim() == 4);
    CHECK(catalog_lookup("agila1", {}, {}).soliton->rho == 1.0 / 3.0);
    CHECK_FALSE(catalog_lookup("cyl-sphere", {}, {}).soliton.has_value());
    CHECK_FALSE(catalog_lookup("cyl-hyperbolic", {}, {}).soliton.has_value());
    CHECK_THROWS_AS(catalog_lookup("nope", {}, {}), config_error);
    CHECK_THROWS_AS(catalog_lookup("agila1", 0.5, {}), config_error);  // pinned parameters

    SECTION("warped spec strings") {
        const auto entry = catalog_lookup("warped:fiber=sphere,n=4,h=sin,tmin=0.4,tmax=2.7",
                                          {}, {});
        CHECK(entry.metric.dim() == 4);
        CHECK_FALSE(entry.soliton.has_value());
        const auto withf = catalog_lookup(
            "warped:fiber=flat,n=3,h=agila1-h,f=agila1-f,tmin=-2,tmax=2", 1.0 / 3.0, {});
        REQUIRE(withf.soliton.has_value());
        const auto pts = sample_regular_points(*withf.soliton, 10, 9);
        for (const auto& p : pts) CHECK(max_abs(soliton_residual(*withf.soliton, p)) < 1e-8);
        CHECK_THROWS_AS(catalog_lookup("warped:fiber=flat,n=3", {}, {}), config_error);
        CHECK_THROWS_AS(catalog_lookup("warped:fiber=flat,n=3,h=mystery", {}, {}),
                        config_error);
        CHECK_THROWS_AS(catalog_lookup("warped:fiber=flat,n=9,h=one", {}, {}), config_error);
    }
}
