#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spl/curve.hpp"
#include "spl/discretization.hpp"
#include "spl/geometry.hpp"
#include "spl/quadrature.hpp"

using namespace spl;

TEST_CASE("circle length, start point and outward normal")
{
    const PlanarCurve c = make_circle(0.5);
    CHECK(arc_length(c, c.t_begin(), c.t_end()) == doctest::Approx(oracle::pi).epsilon(1e-12));
    CHECK((c.point(0.0) - Vec2(0.5, 0.0)).norm() < 1e-15);
    CHECK((c.unit_normal(0.0) - Vec2(1.0, 0.0)).norm() < 1e-15);
    CHECK(c.closed());
    CHECK((c.point(c.t_begin()) - c.point(c.t_end())).norm() < 1e-14);
}

TEST_CASE("signed distance to the circle")
{
    const PlanarCurve c = make_circle(0.5);
    const SignedDistanceSample s = signed_distance(c, Vec2(0.75, 0.0));
    CHECK(s.d == doctest::Approx(0.25).epsilon(1e-12));
    CHECK((s.projection - Vec2(0.5, 0.0)).norm() < 1e-12);
    CHECK(signed_distance(c, Vec2(0.0, 0.3)).d == doctest::Approx(-0.2).epsilon(1e-12));

    const Vec2 on = c.point(0.3);
    const SignedDistanceSample z = signed_distance(c, on);
    CHECK(std::abs(z.d) < 1e-12);
    CHECK((z.projection - on).norm() < 1e-12);

    const double h = 1e-4, r = 0.7;
    const Vec2 x(r * std::cos(0.4), r * std::sin(0.4));
    auto d = [&](const Vec2& p) { return signed_distance(c, p).d; };
    const double lap = (d(x + Vec2(h, 0)) + d(x - Vec2(h, 0)) + d(x + Vec2(0, h)) + d(x - Vec2(0, h)) - 4.0 * d(x)) / (h * h);
    CHECK(lap == doctest::Approx(1.0 / r).epsilon(1e-4));
    const double gx = (d(x + Vec2(h, 0)) - d(x - Vec2(h, 0))) / (2 * h);
    const double gy = (d(x + Vec2(0, h)) - d(x - Vec2(0, h))) / (2 * h);
    CHECK(std::hypot(gx, gy) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("signed distance to an ellipse matches brute force")
{
    const PlanarCurve e = make_ellipse(0.6, 0.3);
    for (const Vec2 x : {Vec2(0.7, 0.1), Vec2(0.1, 0.25), Vec2(-0.3, -0.4)}) {
        double best = INFINITY;
        for (int k = 0; k < 200000; ++k) best = std::min(best, (e.point(k / 200000.0) - x).norm());
        const double d = signed_distance(e, x).d;
        CHECK(std::abs(std::abs(d) - best) < 1e-9);
    }
}

TEST_CASE("counterexample graph")
{
    CHECK(counterexample_f(1.0, 0.5) == doctest::Approx(2.0 / 3.0 * std::sin(1.0)).epsilon(1e-14));
    CHECK(counterexample_f(1.0, 0.5) == doctest::Approx(0.56098).epsilon(1e-5));
    for (double x : {1e-2, 1e-4, 1e-6}) CHECK(std::abs(counterexample_f(x, 0.5)) <= x);
    CHECK(counterexample_df(0.3, 0.5) ==
          doctest::Approx((oracle::counterexample_f(0.3 + 1e-7, 0.5) - oracle::counterexample_f(0.3 - 1e-7, 0.5)) / 2e-7)
              .epsilon(1e-6));

    // length on [2^-k, 1] is a Cauchy sequence
    auto speed = [](double x) { return std::sqrt(1.0 + std::pow(counterexample_df(x, 0.5), 2)); };
    double prev = 0.0, last_increment = INFINITY;
    for (int k = 4; k <= 12; k += 2) {
        const double len = integrate_adaptive(speed, std::ldexp(1.0, -k), 1.0, 1e-10, 60).value;
        if (k > 4) {
            // increments shrink like 2^(-k alpha)
            CHECK(len - prev < 0.6 * last_increment);
            last_increment = len - prev;
        }
        prev = len;
    }
}

TEST_CASE("circle discretization")
{
    const CurveDiscretization d = discretize(make_circle(0.5), 256);
    CHECK(d.total_length() == doctest::Approx(oracle::pi).epsilon(1e-4));
    CHECK(std::abs(d.total_length() - oracle::pi) <= oracle::pi * oracle::pi * oracle::pi / 6.0 / (256.0 * 256.0));
    for (Index i = 0; i < d.size(); ++i) {
        CHECK(d.node(i).dot(d.normal(i)) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(d.normal(i).norm() - 1.0) < 1e-12);
    }
    const CurveDiscretization fine = discretize(make_circle(0.5), 512);
    CHECK(fine.max_weight() == doctest::Approx(0.5 * d.max_weight()).epsilon(1e-12));
}

TEST_CASE("ball measure")
{
    const CurveDiscretization d = discretize(make_circle(0.5), 1024);
    CHECK(ball_measure(d, Vec2::Zero(), 1.0) == doctest::Approx(oracle::pi).epsilon(1e-12));
    const Vec2 on(0.5, 0.0);
    CHECK(ball_measure(d, on, 0.01) == doctest::Approx(0.02).epsilon(0.01));
    CHECK(ball_measure(d, on, 0.01) == doctest::Approx(oracle::arc_in_ball(0.01, 0.5)).epsilon(1e-6));
    CHECK(ball_measure(d, Vec2(0.6, 0.0), 0.05) == 0.0);

    const PlanarCurve g = make_counterexample_curve(0.5);
    const CurveDiscretization dg = discretize(g, 2048, DiscretizeOptions{1e-4});
    const double r = std::ldexp(1.0, -8);
    CHECK(ball_measure(dg, Vec2::Zero(), r) >= oracle::counterexample_bound(0.5, r));
}

TEST_CASE("winding test")
{
    const CurveDiscretization d = discretize(make_ellipse(0.6, 0.3), 512);
    CHECK(encloses(d, Vec2(0.5, 0.0)));
    CHECK_FALSE(encloses(d, Vec2(0.0, 0.35)));
}

TEST_CASE("chart Lipschitz constants")
{
    const PlanarCurve seg = make_graph([](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 1.0);
    CHECK(lipschitz_constant_estimate(seg, {graph_chart(seg)}) == doctest::Approx(1.0));

    const PlanarCurve c = make_circle(0.5);
    const double quarter = oracle::pi / 4.0;
    CHECK(lipschitz_constant_estimate(c, circle_charts(0.5, Vec2::Zero(), 4, quarter)) ==
          doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-3));

    double prev = 0.0;
    for (int k = 3; k <= 9; k += 3) {
        const PlanarCurve piece = restrict_parameters(make_counterexample_curve(0.5), std::ldexp(1.0, -k), 1.0);
        const double lip = lipschitz_constant_estimate(piece, {graph_chart(piece)});
        CHECK(lip > 1.5 * prev);
        prev = lip;
    }
}

TEST_CASE("density mollification")
{
    const CurveDiscretization d = discretize(make_circle(0.5), 1024);
    const Density one = constant_density(d, 1.0);
    const Density m1 = mollify_density(d, one, 0.05);
    CHECK((m1.values.array() - 1.0).abs().maxCoeff() < 1e-14);

    const Density step = sample_density(d, [](const Vec2& x) { return x.y() > 0.0 ? 1.0 : -0.5; });
    const double eps = 0.03;
    const Density ms = mollify_density(d, step, eps);
    CHECK(ms.values.cwiseAbs().maxCoeff() <= step.values.cwiseAbs().maxCoeff());
    const double l1 = (ms.values - step.values).cwiseAbs().dot(d.weights);
    // two jumps, kernel support width 2 eps
    CHECK(l1 <= 2.0 * step.sup_norm() * eps * 2.0 * 2.0);

    const Density smooth = sample_density(d, [](const Vec2& x) { return std::abs(x.x()); });
    double prev = INFINITY;
    for (int k = 2; k <= 8; ++k) {
        const Density m = mollify_density(d, smooth, std::ldexp(1.0, -k));
        CHECK(m.values.cwiseAbs().maxCoeff() <= smooth.sup_norm());
        const double err = (m.values - smooth.values).cwiseAbs().dot(d.weights);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("graph mollification")
{
    const PlanarCurve zero = make_graph([](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 1.0);
    CHECK(mollify_curve(zero, 0.1).graph()->f(0.4) == 0.0);

    const PlanarCurve wave = make_graph([](double x) { return 0.1 * std::sin(7.0 * x); },
                                        [](double x) { return 0.7 * std::cos(7.0 * x); }, 0.0, 1.0);
    const double eps = 0.05;
    const PlanarCurve m = mollify_curve(wave, eps);
    double worst = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double x = k / 100.0;
        worst = std::max(worst, std::abs(m.graph()->f(x) - wave.graph()->f(x)));
    }
    CHECK(worst <= 0.7 * eps);

    const PlanarCurve kink = make_graph([](double x) { return std::abs(x - 0.5); },
                                        [](double x) { return x > 0.5 ? 1.0 : -1.0; }, 0.0, 1.0);
    auto g = [](const Vec2& x) { return x.x() * x.x(); };
    const double exact = std::sqrt(2.0) / 3.0;
    double prev = 0.0;
    for (int k = 3; k <= 7; ++k) {
        const double err =
            std::abs(surface_integral(discretize(mollify_curve(kink, std::ldexp(1.0, -k)), 1 << 14), g) - exact);
        if (k > 3) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.1));
        prev = err;
    }
}

TEST_CASE("curve specs")
{
    CHECK(parse_curve_spec("circle:rho=0.5").closed());
    CHECK(parse_curve_spec("ellipse:a=0.6,b=0.3").analytic_length().has_value() == false);
    CHECK_FALSE(parse_curve_spec("graph:counterexample,alpha=0.5").closed());
    CHECK_THROWS_AS(parse_curve_spec("circle:r=0.5"), ParseError);
    CHECK_THROWS_AS(parse_curve_spec("blob:rho=1"), ParseError);
}
