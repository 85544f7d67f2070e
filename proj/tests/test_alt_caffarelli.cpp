#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "spl/alt_caffarelli.hpp"
#include "spl/quadrature.hpp"

using namespace spl;

namespace {

double interior_area(const Grid& g)
{
    return double((g.mask == Grid::kInterior).count()) * g.h * g.h;
}

AltCafState dimple(Index n, double u0)
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, n);
    return make_state(g, [u0](const Vec2&) { return u0; }, [u0](const Vec2& x) {
        return u0 - 2.0 * u0 * std::exp(-(x - Vec2(0.5, 0.5)).squaredNorm() / 0.05);
    });
}

} // namespace

TEST_CASE("smoothed Heaviside")
{
    const double eps = 0.1;
    CHECK(smoothed_heaviside(-0.2, eps) == 0.0);
    CHECK(smoothed_heaviside(0.2, eps) == 1.0);
    CHECK(smoothed_heaviside(0.0, eps) == doctest::Approx(0.5));
    CHECK(integrate_gauss([&](double t) { return smoothed_heaviside_derivative(t, eps); }, -eps, eps, 8) ==
          doctest::Approx(1.0).epsilon(1e-13));
    const double t = 0.03, d = 1e-7;
    CHECK(smoothed_heaviside_derivative(t, eps) ==
          doctest::Approx((smoothed_heaviside(t + d, eps) - smoothed_heaviside(t - d, eps)) / (2 * d)).epsilon(1e-7));
}

TEST_CASE("energy of simple fields")
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, 32);
    const AltCafState c = make_state(g, [](const Vec2&) { return 0.3; }, [](const Vec2&) { return 0.3; }, 0.05);
    CHECK(energy(c).bending == 0.0);
    CHECK(energy(c).volume == doctest::Approx(interior_area(g)).epsilon(1e-14));
    CHECK(energy(sample_field(g, [](const Vec2&) { return -0.3; }), 0.05).volume == 0.0);
    const EnergyParts q = energy(sample_field(g, [](const Vec2& x) { return x.x() * x.x(); }), 0.05);
    CHECK(std::abs(q.bending - 4.0 * interior_area(g)) < 1e-8);
    CHECK_THROWS(make_state(g, [](const Vec2&) { return -1.0; }, [](const Vec2&) { return 1.0; }));
}

TEST_CASE("a discrete stationary point stalls")
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, 32);
    const AltCafState s = make_state(g, [](const Vec2&) { return 1.0; }, [](const Vec2&) { return 1.0; }, 0.05);
    const AltCafState next = descent_step(s);
    CHECK(next.stalled);
    CHECK(next.gradient_sup < 1e-10);
    CHECK((next.w.values - s.w.values).abs().maxCoeff() == 0.0);
}

TEST_CASE("a unit dip through zero costs more bending than the whole volume")
{
    // 1D analogue of u0 = 1 on the unit square: the cheapest profile from 1 down to 0 and
    // back is the natural cubic spline with bending 48, while the volume gain is at most 1.
    const double dip = oracle::dip_bending_1d(512);
    CHECK(dip == doctest::Approx(48.0).epsilon(1e-3));
    CHECK(dip > 1.0);

    // so w = 1 is already the minimizer in 2D and descent cannot lower the energy
    const Grid g = make_square_grid(0.0, 0.0, 1.0, 64);
    MinimizeOptions opt;
    opt.max_steps = 512;
    opt.epsilons = {0.05};
    const MinimizeResult m = minimize(make_state(g, [](const Vec2&) { return 1.0; }, [](const Vec2&) { return 1.0; }), opt);
    CHECK(m.state.total() == doctest::Approx(interior_area(g)));
}

TEST_CASE("descent from a dimple keeps the boundary data and lowers the energy")
{
    AltCafState s = make_state(dimple(64, 0.02).w, 0.008);
    const Field start = s.w;
    double e = s.total();
    for (int k = 0; k < 20; ++k) {
        s = descent_step(s);
        CHECK(s.total() <= e);
        e = s.total();
    }
    const Grid& g = s.w.grid;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.ring(i, j)) CHECK(s.w(i, j) == start(i, j));
    CHECK(e < 0.9 * energy(start, 0.008).total);
}

TEST_CASE("minimizer with a closed free boundary")
{
    MinimizeOptions opt;
    opt.max_steps = 3000;
    opt.epsilons = {0.008, 0.004};
    const MinimizeResult m = minimize(dimple(64, 0.02), opt);
    CHECK(m.stages.size() == 2);
    for (const StageSummary& st : m.stages) {
        CHECK(st.stalled);
        CHECK(st.monotone);
        CHECK(st.energy_end < st.energy_start);
    }
    const FreeBoundary fb = extract_free_boundary(m.state.w);
    REQUIRE(fb.pieces.size() == 1);
    CHECK(fb.pieces[0].closed);
    CHECK(fb.min_gradient > 1e-6);
    CHECK(fb.transversal_fraction >= 0.9);
}

TEST_CASE("free boundary of synthetic fields")
{
    const Grid g = make_square_grid(-1.0, -1.0, 2.0, 64);
    const FreeBoundary line = extract_free_boundary(sample_field(g, [](const Vec2& x) { return x.x() + 1e-3; }));
    REQUIRE(line.pieces.size() == 1);
    CHECK_FALSE(line.pieces[0].closed);
    for (std::size_t k = 0; k < line.pieces[0].points.size(); ++k) {
        CHECK(line.pieces[0].points[k].x() == doctest::Approx(-1e-3).epsilon(1e-12));
        CHECK(line.pieces[0].q[k] == doctest::Approx(0.5).epsilon(1e-12));
    }

    const double rho = 0.5;
    const FreeBoundary circle =
        extract_free_boundary(sample_field(g, [rho](const Vec2& x) { return x.squaredNorm() - rho * rho; }));
    REQUIRE(circle.pieces.size() == 1);
    CHECK(circle.pieces[0].closed);
    for (std::size_t k = 0; k < circle.pieces[0].points.size(); ++k) {
        CHECK(std::abs(circle.pieces[0].points[k].norm() - rho) < g.h * g.h);
        CHECK(circle.pieces[0].q[k] == doctest::Approx(1.0 / (4.0 * rho)).epsilon(0.01));
    }
    const BoundaryCarrier c = carrier(circle, 0);
    CHECK(c.disc.total_length() == doctest::Approx(2.0 * oracle::pi * rho).epsilon(1e-3));

    const FreeBoundary shifted =
        extract_free_boundary(sample_field(g, [](const Vec2& x) { return (x - Vec2(0.1, 0.0)).squaredNorm() - 0.25; }));
    CHECK(boundary_displacement(circle, shifted) == doctest::Approx(0.1).epsilon(0.05));
    CHECK(extract_free_boundary(sample_field(g, [](const Vec2&) { return 1.0; })).empty());
}

TEST_CASE("cross-check on the synthetic radial state")
{
    const double rho = 0.5, c0 = -rho * std::log(rho), lambda = 1.0 / std::sqrt(c0 * rho);
    const Grid g = make_disk_grid(256);
    const Field rhs = sample_field(g, [&](const Vec2& x) { return -lambda * oracle::radial_value(x.norm(), rho); });
    Field w = solve_poisson(rhs);
    const double shift = interpolate(w, Vec2(rho, 0.0));
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.active(i, j)) w(i, j) -= shift;
    const CrossCheckReport cc = cross_check(w);
    CHECK(cc.discrepancy <= 5e-3);
    CHECK(cc.compared_nodes > 0);
    const FreeBoundary fb = extract_free_boundary(w);
    CHECK(fb.q_at(Vec2(rho, 0.0)) == doctest::Approx(lambda).epsilon(0.01));
}

TEST_CASE("cross-check without a free boundary")
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, 32);
    const CrossCheckReport cc = cross_check(sample_field(g, [](const Vec2& x) { return -1.0 + 0.1 * x.x(); }));
    CHECK(cc.v2.values.abs().maxCoeff() == 0.0);
    CHECK(cc.v1.values.abs().maxCoeff() < 1e-12);
}

TEST_CASE("checkpoint round trip")
{
    MinimizeOptions opt;
    opt.max_steps = 5;
    opt.epsilons = {0.01};
    const AltCafState s = minimize(dimple(32, 0.02), opt).state;
    const auto path = (std::filesystem::temp_directory_path() / "spl_checkpoint.bin").string();
    write_checkpoint(s, path);
    const AltCafState back = read_checkpoint(path);
    CHECK((back.w.values - s.w.values).abs().maxCoeff() == 0.0);
    CHECK(back.epsilon == s.epsilon);
    CHECK(back.iterations == s.iterations);
    CHECK(back.total() == doctest::Approx(s.total()).epsilon(1e-14));
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".json");
}
