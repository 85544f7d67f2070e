#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "spl/grid.hpp"
#include "spl/parallel.hpp"

using namespace spl;

namespace {

double mms_error(Index n)
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, n);
    const Field rhs = sample_field(g, [](const Vec2& x) { return oracle::mms_rhs(x.x(), x.y()); });
    return sup_error(solve_poisson(rhs), [](const Vec2& x) { return oracle::mms_u(x.x(), x.y()); });
}

} // namespace

TEST_CASE("grid construction")
{
    const Grid d = make_disk_grid(64);
    CHECK(d.h == doctest::Approx(2.0 / 64));
    CHECK(d.nodes_x() == 65);
    for (Index j = 0; j <= d.ny; ++j)
        for (Index i = 0; i <= d.nx; ++i) {
            if (!d.interior(i, j)) continue;
            CHECK(d.point(i, j).norm() < 1.0);
            for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) CHECK(d.active(i + di, j + dj));
        }
    const Grid s = make_square_grid(0.0, 0.0, 1.0, 16);
    CHECK(s.ring(0, 5));
    CHECK(s.interior(1, 1));
    CHECK(refine(refine(s)).h == doctest::Approx(s.h / 4.0));
    CHECK(refine(refine(s)).nx == 64);
}

TEST_CASE("deposited mass")
{
    const CurveDiscretization d = discretize(make_circle(0.5), 2048);
    const Grid g = make_disk_grid(128);
    const Field rhs = deposit_measure(d, constant_density(d, 1.0), g);
    CHECK(std::abs(rhs.values.sum() * g.h * g.h - d.total_length()) < 1e-10);
    CHECK(std::abs(d.total_length() - oracle::pi) < 1e-5);
    CHECK(deposit_measure(d, constant_density(d, 0.0), g).values.abs().maxCoeff() == 0.0);

    const CurveDiscretization shifted = discretize(make_circle(0.5, Vec2(g.h, 0.0)), 2048);
    const Field moved = deposit_measure(shifted, constant_density(shifted, 1.0), g);
    double worst = 0.0;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 1; i <= g.nx; ++i) worst = std::max(worst, std::abs(moved(i, j) - rhs(i - 1, j)));
    CHECK(worst < 1e-9 * rhs.values.abs().maxCoeff());

    const CurveDiscretization big = discretize(make_circle(0.99), 256);
    CHECK_THROWS_AS(deposit_measure(big, constant_density(big, 1.0), g), GeometryError);
}

TEST_CASE("manufactured solution converges at second order")
{
    const double e64 = mms_error(64), e128 = mms_error(128), e256 = mms_error(256);
    CHECK(std::log2(e128 / e256) >= 1.9);
    CHECK(e64 / e128 >= 3.5);
    CHECK(e64 / e128 <= 4.5);
    CHECK(e128 / e256 >= 3.5);
    CHECK(e128 / e256 <= 4.5);
}

TEST_CASE("zero data and residual report")
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, 32);
    SolveStats stats;
    const Field v = solve_poisson(Field(g), 1e-10, &stats);
    CHECK(v.values.abs().maxCoeff() == 0.0);
}

TEST_CASE("radial configuration on the masked disk")
{
    const CurveDiscretization d = discretize(make_circle(0.5), 4096);
    const Grid g = make_disk_grid(256);
    const Field v = solve_poisson(deposit_measure(d, constant_density(d, 1.0), g));
    const double err = sup_error(v, [](const Vec2& x) { return oracle::radial_value(x.norm()); },
                                 [&](const Vec2& x) { return std::abs(x.norm() - 0.5) >= 2.0 * g.h; });
    CHECK(err <= 2e-3);
    const VectorField grad = discrete_gradient(v);
    const Index i = Index(std::lround((0.75 - g.x0) / g.h)), j = Index(std::lround(-g.y0 / g.h));
    CHECK(std::abs(std::hypot(grad.x(i, j), grad.y(i, j)) - 2.0 / 3.0) <= 5e-3);
}

TEST_CASE("discrete derivatives of polynomials")
{
    const Grid g = make_square_grid(-1.0, -1.0, 2.0, 32);
    const VectorField gl = discrete_gradient(sample_field(g, [](const Vec2& x) { return x.x(); }));
    CHECK((gl.x.values - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(gl.y.values.abs().maxCoeff() < 1e-12);

    const Field lap = discrete_laplacian(sample_field(g, [](const Vec2& x) { return x.squaredNorm(); }));
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.interior(i, j)) CHECK(std::abs(lap(i, j) - 4.0) < 1e-10);

    const Field q = sample_field(g, [](const Vec2& x) { return x.x() * x.x() - 0.5 * x.y(); });
    const VectorField gq = discrete_gradient(q);
    CHECK(std::abs(gq.x(0, 3) - 2.0 * g.point(0, 3).x()) < 1e-12);
    CHECK(std::abs(gq.y(5, 0) + 0.5) < 1e-12);
}

TEST_CASE("interpolation, prolongation and sup error")
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, 8);
    auto bilinear = [](const Vec2& x) { return 1.0 + 2.0 * x.x() - x.y() + 3.0 * x.x() * x.y(); };
    const Field f = sample_field(g, bilinear);
    CHECK(interpolate(f, Vec2(0.33, 0.71)) == doctest::Approx(bilinear(Vec2(0.33, 0.71))).epsilon(1e-13));
    CHECK_THROWS(interpolate(f, Vec2(1.5, 0.0)));
    const Field p = prolong(f, refine(g));
    CHECK(sup_error(p, bilinear) < 1e-13);
    CHECK(sup_error(f, bilinear) < 1e-14);
}

TEST_CASE("raster round trip")
{
    const Grid g = make_disk_grid(16);
    const Field f = sample_field(g, [](const Vec2& x) { return std::sin(3.0 * x.x()) + x.y(); });
    const auto path = std::filesystem::temp_directory_path() / "spl_raster_test.bin";
    write_raster(f, path.string());
    CHECK(std::filesystem::file_size(path) == 4 + 8 + 24 + 8 * 17 * 17);
    const Field back = read_raster(path.string(), GridShape::Disk);
    CHECK(back.grid.nx == g.nx);
    CHECK(back.grid.h == g.h);
    CHECK((back.values - f.values).abs().maxCoeff() == 0.0);
    CHECK((back.grid.mask == g.mask).all());
    std::filesystem::remove(path);
    CHECK_THROWS(read_raster(path.string()));
}

TEST_CASE("thread count does not change results")
{
    const Grid g = make_square_grid(0.0, 0.0, 1.0, 64);
    auto f = [](const Vec2& x) { return std::exp(x.x()) * std::cos(x.y()); };
    set_thread_count(1);
    const Field a = sample_field(g, f);
    set_thread_count(3);
    const Field b = sample_field(g, f);
    set_thread_count(0);
    CHECK((a.values - b.values).abs().maxCoeff() == 0.0);
}
