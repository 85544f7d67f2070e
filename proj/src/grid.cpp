#include "spl/grid.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "spl/parallel.hpp"

namespace spl {

namespace {

void build_mask(Grid& g)
{
    g.mask.setConstant(g.nx + 1, g.ny + 1, Grid::kInactive);
    if (g.shape == GridShape::Square) {
        for (Index j = 0; j <= g.ny; ++j)
            for (Index i = 0; i <= g.nx; ++i) {
                const bool edge = i == 0 || j == 0 || i == g.nx || j == g.ny;
                g.mask(i, j) = edge ? Grid::kRing : Grid::kInterior;
            }
        return;
    }
    const double limit = 1.0 - 0.5 * g.h;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.point(i, j).norm() < limit) g.mask(i, j) = Grid::kInterior;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            if (g.mask(i, j) == Grid::kInterior) continue;
            const Index di[4] = {1, -1, 0, 0};
            const Index dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const Index a = i + di[k], b = j + dj[k];
                if (g.contains(a, b) && g.mask(a, b) == Grid::kInterior) {
                    g.mask(i, j) = Grid::kRing;
                    break;
                }
            }
        }
}

Grid make_grid(GridShape shape, double x0, double y0, double h, Index nx, Index ny)
{
    if (!(h > 0.0) || nx < 2 || ny < 2) throw SolverError("grid needs h > 0 and at least two cells per axis");
    Grid g;
    g.shape = shape;
    g.x0 = x0;
    g.y0 = y0;
    g.h = h;
    g.nx = nx;
    g.ny = ny;
    build_mask(g);
    return g;
}

} // namespace

std::string Grid::describe() const
{
    std::ostringstream os;
    os << (shape == GridShape::Disk ? "disk" : "square") << ' ' << nx << 'x' << ny << " h=" << h;
    return os.str();
}

Grid make_square_grid(double x0, double y0, double length, Index n)
{
    return make_grid(GridShape::Square, x0, y0, length / double(n), n, n);
}

Grid make_disk_grid(Index n)
{
    return make_grid(GridShape::Disk, -1.0, -1.0, 2.0 / double(n), n, n);
}

Grid refine(const Grid& grid)
{
    return make_grid(grid.shape, grid.x0, grid.y0, 0.5 * grid.h, 2 * grid.nx, 2 * grid.ny);
}

Field::Field(Grid g) : grid(std::move(g)), values(Eigen::ArrayXXd::Zero(grid.nx + 1, grid.ny + 1)) {}

Field sample_field(const Grid& grid, const std::function<double(const Vec2&)>& f)
{
    Field out(grid);
    parallel_for(std::size_t(grid.ny + 1), [&](std::size_t jj) {
        const Index j = Index(jj);
        for (Index i = 0; i <= grid.nx; ++i)
            if (grid.active(i, j)) out(i, j) = f(grid.point(i, j));
    });
    return out;
}

Field deposit_measure(const CurveDiscretization& disc, const Density& q, const Grid& grid)
{
    if (q.values.size() != disc.size()) throw GeometryError("density size does not match the discretization");
    Field rhs(grid);
    const double inv_area = 1.0 / (grid.h * grid.h);
    for (Index k = 0; k < disc.size(); ++k) {
        const Vec2 y = disc.node(k);
        const double sx = (y.x() - grid.x0) / grid.h;
        const double sy = (y.y() - grid.y0) / grid.h;
        const Index i = Index(std::floor(sx));
        const Index j = Index(std::floor(sy));
        for (Index a = i - 1; a <= i + 2; ++a)
            for (Index b = j - 1; b <= j + 2; ++b)
                if (!grid.contains(a, b) || !grid.interior(a, b)) {
                    std::ostringstream os;
                    os << "curve node " << k << " at (" << y.x() << ", " << y.y()
                       << ") lies within 2h of the grid boundary";
                    throw GeometryError(os.str());
                }
        const double fx = sx - double(i);
        const double fy = sy - double(j);
        const double m = q.values[k] * disc.weights[k] * inv_area;
        rhs(i, j) += m * (1.0 - fx) * (1.0 - fy);
        rhs(i + 1, j) += m * fx * (1.0 - fy);
        rhs(i, j + 1) += m * (1.0 - fx) * fy;
        rhs(i + 1, j + 1) += m * fx * fy;
    }
    return rhs;
}

Field solve_poisson(const Field& rhs, double tol, SolveStats* stats, const Field* guess)
{
    const Grid& g = rhs.grid;
    Eigen::ArrayXXi id = Eigen::ArrayXXi::Constant(g.nx + 1, g.ny + 1, -1);
    int n = 0;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.interior(i, j)) id(i, j) = n++;

    const double inv_h2 = 1.0 / (g.h * g.h);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(std::size_t(n) * 5);
    Eigen::VectorXd b(n), x0 = Eigen::VectorXd::Zero(n);
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            const int r = id(i, j);
            if (r < 0) continue;
            if (!std::isfinite(rhs(i, j))) throw SolverError("right-hand side is not finite");
            b[r] = rhs(i, j);
            if (guess) x0[r] = (*guess)(i, j);
            triplets.emplace_back(r, r, 4.0 * inv_h2);
            const int nb[4] = {id(i + 1, j), id(i - 1, j), id(i, j + 1), id(i, j - 1)};
            for (int c : nb)
                if (c >= 0) triplets.emplace_back(r, c, -inv_h2);
        }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(20 * std::max(g.nodes_x(), g.nodes_y()));
    cg.compute(a);
    const Eigen::VectorXd x = cg.solveWithGuess(b, x0);
    if (cg.info() != Eigen::Success) {
        std::ostringstream os;
        os << "conjugate gradients stopped after " << cg.iterations() << " iterations at relative residual "
           << cg.error() << " (target " << tol << ") on " << g.describe();
        throw SolverError(os.str());
    }
    if (stats) {
        stats->iterations = cg.iterations();
        stats->relative_residual = cg.error();
    }
    Field out(g);
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (id(i, j) >= 0) out(i, j) = x[id(i, j)];
    return out;
}

namespace {

// Derivative along one axis at (i, j); (di, dj) is the unit step.
double axis_derivative(const Field& f, Index i, Index j, Index di, Index dj)
{
    const Grid& g = f.grid;
    auto ok = [&](Index k) { return g.contains(i + k * di, j + k * dj) && g.active(i + k * di, j + k * dj); };
    auto at = [&](Index k) { return f(i + k * di, j + k * dj); };
    if (ok(1) && ok(-1)) return (at(1) - at(-1)) / (2.0 * g.h);
    if (ok(1) && ok(2)) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * g.h);
    if (ok(-1) && ok(-2)) return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * g.h);
    if (ok(1)) return (at(1) - at(0)) / g.h;
    if (ok(-1)) return (at(0) - at(-1)) / g.h;
    return 0.0;
}

} // namespace

VectorField discrete_gradient(const Field& f)
{
    const Grid& g = f.grid;
    VectorField out{Field(g), Field(g)};
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            if (!g.active(i, j)) continue;
            out.x(i, j) = axis_derivative(f, i, j, 1, 0);
            out.y(i, j) = axis_derivative(f, i, j, 0, 1);
        }
    return out;
}

Field discrete_laplacian(const Field& f)
{
    const Grid& g = f.grid;
    Field out(g);
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.interior(i, j))
                out(i, j) = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) * inv_h2;
    return out;
}

Field gradient_magnitude(const Field& f)
{
    const VectorField grad = discrete_gradient(f);
    Field out(f.grid);
    out.values = (grad.x.values.square() + grad.y.values.square()).sqrt();
    return out;
}

double interpolate(const Field& f, const Vec2& x)
{
    const Grid& g = f.grid;
    const double sx = (x.x() - g.x0) / g.h;
    const double sy = (x.y() - g.y0) / g.h;
    if (sx < 0.0 || sy < 0.0 || sx > double(g.nx) || sy > double(g.ny))
        throw GeometryError("interpolation point outside the grid box");
    const Index i = std::min<Index>(Index(sx), g.nx - 1);
    const Index j = std::min<Index>(Index(sy), g.ny - 1);
    const double fx = sx - double(i), fy = sy - double(j);
    return (1.0 - fx) * (1.0 - fy) * f(i, j) + fx * (1.0 - fy) * f(i + 1, j) + (1.0 - fx) * fy * f(i, j + 1)
         + fx * fy * f(i + 1, j + 1);
}

Field prolong(const Field& coarse, const Grid& fine)
{
    Field out(fine);
    for (Index j = 0; j <= fine.ny; ++j)
        for (Index i = 0; i <= fine.nx; ++i)
            if (fine.active(i, j)) out(i, j) = interpolate(coarse, fine.point(i, j));
    return out;
}

double sup_error(const Field& a, const std::function<double(const Vec2&)>& b,
                 const std::function<bool(const Vec2&)>& keep)
{
    const Grid& g = a.grid;
    double worst = 0.0;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            if (!g.interior(i, j)) continue;
            const Vec2 x = g.point(i, j);
            if (keep && !keep(x)) continue;
            worst = std::max(worst, std::abs(a(i, j) - b(x)));
        }
    return worst;
}

void write_csv(const Field& f, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.precision(17);
    out << "x,y,value\n";
    const Grid& g = f.grid;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            if (!g.active(i, j)) continue;
            const Vec2 p = g.point(i, j);
            out << p.x() << ',' << p.y() << ',' << f(i, j) << '\n';
        }
}

namespace {

static_assert(sizeof(double) == 8, "raster format assumes IEEE doubles");

template <class T>
void put(std::ostream& out, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ParseError("truncated raster");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

} // namespace

void write_raster(const Field& f, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    const Grid& g = f.grid;
    out.write("SPL1", 4);
    put<std::uint32_t>(out, std::uint32_t(g.nodes_x()));
    put<std::uint32_t>(out, std::uint32_t(g.nodes_y()));
    put<double>(out, g.x0);
    put<double>(out, g.y0);
    put<double>(out, g.h);
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) put<double>(out, f(i, j));
}

Field read_raster(const std::string& path, GridShape shape)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SPL1", 4) != 0) throw ParseError(path + ": bad raster magic");
    const auto nodes_x = get<std::uint32_t>(in);
    const auto nodes_y = get<std::uint32_t>(in);
    const double x0 = get<double>(in);
    const double y0 = get<double>(in);
    const double h = get<double>(in);
    Field f(make_grid(shape, x0, y0, h, Index(nodes_x) - 1, Index(nodes_y) - 1));
    for (Index j = 0; j < Index(nodes_y); ++j)
        for (Index i = 0; i < Index(nodes_x); ++i) f(i, j) = get<double>(in);
    return f;
}

} // namespace spl
