#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "spl/discretization.hpp"

namespace spl {

enum class GridShape { Square, Disk };

/// Uniform node lattice with spacing h over [x0, x0 + nx h] x [y0, y0 + ny h].
///
/// Square grids treat the outer node layer as the Dirichlet ring. Disk grids cover
/// [-1, 1]^2; nodes with |x| < 1 - h/2 are interior and the ring is every other
/// node with an interior 4-neighbour. Nodes in neither set are inactive.
struct Grid {
    GridShape shape = GridShape::Square;
    double x0 = 0.0;
    double y0 = 0.0;
    double h = 1.0;
    Index nx = 0; ///< cells along x
    Index ny = 0;
    Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask; ///< kInactive / kRing / kInterior

    static constexpr std::uint8_t kInactive = 0;
    static constexpr std::uint8_t kRing = 1;
    static constexpr std::uint8_t kInterior = 2;

    Index nodes_x() const { return nx + 1; }
    Index nodes_y() const { return ny + 1; }
    Vec2 point(Index i, Index j) const { return {x0 + h * double(i), y0 + h * double(j)}; }
    bool interior(Index i, Index j) const { return mask(i, j) == kInterior; }
    bool ring(Index i, Index j) const { return mask(i, j) == kRing; }
    bool active(Index i, Index j) const { return mask(i, j) != kInactive; }
    bool contains(Index i, Index j) const { return i >= 0 && j >= 0 && i <= nx && j <= ny; }
    std::string describe() const;
};

/// n x n cells on the square [x0, x0 + length] x [y0, y0 + length].
Grid make_square_grid(double x0, double y0, double length, Index n);
/// n x n cells on [-1, 1]^2 masked to the unit disk, h = 2 / n.
Grid make_disk_grid(Index n);
/// Same extent, twice the cells per axis.
Grid refine(const Grid& grid);

/// One scalar per grid node; inactive nodes carry 0.
struct Field {
    Grid grid;
    Eigen::ArrayXXd values; ///< (nx + 1) x (ny + 1), indexed (i, j)

    Field() = default;
    explicit Field(Grid g);
    double& operator()(Index i, Index j) { return values(i, j); }
    double operator()(Index i, Index j) const { return values(i, j); }
};

struct VectorField {
    Field x;
    Field y;
};

/// Samples f at every active node.
Field sample_field(const Grid& grid, const std::function<double(const Vec2&)>& f);

/// Bilinear splat of the node masses Q_i w_i divided by h^2.
Field deposit_measure(const CurveDiscretization& disc, const Density& q, const Grid& grid);

struct SolveStats {
    Index iterations = 0;
    double relative_residual = 0.0;
};

/// Five-point solve of -Lap_h v = rhs on the interior nodes with v = 0 on the ring,
/// Jacobi-preconditioned conjugate gradients to a relative residual of `tol`.
/// `guess`, when given, seeds the iteration.
Field solve_poisson(const Field& rhs, double tol = 1e-10, SolveStats* stats = nullptr,
                    const Field* guess = nullptr);

/// Centered differences, second-order one-sided at mask edges; 0 on inactive nodes.
VectorField discrete_gradient(const Field& f);
/// Five-point Laplacian on interior nodes; 0 elsewhere.
Field discrete_laplacian(const Field& f);
/// Pointwise |grad|.
Field gradient_magnitude(const Field& f);

/// Bilinear interpolation of a field at an arbitrary point inside the grid box.
double interpolate(const Field& f, const Vec2& x);
/// Injects the coarse field at coincident nodes and interpolates bilinearly elsewhere.
Field prolong(const Field& coarse, const Grid& fine);

/// max |a - b| over the interior nodes accepted by `keep` (all interior nodes if empty).
double sup_error(const Field& a, const std::function<double(const Vec2&)>& b,
                 const std::function<bool(const Vec2&)>& keep = {});

void write_csv(const Field& f, const std::string& path);
/// Little-endian raster: "SPL1", u32 nodes_x, u32 nodes_y, f64 x0, y0, h, then the
/// values row by row (j outer, i inner).
void write_raster(const Field& f, const std::string& path);
/// Reads a raster written by write_raster onto a grid of the given shape.
Field read_raster(const std::string& path, GridShape shape = GridShape::Square);

} // namespace spl
