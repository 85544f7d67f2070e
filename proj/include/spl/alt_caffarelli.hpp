#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spl/discretization.hpp"
#include "spl/grid.hpp"

namespace spl {

struct BendingOperator;

/// Discrete Alt-Caffarelli state: w on a grid, pinned to positive data u0 on the ring.
struct AltCafState {
    Field w;
    double epsilon = 0.0; ///< half-width of the volume ramp
    double bending = 0.0;
    double volume = 0.0;
    int iterations = 0;   ///< descent steps attempted
    int accepted = 0;
    bool stalled = false;
    double last_step = 1.0;
    double gradient_sup = 0.0;
    std::shared_ptr<const BendingOperator> op;

    double total() const { return bending + volume; }
};

struct EnergyParts {
    double total = 0.0;
    double bending = 0.0;
    double volume = 0.0;
};

/// Cubic Hermite ramp: 0 below -eps, 1 above eps.
double smoothed_heaviside(double t, double eps);
double smoothed_heaviside_derivative(double t, double eps);

/// Ring nodes take u0 (must be positive), interior nodes take `initial`.
/// epsilon <= 0 selects the default 2h.
AltCafState make_state(const Grid& grid, const std::function<double(const Vec2&)>& u0,
                       const std::function<double(const Vec2&)>& initial, double epsilon = 0.0);
/// Adopts an existing field (ring values are taken as the boundary data).
AltCafState make_state(Field w, double epsilon = 0.0);

/// bending = sum over interior nodes of (Lap_h w)^2 h^2, volume = sum of H_eps(w) h^2.
EnergyParts energy(const AltCafState& state);
/// Same with a different ramp width.
EnergyParts energy(const Field& w, double epsilon);

/// One descent step on the interior values. The gradient 2 h^2 L0 (Lap_h w) + h^2 H_eps'(w)
/// is preconditioned by the bending Hessian 2 h^2 L0^2 (L0 the Dirichlet five-point
/// Laplacian) and the step is found by halving from 1 under the Armijo rule with factor
/// 1e-4. A step below `step_floor` or a gradient below 1e-10 leaves the state unchanged
/// with `stalled` set.
AltCafState descent_step(const AltCafState& state, double step_floor = 1e-12);

struct StageSummary {
    double epsilon = 0.0;
    int steps = 0;
    double energy_start = 0.0;
    double energy_end = 0.0;
    bool stalled = false;
    bool monotone = true;      ///< every accepted step lowered the energy
    double displacement = 0.0; ///< Hausdorff distance of the free boundary to the previous stage
};

struct MinimizeOptions {
    int max_steps = 400; ///< per continuation stage
    std::vector<double> epsilons; ///< continuation schedule; empty selects 8h, 4h, 2h
};

struct MinimizeResult {
    AltCafState state;
    std::vector<StageSummary> stages;
    std::vector<double> energies; ///< energy after every accepted step, all stages
};

MinimizeResult minimize(AltCafState state, const MinimizeOptions& options = {});

struct FreeBoundaryPiece {
    std::vector<Vec2> points;
    std::vector<double> q; ///< 1 / (2 |grad w|) at each point
    bool closed = false;
};

struct FreeBoundary {
    std::vector<FreeBoundaryPiece> pieces;
    double min_gradient = 0.0;       ///< min |grad w| over the polyline vertices
    double transversal_fraction = 1.0; ///< share of cut edges with |grad w| above the floor
    Index capped = 0;                ///< vertices where Q was capped at the floor
    Index degenerate_cells = 0;      ///< cells with four zero corners
    double gradient_floor = 1e-6;
    std::shared_ptr<const Field> grad_norm;

    bool empty() const { return pieces.empty(); }
    /// Q at an arbitrary point: 1 / (2 max(floor, |grad w|)) with |grad w| interpolated.
    double q_at(const Vec2& x) const;
};

/// Marching squares on {w = 0} with linear edge interpolation; saddle cells are
/// resolved by the cell-centre average.
FreeBoundary extract_free_boundary(const Field& w, double gradient_floor = 1e-6);

/// Polyline curve, discretization and density of one free-boundary piece.
struct BoundaryCarrier {
    CurveDiscretization disc;
    Density q;
};
BoundaryCarrier carrier(const FreeBoundary& fb, std::size_t piece, int nodes_per_vertex = 2);

/// Hausdorff distance between the vertex sets of two free boundaries.
double boundary_displacement(const FreeBoundary& a, const FreeBoundary& b);

struct CrossCheckReport {
    Field v1;                  ///< Lap_h w
    Field v2;                  ///< grid solution with the extracted (curve, Q)
    double discrepancy = 0.0;  ///< sup |v1 - v2| beyond 4h from the curve
    Index compared_nodes = 0;
    double lipschitz_v1 = 0.0;
    double min_gradient = 0.0;
};

/// Compares Lap_h w with the measure-data solve for the extracted free boundary.
CrossCheckReport cross_check(const Field& w, double gradient_floor = 1e-6);

/// Raster of w plus a JSON sidecar `<path>.json` holding epsilon, iteration counts and energies.
void write_checkpoint(const AltCafState& state, const std::string& path);
AltCafState read_checkpoint(const std::string& path);

} // namespace spl
