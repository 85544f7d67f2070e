#pragma once

#include <functional>
#include <vector>

#include "spl/grid.hpp"
#include "spl/potential.hpp"
#include "spl/report.hpp"

namespace spl {

struct ThetaEstimate {
    Vec2 value = Vec2::Zero();
    std::vector<double> radii;
    std::vector<Vec2> averages;    ///< disk averages of grad u, one per radius
    std::vector<Vec2> extrapolants;
    double order = 0.0;            ///< observed convergence order of the averages
    bool monotone = false;         ///< successive differences shrink
};

/// theta(x0) as the limit of disk averages of grad u. Each average is computed as
/// (1 / (pi r^2)) times the boundary integral of u n over the circle of radius r,
/// split at the crossings with the curve; the averages are then Richardson
/// extrapolated over radii halving at each step.
ThetaEstimate estimate_theta(const PotentialSolution& solution, const Vec2& x0, const std::vector<double>& radii);

/// u(x0) for x0 on the curve, falling back to offset extrapolation at quadrature nodes.
double value_on_curve(const PotentialSolution& solution, const Vec2& x0);

/// Fixed 64-point probe set of the closed unit ball in the frame (normal, tangent).
std::vector<Vec2> blowup_probes(const Vec2& normal);

struct BlowupReport {
    Vec2 x0 = Vec2::Zero();
    std::vector<double> radii;
    Vec2 theta = Vec2::Zero();
    double q0 = 0.0;
    Vec2 normal = Vec2::UnitX();
    std::vector<double> residuals;
};

/// max over the probes p of |u_r(p) - (theta . p - Q0 |p . nu| / 2)| with
/// u_r(p) = (u(x0 + r p) - u(x0)) / r.
BlowupReport blowup_residual(const PotentialSolution& solution, const Vec2& x0, const Vec2& theta, double q0,
                             const Vec2& normal, const std::vector<double>& radii);

struct TraceReport {
    Index node = 0;
    Vec2 x0 = Vec2::Zero();
    Vec2 normal = Vec2::UnitX();
    double q0 = 0.0;
    Vec2 inner = Vec2::Zero(); ///< limit of grad u from the side opposite the normal
    Vec2 outer = Vec2::Zero();
    Vec2 average() const { return 0.5 * (inner + outer); }
};

/// One-sided gradient limits at a node of a closed curve.
TraceReport traces(const PotentialSolution& solution, Index node);

struct NormEstimates {
    double u_sup = 0.0;
    double grad_sup = 0.0;  ///< includes one-sided traces on the curve
    double theta_sup = 0.0; ///< max |(inner + outer) / 2| over sampled nodes
    double q_sup = 0.0;
    double c01() const { return u_sup + grad_sup; }
};

/// Sup norms from a polar sample of the disk plus one-sided traces at every
/// `node_stride`-th curve node.
NormEstimates estimate_norms(const PotentialSolution& solution, Index node_stride = 16);

struct NecessityReport {
    NormEstimates norms;
    double bound_constant = 8.0 * pi; ///< 2^(2n-1) alpha_n for n = 2
    double q_quotient = 0.0;          ///< ||Q|| / (8 pi ||u||_C01)
    double measure_quotient = 0.0;    ///< max mu(B_r(x)) / (8 pi ||u||_C01 r)
    Vec2 witness_x = Vec2::Zero();
    double witness_r = 0.0;
    bool pass = false;
};

/// ||Q|| <= 8 pi ||u||_C01 and mu(B_r(x)) <= 8 pi ||u||_C01 r over x at every
/// `node_stride`-th node and r = 2^-1 .. 2^-12.
NecessityReport check_necessity(const PotentialSolution& solution, Index node_stride = 16);

struct EstimateReport {
    double theta_sup = 0.0;
    double grad_sup = 0.0;
    double q_sup = 0.0;
    double u_sup = 0.0;
    double c_gradient = 0.0; ///< (||grad u|| - ||theta|| - ||Q|| / 2) / ||u||, clamped at 0
    double c_theta = 0.0;    ///< ||theta|| / ||Q||
    double c_total = 0.0;    ///< ||grad u|| / ||Q||
};

EstimateReport make_estimate_report(const NormEstimates& norms);
/// ||theta|| <= ||grad u||, ||grad u|| <= ||theta|| + ||Q|| / 2 + C ||u|| with the
/// measured C, and the measured constant of ||theta|| <= C ||Q||.
std::vector<Check> check_apriori_chain(const EstimateReport& report);

struct ComparisonResult {
    Field residual;        ///< Lap_h (v + Q |d| / 2) on tube nodes, 0 elsewhere
    Field laplacian_v;     ///< Lap_h v on tube nodes
    double max_w = 0.0;
    double max_v = 0.0;
    Index tube_nodes = 0;
};

/// Assembles w = v + Q(pi(x)) |d(x)| / 2 from the mesh-free solution on grid nodes
/// within `eps` of a closed curve and returns its discrete Laplacian there.
/// `q_on_curve` extends Q constantly along normals through the projection.
ComparisonResult comparison_residual(const PotentialSolution& solution,
                                     const std::function<double(const Vec2&)>& q_on_curve, const Grid& grid,
                                     double eps);

/// max |u(a) - u(b)| / |a - b|^alpha over active node pairs offset by up to
/// `stencil` cells per axis.
double holder_seminorm(const Field& f, double alpha, Index stencil = 8);
double lipschitz_seminorm(const Field& f, Index stencil = 8);
/// max |u(x + h e) - 2 u(x) + u(x - h e)| / h^2 over axis directions and active
/// triples, restricted to centres accepted by `keep` when given.
double second_difference_max(const Field& f, const std::function<bool(const Vec2&)>& keep = {});

struct CounterexampleRow {
    double r = 0.0;
    double measure = 0.0; ///< arc length of the graph inside B_r(0)
    double ratio = 0.0;   ///< measure / r
    double bound = 0.0;   ///< pi / (8 (1 + a)) (sqrt(2) / r + pi / 2)^(-a)
    double bound_ratio = 0.0;
    int deepest_level = 0;
};

double counterexample_lower_bound(double alpha_prime, double r);
/// Arc length of the counterexample graph inside B_r(0) for each radius.
std::vector<CounterexampleRow> counterexample_divergence(double alpha_prime, const std::vector<double>& radii);

} // namespace spl
