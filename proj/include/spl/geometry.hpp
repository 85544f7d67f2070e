#pragma once

#include <functional>
#include <vector>

#include "spl/curve.hpp"
#include "spl/discretization.hpp"

namespace spl {

/// Local graph chart: points `offset + rotation(angle) * (u, f(u))`, u in [u_min, u_max].
struct Chart {
    double angle = 0.0;
    Vec2 offset = Vec2::Zero();
    double u_min = 0.0;
    double u_max = 1.0;
    std::function<double(double)> f;
    std::function<double(double)> df;
};

/// `count` charts of half-aperture `half_aperture` centred on equally spaced directions.
std::vector<Chart> circle_charts(double radius, const Vec2& center, int count, double half_aperture);
/// The chart that represents a graph curve by its own function.
Chart graph_chart(const PlanarCurve& graph_curve);

/// Sum over charts of sqrt(1 + sup|f'|^2), with sup|f'| estimated by dense sampling.
///
/// Throws GeometryError when a sampled curve point is not represented by any chart.
/// The value is an upper bound for the chosen cover, not an infimum over covers.
double lipschitz_constant_estimate(const PlanarCurve& curve, const std::vector<Chart>& charts);

struct SignedDistanceSample {
    double d = 0.0;         ///< negative inside, positive outside
    Vec2 projection;        ///< nearest point on the curve
    double parameter = 0.0; ///< curve parameter of the projection
    /// Curvature at the projection, signed so that the Laplacian of d equals
    /// -kappa / (1 - kappa d); a circle of radius rho has kappa = -1/rho.
    double kappa = 0.0;
};

/// Signed distance to a closed curve. Throws GeometryError when the nearest
/// point is not unique (x beyond the reach).
SignedDistanceSample signed_distance(const PlanarCurve& curve, const Vec2& x);

/// Normalized arc-length convolution with the biweight kernel of half-width
/// epsilon. Each output value is a convex combination of input values.
Density mollify_density(const CurveDiscretization& disc, const Density& q, double epsilon);

/// Graph convolved with the normalized biweight kernel of half-width epsilon
/// (constant extension beyond the interval ends).
PlanarCurve mollify_curve(const PlanarCurve& graph_curve, double epsilon);

} // namespace spl
