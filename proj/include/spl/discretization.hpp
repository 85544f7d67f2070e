#pragma once

#include <functional>

#include <Eigen/Core>

#include "spl/curve.hpp"

namespace spl {

/// Quadrature carrier of arc length on a curve: one node per parameter panel.
struct CurveDiscretization {
    PlanarCurve curve;
    Eigen::Matrix2Xd nodes;
    Eigen::Matrix2Xd normals;
    Eigen::VectorXd weights;
    Eigen::VectorXd params;
    Eigen::VectorXd panel_lo;
    Eigen::VectorXd panel_hi;

    Index size() const { return weights.size(); }
    double total_length() const { return weights.sum(); }
    double max_weight() const { return weights.maxCoeff(); }
    Vec2 node(Index i) const { return nodes.col(i); }
    Vec2 normal(Index i) const { return normals.col(i); }
};

struct DiscretizeOptions {
    /// Parameter distance from a singular endpoint below which the curve is dropped.
    double cutoff = 1e-6;
};

/// Midpoint-rule discretization with `n` panels.
///
/// Smooth curves get uniform parameter panels and weights |gamma'(t_mid)| dt.
/// Curves with a singular parameter at their start get panels refined
/// geometrically toward it, starting at `options.cutoff`, with weights equal to
/// the panel arc length computed adaptively.
CurveDiscretization discretize(const PlanarCurve& curve, int n, const DiscretizeOptions& options = {});

/// Samples of a density Q on the nodes of a discretization.
struct Density {
    Eigen::VectorXd values;
    /// Exact evaluator used off the nodes; empty for densities known only by samples.
    std::function<double(const Vec2&)> field;

    double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
    /// Q at parameter t inside panel `panel`, exact or linearly interpolated.
    double at(const CurveDiscretization& disc, Index panel, double t) const;
};

Density sample_density(const CurveDiscretization& disc, std::function<double(const Vec2&)> q);
Density constant_density(const CurveDiscretization& disc, double c);
Density scale_density(const Density& q, double s);

/// Arc length of the part of the curve inside the open ball B_r(x).
///
/// Panels straddling the sphere are bisected until the crossing is resolved,
/// so the result is accurate even for radii below the panel size.
double ball_measure(const CurveDiscretization& disc, const Vec2& x, double r);

/// Midpoint quadrature of `g` against arc length.
double surface_integral(const CurveDiscretization& disc, const std::function<double(const Vec2&)>& g);

/// Winding-number test against the node polygon of a closed discretization.
bool encloses(const CurveDiscretization& disc, const Vec2& x);

} // namespace spl
