#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spl/types.hpp"

namespace spl {

enum class CurveKind { ClosedAnalytic, Graph, RotatedGraph, Polyline };

/// Graph description y = f(x) on [x_begin, x_end], placed in the plane by
/// `offset + rotation(angle) * (x, f(x))`.
struct GraphData {
    std::function<double(double)> f;
    std::function<double(double)> df;
    double x_begin = 0.0;
    double x_end = 1.0;
    double angle = 0.0;
    Vec2 offset = Vec2::Zero();
};

/// A parametrized planar curve t -> gamma(t), t in [t_begin, t_end].
///
/// Closed curves are oriented counter-clockwise so that the normal obtained by
/// turning the tangent clockwise points outward. Open curves (graphs and open
/// polylines) use the normal that points to +y in the graph frame.
class PlanarCurve {
public:
    using PointFn = std::function<Vec2(double)>;

    PlanarCurve(CurveKind kind, PointFn point, PointFn derivative, double t_begin, double t_end,
                bool closed);

    CurveKind kind() const { return kind_; }
    bool closed() const { return closed_; }
    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    double period() const { return t_end_ - t_begin_; }

    Vec2 point(double t) const { return point_(t); }
    Vec2 derivative(double t) const { return derivative_(t); }
    /// Analytic when provided, central differences of the derivative otherwise.
    Vec2 second_derivative(double t) const;
    Vec2 unit_tangent(double t) const;
    Vec2 unit_normal(double t) const;
    /// Curvature of the oriented curve (positive for a counter-clockwise circle).
    double oriented_curvature(double t) const;

    std::optional<double> analytic_length() const { return length_; }
    const std::vector<double>& singular_parameters() const { return singular_; }
    const std::optional<GraphData>& graph() const { return graph_; }
    const std::string& description() const { return description_; }

    PlanarCurve& set_second_derivative(PointFn f);
    PlanarCurve& set_analytic_length(double length);
    PlanarCurve& add_singular_parameter(double t);
    PlanarCurve& set_graph(GraphData g);
    PlanarCurve& set_description(std::string d);
    PlanarCurve& set_parameter_range(double t_begin, double t_end);

private:
    CurveKind kind_;
    PointFn point_;
    PointFn derivative_;
    PointFn second_;
    double t_begin_;
    double t_end_;
    bool closed_;
    std::optional<double> length_;
    std::vector<double> singular_;
    std::optional<GraphData> graph_;
    std::string description_;
};

PlanarCurve make_circle(double radius, const Vec2& center = Vec2::Zero());
PlanarCurve make_ellipse(double a, double b, const Vec2& center = Vec2::Zero(), double angle = 0.0);
/// Graph of `f` over [x_begin, x_end]; `angle != 0` yields a rotated graph.
PlanarCurve make_graph(std::function<double(double)> f, std::function<double(double)> df,
                       double x_begin, double x_end, double angle = 0.0,
                       const Vec2& offset = Vec2::Zero());
/// f(x) = x^(1+a) sin(1/x) / (1+a) on [0, 1] with f(0) = 0; requires 0 < a < 1.
PlanarCurve make_counterexample_curve(double alpha_prime);
/// Piecewise-linear curve parametrized by normalized arc length. Closed
/// polylines are reoriented counter-clockwise.
PlanarCurve make_polyline(std::vector<Vec2> points, bool closed);

/// Restricts a curve to a parameter subinterval (open curves only).
PlanarCurve restrict_parameters(const PlanarCurve& curve, double t_begin, double t_end);

double counterexample_f(double x, double alpha_prime);
double counterexample_df(double x, double alpha_prime);

/// Arc length between two parameters via adaptive quadrature of |gamma'|.
double arc_length(const PlanarCurve& curve, double t0, double t1, double tol = 1e-12);
/// Parameter t with signed arc length `s` from `t0` (Newton on the arc-length map).
double parameter_at_arc_offset(const PlanarCurve& curve, double t0, double s);

/// Parses the curve mini-language, e.g. `circle:rho=0.5,cx=0,cy=0`,
/// `ellipse:a=0.6,b=0.3`, `graph:counterexample,alpha=0.5`,
/// `graph:expr,f=0.2*sin(3*x),x0=0,x1=1,angle=0.3`.
PlanarCurve parse_curve_spec(const std::string& spec);

} // namespace spl
