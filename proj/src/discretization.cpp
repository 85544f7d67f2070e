#include "spl/discretization.hpp"

#include <cmath>

#include "spl/quadrature.hpp"

namespace spl {

CurveDiscretization discretize(const PlanarCurve& curve, int n, const DiscretizeOptions& options)
{
    if (n < 8) throw GeometryError("discretize: need at least 8 nodes");
    CurveDiscretization d{curve, Eigen::Matrix2Xd(2, n), Eigen::Matrix2Xd(2, n), Eigen::VectorXd(n),
                          Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};

    const double t0 = curve.t_begin();
    const double t1 = curve.t_end();
    bool geometric = false;
    double singular = 0.0;
    for (double s : curve.singular_parameters()) {
        if (s > t0 && s < t1) throw GeometryError("discretize: interior singular parameters are not supported");
        if (s <= t0) {
            geometric = true;
            singular = s;
        }
    }
    const double lower = geometric ? std::max(t0, singular + options.cutoff) : t0;
    if (geometric && !(lower < t1)) throw GeometryError("discretize: cutoff removes the whole curve");

    auto edge = [&](int k) {
        if (!geometric) return t0 + (t1 - t0) * k / n;
        const double ratio = (t1 - singular) / (lower - singular);
        return singular + (lower - singular) * std::pow(ratio, static_cast<double>(k) / n);
    };

    for (int i = 0; i < n; ++i) {
        const double a = edge(i);
        const double b = (i + 1 == n) ? t1 : edge(i + 1);
        const double t = 0.5 * (a + b);
        const Vec2 dg = curve.derivative(t);
        const double speed = dg.norm();
        if (!(speed > 0.0) || !std::isfinite(speed))
            throw GeometryError("discretize: degenerate parametrization at node " + std::to_string(i));
        d.params[i] = t;
        d.panel_lo[i] = a;
        d.panel_hi[i] = b;
        d.nodes.col(i) = curve.point(t);
        d.normals.col(i) = curve.unit_normal(t);
        d.weights[i] = geometric ? arc_length(curve, a, b, 1e-9 * std::max(1.0, speed) * (b - a)) : speed * (b - a);
    }
    return d;
}

double Density::at(const CurveDiscretization& disc, Index panel, double t) const
{
    if (field) return field(disc.curve.point(t));
    const Index n = disc.size();
    const double ti = disc.params[panel];
    Index j = t >= ti ? panel + 1 : panel - 1;
    double tj = 0.0;
    if (j < 0 || j >= n) {
        if (!disc.curve.closed()) return values[panel];
        j = (j + n) % n;
        tj = disc.params[j] + (t >= ti ? disc.curve.period() : -disc.curve.period());
    } else {
        tj = disc.params[j];
    }
    const double lambda = (t - ti) / (tj - ti);
    return (1.0 - lambda) * values[panel] + lambda * values[j];
}

Density sample_density(const CurveDiscretization& disc, std::function<double(const Vec2&)> q)
{
    Density d;
    d.values.resize(disc.size());
    for (Index i = 0; i < disc.size(); ++i) d.values[i] = q(disc.node(i));
    d.field = std::move(q);
    return d;
}

Density constant_density(const CurveDiscretization& disc, double c)
{
    return sample_density(disc, [c](const Vec2&) { return c; });
}

Density scale_density(const Density& q, double s)
{
    Density d;
    d.values = s * q.values;
    if (q.field) {
        auto f = q.field;
        d.field = [f, s](const Vec2& y) { return s * f(y); };
    }
    return d;
}

namespace {

// Arc length inside B_r(x) of the sub-panel [a, b] of panel i, whose length is `len`.
double straddle_measure(const CurveDiscretization& disc, const Vec2& x, double r, double a, double b, double len,
                        int depth)
{
    const double t = 0.5 * (a + b);
    const double dist = (disc.curve.point(t) - x).norm();
    if (dist + 0.5 * len < r) return len;
    if (dist - 0.5 * len >= r) return 0.0;
    if (depth >= 48 || len <= 1e-14 * r) return dist < r ? len : 0.0;
    const double sa = disc.curve.derivative(0.5 * (a + t)).norm();
    const double sb = disc.curve.derivative(0.5 * (t + b)).norm();
    const double la = len * sa / (sa + sb);
    return straddle_measure(disc, x, r, a, t, la, depth + 1) + straddle_measure(disc, x, r, t, b, len - la, depth + 1);
}

} // namespace

double ball_measure(const CurveDiscretization& disc, const Vec2& x, double r)
{
    if (!(r > 0.0)) throw GeometryError("ball_measure: radius must be positive");
    double total = 0.0;
    for (Index i = 0; i < disc.size(); ++i) {
        const double w = disc.weights[i];
        const double dist = (disc.node(i) - x).norm();
        if (dist + 0.5 * w < r) total += w;
        else if (dist - 0.5 * w < r) total += straddle_measure(disc, x, r, disc.panel_lo[i], disc.panel_hi[i], w, 0);
    }
    return total;
}

double surface_integral(const CurveDiscretization& disc, const std::function<double(const Vec2&)>& g)
{
    double total = 0.0;
    for (Index i = 0; i < disc.size(); ++i) total += g(disc.node(i)) * disc.weights[i];
    return total;
}

bool encloses(const CurveDiscretization& disc, const Vec2& x)
{
    double winding = 0.0;
    const Index n = disc.size();
    for (Index i = 0; i < n; ++i) {
        const Vec2 a = disc.node(i) - x;
        const Vec2 b = disc.node((i + 1) % n) - x;
        winding += std::atan2(cross(a, b), a.dot(b));
    }
    return std::abs(winding) > pi;
}

} // namespace spl
