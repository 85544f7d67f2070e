#include "spl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "spl/quadrature.hpp"

namespace spl {

std::vector<Chart> circle_charts(double radius, const Vec2& center, int count, double half_aperture)
{
    std::vector<Chart> charts;
    const double u = radius * std::sin(half_aperture);
    for (int k = 0; k < count; ++k) {
        const double direction = 2.0 * pi * k / count;
        Chart c;
        c.angle = direction - 0.5 * pi;
        c.offset = center;
        c.u_min = -u;
        c.u_max = u;
        c.f = [radius](double s) { return std::sqrt(std::max(0.0, radius * radius - s * s)); };
        c.df = [radius](double s) { return -s / std::sqrt(std::max(1e-300, radius * radius - s * s)); };
        charts.push_back(c);
    }
    return charts;
}

Chart graph_chart(const PlanarCurve& graph_curve)
{
    const auto& g = graph_curve.graph();
    if (!g) throw GeometryError("graph_chart: curve is not a graph");
    const double len = g->x_end - g->x_begin;
    return Chart{g->angle, g->offset, g->x_begin + graph_curve.t_begin() * len,
                 g->x_begin + graph_curve.t_end() * len, g->f, g->df};
}

double lipschitz_constant_estimate(const PlanarCurve& curve, const std::vector<Chart>& charts)
{
    if (charts.empty()) throw GeometryError("lipschitz_constant_estimate: no charts");
    constexpr int samples = 4096;
    for (int k = 0; k <= samples; ++k) {
        const double t = curve.t_begin() + curve.period() * k / samples;
        const Vec2 p = curve.point(t);
        const double scale = 1.0 + p.norm();
        bool covered = false;
        for (const Chart& c : charts) {
            const Vec2 local = rotation(c.angle).transpose() * (p - c.offset);
            const double tol = 1e-9 * scale;
            if (local.x() < c.u_min - tol || local.x() > c.u_max + tol) continue;
            const double u = std::clamp(local.x(), c.u_min, c.u_max);
            if (std::abs(local.y() - c.f(u)) <= 1e-8 * scale) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            std::ostringstream os;
            os << "lipschitz_constant_estimate: curve point (" << p.x() << ", " << p.y() << ") at t = " << t
               << " is not covered by any chart";
            throw GeometryError(os.str());
        }
    }

    double total = 0.0;
    for (const Chart& c : charts) {
        double slope = 0.0;
        // Uniform plus log-clustered samples toward both ends, where graphs steepen.
        constexpr int dense = 20000;
        const double width = c.u_max - c.u_min;
        auto probe = [&](double u) {
            const double s = std::abs(c.df(u));
            if (std::isfinite(s)) slope = std::max(slope, s);
        };
        for (int k = 0; k <= dense; ++k) probe(c.u_min + width * k / dense);
        for (int k = 0; k <= dense; ++k) {
            const double frac = std::pow(1e-12, 1.0 - static_cast<double>(k) / dense);
            probe(c.u_min + width * frac);
            probe(c.u_max - width * frac);
        }
        total += std::sqrt(1.0 + slope * slope);
    }
    return total;
}

SignedDistanceSample signed_distance(const PlanarCurve& curve, const Vec2& x)
{
    if (!curve.closed()) throw GeometryError("signed_distance: curve must be closed");
    constexpr int coarse = 1024;
    const double T = curve.period();
    const double dt = T / coarse;
    std::vector<double> dist(coarse);
    for (int k = 0; k < coarse; ++k) dist[k] = (curve.point(curve.t_begin() + k * dt) - x).squaredNorm();

    auto f = [&](double t) { return (curve.point(t) - x).squaredNorm(); };
    auto refine = [&](double t) {
        // Golden section on the bracket around the coarse minimum, then Newton polish.
        double a = t - dt, b = t + dt;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 80 && (b - a) > 1e-15 * T; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        double s = 0.5 * (a + b);
        for (int it = 0; it < 8; ++it) {
            const Vec2 r = curve.point(s) - x;
            const Vec2 d1 = curve.derivative(s);
            const Vec2 d2 = curve.second_derivative(s);
            const double phi = r.dot(d1);
            const double dphi = d1.squaredNorm() + r.dot(d2);
            if (!(dphi > 0.0)) break;
            const double step = phi / dphi;
            if (std::abs(step) > dt) break;
            const double next = s - step;
            if (f(next) > f(s)) break;
            s = next;
        }
        return s;
    };

    std::vector<std::pair<double, double>> minima; // (distance, parameter)
    for (int k = 0; k < coarse; ++k) {
        const double prev = dist[(k + coarse - 1) % coarse];
        const double next = dist[(k + 1) % coarse];
        if (dist[k] <= prev && dist[k] <= next) {
            const double s = refine(curve.t_begin() + k * dt);
            minima.emplace_back(std::sqrt(f(s)), s);
        }
    }
    std::sort(minima.begin(), minima.end());
    const double best = minima.front().first;
    const Vec2 p = curve.point(minima.front().second);
    const double scale = 1.0 + x.norm();
    for (std::size_t k = 1; k < minima.size(); ++k) {
        if (minima[k].first - best > 1e-9 * scale) break;
        const Vec2 q = curve.point(minima[k].second);
        if ((q - p).norm() > 1e-6 * scale) {
            std::ostringstream os;
            os << "signed_distance: point (" << x.x() << ", " << x.y()
               << ") has several nearest points (beyond the reach)";
            throw GeometryError(os.str());
        }
    }

    SignedDistanceSample out;
    out.parameter = minima.front().second;
    out.projection = p;
    const Vec2 nu = curve.unit_normal(out.parameter);
    out.d = (x - p).dot(nu) >= 0.0 ? best : -best;
    if (best <= 1e-15 * scale) {
        out.d = 0.0;
        out.projection = x;
    }
    out.kappa = -curve.oriented_curvature(out.parameter);
    return out;
}

namespace {

double biweight(double u)
{
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return s * s;
}

} // namespace

Density mollify_density(const CurveDiscretization& disc, const Density& q, double epsilon)
{
    if (!(epsilon > 0.0)) throw GeometryError("mollify_density: epsilon must be positive");
    const Index n = disc.size();
    Eigen::VectorXd s(n);
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
        s[i] = acc + 0.5 * disc.weights[i];
        acc += disc.weights[i];
    }
    const double total = acc;
    const bool closed = disc.curve.closed();

    const double hi = q.values.maxCoeff(), lo = q.values.minCoeff();
    Density out;
    out.values.resize(n);
    for (Index i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0;
        for (Index j = 0; j < n; ++j) {
            double ds = std::abs(s[j] - s[i]);
            if (closed) ds = std::min(ds, total - ds);
            if (ds >= epsilon) continue;
            const double k = biweight(ds / epsilon) * disc.weights[j];
            num += k * q.values[j];
            den += k;
        }
        out.values[i] = num / den;
        // A convex combination never leaves [min, max]; clamp rounding.
        out.values[i] = std::clamp(out.values[i], lo, hi);
    }
    return out;
}

PlanarCurve mollify_curve(const PlanarCurve& graph_curve, double epsilon)
{
    const auto& g = graph_curve.graph();
    if (!g) throw GeometryError("mollify_curve: curve is not a graph");
    if (!(epsilon > 0.0)) throw GeometryError("mollify_curve: epsilon must be positive");

    // Kernel-weighted Gauss nodes on [-1, 1], normalized to unit mass.
    const GaussRule& rule = gauss_legendre(64);
    auto nodes = std::make_shared<std::vector<double>>();
    auto weights = std::make_shared<std::vector<double>>();
    double mass = 0.0;
    for (Index k = 0; k < rule.nodes.size(); ++k) {
        nodes->push_back(rule.nodes[k]);
        weights->push_back(rule.weights[k] * biweight(rule.nodes[k]));
        mass += weights->back();
    }
    for (double& w : *weights) w /= mass;

    const GraphData data = *g;
    auto extended_f = [data](double x) { return data.f(std::clamp(x, data.x_begin, data.x_end)); };
    auto extended_df = [data](double x) {
        return (x < data.x_begin || x > data.x_end) ? 0.0 : data.df(x);
    };
    auto f = [=](double x) {
        double sum = 0.0;
        for (std::size_t k = 0; k < nodes->size(); ++k) sum += (*weights)[k] * extended_f(x - epsilon * (*nodes)[k]);
        return sum;
    };
    auto df = [=](double x) {
        double sum = 0.0;
        for (std::size_t k = 0; k < nodes->size(); ++k) sum += (*weights)[k] * extended_df(x - epsilon * (*nodes)[k]);
        return sum;
    };
    PlanarCurve c = make_graph(f, df, data.x_begin, data.x_end, data.angle, data.offset);
    c.set_parameter_range(graph_curve.t_begin(), graph_curve.t_end());
    std::ostringstream os;
    os << graph_curve.description() << " mollified eps=" << epsilon;
    c.set_description(os.str());
    return c;
}

} // namespace spl
