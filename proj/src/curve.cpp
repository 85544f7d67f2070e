#include "spl/curve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "spl/expression.hpp"
#include "spl/quadrature.hpp"

namespace spl {

PlanarCurve::PlanarCurve(CurveKind kind, PointFn point, PointFn derivative, double t_begin,
                         double t_end, bool closed)
    : kind_(kind), point_(std::move(point)), derivative_(std::move(derivative)), t_begin_(t_begin),
      t_end_(t_end), closed_(closed)
{
    if (!(t_end > t_begin)) throw GeometryError("curve parameter range is empty");
}

Vec2 PlanarCurve::second_derivative(double t) const
{
    if (second_) return second_(t);
    const double h = 1e-5 * period();
    return (derivative_(t + h) - derivative_(t - h)) / (2.0 * h);
}

Vec2 PlanarCurve::unit_tangent(double t) const
{
    const Vec2 d = derivative_(t);
    const double n = d.norm();
    if (!(n > 0.0)) throw GeometryError("degenerate parametrization at t = " + std::to_string(t));
    return d / n;
}

Vec2 PlanarCurve::unit_normal(double t) const
{
    const Vec2 tau = unit_tangent(t);
    return closed_ ? Vec2(tau.y(), -tau.x()) : Vec2(-tau.y(), tau.x());
}

double PlanarCurve::oriented_curvature(double t) const
{
    const Vec2 d1 = derivative_(t);
    const Vec2 d2 = second_derivative(t);
    const double n = d1.norm();
    return cross(d1, d2) / (n * n * n);
}

PlanarCurve& PlanarCurve::set_second_derivative(PointFn f)
{
    second_ = std::move(f);
    return *this;
}

PlanarCurve& PlanarCurve::set_analytic_length(double length)
{
    length_ = length;
    return *this;
}

PlanarCurve& PlanarCurve::add_singular_parameter(double t)
{
    singular_.push_back(t);
    return *this;
}

PlanarCurve& PlanarCurve::set_graph(GraphData g)
{
    graph_ = std::move(g);
    return *this;
}

PlanarCurve& PlanarCurve::set_description(std::string d)
{
    description_ = std::move(d);
    return *this;
}

PlanarCurve& PlanarCurve::set_parameter_range(double t_begin, double t_end)
{
    if (!(t_end > t_begin)) throw GeometryError("curve parameter range is empty");
    t_begin_ = t_begin;
    t_end_ = t_end;
    return *this;
}

PlanarCurve make_circle(double radius, const Vec2& center)
{
    if (!(radius > 0.0)) throw GeometryError("circle radius must be positive");
    const double w = 2.0 * pi;
    PlanarCurve c(
        CurveKind::ClosedAnalytic,
        [=](double t) { return Vec2(center.x() + radius * std::cos(w * t), center.y() + radius * std::sin(w * t)); },
        [=](double t) { return Vec2(-w * radius * std::sin(w * t), w * radius * std::cos(w * t)); }, 0.0, 1.0,
        true);
    c.set_second_derivative([=](double t) {
        return Vec2(-w * w * radius * std::cos(w * t), -w * w * radius * std::sin(w * t));
    });
    c.set_analytic_length(2.0 * pi * radius);
    std::ostringstream os;
    os << "circle:rho=" << radius << ",cx=" << center.x() << ",cy=" << center.y();
    c.set_description(os.str());
    return c;
}

PlanarCurve make_ellipse(double a, double b, const Vec2& center, double angle)
{
    if (!(a > 0.0) || !(b > 0.0)) throw GeometryError("ellipse semi-axes must be positive");
    const double w = 2.0 * pi;
    const Mat2 r = rotation(angle);
    PlanarCurve c(
        CurveKind::ClosedAnalytic,
        [=](double t) { return Vec2(center + r * Vec2(a * std::cos(w * t), b * std::sin(w * t))); },
        [=](double t) { return Vec2(r * Vec2(-w * a * std::sin(w * t), w * b * std::cos(w * t))); }, 0.0, 1.0,
        true);
    c.set_second_derivative(
        [=](double t) { return Vec2(r * Vec2(-w * w * a * std::cos(w * t), -w * w * b * std::sin(w * t))); });
    if (a == b) c.set_analytic_length(2.0 * pi * a);
    std::ostringstream os;
    os << "ellipse:a=" << a << ",b=" << b << ",cx=" << center.x() << ",cy=" << center.y() << ",angle=" << angle;
    c.set_description(os.str());
    return c;
}

PlanarCurve make_graph(std::function<double(double)> f, std::function<double(double)> df, double x_begin,
                       double x_end, double angle, const Vec2& offset)
{
    if (!(x_end > x_begin)) throw GeometryError("graph interval is empty");
    const Mat2 r = rotation(angle);
    const double len = x_end - x_begin;
    PlanarCurve c(
        angle == 0.0 ? CurveKind::Graph : CurveKind::RotatedGraph,
        [=](double t) {
            const double x = x_begin + t * len;
            return Vec2(offset + r * Vec2(x, f(x)));
        },
        [=](double t) {
            const double x = x_begin + t * len;
            return Vec2(r * Vec2(len, len * df(x)));
        },
        0.0, 1.0, false);
    c.set_graph(GraphData{f, df, x_begin, x_end, angle, offset});
    return c;
}

double counterexample_f(double x, double a)
{
    if (x <= 0.0) return 0.0;
    return std::pow(x, 1.0 + a) * std::sin(1.0 / x) / (1.0 + a);
}

double counterexample_df(double x, double a)
{
    if (x <= 0.0) return 0.0;
    return std::pow(x, a) * std::sin(1.0 / x) - std::pow(x, a - 1.0) * std::cos(1.0 / x) / (1.0 + a);
}

PlanarCurve make_counterexample_curve(double alpha_prime)
{
    if (!(alpha_prime > 0.0 && alpha_prime < 1.0))
        throw GeometryError("counterexample exponent must lie in (0, 1)");
    const double a = alpha_prime;
    PlanarCurve c = make_graph([a](double x) { return counterexample_f(x, a); },
                               [a](double x) { return counterexample_df(x, a); }, 0.0, 1.0);
    c.add_singular_parameter(0.0);
    std::ostringstream os;
    os << "graph:counterexample,alpha=" << alpha_prime;
    c.set_description(os.str());
    return c;
}

PlanarCurve make_polyline(std::vector<Vec2> points, bool closed)
{
    if (points.size() < 2) throw GeometryError("polyline needs at least two points");
    if (closed) {
        if ((points.front() - points.back()).norm() == 0.0) points.pop_back();
        if (points.size() < 3) throw GeometryError("closed polyline needs at least three points");
        double area = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i)
            area += cross(points[i], points[(i + 1) % points.size()]);
        if (area < 0.0) std::reverse(points.begin(), points.end());
        points.push_back(points.front());
    }
    auto pts = std::make_shared<const std::vector<Vec2>>(std::move(points));
    auto cum = std::make_shared<std::vector<double>>(pts->size(), 0.0);
    for (std::size_t i = 1; i < pts->size(); ++i) {
        const double seg = ((*pts)[i] - (*pts)[i - 1]).norm();
        if (seg == 0.0) throw GeometryError("polyline has a repeated vertex at index " + std::to_string(i));
        (*cum)[i] = (*cum)[i - 1] + seg;
    }
    const double total = cum->back();
    auto locate = [pts, cum, total](double t) {
        const double s = std::clamp(t, 0.0, 1.0) * total;
        auto it = std::upper_bound(cum->begin(), cum->end(), s);
        std::size_t k = static_cast<std::size_t>(std::distance(cum->begin(), it));
        k = std::clamp<std::size_t>(k, 1, pts->size() - 1) - 1;
        return std::pair<std::size_t, double>(k, s);
    };
    PlanarCurve c(
        CurveKind::Polyline,
        [pts, cum, locate](double t) {
            const auto [k, s] = locate(t);
            const double seg = (*cum)[k + 1] - (*cum)[k];
            return Vec2((*pts)[k] + (s - (*cum)[k]) / seg * ((*pts)[k + 1] - (*pts)[k]));
        },
        [pts, cum, locate, total](double t) {
            const auto [k, s] = locate(t);
            const double seg = (*cum)[k + 1] - (*cum)[k];
            return Vec2(total / seg * ((*pts)[k + 1] - (*pts)[k]));
        },
        0.0, 1.0, closed);
    c.set_second_derivative([](double) { return Vec2(Vec2::Zero()); });
    c.set_analytic_length(total);
    c.set_description(closed ? "polyline:closed" : "polyline:open");
    return c;
}

PlanarCurve restrict_parameters(const PlanarCurve& curve, double t_begin, double t_end)
{
    if (curve.closed()) throw GeometryError("cannot restrict a closed curve");
    if (t_begin < curve.t_begin() || t_end > curve.t_end())
        throw GeometryError("restriction lies outside the parameter range");
    PlanarCurve c = curve;
    c.set_parameter_range(t_begin, t_end);
    return c;
}

double arc_length(const PlanarCurve& curve, double t0, double t1, double tol)
{
    if (t1 == t0) return 0.0;
    const double sign = t1 > t0 ? 1.0 : -1.0;
    const double a = std::min(t0, t1), b = std::max(t0, t1);
    const auto r = integrate_adaptive([&](double t) { return curve.derivative(t).norm(); }, a, b, tol, 30);
    return sign * r.value;
}

double parameter_at_arc_offset(const PlanarCurve& curve, double t0, double s)
{
    double t = t0 + s / curve.derivative(t0).norm();
    for (int it = 0; it < 50; ++it) {
        const double len = integrate_gauss([&](double u) { return curve.derivative(u).norm(); }, t0, t, 24);
        const double dt = (len - s) / curve.derivative(t).norm();
        t -= dt;
        if (std::abs(dt) < 1e-15 * (1.0 + std::abs(t))) break;
    }
    return t;
}

namespace {

std::map<std::string, std::string> parse_keys(const std::string& spec, const std::string& body,
                                              std::string* leading_word)
{
    std::map<std::string, std::string> keys;
    std::stringstream ss(body);
    std::string item;
    bool first = true;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            if (first && leading_word) {
                *leading_word = item;
                first = false;
                continue;
            }
            throw ParseError("curve spec '" + spec + "': expected key=value, got '" + item + "'");
        }
        first = false;
        keys[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return keys;
}

double number(const std::map<std::string, std::string>& keys, const std::string& key, double fallback,
              const std::string& spec)
{
    auto it = keys.find(key);
    if (it == keys.end()) return fallback;
    try {
        return Expression::parse(it->second)(0.0);
    } catch (const ParseError&) {
        throw ParseError("curve spec '" + spec + "': bad number for '" + key + "'");
    }
}

void reject_unknown(const std::map<std::string, std::string>& keys, const std::vector<std::string>& allowed,
                    const std::string& spec)
{
    for (const auto& [k, v] : keys)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ParseError("curve spec '" + spec + "': unknown key '" + k + "'");
}

} // namespace

PlanarCurve parse_curve_spec(const std::string& spec)
{
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ParseError("curve spec '" + spec + "': missing ':'");
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);
    if (kind == "circle") {
        auto keys = parse_keys(spec, body, nullptr);
        reject_unknown(keys, {"rho", "cx", "cy"}, spec);
        if (!keys.count("rho")) throw ParseError("curve spec '" + spec + "': missing rho");
        PlanarCurve c = make_circle(number(keys, "rho", 0.0, spec),
                                    Vec2(number(keys, "cx", 0.0, spec), number(keys, "cy", 0.0, spec)));
        c.set_description(spec);
        return c;
    }
    if (kind == "ellipse") {
        auto keys = parse_keys(spec, body, nullptr);
        reject_unknown(keys, {"a", "b", "cx", "cy", "angle"}, spec);
        if (!keys.count("a") || !keys.count("b")) throw ParseError("curve spec '" + spec + "': missing a or b");
        PlanarCurve c = make_ellipse(number(keys, "a", 0.0, spec), number(keys, "b", 0.0, spec),
                                     Vec2(number(keys, "cx", 0.0, spec), number(keys, "cy", 0.0, spec)),
                                     number(keys, "angle", 0.0, spec));
        c.set_description(spec);
        return c;
    }
    if (kind == "graph") {
        std::string word;
        auto keys = parse_keys(spec, body, &word);
        if (word == "counterexample") {
            reject_unknown(keys, {"alpha"}, spec);
            if (!keys.count("alpha")) throw ParseError("curve spec '" + spec + "': missing alpha");
            PlanarCurve c = make_counterexample_curve(number(keys, "alpha", 0.0, spec));
            c.set_description(spec);
            return c;
        }
        if (word == "expr") {
            reject_unknown(keys, {"f", "x0", "x1", "angle", "cx", "cy"}, spec);
            if (!keys.count("f")) throw ParseError("curve spec '" + spec + "': missing f");
            const Expression e = Expression::parse(keys.at("f"));
            PlanarCurve c = make_graph([e](double x) { return e(x); },
                                       [e](double x) { return e.evaluate({x, 1.0}).d; },
                                       number(keys, "x0", 0.0, spec), number(keys, "x1", 1.0, spec),
                                       number(keys, "angle", 0.0, spec),
                                       Vec2(number(keys, "cx", 0.0, spec), number(keys, "cy", 0.0, spec)));
            c.set_description(spec);
            return c;
        }
        throw ParseError("curve spec '" + spec + "': graph kind must be 'counterexample' or 'expr'");
    }
    throw ParseError("curve spec '" + spec + "': unknown curve kind '" + kind + "'");
}

} // namespace spl
