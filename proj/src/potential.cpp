#include "spl/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spl/quadrature.hpp"

namespace spl {

namespace {

constexpr double kNearFactor = 4.0;   // near-singular mode below this many max panel lengths
constexpr double kNearRadius = 32.0;  // panels within this many max panel lengths get corrected
constexpr int kMaxDepth = 20;
constexpr int kLeafPoints = 10;

template <class R>
R zero()
{
    if constexpr (std::is_same_v<R, double>) return 0.0;
    else return R::Zero();
}

struct ValueKernel {
    using Result = double;
    double operator()(const Vec2& r) const { return -std::log(r.squaredNorm()) / (4.0 * pi); }
};

struct GradientKernel {
    using Result = Vec2;
    Vec2 operator()(const Vec2& r) const { return -r / (2.0 * pi * r.squaredNorm()); }
};

template <class Kernel>
typename Kernel::Result panel_integral(const CurveDiscretization& disc, const Density& q, const Vec2& x, Index i,
                                       double a, double b, int depth, const Kernel& kernel)
{
    using R = typename Kernel::Result;
    const PlanarCurve& curve = disc.curve;
    const double t = 0.5 * (a + b);
    const double len = curve.derivative(t).norm() * (b - a);
    if (depth < kMaxDepth && len > (curve.point(t) - x).norm())
        return panel_integral(disc, q, x, i, a, t, depth + 1, kernel)
             + panel_integral(disc, q, x, i, t, b, depth + 1, kernel);
    const GaussRule& rule = gauss_legendre(kLeafPoints);
    R sum = zero<R>();
    const double half = 0.5 * (b - a);
    for (Index k = 0; k < rule.nodes.size(); ++k) {
        const double s = t + half * rule.nodes[k];
        const Vec2 r = x - curve.point(s);
        if (r.squaredNorm() == 0.0) continue;
        sum += (rule.weights[k] * half * curve.derivative(s).norm() * q.at(disc, i, s)) * kernel(r);
    }
    return sum;
}

/// Midpoint sum over all nodes plus adaptive corrections on the panels near x.
template <class Kernel>
typename Kernel::Result layer_integral(const CurveDiscretization& disc, const Density& q, const Vec2& x,
                                       bool adaptive, const Kernel& kernel)
{
    using R = typename Kernel::Result;
    R sum = zero<R>();
    double dmin = std::numeric_limits<double>::infinity();
    const double scale = 1.0 + x.norm();
    for (Index i = 0; i < disc.size(); ++i) {
        const Vec2 r = x - disc.node(i);
        const double d = r.norm();
        if (d <= 1e-14 * scale) {
            std::ostringstream os;
            os << "layer potential evaluated on quadrature node " << i;
            throw SingularityError(os.str());
        }
        dmin = std::min(dmin, d);
        sum += (q.values[i] * disc.weights[i]) * kernel(r);
    }
    const double h = disc.max_weight();
    if (dmin >= kNearFactor * h) return sum;
    if (!adaptive) {
        std::ostringstream os;
        os << "evaluation point at distance " << dmin << " is below the quadrature resolution floor "
           << kNearFactor * h;
        throw SingularityError(os.str());
    }
    for (Index i = 0; i < disc.size(); ++i) {
        const Vec2 r = x - disc.node(i);
        if (r.norm() >= kNearRadius * h) continue;
        sum += panel_integral(disc, q, x, i, disc.panel_lo[i], disc.panel_hi[i], 0, kernel);
        sum -= (q.values[i] * disc.weights[i]) * kernel(r);
    }
    return sum;
}

Vec2 image_point(const Vec2& y)
{
    return y / y.squaredNorm();
}

double image_value(const CurveDiscretization& disc, const Density& q, const Vec2& x)
{
    double sum = 0.0;
    for (Index i = 0; i < disc.size(); ++i) {
        const Vec2 y = disc.node(i);
        const double ny = y.norm();
        if (ny == 0.0) continue;
        sum += q.values[i] * disc.weights[i] * fundamental_solution(Vec2(ny * (x - image_point(y)))).value;
    }
    return sum;
}

Vec2 image_gradient(const CurveDiscretization& disc, const Density& q, const Vec2& x)
{
    Vec2 sum = Vec2::Zero();
    for (Index i = 0; i < disc.size(); ++i) {
        const Vec2 y = disc.node(i);
        if (y.squaredNorm() == 0.0) continue;
        sum += (q.values[i] * disc.weights[i]) * fundamental_solution(Vec2(x - image_point(y))).gradient;
    }
    return sum;
}

void check_inside_disk(const CurveDiscretization& disc)
{
    double reach = 0.0;
    for (Index i = 0; i < disc.size(); ++i) reach = std::max(reach, disc.node(i).norm() + disc.weights[i]);
    if (!(reach < 1.0)) throw GeometryError("curve is not compactly contained in the unit disk");
}

} // namespace

double greens_disk(const Vec2& x, const Vec2& y)
{
    if (!(x.norm() < 1.0) || !(y.norm() < 1.0)) throw GeometryError("greens_disk: arguments must lie in the open unit disk");
    if ((x - y).norm() == 0.0) throw SingularityError("greens_disk: coincident arguments");
    const double ny = y.norm();
    const double correction = ny == 0.0 ? 0.0 : fundamental_solution(Vec2(ny * (x - image_point(y)))).value;
    return fundamental_solution(Vec2(x - y)).value - correction;
}

PotentialSolution::PotentialSolution(CurveDiscretization disc, Density q, DomainKind domain, QuadratureMethod method)
    : disc_(std::move(disc)), q_(std::move(q)), domain_(domain), method_(method)
{
    if (q_.values.size() != disc_.size()) throw GeometryError("density size does not match the discretization");
    if (domain_ == DomainKind::UnitDiskDirichlet) check_inside_disk(disc_);
}

double PotentialSolution::value(const Vec2& x) const
{
    const bool adaptive = method_ == QuadratureMethod::NearSingularAdaptive;
    double v = layer_integral(disc_, q_, x, adaptive, ValueKernel{});
    if (domain_ == DomainKind::UnitDiskDirichlet) {
        if (!(x.norm() < 1.0)) throw GeometryError("evaluation point outside the unit disk");
        v -= image_value(disc_, q_, x);
    }
    return v;
}

Vec2 PotentialSolution::gradient(const Vec2& x) const
{
    const bool adaptive = method_ == QuadratureMethod::NearSingularAdaptive;
    Vec2 g = layer_integral(disc_, q_, x, adaptive, GradientKernel{});
    if (domain_ == DomainKind::UnitDiskDirichlet) g -= image_gradient(disc_, q_, x);
    return g;
}

double single_layer(const CurveDiscretization& disc, const Density& q, const Vec2& x)
{
    return layer_integral(disc, q, x, true, ValueKernel{});
}

double solve_dirichlet_disk(const CurveDiscretization& disc, const Density& q, const Vec2& x)
{
    return PotentialSolution(disc, q, DomainKind::UnitDiskDirichlet).value(x);
}

Vec2 gradient(const PotentialSolution& solution, const Vec2& x)
{
    return solution.gradient(x);
}

Extrapolation extrapolate_to_zero(const std::function<double(double)>& g, double t0, int levels, double tol)
{
    if (levels < 4) throw ExtrapolationError("extrapolate_to_zero: need at least four offsets");
    Extrapolation e;
    for (int k = 0; k < levels; ++k) {
        const double t = t0 * std::ldexp(1.0, -k);
        e.offsets.push_back(t);
        e.samples.push_back(g(t));
    }
    std::vector<double> first;
    for (int k = 0; k + 1 < levels; ++k) first.push_back(2.0 * e.samples[k + 1] - e.samples[k]);
    for (std::size_t k = 0; k + 1 < first.size(); ++k)
        e.extrapolants.push_back((4.0 * first[k + 1] - first[k]) / 3.0);
    const std::size_t m = e.extrapolants.size();
    e.value = e.extrapolants[m - 1];
    e.converged = std::abs(e.extrapolants[m - 1] - e.extrapolants[m - 2]) < tol * (1.0 + std::abs(e.value));
    return e;
}

namespace {

std::string describe(const Extrapolation& e)
{
    std::ostringstream os;
    os << "samples:";
    for (double s : e.samples) os << ' ' << s;
    os << "; extrapolants:";
    for (double s : e.extrapolants) os << ' ' << s;
    return os.str();
}

Extrapolation checked(Extrapolation e, const char* what)
{
    if (!e.converged)
        throw ExtrapolationError(std::string("non-convergent one-sided limit (") + what + "), " + describe(e));
    return e;
}

} // namespace

Vec2 one_sided_gradient(const PotentialSolution& solution, const Vec2& x0, const Vec2& direction)
{
    const Vec2 dir = direction.normalized();
    auto sample = [&](int component) {
        return [&, component](double t) { return solution.gradient(Vec2(x0 + t * dir))[component]; };
    };
    const Extrapolation gx = checked(extrapolate_to_zero(sample(0)), "x component");
    const Extrapolation gy = checked(extrapolate_to_zero(sample(1)), "y component");
    return Vec2(gx.value, gy.value);
}

NormalDerivatives normal_derivatives(const PotentialSolution& solution, Index i)
{
    const CurveDiscretization& disc = solution.discretization();
    const Density& q = solution.density();
    const PlanarCurve& curve = disc.curve;
    if (!curve.closed()) throw GeometryError("normal_derivatives: curve must be closed");
    if (i < 0 || i >= disc.size()) throw GeometryError("normal_derivatives: node index out of range");

    const Vec2 x0 = disc.node(i);
    const Vec2 nu = disc.normal(i);
    const double t0 = disc.params[i];
    const double q0 = q.values[i];

    NormalDerivatives out;
    out.outer_fit = checked(
        extrapolate_to_zero([&](double t) { return solution.gradient(Vec2(x0 + t * nu)).dot(nu); }), "outer");
    out.inner_fit = checked(
        extrapolate_to_zero([&](double t) { return solution.gradient(Vec2(x0 - t * nu)).dot(nu); }), "inner");
    out.outer = out.outer_fit.value;
    out.inner = out.inner_fit.value;
    out.jump = out.outer - out.inner;

    // Principal value: exclude a symmetric arc-length window, extrapolate the window to zero.
    const double total = disc.total_length();
    auto panel_of = [&](double t) {
        double u = t;
        while (u < curve.t_begin()) u += curve.period();
        while (u >= curve.t_end()) u -= curve.period();
        Index lo = 0, hi = disc.size() - 1;
        while (lo < hi) {
            const Index mid = (lo + hi) / 2;
            if (disc.panel_hi[mid] <= u) lo = mid + 1;
            else hi = mid;
        }
        return std::pair<Index, double>(lo, u);
    };
    auto integrand_any = [&](double t) {
        const Vec2 y = curve.point(t);
        const Vec2 r = x0 - y;
        const double k = -r.dot(nu) / (2.0 * pi * r.squaredNorm());
        double qy = 0.0;
        if (q.field) {
            qy = q.field(y);
        } else {
            const auto [panel, u] = panel_of(t);
            qy = q.at(disc, panel, u);
        }
        return k * qy * curve.derivative(t).norm();
    };
    constexpr int windows = 8;
    for (int k = 0; k < windows; ++k) {
        const double w = std::ldexp(1.0, -k) * total / 8.0;
        const double right = parameter_at_arc_offset(curve, t0, w);
        const double left = parameter_at_arc_offset(curve, t0, -w) + curve.period();
        constexpr int pieces = 64;
        double value = 0.0;
        for (int p = 0; p < pieces; ++p) {
            const double a = right + (left - right) * p / pieces;
            const double b = right + (left - right) * (p + 1) / pieces;
            value += integrate_gauss(integrand_any, a, b, 16);
        }
        out.pv_windows.push_back(w);
        out.pv_values.push_back(value);
    }
    out.pv_integral = 2.0 * out.pv_values[windows - 1] - out.pv_values[windows - 2];

    double image = 0.0;
    if (solution.domain() == DomainKind::UnitDiskDirichlet) image = -image_gradient(disc, q, x0).dot(nu);
    out.formula_outer = -0.5 * q0 + out.pv_integral + image;
    out.formula_inner = 0.5 * q0 + out.pv_integral + image;
    return out;
}

double wolff_potential(const CurveDiscretization& disc, const Vec2& x, double delta)
{
    if (!(delta > 0.0 && delta < 1.0)) throw GeometryError("wolff_potential: delta must lie in (0, 1)");
    // t = e^s; intervals of width ln2/8 anchored at s = 0 so that results for
    // different cutoffs share their upper intervals exactly.
    const double step = std::log(2.0) / 8.0;
    const double s_min = std::log(delta);
    double total = 0.0;
    for (int k = 0;; ++k) {
        const double b = -k * step;
        if (b <= s_min) break;
        const double a = std::max(s_min, b - step);
        total += integrate_gauss(
            [&](double s) {
                const double t = std::exp(s);
                return ball_measure(disc, x, t) / t;
            },
            a, b, 8);
    }
    return total;
}

} // namespace spl
