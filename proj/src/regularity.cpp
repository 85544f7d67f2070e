#include "spl/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spl/geometry.hpp"
#include "spl/parallel.hpp"
#include "spl/quadrature.hpp"

namespace spl {

namespace {

Index nearest_node(const CurveDiscretization& disc, const Vec2& x)
{
    Index best = 0;
    (disc.nodes.colwise() - x).colwise().squaredNorm().minCoeff(&best);
    return best;
}

// Which side of the curve x lies on: enclosed for closed curves, the normal side otherwise.
bool side_of(const CurveDiscretization& disc, const Vec2& x)
{
    if (disc.curve.closed()) return encloses(disc, x);
    const Index i = nearest_node(disc, x);
    return (x - disc.node(i)).dot(disc.normal(i)) > 0.0;
}

Vec2 circle_flux(const PotentialSolution& solution, const Vec2& x0, double r)
{
    const CurveDiscretization& disc = solution.discretization();
    auto at = [&](double phi) { return Vec2(x0 + r * Vec2(std::cos(phi), std::sin(phi))); };

    constexpr int samples = 512;
    const double offset = 0.01234;
    std::vector<double> cuts;
    bool prev = side_of(disc, at(offset));
    for (int m = 1; m <= samples; ++m) {
        double a = offset + 2.0 * pi * (m - 1) / samples;
        double b = offset + 2.0 * pi * m / samples;
        const bool cur = side_of(disc, at(b));
        if (cur == prev) continue;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (a + b);
            if (side_of(disc, at(mid)) == prev) a = mid;
            else b = mid;
        }
        cuts.push_back(0.5 * (a + b));
        prev = cur;
    }
    if (cuts.empty()) cuts.push_back(offset);
    Vec2 total = Vec2::Zero();
    for (std::size_t c = 0; c < cuts.size(); ++c) {
        const double a = cuts[c];
        const double b = c + 1 < cuts.size() ? cuts[c + 1] : cuts[0] + 2.0 * pi;
        constexpr int pieces = 8;
        for (int p = 0; p < pieces; ++p) {
            const double lo = a + (b - a) * p / pieces;
            const double hi = a + (b - a) * (p + 1) / pieces;
            for (int k = 0; k < 2; ++k)
                total[k] += integrate_gauss(
                    [&](double phi) {
                        const double e = k == 0 ? std::cos(phi) : std::sin(phi);
                        return solution.value(at(phi)) * e;
                    },
                    lo, hi, 16);
        }
    }
    return total / (pi * r);
}

} // namespace

ThetaEstimate estimate_theta(const PotentialSolution& solution, const Vec2& x0, const std::vector<double>& radii)
{
    if (radii.size() < 2) throw GeometryError("estimate_theta: need at least two radii");
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
        if (std::abs(radii[k] / radii[k + 1] - 2.0) > 1e-9)
            throw GeometryError("estimate_theta: radii must halve from one entry to the next");

    ThetaEstimate out;
    out.radii = radii;
    for (double r : radii) out.averages.push_back(circle_flux(solution, x0, r));

    std::vector<Vec2> first;
    for (std::size_t k = 0; k + 1 < out.averages.size(); ++k)
        first.push_back(2.0 * out.averages[k + 1] - out.averages[k]);
    if (first.size() >= 2) {
        for (std::size_t k = 0; k + 1 < first.size(); ++k)
            out.extrapolants.push_back((4.0 * first[k + 1] - first[k]) / 3.0);
    } else {
        out.extrapolants = first;
    }
    out.value = out.extrapolants.back();

    std::vector<double> diffs;
    for (std::size_t k = 0; k + 1 < out.averages.size(); ++k)
        diffs.push_back((out.averages[k + 1] - out.averages[k]).norm());
    out.monotone = true;
    for (std::size_t k = 0; k + 1 < diffs.size(); ++k)
        if (!(diffs[k + 1] < diffs[k])) out.monotone = false;
    if (diffs.size() >= 2 && diffs[diffs.size() - 1] > 0.0)
        out.order = std::log2(diffs[diffs.size() - 2] / diffs[diffs.size() - 1]);
    return out;
}

double value_on_curve(const PotentialSolution& solution, const Vec2& x0)
{
    try {
        return solution.value(x0);
    } catch (const SingularityError&) {
        const CurveDiscretization& disc = solution.discretization();
        const Vec2 nu = disc.normal(nearest_node(disc, x0));
        const Extrapolation e = extrapolate_to_zero([&](double t) {
            return 0.5 * (solution.value(Vec2(x0 + t * nu)) + solution.value(Vec2(x0 - t * nu)));
        });
        if (!e.converged) throw ExtrapolationError("value_on_curve: offset extrapolation did not converge");
        return e.value;
    }
}

std::vector<Vec2> blowup_probes(const Vec2& normal)
{
    const Vec2 nu = normal.normalized();
    const Vec2 tau(-nu.y(), nu.x());
    std::vector<Vec2> probes;
    for (int ring = 1; ring <= 8; ++ring)
        for (int m = 0; m < 8; ++m) {
            const double rho = ring / 8.0;
            const double phi = 2.0 * pi * (m + 0.5) / 8.0;
            probes.push_back(rho * (std::cos(phi) * nu + std::sin(phi) * tau));
        }
    return probes;
}

BlowupReport blowup_residual(const PotentialSolution& solution, const Vec2& x0, const Vec2& theta, double q0,
                             const Vec2& normal, const std::vector<double>& radii)
{
    BlowupReport out;
    out.x0 = x0;
    out.radii = radii;
    out.theta = theta;
    out.q0 = q0;
    out.normal = normal.normalized();
    const double u0 = value_on_curve(solution, x0);
    const std::vector<Vec2> probes = blowup_probes(out.normal);
    for (double r : radii) {
        double worst = 0.0;
        for (const Vec2& p : probes) {
            const double ur = (solution.value(Vec2(x0 + r * p)) - u0) / r;
            const double profile = theta.dot(p) - 0.5 * q0 * std::abs(p.dot(out.normal));
            worst = std::max(worst, std::abs(ur - profile));
        }
        out.residuals.push_back(worst);
    }
    return out;
}

TraceReport traces(const PotentialSolution& solution, Index node)
{
    const CurveDiscretization& disc = solution.discretization();
    if (!disc.curve.closed()) throw GeometryError("traces: curve must be closed");
    if (node < 0 || node >= disc.size()) throw GeometryError("traces: node index out of range");
    TraceReport out;
    out.node = node;
    out.x0 = disc.node(node);
    out.normal = disc.normal(node);
    out.q0 = solution.density().values[node];
    out.outer = one_sided_gradient(solution, out.x0, out.normal);
    out.inner = one_sided_gradient(solution, out.x0, -out.normal);
    return out;
}

NormEstimates estimate_norms(const PotentialSolution& solution, Index node_stride)
{
    const CurveDiscretization& disc = solution.discretization();
    NormEstimates out;
    out.q_sup = solution.density().sup_norm();

    std::vector<Vec2> points;
    points.push_back(Vec2::Zero());
    for (int ring = 1; ring < 32; ++ring)
        for (int m = 0; m < 64; ++m) {
            const double rho = ring / 32.0;
            const double phi = 2.0 * pi * (m + 0.5 * (ring % 2)) / 64.0;
            points.emplace_back(rho * std::cos(phi), rho * std::sin(phi));
        }
    std::vector<double> u(points.size()), g(points.size());
    parallel_for(points.size(), [&](std::size_t k) {
        u[k] = std::abs(solution.value(points[k]));
        g[k] = solution.gradient(points[k]).norm();
    });
    out.u_sup = *std::max_element(u.begin(), u.end());
    out.grad_sup = *std::max_element(g.begin(), g.end());

    std::vector<Index> nodes;
    for (Index i = 0; i < disc.size(); i += std::max<Index>(1, node_stride)) nodes.push_back(i);
    if (disc.curve.closed()) {
        std::vector<TraceReport> tr(nodes.size());
        parallel_for(nodes.size(), [&](std::size_t k) { tr[k] = traces(solution, nodes[k]); });
        for (const TraceReport& t : tr) {
            out.grad_sup = std::max({out.grad_sup, t.inner.norm(), t.outer.norm()});
            out.theta_sup = std::max(out.theta_sup, t.average().norm());
            out.u_sup = std::max(out.u_sup, std::abs(value_on_curve(solution, t.x0)));
        }
    }
    return out;
}

NecessityReport check_necessity(const PotentialSolution& solution, Index node_stride)
{
    const CurveDiscretization& disc = solution.discretization();
    NecessityReport out;
    out.norms = estimate_norms(solution, node_stride);
    const double c01 = out.norms.c01();
    const double scale = out.bound_constant * c01;
    out.q_quotient = scale > 0.0 ? out.norms.q_sup / scale : (out.norms.q_sup > 0.0 ? INFINITY : 0.0);

    const double q_sup = out.norms.q_sup;
    for (Index i = 0; i < disc.size(); i += std::max<Index>(1, node_stride))
        for (int k = 1; k <= 12; ++k) {
            const double r = std::ldexp(1.0, -k);
            // mu = |Q| H^1 restricted to the curve, bounded by ||Q|| times the arc measure.
            double mu = 0.0;
            if (q_sup > 0.0) mu = q_sup * ball_measure(disc, disc.node(i), r);
            const double quotient = scale > 0.0 ? mu / (scale * r) : (mu > 0.0 ? INFINITY : 0.0);
            if (quotient > out.measure_quotient) {
                out.measure_quotient = quotient;
                out.witness_x = disc.node(i);
                out.witness_r = r;
            }
        }
    out.pass = out.q_quotient <= 1.0 && out.measure_quotient <= 1.0;
    return out;
}

EstimateReport make_estimate_report(const NormEstimates& n)
{
    EstimateReport r;
    r.theta_sup = n.theta_sup;
    r.grad_sup = n.grad_sup;
    r.q_sup = n.q_sup;
    r.u_sup = n.u_sup;
    if (n.u_sup > 0.0) r.c_gradient = std::max(0.0, (n.grad_sup - n.theta_sup - 0.5 * n.q_sup) / n.u_sup);
    if (n.q_sup > 0.0) {
        r.c_theta = n.theta_sup / n.q_sup;
        r.c_total = n.grad_sup / n.q_sup;
    }
    return r;
}

std::vector<Check> check_apriori_chain(const EstimateReport& r)
{
    std::vector<Check> out;
    out.push_back(upper("theta_below_gradient", "sup of the trace average bounded by sup of the gradient",
                        r.theta_sup, r.grad_sup, 1e-9 * (1.0 + r.grad_sup)));
    const double rhs = r.theta_sup + 0.5 * r.q_sup + r.c_gradient * r.u_sup;
    Check c = upper("gradient_below_theta_half_q_c_u",
                    "sup of the gradient bounded by theta plus half the density plus C times sup u",
                    r.grad_sup, rhs, 1e-9 * (1.0 + rhs));
    c.pass = c.pass && std::isfinite(r.c_gradient);
    out.push_back(c);
    Check t{"theta_below_c_q", "a-priori bound of theta by the density sup norm (empirical constant)",
            std::isfinite(r.c_theta) && r.c_theta >= 0.0, r.c_theta, r.c_theta, 0.0};
    out.push_back(t);
    Check g{"gradient_below_c_q", "a-priori bound of the gradient by the density (empirical constant)",
            std::isfinite(r.c_total) && r.c_total >= 0.0, r.c_total, r.c_total, 0.0};
    out.push_back(g);
    return out;
}

ComparisonResult comparison_residual(const PotentialSolution& solution,
                                     const std::function<double(const Vec2&)>& q_on_curve, const Grid& grid,
                                     double eps)
{
    const CurveDiscretization& disc = solution.discretization();
    const PlanarCurve& curve = disc.curve;
    if (!curve.closed()) throw GeometryError("comparison_residual: curve must be closed");
    if (eps < 8.0 * grid.h) {
        std::ostringstream os;
        os << "comparison_residual: tube half-width " << eps << " is below 8 grid cells (" << 8.0 * grid.h << ")";
        throw GeometryError(os.str());
    }

    // Mark candidate nodes near the curve; the union of these disks covers the tube and its stencil.
    Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> marked =
        Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(grid.nx + 1, grid.ny + 1);
    const double reach = eps + 2.0 * grid.h + disc.max_weight();
    const Index span = Index(std::ceil(reach / grid.h));
    for (Index k = 0; k < disc.size(); ++k) {
        const Vec2 y = disc.node(k);
        const Index ci = Index(std::lround((y.x() - grid.x0) / grid.h));
        const Index cj = Index(std::lround((y.y() - grid.y0) / grid.h));
        for (Index i = ci - span; i <= ci + span; ++i)
            for (Index j = cj - span; j <= cj + span; ++j)
                if (grid.contains(i, j) && (grid.point(i, j) - y).norm() <= reach) marked(i, j) = 1;
    }
    std::vector<std::pair<Index, Index>> candidates;
    for (Index j = 0; j <= grid.ny; ++j)
        for (Index i = 0; i <= grid.nx; ++i)
            if (marked(i, j)) candidates.emplace_back(i, j);

    Eigen::ArrayXXd dist = Eigen::ArrayXXd::Constant(grid.nx + 1, grid.ny + 1, INFINITY);
    Field v(grid), w(grid);
    const double limit = eps + 1.5 * grid.h;
    parallel_for(candidates.size(), [&](std::size_t k) {
        const auto [i, j] = candidates[k];
        const Vec2 x = grid.point(i, j);
        const SignedDistanceSample s = signed_distance(curve, x);
        dist(i, j) = s.d;
        if (std::abs(s.d) >= limit) return;
        if (!grid.active(i, j)) throw GeometryError("comparison_residual: tube reaches the grid boundary");
        v(i, j) = solution.value(x);
        w(i, j) = v(i, j) + 0.5 * q_on_curve(s.projection) * std::abs(s.d);
    });

    ComparisonResult out{Field(grid), Field(grid), 0.0, 0.0, 0};
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    for (const auto& [i, j] : candidates) {
        if (!(std::abs(dist(i, j)) < eps)) continue;
        if (!grid.interior(i, j)) throw GeometryError("comparison_residual: tube reaches the grid boundary");
        auto lap = [&](const Field& f) {
            return (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) * inv_h2;
        };
        out.residual(i, j) = lap(w);
        out.laplacian_v(i, j) = lap(v);
        out.max_w = std::max(out.max_w, std::abs(out.residual(i, j)));
        out.max_v = std::max(out.max_v, std::abs(out.laplacian_v(i, j)));
        ++out.tube_nodes;
    }
    return out;
}

double holder_seminorm(const Field& f, double alpha, Index stencil)
{
    const Grid& g = f.grid;
    std::vector<std::pair<Index, Index>> offsets;
    for (Index dj = 0; dj <= stencil; ++dj)
        for (Index di = -stencil; di <= stencil; ++di)
            if (dj > 0 || di > 0) offsets.emplace_back(di, dj);
    std::vector<double> row_max(std::size_t(g.ny + 1), 0.0);
    parallel_for(row_max.size(), [&](std::size_t jj) {
        const Index j = Index(jj);
        double worst = 0.0;
        for (Index i = 0; i <= g.nx; ++i) {
            if (!g.active(i, j)) continue;
            for (const auto& [di, dj] : offsets) {
                const Index a = i + di, b = j + dj;
                if (!g.contains(a, b) || !g.active(a, b)) continue;
                const double len = g.h * std::sqrt(double(di * di + dj * dj));
                worst = std::max(worst, std::abs(f(a, b) - f(i, j)) / std::pow(len, alpha));
            }
        }
        row_max[jj] = worst;
    });
    return *std::max_element(row_max.begin(), row_max.end());
}

double lipschitz_seminorm(const Field& f, Index stencil)
{
    return holder_seminorm(f, 1.0, stencil);
}

double second_difference_max(const Field& f, const std::function<bool(const Vec2&)>& keep)
{
    const Grid& g = f.grid;
    double worst = 0.0;
    auto ok = [&](Index i, Index j) { return g.contains(i, j) && g.active(i, j); };
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            if (!ok(i, j)) continue;
            if (keep && !keep(g.point(i, j))) continue;
            if (ok(i - 1, j) && ok(i + 1, j))
                worst = std::max(worst, std::abs(f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)));
            if (ok(i, j - 1) && ok(i, j + 1))
                worst = std::max(worst, std::abs(f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)));
        }
    return worst / (g.h * g.h);
}

double counterexample_lower_bound(double a, double r)
{
    return pi / (8.0 * (1.0 + a)) * std::pow(std::sqrt(2.0) / r + pi / 2.0, -a);
}

namespace {

struct ArcIntegrator {
    double a;
    int deepest = 0;

    // f' keeps its sign on [lo, hi], so the speed splits into |f'|, integrated
    // exactly, plus the small remainder sqrt(1 + f'^2) - |f'|.
    double piece(double lo, double hi)
    {
        if (!(hi > lo)) return 0.0;
        const double main = std::abs(counterexample_f(hi, a) - counterexample_f(lo, a));
        auto rest = [this](double x) {
            const double d = std::abs(counterexample_df(x, a));
            return 1.0 / (std::sqrt(1.0 + d * d) + d);
        };
        if (hi - lo <= 1e-12 * hi) return main + (hi - lo) * rest(0.5 * (lo + hi));
        const double scale = main + (hi - lo);
        const AdaptiveResult res = integrate_adaptive(rest, lo, hi, 1e-10 * scale, 40);
        deepest = std::max(deepest, res.deepest_level);
        if (!res.converged) {
            std::ostringstream os;
            os.precision(17);
            os << "arc-length quadrature did not converge on [" << lo << ", " << hi << "], deepest level "
               << res.deepest_level;
            throw ExtrapolationError(os.str());
        }
        return main + res.value;
    }

    // Zero of f' next to x = 1 / (k pi + pi / 2): cot(1/x) = (1 + a) x.
    double breakpoint(double k) const
    {
        double x = 1.0 / (k * pi + pi / 2.0);
        for (int it = 0; it < 3; ++it) x = 1.0 / (k * pi + pi / 2.0 - std::atan((1.0 + a) * x));
        return x;
    }

    // Pieces between consecutive zeros of f', where the speed has its sharpest turns.
    double arc(double lo, double hi)
    {
        if (!(hi > lo)) return 0.0;
        const double k_hi = std::floor((1.0 / lo - pi / 2.0) / pi);
        const double k_lo = std::ceil((1.0 / hi - pi / 2.0) / pi);
        double total = 0.0;
        double left = lo;
        for (double k = k_hi + 1.0; k >= k_lo - 1.0; k -= 1.0) {
            const double x = breakpoint(k);
            if (x <= left || x >= hi) continue;
            total += piece(left, x);
            left = x;
        }
        return total + piece(left, hi);
    }
};

} // namespace

std::vector<CounterexampleRow> counterexample_divergence(double a, const std::vector<double>& radii)
{
    if (!(a > 0.0 && a < 1.0)) throw GeometryError("counterexample exponent must lie in (0, 1)");
    for (double r : radii)
        if (!(r > 0.0 && r <= 1.0)) throw GeometryError("counterexample radii must lie in (0, 1]");
    // Below x_cut the speed is |f'| to leading order, whose mean over whole humps of
    // |cos(1/x)| is (2/pi) x^(a-1) / (1 + a); x_cut sits on a zero of cos(1/x).
    const double x_cut = 1.0 / (std::ceil((1e5 - pi / 2.0) / pi) * pi + pi / 2.0);
    const double tail = 2.0 / pi * std::pow(x_cut, a) / (a * (1.0 + a));

    std::vector<std::size_t> order(radii.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return radii[p] < radii[q]; });

    ArcIntegrator arc{a};
    std::vector<CounterexampleRow> rows(radii.size());
    double running = 0.0, reached = x_cut;
    for (std::size_t idx : order) {
        const double r = radii[idx];
        const double inner = r / std::sqrt(2.0);
        if (!(inner > x_cut)) throw GeometryError("counterexample radius below the resolved range");
        running += arc.arc(reached, inner);
        reached = inner;

        // On [r / sqrt 2, r] the graph may leave and re-enter the ball.
        auto g = [&](double x) {
            const double f = counterexample_f(x, a);
            return x * x + f * f - r * r;
        };
        std::vector<double> grid_pts{inner};
        {
            const double k_hi = std::floor((1.0 / inner - pi / 2.0) / pi);
            const double k_lo = std::ceil((1.0 / r - pi / 2.0) / pi);
            std::vector<double> breaks;
            for (double k = k_hi; k >= k_lo; k -= 1.0) {
                const double x = 1.0 / (k * pi + pi / 2.0);
                if (x > inner && x < r) breaks.push_back(x);
            }
            breaks.push_back(r);
            double left = inner;
            for (double b : breaks) {
                for (int s = 1; s <= 16; ++s) grid_pts.push_back(left + (b - left) * s / 16.0);
                left = b;
            }
        }
        double part = 0.0;
        double start = inner; // inside at inner
        bool inside = true;
        for (std::size_t s = 1; s < grid_pts.size(); ++s) {
            double lo = grid_pts[s - 1], hi = grid_pts[s];
            const bool now = g(hi) < 0.0;
            if (now == inside) continue;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((g(mid) < 0.0) == inside) lo = mid;
                else hi = mid;
            }
            const double cross = 0.5 * (lo + hi);
            if (inside) part += arc.arc(start, cross);
            else start = cross;
            inside = now;
        }
        if (inside) part += arc.arc(start, r);

        CounterexampleRow& row = rows[idx];
        row.r = r;
        row.measure = tail + running + part;
        row.ratio = row.measure / r;
        row.bound = counterexample_lower_bound(a, r);
        row.bound_ratio = row.bound / r;
        row.deepest_level = arc.deepest;
    }
    return rows;
}

} // namespace spl
