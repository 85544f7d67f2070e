// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spl/alt_caffarelli.hpp"
#include "spl/geometry.hpp"
#include "spl/grid.hpp"
#include "spl/potential.hpp"
#include "spl/regularity.hpp"

using namespace spl;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [FAILED]");
    }
};

std::string fmt(const char* format, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, format, a, b);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PotentialSolution make_solution(const PlanarCurve& curve, int nodes, const std::function<double(const Vec2&)>& q)
{
    const CurveDiscretization d = discretize(curve, nodes);
    return PotentialSolution(d, sample_density(d, q));
}

double one(const Vec2&) { return 1.0; }
double one_plus_x2(const Vec2& x) { return 1.0 + x.x() * x.x(); }

Outcome radial_oracle()
{
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const PotentialSolution v = make_solution(make_circle(0.5), 4096, one);
    double worst = 0.0;
    for (int a = 0; a < 16; ++a)
        for (int k = 0; k <= 400; ++k) {
            const double r = 0.999 * k / 400.0;
            if (std::abs(r - 0.5) < 1e-3) continue;
            const double phi = 2.0 * oracle::pi * (a + 0.37) / 16.0;
            worst = std::max(worst, std::abs(v.value(r * Vec2(std::cos(phi), std::sin(phi))) - oracle::radial_value(r)));
        }
    for (double r : {0.499, 0.501}) worst = std::max(worst, std::abs(v.value(Vec2(0.0, r)) - oracle::radial_value(r)));
    out.require(worst <= 1e-6, fmt("Green's sup error %.3g <= 1e-6", worst));

    const Grid g = make_disk_grid(512);
    const Field vh = solve_poisson(deposit_measure(v.discretization(), v.density(), g));
    const double grid_err = sup_error(vh, [](const Vec2& x) { return oracle::radial_value(x.norm()); },
                                      [&](const Vec2& x) { return std::abs(x.norm() - 0.5) >= 2.0 * g.h; });
    out.require(grid_err <= 2e-3, fmt("grid 512^2 sup error %.3g <= 2e-3", grid_err));
    const double t = seconds_since(t0);
    out.require(t <= 60.0, fmt("runtime %.1f s <= 60 s", t));
    return out;
}

Outcome jump_relation()
{
    Outcome out;
    double jump = 0.0, methods = 0.0, pv = 0.0;
    for (const PlanarCurve& c : {make_circle(0.5), make_ellipse(0.6, 0.3)}) {
        const PotentialSolution v = make_solution(c, 4096, one_plus_x2);
        for (Index i = 0; i < v.discretization().size(); i += 16) {
            const NormalDerivatives n = normal_derivatives(v, i);
            const double q = v.density().values[i];
            jump = std::max(jump, std::abs(n.jump + q) / q);
            methods = std::max({methods, std::abs(n.outer - n.formula_outer) / std::max(std::abs(n.outer), q),
                                std::abs(n.inner - n.formula_inner) / std::max(std::abs(n.inner), q)});
        }
    }
    const PotentialSolution radial = make_solution(make_circle(0.5), 4096, one);
    for (Index i = 0; i < radial.discretization().size(); i += 256)
        pv = std::max(pv, std::abs(normal_derivatives(radial, i).pv_integral + 0.5));
    out.require(jump <= 0.01, fmt("max |jump + Q| / Q = %.3g <= 1%%", jump));
    out.require(methods <= 0.005, fmt("formula vs extrapolation %.3g <= 0.5%%", methods));
    out.require(pv <= 1e-3, fmt("circle principal value error %.3g <= 1e-3", pv));
    return out;
}

Outcome lipschitz_vs_second_differences()
{
    Outcome out;
    const CurveDiscretization d = discretize(make_circle(0.5), 4096);
    const Density q = constant_density(d, 1.0);
    double grad[2], second[2];
    for (int k = 0; k < 2; ++k) {
        const Grid g = make_disk_grid(512 << k); // h = 1/256, 1/512
        const Field v = solve_poisson(deposit_measure(d, q, g));
        grad[k] = gradient_magnitude(v).values.maxCoeff();
        const double h = g.h;
        second[k] = second_difference_max(v, [h](const Vec2& x) { return std::abs(x.norm() - 0.5) < 2.0 * h; });
    }
    const double change = std::abs(grad[1] / grad[0] - 1.0), growth = second[1] / second[0];
    out.require(change < 0.05, fmt("max gradient change %.3g < 5%%", change));
    out.require(growth >= 1.7 && growth <= 2.3, fmt("second difference growth %.3f in [1.7, 2.3]", growth));
    return out;
}

Outcome blowup()
{
    Outcome out;
    const PotentialSolution v = make_solution(make_circle(0.5), 4096, one);
    const Vec2 x0(0.5, 0.0);
    const std::vector<double> radii{0.1, 0.05, 0.025, 0.0125};
    const ThetaEstimate t = estimate_theta(v, x0, radii);
    const BlowupReport b = blowup_residual(v, x0, t.value, 1.0, Vec2(1.0, 0.0), radii);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) worst = std::max(worst, b.residuals[k + 1] / b.residuals[k]);
    out.require(worst <= 0.67, fmt("worst residual ratio %.3f <= 0.67", worst));
    const double err = (t.value - Vec2(-0.5, 0.0)).norm() / 0.5;
    out.require(err <= 0.02, fmt("theta relative error %.3g <= 2%%", err));
    return out;
}

Outcome trace_identities()
{
    Outcome out;
    double worst = 0.0, avg = 0.0;
    const std::vector<double> radii{0.1, 0.05, 0.025, 0.0125};
    for (auto [curve, q] : {std::pair{make_circle(0.5), one}, std::pair{make_ellipse(0.6, 0.3), one_plus_x2}}) {
        const PotentialSolution v = make_solution(curve, 4096, q);
        const Index n = v.discretization().size();
        for (Index i = 0; i < n; i += n / 16) {
            const TraceReport tr = traces(v, i);
            const Vec2 theta = estimate_theta(v, tr.x0, radii).value;
            const double scale = theta.norm() + 0.5 * tr.q0;
            worst = std::max({worst, (tr.inner - theta - 0.5 * tr.q0 * tr.normal).norm() / scale,
                              (tr.outer - theta + 0.5 * tr.q0 * tr.normal).norm() / scale});
            avg = std::max(avg, (tr.average() - theta).norm() / scale);
        }
    }
    out.require(worst <= 0.02, fmt("trace identities %.3g <= 2%%", worst));
    out.require(avg <= 0.02, fmt("trace average vs theta %.3g <= 2%%", avg));
    return out;
}

Outcome necessity()
{
    Outcome out;
    double q = 0.0, m = 0.0;
    const std::vector<std::pair<PlanarCurve, double (*)(const Vec2&)>> configs{
        {make_circle(0.5), one}, {make_ellipse(0.6, 0.3), one_plus_x2}, {make_circle(0.3, Vec2(0.2, -0.1)), one_plus_x2}};
    for (const auto& [curve, density] : configs) {
        const NecessityReport r = check_necessity(make_solution(curve, 2048, density), 16);
        q = std::max(q, r.q_quotient);
        m = std::max(m, r.measure_quotient);
    }
    out.require(q <= 1.0, fmt("||Q|| / (8 pi ||u||) = %.3g <= 1", q));
    out.require(m <= 1.0, fmt("mu(B_r) / (8 pi ||u|| r) = %.3g <= 1", m));
    return out;
}

Outcome counterexample()
{
    Outcome out;
    std::vector<double> radii;
    for (int k = 4; k <= 12; ++k) radii.push_back(std::ldexp(1.0, -k));
    const auto rows = counterexample_divergence(0.5, radii);
    bool above = true, increasing = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        above = above && rows[k].measure >= oracle::counterexample_bound(0.5, rows[k].r);
        if (k > 0) increasing = increasing && rows[k].ratio > rows[k - 1].ratio;
    }
    out.require(above, "measure >= closed-form bound at r = 2^-4..2^-12");
    out.require(increasing, fmt("mu(B_r)/r increasing, %.3g -> %.3g", rows.front().ratio, rows.back().ratio));
    return out;
}

Outcome wolff()
{
    Outcome out;
    const CurveDiscretization d = discretize(make_circle(0.5), 4096);
    const Vec2 on = d.node(0);
    double worst = 0.0;
    for (int k = 6; k <= 12; ++k) {
        const double delta = std::ldexp(1.0, -k);
        const double inc = wolff_potential(d, on, delta) - wolff_potential(d, on, 2.0 * delta);
        worst = std::max(worst, std::abs(inc / (2.0 * std::log(2.0)) - 1.0));
    }
    out.require(worst <= 0.05, fmt("increment vs 2 log 2 %.3g <= 5%%", worst));
    const Vec2 off = on + 0.1 * d.normal(0);
    const double ref = wolff_potential(d, off, std::ldexp(1.0, -6));
    double spread = 0.0;
    for (int k = 7; k <= 12; ++k) spread = std::max(spread, std::abs(wolff_potential(d, off, std::ldexp(1.0, -k)) - ref));
    out.require(std::isfinite(ref) && spread == 0.0, fmt("off-curve value %.6g, spread %.3g", ref, spread));
    return out;
}

Outcome comparison()
{
    Outcome out;
    const PotentialSolution v = make_solution(make_circle(0.5), 4096, one);
    const Grid coarse = make_disk_grid(256), fine = refine(coarse);
    const double eps = 16.0 * coarse.h;
    const ComparisonResult a = comparison_residual(v, one, coarse, eps);
    const ComparisonResult b = comparison_residual(v, one, fine, eps);
    const double rw = b.max_w / a.max_w, rv = b.max_v / a.max_v;
    out.require(rw >= 0.5 && rw <= 1.5, fmt("max |Lap_h w| ratio %.3f in [0.5, 1.5]", rw));
    out.require(rv >= 1.7 && rv <= 2.3, fmt("max |Lap_h v| ratio %.3f in [1.7, 2.3]", rv));
    return out;
}

Outcome mollification()
{
    Outcome out;
    const CurveDiscretization d = discretize(make_circle(0.5), 2048);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Density noise;
    noise.values.resize(d.size());
    for (Index i = 0; i < d.size(); ++i) noise.values[i] = u(rng);
    const std::vector<Density> tested{constant_density(d, 1.0),
                                      sample_density(d, [](const Vec2& x) { return x.y() > 0.0 ? 1.0 : -0.5; }),
                                      sample_density(d, [](const Vec2& x) { return std::abs(x.x()); }),
                                      sample_density(d, one_plus_x2), noise};
    bool bounded = true;
    for (const Density& q : tested)
        for (int k = 2; k <= 8; ++k)
            bounded = bounded && mollify_density(d, q, std::ldexp(1.0, -k)).sup_norm() <= q.sup_norm();
    out.require(bounded, "||Q_eps|| <= ||Q|| for all tested densities");

    bool decreasing = true;
    for (const Density& q : {tested[2], tested[3]}) {
        double prev = INFINITY;
        for (int k = 2; k <= 8; ++k) {
            const double l1 = (mollify_density(d, q, std::ldexp(1.0, -k)).values - q.values).cwiseAbs().dot(d.weights);
            decreasing = decreasing && l1 < prev;
            prev = l1;
        }
    }
    out.require(decreasing, "L1 error decreasing along eps = 2^-k");

    const PlanarCurve kink = make_graph([](double x) { return std::abs(x - 0.5); },
                                        [](double x) { return x > 0.5 ? 1.0 : -1.0; }, 0.0, 1.0);
    auto g = [](const Vec2& x) { return x.x() * x.x(); };
    const double exact = std::sqrt(2.0) / 3.0;
    double prev = 0.0, lo = INFINITY, hi = 0.0;
    for (int k = 3; k <= 8; ++k) {
        const double err = std::abs(surface_integral(discretize(mollify_curve(kink, std::ldexp(1.0, -k)), 1 << 14), g) - exact);
        if (k > 3) {
            lo = std::min(lo, prev / err);
            hi = std::max(hi, prev / err);
        }
        prev = err;
    }
    out.require(lo >= 1.8 && hi <= 2.2, fmt("surface integral error ratios in [%.3f, %.3f] within 2 +- 10%%", lo, hi));
    return out;
}

Outcome alt_caffarelli()
{
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const double floor = 1e-6;
    double lip[2] = {0.0, 0.0};
    bool decreasing = true, stalled = true, gradient = true;
    for (int k = 0; k < 2; ++k) {
        const Grid g = make_square_grid(0.0, 0.0, 1.0, 128 << k);
        const AltCafState s = make_state(g, [](const Vec2&) { return 0.02; }, [](const Vec2& x) {
            return 0.02 - 0.04 * std::exp(-(x - Vec2(0.5, 0.5)).squaredNorm() / 0.05);
        });
        MinimizeOptions opt;
        opt.max_steps = 3000;
        opt.epsilons = {0.008, 0.004};
        const MinimizeResult m = minimize(s, opt);
        for (const StageSummary& st : m.stages) {
            decreasing = decreasing && st.monotone && st.energy_end < st.energy_start;
            stalled = stalled && st.stalled;
        }
        const CrossCheckReport cc = cross_check(m.state.w, floor);
        lip[k] = cc.lipschitz_v1;
        gradient = gradient && cc.min_gradient > floor;
    }
    out.require(decreasing && stalled, "energy strictly decreasing until the line search stalls");
    const double change = std::abs(lip[1] / lip[0] - 1.0);
    out.require(change <= 0.1, fmt("Lipschitz seminorm of v1 %.4g -> %.4g", lip[0], lip[1]) +
                                   fmt(", change %.3g <= 10%%", change));
    out.require(gradient, "min |grad w| on the free boundary above 1e-6");

    const double rho = 0.5, c0 = -rho * std::log(rho), lambda = 1.0 / std::sqrt(c0 * rho);
    const Grid g = make_disk_grid(256);
    Field w = solve_poisson(sample_field(g, [&](const Vec2& x) { return -lambda * oracle::radial_value(x.norm(), rho); }));
    const double shift = interpolate(w, Vec2(rho, 0.0));
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.active(i, j)) w(i, j) -= shift;
    const double disc = cross_check(w, floor).discrepancy;
    out.require(disc <= 5e-3, fmt("synthetic cross-check %.3g <= 5e-3", disc));
    const double t = seconds_since(t0);
    out.require(t <= 600.0, fmt("runtime %.1f s <= 600 s", t));
    return out;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"radial oracle", radial_oracle},
        {"jump relation", jump_relation},
        {"Lipschitz vs second differences", lipschitz_vs_second_differences},
        {"blow-up", blowup},
        {"traces", trace_identities},
        {"necessity", necessity},
        {"counterexample", counterexample},
        {"Wolff criticality", wolff},
        {"comparison identity", comparison},
        {"mollification", mollification},
        {"Alt-Caffarelli", alt_caffarelli},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        failed += !o.pass;
        std::printf("%s %2zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    seconds_since(t0), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
