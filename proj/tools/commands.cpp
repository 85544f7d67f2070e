#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spl/alt_caffarelli.hpp"
#include "spl/curve.hpp"
#include "spl/geometry.hpp"
#include "spl/grid.hpp"
#include "spl/potential.hpp"
#include "spl/regularity.hpp"

namespace spl::cli {

namespace {

bool echo_enabled = true;

template <typename... Args>
void echo(const char* format, Args... args)
{
    if (echo_enabled) std::printf(format, args...);
}

struct Setup {
    PlanarCurve curve;
    CurveDiscretization disc;
    Density q;
};

Setup setup(const ExperimentConfig& c)
{
    PlanarCurve curve = parse_curve_spec(c.curve);
    CurveDiscretization disc = discretize(curve, c.nodes);
    Density q = parse_density(c.q, disc);
    return {std::move(curve), std::move(disc), std::move(q)};
}

PotentialSolution solution(const Setup& s, const ExperimentConfig& c)
{
    if (c.domain != "disk") throw ParseError("the Green's-function evaluator needs --domain disk");
    return PotentialSolution(s.disc, s.q, DomainKind::UnitDiskDirichlet);
}

Grid make_grid(const ExperimentConfig& c, int cells)
{
    if (c.domain == "disk") return make_disk_grid(cells);
    if (c.domain.rfind("square:", 0) == 0) {
        const double side = parse_list(c.domain.substr(7)).at(0);
        return make_square_grid(-0.5 * side, -0.5 * side, side, cells);
    }
    throw ParseError("unknown domain '" + c.domain + "'");
}

Report start(const ExperimentConfig& c)
{
    Report r;
    r.config = c.entries();
    return r;
}

bool is_circle(const ExperimentConfig& c)
{
    return c.curve.rfind("circle:", 0) == 0;
}

std::vector<Index> sampled_nodes(const CurveDiscretization& disc, int stride)
{
    std::vector<Index> out;
    for (Index i = 0; i < disc.size(); i += std::max(1, stride)) out.push_back(i);
    return out;
}

Report run_solve(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const std::vector<Vec2> probes = parse_points(c.probes);
    if (c.method == "greens") {
        const PotentialSolution sol = solution(s, c);
        for (const Vec2& p : probes) {
            const double v = sol.value(p);
            echo("%.17g %.17g %.9f\n", p.x(), p.y(), v);
            r.add(Check{"finite_value_" + std::to_string(&p - probes.data()), "weak solution evaluated at a probe", std::isfinite(v), v, 0.0, 0.0});
        }
        double worst = 0.0;
        for (int k = 0; k < 64; ++k) {
            const double phi = 2.0 * pi * k / 64.0;
            worst = std::max(worst, std::abs(sol.value(Vec2((1.0 - 1e-9) * std::cos(phi), (1.0 - 1e-9) * std::sin(phi)))));
        }
        r.add(upper("boundary_condition", "zero Dirichlet data on the unit circle", worst, 1e-6));
        return r;
    }
    if (c.method != "grid") throw ParseError("unknown method '" + c.method + "'");
    const Grid g = make_grid(c, c.grid);
    const Field rhs = deposit_measure(s.disc, s.q, g);
    SolveStats stats;
    const Field v = solve_poisson(rhs, 1e-10, &stats);
    for (const Vec2& p : probes) echo("%.17g %.17g %.9f\n", p.x(), p.y(), interpolate(v, p));
    const double mass = rhs.values.sum() * g.h * g.h;
    const double exact = surface_integral(s.disc, [&](const Vec2& x) { return s.q.field(x); });
    r.add(upper("mass_conservation", "deposited mass equals the density integral over the curve",
                std::abs(mass - s.q.values.dot(s.disc.weights)), 1e-10 * (1.0 + std::abs(exact))));
    r.add(upper("cg_residual", "relative residual of the five-point solve", stats.relative_residual, 1e-10));
    if (!c.csv.empty()) write_csv(v, c.csv);
    if (!c.raster.empty()) write_raster(v, c.raster);
    return r;
}

Report run_jump(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const PotentialSolution sol = solution(s, c);
    double worst_jump = 0.0, worst_methods = 0.0, worst_pv = 0.0;
    const bool circle = is_circle(c);
    const double pv_expected_scale = -1.0 / (2.0 * s.disc.total_length());
    const double q_integral = s.q.values.dot(s.disc.weights);
    for (Index i : sampled_nodes(s.disc, c.node_stride)) {
        const NormalDerivatives nd = normal_derivatives(sol, i);
        const double q0 = s.q.values[i];
        worst_jump = std::max(worst_jump, std::abs(nd.jump + q0) / std::max(std::abs(q0), 1e-300));
        const double scale_o = std::max(std::abs(nd.formula_outer), std::abs(q0));
        const double scale_i = std::max(std::abs(nd.formula_inner), std::abs(q0));
        worst_methods = std::max({worst_methods, std::abs(nd.outer - nd.formula_outer) / scale_o,
                                  std::abs(nd.inner - nd.formula_inner) / scale_i});
        if (circle) worst_pv = std::max(worst_pv, std::abs(nd.pv_integral - pv_expected_scale * q_integral));
    }
    r.add(upper("jump_equals_minus_q", "normal jump of the gradient equals minus the density", worst_jump, c.tol_jump));
    r.add(upper("methods_agree", "offset extrapolation matches the principal-value formula", worst_methods,
                c.tol_methods));
    if (circle)
        r.add(upper("pv_circle", "principal value on a circle is minus the mean density over two", worst_pv,
                    c.tol_pv));
    return r;
}

Vec2 base_point(const Setup& s)
{
    return s.curve.point(s.curve.t_begin());
}

Report run_theta(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const PotentialSolution sol = solution(s, c);
    const Vec2 x0 = base_point(s);
    const Vec2 nu = s.curve.unit_normal(s.curve.t_begin());
    const double q0 = s.q.field(x0);
    const ThetaEstimate th = estimate_theta(sol, x0, parse_list(c.radii));
    echo("theta %.12g %.12g order %.4g\n", th.value.x(), th.value.y(), th.order);
    const Vec2 outer = one_sided_gradient(sol, x0, nu);
    const Vec2 inner = one_sided_gradient(sol, x0, -nu);
    const double scale = th.value.norm() + 0.5 * std::abs(q0);
    r.add(upper("theta_matches_trace_average", "disk-average limit equals the mean of the one-sided traces",
                (th.value - 0.5 * (inner + outer)).norm() / scale, c.tol_theta));
    r.add(Check{"averages_monotone", "disk averages converge monotonically", th.monotone, th.order, 0.0, 0.0});
    return r;
}

Report run_blowup(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const PotentialSolution sol = solution(s, c);
    const Vec2 x0 = base_point(s);
    const Vec2 nu = s.curve.unit_normal(s.curve.t_begin());
    const std::vector<double> radii = parse_list(c.radii);
    const ThetaEstimate th = estimate_theta(sol, x0, radii);
    const BlowupReport b = blowup_residual(sol, x0, th.value, s.q.field(x0), nu, radii);
    for (std::size_t k = 0; k < radii.size(); ++k) echo("r %.6g residual %.9g\n", radii[k], b.residuals[k]);
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
        r.add(upper("residual_ratio_r" + format_double(radii[k]),
                    "blow-up residual decays toward the Taylor profile", b.residuals[k + 1] / b.residuals[k],
                    c.tol_blowup_ratio));
    return r;
}

Report run_traces(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const PotentialSolution sol = solution(s, c);
    const std::vector<double> radii = parse_list(c.radii);
    double worst_inner = 0.0, worst_outer = 0.0, worst_avg = 0.0;
    for (Index i : sampled_nodes(s.disc, c.node_stride)) {
        const TraceReport t = traces(sol, i);
        const Vec2 theta = estimate_theta(sol, t.x0, radii).value;
        const double scale = theta.norm() + 0.5 * std::abs(t.q0);
        worst_inner = std::max(worst_inner, (t.inner - (theta + 0.5 * t.q0 * t.normal)).norm() / scale);
        worst_outer = std::max(worst_outer, (t.outer - (theta - 0.5 * t.q0 * t.normal)).norm() / scale);
        worst_avg = std::max(worst_avg, (t.average() - theta).norm() / scale);
    }
    r.add(upper("inner_trace", "inner gradient trace equals theta plus half the density times the normal",
                worst_inner, c.tol_trace));
    r.add(upper("outer_trace", "outer gradient trace equals theta minus half the density times the normal",
                worst_outer, c.tol_trace));
    r.add(upper("trace_average", "mean of the traces equals theta", worst_avg, c.tol_trace));
    return r;
}

Report run_necessity(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const NecessityReport n = check_necessity(solution(s, c), c.node_stride);
    r.add(upper("density_bound", "density sup norm bounded by 8 pi times the Lipschitz norm", n.q_quotient, 1.0));
    r.add(upper("ball_growth", "measure of small balls bounded by 8 pi times the Lipschitz norm times r",
                n.measure_quotient, 1.0));
    return r;
}

Report run_apriori(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const NormEstimates n = estimate_norms(solution(s, c), c.node_stride);
    for (Check& ch : check_apriori_chain(make_estimate_report(n))) r.add(std::move(ch));
    return r;
}

Report run_wolff(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const Vec2 on = s.disc.node(0);
    double worst = 0.0;
    for (int k = 6; k <= 12; ++k) {
        const double d = std::ldexp(1.0, -k);
        const double diff = wolff_potential(s.disc, on, d) - wolff_potential(s.disc, on, 2.0 * d);
        echo("delta %.6g increment %.9g\n", d, diff);
        worst = std::max(worst, std::abs(diff / (2.0 * std::log(2.0)) - 1.0));
    }
    r.add(upper("critical_increment", "Wolff increment per halving tends to 2 log 2 on the curve", worst, c.tol_wolff));
    if (s.curve.closed()) {
        const Vec2 off = on + 0.1 * s.disc.normal(0);
        const double ref = wolff_potential(s.disc, off, std::ldexp(1.0, -6));
        double spread = 0.0;
        for (int k = 7; k <= 12; ++k)
            spread = std::max(spread, std::abs(wolff_potential(s.disc, off, std::ldexp(1.0, -k)) - ref));
        r.add(upper("finite_off_curve", "Wolff potential is cutoff independent away from the curve", spread, 1e-12));
    }
    return r;
}

Report run_counterexample(const ExperimentConfig& c)
{
    Report r = start(c);
    const std::vector<double> radii = parse_list(c.radii);
    const std::vector<CounterexampleRow> rows = counterexample_divergence(c.alpha, radii);
    std::ostringstream csv;
    csv.precision(12);
    csv << "r,ratio,bound_ratio,measure,bound\n";
    for (const auto& row : rows)
        csv << row.r << ',' << row.ratio << ',' << row.bound_ratio << ',' << row.measure << ',' << row.bound << '\n';
    if (c.csv.empty()) std::cout << csv.str();
    else std::ofstream(c.csv) << csv.str();
    double margin = INFINITY;
    for (const auto& row : rows) margin = std::min(margin, row.measure / row.bound);
    r.add(Check{"measure_dominates_bound", "ball measure exceeds the closed-form lower bound", margin >= 1.0, margin,
                1.0, 0.0});
    bool increasing = true;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
        if (rows[k].r > rows[k + 1].r && !(rows[k + 1].ratio > rows[k].ratio)) increasing = false;
    r.add(Check{"ratio_increasing", "measure over radius grows without bound as r decreases", increasing,
                rows.empty() ? 0.0 : rows.back().ratio, 0.0, 0.0});
    return r;
}

Report run_comparison(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    const PotentialSolution sol = solution(s, c);
    const Grid coarse = make_grid(c, c.grid);
    const Grid fine = refine(coarse);
    const double eps = 16.0 * coarse.h;
    auto qfield = [&](const Vec2& x) { return s.q.field(x); };
    const ComparisonResult a = comparison_residual(sol, qfield, coarse, eps);
    const ComparisonResult b = comparison_residual(sol, qfield, fine, eps);
    echo("h %.6g max_w %.6g max_v %.6g\nh %.6g max_w %.6g max_v %.6g\n", coarse.h, a.max_w, a.max_v, fine.h,
                b.max_w, b.max_v);
    r.add(within("kink_cancels", "Laplacian of v plus half Q|d| stays bounded under refinement", b.max_w / a.max_w,
                 c.comparison_lo, c.comparison_hi));
    r.add(within("laplacian_v_grows", "Laplacian of v alone grows like 1/h across the curve", b.max_v / a.max_v,
                 c.growth_lo, c.growth_hi));
    return r;
}

AltCafState altcaf_start(const ExperimentConfig& c, int cells)
{
    const Grid g = make_grid(c, cells);
    const Vec2 centre = g.point(g.nx / 2, g.ny / 2);
    const double u0 = c.u0;
    return make_state(g, [u0](const Vec2&) { return u0; },
                      [u0, centre](const Vec2& x) { return u0 - 2.0 * u0 * std::exp(-(x - centre).squaredNorm() / 0.05); });
}

Report run_altcaf(const ExperimentConfig& c)
{
    Report r = start(c);
    MinimizeOptions opt;
    opt.max_steps = c.steps;
    opt.epsilons = parse_list(c.epsilons);
    double lip[2] = {0.0, 0.0};
    for (int level = 0; level < 2; ++level) {
        const MinimizeResult m = minimize(altcaf_start(c, c.grid << level), opt);
        const FreeBoundary fb = extract_free_boundary(m.state.w, c.gradient_floor);
        const CrossCheckReport cc = cross_check(m.state.w, c.gradient_floor);
        lip[level] = cc.lipschitz_v1;
        const std::string tag = level == 0 ? "" : "_refined";
        bool monotone = true, stalled = true;
        for (const StageSummary& st : m.stages) {
            monotone = monotone && st.monotone;
            stalled = stalled && st.stalled;
            echo("cells %d eps %.6g steps %d energy %.9g -> %.9g displacement %.6g\n", c.grid << level,
                        st.epsilon, st.steps, st.energy_start, st.energy_end, st.displacement);
        }
        r.add(Check{"energy_decreasing" + tag, "accepted descent steps strictly lower the energy", monotone,
                    m.state.total(), 0.0, 0.0});
        r.add(Check{"stalled" + tag, "descent runs until the line search stalls", stalled, double(m.state.iterations),
                    double(c.steps), 0.0});
        bool closed = !fb.empty();
        for (const auto& p : fb.pieces) closed = closed && p.closed;
        r.add(Check{"closed_free_boundary" + tag, "negative phase is compactly contained", closed,
                    double(fb.pieces.size()), 0.0, 0.0});
        r.add(Check{"gradient_on_free_boundary" + tag, "gradient of the minimizer is nonzero on the free boundary",
                    fb.min_gradient > c.gradient_floor, fb.min_gradient, c.gradient_floor, 0.0});
        r.add(Check{"transversal_crossings" + tag, "zero level set crosses grid edges transversally",
                    fb.transversal_fraction >= 0.9, fb.transversal_fraction, 0.9, 0.0});
        if (level == 0 && !c.raster.empty()) write_checkpoint(m.state, c.raster);
    }
    r.add(upper("v1_lipschitz_stable", "Lipschitz seminorm of the Laplacian of the minimizer is grid independent",
                std::abs(lip[1] / lip[0] - 1.0), c.tol_v1_lipschitz));
    return r;
}

// Synthetic radial state: Lap_h w = lambda v_exact with w = 0 on the circle of radius rho.
Report run_altcaf_synthetic(const ExperimentConfig& c)
{
    Report r = start(c);
    const double rho = 0.5, c0 = -rho * std::log(rho), lambda = 1.0 / std::sqrt(c0 * rho);
    const Grid g = make_disk_grid(c.grid);
    const Field rhs = sample_field(g, [&](const Vec2& x) { return lambda * rho * std::log(std::max(x.norm(), rho)); });
    Field w = solve_poisson(rhs);
    const double shift = interpolate(w, Vec2(rho, 0.0));
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.active(i, j)) w(i, j) -= shift;
    const CrossCheckReport cc = cross_check(w, c.gradient_floor);
    r.add(upper("synthetic_crosscheck", "Laplacian of w matches the measure-data solve for the extracted curve",
                cc.discrepancy, c.tol_crosscheck));
    return r;
}

Report run_regularity(const ExperimentConfig& c)
{
    Report r = start(c);
    const Setup s = setup(c);
    double grad[2], growth[2];
    for (int level = 0; level < 2; ++level) {
        const Grid g = make_grid(c, c.grid << level);
        const Field v = solve_poisson(deposit_measure(s.disc, s.q, g));
        grad[level] = gradient_magnitude(v).values.maxCoeff();
        const double h = g.h;
        growth[level] = second_difference_max(v, [&](const Vec2& x) {
            try {
                return std::abs(signed_distance(s.curve, x).d) < 2.0 * h;
            } catch (const GeometryError&) {
                return false;
            }
        });
    }
    r.add(upper("lipschitz_saturates", "max grid gradient is stable under refinement",
                std::abs(grad[1] / grad[0] - 1.0), c.tol_lipschitz_change));
    r.add(within("second_difference_grows", "cross-curve second differences grow like 1/h", growth[1] / growth[0],
                 c.growth_lo, c.growth_hi));
    return r;
}

} // namespace

const std::map<std::string, Command>& commands()
{
    static const std::map<std::string, Command> table = {
        {"solve", run_solve},       {"jump", run_jump},
        {"blowup", run_blowup},     {"theta", run_theta},
        {"traces", run_traces},     {"necessity", run_necessity},
        {"apriori", run_apriori},   {"wolff", run_wolff},
        {"counterexample", run_counterexample}, {"comparison", run_comparison},
        {"altcaf", run_altcaf},     {"altcaf-synthetic", run_altcaf_synthetic},
        {"regularity", run_regularity},
    };
    return table;
}

Report verify_all(const ExperimentConfig& base, bool quick)
{
    Report out;
    out.config = base.entries();
    out.config.emplace_back("quick", quick ? "true" : "false");
    auto merge = [&](const std::string& prefix, const Report& r) {
        for (Check ch : r.checks) {
            ch.name = prefix + "." + ch.name;
            out.checks.push_back(std::move(ch));
        }
    };
    auto cfg = [&](auto&& edit) {
        ExperimentConfig c = base;
        c.json.clear();
        c.csv.clear();
        c.raster.clear();
        c.curve = "circle:rho=0.5";
        c.q = "const:1";
        c.domain = "disk";
        c.nodes = quick ? 1024 : 4096;
        c.grid = quick ? 128 : 256;
        edit(c);
        return c;
    };
    auto quiet = [](const Command& f, const ExperimentConfig& c) {
        echo_enabled = false;
        Report r = f(c);
        echo_enabled = true;
        return r;
    };
    const auto& cmd = commands();
    merge("solve", quiet(cmd.at("solve"), cfg([](ExperimentConfig&) {})));
    merge("jump_circle", quiet(cmd.at("jump"), cfg([](ExperimentConfig& c) { c.q = "expr:1+x^2"; })));
    merge("jump_ellipse", quiet(cmd.at("jump"), cfg([](ExperimentConfig& c) {
              c.curve = "ellipse:a=0.6,b=0.3";
              c.q = "expr:1+x^2";
          })));
    merge("theta", quiet(cmd.at("theta"), cfg([](ExperimentConfig&) {})));
    merge("blowup", quiet(cmd.at("blowup"), cfg([](ExperimentConfig& c) { c.radii = "0.1,0.05,0.025"; })));
    merge("traces", quiet(cmd.at("traces"), cfg([](ExperimentConfig& c) { c.node_stride = c.nodes / 16; })));
    merge("necessity", quiet(cmd.at("necessity"), cfg([](ExperimentConfig&) {})));
    merge("apriori", quiet(cmd.at("apriori"), cfg([](ExperimentConfig&) {})));
    merge("wolff", quiet(cmd.at("wolff"), cfg([](ExperimentConfig&) {})));
    merge("counterexample", quiet(cmd.at("counterexample"), cfg([](ExperimentConfig& c) {
              c.radii = "2^-4..2^-12";
              c.csv = "/dev/null";
          })));
    merge("comparison", quiet(cmd.at("comparison"), cfg([](ExperimentConfig&) {})));
    merge("regularity", quiet(cmd.at("regularity"), cfg([](ExperimentConfig&) {})));
    merge("altcaf", quiet(cmd.at("altcaf"), cfg([&](ExperimentConfig& c) {
              c.domain = "square:1";
              c.grid = quick ? 64 : 128;
          })));
    merge("altcaf_synthetic", quiet(cmd.at("altcaf-synthetic"), cfg([](ExperimentConfig& c) { c.grid = 256; })));
    return out;
}

} // namespace spl::cli
