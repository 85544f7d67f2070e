#include "spl/alt_caffarelli.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>
#include <sstream>

#include <json.hpp>

#include "spl/curve.hpp"
#include "spl/regularity.hpp"

namespace spl {

/// Interior numbering and a factorization of -L0 for the preconditioner.
struct BendingOperator {
    Grid grid;
    Eigen::ArrayXXi id;
    std::vector<std::pair<Index, Index>> nodes;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

namespace {

std::shared_ptr<const BendingOperator> build_operator(const Grid& g)
{
    auto op = std::make_shared<BendingOperator>();
    op->grid = g;
    op->id = Eigen::ArrayXXi::Constant(g.nx + 1, g.ny + 1, -1);
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (g.interior(i, j)) {
                op->id(i, j) = int(op->nodes.size());
                op->nodes.emplace_back(i, j);
            }
    const int n = int(op->nodes.size());
    const double inv_h2 = 1.0 / (g.h * g.h);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(std::size_t(n) * 5);
    for (int r = 0; r < n; ++r) {
        const auto [i, j] = op->nodes[std::size_t(r)];
        t.emplace_back(r, r, 4.0 * inv_h2);
        const int nb[4] = {op->id(i + 1, j), op->id(i - 1, j), op->id(i, j + 1), op->id(i, j - 1)};
        for (int c : nb)
            if (c >= 0) t.emplace_back(r, c, -inv_h2);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    op->ldlt.compute(a);
    if (op->ldlt.info() != Eigen::Success) throw SolverError("factorization of the Dirichlet Laplacian failed");
    return op;
}

// Lap_h w on interior nodes as a vector in the operator's numbering.
Eigen::VectorXd laplacian_vector(const BendingOperator& op, const Field& w)
{
    const double inv_h2 = 1.0 / (op.grid.h * op.grid.h);
    Eigen::VectorXd out(Index(op.nodes.size()));
    for (std::size_t k = 0; k < op.nodes.size(); ++k) {
        const auto [i, j] = op.nodes[k];
        out[Index(k)] = (w(i + 1, j) + w(i - 1, j) + w(i, j + 1) + w(i, j - 1) - 4.0 * w(i, j)) * inv_h2;
    }
    return out;
}

// L0 z with zero values outside the interior.
Eigen::VectorXd apply_l0(const BendingOperator& op, const Eigen::VectorXd& z)
{
    const double inv_h2 = 1.0 / (op.grid.h * op.grid.h);
    Eigen::VectorXd out(z.size());
    for (std::size_t k = 0; k < op.nodes.size(); ++k) {
        const auto [i, j] = op.nodes[k];
        double s = -4.0 * z[Index(k)];
        const int nb[4] = {op.id(i + 1, j), op.id(i - 1, j), op.id(i, j + 1), op.id(i, j - 1)};
        for (int c : nb)
            if (c >= 0) s += z[c];
        out[Index(k)] = s * inv_h2;
    }
    return out;
}

EnergyParts energy_with(const BendingOperator& op, const Field& w, double eps)
{
    const double h2 = op.grid.h * op.grid.h;
    EnergyParts e;
    e.bending = laplacian_vector(op, w).squaredNorm() * h2;
    for (const auto& [i, j] : op.nodes) e.volume += smoothed_heaviside(w(i, j), eps) * h2;
    e.total = e.bending + e.volume;
    return e;
}

} // namespace

double smoothed_heaviside(double t, double eps)
{
    if (t <= -eps) return 0.0;
    if (t >= eps) return 1.0;
    const double s = (t + eps) / (2.0 * eps);
    return s * s * (3.0 - 2.0 * s);
}

double smoothed_heaviside_derivative(double t, double eps)
{
    if (t <= -eps || t >= eps) return 0.0;
    const double s = (t + eps) / (2.0 * eps);
    return 6.0 * s * (1.0 - s) / (2.0 * eps);
}

AltCafState make_state(const Grid& grid, const std::function<double(const Vec2&)>& u0,
                       const std::function<double(const Vec2&)>& initial, double epsilon)
{
    Field w(grid);
    for (Index j = 0; j <= grid.ny; ++j)
        for (Index i = 0; i <= grid.nx; ++i) {
            const Vec2 x = grid.point(i, j);
            if (grid.ring(i, j)) w(i, j) = u0(x);
            else if (grid.interior(i, j)) w(i, j) = initial(x);
        }
    return make_state(std::move(w), epsilon);
}

AltCafState make_state(Field w, double epsilon)
{
    const Grid& g = w.grid;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            if (!std::isfinite(w(i, j))) throw SolverError("initial field is not finite");
            if (g.ring(i, j) && !(w(i, j) > 0.0)) throw GeometryError("boundary data u0 must be positive");
        }
    AltCafState s;
    s.op = build_operator(g);
    s.w = std::move(w);
    s.epsilon = epsilon > 0.0 ? epsilon : 2.0 * g.h;
    const EnergyParts e = energy_with(*s.op, s.w, s.epsilon);
    s.bending = e.bending;
    s.volume = e.volume;
    return s;
}

EnergyParts energy(const AltCafState& state)
{
    return energy_with(*state.op, state.w, state.epsilon);
}

EnergyParts energy(const Field& w, double epsilon)
{
    return energy_with(*build_operator(w.grid), w, epsilon);
}

AltCafState descent_step(const AltCafState& state, double step_floor)
{
    const BendingOperator& op = *state.op;
    const double h2 = op.grid.h * op.grid.h;
    const double eps = state.epsilon;
    AltCafState next = state;
    ++next.iterations;

    Eigen::VectorXd g = 2.0 * h2 * apply_l0(op, laplacian_vector(op, state.w));
    for (std::size_t k = 0; k < op.nodes.size(); ++k) {
        const auto [i, j] = op.nodes[k];
        g[Index(k)] += h2 * smoothed_heaviside_derivative(state.w(i, j), eps);
    }
    if (!g.allFinite()) throw SolverError("descent_step: gradient is not finite");
    next.gradient_sup = g.cwiseAbs().maxCoeff();
    if (next.gradient_sup < 1e-10) {
        next.stalled = true;
        return next;
    }

    // P = 2 h^2 L0^2 = 2 h^2 A^2 with A = -L0.
    const Eigen::VectorXd d = -op.ldlt.solve(op.ldlt.solve(g)) / (2.0 * h2);
    const double slope = g.dot(d);
    const double e0 = state.total();
    Field trial = state.w;
    for (double t = 1.0; t >= step_floor; t *= 0.5) {
        for (std::size_t k = 0; k < op.nodes.size(); ++k) {
            const auto [i, j] = op.nodes[k];
            trial(i, j) = state.w(i, j) + t * d[Index(k)];
        }
        const EnergyParts e = energy_with(op, trial, eps);
        if (e.total < e0 && e.total <= e0 + 1e-4 * t * slope) {
            next.w = trial;
            next.bending = e.bending;
            next.volume = e.volume;
            next.last_step = t;
            ++next.accepted;
            next.stalled = false;
            return next;
        }
    }
    next.stalled = true;
    next.last_step = 0.0;
    return next;
}

MinimizeResult minimize(AltCafState state, const MinimizeOptions& options)
{
    const double h = state.w.grid.h;
    std::vector<double> schedule = options.epsilons;
    if (schedule.empty()) schedule = {8.0 * h, 4.0 * h, 2.0 * h};
    MinimizeResult out;
    FreeBoundary previous;
    bool have_previous = false;
    for (double eps : schedule) {
        state.epsilon = eps;
        state.stalled = false;
        const EnergyParts e = energy(state);
        state.bending = e.bending;
        state.volume = e.volume;
        StageSummary stage;
        stage.epsilon = eps;
        stage.energy_start = state.total();
        double last = stage.energy_start;
        for (int k = 0; k < options.max_steps; ++k) {
            AltCafState next = descent_step(state);
            ++stage.steps;
            if (next.stalled) {
                state = std::move(next);
                stage.stalled = true;
                break;
            }
            if (!(next.total() < last)) stage.monotone = false;
            last = next.total();
            out.energies.push_back(last);
            state = std::move(next);
        }
        stage.energy_end = state.total();
        const FreeBoundary fb = extract_free_boundary(state.w);
        if (have_previous && !fb.empty() && !previous.empty()) stage.displacement = boundary_displacement(previous, fb);
        previous = fb;
        have_previous = true;
        out.stages.push_back(stage);
    }
    out.state = std::move(state);
    return out;
}

double FreeBoundary::q_at(const Vec2& x) const
{
    const double g = grad_norm ? interpolate(*grad_norm, x) : 0.0;
    return 1.0 / (2.0 * std::max(gradient_floor, g));
}

namespace {

// Grid edge key: horizontal edges (i, j)-(i+1, j) have dir 0, vertical ones dir 1.
using EdgeKey = std::tuple<Index, Index, int>;

} // namespace

FreeBoundary extract_free_boundary(const Field& w, double gradient_floor)
{
    const Grid& g = w.grid;
    FreeBoundary fb;
    fb.gradient_floor = gradient_floor;
    fb.grad_norm = std::make_shared<const Field>(gradient_magnitude(w));

    std::map<EdgeKey, Vec2> crossing;
    auto point_on = [&](const EdgeKey& e) {
        auto it = crossing.find(e);
        if (it != crossing.end()) return it->second;
        const auto [i, j, dir] = e;
        const Index i2 = dir == 0 ? i + 1 : i;
        const Index j2 = dir == 0 ? j : j + 1;
        const double a = w(i, j), b = w(i2, j2);
        const double s = a / (a - b);
        const Vec2 p = g.point(i, j) + s * (g.point(i2, j2) - g.point(i, j));
        crossing.emplace(e, p);
        return p;
    };

    std::vector<std::pair<EdgeKey, EdgeKey>> segments;
    for (Index j = 0; j < g.ny; ++j)
        for (Index i = 0; i < g.nx; ++i) {
            if (!g.active(i, j) || !g.active(i + 1, j) || !g.active(i, j + 1) || !g.active(i + 1, j + 1)) continue;
            const double c[4] = {w(i, j), w(i + 1, j), w(i + 1, j + 1), w(i, j + 1)};
            if (c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0) {
                ++fb.degenerate_cells;
                continue;
            }
            int code = 0;
            for (int k = 0; k < 4; ++k)
                if (c[k] < 0.0) code |= 1 << k;
            if (code == 0 || code == 15) continue;
            // Edges in counter-clockwise order: bottom, right, top, left.
            const EdgeKey e[4] = {{i, j, 0}, {i + 1, j, 1}, {i, j + 1, 0}, {i, j, 1}};
            std::vector<int> cut;
            for (int k = 0; k < 4; ++k)
                if ((c[k] < 0.0) != (c[(k + 1) % 4] < 0.0)) cut.push_back(k);
            if (cut.size() == 2) {
                segments.emplace_back(e[cut[0]], e[cut[1]]);
            } else {
                // Saddle: pair each negative corner with its edges when the centre is negative-separated.
                const double centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
                const bool join_negative = centre < 0.0;
                const bool corner0_negative = c[0] < 0.0;
                // Edges k and k-1 meet at corner k.
                if (join_negative == corner0_negative) {
                    segments.emplace_back(e[0], e[1]);
                    segments.emplace_back(e[2], e[3]);
                } else {
                    segments.emplace_back(e[3], e[0]);
                    segments.emplace_back(e[1], e[2]);
                }
            }
        }

    std::map<EdgeKey, std::vector<std::size_t>> incident;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        incident[segments[s].first].push_back(s);
        incident[segments[s].second].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);
    auto other = [&](std::size_t s, const EdgeKey& k) {
        return segments[s].first == k ? segments[s].second : segments[s].first;
    };
    auto walk = [&](EdgeKey from, std::size_t s, std::vector<EdgeKey>& chain) {
        while (true) {
            used[s] = true;
            const EdgeKey next = other(s, from);
            chain.push_back(next);
            std::size_t follow = segments.size();
            for (std::size_t t : incident[next])
                if (!used[t]) follow = t;
            if (follow == segments.size()) return;
            from = next;
            s = follow;
        }
    };

    // Open chains first, starting from edges with a single incident segment.
    std::vector<std::vector<EdgeKey>> chains;
    std::vector<bool> chain_closed;
    for (const auto& [key, list] : incident) {
        if (list.size() != 1 || used[list[0]]) continue;
        std::vector<EdgeKey> chain{key};
        walk(key, list[0], chain);
        chains.push_back(std::move(chain));
        chain_closed.push_back(false);
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        std::vector<EdgeKey> chain{segments[s].first};
        walk(segments[s].first, s, chain);
        if (chain.size() > 1 && chain.back() == chain.front()) chain.pop_back();
        chains.push_back(std::move(chain));
        chain_closed.push_back(true);
    }

    fb.min_gradient = std::numeric_limits<double>::infinity();
    Index transversal = 0, total = 0;
    for (const auto& [key, p] : crossing) {
        (void)key;
        ++total;
        if (interpolate(*fb.grad_norm, p) >= gradient_floor) ++transversal;
    }
    fb.transversal_fraction = total ? double(transversal) / double(total) : 1.0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        FreeBoundaryPiece piece;
        piece.closed = chain_closed[c];
        for (const EdgeKey& k : chains[c]) {
            const Vec2 p = point_on(k);
            const double gn = interpolate(*fb.grad_norm, p);
            fb.min_gradient = std::min(fb.min_gradient, gn);
            if (gn < gradient_floor) ++fb.capped;
            piece.points.push_back(p);
            piece.q.push_back(1.0 / (2.0 * std::max(gradient_floor, gn)));
        }
        fb.pieces.push_back(std::move(piece));
    }
    if (fb.pieces.empty()) fb.min_gradient = 0.0;
    return fb;
}

BoundaryCarrier carrier(const FreeBoundary& fb, std::size_t piece, int nodes_per_vertex)
{
    const FreeBoundaryPiece& p = fb.pieces.at(piece);
    if (p.points.size() < 3) throw GeometryError("free-boundary piece has fewer than three vertices");
    const PlanarCurve curve = make_polyline(p.points, p.closed);
    const int n = std::max(8, nodes_per_vertex * int(p.points.size()));
    CurveDiscretization disc = discretize(curve, n);
    Density q = sample_density(disc, [&fb](const Vec2& x) { return fb.q_at(x); });
    return {std::move(disc), std::move(q)};
}

double boundary_displacement(const FreeBoundary& a, const FreeBoundary& b)
{
    auto one_way = [](const FreeBoundary& from, const FreeBoundary& to) {
        double worst = 0.0;
        for (const auto& p : from.pieces)
            for (const Vec2& x : p.points) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& q : to.pieces)
                    for (const Vec2& y : q.points) best = std::min(best, (x - y).squaredNorm());
                worst = std::max(worst, best);
            }
        return std::sqrt(worst);
    };
    return std::max(one_way(a, b), one_way(b, a));
}

namespace {

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (x - (a + t * ab)).norm();
}

} // namespace

CrossCheckReport cross_check(const Field& w, double gradient_floor)
{
    const Grid& g = w.grid;
    const FreeBoundary fb = extract_free_boundary(w, gradient_floor);
    CrossCheckReport out{discrete_laplacian(w), Field(g)};
    out.min_gradient = fb.min_gradient;

    Field rhs(g);
    for (std::size_t p = 0; p < fb.pieces.size(); ++p) {
        const BoundaryCarrier c = carrier(fb, p);
        rhs.values += deposit_measure(c.disc, c.q, g).values;
    }
    if (rhs.values.abs().maxCoeff() > 0.0) out.v2 = solve_poisson(rhs);

    const double ring = 4.0 * g.h;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i) {
            if (!g.interior(i, j)) continue;
            const Vec2 x = g.point(i, j);
            bool near = false;
            for (const auto& piece : fb.pieces) {
                const std::size_t n = piece.points.size();
                const std::size_t segs = piece.closed ? n : n - 1;
                for (std::size_t s = 0; s < segs && !near; ++s)
                    near = segment_distance(x, piece.points[s], piece.points[(s + 1) % n]) < ring;
                if (near) break;
            }
            if (near) continue;
            out.discrepancy = std::max(out.discrepancy, std::abs(out.v1(i, j) - out.v2(i, j)));
            ++out.compared_nodes;
        }
    // Lap_h w is only defined on interior nodes; seminorm over the interior values.
    Field interior_v1 = out.v1;
    Grid masked = g;
    for (Index j = 0; j <= g.ny; ++j)
        for (Index i = 0; i <= g.nx; ++i)
            if (!g.interior(i, j)) masked.mask(i, j) = Grid::kInactive;
    interior_v1.grid = masked;
    out.lipschitz_v1 = lipschitz_seminorm(interior_v1);
    return out;
}

void write_checkpoint(const AltCafState& state, const std::string& path)
{
    write_raster(state.w, path);
    nlohmann::ordered_json j;
    j["shape"] = state.w.grid.shape == GridShape::Disk ? "disk" : "square";
    j["epsilon"] = state.epsilon;
    j["iterations"] = state.iterations;
    j["accepted"] = state.accepted;
    j["bending"] = state.bending;
    j["volume"] = state.volume;
    j["total"] = state.total();
    std::ofstream out(path + ".json");
    if (!out) throw Error("cannot open " + path + ".json for writing");
    out << j.dump(2) << '\n';
}

AltCafState read_checkpoint(const std::string& path)
{
    std::ifstream in(path + ".json");
    if (!in) throw Error("cannot open " + path + ".json");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ".json: " + e.what());
    }
    const GridShape shape = j.value("shape", "square") == "disk" ? GridShape::Disk : GridShape::Square;
    AltCafState s = make_state(read_raster(path, shape), j.at("epsilon").get<double>());
    s.iterations = j.value("iterations", 0);
    s.accepted = j.value("accepted", 0);
    return s;
}

} // namespace spl
