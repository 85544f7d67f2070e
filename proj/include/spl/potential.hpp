#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "spl/discretization.hpp"

namespace spl {

template <typename Scalar, int Dim>
struct KernelSample {
    Scalar value;
    Eigen::Matrix<Scalar, Dim, 1> gradient;
};

/// Fundamental solution of -Laplace in R^Dim and its gradient.
///
/// Dim = 2: -log|x| / (2 pi). Dim >= 3: |x|^(2-Dim) / ((Dim-2) omega_Dim) with
/// omega_Dim the area of the unit sphere. |gradient| = 1 / (omega_Dim |x|^(Dim-1)).
template <typename Derived>
KernelSample<typename Derived::Scalar, Derived::RowsAtCompileTime>
fundamental_solution(const Eigen::MatrixBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    constexpr int Dim = Derived::RowsAtCompileTime;
    static_assert(Dim >= 2 && Derived::ColsAtCompileTime == 1, "fundamental_solution expects a fixed-size vector");
    const Scalar r2 = x.squaredNorm();
    if (!(r2 > Scalar(0))) throw SingularityError("fundamental_solution: x = 0");
    if constexpr (Dim == 2) {
        const Scalar c = Scalar(1) / (Scalar(2) * Scalar(pi));
        return {-c * Scalar(0.5) * std::log(r2), -c * x / r2};
    } else {
        const Scalar omega = Scalar(2) * std::pow(Scalar(pi), Scalar(Dim) / 2) / std::tgamma(Scalar(Dim) / 2);
        const Scalar r = std::sqrt(r2);
        return {std::pow(r, Scalar(2 - Dim)) / (Scalar(Dim - 2) * omega),
                -x / (omega * std::pow(r, Scalar(Dim)))};
    }
}

/// Green's function of the unit disk with zero Dirichlet data (image construction).
double greens_disk(const Vec2& x, const Vec2& y);

enum class DomainKind { FreeSpace, UnitDiskDirichlet };
enum class QuadratureMethod { Midpoint, NearSingularAdaptive };

/// Mesh-free evaluator of the solution of -Lap v = Q H^1|Gamma, either the
/// free-space single-layer potential or the unit-disk Dirichlet solution.
class PotentialSolution {
public:
    PotentialSolution(CurveDiscretization disc, Density q, DomainKind domain = DomainKind::UnitDiskDirichlet,
                      QuadratureMethod method = QuadratureMethod::NearSingularAdaptive);

    double value(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;

    const CurveDiscretization& discretization() const { return disc_; }
    const Density& density() const { return q_; }
    DomainKind domain() const { return domain_; }
    QuadratureMethod method() const { return method_; }

private:
    CurveDiscretization disc_;
    Density q_;
    DomainKind domain_;
    QuadratureMethod method_;
};

/// Free-space single-layer potential S Q(x).
double single_layer(const CurveDiscretization& disc, const Density& q, const Vec2& x);
/// Unit-disk Dirichlet solution v(x) = int G(x, y) Q(y) dH^1(y).
double solve_dirichlet_disk(const CurveDiscretization& disc, const Density& q, const Vec2& x);
Vec2 gradient(const PotentialSolution& solution, const Vec2& x);

/// Richardson extrapolation of g(t) as t -> 0+ over t_k = t0 2^-k.
struct Extrapolation {
    double value = 0.0;
    std::vector<double> offsets;
    std::vector<double> samples;
    std::vector<double> extrapolants; ///< second Richardson stage
    bool converged = false;
};

/// Two-stage Richardson over t_k = t0 2^-k, k = 0..levels-1. Convergence
/// requires the last two extrapolants to differ by less than tol (1 + |value|).
Extrapolation extrapolate_to_zero(const std::function<double(double)>& g, double t0 = 0.05, int levels = 9,
                                  double tol = 1e-3);

/// One-sided limit of grad v at x0 approached along x0 + t * direction, t -> 0+.
/// Throws ExtrapolationError if either component fails to converge.
Vec2 one_sided_gradient(const PotentialSolution& solution, const Vec2& x0, const Vec2& direction);

struct NormalDerivatives {
    double outer = 0.0;        ///< limit from the side the normal points to
    double inner = 0.0;
    double jump = 0.0;         ///< outer - inner
    double pv_integral = 0.0;  ///< principal value of int dF/dnu(x0 - y) Q(y) dH^1(y)
    double formula_outer = 0.0;
    double formula_inner = 0.0;
    Extrapolation outer_fit;
    Extrapolation inner_fit;
    std::vector<double> pv_windows;
    std::vector<double> pv_values;
};

/// One-sided normal derivatives at node `i`, by offset extrapolation and,
/// independently, by the principal-value formula -+Q/2 + PV integral (+ the
/// smooth image term on the disk).
NormalDerivatives normal_derivatives(const PotentialSolution& solution, Index i);

/// int_delta^1 mu(B_t(x)) / t^2 dt for the arc-length measure of the curve.
double wolff_potential(const CurveDiscretization& disc, const Vec2& x, double delta);

} // namespace spl
