#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Core>

namespace spl {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Cached Gauss-Legendre rule with `n` points (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

template <class F>
double integrate_gauss(F&& f, double a, double b, int n = 16)
{
    const GaussRule& rule = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k)
        sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return half * sum;
}

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    int deepest_level = 0;
    bool converged = true;
};

/// Recursive Gauss-Kronrod (7/15) quadrature with an absolute tolerance.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double tol, int max_depth = 40);

} // namespace spl
