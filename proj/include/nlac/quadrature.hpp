#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace nlac {

/// One-dimensional quadrature rule: sum w_i * f(t_i).
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes on [-1, 1].
const Rule1D& gauss_legendre(int n);

/// Gauss-Jacobi rule with n nodes for the weight (1+x)^b on [-1, 1].
/// Requires b > -1.
const Rule1D& gauss_jacobi(int n, double b);

/// Gauss-Legendre rule mapped to [a, b] (plain measure dt).
Rule1D gauss_on_interval(int n, double a, double b);

/// Rule for integrals of the form  int_0^len  t^mu * g(t) dt.
/// Returned weights already contain the t^mu factor, so callers sum
/// w_i * g(t_i).  Requires mu > -1.
Rule1D gauss_weighted_segment(int n, double mu, double len);

/// Symmetric quadrature on the reference triangle (barycentric
/// coordinates); weights sum to 1 (multiply by element area).
struct TriRule {
    // each entry: {l1, l2, l3, weight}
    std::vector<std::array<double, 4>> points;
};

/// Positive-weight rule exact for polynomials of the given degree
/// (supported degrees: 1..5).
const TriRule& triangle_rule(int degree);

/// Adaptive 1D integration (interval bisection with embedded Gauss
/// rules) to the requested absolute-or-relative tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10, int max_depth = 32);

}  // namespace nlac
