#pragma once

#include "nlac/geometry.hpp"

namespace nlac {

/// Boundary localization rate q(r) = r*(1/(1+e^{-r^2}) - 1/2).
/// Satisfies q(0) = 0, 0 <= q(r) < r/2, q nondecreasing.
struct RateFunction {
    double value(double r) const;
    double derivative(double r) const;
};

double eval_q(double r);

/// sqrt(pi)*Gamma((d+p)/2) / (Gamma((p+1)/2)*Gamma(d/2)); the scale that
/// makes the spherical average of |omega.e|^p equal to 1/cbar.
double cbar(int d, double p);

/// Normalization C^gamma_{d,beta,p} = cbar*(d+p-beta)/omega_{d-1} so that
/// int_{B(0,1)} C^gamma |xi|^{p-beta} dxi = cbar.  Requires beta < d+p.
double kernel_constant(int d, double beta, double p);

/// Horizon threshold delta0 = 1/(3*max{1, kappa1, 8*kappa0^3}).
double delta0(double kappa0, double kappa1);

/// Radial kernel profile rho with the A_rho normalization
/// (1/cbar) int_{B(0,1)} |z|^{p-beta} rho(|z|) dz = 1.
struct RadialProfile {
    enum class Shape { Plateau, Bump };
    Shape shape = Shape::Plateau;
    double support = 0.9;       // support radius (< 1)
    double c_rho = 0.9;         // plateau radius
    double C_rho = 0.0;         // lower bound on [-c_rho, c_rho]
    double amplitude = 0.0;     // normalization scalar

    double value(double x) const;
};

/// Plateau profile rho = c * 1_{|x|<=0.9} with closed-form normalization.
RadialProfile default_rho(int d, double p, double beta);
/// Smooth alternative c*(1-(x/0.9)^2)^2, normalized numerically.
RadialProfile smooth_rho(int d, double p, double beta);

/// Mollifier psi for the boundary-localized convolution; C^2 polynomial
/// bump with unit mass over R^d.
struct MollifierProfile {
    int d = 1;
    int smoothness = 2;
    double support = 0.9;
    double c_psi = 0.45;
    double amplitude = 0.0;

    double value(double x) const;
    double derivative(double x) const;
};

MollifierProfile default_psi(int d);

/// All kernel ingredients for the heterogeneous-localization family.
struct KernelConfig {
    int d = 1;
    double p = 2.0;
    double beta = 0.0;
    double delta = 0.0;
    RateFunction q;
    DistanceField lambda;
    RadialProfile rho;
    MollifierProfile psi;

    // derived constants
    double cbar_dp = 0.0;
    double cgamma = 0.0;
    double delta_max = 0.0;  // delta0 from (A_delta)

    /// eta_delta(x) = delta * q(lambda(x)).
    double horizon(Point x) const;
    /// gradient of eta_delta (chain rule through q and lambda).
    Point horizon_gradient(Point x) const;
};

/// Validates delta against (A_delta) and fills in all derived constants.
KernelConfig make_kernel_config(const Domain& domain, double p, double beta, double delta,
                                RadialProfile::Shape rho_shape = RadialProfile::Shape::Plateau);

/// The nonsymmetric kernel gamma_{beta,p}[delta;q](x,y): zero outside
/// |y-x| < eta_delta(x), else C^gamma / (|x-y|^beta * eta^{d+p-beta}).
/// Throws on x == y when beta > 0 (singular evaluation).
double eval_gamma(Point x, Point y, const KernelConfig& cfg);

/// Parameters of the constant-horizon (parameter-dependent domain) family.
struct ConstHorizonParams {
    int d = 1;
    double p = 2.0;
    double delta = 0.0;
    RadialProfile rho;  // normalized with beta = 0
};

ConstHorizonParams make_const_horizon(int d, double p, double delta,
                                      RadialProfile::Shape rho_shape = RadialProfile::Shape::Plateau);

}  // namespace nlac
