#include "nlac/kernels.hpp"

#include "nlac/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlac {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_measure(int d) {  // omega_{d-1}
    return d == 1 ? 2.0 : 2.0 * kPi;
}

}  // namespace

double eval_q(double r) {
    if (r < 0.0) throw std::invalid_argument("eval_q: negative argument");
    const double s = 1.0 / (1.0 + std::exp(-r * r));
    return r * (s - 0.5);
}

double RateFunction::value(double r) const { return eval_q(r); }

double RateFunction::derivative(double r) const {
    const double s = 1.0 / (1.0 + std::exp(-r * r));
    return (s - 0.5) + 2.0 * r * r * s * (1.0 - s);
}

double cbar(int d, double p) {
    if (d != 1 && d != 2) throw std::invalid_argument("cbar: d must be 1 or 2");
    if (!(p > 1.0)) throw std::invalid_argument("cbar: p must exceed 1");
    return std::exp(0.5 * std::log(kPi) + std::lgamma(0.5 * (d + p)) - std::lgamma(0.5 * (p + 1.0)) -
                    std::lgamma(0.5 * d));
}

double kernel_constant(int d, double beta, double p) {
    if (beta >= d + p)
        throw std::invalid_argument("kernel_constant: beta >= d+p (normalization integral diverges)");
    return cbar(d, p) * (d + p - beta) / sphere_measure(d);
}

double delta0(double kappa0, double kappa1) {
    if (kappa0 < 1.0) throw std::invalid_argument("delta0: kappa0 must be >= 1");
    if (!(kappa1 > 0.0)) throw std::invalid_argument("delta0: kappa1 must be positive");
    return 1.0 / (3.0 * std::max({1.0, kappa1, 8.0 * kappa0 * kappa0 * kappa0}));
}

double RadialProfile::value(double x) const {
    const double a = std::abs(x);
    if (a > support) return 0.0;
    if (shape == Shape::Plateau) return amplitude;
    const double t = a / support;
    const double u = 1.0 - t * t;
    return amplitude * u * u;
}

RadialProfile default_rho(int d, double p, double beta) {
    if (beta >= d + p) throw std::invalid_argument("default_rho: beta >= d+p");
    RadialProfile r;
    r.shape = RadialProfile::Shape::Plateau;
    r.support = 0.9;
    r.c_rho = 0.9;
    // (1/cbar) int_{B(0,1)} |z|^{p-beta} c 1_{|z|<=0.9} dz = 1
    // => c = cbar*(d+p-beta) / (omega_{d-1} * 0.9^{d+p-beta})
    r.amplitude =
        cbar(d, p) * (d + p - beta) / (sphere_measure(d) * std::pow(0.9, d + p - beta));
    r.C_rho = r.amplitude;
    return r;
}

RadialProfile smooth_rho(int d, double p, double beta) {
    if (beta >= d + p) throw std::invalid_argument("smooth_rho: beta >= d+p");
    RadialProfile r;
    r.shape = RadialProfile::Shape::Bump;
    r.support = 0.9;
    r.c_rho = 0.45;
    r.amplitude = 1.0;
    // normalize numerically: int_0^s t^{p-beta+d-1} rho(t) dt * omega = cbar
    const double mu = p - beta + d - 1.0;
    Rule1D rule = gauss_weighted_segment(24, mu, r.support);
    double integral = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) integral += rule.weights[i] * r.value(rule.nodes[i]);
    integral *= sphere_measure(d);
    r.amplitude = cbar(d, p) / integral;
    r.C_rho = r.value(r.c_rho);
    return r;
}

double MollifierProfile::value(double x) const {
    const double a = std::abs(x);
    if (a > support) return 0.0;
    const double t = a / support;
    const double u = 1.0 - t * t;
    return amplitude * u * u * u;
}

double MollifierProfile::derivative(double x) const {
    if (std::abs(x) > support) return 0.0;
    const double t = x / support;
    const double u = 1.0 - t * t;
    return amplitude * 3.0 * u * u * (-2.0 * t / support);
}

MollifierProfile default_psi(int d) {
    if (d != 1 && d != 2) throw std::invalid_argument("default_psi: d must be 1 or 2");
    MollifierProfile psi;
    psi.d = d;
    psi.support = 0.9;
    psi.c_psi = 0.45;
    // closed-form unit mass:
    //  d=1: 2 * s * int_0^1 (1-t^2)^3 dt = s*32/35      => c = 35/(32 s)
    //  d=2: 2 pi s^2 int_0^1 (1-t^2)^3 t dt = pi s^2/4  => c = 4/(pi s^2)
    if (d == 1)
        psi.amplitude = 35.0 / (32.0 * psi.support);
    else
        psi.amplitude = 4.0 / (kPi * psi.support * psi.support);
    return psi;
}

double KernelConfig::horizon(Point x) const {
    if (!lambda.domain.contains(x, 1e-14))
        throw std::invalid_argument("horizon: point outside the closed domain");
    const double l = std::max(lambda.value(x), 0.0);
    return delta * eval_q(l);
}

Point KernelConfig::horizon_gradient(Point x) const {
    const double l = std::max(lambda.value(x), 0.0);
    const Point gl = lambda.gradient(x);
    const double qp = q.derivative(l);
    return {delta * qp * gl.x, delta * qp * gl.y};
}

KernelConfig make_kernel_config(const Domain& domain, double p, double beta, double delta,
                                RadialProfile::Shape rho_shape) {
    if (!(p > 1.0)) throw std::invalid_argument("make_kernel_config: p must exceed 1");
    if (beta < 0.0 || beta >= domain.dim + p)
        throw std::invalid_argument("make_kernel_config: beta outside [0, d+p)");
    KernelConfig cfg;
    cfg.d = domain.dim;
    cfg.p = p;
    cfg.beta = beta;
    cfg.lambda = smooth_distance(domain);
    cfg.delta_max = delta0(cfg.lambda.kappa0, cfg.lambda.kappa1);
    if (!(delta > 0.0) || delta >= cfg.delta_max)
        throw std::invalid_argument("make_kernel_config: delta violates (A_delta), requires 0 < delta < " +
                                    std::to_string(cfg.delta_max));
    cfg.delta = delta;
    cfg.rho = rho_shape == RadialProfile::Shape::Plateau ? default_rho(cfg.d, p, beta)
                                                         : smooth_rho(cfg.d, p, beta);
    cfg.psi = default_psi(cfg.d);
    cfg.cbar_dp = cbar(cfg.d, p);
    cfg.cgamma = kernel_constant(cfg.d, beta, p);
    return cfg;
}

double eval_gamma(Point x, Point y, const KernelConfig& cfg) {
    const double eta = cfg.horizon(x);
    const double t = norm(y - x);
    if (t >= eta || eta <= 0.0) return 0.0;
    if (t == 0.0) {
        if (cfg.beta > 0.0)
            throw std::domain_error("eval_gamma: singular evaluation at x == y with beta > 0");
        return cfg.cgamma / std::pow(eta, cfg.d + cfg.p - cfg.beta);
    }
    return cfg.cgamma / (std::pow(t, cfg.beta) * std::pow(eta, cfg.d + cfg.p - cfg.beta));
}

ConstHorizonParams make_const_horizon(int d, double p, double delta, RadialProfile::Shape rho_shape) {
    if (!(delta > 0.0)) throw std::invalid_argument("make_const_horizon: delta must be positive");
    ConstHorizonParams chp;
    chp.d = d;
    chp.p = p;
    chp.delta = delta;
    chp.rho = rho_shape == RadialProfile::Shape::Plateau ? default_rho(d, p, 0.0)
                                                         : smooth_rho(d, p, 0.0);
    return chp;
}

}  // namespace nlac
