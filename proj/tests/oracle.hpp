#pragma once

// Independent dense double-loop quadrature oracles for the energy
// families.  The kernel formulas are restated from scratch and the
// integration uses composite Gauss panels with graded substitutions and
// fixed-point zone location; no integration machinery is shared with
// the assembly module under test.

#include "nlac/femspace.hpp"
#include "nlac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using nlac::DiscreteFunction;
using nlac::Mesh;
using nlac::Point;

inline double q_rate(double r) { return r * (1.0 / (1.0 + std::exp(-r * r)) - 0.5); }

// composite Gauss-5 panels
inline double panels(const std::function<double(double)>& f, double a, double b, int n) {
    static const double gx[5] = {-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683,
                                 0.906179845938664};
    static const double gw[5] = {0.236926885056189, 0.478628670499366, 0.568888888888889,
                                 0.478628670499366, 0.236926885056189};
    double acc = 0.0;
    const double h = (b - a) / n;
    for (int k = 0; k < n; ++k) {
        const double mid = a + (k + 0.5) * h;
        for (int i = 0; i < 5; ++i) acc += 0.5 * h * gw[i] * f(mid + 0.5 * h * gx[i]);
    }
    return acc;
}

// ---------------------------------------------------------------------
// 1D heterogeneous family.  weight(t, eta) is the full radial kernel
// factor (everything except |u(y)-u(x)|^p); the interaction radius is
// frac * eta(x).
// ---------------------------------------------------------------------

struct Het1D {
    double a = 0.0, b = 1.0;
    double p = 2.0;
    double delta = 0.0;
    double frac = 1.0;  // support fraction of eta
    std::function<double(double, double)> weight;

    double lambda(double x) const { return (x - a) * (b - x) / (b - a); }
    double eta(double x) const { return delta * q_rate(lambda(x)); }
};

// inner integral over the ball (x - r, x + r), split at mesh nodes and
// graded (t = s^2) at the origin
inline double het_inner_1d(const Het1D& hp, const DiscreteFunction& u, double x) {
    const Mesh& mesh = u.space->mesh();
    const double eta = hp.eta(x);
    const double r = hp.frac * eta;
    if (r <= 0.0) return 0.0;
    const double ux = u.value_global({x, 0.0});
    double acc = 0.0;
    for (double sgn : {1.0, -1.0}) {
        const double len = sgn > 0 ? std::min(r, mesh.extent.bx - x) : std::min(r, x - mesh.extent.ax);
        if (len <= 0.0) continue;
        std::vector<double> brk = {0.0, len};
        for (const Point& v : mesh.vertices) {
            const double t = sgn * (v.x - x);
            if (t > 1e-15 && t < len * (1.0 - 1e-15)) brk.push_back(t);
        }
        std::sort(brk.begin(), brk.end());
        for (size_t i = 0; i + 1 < brk.size(); ++i) {
            const double t0 = brk[i], t1 = brk[i + 1];
            if (t1 - t0 <= 0.0) continue;
            auto value = [&](double t) {
                const double D = std::abs(u.value_global({x + sgn * t, 0.0}) - ux);
                return hp.weight(t, eta) * std::pow(D, hp.p);
            };
            if (t0 == 0.0)
                acc += panels([&](double s) { return 2.0 * s * value(s * s); }, 0.0, std::sqrt(t1),
                              12);
            else
                acc += panels(value, t0, t1, 12);
        }
    }
    return acc;
}

// outer breakpoints: element nodes plus the zone boundaries where
// x +- frac*eta(x) meets a node (fixed-point iteration; the map is a
// strong contraction since |eta'| << 1)
inline std::vector<double> het_outer_breaks_1d(const Het1D& hp, const Mesh& mesh) {
    std::vector<double> brk;
    for (const Point& v : mesh.vertices) brk.push_back(v.x);
    const double rmax = hp.frac * hp.delta * 0.5;  // q(r) < r/2 bounds eta by delta/2 * lambda
    for (const Point& vp : mesh.vertices) {
        const double v = vp.x;
        for (double sgn : {1.0, -1.0}) {
            double x = v;
            for (int it = 0; it < 60; ++it) x = v - sgn * hp.frac * hp.eta(x);
            if (x > mesh.extent.ax && x < mesh.extent.bx && std::abs(x - v) <= 2.0 * rmax)
                brk.push_back(x);
        }
    }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    return brk;
}

inline double het_double_integral_1d(const Het1D& hp, const DiscreteFunction& u) {
    const Mesh& mesh = u.space->mesh();
    const std::vector<double> brk = het_outer_breaks_1d(hp, mesh);
    double acc = 0.0;
    for (size_t i = 0; i + 1 < brk.size(); ++i) {
        if (brk[i + 1] - brk[i] <= 1e-300) continue;
        acc += panels([&](double x) { return het_inner_1d(hp, u, x); }, brk[i], brk[i + 1], 6);
    }
    return acc;
}

// [u]^p with the indicator kernel gamma
inline double seminorm_het_1d(const DiscreteFunction& u, double p, double beta, double delta,
                              double cgamma) {
    Het1D hp;
    hp.a = u.space->mesh().domain.ax;
    hp.b = u.space->mesh().domain.bx;
    hp.p = p;
    hp.delta = delta;
    hp.frac = 1.0;
    hp.weight = [=](double t, double eta) {
        return cgamma * std::pow(t, -beta) * std::pow(eta, -(1.0 + p - beta));
    };
    return het_double_integral_1d(hp, u);
}

// G_{p,delta} with the plateau rho
inline double energy_het_1d(const DiscreteFunction& u, double p, double beta, double delta,
                            double rho_amp, double rho_support) {
    Het1D hp;
    hp.a = u.space->mesh().domain.ax;
    hp.b = u.space->mesh().domain.bx;
    hp.p = p;
    hp.delta = delta;
    hp.frac = rho_support;
    hp.weight = [=](double t, double eta) {
        return rho_amp * std::pow(t, -beta) * std::pow(eta, -(1.0 + p - beta));
    };
    return het_double_integral_1d(hp, u) / p;
}

// ---------------------------------------------------------------------
// 1D constant-horizon family on the inflated mesh
// ---------------------------------------------------------------------

inline double const_seminorm_1d(const DiscreteFunction& u, double p, double delta, double rho_amp,
                                double rho_support) {
    const Mesh& mesh = u.space->mesh();
    const double r = rho_support * delta;
    const double kernel = rho_amp / std::pow(delta, 1.0 + p);

    auto inner = [&](double x) {
        const double ux = u.value_global({x, 0.0});
        double acc = 0.0;
        for (double sgn : {1.0, -1.0}) {
            const double len =
                sgn > 0 ? std::min(r, mesh.extent.bx - x) : std::min(r, x - mesh.extent.ax);
            if (len <= 0.0) continue;
            std::vector<double> brk = {0.0, len};
            for (const Point& v : mesh.vertices) {
                const double t = sgn * (v.x - x);
                if (t > 1e-15 && t < len * (1.0 - 1e-15)) brk.push_back(t);
            }
            std::sort(brk.begin(), brk.end());
            for (size_t i = 0; i + 1 < brk.size(); ++i) {
                if (brk[i + 1] - brk[i] <= 0.0) continue;
                acc += panels(
                    [&](double t) {
                        const double D = std::abs(u.value_global({x + sgn * t, 0.0}) - ux);
                        return kernel * std::pow(D, p);
                    },
                    brk[i], brk[i + 1], 10);
            }
        }
        return acc;
    };

    // outer breakpoints: nodes and node +- r images
    std::vector<double> brk;
    for (const Point& v : mesh.vertices) {
        brk.push_back(v.x);
        for (double s : {-1.0, 1.0}) {
            const double x = v.x + s * r;
            if (x > mesh.extent.ax && x < mesh.extent.bx) brk.push_back(x);
        }
    }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    double acc = 0.0;
    for (size_t i = 0; i + 1 < brk.size(); ++i) {
        if (brk[i + 1] - brk[i] <= 1e-300) continue;
        acc += panels(inner, brk[i], brk[i + 1], 6);
    }
    return acc;
}

// ---------------------------------------------------------------------
// local p-energy oracles
// ---------------------------------------------------------------------

inline double local_energy_1d(const DiscreteFunction& u, double p) {
    const Mesh& mesh = u.space->mesh();
    double acc = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double x0 = mesh.vertices[mesh.elements[e][0]].x;
        const double x1 = mesh.vertices[mesh.elements[e][1]].x;
        acc += panels([&](double x) { return std::pow(std::abs(u.gradient(e, {x, 0.0}).x), p); },
                      x0, x1, 16);
    }
    return acc / p;
}

inline double local_energy_2d(const DiscreteFunction& u, double p) {
    const Mesh& mesh = u.space->mesh();
    double acc = 0.0;
    // dense uniform barycentric sampling with the midpoint rule on a
    // k x k subdivision of each triangle
    const int k = 48;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        const Point a = mesh.vertices[el[0]], b = mesh.vertices[el[1]], c = mesh.vertices[el[2]];
        const double area = mesh.elem_measure(e);
        double cell = 0.0;
        int cnt = 0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k - i; ++j) {
                // two sub-triangles per (i,j) lattice cell except the last row
                const double l1a = (i + 1.0 / 3.0) / k, l2a = (j + 1.0 / 3.0) / k;
                Point pa = a + l1a * (b - a) + l2a * (c - a);
                cell += std::pow(nlac::norm(u.gradient(e, pa)), p);
                ++cnt;
                if (j < k - i - 1) {
                    const double l1b = (i + 2.0 / 3.0) / k, l2b = (j + 2.0 / 3.0) / k;
                    Point pb = a + l1b * (b - a) + l2b * (c - a);
                    cell += std::pow(nlac::norm(u.gradient(e, pb)), p);
                    ++cnt;
                }
            }
        acc += area * cell / cnt;
    }
    return acc / p;
}

// ---------------------------------------------------------------------
// 2D heterogeneous seminorm for globally smooth u (polar composite)
// ---------------------------------------------------------------------

struct Het2D {
    double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0;
    double p = 2.0, beta = 0.0, delta = 0.0;
    double scale = 1.0;  // distance-field normalizing length
    double frac = 1.0;
    std::function<double(double, double)> weight;  // (t, eta)

    double lambda(Point q) const {
        const double lx = (q.x - ax) * (bx - q.x) / (bx - ax);
        const double ly = (q.y - ay) * (by - q.y) / (by - ay);
        return lx * ly / scale;
    }
    double eta(Point q) const { return delta * q_rate(lambda(q)); }
};

inline double het_double_integral_2d(const Het2D& hp, const DiscreteFunction& u) {
    const Mesh& mesh = u.space->mesh();
    double acc = 0.0;
    const int ksub = 6;  // outer subdivision per triangle
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        const Point a = mesh.vertices[el[0]], b = mesh.vertices[el[1]], c = mesh.vertices[el[2]];
        const double area = mesh.elem_measure(e);
        int cnt = 0;
        double cell = 0.0;
        for (int i = 0; i < ksub; ++i)
            for (int j = 0; j < ksub - i; ++j)
                for (int t = 0; t < (j < ksub - i - 1 ? 2 : 1); ++t) {
                    const double l1 = (i + (t ? 2.0 : 1.0) / 3.0) / ksub;
                    const double l2 = (j + (t ? 2.0 : 1.0) / 3.0) / ksub;
                    const Point x = a + l1 * (b - a) + l2 * (c - a);
                    ++cnt;
                    const double eta = hp.eta(x);
                    const double r = hp.frac * eta;
                    if (r <= 0.0) continue;
                    const double ux = u.value_global(x);
                    // polar: 48 angular midpoints, graded radial panels
                    double inner = 0.0;
                    const int m = 48;
                    for (int ja = 0; ja < m; ++ja) {
                        const double th = 2.0 * std::numbers::pi * (ja + 0.5) / m;
                        const Point om{std::cos(th), std::sin(th)};
                        inner += 2.0 * std::numbers::pi / m *
                                 panels(
                                     [&](double s) {
                                         const double tt = s * s;
                                         const Point y{x.x + tt * om.x, x.y + tt * om.y};
                                         const double D = std::abs(u.value_global(y) - ux);
                                         return 2.0 * s * tt * hp.weight(tt, eta) *
                                                std::pow(D, hp.p);
                                     },
                                     0.0, std::sqrt(r), 10);
                    }
                    cell += inner;
                }
        acc += area * cell / cnt;
    }
    return acc;
}

inline double seminorm_het_2d(const DiscreteFunction& u, double p, double beta, double delta,
                              double cgamma, double scale2d) {
    Het2D hp;
    const auto& dom = u.space->mesh().domain;
    hp.ax = dom.ax;
    hp.bx = dom.bx;
    hp.ay = dom.ay;
    hp.by = dom.by;
    hp.p = p;
    hp.beta = beta;
    hp.delta = delta;
    hp.scale = scale2d;
    hp.frac = 1.0;
    hp.weight = [=](double t, double eta) {
        return cgamma * std::pow(t, -beta) * std::pow(eta, -(2.0 + p - beta));
    };
    return het_double_integral_2d(hp, u);
}

// ---------------------------------------------------------------------
// convolution and load oracles
// ---------------------------------------------------------------------

inline double kdelta_1d(const DiscreteFunction& u, double delta, double psi_amp,
                        double psi_support, double x, double a, double b) {
    const Mesh& mesh = u.space->mesh();
    const double lam = (x - a) * (b - x) / (b - a);
    const double eta = delta * q_rate(lam);
    if (eta <= 0.0) return u.value_global({x, 0.0});
    const double r = psi_support * eta;
    auto psi = [&](double t) {
        const double s = std::abs(t) / (psi_support * eta);
        if (s > 1.0) return 0.0;
        const double w = 1.0 - s * s;
        return psi_amp * w * w * w;
    };
    double acc = 0.0;
    for (double sgn : {1.0, -1.0}) {
        std::vector<double> brk = {0.0, r};
        for (const Point& v : mesh.vertices) {
            const double t = sgn * (v.x - x);
            if (t > 1e-15 && t < r * (1.0 - 1e-15)) brk.push_back(t);
        }
        std::sort(brk.begin(), brk.end());
        for (size_t i = 0; i + 1 < brk.size(); ++i) {
            if (brk[i + 1] - brk[i] <= 0.0) continue;
            acc += panels(
                [&](double t) { return psi(t) / eta * u.value_global({x + sgn * t, 0.0}); },
                brk[i], brk[i + 1], 10);
        }
    }
    return acc;
}

inline double load_f0_1d(const std::function<double(double)>& f0, const DiscreteFunction& v) {
    const Mesh& mesh = v.space->mesh();
    double acc = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!mesh.elem_is_interior(e)) continue;
        const double x0 = mesh.vertices[mesh.elements[e][0]].x;
        const double x1 = mesh.vertices[mesh.elements[e][1]].x;
        acc += panels([&](double x) { return f0(x) * v.value(e, {x, 0.0}); }, x0, x1, 12);
    }
    return acc;
}

}  // namespace oracle
