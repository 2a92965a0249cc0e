#include "nlac/convolution.hpp"

#include "nlac/parallel.hpp"
#include "nlac/quadrature.hpp"

#include "ballgeo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlac {

namespace {

constexpr double kPi = std::numbers::pi;

// psi'(tau)/tau, finite at tau = 0 (psi is an even C^2 bump).
double dpsi_over_tau(const MollifierProfile& psi, double tau) {
    const double s = psi.support;
    if (std::abs(tau) > s) return 0.0;
    const double t = tau / s;
    const double u = 1.0 - t * t;
    return -6.0 * psi.amplitude * u * u / (s * s);
}

// Quadrature points on the psi-ball around x: emit(y, ey, t, dxy, w)
// with plain Lebesgue weight w (the t^{d-1} polar factor folded in).
template <class Emit>
void psi_ball(const Mesh& mesh, const KernelConfig& cfg, Point xp, double eta, int order,
              int angular, Emit&& emit) {
    const double r = cfg.psi.support * eta;
    if (r <= 0.0) return;

    if (mesh.dim == 1) {
        const double x = xp.x;
        for (double s : {1.0, -1.0}) {
            double end = std::clamp(x + s * r, mesh.extent.ax, mesh.extent.bx);
            const double len = s * (end - x);
            if (len <= 1e-300) continue;
            double brk[64];
            int nbrk = 0;
            brk[nbrk++] = 0.0;
            const double lo = std::min(x, end), hi = std::max(x, end);
            int k0 = std::max(0, static_cast<int>(std::floor((lo - mesh.extent.ax) / mesh.hx)));
            int k1 = std::min(static_cast<int>(mesh.vertices.size()) - 1,
                              static_cast<int>(std::ceil((hi - mesh.extent.ax) / mesh.hx)) + 1);
            for (int k = k0; k <= k1 && nbrk < 62; ++k) {
                const double t = s * (mesh.vertices[k].x - x);
                if (t > 1e-15 * r && t < len * (1.0 - 1e-15)) brk[nbrk++] = t;
            }
            brk[nbrk++] = len;
            std::sort(brk, brk + nbrk);
            const Rule1D& gl = gauss_legendre(order);
            for (int i = 0; i + 1 < nbrk; ++i) {
                const double t0 = brk[i], t1 = brk[i + 1];
                if (t1 - t0 <= 1e-300) continue;
                const int ey = mesh.locate({x + s * 0.5 * (t0 + t1), 0.0});
                if (ey < 0) continue;
                const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
                for (size_t q = 0; q < gl.nodes.size(); ++q) {
                    const double t = mid + half * gl.nodes[q];
                    emit(Point{x + s * t, 0.0}, ey, t, Point{s * t, 0.0}, half * gl.weights[q]);
                }
            }
        }
        return;
    }

    // 2D
    const int ex = mesh.locate(xp);
    const bool inside = ex >= 0 && detail::dist_to_elem_edges(mesh, ex, xp) > r;
    const Rule1D& gl = gauss_legendre(order);
    if (inside) {
        const double wth = 2.0 * kPi / angular;
        for (int j = 0; j < angular; ++j) {
            const double th = wth * (j + 0.5);
            const Point om = {std::cos(th), std::sin(th)};
            for (size_t q = 0; q < gl.nodes.size(); ++q) {
                const double t = 0.5 * r * (1.0 + gl.nodes[q]);
                const double w = 0.5 * r * gl.weights[q] * wth * t;  // t^{d-1}
                emit(xp + t * om, ex, t, t * om, w);
            }
        }
        return;
    }
    const std::vector<int> cand = detail::candidate_elements(mesh, xp, r);
    const std::vector<double> angles = detail::arc_angles(mesh, cand, xp, r);
    const Rule1D& garc = gauss_legendre(6);
    std::vector<double> cross;
    for (size_t a = 0; a + 1 < angles.size(); ++a) {
        const double th0 = angles[a], th1 = angles[a + 1];
        if (th1 - th0 < 1e-14) continue;
        const double amid = 0.5 * (th0 + th1), ahalf = 0.5 * (th1 - th0);
        for (size_t ja = 0; ja < garc.nodes.size(); ++ja) {
            const double th = amid + ahalf * garc.nodes[ja];
            const double wth = ahalf * garc.weights[ja];
            const Point om = {std::cos(th), std::sin(th)};
            detail::ray_crossings(mesh, cand, xp, om, r, cross);
            cross.push_back(r);
            double t0 = 0.0;
            for (double t1 : cross) {
                if (t1 - t0 > 1e-300) {
                    const int ey = mesh.locate(xp + 0.5 * (t0 + t1) * om);
                    if (ey >= 0) {
                        const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
                        for (size_t q = 0; q < gl.nodes.size(); ++q) {
                            const double t = mid + half * gl.nodes[q];
                            emit(xp + t * om, ey, t, t * om, half * gl.weights[q] * wth * t);
                        }
                    }
                }
                t0 = t1;
            }
        }
    }
}

bool at_boundary(const KernelConfig& cfg, Point x) {
    const double tol = 1e-13 * cfg.lambda.domain.diameter();
    return cfg.lambda.domain.dist_boundary(x) <= tol;
}

}  // namespace

double apply_Kdelta(const DiscreteFunction& u, const KernelConfig& cfg, Point x, int inner_order) {
    const Mesh& mesh = u.space->mesh();
    if (!cfg.lambda.domain.contains(x, 1e-14))
        throw std::invalid_argument("apply_Kdelta: point outside the closed domain");
    if (at_boundary(cfg, x)) {
        const int e = mesh.locate(x);
        return e >= 0 ? u.value(e, x) : 0.0;  // trace policy: K_delta collapses to the identity
    }
    const double eta = cfg.horizon(x);
    if (eta <= 0.0) {
        const int e = mesh.locate(x);
        return e >= 0 ? u.value(e, x) : 0.0;
    }
    const double pref = std::pow(eta, -static_cast<double>(cfg.d));
    double acc = 0.0;
    psi_ball(mesh, cfg, x, eta, inner_order, 16, [&](Point y, int ey, double t, Point, double w) {
        acc += w * pref * cfg.psi.value(t / eta) * u.value(ey, y);
    });
    return acc;
}

Point grad_Kdelta(const DiscreteFunction& u, const KernelConfig& cfg, Point x, int inner_order) {
    const Mesh& mesh = u.space->mesh();
    if (at_boundary(cfg, x)) {
        const int e = mesh.locate(x);
        return e >= 0 ? u.gradient(e, x) : Point{0.0, 0.0};
    }
    const double eta = cfg.horizon(x);
    const Point geta = cfg.horizon_gradient(x);
    const double pref1 = std::pow(eta, -static_cast<double>(cfg.d) - 1.0);
    const double pref2 = pref1 / eta;
    const double d = cfg.d;
    const int ex = mesh.locate(x);
    // The zeroth moments int (d psi + tau psi') dy and int s(tau)(y-x) dy
    // vanish exactly over the full ball (psi vanishes at its support
    // edge; odd symmetry), so the kernel derivative acts on
    // u(y) - u(x).  Anything else cancels eta^{-d-1}-sized terms in
    // floating point once eta is small near the boundary.
    Point acc{0.0, 0.0};
    psi_ball(mesh, cfg, x, eta, inner_order, 16, [&](Point y, int ey, double t, Point dxy, double w) {
        const double tau = t / eta;
        const double psi_v = cfg.psi.value(tau);
        const double dpsi = cfg.psi.derivative(tau);
        double D;  // u(y) - u(x), cancellation-free within one element
        if (ey == ex) {
            const Point mid = {x.x + 0.5 * dxy.x, x.y + 0.5 * dxy.y};
            const Point g = u.gradient(ex, mid);
            D = g.x * dxy.x + g.y * dxy.y;
        } else {
            D = u.value(ey, y) - u.value(ex, x);
        }
        const double c1 = -pref1 * (d * psi_v + tau * dpsi) * D;
        const double c2 = -pref2 * dpsi_over_tau(cfg.psi, tau) * D;
        acc.x += w * (c1 * geta.x + c2 * dxy.x);
        acc.y += w * (c1 * geta.y + c2 * dxy.y);
    });
    return acc;
}

Eigen::VectorXd smoothed_load_vector(const LoadFunctional& f, const FeSpace& space,
                                     const KernelConfig& cfg, const QuadratureSpec& quad) {
    const Mesh& mesh = space.mesh();
    auto radius = [&](Point p) { return cfg.psi.support * cfg.horizon(p); };
    std::vector<detail::OuterPt> outer;
    if (mesh.dim == 1)
        outer = detail::outer_points_1d(
            mesh, [&](double x) { return radius({x, 0.0}); }, quad.outer_order);
    else
        outer = detail::outer_points_2d(mesh, radius, quad.outer_tri_degree);

    const double d = cfg.d;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.ndof());
    Eigen::VectorXd b = blocked_reduce<Eigen::VectorXd>(
        outer.size(), 64, zero,
        [&](size_t lo, size_t hi) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(space.ndof());
            double nv[6];
            double nx[6];
            for (size_t i = lo; i < hi; ++i) {
                const auto& op = outer[i];
                const double eta = cfg.horizon(op.x);
                if (eta <= 0.0) continue;
                const double f0v = f.f0 ? f.f0(op.x) : 0.0;
                const double f1x = f.f1x ? f.f1x(op.x) : 0.0;
                const double f1y = f.f1y ? f.f1y(op.x) : 0.0;
                if (f0v == 0.0 && f1x == 0.0 && f1y == 0.0) continue;
                const bool has_flux = (f1x != 0.0 || f1y != 0.0);
                const Point geta = cfg.horizon_gradient(op.x);
                const double pref0 = std::pow(eta, -d);
                const double pref1 = pref0 / eta;
                const double pref2 = pref1 / eta;
                psi_ball(mesh, cfg, op.x, eta, quad.inner_order, quad.angular,
                         [&](Point y, int ey, double t, Point dxy, double w) {
                             const double tau = t / eta;
                             const double psi_v = cfg.psi.value(tau);
                             space.shape_values(ey, y, nv);
                             for (int k = 0; k < space.dofs_per_elem(); ++k)
                                 acc[space.elem_dof(ey, k)] += op.w * w * f0v * pref0 * psi_v * nv[k];
                             if (!has_flux) return;
                             // grad(K phi_j) pairs the kernel derivative with
                             // phi_j(y) - phi_j(x); the zeroth moments vanish
                             // over the full ball (see grad_Kdelta)
                             const double dpsi = cfg.psi.derivative(tau);
                             const double c1 = -pref1 * (d * psi_v + tau * dpsi);
                             const double c2 = -pref2 * dpsi_over_tau(cfg.psi, tau);
                             const double coeff = f1x * (c1 * geta.x + c2 * dxy.x) +
                                                  f1y * (c1 * geta.y + c2 * dxy.y);
                             if (ey == op.elem) {
                                 // phi(y) - phi(x) via the midpoint gradient
                                 Point gr[6];
                                 const Point mid = {op.x.x + 0.5 * dxy.x, op.x.y + 0.5 * dxy.y};
                                 space.shape_gradients(ey, mid, gr);
                                 for (int k = 0; k < space.dofs_per_elem(); ++k)
                                     acc[space.elem_dof(ey, k)] +=
                                         op.w * w * coeff * (gr[k].x * dxy.x + gr[k].y * dxy.y);
                             } else {
                                 space.shape_values(op.elem, op.x, nx);
                                 for (int k = 0; k < space.dofs_per_elem(); ++k) {
                                     acc[space.elem_dof(ey, k)] += op.w * w * coeff * nv[k];
                                     acc[space.elem_dof(op.elem, k)] -= op.w * w * coeff * nx[k];
                                 }
                             }
                         });
            }
            return acc;
        },
        [](Eigen::VectorXd a, const Eigen::VectorXd& b2) -> Eigen::VectorXd { return a + b2; });

    // boundary term: g paired with the trace of phi_i (T K_delta u = T u)
    if (f.g) {
        const Domain& dom = mesh.domain;
        double nv[6];
        auto add_pt = [&](Point p, double w) {
            const int e = mesh.locate(p);
            if (e < 0) return;
            space.shape_values(e, p, nv);
            for (int k = 0; k < space.dofs_per_elem(); ++k)
                b[space.elem_dof(e, k)] += w * f.g(p) * nv[k];
        };
        if (mesh.dim == 1) {
            add_pt({dom.ax, 0.0}, 1.0);
            add_pt({dom.bx, 0.0}, 1.0);
        } else {
            auto side = [&](Point a, Point c) {
                Rule1D r = gauss_on_interval(8, 0.0, 1.0);
                const double len = norm(c - a);
                for (size_t q = 0; q < r.nodes.size(); ++q)
                    add_pt(a + r.nodes[q] * (c - a), r.weights[q] * len);
            };
            side({dom.ax, dom.ay}, {dom.bx, dom.ay});
            side({dom.bx, dom.ay}, {dom.bx, dom.by});
            side({dom.bx, dom.by}, {dom.ax, dom.by});
            side({dom.ax, dom.by}, {dom.ax, dom.ay});
        }
    }
    return b;
}

double smoothed_load_pairing(const LoadFunctional& f, const DiscreteFunction& u,
                             const KernelConfig& cfg, const QuadratureSpec& quad) {
    // K_delta is linear, so <f, K_delta u> = b . c with the same rule set
    Eigen::VectorXd b = smoothed_load_vector(f, *u.space, cfg, quad);
    return b.dot(u.coeff);
}

double convolution_error(const DiscreteFunction& u, const KernelConfig& cfg, double p) {
    const Mesh& mesh = u.space->mesh();
    auto radius = [&](Point pt) { return cfg.psi.support * cfg.horizon(pt); };
    std::vector<detail::OuterPt> outer;
    if (mesh.dim == 1)
        outer = detail::outer_points_1d(
            mesh, [&](double x) { return radius({x, 0.0}); }, 4);
    else
        outer = detail::outer_points_2d(mesh, radius, 4);

    const double total = blocked_reduce<double>(
        outer.size(), 64, 0.0,
        [&](size_t lo, size_t hi) {
            double acc = 0.0;
            for (size_t i = lo; i < hi; ++i) {
                const auto& op = outer[i];
                const double diff = u.value(op.elem, op.x) - apply_Kdelta(u, cfg, op.x);
                acc += op.w * std::pow(std::abs(diff), p);
            }
            return acc;
        },
        [](double a, double b) { return a + b; });
    return std::pow(total, 1.0 / p);
}

double smoothed_w1p_norm(const DiscreteFunction& u, const KernelConfig& cfg, double p) {
    const Mesh& mesh = u.space->mesh();
    auto radius = [&](Point pt) { return cfg.psi.support * cfg.horizon(pt); };
    std::vector<detail::OuterPt> outer;
    if (mesh.dim == 1)
        outer = detail::outer_points_1d(
            mesh, [&](double x) { return radius({x, 0.0}); }, 4);
    else
        outer = detail::outer_points_2d(mesh, radius, 4);
    double total = 0.0;
    for (const auto& op : outer) {
        const double v = apply_Kdelta(u, cfg, op.x);
        const Point g = grad_Kdelta(u, cfg, op.x);
        total += op.w * (std::pow(std::abs(v), p) + std::pow(norm(g), p));
    }
    return std::pow(total, 1.0 / p);
}

}  // namespace nlac
