#include "nlac/assembly.hpp"

#include "nlac/convolution.hpp"
#include "nlac/parallel.hpp"
#include "nlac/quadrature.hpp"

#include "ballgeo.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace nlac {

bool is_het(Family f) { return f == Family::HetNeumann || f == Family::HetDirichlet; }
bool is_local(Family f) { return f == Family::LocalNeumann || f == Family::LocalDirichlet; }
bool is_neumann(Family f) { return f == Family::HetNeumann || f == Family::LocalNeumann; }

double EnergyModel::p() const {
    if (kernel) return kernel->p;
    if (chp) return chp->p;
    return p_local;
}

namespace {

constexpr double kPi = std::numbers::pi;

double powp(double a, double p) {
    if (p == 2.0) return a * a;
    if (p == 4.0) {
        const double s = a * a;
        return s * s;
    }
    if (p == 3.0) return a * a * a;
    return std::pow(a, p);
}

// ---------------------------------------------------------------------
// Pairwise kernels.  A pair contribution is W * |u(x)-u(y)|^p; W folds
// the outer weight, the inner quadrature weight and the kernel factor.
// The kernel is split as  k(x,t) = ktilde(x,t) * t^{-beta}  with ktilde
// smooth; pieces touching t=0 use a t^{p-beta(+d-1)}-weighted rule so
// the remaining integrand is the bounded difference quotient.
// ---------------------------------------------------------------------

enum class PairKind { GammaHet, RhoHet, ConstHorizon };

struct PairCtx {
    PairKind kind;
    const KernelConfig* cfg = nullptr;
    const ConstHorizonParams* chp = nullptr;
    double p = 2.0;
    double beta = 0.0;
    int d = 1;

    double support_frac() const {
        if (kind == PairKind::GammaHet) return 1.0;
        return kind == PairKind::RhoHet ? cfg->rho.support : chp->rho.support;
    }
    double radius(Point x) const {
        if (kind == PairKind::ConstHorizon) return chp->rho.support * chp->delta;
        return support_frac() * cfg->horizon(x);
    }
    // eta-dependent prefactor, cached per outer point
    double prefactor(double eta) const {
        if (kind == PairKind::ConstHorizon)
            return std::pow(chp->delta, -static_cast<double>(d) - p);
        return std::pow(eta, -(d + p - beta));
    }
    // smooth kernel part: full kernel = ktilde * t^{-beta}
    double ktilde(double eta, double pref, double t) const {
        switch (kind) {
            case PairKind::GammaHet:
                return cfg->cgamma * pref;
            case PairKind::RhoHet:
                return cfg->rho.value(t / eta) * pref;
            default:
                return chp->rho.value(t / chp->delta) * pref;
        }
    }
};

struct InnerRules {
    const Rule1D* adjacent;  // weight t^mu on [-1,1] form
    const Rule1D* plain;
    double mu;
    int order;
};

InnerRules make_inner_rules(const PairCtx& ctx, int order) {
    InnerRules r;
    r.order = order;
    r.mu = ctx.p - ctx.beta + (ctx.d == 2 ? 1.0 : 0.0);
    r.adjacent = &gauss_jacobi(order, r.mu);
    r.plain = &gauss_legendre(order);
    return r;
}

struct PairPt {
    int ex, ey;
    Point x, y;
    Point dxy;  // y - x, formed from t and the direction (no cancellation)
    double W;
};

// Inner quadrature over the 1D ball (x - r, x + r) clamped to the mesh
// extent; splits at x, every vertex inside, and the support cutoff.
template <class Emit>
void inner_1d(const Mesh& mesh, const PairCtx& ctx, const InnerRules& rules, Point xp, int ex,
              double r, double eta, double pref, double outer_w, Emit&& emit) {
    if (r <= 0.0) return;
    const double x = xp.x;
    for (double s : {1.0, -1.0}) {
        double end = x + s * r;
        end = std::clamp(end, mesh.extent.ax, mesh.extent.bx);
        const double len = s * (end - x);
        if (len <= 1e-300) continue;

        // t-breakpoints at every vertex strictly inside the segment
        double brk[64];
        int nbrk = 0;
        brk[nbrk++] = 0.0;
        const double lo = std::min(x, end), hi = std::max(x, end);
        int k0 = std::max(0, static_cast<int>(std::floor((lo - mesh.extent.ax) / mesh.hx)));
        int k1 = std::min(static_cast<int>(mesh.vertices.size()) - 1,
                          static_cast<int>(std::ceil((hi - mesh.extent.ax) / mesh.hx)) + 1);
        for (int k = k0; k <= k1 && nbrk < 62; ++k) {
            const double v = mesh.vertices[k].x;
            const double t = s * (v - x);
            if (t > 1e-15 * r && t < len * (1.0 - 1e-15)) brk[nbrk++] = t;
        }
        brk[nbrk++] = len;
        std::sort(brk, brk + nbrk);

        for (int i = 0; i + 1 < nbrk; ++i) {
            const double t0 = brk[i], t1 = brk[i + 1];
            if (t1 - t0 <= 1e-300) continue;
            // element of this piece (constant: pieces never straddle a vertex)
            const double tm = 0.5 * (t0 + t1);
            const int ey = mesh.locate({x + s * tm, 0.0});
            if (ey < 0) continue;
            if (t0 == 0.0) {
                const double scale = std::pow(0.5 * t1, rules.mu + 1.0);
                for (int q = 0; q < rules.order; ++q) {
                    const double t = 0.5 * t1 * (1.0 + rules.adjacent->nodes[q]);
                    const double w = scale * rules.adjacent->weights[q];
                    const double W =
                        outer_w * w * ctx.ktilde(eta, pref, t) * std::pow(t, -ctx.p);
                    emit(PairPt{ex, ey, xp, {x + s * t, 0.0}, {s * t, 0.0}, W});
                }
            } else {
                const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
                for (int q = 0; q < rules.order; ++q) {
                    const double t = mid + half * rules.plain->nodes[q];
                    double w = half * rules.plain->weights[q] * ctx.ktilde(eta, pref, t);
                    if (ctx.beta != 0.0) w *= std::pow(t, -ctx.beta);
                    emit(PairPt{ex, ey, xp, {x + s * t, 0.0}, {s * t, 0.0}, outer_w * w});
                }
            }
        }
    }
}

// 2D polar inner quadrature.  Fast path when the ball stays inside the
// outer element; otherwise arcs split at vertex directions and rays
// split at edge crossings.
template <class Emit>
void inner_2d(const Mesh& mesh, const PairCtx& ctx, const InnerRules& rules,
              const QuadratureSpec& quad, Point xp, int ex, double r, double eta, double pref,
              double outer_w, Emit&& emit) {
    if (r <= 0.0) return;
    const bool inside = detail::dist_to_elem_edges(mesh, ex, xp) > r;

    if (inside) {
        const int m = quad.angular;
        const double wth = 2.0 * kPi / m;
        const double scale = std::pow(0.5 * r, rules.mu + 1.0);
        for (int j = 0; j < m; ++j) {
            const double th = wth * (j + 0.5);
            const Point om = {std::cos(th), std::sin(th)};
            for (int q = 0; q < rules.order; ++q) {
                const double t = 0.5 * r * (1.0 + rules.adjacent->nodes[q]);
                const double w = scale * rules.adjacent->weights[q] * wth;
                const double W = outer_w * w * ctx.ktilde(eta, pref, t) * std::pow(t, -ctx.p);
                emit(PairPt{ex, ex, xp, xp + t * om, t * om, W});
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
                if (t1 - t0 <= 1e-300) {
                    t0 = t1;
                    continue;
                }
                const double tm = 0.5 * (t0 + t1);
                const int ey = mesh.locate(xp + tm * om);
                if (ey < 0) {
                    t0 = t1;
                    continue;  // outside the meshed region: excluded
                }
                if (t0 == 0.0) {
                    const double scale = std::pow(0.5 * t1, rules.mu + 1.0);
                    for (int q = 0; q < rules.order; ++q) {
                        const double t = 0.5 * t1 * (1.0 + rules.adjacent->nodes[q]);
                        const double w = scale * rules.adjacent->weights[q] * wth;
                        const double W =
                            outer_w * w * ctx.ktilde(eta, pref, t) * std::pow(t, -ctx.p);
                        emit(PairPt{ex, ey, xp, xp + t * om, t * om, W});
                    }
                } else {
                    const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
                    for (int q = 0; q < rules.order; ++q) {
                        const double t = mid + half * rules.plain->nodes[q];
                        double w = half * rules.plain->weights[q] * wth *
                                   ctx.ktilde(eta, pref, t) * t;  // t^{d-1}
                        if (ctx.beta != 0.0) w *= std::pow(t, -ctx.beta);
                        emit(PairPt{ex, ey, xp, xp + t * om, t * om, outer_w * w});
                    }
                }
                t0 = t1;
            }
        }
    }
}

struct OuterData {
    std::vector<detail::OuterPt> pts;
    std::vector<double> eta;   // horizon at each point (0 for const family)
    std::vector<double> pref;  // cached eta-prefactor
};

OuterData build_outer(const Mesh& mesh, const PairCtx& ctx, const QuadratureSpec& quad) {
    OuterData od;
    if (mesh.dim == 1) {
        od.pts = detail::outer_points_1d(
            mesh, [&](double x) { return ctx.radius({x, 0.0}); }, quad.outer_order);
    } else {
        od.pts = detail::outer_points_2d(
            mesh, [&](Point p) { return ctx.radius(p); }, quad.outer_tri_degree);
    }
    od.eta.resize(od.pts.size());
    od.pref.resize(od.pts.size());
    for (size_t i = 0; i < od.pts.size(); ++i) {
        const double eta =
            ctx.kind == PairKind::ConstHorizon ? ctx.chp->delta : ctx.cfg->horizon(od.pts[i].x);
        od.eta[i] = eta;
        od.pref[i] = eta > 0.0 ? ctx.prefactor(eta) : 0.0;
    }
    return od;
}

// Shape-difference stencil of a pair: union DOF list with
// dN_k = phi_k(x) - phi_k(y).  Same-element pairs use the midpoint
// gradient, which is exact for P1/P2 and avoids the catastrophic
// cancellation that raw value differences suffer at t << h.  Energy,
// gradient and Hessian all evaluate through this one stencil, so the
// p = 2 identities (F(u) - F(0) = A u, u^T A u = 2 G) hold to rounding.
struct PairShape {
    int dofs[12];
    double dN[12];
    int n = 0;
};

inline void pair_shape(const FeSpace& sp, const PairPt& pr, PairShape& ps) {
    const int dpe = sp.dofs_per_elem();
    ps.n = 0;
    if (pr.ex == pr.ey) {
        const Point mid = {pr.x.x + 0.5 * pr.dxy.x, pr.x.y + 0.5 * pr.dxy.y};
        Point g[6];
        sp.shape_gradients(pr.ex, mid, g);
        for (int k = 0; k < dpe; ++k) {
            ps.dofs[ps.n] = sp.elem_dof(pr.ex, k);
            ps.dN[ps.n++] = -(g[k].x * pr.dxy.x + g[k].y * pr.dxy.y);
        }
        return;
    }
    double nx[6], ny[6];
    sp.shape_values(pr.ex, pr.x, nx);
    sp.shape_values(pr.ey, pr.y, ny);
    for (int k = 0; k < dpe; ++k) {
        ps.dofs[ps.n] = sp.elem_dof(pr.ex, k);
        ps.dN[ps.n++] = nx[k];
    }
    for (int k = 0; k < dpe; ++k) {
        const int dof = sp.elem_dof(pr.ey, k);
        bool merged = false;
        for (int j = 0; j < ps.n; ++j)
            if (ps.dofs[j] == dof) {
                ps.dN[j] -= ny[k];
                merged = true;
                break;
            }
        if (!merged) {
            ps.dofs[ps.n] = dof;
            ps.dN[ps.n++] = -ny[k];
        }
    }
}

inline double pair_diff(const DiscreteFunction& u, const PairShape& ps) {
    double d = 0.0;
    for (int k = 0; k < ps.n; ++k) d += u.coeff[ps.dofs[k]] * ps.dN[k];
    return d;
}

template <class PairFn>
void stream_outer_range(const Mesh& mesh, const PairCtx& ctx, const InnerRules& rules,
                        const QuadratureSpec& quad, const OuterData& od, size_t lo, size_t hi,
                        PairFn&& fn) {
    for (size_t i = lo; i < hi; ++i) {
        const auto& op = od.pts[i];
        if (op.radius <= 0.0) continue;
        if (mesh.dim == 1)
            inner_1d(mesh, ctx, rules, op.x, op.elem, op.radius, od.eta[i], od.pref[i], op.w, fn);
        else
            inner_2d(mesh, ctx, rules, quad, op.x, op.elem, op.radius, od.eta[i], od.pref[i], op.w,
                     fn);
    }
}

// sum of W |u(x)-u(y)|^p over all quadrature pairs
double pair_energy_sum(const DiscreteFunction& u, const PairCtx& ctx, const QuadratureSpec& quad) {
    const Mesh& mesh = u.space->mesh();
    const FeSpace& sp = *u.space;
    const OuterData od = build_outer(mesh, ctx, quad);
    const InnerRules rules = make_inner_rules(ctx, quad.inner_order);
    const double p = ctx.p;
    return blocked_reduce<double>(
        od.pts.size(), 64, 0.0,
        [&](size_t lo, size_t hi) {
            double acc = 0.0;
            PairShape ps;
            stream_outer_range(mesh, ctx, rules, quad, od, lo, hi, [&](const PairPt& pr) {
                pair_shape(sp, pr, ps);
                acc += pr.W * powp(std::abs(pair_diff(u, ps)), p);
            });
            return acc;
        },
        [](double a, double b) { return a + b; });
}

// gradient of (1/p) sum W |D|^p with respect to the coefficients
Eigen::VectorXd pair_energy_gradient(const DiscreteFunction& u, const PairCtx& ctx,
                                     const QuadratureSpec& quad) {
    const FeSpace& sp = *u.space;
    const Mesh& mesh = sp.mesh();
    const OuterData od = build_outer(mesh, ctx, quad);
    const InnerRules rules = make_inner_rules(ctx, quad.inner_order);
    const double p = ctx.p;

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(sp.ndof());
    return blocked_reduce<Eigen::VectorXd>(
        od.pts.size(), 64, zero,
        [&](size_t lo, size_t hi) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(sp.ndof());
            PairShape ps;
            stream_outer_range(mesh, ctx, rules, quad, od, lo, hi, [&](const PairPt& pr) {
                pair_shape(sp, pr, ps);
                const double D = pair_diff(u, ps);
                if (D == 0.0) return;
                const double c = pr.W * powp(std::abs(D), p - 2.0) * D;
                for (int k = 0; k < ps.n; ++k) g[ps.dofs[k]] += c * ps.dN[k];
            });
            return g;
        },
        [](Eigen::VectorXd a, const Eigen::VectorXd& b) -> Eigen::VectorXd { return a + b; });
}

// weighted Gauss-Newton Hessian  (p-1) sum W w(D) v v^T  with
// v_i = phi_i(x) - phi_i(y); w(D) = |D|^{p-2} (clamped from below by
// `floor` for the experimental 1<p<2 branch).
Eigen::SparseMatrix<double> pair_energy_hessian(const DiscreteFunction& u, const PairCtx& ctx,
                                                const QuadratureSpec& quad, double floor_abs) {
    const FeSpace& sp = *u.space;
    const Mesh& mesh = sp.mesh();
    const OuterData od = build_outer(mesh, ctx, quad);
    const InnerRules rules = make_inner_rules(ctx, quad.inner_order);
    const double p = ctx.p;

    std::vector<Eigen::Triplet<double>> trips;
    // per outer point: local dof union, dense local block
    std::vector<int> ldofs;
    std::vector<double> lmat;

    struct Entry {
        int idx[12];
        double val[12];
        int n;
        double coef;
    };
    std::vector<Entry> entries;
    PairShape ps;

    for (size_t i = 0; i < od.pts.size(); ++i) {
        ldofs.clear();
        entries.clear();
        auto local_index = [&](int dof) {
            for (size_t k = 0; k < ldofs.size(); ++k)
                if (ldofs[k] == dof) return static_cast<int>(k);
            ldofs.push_back(dof);
            return static_cast<int>(ldofs.size() - 1);
        };
        stream_outer_range(mesh, ctx, rules, quad, od, i, i + 1, [&](const PairPt& pr) {
            pair_shape(sp, pr, ps);
            double w = 1.0;
            if (p != 2.0) {
                double aD = std::abs(pair_diff(u, ps));
                if (p < 2.0) aD = std::max(aD, floor_abs);
                w = powp(aD, p - 2.0);
                if (!std::isfinite(w)) return;
            }
            Entry en;
            en.n = ps.n;
            en.coef = (p - 1.0) * pr.W * w;
            for (int k = 0; k < ps.n; ++k) {
                en.idx[k] = local_index(ps.dofs[k]);
                en.val[k] = ps.dN[k];
            }
            entries.push_back(en);
        });
        const int nl = static_cast<int>(ldofs.size());
        if (nl == 0) continue;
        lmat.assign(static_cast<size_t>(nl) * nl, 0.0);
        for (const auto& en : entries)
            for (int r = 0; r < en.n; ++r)
                for (int c = 0; c < en.n; ++c)
                    lmat[en.idx[r] * nl + en.idx[c]] += en.coef * en.val[r] * en.val[c];
        for (int r = 0; r < nl; ++r)
            for (int c = 0; c < nl; ++c)
                if (lmat[r * nl + c] != 0.0)
                    trips.emplace_back(ldofs[r], ldofs[c], lmat[r * nl + c]);
    }
    Eigen::SparseMatrix<double> H(sp.ndof(), sp.ndof());
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
}

PairCtx make_ctx(PairKind kind, const KernelConfig* cfg, const ConstHorizonParams* chp) {
    PairCtx ctx;
    ctx.kind = kind;
    ctx.cfg = cfg;
    ctx.chp = chp;
    if (kind == PairKind::ConstHorizon) {
        ctx.p = chp->p;
        ctx.beta = 0.0;
        ctx.d = chp->d;
    } else {
        ctx.p = cfg->p;
        ctx.beta = cfg->beta;
        ctx.d = cfg->d;
    }
    return ctx;
}

void check_dg_finite(const FeSpace& sp, double value, const char* what) {
    if (sp.continuity() == Continuity::DG && (!std::isfinite(value) || std::abs(value) > 1e100))
        throw std::runtime_error(std::string(what) + ": DG function failed the energy-finiteness check");
}

// ---------------------------------------------------------------------
// local family
// ---------------------------------------------------------------------

void local_quad_points(const Mesh& mesh, int e, int degree, std::vector<Point>& pts,
                       std::vector<double>& wts) {
    pts.clear();
    wts.clear();
    if (mesh.dim == 1) {
        const double x0 = mesh.vertices[mesh.elements[e][0]].x,
                     x1 = mesh.vertices[mesh.elements[e][1]].x;
        Rule1D r = gauss_on_interval(degree == 1 ? 2 : 5, x0, x1);
        for (size_t q = 0; q < r.nodes.size(); ++q) {
            pts.push_back({r.nodes[q], 0.0});
            wts.push_back(r.weights[q]);
        }
    } else {
        const auto& el = mesh.elements[e];
        const Point a = mesh.vertices[el[0]], b = mesh.vertices[el[1]], c = mesh.vertices[el[2]];
        const double area = mesh.elem_measure(e);
        const TriRule& tr = triangle_rule(degree == 1 ? 2 : 5);
        for (const auto& qp : tr.points) {
            pts.push_back(qp[0] * a + qp[1] * b + qp[2] * c);
            wts.push_back(qp[3] * area);
        }
    }
}

Eigen::VectorXd local_energy_gradient(const DiscreteFunction& u, double p) {
    const FeSpace& sp = *u.space;
    const Mesh& mesh = sp.mesh();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(sp.ndof());
    std::vector<Point> pts;
    std::vector<double> wts;
    Point gr[6];
    for (int e = 0; e < mesh.num_elements(); ++e) {
        local_quad_points(mesh, e, sp.degree(), pts, wts);
        for (size_t q = 0; q < pts.size(); ++q) {
            const Point gu = u.gradient(e, pts[q]);
            const double mag = norm(gu);
            if (mag == 0.0) continue;
            const double c = wts[q] * powp(mag, p - 2.0);
            sp.shape_gradients(e, pts[q], gr);
            for (int k = 0; k < sp.dofs_per_elem(); ++k)
                g[sp.elem_dof(e, k)] += c * (gu.x * gr[k].x + gu.y * gr[k].y);
        }
    }
    return g;
}

Eigen::SparseMatrix<double> local_energy_hessian(const DiscreteFunction& u, double p,
                                                 double floor_abs) {
    const FeSpace& sp = *u.space;
    const Mesh& mesh = sp.mesh();
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<Point> pts;
    std::vector<double> wts;
    Point gr[6];
    for (int e = 0; e < mesh.num_elements(); ++e) {
        local_quad_points(mesh, e, sp.degree(), pts, wts);
        for (size_t q = 0; q < pts.size(); ++q) {
            double w = 1.0;
            if (p != 2.0) {
                double mag = norm(u.gradient(e, pts[q]));
                if (p < 2.0) mag = std::max(mag, floor_abs);
                w = powp(mag, p - 2.0);
                if (!std::isfinite(w) || w == 0.0) continue;
            }
            const double c = (p - 1.0) * wts[q] * w;
            sp.shape_gradients(e, pts[q], gr);
            for (int a = 0; a < sp.dofs_per_elem(); ++a)
                for (int b = 0; b < sp.dofs_per_elem(); ++b)
                    trips.emplace_back(sp.elem_dof(e, a), sp.elem_dof(e, b),
                                       c * (gr[a].x * gr[b].x + gr[a].y * gr[b].y));
        }
    }
    Eigen::SparseMatrix<double> H(sp.ndof(), sp.ndof());
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
}

}  // namespace

// ---------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------

double seminorm_heterogeneous(const DiscreteFunction& u, const KernelConfig& cfg,
                              QuadratureSpec quad) {
    if (u.space->mesh().dim != cfg.d)
        throw std::invalid_argument("seminorm_heterogeneous: dimension mismatch");
    PairCtx ctx = make_ctx(PairKind::GammaHet, &cfg, nullptr);
    const double v = pair_energy_sum(u, ctx, quad);
    check_dg_finite(*u.space, v, "seminorm_heterogeneous");
    return v;
}

double energy_G_heterogeneous(const DiscreteFunction& u, const KernelConfig& cfg,
                              QuadratureSpec quad) {
    PairCtx ctx = make_ctx(PairKind::RhoHet, &cfg, nullptr);
    const double v = pair_energy_sum(u, ctx, quad) / cfg.p;
    check_dg_finite(*u.space, v, "energy_G_heterogeneous");
    return v;
}

double seminorm_const_horizon(const DiscreteFunction& u, const ConstHorizonParams& chp,
                              QuadratureSpec quad) {
    const Mesh& mesh = u.space->mesh();
    const double layer_width = mesh.extent.bx - mesh.domain.bx;
    if (chp.delta > layer_width + 1e-12)
        throw std::invalid_argument("seminorm_const_horizon: delta exceeds the mesh layer width");
    PairCtx ctx = make_ctx(PairKind::ConstHorizon, nullptr, &chp);
    return pair_energy_sum(u, ctx, quad);
}

double energy_local(const DiscreteFunction& u, double p) {
    if (u.space->continuity() == Continuity::DG)
        throw std::invalid_argument("energy_local: rejected for DG spaces");
    const double s = w1p_seminorm(u, p);
    return powp(s, p) / p;
}

double compatibility_residual(const LoadFunctional& f, const Mesh& mesh) {
    double acc = 0.0;
    if (f.f0) {
        for (int e = 0; e < mesh.num_elements(); ++e) {
            if (!mesh.elem_is_interior(e)) continue;
            if (mesh.dim == 1) {
                const double x0 = mesh.vertices[mesh.elements[e][0]].x,
                             x1 = mesh.vertices[mesh.elements[e][1]].x;
                Rule1D r = gauss_on_interval(10, x0, x1);
                for (size_t q = 0; q < r.nodes.size(); ++q)
                    acc += r.weights[q] * f.f0({r.nodes[q], 0.0});
            } else {
                const auto& el = mesh.elements[e];
                const Point a = mesh.vertices[el[0]], b = mesh.vertices[el[1]],
                            c = mesh.vertices[el[2]];
                const double area = mesh.elem_measure(e);
                const TriRule& tr = triangle_rule(5);
                for (const auto& qp : tr.points)
                    acc += qp[3] * area * f.f0(qp[0] * a + qp[1] * b + qp[2] * c);
            }
        }
    }
    if (f.g) {
        const Domain& dom = mesh.domain;
        if (mesh.dim == 1) {
            acc += f.g({dom.ax, 0.0}) + f.g({dom.bx, 0.0});
        } else {
            // base-domain boundary: four straight sides
            auto side = [&](Point a, Point b) {
                Rule1D r = gauss_on_interval(8, 0.0, 1.0);
                const double len = norm(b - a);
                for (size_t q = 0; q < r.nodes.size(); ++q)
                    acc += r.weights[q] * len * f.g(a + r.nodes[q] * (b - a));
            };
            side({dom.ax, dom.ay}, {dom.bx, dom.ay});
            side({dom.bx, dom.ay}, {dom.bx, dom.by});
            side({dom.bx, dom.by}, {dom.ax, dom.by});
            side({dom.ax, dom.by}, {dom.ax, dom.ay});
        }
    }
    return acc;
}

namespace {

// <f, v> by direct quadrature (also the building block for the plain
// load vector, via v = phi_i).
template <class AddTerm>
void plain_load_loop(const LoadFunctional& f, const FeSpace& sp, AddTerm&& add) {
    const Mesh& mesh = sp.mesh();
    std::vector<Point> pts;
    std::vector<double> wts;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!mesh.elem_is_interior(e)) continue;
        if (mesh.dim == 1) {
            const double x0 = mesh.vertices[mesh.elements[e][0]].x,
                         x1 = mesh.vertices[mesh.elements[e][1]].x;
            Rule1D r = gauss_on_interval(8, x0, x1);
            pts.clear();
            wts.clear();
            for (size_t q = 0; q < r.nodes.size(); ++q) {
                pts.push_back({r.nodes[q], 0.0});
                wts.push_back(r.weights[q]);
            }
        } else {
            const auto& el = mesh.elements[e];
            const Point a = mesh.vertices[el[0]], b = mesh.vertices[el[1]],
                        c = mesh.vertices[el[2]];
            const double area = mesh.elem_measure(e);
            const TriRule& tr = triangle_rule(5);
            pts.clear();
            wts.clear();
            for (const auto& qp : tr.points) {
                pts.push_back(qp[0] * a + qp[1] * b + qp[2] * c);
                wts.push_back(qp[3] * area);
            }
        }
        for (size_t q = 0; q < pts.size(); ++q) {
            const double f0v = f.f0 ? f.f0(pts[q]) : 0.0;
            const double f1x = f.f1x ? f.f1x(pts[q]) : 0.0;
            const double f1y = f.f1y ? f.f1y(pts[q]) : 0.0;
            add(e, pts[q], wts[q], f0v, f1x, f1y);
        }
    }
}

template <class AddBdry>
void boundary_load_loop(const LoadFunctional& f, const Mesh& mesh, AddBdry&& add) {
    if (!f.g) return;
    const Domain& dom = mesh.domain;
    if (mesh.dim == 1) {
        add({dom.ax, 0.0}, 1.0);
        add({dom.bx, 0.0}, 1.0);
        return;
    }
    auto side = [&](Point a, Point b) {
        Rule1D r = gauss_on_interval(8, 0.0, 1.0);
        const double len = norm(b - a);
        for (size_t q = 0; q < r.nodes.size(); ++q) add(a + r.nodes[q] * (b - a), r.weights[q] * len);
    };
    side({dom.ax, dom.ay}, {dom.bx, dom.ay});
    side({dom.bx, dom.ay}, {dom.bx, dom.by});
    side({dom.bx, dom.by}, {dom.ax, dom.by});
    side({dom.ax, dom.by}, {dom.ax, dom.ay});
}

}  // namespace

double load_pairing(const LoadFunctional& f, const DiscreteFunction& v, bool check_neumann) {
    const FeSpace& sp = *v.space;
    if (check_neumann) {
        const double res = compatibility_residual(f, sp.mesh());
        if (std::abs(res) > 1e-10) throw CompatibilityError(res);
    }
    if ((f.f1x || f.f1y) && sp.continuity() == Continuity::DG)
        throw std::invalid_argument("load_pairing: flux term needs a W^{1,p} argument (CG)");
    double acc = 0.0;
    plain_load_loop(f, sp, [&](int e, Point p, double w, double f0v, double f1x, double f1y) {
        if (f0v != 0.0) acc += w * f0v * v.value(e, p);
        if (f1x != 0.0 || f1y != 0.0) {
            const Point g = v.gradient(e, p);
            acc += w * (f1x * g.x + f1y * g.y);
        }
    });
    boundary_load_loop(f, sp.mesh(), [&](Point p, double w) {
        const int e = sp.mesh().locate(p);
        if (e >= 0) acc += w * f.g(p) * v.value(e, p);
    });
    return acc;
}

Eigen::VectorXd mean_vector(const FeSpace& sp) {
    // m_i = int_Omega phi_i, via interpolation-exact rules per degree
    Eigen::VectorXd m = Eigen::VectorXd::Zero(sp.ndof());
    const Mesh& mesh = sp.mesh();
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!mesh.elem_is_interior(e)) continue;
        const double meas = mesh.elem_measure(e);
        if (mesh.dim == 1) {
            if (sp.degree() == 1) {
                m[sp.elem_dof(e, 0)] += 0.5 * meas;
                m[sp.elem_dof(e, 1)] += 0.5 * meas;
            } else {
                m[sp.elem_dof(e, 0)] += meas / 6.0;
                m[sp.elem_dof(e, 1)] += meas / 6.0;
                m[sp.elem_dof(e, 2)] += 4.0 * meas / 6.0;
            }
        } else {
            if (sp.degree() == 1) {
                for (int k = 0; k < 3; ++k) m[sp.elem_dof(e, k)] += meas / 3.0;
            } else {
                for (int k = 3; k < 6; ++k) m[sp.elem_dof(e, k)] += meas / 3.0;
            }
        }
    }
    return m;
}

Eigen::VectorXd load_vector(const EnergyModel& model) {
    const FeSpace& sp = *model.space;
    Eigen::VectorXd b;
    if (is_het(model.family)) {
        b = smoothed_load_vector(model.load, sp, *model.kernel, model.quad);
    } else {
        b = Eigen::VectorXd::Zero(sp.ndof());
        double nv[6];
        Point gr[6];
        plain_load_loop(model.load, sp,
                        [&](int e, Point p, double w, double f0v, double f1x, double f1y) {
                            sp.shape_values(e, p, nv);
                            if (f1x != 0.0 || f1y != 0.0) sp.shape_gradients(e, p, gr);
                            for (int k = 0; k < sp.dofs_per_elem(); ++k) {
                                double t = f0v * nv[k];
                                if (f1x != 0.0 || f1y != 0.0)
                                    t += f1x * gr[k].x + f1y * gr[k].y;
                                b[sp.elem_dof(e, k)] += w * t;
                            }
                        });
        boundary_load_loop(model.load, sp.mesh(), [&](Point p, double w) {
            const int e = sp.mesh().locate(p);
            if (e < 0) return;
            sp.shape_values(e, p, nv);
            for (int k = 0; k < sp.dofs_per_elem(); ++k)
                b[sp.elem_dof(e, k)] += w * model.load.g(p) * nv[k];
        });
    }
    for (int i : sp.pinned_dofs()) b[i] = 0.0;
    return b;
}

double energy_total(const DiscreteFunction& u, const EnergyModel& model) {
    switch (model.family) {
        case Family::HetNeumann:
        case Family::HetDirichlet:
            return energy_G_heterogeneous(u, *model.kernel, model.quad) -
                   smoothed_load_pairing(model.load, u, *model.kernel, model.quad);
        case Family::ConstDirichlet:
            return seminorm_const_horizon(u, *model.chp, model.quad) / model.chp->p -
                   load_pairing(model.load, u);
        default:
            return energy_local(u, model.p()) - load_pairing(model.load, u);
    }
}

DualVector first_variation(const DiscreteFunction& u, const EnergyModel& model) {
    const FeSpace& sp = *model.space;
    Eigen::VectorXd g;
    if (is_local(model.family)) {
        g = local_energy_gradient(u, model.p());
    } else if (model.family == Family::ConstDirichlet) {
        PairCtx ctx = make_ctx(PairKind::ConstHorizon, nullptr, &*model.chp);
        g = pair_energy_gradient(u, ctx, model.quad);
    } else {
        PairCtx ctx = make_ctx(PairKind::RhoHet, &*model.kernel, nullptr);
        g = pair_energy_gradient(u, ctx, model.quad);
    }
    g -= load_vector(model);
    for (int i : sp.pinned_dofs()) g[i] = 0.0;
    return DualVector{&sp, std::move(g)};
}

Eigen::SparseMatrix<double> assemble_hessian(const DiscreteFunction& u, const EnergyModel& model,
                                             double degenerate_floor) {
    if (is_local(model.family)) return local_energy_hessian(u, model.p(), degenerate_floor);
    if (model.family == Family::ConstDirichlet) {
        PairCtx ctx = make_ctx(PairKind::ConstHorizon, nullptr, &*model.chp);
        return pair_energy_hessian(u, ctx, model.quad, degenerate_floor);
    }
    PairCtx ctx = make_ctx(PairKind::RhoHet, &*model.kernel, nullptr);
    return pair_energy_hessian(u, ctx, model.quad, degenerate_floor);
}

Eigen::SparseMatrix<double> assemble_stiffness_p2(const EnergyModel& model) {
    if (model.p() != 2.0)
        throw std::invalid_argument("assemble_stiffness_p2: rejected for p != 2");
    DiscreteFunction zero;
    zero.space = model.space;
    zero.coeff = Eigen::VectorXd::Zero(model.space->ndof());
    return assemble_hessian(zero, model, 0.0);
}

void write_sparse_coo(std::ostream& os, const Eigen::SparseMatrix<double>& A) {
    os.precision(17);
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

namespace {

void check_family_constraint(Family family, const FeSpace& sp) {
    const Constraint c = sp.constraint();
    bool ok = false;
    switch (family) {
        case Family::HetNeumann:
        case Family::LocalNeumann:
            ok = (c == Constraint::ZeroMean);
            break;
        case Family::HetDirichlet:
        case Family::LocalDirichlet:
            ok = (c == Constraint::ZeroTrace);
            break;
        case Family::ConstDirichlet:
            ok = (c == Constraint::ZeroVolumeLayer);
            break;
    }
    if (!ok) throw std::invalid_argument("model: family/constraint mismatch");
}

void check_neumann_load(Family family, const LoadFunctional& load, const Mesh& mesh) {
    if (!is_neumann(family)) return;
    const double res = compatibility_residual(load, mesh);
    if (std::abs(res) > 1e-10) throw CompatibilityError(res);
}

}  // namespace

EnergyModel make_het_model(Family family, const FeSpace& space, const KernelConfig& cfg,
                           LoadFunctional load, QuadratureSpec quad) {
    if (!is_het(family)) throw std::invalid_argument("make_het_model: not a het family");
    check_family_constraint(family, space);
    if (space.mesh().dim != cfg.d) throw std::invalid_argument("make_het_model: dimension mismatch");
    check_neumann_load(family, load, space.mesh());
    EnergyModel m;
    m.family = family;
    m.space = &space;
    m.kernel = cfg;
    m.load = std::move(load);
    m.quad = quad;
    return m;
}

EnergyModel make_const_model(const FeSpace& space, const ConstHorizonParams& chp,
                             LoadFunctional load, QuadratureSpec quad) {
    check_family_constraint(Family::ConstDirichlet, space);
    const Mesh& mesh = space.mesh();
    const double layer_width = mesh.extent.bx - mesh.domain.bx;
    if (chp.delta > layer_width + 1e-12)
        throw std::invalid_argument("make_const_model: delta exceeds the mesh layer width");
    if (chp.delta > 0.25 * mesh.domain.diameter())
        throw std::invalid_argument("make_const_model: delta exceeds the Poincare threshold policy "
                                    "(0.25 * diam)");
    EnergyModel m;
    m.family = Family::ConstDirichlet;
    m.space = &space;
    m.chp = chp;
    m.load = std::move(load);
    m.quad = quad;
    return m;
}

EnergyModel make_local_model(Family family, const FeSpace& space, double p, LoadFunctional load,
                             QuadratureSpec quad) {
    if (!is_local(family)) throw std::invalid_argument("make_local_model: not a local family");
    check_family_constraint(family, space);
    check_neumann_load(family, load, space.mesh());
    EnergyModel m;
    m.family = family;
    m.space = &space;
    m.p_local = p;
    m.load = std::move(load);
    m.quad = quad;
    return m;
}

}  // namespace nlac
