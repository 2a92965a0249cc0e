#include "nlac/femspace.hpp"

#include "nlac/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace nlac {

namespace {

bool on_base_boundary(const Domain& base, Point p, double tol) {
    if (base.dim == 1) return std::abs(p.x - base.ax) <= tol || std::abs(p.x - base.bx) <= tol;
    if (!base.contains(p, tol)) return false;
    return std::abs(p.x - base.ax) <= tol || std::abs(p.x - base.bx) <= tol ||
           std::abs(p.y - base.ay) <= tol || std::abs(p.y - base.by) <= tol;
}

bool strictly_inside(const Domain& base, Point p, double tol) {
    if (base.dim == 1) return p.x > base.ax + tol && p.x < base.bx - tol;
    return p.x > base.ax + tol && p.x < base.bx - tol && p.y > base.ay + tol && p.y < base.by - tol;
}

}  // namespace

FeSpace::FeSpace(const Mesh& mesh, int degree, Continuity continuity, Constraint constraint)
    : mesh_(&mesh), degree_(degree), cont_(continuity), constr_(constraint) {
    if (degree != 1 && degree != 2) throw std::invalid_argument("FeSpace: degree must be 1 or 2");
    if (continuity == Continuity::DG &&
        (constraint == Constraint::ZeroTrace || constraint == Constraint::ZeroMean))
        throw std::invalid_argument("FeSpace: zero-trace/zero-mean require a CG space");

    const int ne = mesh.num_elements();
    const int vpe = mesh.verts_per_elem();
    dpe_ = (mesh.dim == 1) ? (degree + 1) : (degree == 1 ? 3 : 6);
    elem_dofs_.resize(static_cast<size_t>(ne) * dpe_);

    if (cont_ == Continuity::DG) {
        ndof_ = ne * dpe_;
        dof_points_.resize(ndof_);
        for (int e = 0; e < ne; ++e)
            for (int k = 0; k < dpe_; ++k) elem_dofs_[e * dpe_ + k] = e * dpe_ + k;
    } else {
        // CG: vertex DOFs first (mesh order), then edge/midpoint DOFs.
        const int nv = static_cast<int>(mesh.vertices.size());
        int next = nv;
        std::map<std::pair<int, int>, int> edge_dof;
        for (int e = 0; e < ne; ++e) {
            for (int k = 0; k < vpe; ++k) elem_dofs_[e * dpe_ + k] = mesh.elements[e][k];
            if (degree == 2) {
                if (mesh.dim == 1) {
                    elem_dofs_[e * dpe_ + 2] = next++;
                } else {
                    static const int ed[3][2] = {{0, 1}, {1, 2}, {2, 0}};
                    for (int s = 0; s < 3; ++s) {
                        int a = mesh.elements[e][ed[s][0]], b = mesh.elements[e][ed[s][1]];
                        auto key = std::minmax(a, b);
                        auto it = edge_dof.find(key);
                        if (it == edge_dof.end()) it = edge_dof.emplace(key, next++).first;
                        elem_dofs_[e * dpe_ + 3 + s] = it->second;
                    }
                }
            }
        }
        ndof_ = next;
        dof_points_.resize(ndof_);
    }

    // DOF coordinates
    for (int e = 0; e < ne; ++e) {
        const auto& el = mesh.elements[e];
        if (mesh.dim == 1) {
            const Point a = mesh.vertices[el[0]], b = mesh.vertices[el[1]];
            dof_points_[elem_dofs_[e * dpe_ + 0]] = a;
            dof_points_[elem_dofs_[e * dpe_ + 1]] = b;
            if (degree_ == 2) dof_points_[elem_dofs_[e * dpe_ + 2]] = {0.5 * (a.x + b.x), 0.0};
        } else {
            for (int k = 0; k < 3; ++k) dof_points_[elem_dofs_[e * dpe_ + k]] = mesh.vertices[el[k]];
            if (degree_ == 2) {
                static const int ed[3][2] = {{0, 1}, {1, 2}, {2, 0}};
                for (int s = 0; s < 3; ++s) {
                    const Point a = mesh.vertices[el[ed[s][0]]], b = mesh.vertices[el[ed[s][1]]];
                    dof_points_[elem_dofs_[e * dpe_ + 3 + s]] = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
                }
            }
        }
    }

    // Constraints
    pinned_.assign(ndof_, 0);
    const double tol = 1e-12 * std::max(1.0, mesh.extent.diameter());
    if (constr_ == Constraint::ZeroTrace) {
        for (int i = 0; i < ndof_; ++i)
            if (on_base_boundary(mesh.domain, dof_points_[i], tol)) pinned_[i] = 1;
    } else if (constr_ == Constraint::ZeroVolumeLayer) {
        // zero extension: every DOF not strictly inside Omega is pinned
        for (int i = 0; i < ndof_; ++i)
            if (!strictly_inside(mesh.domain, dof_points_[i], tol)) pinned_[i] = 1;
    }
    for (int i = 0; i < ndof_; ++i)
        if (pinned_[i]) pinned_list_.push_back(i);
    free_count_ = ndof_ - static_cast<int>(pinned_list_.size());
}

void FeSpace::shape_values(int e, Point p, double* v) const {
    const Mesh& m = *mesh_;
    const auto& el = m.elements[e];
    if (m.dim == 1) {
        const double x0 = m.vertices[el[0]].x, x1 = m.vertices[el[1]].x;
        const double t = (p.x - x0) / (x1 - x0);
        if (degree_ == 1) {
            v[0] = 1.0 - t;
            v[1] = t;
        } else {
            v[0] = (1.0 - t) * (1.0 - 2.0 * t);
            v[1] = t * (2.0 * t - 1.0);
            v[2] = 4.0 * t * (1.0 - t);
        }
        return;
    }
    const Point a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const double l1 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / det;
    const double l2 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / det;
    const double l3 = 1.0 - l1 - l2;
    if (degree_ == 1) {
        v[0] = l1;
        v[1] = l2;
        v[2] = l3;
    } else {
        v[0] = l1 * (2.0 * l1 - 1.0);
        v[1] = l2 * (2.0 * l2 - 1.0);
        v[2] = l3 * (2.0 * l3 - 1.0);
        v[3] = 4.0 * l1 * l2;
        v[4] = 4.0 * l2 * l3;
        v[5] = 4.0 * l3 * l1;
    }
}

void FeSpace::shape_gradients(int e, Point p, Point* g) const {
    const Mesh& m = *mesh_;
    const auto& el = m.elements[e];
    if (m.dim == 1) {
        const double x0 = m.vertices[el[0]].x, x1 = m.vertices[el[1]].x;
        const double h = x1 - x0;
        const double t = (p.x - x0) / h;
        if (degree_ == 1) {
            g[0] = {-1.0 / h, 0.0};
            g[1] = {1.0 / h, 0.0};
        } else {
            g[0] = {(4.0 * t - 3.0) / h, 0.0};
            g[1] = {(4.0 * t - 1.0) / h, 0.0};
            g[2] = {(4.0 - 8.0 * t) / h, 0.0};
        }
        return;
    }
    const Point a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const Point gl1 = {(b.y - c.y) / det, (c.x - b.x) / det};
    const Point gl2 = {(c.y - a.y) / det, (a.x - c.x) / det};
    const Point gl3 = {(a.y - b.y) / det, (b.x - a.x) / det};
    if (degree_ == 1) {
        g[0] = gl1;
        g[1] = gl2;
        g[2] = gl3;
        return;
    }
    const double l1 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / det;
    const double l2 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / det;
    const double l3 = 1.0 - l1 - l2;
    g[0] = (4.0 * l1 - 1.0) * gl1;
    g[1] = (4.0 * l2 - 1.0) * gl2;
    g[2] = (4.0 * l3 - 1.0) * gl3;
    g[3] = 4.0 * (l2 * gl1 + l1 * gl2);
    g[4] = 4.0 * (l3 * gl2 + l2 * gl3);
    g[5] = 4.0 * (l1 * gl3 + l3 * gl1);
}

double DiscreteFunction::value(int elem, Point p) const {
    double v[6];
    space->shape_values(elem, p, v);
    double s = 0.0;
    for (int k = 0; k < space->dofs_per_elem(); ++k) s += coeff[space->elem_dof(elem, k)] * v[k];
    return s;
}

Point DiscreteFunction::gradient(int elem, Point p) const {
    Point g[6];
    space->shape_gradients(elem, p, g);
    Point s{0.0, 0.0};
    for (int k = 0; k < space->dofs_per_elem(); ++k) {
        const double c = coeff[space->elem_dof(elem, k)];
        s.x += c * g[k].x;
        s.y += c * g[k].y;
    }
    return s;
}

double DiscreteFunction::value_global(Point p) const {
    const int e = space->mesh().locate(p);
    if (e < 0) return 0.0;
    return value(e, p);
}

DiscreteFunction interpolate(const FeSpace& space, const std::function<double(Point)>& f) {
    DiscreteFunction u;
    u.space = &space;
    u.coeff = Eigen::VectorXd::Zero(space.ndof());

    if (space.continuity() == Continuity::CG) {
        for (int i = 0; i < space.ndof(); ++i) {
            const double v = f(space.dof_point(i));
            if (!std::isfinite(v)) throw std::invalid_argument("interpolate: non-finite value at DOF");
            u.coeff[i] = v;
        }
    } else {
        // per-element L2 projection
        const Mesh& m = space.mesh();
        const int k = space.dofs_per_elem();
        Eigen::MatrixXd M(k, k);
        Eigen::VectorXd rhs(k);
        double sv[6];
        for (int e = 0; e < m.num_elements(); ++e) {
            M.setZero();
            rhs.setZero();
            if (m.dim == 1) {
                const double x0 = m.vertices[m.elements[e][0]].x,
                             x1 = m.vertices[m.elements[e][1]].x;
                Rule1D r = gauss_on_interval(6, x0, x1);
                for (size_t q = 0; q < r.nodes.size(); ++q) {
                    const Point p{r.nodes[q], 0.0};
                    space.shape_values(e, p, sv);
                    const double fv = f(p);
                    for (int i = 0; i < k; ++i) {
                        rhs[i] += r.weights[q] * fv * sv[i];
                        for (int j = 0; j < k; ++j) M(i, j) += r.weights[q] * sv[i] * sv[j];
                    }
                }
            } else {
                const TriRule& tr = triangle_rule(5);
                const auto& el = m.elements[e];
                const Point a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
                const double area = m.elem_measure(e);
                for (const auto& qp : tr.points) {
                    const Point p = qp[0] * a + qp[1] * b + qp[2] * c;
                    const double w = qp[3] * area;
                    space.shape_values(e, p, sv);
                    const double fv = f(p);
                    for (int i = 0; i < k; ++i) {
                        rhs[i] += w * fv * sv[i];
                        for (int j = 0; j < k; ++j) M(i, j) += w * sv[i] * sv[j];
                    }
                }
            }
            Eigen::VectorXd local = M.ldlt().solve(rhs);
            for (int i = 0; i < k; ++i) u.coeff[space.elem_dof(e, i)] = local[i];
        }
    }

    if (space.constraint() == Constraint::ZeroMean) {
        const double mean = mean_value(u);
        u.coeff.array() -= mean;  // nodal bases form a partition of unity
    }
    for (int i : space.pinned_dofs()) u.coeff[i] = 0.0;
    return u;
}

double mean_value(const DiscreteFunction& u) {
    const FeSpace& sp = *u.space;
    const Mesh& m = sp.mesh();
    double integral = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        if (!m.elem_is_interior(e)) continue;
        const double meas = m.elem_measure(e);
        if (m.dim == 1) {
            if (sp.degree() == 1) {
                integral += meas * 0.5 * (u.coeff[sp.elem_dof(e, 0)] + u.coeff[sp.elem_dof(e, 1)]);
            } else {
                integral += meas / 6.0 *
                            (u.coeff[sp.elem_dof(e, 0)] + u.coeff[sp.elem_dof(e, 1)] +
                             4.0 * u.coeff[sp.elem_dof(e, 2)]);
            }
        } else {
            if (sp.degree() == 1) {
                integral += meas / 3.0 *
                            (u.coeff[sp.elem_dof(e, 0)] + u.coeff[sp.elem_dof(e, 1)] +
                             u.coeff[sp.elem_dof(e, 2)]);
            } else {
                // midpoint-value rule is exact for quadratics
                integral += meas / 3.0 *
                            (u.coeff[sp.elem_dof(e, 3)] + u.coeff[sp.elem_dof(e, 4)] +
                             u.coeff[sp.elem_dof(e, 5)]);
            }
        }
    }
    return integral / m.domain.measure();
}

namespace {

bool is_even_integer(double p) {
    const double r = std::round(p);
    return std::abs(p - r) < 1e-12 && static_cast<long long>(r) % 2 == 0;
}

bool is_integer(double p) { return std::abs(p - std::round(p)) < 1e-12; }

// int_a^b |poly(x)|^p via Gauss, splitting at the roots in (a,b).
double abs_pow_integral_1d(const std::function<double(double)>& f, double a, double b, double p,
                           const std::vector<double>& roots) {
    std::vector<double> brk = {a, b};
    for (double r : roots)
        if (r > a + 1e-15 && r < b - 1e-15) brk.push_back(r);
    std::sort(brk.begin(), brk.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < brk.size(); ++i) {
        Rule1D r = gauss_on_interval(10, brk[i], brk[i + 1]);
        double s = 0.0;
        for (size_t q = 0; q < r.nodes.size(); ++q)
            s += r.weights[q] * std::pow(std::abs(f(r.nodes[q])), p);
        total += s;
    }
    return total;
}

// adaptive triangle integration by uniform 4-subdivision
double tri_adaptive(const std::function<double(Point)>& f, Point a, Point b, Point c, double area,
                    double tol, int depth) {
    const TriRule& tr = triangle_rule(5);
    auto eval = [&](Point p1, Point p2, Point p3, double ar) {
        double s = 0.0;
        for (const auto& qp : tr.points) s += qp[3] * f(qp[0] * p1 + qp[1] * p2 + qp[2] * p3);
        return s * ar;
    };
    const double whole = eval(a, b, c, area);
    const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    const double quarter = 0.25 * area;
    const double refined = eval(a, ab, ca, quarter) + eval(ab, b, bc, quarter) +
                           eval(ca, bc, c, quarter) + eval(ab, bc, ca, quarter);
    if (depth <= 0 || std::abs(refined - whole) <= tol * std::max(1.0, std::abs(refined)))
        return refined;
    double s = 0.0;
    s += tri_adaptive(f, a, ab, ca, quarter, 0.5 * tol, depth - 1);
    s += tri_adaptive(f, ab, b, bc, quarter, 0.5 * tol, depth - 1);
    s += tri_adaptive(f, ca, bc, c, quarter, 0.5 * tol, depth - 1);
    s += tri_adaptive(f, ab, bc, ca, quarter, 0.5 * tol, depth - 1);
    return s;
}

}  // namespace

double lp_norm(const DiscreteFunction& u, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const FeSpace& sp = *u.space;
    const Mesh& m = sp.mesh();
    double total = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        if (m.dim == 1) {
            const double x0 = m.vertices[m.elements[e][0]].x, x1 = m.vertices[m.elements[e][1]].x;
            auto fe = [&](double x) { return u.value(e, {x, 0.0}); };
            if (is_even_integer(p)) {
                const int nodes = static_cast<int>(sp.degree() * p) / 2 + 2;
                Rule1D r = gauss_on_interval(nodes, x0, x1);
                for (size_t q = 0; q < r.nodes.size(); ++q)
                    total += r.weights[q] * std::pow(fe(r.nodes[q]), p);
            } else if (is_integer(p)) {
                // split at the roots of the local polynomial
                std::vector<double> roots;
                const double c0 = fe(x0), c1 = fe(x1);
                if (sp.degree() == 1) {
                    if ((c0 < 0) != (c1 < 0) && c0 != c1) roots.push_back(x0 + (x1 - x0) * c0 / (c0 - c1));
                } else {
                    // quadratic through endpoints and midpoint
                    const double cm = fe(0.5 * (x0 + x1));
                    const double A = 2.0 * (c0 + c1) - 4.0 * cm, B = -3.0 * c0 - c1 + 4.0 * cm, C = c0;
                    if (std::abs(A) > 1e-300) {
                        const double disc = B * B - 4.0 * A * C;
                        if (disc >= 0.0) {
                            const double sq = std::sqrt(disc);
                            roots.push_back(x0 + (x1 - x0) * (-B + sq) / (2.0 * A));
                            roots.push_back(x0 + (x1 - x0) * (-B - sq) / (2.0 * A));
                        }
                    } else if (std::abs(B) > 1e-300) {
                        roots.push_back(x0 + (x1 - x0) * (-C / B));
                    }
                }
                total += abs_pow_integral_1d(fe, x0, x1, p, roots);
            } else {
                total += integrate_adaptive(
                    [&](double x) { return std::pow(std::abs(fe(x)), p); }, x0, x1, 1e-10);
            }
        } else {
            const auto& el = m.elements[e];
            const Point a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
            const double area = m.elem_measure(e);
            const int need = static_cast<int>(std::ceil(sp.degree() * p));
            if (is_even_integer(p) && need <= 5) {
                const TriRule& tr = triangle_rule(need);
                for (const auto& qp : tr.points)
                    total += qp[3] * area * std::pow(u.value(e, qp[0] * a + qp[1] * b + qp[2] * c), p);
            } else {
                total += tri_adaptive([&](Point pt) { return std::pow(std::abs(u.value(e, pt)), p); },
                                      a, b, c, area, 1e-10, 12);
            }
        }
    }
    return std::pow(total, 1.0 / p);
}

double w1p_seminorm(const DiscreteFunction& u, double p) {
    const FeSpace& sp = *u.space;
    if (sp.continuity() == Continuity::DG)
        throw std::invalid_argument("w1p_seminorm: rejected for DG spaces");
    const Mesh& m = sp.mesh();
    double total = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        if (sp.degree() == 1) {
            total += m.elem_measure(e) * std::pow(norm(u.gradient(e, m.elem_centroid(e))), p);
            continue;
        }
        if (m.dim == 1) {
            const double x0 = m.vertices[m.elements[e][0]].x, x1 = m.vertices[m.elements[e][1]].x;
            auto dfe = [&](double x) { return u.gradient(e, {x, 0.0}).x; };
            if (is_even_integer(p)) {
                Rule1D r = gauss_on_interval(static_cast<int>(p) + 2, x0, x1);
                for (size_t q = 0; q < r.nodes.size(); ++q)
                    total += r.weights[q] * std::pow(dfe(r.nodes[q]), p);
            } else {
                // u' is linear: split at its single root
                std::vector<double> roots;
                const double d0 = dfe(x0), d1 = dfe(x1);
                if ((d0 < 0) != (d1 < 0) && d0 != d1) roots.push_back(x0 + (x1 - x0) * d0 / (d0 - d1));
                total += abs_pow_integral_1d(dfe, x0, x1, p, roots);
            }
        } else {
            const auto& el = m.elements[e];
            const Point a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
            const double area = m.elem_measure(e);
            if (is_even_integer(p) && p <= 5.0) {
                const TriRule& tr = triangle_rule(static_cast<int>(p));
                for (const auto& qp : tr.points)
                    total += qp[3] * area *
                             std::pow(norm(u.gradient(e, qp[0] * a + qp[1] * b + qp[2] * c)), p);
            } else {
                total += tri_adaptive([&](Point pt) { return std::pow(norm(u.gradient(e, pt)), p); },
                                      a, b, c, area, 1e-10, 12);
            }
        }
    }
    return std::pow(total, 1.0 / p);
}

double lp_error(const DiscreteFunction& u, const std::function<double(Point)>& f, double p) {
    const FeSpace& sp = *u.space;
    const Mesh& m = sp.mesh();
    double total = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        if (!m.elem_is_interior(e)) continue;
        if (m.dim == 1) {
            const double x0 = m.vertices[m.elements[e][0]].x, x1 = m.vertices[m.elements[e][1]].x;
            Rule1D r = gauss_on_interval(8, x0, x1);
            for (size_t q = 0; q < r.nodes.size(); ++q) {
                const Point pt{r.nodes[q], 0.0};
                total += r.weights[q] * std::pow(std::abs(u.value(e, pt) - f(pt)), p);
            }
        } else {
            const auto& el = m.elements[e];
            const Point a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
            const double area = m.elem_measure(e);
            const TriRule& tr = triangle_rule(5);
            for (const auto& qp : tr.points) {
                const Point pt = qp[0] * a + qp[1] * b + qp[2] * c;
                total += qp[3] * area * std::pow(std::abs(u.value(e, pt) - f(pt)), p);
            }
        }
    }
    return std::pow(total, 1.0 / p);
}

DiscreteFunction prolong(const DiscreteFunction& u, const FeSpace& fine) {
    DiscreteFunction out;
    out.space = &fine;
    out.coeff = Eigen::VectorXd::Zero(fine.ndof());
    for (int i = 0; i < fine.ndof(); ++i) out.coeff[i] = u.value_global(fine.dof_point(i));
    return out;
}

void write_coefficients(std::ostream& os, const DiscreteFunction& u) {
    os.precision(17);
    for (Eigen::Index i = 0; i < u.coeff.size(); ++i) os << u.coeff[i] << "\n";
}

Eigen::VectorXd read_coefficients(std::istream& is) {
    std::vector<double> vals;
    double v;
    while (is >> v) vals.push_back(v);
    Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) out[static_cast<Eigen::Index>(i)] = vals[i];
    return out;
}

}  // namespace nlac
