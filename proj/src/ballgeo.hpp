#pragma once

// Internal helpers for quadrature on interaction balls: outer-point
// construction with kink-zone splitting (1D), and candidate/crossing
// geometry for the 2D polar path.  Not installed; assembly and
// convolution share this machinery.

#include "nlac/geometry.hpp"
#include "nlac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

namespace nlac::detail {

struct OuterPt {
    Point x;
    double w = 0.0;
    int elem = -1;
    double radius = 0.0;
};

// 1D outer quadrature with splits where the moving ball boundary
// x +- r(x) crosses a mesh vertex; requires |r'| < 1 so the crossing
// equation is monotone.  inner(x) is smooth on each resulting piece.
inline std::vector<OuterPt> outer_points_1d(const Mesh& mesh,
                                            const std::function<double(double)>& radius,
                                            int order, bool interior_only = false) {
    std::vector<OuterPt> out;
    const Rule1D& gl = gauss_legendre(order);
    const double ax = mesh.extent.ax;
    const int nv = static_cast<int>(mesh.vertices.size());

    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (interior_only && !mesh.elem_is_interior(e)) continue;
        const double xl = mesh.vertices[mesh.elements[e][0]].x;
        const double xr = mesh.vertices[mesh.elements[e][1]].x;
        const double h = xr - xl;

        double rmax = std::max({radius(xl), radius(0.5 * (xl + xr)), radius(xr)});
        rmax = 2.0 * rmax + 1e-15;

        std::vector<double> brk = {xl, xr};
        const int k0 = std::max(0, static_cast<int>(std::floor((xl - rmax - ax) / mesh.hx)) - 1);
        const int k1 = std::min(nv - 1, static_cast<int>(std::ceil((xr + rmax - ax) / mesh.hx)) + 1);
        for (int k = k0; k <= k1; ++k) {
            const double v = mesh.vertices[k].x;
            for (double s : {-1.0, 1.0}) {
                auto g = [&](double x) { return x + s * radius(x) - v; };
                double lo = xl, hi = xr;
                double glo = g(lo), ghi = g(hi);
                if (glo == 0.0 || ghi == 0.0) continue;  // piece boundary already
                if ((glo < 0.0) == (ghi < 0.0)) continue;
                for (int it = 0; it < 100 && hi - lo > 1e-17 * h; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((g(mid) < 0.0) == (glo < 0.0))
                        lo = mid, glo = g(mid);
                    else
                        hi = mid;
                }
                brk.push_back(0.5 * (lo + hi));
            }
        }
        std::sort(brk.begin(), brk.end());
        for (size_t i = 0; i + 1 < brk.size(); ++i) {
            const double a = brk[i], b = brk[i + 1];
            if (b - a <= 1e-15 * h) continue;
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (size_t q = 0; q < gl.nodes.size(); ++q) {
                OuterPt op;
                op.x = {mid + half * gl.nodes[q], 0.0};
                op.w = half * gl.weights[q];
                op.elem = e;
                op.radius = radius(op.x.x);
                out.push_back(op);
            }
        }
    }
    return out;
}

inline std::vector<OuterPt> outer_points_2d(const Mesh& mesh,
                                            const std::function<double(Point)>& radius, int degree,
                                            bool interior_only = false) {
    std::vector<OuterPt> out;
    const TriRule& tr = triangle_rule(degree);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (interior_only && !mesh.elem_is_interior(e)) continue;
        const auto& el = mesh.elements[e];
        const Point a = mesh.vertices[el[0]], b = mesh.vertices[el[1]], c = mesh.vertices[el[2]];
        const double area = mesh.elem_measure(e);
        for (const auto& qp : tr.points) {
            OuterPt op;
            op.x = qp[0] * a + qp[1] * b + qp[2] * c;
            op.w = qp[3] * area;
            op.elem = e;
            op.radius = radius(op.x);
            out.push_back(op);
        }
    }
    return out;
}

// Distance from an interior point of element e to its nearest edge.
inline double dist_to_elem_edges(const Mesh& mesh, int e, Point p) {
    const auto& el = mesh.elements[e];
    double dmin = 1e300;
    for (int s = 0; s < 3; ++s) {
        const Point a = mesh.vertices[el[s]], b = mesh.vertices[el[(s + 1) % 3]];
        const Point ab = b - a;
        const double len2 = dot(ab, ab);
        const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
        const Point proj = a + t * ab;
        dmin = std::min(dmin, norm(p - proj));
    }
    return dmin;
}

inline std::vector<int> candidate_elements(const Mesh& mesh, Point x, double r) {
    std::vector<int> elems;
    const int i0 = std::max(0, static_cast<int>(std::floor((x.x - r - mesh.extent.ax) / mesh.hx)));
    const int i1 = std::min(mesh.nx - 1, static_cast<int>(std::floor((x.x + r - mesh.extent.ax) / mesh.hx)));
    const int j0 = std::max(0, static_cast<int>(std::floor((x.y - r - mesh.extent.ay) / mesh.hy)));
    const int j1 = std::min(mesh.ny - 1, static_cast<int>(std::floor((x.y + r - mesh.extent.ay) / mesh.hy)));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            elems.push_back(2 * (j * mesh.nx + i));
            elems.push_back(2 * (j * mesh.nx + i) + 1);
        }
    return elems;
}

// Sorted angular breakpoints: directions from x to every candidate
// vertex inside the ball (inner(theta) is smooth between them), plus 0.
inline std::vector<double> arc_angles(const Mesh& mesh, const std::vector<int>& elems, Point x,
                                      double r) {
    std::set<int> verts;
    for (int e : elems)
        for (int k = 0; k < 3; ++k) verts.insert(mesh.elements[e][k]);
    std::vector<double> angles;
    for (int v : verts) {
        const Point d = mesh.vertices[v] - x;
        const double dist = norm(d);
        if (dist > 1e-14 && dist < r * (1.0 + 1e-12)) angles.push_back(std::atan2(d.y, d.x));
    }
    angles.push_back(-3.14159265358979323846);
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-13; }),
                 angles.end());
    angles.push_back(angles.front() + 2.0 * 3.14159265358979323846);
    return angles;
}

// Radii where the ray x + t*omega crosses a candidate element edge,
// ascending, within (0, r).
inline void ray_crossings(const Mesh& mesh, const std::vector<int>& elems, Point x, Point omega,
                          double r, std::vector<double>& out) {
    out.clear();
    std::set<std::pair<int, int>> seen;
    for (int e : elems) {
        const auto& el = mesh.elements[e];
        for (int s = 0; s < 3; ++s) {
            auto key = std::minmax(el[s], el[(s + 1) % 3]);
            if (!seen.insert(key).second) continue;
            const Point a = mesh.vertices[key.first], b = mesh.vertices[key.second];
            const Point ab = b - a;
            const double den = omega.x * ab.y - omega.y * ab.x;
            if (std::abs(den) < 1e-300) continue;
            const Point ax_ = a - x;
            const double t = (ax_.x * ab.y - ax_.y * ab.x) / den;
            const double s2 = (ax_.x * omega.y - ax_.y * omega.x) / den;
            if (s2 >= -1e-12 && s2 <= 1.0 + 1e-12 && t > 1e-14 * r && t < r * (1.0 - 1e-14))
                out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [r](double a, double b) { return std::abs(a - b) < 1e-13 * r; }),
              out.end());
}

}  // namespace nlac::detail
