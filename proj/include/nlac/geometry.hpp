#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace nlac {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double norm(Point a);

/// Bounded axis-aligned domain: an interval (d=1) or a rectangle (d=2).
struct Domain {
    int dim = 1;
    double ax = 0.0, bx = 1.0;  // x-range
    double ay = 0.0, by = 0.0;  // y-range (d=2)

    double diameter() const;
    double measure() const;
    bool contains(Point p, double tol = 0.0) const;
    /// Euclidean distance to the boundary (positive inside and outside).
    double dist_boundary(Point p) const;
};

Domain make_interval(double a, double b);
Domain make_rectangle(double ax, double bx, double ay, double by);

enum class ElemTag { Interior, Layer };

/// Simplicial mesh over an interval or rectangle.  All meshes produced
/// here are structured and uniform; the grid metadata gives O(1) point
/// location.
struct Mesh {
    int dim = 1;
    Domain domain;   // the base domain Omega
    Domain extent;   // the meshed region (Omega_delta for inflated meshes)

    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> elements;  // 1D uses entries [0],[1]
    std::vector<ElemTag> tags;
    std::vector<std::array<int, 2>> boundary_facets;  // of the extent; 1D: {v, -1}

    double h_max = 0.0;
    double h_min = 0.0;
    double shape_ratio = 1.0;

    // structured-grid metadata
    int nx = 0, ny = 0;          // cells per direction over the extent
    double hx = 0.0, hy = 0.0;   // cell sizes

    int num_elements() const { return static_cast<int>(elements.size()); }
    int verts_per_elem() const { return dim == 1 ? 2 : 3; }
    double elem_measure(int e) const;
    double elem_diameter(int e) const;
    Point elem_centroid(int e) const;
    /// Element containing p, or -1 when p lies outside the meshed region.
    int locate(Point p) const;
    bool elem_is_interior(int e) const { return tags[e] == ElemTag::Interior; }

    /// Plain-text export: vertex table then element table, one record
    /// per line ("v <id> <x> [<y>]", "e <id> <v0> <v1> [<v2>] <tag>").
    void write_text(std::ostream& os) const;
};

/// Uniform mesh with n subdivisions per direction.  d=1: n intervals;
/// d=2: n x n cells, each split into two triangles with alternating
/// diagonals (crossed pattern).
Mesh build_mesh(const Domain& domain, int n);

enum class SnapPolicy { Snap, Reject };

/// Omega_delta = Omega united with the collar of width delta, meshed by
/// whole cells.  delta is snapped to the nearest positive multiple of
/// the cell size (or the construction is rejected, per policy).
struct InflatedDomain {
    Domain base;
    double delta_requested = 0.0;
    double delta = 0.0;   // snapped value actually used
    int layer_cells = 0;  // collar width in cells
    Mesh mesh;
};

InflatedDomain build_inflated(const Domain& domain, double delta, int n,
                              SnapPolicy policy = SnapPolicy::Snap);

/// Smooth generalized distance field lambda with certified comparability
/// constants: (1/kappa0) dist <= lambda <= kappa0 dist and |grad lambda|
/// <= kappa1 (sampled certification in 2D).
struct DistanceField {
    Domain domain;
    double kappa0 = 1.0;
    double kappa1 = 1.0;
    double scale2d = 1.0;  // normalizing length l for the 2D product field

    double value(Point p) const;
    Point gradient(Point p) const;
};

DistanceField smooth_distance(const Domain& domain);

/// Deterministic quasi-random interior sample (Kronecker/golden-ratio
/// lattice); used for sampled certifications and invariant checks.
std::vector<Point> interior_sample(const Domain& domain, int count);

}  // namespace nlac
