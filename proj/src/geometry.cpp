#include "nlac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace nlac {

double norm(Point a) { return std::hypot(a.x, a.y); }

double Domain::diameter() const {
    if (dim == 1) return bx - ax;
    return std::hypot(bx - ax, by - ay);
}

double Domain::measure() const {
    if (dim == 1) return bx - ax;
    return (bx - ax) * (by - ay);
}

bool Domain::contains(Point p, double tol) const {
    if (p.x < ax - tol || p.x > bx + tol) return false;
    if (dim == 2 && (p.y < ay - tol || p.y > by + tol)) return false;
    return true;
}

double Domain::dist_boundary(Point p) const {
    if (dim == 1) {
        if (p.x < ax) return ax - p.x;
        if (p.x > bx) return p.x - bx;
        return std::min(p.x - ax, bx - p.x);
    }
    const double dx = std::max({ax - p.x, 0.0, p.x - bx});
    const double dy = std::max({ay - p.y, 0.0, p.y - by});
    if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);  // outside
    return std::min(std::min(p.x - ax, bx - p.x), std::min(p.y - ay, by - p.y));
}

Domain make_interval(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("make_interval: need a < b");
    Domain d;
    d.dim = 1;
    d.ax = a;
    d.bx = b;
    return d;
}

Domain make_rectangle(double ax, double bx, double ay, double by) {
    if (!(bx > ax) || !(by > ay)) throw std::invalid_argument("make_rectangle: empty interior");
    Domain d;
    d.dim = 2;
    d.ax = ax;
    d.bx = bx;
    d.ay = ay;
    d.by = by;
    return d;
}

double Mesh::elem_measure(int e) const {
    const auto& el = elements[e];
    if (dim == 1) return vertices[el[1]].x - vertices[el[0]].x;
    const Point a = vertices[el[0]], b = vertices[el[1]], c = vertices[el[2]];
    return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::elem_diameter(int e) const {
    const auto& el = elements[e];
    if (dim == 1) return vertices[el[1]].x - vertices[el[0]].x;
    const Point a = vertices[el[0]], b = vertices[el[1]], c = vertices[el[2]];
    return std::max({norm(b - a), norm(c - b), norm(a - c)});
}

Point Mesh::elem_centroid(int e) const {
    const auto& el = elements[e];
    if (dim == 1) {
        return {0.5 * (vertices[el[0]].x + vertices[el[1]].x), 0.0};
    }
    const Point a = vertices[el[0]], b = vertices[el[1]], c = vertices[el[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

int Mesh::locate(Point p) const {
    if (!extent.contains(p, 1e-14)) return -1;
    if (dim == 1) {
        int i = static_cast<int>(std::floor((p.x - extent.ax) / hx));
        i = std::clamp(i, 0, nx - 1);
        return i;
    }
    int i = static_cast<int>(std::floor((p.x - extent.ax) / hx));
    int j = static_cast<int>(std::floor((p.y - extent.ay) / hy));
    i = std::clamp(i, 0, nx - 1);
    j = std::clamp(j, 0, ny - 1);
    // cell (i,j) holds elements 2*(j*nx+i) and 2*(j*nx+i)+1; the diagonal
    // direction alternates with (i+j) parity.
    const double lx = (p.x - (extent.ax + i * hx)) / hx;
    const double ly = (p.y - (extent.ay + j * hy)) / hy;
    const int base = 2 * (j * nx + i);
    if ((i + j) % 2 == 0) {
        // diagonal from (0,0) to (1,1): lower triangle has ly <= lx
        return (ly <= lx) ? base : base + 1;
    }
    // diagonal from (1,0) to (0,1): lower triangle has lx + ly <= 1
    return (lx + ly <= 1.0) ? base : base + 1;
}

void Mesh::write_text(std::ostream& os) const {
    os << "# nlac mesh dim=" << dim << " vertices=" << vertices.size()
       << " elements=" << elements.size() << "\n";
    os << "# v <id> <x>" << (dim == 2 ? " <y>" : "") << "\n";
    for (size_t i = 0; i < vertices.size(); ++i) {
        os << "v " << i << " " << vertices[i].x;
        if (dim == 2) os << " " << vertices[i].y;
        os << "\n";
    }
    os << "# e <id> <v...> <tag>\n";
    for (size_t e = 0; e < elements.size(); ++e) {
        os << "e " << e << " " << elements[e][0] << " " << elements[e][1];
        if (dim == 2) os << " " << elements[e][2];
        os << " " << (tags[e] == ElemTag::Interior ? "interior" : "layer") << "\n";
    }
}

namespace {

// Builds the structured grid mesh of [x0,x0+nx*hx] x [y0,y0+ny*hy]; the
// interior/layer tag comes from the element centroid against `base`.
Mesh build_grid(const Domain& base, const Domain& extent, int nx, int ny) {
    Mesh m;
    m.dim = base.dim;
    m.domain = base;
    m.extent = extent;
    m.nx = nx;
    m.ny = ny;
    m.hx = (extent.bx - extent.ax) / nx;

    if (base.dim == 1) {
        m.vertices.reserve(nx + 1);
        for (int i = 0; i <= nx; ++i) m.vertices.push_back({extent.ax + i * m.hx, 0.0});
        m.elements.reserve(nx);
        for (int i = 0; i < nx; ++i) {
            m.elements.push_back({i, i + 1, -1});
            const Point c = {extent.ax + (i + 0.5) * m.hx, 0.0};
            m.tags.push_back(base.contains(c) ? ElemTag::Interior : ElemTag::Layer);
        }
        m.boundary_facets.push_back({0, -1});
        m.boundary_facets.push_back({nx, -1});
        m.h_max = m.h_min = m.hx;
        m.shape_ratio = 1.0;
        return m;
    }

    m.hy = (extent.by - extent.ay) / ny;
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    m.vertices.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices.push_back({extent.ax + i * m.hx, extent.ay + j * m.hy});

    m.elements.reserve(2 * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1),
                      v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                m.elements.push_back({v00, v10, v11});
                m.elements.push_back({v00, v11, v01});
            } else {
                m.elements.push_back({v00, v10, v01});
                m.elements.push_back({v10, v11, v01});
            }
        }
    }
    for (const auto& el : m.elements) {
        Point c = {(m.vertices[el[0]].x + m.vertices[el[1]].x + m.vertices[el[2]].x) / 3.0,
                   (m.vertices[el[0]].y + m.vertices[el[1]].y + m.vertices[el[2]].y) / 3.0};
        m.tags.push_back(base.contains(c) ? ElemTag::Interior : ElemTag::Layer);
    }
    // boundary facets of the extent rectangle
    for (int i = 0; i < nx; ++i) {
        m.boundary_facets.push_back({vid(i, 0), vid(i + 1, 0)});
        m.boundary_facets.push_back({vid(i, ny), vid(i + 1, ny)});
    }
    for (int j = 0; j < ny; ++j) {
        m.boundary_facets.push_back({vid(0, j), vid(0, j + 1)});
        m.boundary_facets.push_back({vid(nx, j), vid(nx, j + 1)});
    }

    m.h_max = std::hypot(m.hx, m.hy);
    m.h_min = m.h_max;
    // right triangle with legs hx, hy: ratio diam / (2*inradius)
    const double s = m.hx + m.hy + m.h_max;
    const double inradius = (m.hx * m.hy) / s;  // area/(semi-perimeter) = (hx*hy/2)/(s/2)
    m.shape_ratio = m.h_max / (2.0 * inradius);
    return m;
}

}  // namespace

Mesh build_mesh(const Domain& domain, int n) {
    if (n < 1) throw std::invalid_argument("build_mesh: subdivision count must be >= 1");
    return build_grid(domain, domain, n, domain.dim == 2 ? n : 0);
}

InflatedDomain build_inflated(const Domain& domain, double delta, int n, SnapPolicy policy) {
    if (!(delta > 0.0)) throw std::invalid_argument("build_inflated: delta must be positive");
    if (n < 1) throw std::invalid_argument("build_inflated: subdivision count must be >= 1");

    const double h = (domain.bx - domain.ax) / n;
    int k = static_cast<int>(std::llround(delta / h));
    if (k < 1) k = 1;
    const double snapped = k * h;
    if (policy == SnapPolicy::Reject && std::abs(snapped - delta) > 1e-12 * std::max(1.0, delta)) {
        throw std::invalid_argument(
            "build_inflated: delta is not an integer multiple of h and policy is 'reject'");
    }

    InflatedDomain out;
    out.base = domain;
    out.delta_requested = delta;
    out.delta = snapped;
    out.layer_cells = k;

    if (domain.dim == 1) {
        Domain ext = make_interval(domain.ax - snapped, domain.bx + snapped);
        out.mesh = build_grid(domain, ext, n + 2 * k, 0);
        return out;
    }
    // 2D: the collar is meshed as the full square ring of width k cells
    // (corner blocks included; see notes in the layer-tag invariants).
    const double hy = (domain.by - domain.ay) / n;
    if (std::abs(hy - h) > 1e-12 * h)
        throw std::invalid_argument("build_inflated: 2D requires square cells (|bx-ax| == |by-ay|)");
    Domain ext = make_rectangle(domain.ax - snapped, domain.bx + snapped, domain.ay - snapped,
                                domain.by + snapped);
    out.mesh = build_grid(domain, ext, n + 2 * k, n + 2 * k);
    return out;
}

double DistanceField::value(Point p) const {
    if (domain.dim == 1) {
        return (p.x - domain.ax) * (domain.bx - p.x) / (domain.bx - domain.ax);
    }
    const double lx = (p.x - domain.ax) * (domain.bx - p.x) / (domain.bx - domain.ax);
    const double ly = (p.y - domain.ay) * (domain.by - p.y) / (domain.by - domain.ay);
    return lx * ly / scale2d;
}

Point DistanceField::gradient(Point p) const {
    if (domain.dim == 1) {
        return {(domain.ax + domain.bx - 2.0 * p.x) / (domain.bx - domain.ax), 0.0};
    }
    const double lx = (p.x - domain.ax) * (domain.bx - p.x) / (domain.bx - domain.ax);
    const double ly = (p.y - domain.ay) * (domain.by - p.y) / (domain.by - domain.ay);
    const double dlx = (domain.ax + domain.bx - 2.0 * p.x) / (domain.bx - domain.ax);
    const double dly = (domain.ay + domain.by - 2.0 * p.y) / (domain.by - domain.ay);
    return {dlx * ly / scale2d, lx * dly / scale2d};
}

std::vector<Point> interior_sample(const Domain& domain, int count) {
    // Kronecker lattice with the plastic-number constants; offset by 0.5
    // to stay away from the boundary at small counts.
    std::vector<Point> pts;
    pts.reserve(count);
    const double a1 = 0.7548776662466927;  // 1/rho, rho the plastic number
    const double a2 = 0.5698402909980532;  // 1/rho^2
    for (int i = 0; i < count; ++i) {
        double u = std::fmod(0.5 + a1 * (i + 1), 1.0);
        double v = std::fmod(0.5 + a2 * (i + 1), 1.0);
        if (domain.dim == 1) {
            pts.push_back({domain.ax + u * (domain.bx - domain.ax), 0.0});
        } else {
            pts.push_back(
                {domain.ax + u * (domain.bx - domain.ax), domain.ay + v * (domain.by - domain.ay)});
        }
    }
    return pts;
}

DistanceField smooth_distance(const Domain& domain) {
    DistanceField f;
    f.domain = domain;
    if (domain.dim == 1) {
        // lambda(x) = (x-a)(b-x)/(b-a):  lambda/dist = max(x-a,b-x)/(b-a)
        // lies in [1/2, 1], and |lambda'| <= 1.
        f.kappa0 = 2.0;
        f.kappa1 = 1.0;
        return f;
    }
    if (domain.dim != 2) throw std::runtime_error("smooth_distance: unsupported domain shape");

    // Product-of-edge-distances surrogate lambda = lx*ly/l.  The scale l
    // balances the sampled ratio lambda/dist around 1; kappa0 is then
    // certified on the same deterministic lattice (16384 points) with a
    // 1.25 margin.  No constant works uniformly near the corners, so the
    // certification is sampled by construction.
    f.scale2d = 1.0;
    auto ratios = [&](const DistanceField& fld) {
        double lo = 1e300, hi = -1e300;
        for (const Point& p : interior_sample(domain, 16384)) {
            const double d = domain.dist_boundary(p);
            if (d <= 0.0) continue;
            const double r = fld.value(p) / d;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        return std::pair<double, double>{lo, hi};
    };
    auto [lo, hi] = ratios(f);
    f.scale2d = std::sqrt(lo * hi);
    auto [lo2, hi2] = ratios(f);
    f.kappa0 = 1.25 * std::max(hi2, 1.0 / lo2);

    // |grad lambda| <= sqrt((max|lx'| max ly)^2 + (max lx max|ly'|)^2)/l,
    // max|l1d'| = 1 and max l1d = len/4: a closed-form bound.
    const double mx = (domain.bx - domain.ax) / 4.0;
    const double my = (domain.by - domain.ay) / 4.0;
    f.kappa1 = std::hypot(my, mx) / f.scale2d;
    return f;
}

}  // namespace nlac
