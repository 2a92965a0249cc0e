#include "nlac/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace nlac;

TEST_CASE("build_mesh 1d uniform partition") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 4);
    REQUIRE(m.vertices.size() == 5);
    for (int i = 0; i <= 4; ++i) CHECK(m.vertices[i].x == doctest::Approx(0.25 * i).epsilon(1e-15));
    CHECK(m.h_max == doctest::Approx(0.25));
    CHECK(m.num_elements() == 4);
    CHECK(m.shape_ratio == doctest::Approx(1.0));
}

TEST_CASE("build_mesh single element") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 1);
    CHECK(m.num_elements() == 1);
    CHECK(m.h_max == doctest::Approx(1.0));
}

TEST_CASE("build_mesh rejects n = 0") {
    CHECK_THROWS_AS(build_mesh(make_interval(0.0, 1.0), 0), std::invalid_argument);
}

TEST_CASE("build_mesh 2d crossed pattern") {
    Mesh m = build_mesh(make_rectangle(0.0, 1.0, 0.0, 1.0), 2);
    CHECK(m.num_elements() == 8);
    CHECK(m.h_max == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(m.shape_ratio >= 1.0);
    double sum = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) sum += m.elem_measure(e);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("mesh partition property") {
    for (int n : {3, 7, 16}) {
        Mesh m = build_mesh(make_interval(-0.5, 2.0), n);
        double sum = 0.0;
        for (int e = 0; e < m.num_elements(); ++e) sum += m.elem_measure(e);
        CHECK(std::abs(sum - 2.5) / 2.5 <= 1e-12);
    }
    Mesh m2 = build_mesh(make_rectangle(0.0, 2.0, 0.0, 2.0), 6);
    double sum2 = 0.0;
    for (int e = 0; e < m2.num_elements(); ++e) sum2 += m2.elem_measure(e);
    CHECK(std::abs(sum2 - 4.0) / 4.0 <= 1e-12);
}

TEST_CASE("locate is consistent with element geometry") {
    Mesh m = build_mesh(make_rectangle(0.0, 1.0, 0.0, 1.0), 4);
    for (const Point& p : interior_sample(m.domain, 500)) {
        const int e = m.locate(p);
        REQUIRE(e >= 0);
        // barycentric check: the point lies inside the located triangle
        const auto& el = m.elements[e];
        const Point a = m.vertices[el[0]], b = m.vertices[el[1]], c = m.vertices[el[2]];
        const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        const double l1 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / det;
        const double l2 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / det;
        CHECK(l1 >= -1e-12);
        CHECK(l2 >= -1e-12);
        CHECK(l1 + l2 <= 1.0 + 1e-12);
    }
}

TEST_CASE("build_inflated 1d") {
    SUBCASE("quarter collar") {
        InflatedDomain inf = build_inflated(make_interval(0.0, 1.0), 0.25, 4);
        CHECK(inf.delta == doctest::Approx(0.25));
        CHECK(inf.mesh.num_elements() == 6);
        int layer = 0;
        for (int e = 0; e < inf.mesh.num_elements(); ++e)
            if (!inf.mesh.elem_is_interior(e)) ++layer;
        CHECK(layer == 2);
        CHECK(inf.mesh.extent.ax == doctest::Approx(-0.25));
        CHECK(inf.mesh.extent.bx == doctest::Approx(1.25));
    }
    SUBCASE("tenth collar") {
        InflatedDomain inf = build_inflated(make_interval(0.0, 1.0), 0.1, 10);
        CHECK(inf.mesh.num_elements() == 12);
        CHECK(inf.mesh.extent.ax == doctest::Approx(-0.1));
        CHECK(inf.mesh.extent.bx == doctest::Approx(1.1));
    }
    SUBCASE("snapping policy") {
        InflatedDomain inf = build_inflated(make_interval(0.0, 1.0), 0.13, 10);
        CHECK(inf.delta == doctest::Approx(0.1));
        CHECK(inf.delta_requested == doctest::Approx(0.13));
        CHECK_THROWS_AS(build_inflated(make_interval(0.0, 1.0), 0.13, 10, SnapPolicy::Reject),
                        std::invalid_argument);
    }
}

TEST_CASE("inflated layer elements stay within the collar (1d)") {
    InflatedDomain inf = build_inflated(make_interval(0.0, 1.0), 0.2, 10);
    for (int e = 0; e < inf.mesh.num_elements(); ++e) {
        const bool layer = !inf.mesh.elem_is_interior(e);
        // sample points inside the element
        const double x0 = inf.mesh.vertices[inf.mesh.elements[e][0]].x;
        const double x1 = inf.mesh.vertices[inf.mesh.elements[e][1]].x;
        for (int k = 1; k < 6; ++k) {
            const Point p{x0 + (x1 - x0) * k / 6.0, 0.0};
            if (layer) {
                CHECK(!inf.base.contains(p));
                CHECK(inf.base.dist_boundary(p) <= inf.delta + 1e-12);
            } else {
                CHECK(inf.base.contains(p));
            }
        }
    }
}

TEST_CASE("smooth distance 1d") {
    DistanceField f = smooth_distance(make_interval(0.0, 1.0));
    CHECK(f.kappa0 == doctest::Approx(2.0));
    CHECK(f.kappa1 == doctest::Approx(1.0));
    CHECK(f.value({0.5, 0.0}) == doctest::Approx(0.25));
    CHECK(f.value({0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(f.value({0.01, 0.0}) == doctest::Approx(0.0099));
    // ratio lambda/dist within [1/kappa0, kappa0]
    CHECK(f.value({0.5, 0.0}) / 0.5 >= 1.0 / f.kappa0);
    CHECK(f.value({0.01, 0.0}) / 0.01 >= 1.0 / f.kappa0);
    CHECK(f.value({0.01, 0.0}) / 0.01 <= f.kappa0);
}

TEST_CASE("A_lambda sampled certification") {
    for (int d : {1, 2}) {
        Domain dom = d == 1 ? make_interval(0.0, 1.0) : make_rectangle(0.0, 1.0, 0.0, 1.0);
        DistanceField f = smooth_distance(dom);
        int checked = 0;
        for (const Point& p : interior_sample(dom, 1500)) {
            const double dist = dom.dist_boundary(p);
            if (dist <= 0.0) continue;
            ++checked;
            const double ratio = f.value(p) / dist;
            CHECK(ratio >= 1.0 / f.kappa0 - 1e-12);
            CHECK(ratio <= f.kappa0 + 1e-12);
            CHECK(norm(f.gradient(p)) <= f.kappa1 + 1e-12);
        }
        CHECK(checked >= 1000);
    }
}

TEST_CASE("smooth distance gradient matches finite differences") {
    DistanceField f = smooth_distance(make_rectangle(0.0, 2.0, 0.0, 1.0));
    const double h = 1e-6;
    for (const Point& p : interior_sample(f.domain, 50)) {
        const Point g = f.gradient(p);
        const double gx = (f.value({p.x + h, p.y}) - f.value({p.x - h, p.y})) / (2.0 * h);
        const double gy = (f.value({p.x, p.y + h}) - f.value({p.x, p.y - h})) / (2.0 * h);
        CHECK(g.x == doctest::Approx(gx).epsilon(1e-6));
        CHECK(g.y == doctest::Approx(gy).epsilon(1e-6));
    }
}

TEST_CASE("mesh text export") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 2);
    std::ostringstream os;
    m.write_text(os);
    const std::string txt = os.str();
    CHECK(txt.find("v 0 0") != std::string::npos);
    CHECK(txt.find("e 1 1 2 interior") != std::string::npos);
}
