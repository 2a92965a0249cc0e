#include "nlac/femspace.hpp"

#include "nlac/geometry.hpp"
#include "nlac/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

using namespace nlac;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("build_space DOF counts") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 4);
    SUBCASE("zero-mean P1") {
        FeSpace sp(m, 1, Continuity::CG, Constraint::ZeroMean);
        CHECK(sp.ndof() == 5);
        CHECK(sp.free_count() == 5);  // mean constraint removes a dimension, pins nothing
        CHECK(sp.dimension() == 4);
        CHECK(sp.has_mean_constraint());
    }
    SUBCASE("zero-trace P1") {
        FeSpace sp(m, 1, Continuity::CG, Constraint::ZeroTrace);
        CHECK(sp.ndof() == 5);
        CHECK(sp.free_count() == 3);
    }
    SUBCASE("P2 adds midpoints") {
        FeSpace sp(m, 2, Continuity::CG, Constraint::None);
        CHECK(sp.ndof() == 9);
    }
    SUBCASE("DG P1") {
        FeSpace sp(m, 1, Continuity::DG, Constraint::None);
        CHECK(sp.ndof() == 8);
    }
    SUBCASE("DG rejects trace and mean constraints") {
        CHECK_THROWS_AS(FeSpace(m, 1, Continuity::DG, Constraint::ZeroTrace),
                        std::invalid_argument);
        CHECK_THROWS_AS(FeSpace(m, 1, Continuity::DG, Constraint::ZeroMean),
                        std::invalid_argument);
    }
}

TEST_CASE("zero-volume-layer pins the collar and the boundary") {
    InflatedDomain inf = build_inflated(make_interval(0.0, 1.0), 0.25, 4);
    FeSpace sp(inf.mesh, 1, Continuity::CG, Constraint::ZeroVolumeLayer);
    CHECK(sp.ndof() == 7);
    CHECK(sp.free_count() == 3);
    // pinned DOFs sit exactly at {-0.25, 0, 1, 1.25}
    std::vector<double> pinned_x;
    for (int i : sp.pinned_dofs()) pinned_x.push_back(sp.dof_point(i).x);
    std::sort(pinned_x.begin(), pinned_x.end());
    REQUIRE(pinned_x.size() == 4);
    CHECK(pinned_x[0] == doctest::Approx(-0.25));
    CHECK(pinned_x[1] == doctest::Approx(0.0));
    CHECK(pinned_x[2] == doctest::Approx(1.0));
    CHECK(pinned_x[3] == doctest::Approx(1.25));
}

TEST_CASE("interpolate") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 4);
    SUBCASE("constant into zero-mean space vanishes") {
        FeSpace sp(m, 1, Continuity::CG, Constraint::ZeroMean);
        DiscreteFunction u = interpolate(sp, [](Point) { return 1.0; });
        CHECK(u.coeff.lpNorm<Eigen::Infinity>() <= 1e-14);
    }
    SUBCASE("identity function hits nodal values") {
        FeSpace sp(m, 1, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x; });
        for (int i = 0; i < 5; ++i) CHECK(u.coeff[i] == doctest::Approx(0.25 * i));
    }
    SUBCASE("zero-trace pins boundary coefficients") {
        FeSpace sp(m, 1, Continuity::CG, Constraint::ZeroTrace);
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::sin(kPi * p.x); });
        CHECK(u.coeff[0] == 0.0);
        CHECK(u.coeff[4] == 0.0);
        CHECK(u.coeff[2] == doctest::Approx(1.0));
    }
    SUBCASE("DG projection reproduces polynomials") {
        FeSpace sp(m, 1, Continuity::DG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return 2.0 * p.x - 0.3; });
        for (const Point& pt : interior_sample(m.domain, 60))
            CHECK(u.value_global(pt) == doctest::Approx(2.0 * pt.x - 0.3).epsilon(1e-12));
    }
}

TEST_CASE("mean_value") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 4);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    SUBCASE("zero function") {
        DiscreteFunction u = interpolate(sp, [](Point) { return 0.0; });
        CHECK(mean_value(u) == 0.0);
    }
    SUBCASE("identity integrates to one half") {
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x; });
        CHECK(mean_value(u) == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("constrained member") {
        FeSpace zm(m, 1, Continuity::CG, Constraint::ZeroMean);
        DiscreteFunction u = interpolate(zm, [](Point p) { return std::exp(p.x); });
        CHECK(std::abs(mean_value(u)) <= 1e-12);
    }
    SUBCASE("P2 exactness for quadratics") {
        FeSpace p2(m, 2, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(p2, [](Point p) { return p.x * p.x; });
        CHECK(mean_value(u) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("norms and seminorms") {
    SUBCASE("constant L2 norm") {
        Mesh m = build_mesh(make_interval(0.0, 1.0), 4);
        FeSpace sp(m, 1, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point) { return 1.0; });
        CHECK(lp_norm(u, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("unit slope W^{1,2} seminorm") {
        Mesh m = build_mesh(make_interval(0.0, 1.0), 4);
        FeSpace sp(m, 1, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x; });
        CHECK(w1p_seminorm(u, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("cos(pi x) seminorm approaches pi/sqrt(2)") {
        Mesh m = build_mesh(make_interval(0.0, 1.0), 64);
        FeSpace sp(m, 1, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
        CHECK(w1p_seminorm(u, 2.0) == doctest::Approx(kPi / std::sqrt(2.0)).epsilon(1e-2));
    }
    SUBCASE("odd p via root splitting") {
        Mesh m = build_mesh(make_interval(0.0, 1.0), 2);
        FeSpace sp(m, 1, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x - 0.3; });
        // int_0^1 |x-0.3|^3 dx = (0.3^4 + 0.7^4)/4
        const double exact = (std::pow(0.3, 4) + std::pow(0.7, 4)) / 4.0;
        CHECK(lp_norm(u, 3.0) == doctest::Approx(std::pow(exact, 1.0 / 3.0)).epsilon(1e-12));
    }
    SUBCASE("DG rejected by w1p_seminorm") {
        Mesh m = build_mesh(make_interval(0.0, 1.0), 4);
        FeSpace sp(m, 1, Continuity::DG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x; });
        CHECK_THROWS_AS(w1p_seminorm(u, 2.0), std::invalid_argument);
    }
    SUBCASE("2d linear exactness") {
        Mesh m = build_mesh(make_rectangle(0.0, 1.0, 0.0, 1.0), 4);
        FeSpace sp(m, 1, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x + 2.0 * p.y; });
        CHECK(w1p_seminorm(u, 2.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-13));
    }
}

TEST_CASE("hat space containment round trip") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 8);
    FeSpace hat(m, 1, Continuity::CG, Constraint::None);
    for (int degree : {1, 2}) {
        FeSpace target(m, degree, Continuity::CG, Constraint::None);
        for (int i = 0; i < hat.ndof(); ++i) {
            DiscreteFunction basis;
            basis.space = &hat;
            basis.coeff = Eigen::VectorXd::Zero(hat.ndof());
            basis.coeff[i] = 1.0;
            DiscreteFunction lifted =
                interpolate(target, [&](Point p) { return basis.value_global(p); });
            DiscreteFunction back =
                interpolate(hat, [&](Point p) { return lifted.value_global(p); });
            CHECK((back.coeff - basis.coeff).lpNorm<Eigen::Infinity>() <= 1e-14);
        }
    }
}

TEST_CASE("P1 approximation order in the W^{1,2} seminorm") {
    std::vector<double> errs, hs;
    for (int n : {8, 16, 32, 64}) {
        Mesh m = build_mesh(make_interval(0.0, 1.0), n);
        FeSpace sp(m, 1, Continuity::CG, Constraint::None);
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
        const double exact = kPi / std::sqrt(2.0);
        const double ih = w1p_seminorm(u, 2.0);
        errs.push_back(std::sqrt(std::max(exact * exact - ih * ih, 0.0)));
        hs.push_back(m.h_max);
    }
    for (double o : observed_order(errs, hs)) CHECK(o >= 0.9);
}

TEST_CASE("coefficient serialization round trip") {
    Mesh m = build_mesh(make_interval(0.0, 1.0), 8);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    DiscreteFunction u = interpolate(sp, [](Point p) { return std::sin(3.0 * p.x) / 7.0; });
    std::stringstream ss;
    write_coefficients(ss, u);
    Eigen::VectorXd back = read_coefficients(ss);
    REQUIRE(back.size() == u.coeff.size());
    CHECK((back - u.coeff).lpNorm<Eigen::Infinity>() <= 1e-16);
}

TEST_CASE("prolongation is exact on nested meshes") {
    Mesh coarse = build_mesh(make_interval(0.0, 1.0), 8);
    Mesh fine = build_mesh(make_interval(0.0, 1.0), 16);
    FeSpace spc(coarse, 1, Continuity::CG, Constraint::None);
    FeSpace spf(fine, 1, Continuity::CG, Constraint::None);
    DiscreteFunction u = interpolate(spc, [](Point p) { return std::cos(2.0 * p.x); });
    DiscreteFunction uf = prolong(u, spf);
    for (const Point& pt : interior_sample(coarse.domain, 120))
        CHECK(uf.value_global(pt) == doctest::Approx(u.value_global(pt)).epsilon(1e-13));
}
