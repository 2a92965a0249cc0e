#include "nlac/convolution.hpp"

#include "nlac/harness.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace nlac;

namespace {
constexpr double kPi = std::numbers::pi;
const double kDelta0 = delta0(2.0, 1.0);
}

TEST_CASE("constants map to themselves") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 32);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / 2.0);
    DiscreteFunction c = interpolate(sp, [](Point) { return 2.5; });
    for (const Point& pt : interior_sample(dom, 200))
        CHECK(std::abs(apply_Kdelta(c, cfg, pt) - 2.5) <= 1e-12);
}

TEST_CASE("linear functions are fixed points (odd moments vanish)") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 16);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / 2.0);
    DiscreteFunction u = interpolate(sp, [](Point p) { return p.x; });
    for (const Point& pt : interior_sample(dom, 100))
        CHECK(apply_Kdelta(u, cfg, pt) == doctest::Approx(pt.x).epsilon(1e-12));
}

TEST_CASE("matches the dense quadrature oracle") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 64);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / 2.0);
    DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
    for (const Point& pt : interior_sample(dom, 40)) {
        const double mine = apply_Kdelta(u, cfg, pt);
        const double ref =
            oracle::kdelta_1d(u, cfg.delta, cfg.psi.amplitude, cfg.psi.support, pt.x, 0.0, 1.0);
        CHECK(mine == doctest::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("trace policy at boundary points") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 16);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / 2.0);
    DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x) + p.x; });
    CHECK(apply_Kdelta(u, cfg, {0.0, 0.0}) == u.value_global({0.0, 0.0}));
    CHECK(apply_Kdelta(u, cfg, {1.0, 0.0}) == u.value_global({1.0, 0.0}));
    CHECK_THROWS_AS(apply_Kdelta(u, cfg, {1.5, 0.0}), std::invalid_argument);
}

TEST_CASE("gradient of the smoothed function") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 64);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / 2.0);
    SUBCASE("constant has zero gradient") {
        DiscreteFunction c = interpolate(sp, [](Point) { return 4.0; });
        for (const Point& pt : interior_sample(dom, 50))
            CHECK(std::abs(grad_Kdelta(c, cfg, pt).x) <= 1e-10);
    }
    SUBCASE("linear has unit gradient") {
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x; });
        for (const Point& pt : interior_sample(dom, 50))
            CHECK(grad_Kdelta(u, cfg, pt).x == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("finite differences on a smooth target") {
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
        for (const Point& pt : interior_sample(dom, 20)) {
            const double h = 1e-7;
            if (pt.x < 2.0 * h || pt.x > 1.0 - 2.0 * h) continue;
            const double fd =
                (apply_Kdelta(u, cfg, {pt.x + h, 0.0}) - apply_Kdelta(u, cfg, {pt.x - h, 0.0})) /
                (2.0 * h);
            CHECK(grad_Kdelta(u, cfg, pt).x == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("smoothed load pairing") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 64);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / 2.0);
    LoadFunctional f;
    f.f0 = [](Point p) { return kPi * kPi * std::cos(kPi * p.x); };

    SUBCASE("constant with compatible load gives zero") {
        DiscreteFunction c = interpolate(sp, [](Point) { return 1.0; });
        CHECK(std::abs(smoothed_load_pairing(f, c, cfg, QuadratureSpec{})) <= 1e-9);
    }
    SUBCASE("matches dense quadrature") {
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
        const double mine = smoothed_load_pairing(f, u, cfg, QuadratureSpec{});
        const Mesh& mm = sp.mesh();
        double ref = 0.0;
        for (int e = 0; e < mm.num_elements(); ++e) {
            const double x0 = mm.vertices[mm.elements[e][0]].x;
            const double x1 = mm.vertices[mm.elements[e][1]].x;
            ref += oracle::panels(
                [&](double x) {
                    return kPi * kPi * std::cos(kPi * x) *
                           oracle::kdelta_1d(u, cfg.delta, cfg.psi.amplitude, cfg.psi.support, x,
                                             0.0, 1.0);
                },
                x0, x1, 10);
        }
        CHECK(mine == doctest::Approx(ref).epsilon(1e-6));
    }
    SUBCASE("approaches the plain pairing as delta shrinks") {
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
        const double plain = load_pairing(f, u);
        double prev = 1e300;
        for (double fac : {2.0, 4.0, 8.0, 16.0}) {
            KernelConfig c = make_kernel_config(dom, 2.0, 0.0, kDelta0 / fac);
            const double diff = std::abs(smoothed_load_pairing(f, u, c, QuadratureSpec{}) - plain);
            CHECK(diff < prev);
            prev = diff;
        }
    }
}

TEST_CASE("convolution error trend") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 256);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    SUBCASE("constants have zero error") {
        KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / 2.0);
        DiscreteFunction c = interpolate(sp, [](Point) { return 1.5; });
        CHECK(convolution_error(c, cfg) <= 1e-10);
    }
    SUBCASE("strictly decreasing in delta with order >= 0.8") {
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
        std::vector<double> errs, ds;
        for (double fac : {2.0, 4.0, 8.0, 16.0}) {
            KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / fac);
            errs.push_back(convolution_error(u, cfg));
            ds.push_back(cfg.delta);
        }
        for (size_t i = 0; i + 1 < errs.size(); ++i) CHECK(errs[i + 1] < errs[i]);
        for (double o : observed_order(errs, ds)) CHECK(o >= 0.8);
    }
}

TEST_CASE("W^{1,p} control of the smoothing") {
    Domain dom = make_interval(0.0, 1.0);
    Mesh m = build_mesh(dom, 64);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
    double worst = 0.0;
    for (double fac : {2.0, 4.0, 8.0}) {
        KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, kDelta0 / fac);
        const double num = smoothed_w1p_norm(u, cfg, 2.0);
        const double den = std::sqrt(std::pow(lp_norm(u, 2.0), 2.0) +
                                     seminorm_heterogeneous(u, cfg));
        worst = std::max(worst, num / den);
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 10.0);  // bound recorded; the paper gives no explicit constant
}
