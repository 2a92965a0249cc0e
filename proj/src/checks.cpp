#include "nlac/checks.hpp"

#include "nlac/assembly.hpp"
#include "nlac/convolution.hpp"
#include "nlac/harness.hpp"
#include "nlac/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace nlac {

namespace {

constexpr double kPi = std::numbers::pi;

CheckResult make(const std::string& name, bool pass, const std::string& detail) {
    return CheckResult{name, pass, detail};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// radial quadrature of int_{B(0,1)} C^gamma |xi|^{p-beta} dxi with the
// r = s^2 substitution (handles the half-integer exponents exactly)
double ball_normalization_integral(int d, double beta, double p) {
    const double cg = kernel_constant(d, beta, p);
    const double omega = d == 1 ? 2.0 : 2.0 * kPi;
    // int_0^1 r^{p-beta+d-1} dr = 2 int_0^1 s^{2(p-beta+d-1)+1} ds
    const double expo = 2.0 * (p - beta + d - 1.0) + 1.0;
    Rule1D r = gauss_on_interval(24, 0.0, 1.0);
    double acc = 0.0;
    for (size_t i = 0; i < r.nodes.size(); ++i)
        acc += r.weights[i] * 2.0 * std::pow(r.nodes[i], expo);
    return cg * omega * acc;
}

}  // namespace

std::vector<CheckResult> check_geometry() {
    std::vector<CheckResult> out;

    {  // partition property
        bool ok = true;
        double worst = 0.0;
        for (int d : {1, 2}) {
            Domain dom = d == 1 ? make_interval(0.0, 1.0) : make_rectangle(0.0, 1.0, 0.0, 1.0);
            Mesh m = build_mesh(dom, d == 1 ? 7 : 5);
            double sum = 0.0;
            for (int e = 0; e < m.num_elements(); ++e) sum += m.elem_measure(e);
            const double rel = std::abs(sum - dom.measure()) / dom.measure();
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-12;
        }
        out.push_back(make("partition_measure", ok, "worst rel " + fmt(worst)));
    }
    for (int d : {1, 2}) {  // (A_lambda)(i) and the gradient bound, sampled
        Domain dom = d == 1 ? make_interval(0.0, 1.0) : make_rectangle(0.0, 1.0, 0.0, 1.0);
        DistanceField f = smooth_distance(dom);
        bool ratio_ok = true, grad_ok = true;
        double worst_ratio = 1.0, worst_grad = 0.0;
        for (const Point& pt : interior_sample(dom, 2000)) {
            const double dist = dom.dist_boundary(pt);
            if (dist <= 0.0) continue;
            const double ratio = f.value(pt) / dist;
            worst_ratio = std::max({worst_ratio, ratio, 1.0 / ratio});
            if (ratio < 1.0 / f.kappa0 - 1e-12 || ratio > f.kappa0 + 1e-12) ratio_ok = false;
            const double gn = norm(f.gradient(pt));
            worst_grad = std::max(worst_grad, gn);
            if (gn > f.kappa1 + 1e-12) grad_ok = false;
        }
        out.push_back(make("A_lambda_ratio_d" + std::to_string(d), ratio_ok,
                           "worst " + fmt(worst_ratio) + " vs kappa0 " + fmt(f.kappa0)));
        out.push_back(make("A_lambda_gradient_d" + std::to_string(d), grad_ok,
                           "worst " + fmt(worst_grad) + " vs kappa1 " + fmt(f.kappa1)));
    }
    {  // layer tags: quadrature points of layer elements lie outside Omega
        InflatedDomain inf = build_inflated(make_interval(0.0, 1.0), 0.25, 4);
        bool ok = true;
        for (int e = 0; e < inf.mesh.num_elements(); ++e) {
            const Point c = inf.mesh.elem_centroid(e);
            const bool is_layer = !inf.mesh.elem_is_interior(e);
            const bool outside = !inf.base.contains(c);
            if (is_layer != outside) ok = false;
            if (is_layer && inf.base.dist_boundary(c) > inf.delta + 1e-12) ok = false;
        }
        out.push_back(make("inflated_layer_tags_1d", ok, "delta " + fmt(inf.delta)));
    }
    return out;
}

std::vector<CheckResult> check_kernels() {
    std::vector<CheckResult> out;

    {  // normalization identity over the (d, p, beta) grid
        bool ok = true;
        double worst = 0.0;
        for (int d : {1, 2})
            for (double p : {2.0, 3.0, 4.0})
                for (double beta : {0.0, 0.5 * d}) {
                    const double val = ball_normalization_integral(d, beta, p);
                    const double rel = std::abs(val - cbar(d, p)) / cbar(d, p);
                    worst = std::max(worst, rel);
                    ok = ok && rel <= 1e-8;
                }
        out.push_back(make("kernel_normalization_identity", ok, "worst rel " + fmt(worst)));
    }
    {  // q: range and monotonicity on a log-spaced sample
        bool ok = true;
        double prev = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double r = std::pow(10.0, -3.0 + 4.0 * i / 200.0);
            const double q = eval_q(r);
            if (!(q >= 0.0 && q < 0.5 * r)) ok = false;
            if (q < prev) ok = false;
            prev = q;
        }
        ok = ok && eval_q(0.0) == 0.0;
        out.push_back(make("rate_function_range", ok, "q(1) = " + fmt(eval_q(1.0))));
    }
    {  // strict interiority of the horizon
        Domain dom = make_interval(0.0, 1.0);
        KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, delta0(2.0, 1.0) / 2.0);
        bool ok = true;
        for (const Point& pt : interior_sample(dom, 2000))
            if (!(cfg.horizon(pt) < dom.dist_boundary(pt))) ok = false;
        out.push_back(make("horizon_strict_interiority", ok, "sampled 2000 points"));
    }
    {  // scale invariance: int gamma(x,y)|x-y|^p dy over the horizon ball
        Domain dom = make_interval(0.0, 1.0);
        KernelConfig cfg = make_kernel_config(dom, 2.0, 0.5, delta0(2.0, 1.0) / 2.0);
        bool ok = true;
        double worst = 0.0;
        for (const Point& pt : interior_sample(dom, 50)) {
            const double eta = cfg.horizon(pt);
            if (eta <= 0.0) continue;
            // 2 * int_0^eta cgamma t^{p-beta} / eta^{1+p-beta} dt, via t = eta s^2
            Rule1D r = gauss_on_interval(24, 0.0, 1.0);
            double acc = 0.0;
            for (size_t i = 0; i < r.nodes.size(); ++i) {
                const double s = r.nodes[i];
                const double t = eta * s * s;
                acc += r.weights[i] * 2.0 * eta * s * eval_gamma(pt, {pt.x + t, 0.0}, cfg) *
                       std::pow(t, cfg.p);
            }
            acc *= 2.0;  // both sides
            const double rel = std::abs(acc - cfg.cbar_dp) / cfg.cbar_dp;
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-6;
        }
        out.push_back(make("kernel_family_consistency", ok, "worst rel " + fmt(worst)));
    }
    {  // rho and psi normalizations
        RadialProfile rho = default_rho(1, 2.0, 0.0);
        MollifierProfile psi = default_psi(1);
        const double c_expect = 3.0 / (2.0 * std::pow(0.9, 3.0));
        bool ok = std::abs(rho.amplitude - c_expect) <= 1e-12 && rho.value(0.95) == 0.0;
        // int psi over R (composite, exact for the C^2 bump)
        Rule1D r = gauss_on_interval(24, 0.0, psi.support);
        double mass = 0.0;
        for (size_t i = 0; i < r.nodes.size(); ++i) mass += r.weights[i] * psi.value(r.nodes[i]);
        mass *= 2.0;
        ok = ok && std::abs(mass - 1.0) <= 1e-10;
        out.push_back(make("profile_normalizations", ok, "psi mass " + fmt(mass)));
    }
    return out;
}

std::vector<CheckResult> check_femspace() {
    std::vector<CheckResult> out;
    Domain dom = make_interval(0.0, 1.0);

    {  // hat-space containment via interpolation round trip
        bool ok = true;
        for (int degree : {1, 2}) {
            Mesh m = build_mesh(dom, 8);
            FeSpace coarse(m, 1, Continuity::CG, Constraint::None);
            FeSpace fine(m, degree, Continuity::CG, Constraint::None);
            for (int i = 0; i < coarse.ndof(); ++i) {
                DiscreteFunction hat;
                hat.space = &coarse;
                hat.coeff = Eigen::VectorXd::Zero(coarse.ndof());
                hat.coeff[i] = 1.0;
                DiscreteFunction up = interpolate(fine, [&](Point p) { return hat.value_global(p); });
                DiscreteFunction back =
                    interpolate(coarse, [&](Point p) { return up.value_global(p); });
                if ((back.coeff - hat.coeff).lpNorm<Eigen::Infinity>() > 1e-14) ok = false;
            }
        }
        out.push_back(make("hat_space_containment", ok, "P1 into P1/P2 round trip"));
    }
    {  // approximation order for cos(pi x) in the W^{1,2} seminorm
        std::vector<double> errs, hs;
        for (int n : {16, 32, 64, 128}) {
            Mesh m = build_mesh(dom, n);
            FeSpace sp(m, 1, Continuity::CG, Constraint::None);
            DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
            // |u - I_h u|_{W^{1,2}}^2 = |u|^2 - |I_h u|^2 for nodal P1 interpolation
            const double exact = kPi / std::sqrt(2.0);
            const double ih = w1p_seminorm(u, 2.0);
            errs.push_back(std::sqrt(std::max(exact * exact - ih * ih, 0.0)));
            hs.push_back(m.h_max);
        }
        const auto orders = observed_order(errs, hs);
        bool ok = true;
        for (double o : orders)
            if (!(o >= 0.9)) ok = false;
        out.push_back(make("approximation_order", ok, "orders " + fmt(orders[0]) + ", " +
                                                          fmt(orders[1]) + ", " + fmt(orders[2])));
    }
    {  // constraint preservation
        Mesh m = build_mesh(dom, 16);
        FeSpace zm(m, 1, Continuity::CG, Constraint::ZeroMean);
        DiscreteFunction u = interpolate(zm, [](Point p) { return std::exp(p.x); });
        bool ok = std::abs(mean_value(u)) <= 1e-12;
        FeSpace zt(m, 1, Continuity::CG, Constraint::ZeroTrace);
        DiscreteFunction v = interpolate(zt, [](Point p) { return std::sin(kPi * p.x) + 0.3; });
        for (int i : zt.pinned_dofs())
            if (v.coeff[i] != 0.0) ok = false;
        out.push_back(make("constraint_preservation", ok, "mean " + fmt(mean_value(u))));
    }
    return out;
}

std::vector<CheckResult> check_assembly() {
    std::vector<CheckResult> out;
    Domain dom = make_interval(0.0, 1.0);
    const double d0 = delta0(2.0, 1.0);
    Mesh m = build_mesh(dom, 32);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, d0 / 2.0);

    {  // linear-function identities
        DiscreteFunction u = interpolate(sp, [](Point p) { return p.x; });
        const double sem = seminorm_heterogeneous(u, cfg);
        const double g = energy_G_heterogeneous(u, cfg);
        const bool ok = std::abs(sem - 1.0) <= 1e-3 && std::abs(g - 0.5) <= 1e-3;
        out.push_back(make("linear_function_identities", ok,
                           "[x]^2 = " + fmt(sem) + ", G = " + fmt(g)));
    }
    {  // p-homogeneity
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        DiscreteFunction u;
        u.space = &sp;
        u.coeff = Eigen::VectorXd::NullaryExpr(sp.ndof(), [&](Eigen::Index) { return unif(rng); });
        DiscreteFunction u2{&sp, 2.0 * u.coeff};
        const double g1 = energy_G_heterogeneous(u, cfg), g2 = energy_G_heterogeneous(u2, cfg);
        const double rel = std::abs(g2 - 4.0 * g1) / (4.0 * g1);
        out.push_back(make("p_homogeneity", rel <= 1e-12, "rel " + fmt(rel)));
    }
    {  // stiffness structure: row sums and quadratic-form consistency
        Mesh m8 = build_mesh(dom, 8);
        FeSpace sp8(m8, 1, Continuity::CG, Constraint::ZeroMean);
        KernelConfig cfg8 = make_kernel_config(dom, 2.0, 0.0, d0 / 2.0);
        EnergyModel model = make_het_model(Family::HetNeumann, sp8, cfg8, LoadFunctional{});
        Eigen::SparseMatrix<double> A = assemble_stiffness_p2(model);
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(sp8.ndof());
        Eigen::VectorXd rs = A * ones;
        double worst = 0.0;
        for (int i = 0; i < rs.size(); ++i) {
            double l1 = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, i); it; ++it)
                l1 += std::abs(it.value());
            if (l1 > 0.0) worst = std::max(worst, std::abs(rs[i]) / l1);
        }
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        DiscreteFunction u;
        u.space = &sp8;
        u.coeff = Eigen::VectorXd::NullaryExpr(sp8.ndof(), [&](Eigen::Index) { return unif(rng); });
        const double qf = u.coeff.dot(A * u.coeff);
        const double g = energy_G_heterogeneous(u, cfg8);
        const double rel = std::abs(qf - 2.0 * g) / std::abs(2.0 * g);
        out.push_back(make("stiffness_structure", worst <= 1e-8 && rel <= 1e-8,
                           "row-sum " + fmt(worst) + ", qf rel " + fmt(rel)));
    }
    return out;
}

std::vector<CheckResult> check_convolution() {
    std::vector<CheckResult> out;
    Domain dom = make_interval(0.0, 1.0);
    const double d0 = delta0(2.0, 1.0);
    Mesh m = build_mesh(dom, 64);
    FeSpace sp(m, 1, Continuity::CG, Constraint::None);
    KernelConfig cfg = make_kernel_config(dom, 2.0, 0.0, d0 / 2.0);

    {  // constants map to themselves
        DiscreteFunction c1 = interpolate(sp, [](Point) { return 3.25; });
        double worst = 0.0;
        for (const Point& pt : interior_sample(dom, 100))
            worst = std::max(worst, std::abs(apply_Kdelta(c1, cfg, pt) - 3.25));
        out.push_back(make("constant_preservation", worst <= 1e-12, "worst " + fmt(worst)));
    }
    {  // trace preservation at boundary DOFs
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x) + p.x; });
        const double a = apply_Kdelta(u, cfg, {0.0, 0.0}) - u.value_global({0.0, 0.0});
        const double b = apply_Kdelta(u, cfg, {1.0, 0.0}) - u.value_global({1.0, 0.0});
        out.push_back(make("trace_preservation", std::abs(a) + std::abs(b) == 0.0,
                           "boundary diffs " + fmt(a) + ", " + fmt(b)));
    }
    {  // W^{1,p} control: ||K u||_{W^{1,p}} / ||u|| bounded over the sweep
        DiscreteFunction u = interpolate(sp, [](Point p) { return std::cos(kPi * p.x); });
        double worst = 0.0;
        for (double f : {2.0, 4.0, 8.0}) {
            KernelConfig c = make_kernel_config(dom, 2.0, 0.0, d0 / f);
            const double num = smoothed_w1p_norm(u, c, 2.0);
            const double den =
                std::pow(std::pow(lp_norm(u, 2.0), 2.0) + seminorm_heterogeneous(u, c), 0.5);
            worst = std::max(worst, num / den);
        }
        out.push_back(make("smoothing_w1p_control", std::isfinite(worst) && worst < 100.0,
                           "worst ratio " + fmt(worst)));
    }
    return out;
}

std::vector<CheckResult> check_inequalities() {
    std::vector<CheckResult> out;
    const double d0 = delta0(2.0, 1.0);
    InequalityReport rep = inequality_suite(make_interval(0.0, 1.0),
                                            {d0 / 2.0, d0 / 4.0, d0 / 8.0, d0 / 16.0}, 30, 2.0, 0.0,
                                            20240901u, 64);
    for (const auto& c : rep.checks) {
        std::string detail = "worst " + fmt(c.worst);
        if (c.has_bound) detail += " bound " + fmt(c.bound);
        out.push_back(make(c.name, c.pass, detail));
    }
    return out;
}

std::vector<CheckResult> run_check_suite(const std::string& suite) {
    if (suite == "geometry") return check_geometry();
    if (suite == "kernels") return check_kernels();
    if (suite == "femspace") return check_femspace();
    if (suite == "assembly") return check_assembly();
    if (suite == "convolution") return check_convolution();
    if (suite == "inequalities") return check_inequalities();
    if (suite == "all") {
        std::vector<CheckResult> out;
        for (const char* s : {"geometry", "kernels", "femspace", "assembly", "convolution",
                              "inequalities"}) {
            auto part = run_check_suite(s);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    throw std::invalid_argument("unknown check suite '" + suite +
                                "' (geometry|kernels|femspace|assembly|convolution|inequalities|all)");
}

}  // namespace nlac
