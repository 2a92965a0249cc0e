#include "nlac/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>

namespace nlac {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

Constraint family_constraint(Family f) {
    switch (f) {
        case Family::HetNeumann:
        case Family::LocalNeumann: return Constraint::ZeroMean;
        case Family::HetDirichlet:
        case Family::LocalDirichlet: return Constraint::ZeroTrace;
        default: return Constraint::ZeroVolumeLayer;
    }
}

SolveResult solve_model(const EnergyModel& model, const SolverConfig& cfg,
                        const DiscreteFunction* warm) {
    if (model.p() == 2.0 && !warm) return solve_linear_p2(model);
    if (model.p() == 2.0) return minimize(model, cfg, warm);
    return minimize(model, cfg, warm);
}

}  // namespace

ManufacturedCase manufactured_case(const std::string& name) {
    ManufacturedCase mc;
    if (name == "neumann_cos") {
        mc.family = Family::HetNeumann;
        mc.load.f0 = [](Point p) { return kPi * kPi * std::cos(kPi * p.x); };
        mc.reference = [](Point p) { return std::cos(kPi * p.x); };
        return mc;
    }
    if (name == "dirichlet_sin") {
        mc.family = Family::ConstDirichlet;
        mc.load.f0 = [](Point p) { return kPi * kPi * std::sin(kPi * p.x); };
        mc.reference = [](Point p) { return std::sin(kPi * p.x); };
        return mc;
    }
    throw std::invalid_argument("manufactured_case: unknown case '" + name + "'");
}

std::vector<double> observed_order(const std::vector<double>& errors,
                                   const std::vector<double>& params) {
    if (errors.size() != params.size() || errors.size() < 2)
        throw std::invalid_argument("observed_order: need matching sequences of length >= 2");
    std::vector<double> slopes;
    for (size_t i = 0; i + 1 < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0)) {
            slopes.push_back(kNaN);
            continue;
        }
        slopes.push_back(std::log(errors[i] / errors[i + 1]) / std::log(params[i] / params[i + 1]));
    }
    return slopes;
}

ConvergenceReport run_path(const PathSpec& spec_in) {
    PathSpec spec = spec_in;
    if (!spec.manufactured.empty()) {
        ManufacturedCase mc = manufactured_case(spec.manufactured);
        spec.load = mc.load;
        spec.reference = mc.reference;
    }
    const size_t levels = spec.kind == PathKind::FixedSigma ? spec.ns.size() : spec.deltas.size();
    if (levels < 3) throw std::invalid_argument("run_path: need at least 3 levels");

    ConvergenceReport rep;
    rep.kind = spec.kind;
    rep.family = spec.family;
    rep.p = spec.p;
    rep.beta = spec.beta;

    const bool het = is_het(spec.family);
    const DistanceField lambda = smooth_distance(spec.domain);
    rep.constants["kappa0"] = lambda.kappa0;
    rep.constants["kappa1"] = lambda.kappa1;
    rep.constants["delta0"] = delta0(lambda.kappa0, lambda.kappa1);
    rep.constants["cbar"] = cbar(spec.domain.dim, spec.p);
    if (het) rep.constants["cgamma"] = kernel_constant(spec.domain.dim, spec.beta, spec.p);

    // ----- storage shared across levels -----
    struct Level {
        Mesh mesh;
        std::unique_ptr<FeSpace> space;
        std::optional<KernelConfig> kernel;
        std::optional<ConstHorizonParams> chp;
        SolveResult solve;
        double delta = 0.0;
    };
    std::vector<Level> solved;

    auto solve_level = [&](double delta, int n, const DiscreteFunction* warm, Level& lv) {
        lv.delta = delta;
        if (het) {
            lv.mesh = build_mesh(spec.domain, n);
            lv.space = std::make_unique<FeSpace>(lv.mesh, spec.degree, Continuity::CG,
                                                 family_constraint(spec.family));
            lv.kernel = make_kernel_config(spec.domain, spec.p, spec.beta, delta);
            EnergyModel model = make_het_model(spec.family, *lv.space, *lv.kernel, spec.load, spec.quad);
            lv.solve = solve_model(model, spec.solver, warm);
        } else {
            InflatedDomain inf = build_inflated(spec.domain, delta, n);
            lv.delta = inf.delta;  // snapped value actually used
            lv.mesh = std::move(inf.mesh);
            lv.space = std::make_unique<FeSpace>(lv.mesh, spec.degree, Continuity::CG,
                                                 Constraint::ZeroVolumeLayer);
            lv.chp = make_const_horizon(spec.domain.dim, spec.p, lv.delta);
            EnergyModel model = make_const_model(*lv.space, *lv.chp, spec.load, spec.quad);
            lv.solve = solve_model(model, spec.solver, warm);
        }
    };

    // fixed-h comparator: the discrete local minimizer on the same mesh
    auto local_comparator = [&](const FeSpace& space) {
        const Family lf = spec.family == Family::HetNeumann ? Family::LocalNeumann
                                                            : Family::LocalDirichlet;
        EnergyModel model = make_local_model(lf, space, spec.p, spec.load, spec.quad);
        return solve_model(model, spec.solver, nullptr);
    };

    // fixed-sigma comparator: fine-grid minimizer at the same delta
    Level ref_level;
    if (spec.kind == PathKind::FixedSigma) {
        solve_level(spec.deltas.at(0), 2 * spec.ns.back(), nullptr, ref_level);
        if (!ref_level.solve.converged) {
            rep.solves_ok = false;
            rep.note = "fine-grid reference solve failed";
            return rep;
        }
    }
    std::optional<SolveResult> uinf_h;  // fixed-h local comparator

    for (size_t lev = 0; lev < levels; ++lev) {
        const double delta = spec.kind == PathKind::FixedSigma ? spec.deltas.at(0)
                                                               : spec.deltas.at(lev);
        const int n = spec.kind == PathKind::FixedH ? spec.ns.at(0) : spec.ns.at(lev);
        const auto t0 = Clock::now();

        Level lv;
        const DiscreteFunction* warm = nullptr;
        DiscreteFunction warm_store;
        if (spec.warm_start && !solved.empty() && spec.p != 2.0) {
            if (spec.kind == PathKind::FixedH) {
                warm_store = solved.back().solve.u;
                warm = &warm_store;
            }
        }
        try {
            solve_level(delta, n, warm, lv);
        } catch (const std::exception& e) {
            rep.solves_ok = false;
            rep.note = std::string("level solve failed: ") + e.what();
            break;
        }
        if (!lv.solve.converged) {
            rep.solves_ok = false;
            rep.note = "level solve did not converge";
            break;
        }

        LevelRecord rec;
        rec.level = static_cast<int>(lev);
        rec.delta = lv.delta;
        rec.sigma = 1.0 / lv.delta;
        rec.h = lv.mesh.h_max;
        rec.dofs = lv.space->ndof();
        rec.energy = lv.solve.energy;
        rec.iters = lv.solve.iterations;
        rep.constants["delta_level_" + std::to_string(lev)] = lv.delta;

        if (spec.kind == PathKind::Diagonal) {
            rec.err_lp = lp_error(lv.solve.u, spec.reference, spec.p);
            DiscreteFunction ref_h = interpolate(*lv.space, spec.reference);
            DiscreteFunction diff{lv.space.get(), lv.solve.u.coeff - ref_h.coeff};
            rec.err_energy = w1p_seminorm(diff, spec.p);
        } else if (spec.kind == PathKind::FixedH) {
            if (!uinf_h) uinf_h = local_comparator(*lv.space);
            DiscreteFunction diff{lv.space.get(), lv.solve.u.coeff - uinf_h->u.coeff};
            rec.err_lp = lp_norm(diff, spec.p);
            rec.err_energy = w1p_seminorm(diff, spec.p);
        } else {  // FixedSigma: compare on the reference grid
            DiscreteFunction coarse_on_ref = prolong(lv.solve.u, *ref_level.space);
            DiscreteFunction diff{ref_level.space.get(),
                                  coarse_on_ref.coeff - ref_level.solve.u.coeff};
            rec.err_lp = lp_norm(diff, spec.p);
            if (het)
                rec.err_energy =
                    std::pow(seminorm_heterogeneous(diff, *ref_level.kernel, spec.quad),
                             1.0 / spec.p);
            else
                rec.err_energy = std::pow(
                    seminorm_const_horizon(diff, *ref_level.chp, spec.quad), 1.0 / spec.p);
        }
        rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        rep.records.push_back(rec);
        solved.push_back(std::move(lv));
    }

    // observed orders against the path's driving parameter
    if (rep.records.size() >= 2) {
        std::vector<double> e_lp, e_en, par;
        for (const auto& r : rep.records) {
            e_lp.push_back(r.err_lp);
            e_en.push_back(r.err_energy);
            par.push_back(spec.kind == PathKind::FixedH ? r.delta : r.h);
        }
        const auto o_lp = observed_order(e_lp, par);
        const auto o_en = observed_order(e_en, par);
        rep.records[0].order_lp = kNaN;
        rep.records[0].order_energy = kNaN;
        for (size_t i = 1; i < rep.records.size(); ++i) {
            rep.records[i].order_lp = o_lp[i - 1];
            rep.records[i].order_energy = o_en[i - 1];
        }
    }
    return rep;
}

GammaReport gamma_pointwise_check(const std::function<double(Point)>& v, const LoadFunctional& f,
                                  Family family, const Domain& domain, double p, double beta,
                                  const std::vector<double>& deltas, int n_fine) {
    GammaReport rep;
    rep.deltas = deltas;

    if (is_het(family)) {
        Mesh mesh = build_mesh(domain, n_fine);
        FeSpace space(mesh, 1, Continuity::CG, family_constraint(family));
        DiscreteFunction vh = interpolate(space, v);
        const Family lf =
            family == Family::HetNeumann ? Family::LocalNeumann : Family::LocalDirichlet;
        EnergyModel local = make_local_model(lf, space, p, f);
        rep.e_limit = energy_total(vh, local);
        for (double d : deltas) {
            KernelConfig cfg = make_kernel_config(domain, p, beta, d);
            EnergyModel model = make_het_model(family, space, cfg, f);
            rep.e_delta.push_back(energy_total(vh, model));
        }
    } else {
        // constant horizon: v zero-extended onto Omega_delta per level
        const int n = n_fine;
        bool e_limit_set = false;
        for (double d : deltas) {
            InflatedDomain inf = build_inflated(domain, d, n);
            if (std::abs(inf.delta - d) > 1e-12)
                throw std::invalid_argument(
                    "gamma_pointwise_check: delta not resolved by the fine mesh");
            FeSpace space(inf.mesh, 1, Continuity::CG, Constraint::ZeroVolumeLayer);
            DiscreteFunction vh = interpolate(space, v);
            ConstHorizonParams chp = make_const_horizon(domain.dim, p, inf.delta);
            EnergyModel model = make_const_model(space, chp, f);
            rep.e_delta.push_back(energy_total(vh, model));
            if (!e_limit_set) {
                rep.e_limit = energy_local(vh, p) - load_pairing(f, vh);
                e_limit_set = true;
            }
        }
    }

    for (double e : rep.e_delta) rep.gaps.push_back(std::abs(e - rep.e_limit));
    rep.strictly_decreasing = true;
    for (size_t i = 0; i + 1 < rep.gaps.size(); ++i)
        if (!(rep.gaps[i + 1] < rep.gaps[i])) rep.strictly_decreasing = false;
    rep.last_over_first = rep.gaps.front() > 0.0 ? rep.gaps.back() / rep.gaps.front() : 0.0;
    rep.pass = rep.strictly_decreasing && rep.last_over_first <= 0.25;
    return rep;
}

InequalityReport inequality_suite(const Domain& domain, const std::vector<double>& deltas,
                                  int samples, double p, double beta, unsigned seed, int n) {
    InequalityReport rep;
    Mesh mesh = build_mesh(domain, n);
    FeSpace space(mesh, 1, Continuity::CG, Constraint::None);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<DiscreteFunction> us;
    for (int i = 0; i < samples; ++i) {
        DiscreteFunction u;
        u.space = &space;
        u.coeff = Eigen::VectorXd::NullaryExpr(space.ndof(), [&](Eigen::Index) { return unif(rng); });
        us.push_back(std::move(u));
    }

    std::vector<KernelConfig> cfgs;
    for (double d : deltas) cfgs.push_back(make_kernel_config(domain, p, beta, d));

    // seminorms [u]^p and W^{1,p} seminorms, precomputed
    std::vector<std::vector<double>> sem(deltas.size());
    std::vector<double> w1p(us.size()), lp(us.size());
    for (size_t i = 0; i < us.size(); ++i) {
        w1p[i] = w1p_seminorm(us[i], p);
        lp[i] = lp_norm(us[i], p);
    }
    for (size_t di = 0; di < deltas.size(); ++di) {
        sem[di].resize(us.size());
        for (size_t i = 0; i < us.size(); ++i)
            sem[di][i] = std::pow(seminorm_heterogeneous(us[i], cfgs[di]), 1.0 / p);
    }

    {  // (1) embedding with the explicit constant (1-delta)^{-1/p}
        InequalityCheck c;
        c.name = "embedding_W1p(prop 1)";
        c.has_bound = true;
        c.bound = 1.0 + 1e-8;
        c.worst = 0.0;
        for (size_t di = 0; di < deltas.size(); ++di) {
            const double factor = std::pow(1.0 - deltas[di], 1.0 / p);
            for (size_t i = 0; i < us.size(); ++i)
                if (w1p[i] > 0.0) c.worst = std::max(c.worst, sem[di][i] * factor / w1p[i]);
        }
        c.pass = c.worst <= c.bound;
        rep.checks.push_back(c);
    }
    {  // (6) delta-stability upper bound with the explicit exponent
        InequalityCheck c;
        c.name = "delta_stability(prop 6)";
        c.has_bound = true;
        c.bound = 1.0 + 1e-8;
        c.worst = 0.0;
        for (size_t d1 = 0; d1 < deltas.size(); ++d1)
            for (size_t d2 = 0; d2 < deltas.size(); ++d2) {
                if (!(deltas[d1] < deltas[d2])) continue;
                const double allowed =
                    std::pow(deltas[d2] / deltas[d1], 1.0 + (domain.dim - beta) / p);
                for (size_t i = 0; i < us.size(); ++i)
                    if (sem[d2][i] > 0.0)
                        c.worst = std::max(c.worst, sem[d1][i] / (allowed * sem[d2][i]));
            }
        c.pass = c.worst <= c.bound;
        rep.checks.push_back(c);
    }
    {  // (5) Neumann Poincare constant: boundedness only
        InequalityCheck c;
        c.name = "poincare_neumann(prop 5)";
        c.has_bound = false;
        c.worst = 0.0;
        Eigen::VectorXd m = mean_vector(space);
        const double vol = domain.measure();
        for (size_t di = 0; di < deltas.size(); ++di)
            for (size_t i = 0; i < us.size(); ++i) {
                DiscreteFunction z{&space, us[i].coeff};
                z.coeff.array() -= m.dot(us[i].coeff) / vol;  // zero-mean projection
                const double semz = std::pow(seminorm_heterogeneous(z, cfgs[di]), 1.0 / p);
                if (semz > 0.0) c.worst = std::max(c.worst, lp_norm(z, p) / semz);
            }
        c.pass = std::isfinite(c.worst);
        rep.checks.push_back(c);
    }
    {  // (7) energy equivalence: p*G / [u]^p within a positive interval
        InequalityCheck lo, hi;
        lo.name = "energy_equiv_lower(prop 7)";
        hi.name = "energy_equiv_upper(prop 7)";
        lo.worst = 1e300;
        hi.worst = 0.0;
        for (size_t di = 0; di < deltas.size(); ++di)
            for (size_t i = 0; i < us.size(); ++i) {
                const double semp = std::pow(sem[di][i], p);
                if (semp <= 0.0) continue;
                const double ratio = p * energy_G_heterogeneous(us[i], cfgs[di]) / semp;
                lo.worst = std::min(lo.worst, ratio);
                hi.worst = std::max(hi.worst, ratio);
            }
        lo.pass = lo.worst > 0.0;
        hi.pass = std::isfinite(hi.worst);
        rep.checks.push_back(lo);
        rep.checks.push_back(hi);
    }
    if (domain.dim == 1) {  // constant-horizon Poincare (section-4 analogue)
        InequalityCheck c;
        c.name = "poincare_const_horizon(S^p)";
        c.has_bound = false;
        c.worst = 0.0;
        for (double d : deltas) {
            // resolve delta by whole cells of a companion inflated mesh
            const int nn = std::max(8, static_cast<int>(std::round(4.0 / d)));
            InflatedDomain inf = build_inflated(domain, d, nn);
            FeSpace vspace(inf.mesh, 1, Continuity::CG, Constraint::ZeroVolumeLayer);
            ConstHorizonParams chp = make_const_horizon(domain.dim, p, inf.delta);
            std::mt19937_64 rng2(seed + 17);
            for (int i = 0; i < std::min(samples, 20); ++i) {
                DiscreteFunction u;
                u.space = &vspace;
                u.coeff = Eigen::VectorXd::NullaryExpr(vspace.ndof(),
                                                       [&](Eigen::Index) { return unif(rng2); });
                for (int pin : vspace.pinned_dofs()) u.coeff[pin] = 0.0;
                const double s = std::pow(seminorm_const_horizon(u, chp), 1.0 / p);
                if (s > 0.0) c.worst = std::max(c.worst, lp_norm(u, p) / s);
            }
        }
        c.pass = std::isfinite(c.worst);
        rep.checks.push_back(c);
    }

    for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
    return rep;
}

namespace {

void format_double(std::ostream& os, double v) {
    if (std::isnan(v)) {
        os << "n/a";
        return;
    }
    char buf[40];
    snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

void write_csv(std::ostream& os, const ConvergenceReport& report, bool deterministic_artifacts) {
    os << "level,delta,h,dofs,err_lp,err_energy,order_lp,order_energy,iters,seconds\n";
    for (const auto& r : report.records) {
        os << r.level << ",";
        format_double(os, r.delta);
        os << ",";
        format_double(os, r.h);
        os << "," << r.dofs << ",";
        format_double(os, r.err_lp);
        os << ",";
        format_double(os, r.err_energy);
        os << ",";
        format_double(os, r.order_lp);
        os << ",";
        format_double(os, r.order_energy);
        os << "," << r.iters << ",";
        format_double(os, deterministic_artifacts ? 0.0 : r.seconds);
        os << "\n";
    }
}

}  // namespace nlac
