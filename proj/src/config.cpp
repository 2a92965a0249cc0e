#include "nlac/config.hpp"

#include <fstream>
#include <set>

namespace nlac {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T def) {
    if (!j.contains(key)) return def;
    return j.at(key).get<T>();
}

}  // namespace

json RunConfig::to_json() const {
    json j;
    j["problem"] = {{"family", family}, {"d", d},      {"p", p},
                    {"beta", beta},     {"delta", delta}, {"sigma", sigma}};
    if (d == 1)
        j["problem"]["domain"] = {{"a", domain.ax}, {"b", domain.bx}};
    else
        j["problem"]["domain"] = {
            {"ax", domain.ax}, {"bx", domain.bx}, {"ay", domain.ay}, {"by", domain.by}};
    j["discretization"] = {{"n", n}, {"degree", degree}, {"continuity", continuity}};
    j["load"] = {{"case", load_case}, {"f0", f0_expr}, {"f1", f1_expr}, {"g", g_expr}};
    j["solver"] = {{"grad_tol", solver.grad_tol},
                   {"max_iterations", solver.max_iterations},
                   {"armijo_c", solver.armijo_c},
                   {"backtrack", solver.backtrack},
                   {"max_backtracks", solver.max_backtracks},
                   {"hessian_reg", solver.hessian_reg},
                   {"initial", initial}};
    j["experiment"] = {{"path", path},
                       {"deltas", deltas},
                       {"ns", ns},
                       {"levels", levels},
                       {"reference", reference}};
    j["output"] = output;
    j["seed"] = seed;
    j["deterministic_artifacts"] = deterministic_artifacts;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    reject_unknown(j, "config root",
                   {"problem", "discretization", "load", "solver", "experiment", "output", "seed",
                    "deterministic_artifacts"});

    if (j.contains("problem")) {
        const json& p = j.at("problem");
        reject_unknown(p, "problem", {"family", "d", "p", "beta", "delta", "sigma", "domain"});
        c.family = get_or<std::string>(p, "family", c.family);
        c.d = get_or<int>(p, "d", c.d);
        c.p = get_or<double>(p, "p", c.p);
        c.beta = get_or<double>(p, "beta", c.beta);
        c.delta = get_or<double>(p, "delta", c.delta);
        c.sigma = get_or<double>(p, "sigma", c.sigma);
        if (p.contains("domain")) {
            const json& dd = p.at("domain");
            if (c.d == 1) {
                reject_unknown(dd, "problem.domain", {"a", "b"});
                c.domain = make_interval(get_or<double>(dd, "a", 0.0), get_or<double>(dd, "b", 1.0));
            } else {
                reject_unknown(dd, "problem.domain", {"ax", "bx", "ay", "by"});
                c.domain = make_rectangle(get_or<double>(dd, "ax", 0.0), get_or<double>(dd, "bx", 1.0),
                                          get_or<double>(dd, "ay", 0.0), get_or<double>(dd, "by", 1.0));
            }
        } else if (c.d == 2) {
            c.domain = make_rectangle(0.0, 1.0, 0.0, 1.0);
        }
    }
    if (j.contains("discretization")) {
        const json& dj = j.at("discretization");
        reject_unknown(dj, "discretization", {"n", "degree", "continuity"});
        c.n = get_or<int>(dj, "n", c.n);
        c.degree = get_or<int>(dj, "degree", c.degree);
        c.continuity = get_or<std::string>(dj, "continuity", c.continuity);
    }
    if (j.contains("load")) {
        const json& lj = j.at("load");
        reject_unknown(lj, "load", {"case", "f0", "f1", "g"});
        c.load_case = get_or<std::string>(lj, "case", "");
        c.f0_expr = get_or<std::string>(lj, "f0", "");
        c.g_expr = get_or<std::string>(lj, "g", "");
        c.f1_expr = get_or<std::vector<std::string>>(lj, "f1", {});
    }
    if (j.contains("solver")) {
        const json& sj = j.at("solver");
        reject_unknown(sj, "solver",
                       {"grad_tol", "max_iterations", "armijo_c", "backtrack", "max_backtracks",
                        "hessian_reg", "initial"});
        c.solver.grad_tol = get_or<double>(sj, "grad_tol", c.solver.grad_tol);
        c.solver.max_iterations = get_or<int>(sj, "max_iterations", c.solver.max_iterations);
        c.solver.armijo_c = get_or<double>(sj, "armijo_c", c.solver.armijo_c);
        c.solver.backtrack = get_or<double>(sj, "backtrack", c.solver.backtrack);
        c.solver.max_backtracks = get_or<int>(sj, "max_backtracks", c.solver.max_backtracks);
        c.solver.hessian_reg = get_or<double>(sj, "hessian_reg", c.solver.hessian_reg);
        c.initial = get_or<std::string>(sj, "initial", c.initial);
    }
    if (j.contains("experiment")) {
        const json& ej = j.at("experiment");
        reject_unknown(ej, "experiment", {"path", "deltas", "ns", "levels", "reference"});
        c.path = get_or<std::string>(ej, "path", c.path);
        c.deltas = get_or<std::vector<double>>(ej, "deltas", {});
        c.ns = get_or<std::vector<int>>(ej, "ns", {});
        c.levels = get_or<int>(ej, "levels", c.levels);
        c.reference = get_or<std::string>(ej, "reference", c.reference);
    }
    c.output = get_or<std::string>(j, "output", c.output);
    c.seed = get_or<unsigned>(j, "seed", c.seed);
    c.deterministic_artifacts = get_or<bool>(j, "deterministic_artifacts", false);
    c.validate();
    return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    return from_json(j);
}

Family RunConfig::family_enum() const {
    if (family == "het-neumann") return Family::HetNeumann;
    if (family == "het-dirichlet") return Family::HetDirichlet;
    if (family == "const-dirichlet") return Family::ConstDirichlet;
    if (family == "local-neumann") return Family::LocalNeumann;
    if (family == "local-dirichlet") return Family::LocalDirichlet;
    throw ConfigError("config: unknown family '" + family + "'");
}

LoadFunctional RunConfig::make_load() const {
    if (!load_case.empty()) return manufactured_case(load_case).load;
    LoadFunctional f;
    if (!f0_expr.empty()) {
        auto e = Expression::parse(f0_expr);
        f.f0 = [e](Point p) { return e(p); };
    }
    if (!f1_expr.empty()) {
        auto ex = Expression::parse(f1_expr.at(0));
        f.f1x = [ex](Point p) { return ex(p); };
        if (f1_expr.size() > 1) {
            auto ey = Expression::parse(f1_expr.at(1));
            f.f1y = [ey](Point p) { return ey(p); };
        }
    }
    if (!g_expr.empty()) {
        auto e = Expression::parse(g_expr);
        f.g = [e](Point p) { return e(p); };
    }
    return f;
}

std::function<double(Point)> RunConfig::reference_function() const {
    if (!load_case.empty()) return manufactured_case(load_case).reference;
    return {};
}

void RunConfig::validate() const {
    family_enum();
    if (d != 1 && d != 2) throw ConfigError("config: d must be 1 or 2");
    if (!(p > 1.0)) throw ConfigError("config: p must exceed 1");
    if (degree != 1 && degree != 2) throw ConfigError("config: degree must be 1 or 2");
    if (continuity != "CG" && continuity != "DG")
        throw ConfigError("config: continuity must be CG or DG");
    if (n < 1) throw ConfigError("config: n must be >= 1");
    if (path != "solve" && path != "diagonal" && path != "fixed-h" && path != "fixed-sigma" &&
        path != "gamma" && path != "inequalities")
        throw ConfigError("config: unknown experiment path '" + path + "'");
    if (initial != "zero" && initial != "warm")
        throw ConfigError("config: solver.initial must be zero or warm");

    const Family fam = family_enum();
    if (is_het(fam)) {
        const DistanceField lam = smooth_distance(domain);
        const double dmax = delta0(lam.kappa0, lam.kappa1);
        auto check_delta = [&](double dv) {
            if (dv >= dmax)
                throw ConfigError("config: delta = " + std::to_string(dv) +
                                  " violates (A_delta): requires delta < delta0 = " +
                                  std::to_string(dmax));
        };
        if (delta > 0.0) check_delta(delta);
        if (sigma > 0.0) check_delta(std::min(dmax * 0.999999999, 1.0 / sigma));
        for (double dv : deltas) check_delta(dv);
        if (beta < 0.0 || beta >= d + p) throw ConfigError("config: beta outside [0, d+p)");
    }
}

}  // namespace nlac
