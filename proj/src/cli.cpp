#include "nlac/cli.hpp"

#include "nlac/checks.hpp"
#include "nlac/config.hpp"
#include "nlac/convolution.hpp"
#include "nlac/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

namespace nlac {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolve = 3;
constexpr int kExitInternal = 4;

struct SolveFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PathKind path_kind(const std::string& s) {
    if (s == "diagonal") return PathKind::Diagonal;
    if (s == "fixed-h") return PathKind::FixedH;
    return PathKind::FixedSigma;
}

// resolved delta sequence: explicit list, or a dyadic sweep under delta0
std::vector<double> resolve_deltas(const RunConfig& cfg) {
    if (!cfg.deltas.empty()) return cfg.deltas;
    double top;
    if (cfg.delta > 0.0) {
        top = cfg.delta;
    } else if (cfg.sigma > 0.0) {
        top = 1.0 / cfg.sigma;
    } else {
        const DistanceField lam = smooth_distance(cfg.domain);
        top = delta0(lam.kappa0, lam.kappa1) / 2.0;
    }
    if (is_het(cfg.family_enum())) {
        const DistanceField lam = smooth_distance(cfg.domain);
        const double cap = delta0(lam.kappa0, lam.kappa1);
        if (top >= cap) top = cap * (1.0 - 1e-9);  // min{delta0, 1/sigma} cap, logged
    }
    std::vector<double> out;
    for (int i = 0; i < cfg.levels; ++i) out.push_back(top / std::pow(2.0, i));
    return out;
}

std::vector<int> resolve_ns(const RunConfig& cfg) {
    if (!cfg.ns.empty()) return cfg.ns;
    std::vector<int> out;
    for (int i = 0; i < cfg.levels; ++i) out.push_back(cfg.n * (1 << i));
    return out;
}

json report_to_json(const ConvergenceReport& rep) {
    json j;
    j["solves_ok"] = rep.solves_ok;
    j["note"] = rep.note;
    j["constants"] = rep.constants;
    j["records"] = json::array();
    for (const auto& r : rep.records) {
        json rec = {{"level", r.level},       {"delta", r.delta},   {"sigma", r.sigma},
                    {"h", r.h},               {"dofs", r.dofs},     {"err_lp", r.err_lp},
                    {"err_energy", r.err_energy}, {"energy", r.energy}, {"iters", r.iters},
                    {"seconds", r.seconds}};
        rec["order_lp"] = std::isnan(r.order_lp) ? json(nullptr) : json(r.order_lp);
        rec["order_energy"] = std::isnan(r.order_energy) ? json(nullptr) : json(r.order_energy);
        j["records"].push_back(rec);
    }
    return j;
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const json& results) {
    json manifest;
    manifest["tool"] = "nlac";
    manifest["config"] = cfg.to_json();
    manifest["results"] = results;
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
}

int cmd_run(const std::string& config_path) {
    RunConfig cfg = RunConfig::load_file(config_path);
    fs::create_directories(cfg.output);
    const fs::path dir(cfg.output);

    if (cfg.path == "solve") {
        Mesh mesh;
        std::unique_ptr<FeSpace> space;
        std::optional<KernelConfig> kc;
        std::optional<ConstHorizonParams> chp;
        EnergyModel model;
        const Family fam = cfg.family_enum();
        const double delta = resolve_deltas(cfg).front();
        if (is_het(fam)) {
            mesh = build_mesh(cfg.domain, cfg.n);
            space = std::make_unique<FeSpace>(
                mesh, cfg.degree, cfg.continuity == "CG" ? Continuity::CG : Continuity::DG,
                fam == Family::HetNeumann ? Constraint::ZeroMean : Constraint::ZeroTrace);
            kc = make_kernel_config(cfg.domain, cfg.p, cfg.beta, delta);
            model = make_het_model(fam, *space, *kc, cfg.make_load());
        } else if (fam == Family::ConstDirichlet) {
            InflatedDomain inf = build_inflated(cfg.domain, delta, cfg.n);
            mesh = std::move(inf.mesh);
            space = std::make_unique<FeSpace>(mesh, cfg.degree, Continuity::CG,
                                              Constraint::ZeroVolumeLayer);
            chp = make_const_horizon(cfg.d, cfg.p, inf.delta);
            model = make_const_model(*space, *chp, cfg.make_load());
        } else {
            mesh = build_mesh(cfg.domain, cfg.n);
            space = std::make_unique<FeSpace>(
                mesh, cfg.degree, Continuity::CG,
                fam == Family::LocalNeumann ? Constraint::ZeroMean : Constraint::ZeroTrace);
            model = make_local_model(fam, *space, cfg.p, cfg.make_load());
        }
        SolveResult r = cfg.p == 2.0 ? solve_linear_p2(model) : minimize(model, cfg.solver);
        if (!r.converged) throw SolveFailure("solver did not converge");
        {
            std::ofstream log(dir / "iterations.log");
            write_iteration_log(log, r);
            std::ofstream coeffs(dir / "solution.txt");
            write_coefficients(coeffs, r.u);
            std::ofstream meshtxt(dir / "mesh.txt");
            mesh.write_text(meshtxt);
        }
        json results = {{"energy", r.energy},
                        {"grad_norm", r.grad_norm},
                        {"iterations", r.iterations},
                        {"dofs", space->ndof()},
                        {"delta", delta}};
        auto ref = cfg.reference_function();
        if (ref) results["err_lp"] = lp_error(r.u, ref, cfg.p);
        write_manifest(dir, cfg, results);
        std::cout << "solve: energy " << r.energy << ", grad " << r.grad_norm << "\n";
        return kExitOk;
    }

    if (cfg.path == "gamma") {
        std::function<double(Point)> v;
        LoadFunctional f = cfg.make_load();
        if (!cfg.load_case.empty()) {
            v = manufactured_case(cfg.load_case).reference;
        } else {
            v = [](Point p) { return std::cos(std::numbers::pi * p.x); };
        }
        GammaReport rep = gamma_pointwise_check(v, f, cfg.family_enum(), cfg.domain, cfg.p,
                                                cfg.beta, resolve_deltas(cfg), cfg.n);
        json results = {{"deltas", rep.deltas},
                        {"e_delta", rep.e_delta},
                        {"e_limit", rep.e_limit},
                        {"gaps", rep.gaps},
                        {"strictly_decreasing", rep.strictly_decreasing},
                        {"last_over_first", rep.last_over_first},
                        {"pass", rep.pass}};
        write_manifest(dir, cfg, results);
        std::cout << "gamma check: " << (rep.pass ? "pass" : "FAIL") << " (ratio "
                  << rep.last_over_first << ")\n";
        return rep.pass ? kExitOk : kExitVerdict;
    }

    if (cfg.path == "inequalities") {
        InequalityReport rep =
            inequality_suite(cfg.domain, resolve_deltas(cfg), 100, cfg.p, cfg.beta, cfg.seed, cfg.n);
        json checks = json::array();
        for (const auto& c : rep.checks) {
            checks.push_back({{"name", c.name},
                              {"worst", c.worst},
                              {"bound", c.has_bound ? json(c.bound) : json(nullptr)},
                              {"pass", c.pass}});
            std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << " worst " << c.worst << "\n";
        }
        write_manifest(dir, cfg, {{"checks", checks}, {"pass", rep.pass}});
        return rep.pass ? kExitOk : kExitVerdict;
    }

    // convergence paths
    PathSpec spec;
    spec.kind = path_kind(cfg.path);
    spec.family = cfg.family_enum();
    spec.domain = cfg.domain;
    spec.p = cfg.p;
    spec.beta = cfg.beta;
    spec.degree = cfg.degree;
    spec.deltas = resolve_deltas(cfg);
    spec.ns = resolve_ns(cfg);
    if (spec.kind == PathKind::FixedH) spec.ns = {cfg.n};
    spec.manufactured = cfg.load_case;
    if (cfg.load_case.empty()) spec.load = cfg.make_load();
    spec.solver = cfg.solver;
    spec.warm_start = cfg.initial == "warm";

    ConvergenceReport rep = run_path(spec);
    {
        std::ofstream csv(dir / (cfg.path + ".csv"));
        write_csv(csv, rep, cfg.deterministic_artifacts);
    }
    write_manifest(dir, cfg, report_to_json(rep));
    if (!rep.solves_ok) throw SolveFailure(rep.note);

    bool verdict = true;
    for (size_t i = 0; i + 1 < rep.records.size(); ++i)
        if (!(rep.records[i + 1].err_lp < rep.records[i].err_lp)) verdict = false;
    std::cout << cfg.path << ": " << rep.records.size() << " levels, final err_lp "
              << rep.records.back().err_lp << (verdict ? " (decreasing)" : " (NOT decreasing)")
              << "\n";
    return verdict ? kExitOk : kExitVerdict;
}

int cmd_sweep(const std::string& config_path) {
    // delta sweep: the pointwise energy-limit diagnostic plus the
    // inequality suite over the config's delta list
    RunConfig cfg = RunConfig::load_file(config_path);
    fs::create_directories(cfg.output);
    const fs::path dir(cfg.output);
    const std::vector<double> deltas = resolve_deltas(cfg);

    InequalityReport ineq = inequality_suite(cfg.domain, deltas, 100, cfg.p, cfg.beta, cfg.seed, cfg.n);
    json checks = json::array();
    for (const auto& c : ineq.checks)
        checks.push_back({{"name", c.name},
                          {"worst", c.worst},
                          {"bound", c.has_bound ? json(c.bound) : json(nullptr)},
                          {"pass", c.pass}});

    bool pass = ineq.pass;
    json results = {{"inequalities", checks}};
    if (!cfg.load_case.empty()) {
        ManufacturedCase mc = manufactured_case(cfg.load_case);
        GammaReport g = gamma_pointwise_check(mc.reference, mc.load, cfg.family_enum(), cfg.domain,
                                              cfg.p, cfg.beta, deltas, cfg.n);
        results["gamma"] = {{"gaps", g.gaps}, {"pass", g.pass}};
        pass = pass && g.pass;
    }
    results["pass"] = pass;
    write_manifest(dir, cfg, results);
    std::cout << "sweep: " << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kExitOk : kExitVerdict;
}

int cmd_check(const std::string& suite) {
    std::vector<CheckResult> results = run_check_suite(suite);
    bool pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[pass] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
        pass = pass && r.pass;
    }
    return pass ? kExitOk : kExitVerdict;
}

int cmd_table(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) {
        std::cerr << "table: cannot open '" << report_path << "'\n";
        return kExitConfig;
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    if (rows.empty()) {
        std::cout << "(empty report)\n";
        return kExitOk;
    }
    std::vector<size_t> width(rows[0].size(), 0);
    for (auto& r : rows)
        for (size_t c = 0; c < r.size() && c < width.size(); ++c) {
            // shorten long doubles for display
            if (r[c].size() > 12 && r[c].find('.') != std::string::npos) {
                std::ostringstream os;
                os << std::setprecision(6) << std::stod(r[c]);
                r[c] = os.str();
            }
            width[c] = std::max(width[c], r[c].size());
        }
    for (const auto& r : rows) {
        for (size_t c = 0; c < r.size(); ++c)
            std::cout << std::setw(static_cast<int>(width[c]) + 2) << r[c];
        std::cout << "\n";
    }
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"nlac: nonlocal variational solver and AC-convergence harness"};
    app.require_subcommand(1);

    std::string config_path, suite, report_path;
    CLI::App* run = app.add_subcommand("run", "execute the experiment described by a JSON config");
    run->add_option("config", config_path, "config file")->required();
    CLI::App* check = app.add_subcommand("check", "run a module invariant suite");
    check->add_option("suite", suite, "geometry|kernels|femspace|assembly|convolution|inequalities|all")
        ->required();
    CLI::App* sweep = app.add_subcommand("sweep", "delta-sweep diagnostics (gamma + inequalities)");
    sweep->add_option("config", config_path, "config file")->required();
    CLI::App* table = app.add_subcommand("table", "render a CSV report as an aligned table");
    table->add_option("report", report_path, "report CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (check->parsed()) return cmd_check(suite);
        if (sweep->parsed()) return cmd_sweep(config_path);
        if (table->parsed()) return cmd_table(report_path);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SyntaxError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CompatibilityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolveFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolve;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace nlac
