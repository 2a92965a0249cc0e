#pragma once

#include "nlac/expression.hpp"
#include "nlac/harness.hpp"

#include <json.hpp>

#include <string>

namespace nlac {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fully-resolved run configuration.  Parsing materializes every default
/// so the stored manifest round-trips exactly; unknown keys are rejected.
struct RunConfig {
    // problem
    std::string family = "het-neumann";
    int d = 1;
    double p = 2.0;
    double beta = 0.0;
    double delta = 0.0;       // 0: derive from sigma or experiment deltas
    double sigma = 0.0;
    Domain domain = make_interval(0.0, 1.0);

    // discretization
    int n = 64;
    int degree = 1;
    std::string continuity = "CG";

    // load: named manufactured case, or expressions
    std::string load_case;
    std::string f0_expr, g_expr;
    std::vector<std::string> f1_expr;

    SolverConfig solver;
    std::string initial = "zero";  // zero | warm

    // experiment
    std::string path = "solve";   // solve | diagonal | fixed-h | fixed-sigma | gamma | inequalities
    std::vector<double> deltas;
    std::vector<int> ns;
    int levels = 4;
    std::string reference = "analytic";  // analytic | fine-grid

    std::string output = "out";
    unsigned seed = 1234;
    bool deterministic_artifacts = false;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load_file(const std::string& path);

    Family family_enum() const;
    /// Builds the load functional from the named case or expressions.
    LoadFunctional make_load() const;
    std::function<double(Point)> reference_function() const;  // empty when none
    /// Semantic validation beyond the schema (delta windows, etc.).
    void validate() const;
};

}  // namespace nlac
