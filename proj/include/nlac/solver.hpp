#pragma once

#include "nlac/assembly.hpp"

#include <array>
#include <vector>

namespace nlac {

struct SolverConfig {
    double grad_tol = 1e-11;     // relative, on the projected free-DOF gradient
    int max_iterations = 100;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 40;
    double hessian_reg = 1e-10;  // epsilon_H scale (p != 2)
    double small_p_floor = 1e-8; // |D| floor for the experimental 1 < p < 2 branch
    bool allow_small_p = false;
};

struct SolveResult {
    DiscreteFunction u;
    double energy = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double seconds = 0.0;
    // one record per accepted iterate: {iter, energy, grad norm, step}
    std::vector<std::array<double, 4>> log;
};

/// Exact linear path at p = 2: sparse direct solve of the stiffness
/// system; the zero-mean constraint goes through a bordered system.
SolveResult solve_linear_p2(const EnergyModel& model);

/// Damped Newton with Armijo backtracking for the convex p-energy;
/// gradient and step are projected onto the mean-zero hyperplane for
/// Neumann constraints.
SolveResult minimize(const EnergyModel& model, const SolverConfig& config = {},
                     const DiscreteFunction* initial = nullptr);

/// Euclidean norm of the (projected) first variation over free DOFs,
/// normalized by the load vector norm (1 when the load is zero).
double residual_norm(const DiscreteFunction& u, const EnergyModel& model);

void write_iteration_log(std::ostream& os, const SolveResult& r);

}  // namespace nlac
