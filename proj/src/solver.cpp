#include "nlac/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace nlac {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<int> free_dof_map(const FeSpace& sp, int& nfree) {
    std::vector<int> map(sp.ndof(), -1);
    nfree = 0;
    for (int i = 0; i < sp.ndof(); ++i)
        if (!sp.pinned(i)) map[i] = nfree++;
    return map;
}

Eigen::VectorXd restrict_free(const Eigen::VectorXd& full, const std::vector<int>& map, int nfree) {
    Eigen::VectorXd out(nfree);
    for (int i = 0; i < full.size(); ++i)
        if (map[i] >= 0) out[map[i]] = full[i];
    return out;
}

void scatter_free(const Eigen::VectorXd& red, const std::vector<int>& map, Eigen::VectorXd& full) {
    for (int i = 0; i < full.size(); ++i) full[i] = map[i] >= 0 ? red[map[i]] : 0.0;
}

Eigen::SparseMatrix<double> restrict_matrix(const Eigen::SparseMatrix<double>& A,
                                            const std::vector<int>& map, int nfree) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(A.nonZeros());
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            const int r = map[static_cast<int>(it.row())], c = map[static_cast<int>(it.col())];
            if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
        }
    Eigen::SparseMatrix<double> out(nfree, nfree);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

// projector onto the mean-zero hyperplane (identity when no constraint)
struct MeanProjector {
    bool active = false;
    Eigen::VectorXd m;  // free-restricted mean vector
    double mm = 1.0;

    void apply(Eigen::VectorXd& v) const {
        if (active) v -= (m.dot(v) / mm) * m;
    }
};

MeanProjector make_projector(const EnergyModel& model, const std::vector<int>& map, int nfree) {
    MeanProjector P;
    if (!model.space->has_mean_constraint()) return P;
    P.active = true;
    P.m = restrict_free(mean_vector(*model.space), map, nfree);
    P.mm = P.m.dot(P.m);
    return P;
}

double load_scale(const Eigen::VectorXd& b_free, const MeanProjector& P) {
    Eigen::VectorXd bp = b_free;
    P.apply(bp);
    const double n = bp.norm();
    return n > 0.0 ? n : 1.0;
}

}  // namespace

SolveResult solve_linear_p2(const EnergyModel& model) {
    if (model.p() != 2.0) throw std::invalid_argument("solve_linear_p2: p must equal 2");
    const auto t0 = Clock::now();
    const FeSpace& sp = *model.space;

    int nfree = 0;
    const std::vector<int> map = free_dof_map(sp, nfree);
    const Eigen::SparseMatrix<double> A = assemble_stiffness_p2(model);
    const Eigen::SparseMatrix<double> Af = restrict_matrix(A, map, nfree);
    const Eigen::VectorXd b = load_vector(model);
    const Eigen::VectorXd bf = restrict_free(b, map, nfree);

    Eigen::VectorXd xf;
    double residual = 0.0;
    if (sp.has_mean_constraint()) {
        // bordered system [A m; m^T 0][x; mu] = [b; 0]
        const Eigen::VectorXd mf = restrict_free(mean_vector(sp), map, nfree);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(Af.nonZeros() + 2 * nfree);
        for (int k = 0; k < Af.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(Af, k); it; ++it)
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                   it.value());
        for (int i = 0; i < nfree; ++i) {
            trips.emplace_back(i, nfree, mf[i]);
            trips.emplace_back(nfree, i, mf[i]);
        }
        Eigen::SparseMatrix<double> B(nfree + 1, nfree + 1);
        B.setFromTriplets(trips.begin(), trips.end());
        Eigen::VectorXd rhs(nfree + 1);
        rhs.head(nfree) = bf;
        rhs[nfree] = 0.0;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(B);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("solve_linear_p2: bordered factorization failed "
                                     "(system singular beyond the constrained null space)");
        const Eigen::VectorXd sol = lu.solve(rhs);
        xf = sol.head(nfree);
        residual = (B * sol - rhs).norm() / std::max(rhs.norm(), 1e-300);
    } else {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(Af);
        if (chol.info() != Eigen::Success)
            throw std::runtime_error("solve_linear_p2: factorization failed (singular system)");
        xf = chol.solve(bf);
        residual = (Af * xf - bf).norm() / std::max(bf.norm(), 1e-300);
    }
    if (!(residual <= 1e-10))
        throw std::runtime_error("solve_linear_p2: direct-solve residual " +
                                 std::to_string(residual) + " exceeds 1e-10");

    SolveResult r;
    r.u.space = &sp;
    r.u.coeff = Eigen::VectorXd::Zero(sp.ndof());
    scatter_free(xf, map, r.u.coeff);
    r.energy = energy_total(r.u, model);
    r.grad_norm = residual;
    r.iterations = 1;
    r.converged = true;
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

SolveResult minimize(const EnergyModel& model, const SolverConfig& config,
                     const DiscreteFunction* initial) {
    const double p = model.p();
    if (p <= 1.0) throw std::invalid_argument("minimize: p must exceed 1");
    if (p < 2.0 && !config.allow_small_p)
        throw std::invalid_argument("minimize: 1 < p < 2 is experimental; enable allow_small_p");
    const auto t0 = Clock::now();
    const FeSpace& sp = *model.space;

    int nfree = 0;
    const std::vector<int> map = free_dof_map(sp, nfree);
    const MeanProjector P = make_projector(model, map, nfree);

    SolveResult r;
    r.u.space = &sp;
    if (initial) {
        r.u.coeff = initial->coeff;
        for (int i : sp.pinned_dofs()) r.u.coeff[i] = 0.0;
        if (P.active) {
            Eigen::VectorXd cf = restrict_free(r.u.coeff, map, nfree);
            cf -= (P.m.dot(cf) / P.mm) * P.m;
            scatter_free(cf, map, r.u.coeff);
        }
    } else {
        r.u.coeff = Eigen::VectorXd::Zero(sp.ndof());
    }

    const Eigen::VectorXd bf = restrict_free(load_vector(model), map, nfree);
    const double scale = load_scale(bf, P);

    double energy = energy_total(r.u, model);
    const double floor_abs = (p < 2.0) ? config.small_p_floor : 0.0;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        Eigen::VectorXd g = restrict_free(first_variation(r.u, model).values, map, nfree);
        P.apply(g);
        r.grad_norm = g.norm() / scale;
        if (r.grad_norm <= config.grad_tol) {
            r.converged = true;
            break;
        }

        Eigen::SparseMatrix<double> H =
            restrict_matrix(assemble_hessian(r.u, model, floor_abs), map, nfree);
        if (p != 2.0) {
            // epsilon_H regularization against the degenerate weight
            double diag_scale = 0.0;
            for (int i = 0; i < nfree; ++i) diag_scale = std::max(diag_scale, H.coeff(i, i));
            const double eps = config.hessian_reg * std::max(diag_scale, 1.0);
            Eigen::SparseMatrix<double> I(nfree, nfree);
            I.setIdentity();
            H += eps * I;
        }

        Eigen::VectorXd s;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(H);
        bool newton_ok = (chol.info() == Eigen::Success);
        if (newton_ok) {
            s = chol.solve(-g);
            P.apply(s);
            if (!(s.dot(g) < 0.0)) newton_ok = false;  // not a descent direction
        }
        if (!newton_ok) s = -g;

        const double slope = g.dot(s);
        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial_full = r.u.coeff;
        for (int bt = 0; bt <= config.max_backtracks; ++bt) {
            Eigen::VectorXd cf = restrict_free(r.u.coeff, map, nfree) + alpha * s;
            scatter_free(cf, map, trial_full);
            DiscreteFunction trial{&sp, trial_full};
            const double e_trial = energy_total(trial, model);
            if (std::isfinite(e_trial) && e_trial <= energy + config.armijo_c * alpha * slope) {
                r.u.coeff = trial_full;
                energy = e_trial;
                accepted = true;
                break;
            }
            alpha *= config.backtrack;
        }
        r.iterations = iter + 1;
        if (!accepted) {
            r.converged = false;
            r.energy = energy;
            r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            r.log.push_back({static_cast<double>(iter), energy, r.grad_norm, 0.0});
            return r;  // line search exhausted: failure with last iterate
        }
        r.log.push_back({static_cast<double>(iter), energy, r.grad_norm, alpha});
    }
    if (!r.converged) {
        // loop ended by max_iterations; re-measure the gradient
        Eigen::VectorXd g = restrict_free(first_variation(r.u, model).values, map, nfree);
        P.apply(g);
        r.grad_norm = g.norm() / scale;
        r.converged = r.grad_norm <= config.grad_tol;
    }
    r.energy = energy;
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

double residual_norm(const DiscreteFunction& u, const EnergyModel& model) {
    const FeSpace& sp = *model.space;
    int nfree = 0;
    const std::vector<int> map = free_dof_map(sp, nfree);
    const MeanProjector P = make_projector(model, map, nfree);
    Eigen::VectorXd g = restrict_free(first_variation(u, model).values, map, nfree);
    P.apply(g);
    const Eigen::VectorXd bf = restrict_free(load_vector(model), map, nfree);
    return g.norm() / load_scale(bf, P);
}

void write_iteration_log(std::ostream& os, const SolveResult& r) {
    os.precision(17);
    os << "# iter energy grad_norm step\n";
    for (const auto& row : r.log)
        os << static_cast<int>(row[0]) << " " << row[1] << " " << row[2] << " " << row[3] << "\n";
    os << "# converged=" << (r.converged ? 1 : 0) << " iterations=" << r.iterations
       << " seconds=" << r.seconds << "\n";
}

}  // namespace nlac
