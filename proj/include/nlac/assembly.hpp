#pragma once

#include "nlac/femspace.hpp"
#include "nlac/kernels.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>
#include <optional>

namespace nlac {

enum class Family { HetNeumann, HetDirichlet, ConstDirichlet, LocalNeumann, LocalDirichlet };

bool is_het(Family f);
bool is_local(Family f);
bool is_neumann(Family f);

/// Dual data f = (f0 bulk, f1 flux, g boundary).
struct LoadFunctional {
    std::function<double(Point)> f0;
    std::function<double(Point)> f1x, f1y;
    std::function<double(Point)> g;
};

/// <f, 1> = int f0 + int_dOmega g by high-order quadrature.
double compatibility_residual(const LoadFunctional& f, const Mesh& mesh);

/// Thrown when a Neumann family receives incompatible data.
struct CompatibilityError : std::runtime_error {
    double residual;
    explicit CompatibilityError(double r)
        : std::runtime_error("load incompatible for Neumann family: <f,1> = " + std::to_string(r)),
          residual(r) {}
};

struct QuadratureSpec {
    int outer_order = 3;       // Gauss nodes per outer piece (1D)
    int inner_order = 8;       // Gauss/Gauss-Jacobi nodes per inner piece
    int angular = 16;          // angular nodes per arc (2D polar)
    int outer_tri_degree = 4;  // outer Dunavant degree (2D)
};

struct EnergyModel {
    Family family = Family::LocalNeumann;
    const FeSpace* space = nullptr;
    std::optional<KernelConfig> kernel;      // het families
    std::optional<ConstHorizonParams> chp;   // const family
    double p_local = 2.0;                    // local families
    LoadFunctional load;
    QuadratureSpec quad;

    double p() const;
};

/// Validated constructors (family/constraint compatibility, horizon
/// windows, Neumann load compatibility).
EnergyModel make_het_model(Family family, const FeSpace& space, const KernelConfig& cfg,
                           LoadFunctional load, QuadratureSpec quad = {});
EnergyModel make_const_model(const FeSpace& space, const ConstHorizonParams& chp,
                             LoadFunctional load, QuadratureSpec quad = {});
EnergyModel make_local_model(Family family, const FeSpace& space, double p, LoadFunctional load,
                             QuadratureSpec quad = {});

/// [u]^p_{W^{beta,p}[delta;q]} with the indicator kernel gamma.
double seminorm_heterogeneous(const DiscreteFunction& u, const KernelConfig& cfg,
                              QuadratureSpec quad = {});

/// G_{p,delta}(u), the rho-weighted energy (eq. of the het family).
double energy_G_heterogeneous(const DiscreteFunction& u, const KernelConfig& cfg,
                              QuadratureSpec quad = {});

/// [u]^p_{S^p[delta]} over Omega_delta x Omega_delta.
double seminorm_const_horizon(const DiscreteFunction& u, const ConstHorizonParams& chp,
                              QuadratureSpec quad = {});

/// (1/p) int |grad u|^p.
double energy_local(const DiscreteFunction& u, double p);

/// <f,v> = int f0 v + int f1.grad v + int_dOmega g v (plain pairing).
double load_pairing(const LoadFunctional& f, const DiscreteFunction& v, bool check_neumann = false);

/// E_sigma(u): G-term plus the family's load term (K_delta-smoothed for
/// het families, plain otherwise).
double energy_total(const DiscreteFunction& u, const EnergyModel& model);

/// First variation <F(u), phi_i> as a vector over all DOFs (zero at
/// pinned DOFs).
struct DualVector {
    const FeSpace* space = nullptr;
    Eigen::VectorXd values;
};
DualVector first_variation(const DiscreteFunction& u, const EnergyModel& model);

/// Load vector b_i with the family's pairing (K_delta-smoothed for het).
Eigen::VectorXd load_vector(const EnergyModel& model);

/// p=2 stiffness operator of the model's G-term; symmetric positive
/// semidefinite with constants in the null space.
Eigen::SparseMatrix<double> assemble_stiffness_p2(const EnergyModel& model);

/// Hessian of the discrete G-term at u (Gauss-Newton weight
/// |u(x)-u(y)|^{p-2} per pair); equals the stiffness at p=2.
Eigen::SparseMatrix<double> assemble_hessian(const DiscreteFunction& u, const EnergyModel& model,
                                             double degenerate_floor = 0.0);

void write_sparse_coo(std::ostream& os, const Eigen::SparseMatrix<double>& A);

/// Vector m with m_i = int_Omega phi_i (the mean-constraint functional).
Eigen::VectorXd mean_vector(const FeSpace& space);

}  // namespace nlac
