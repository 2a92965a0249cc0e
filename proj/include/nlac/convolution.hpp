#pragma once

#include "nlac/assembly.hpp"
#include "nlac/femspace.hpp"
#include "nlac/kernels.hpp"

#include <Eigen/Core>

namespace nlac {

/// K_delta u(x) = int_Omega eta^{-d} psi(|y-x|/eta) u(y) dy with
/// eta = eta_delta(x).  On the boundary (eta = 0) the kernel collapses
/// and K_delta u is the trace of u.
double apply_Kdelta(const DiscreteFunction& u, const KernelConfig& cfg, Point x,
                    int inner_order = 8);

/// Gradient of x -> K_delta u(x), differentiating the kernel in x (the
/// chain rule includes the grad-eta term).
Point grad_Kdelta(const DiscreteFunction& u, const KernelConfig& cfg, Point x,
                  int inner_order = 8);

/// View of K_delta u as an evaluable function.
struct SmoothedFunction {
    const DiscreteFunction* u = nullptr;
    const KernelConfig* cfg = nullptr;
    double value(Point x) const { return apply_Kdelta(*u, *cfg, x); }
    Point gradient(Point x) const { return grad_Kdelta(*u, *cfg, x); }
};

/// Load vector b_i = <f, K_delta phi_i> (f0 and f1 terms through the
/// smoothed basis, g paired with the boundary trace of phi_i).
Eigen::VectorXd smoothed_load_vector(const LoadFunctional& f, const FeSpace& space,
                                     const KernelConfig& cfg, const QuadratureSpec& quad);

/// <f, K_delta u>; consistent with smoothed_load_vector (same quadrature).
double smoothed_load_pairing(const LoadFunctional& f, const DiscreteFunction& u,
                             const KernelConfig& cfg, const QuadratureSpec& quad);

/// ||u - K_delta u||_{L^p(Omega)}.
double convolution_error(const DiscreteFunction& u, const KernelConfig& cfg, double p = 2.0);

/// ||K_delta u||_{W^{1,p}} by quadrature (for the boundedness checks).
double smoothed_w1p_norm(const DiscreteFunction& u, const KernelConfig& cfg, double p = 2.0);

}  // namespace nlac
