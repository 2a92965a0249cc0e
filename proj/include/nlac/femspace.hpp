#pragma once

#include "nlac/geometry.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <vector>

namespace nlac {

enum class Continuity { CG, DG };
enum class Constraint { None, ZeroMean, ZeroTrace, ZeroVolumeLayer };

/// Conforming piecewise-polynomial space (P1/P2, CG or DG) over a mesh,
/// with one of the paper's constraint types.  DOF numbering is
/// deterministic: vertices in mesh order, then edge/interior nodes.
class FeSpace {
public:
    FeSpace(const Mesh& mesh, int degree, Continuity continuity, Constraint constraint);

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    Continuity continuity() const { return cont_; }
    Constraint constraint() const { return constr_; }

    int ndof() const { return ndof_; }
    int dofs_per_elem() const { return dpe_; }
    int elem_dof(int e, int k) const { return elem_dofs_[e * dpe_ + k]; }
    Point dof_point(int i) const { return dof_points_[i]; }
    bool pinned(int i) const { return pinned_[i] != 0; }
    int free_count() const { return free_count_; }
    /// Dimension of the affine solution set (free DOFs minus the mean
    /// constraint when present).
    int dimension() const { return free_count_ - (constr_ == Constraint::ZeroMean ? 1 : 0); }
    bool has_mean_constraint() const { return constr_ == Constraint::ZeroMean; }
    const std::vector<int>& pinned_dofs() const { return pinned_list_; }

    /// Local shape values at a point of element e.
    void shape_values(int e, Point p, double* vals) const;
    /// Local shape gradients (constant for P1).
    void shape_gradients(int e, Point p, Point* grads) const;

private:
    const Mesh* mesh_;
    int degree_;
    Continuity cont_;
    Constraint constr_;
    int ndof_ = 0;
    int dpe_ = 0;
    int free_count_ = 0;
    std::vector<int> elem_dofs_;
    std::vector<Point> dof_points_;
    std::vector<char> pinned_;
    std::vector<int> pinned_list_;
};

/// Coefficient vector over a space.
struct DiscreteFunction {
    const FeSpace* space = nullptr;
    Eigen::VectorXd coeff;

    double value(int elem, Point p) const;
    Point gradient(int elem, Point p) const;
    /// Value with point location; zero outside the meshed region
    /// (matching zero-extension semantics).
    double value_global(Point p) const;
};

/// Nodal interpolation (CG) or per-element L2 projection (DG); the
/// constraint is applied afterward (mean subtracted, pinned DOFs zeroed).
DiscreteFunction interpolate(const FeSpace& space, const std::function<double(Point)>& f);

/// (u)_Omega over the base domain; exact element-wise integration.
double mean_value(const DiscreteFunction& u);

/// ||u||_{L^p}; exact Gauss rules for even integer p, root-splitting /
/// adaptive rules otherwise.
double lp_norm(const DiscreteFunction& u, double p);

/// |u|_{W^{1,p}} seminorm; requires a CG space.
double w1p_seminorm(const DiscreteFunction& u, double p);

/// L^p norm of (u - f) over interior-tagged elements (error measure).
double lp_error(const DiscreteFunction& u, const std::function<double(Point)>& f, double p);

/// Evaluate u at the DOF points of a (finer) space: exact prolongation
/// for nested meshes.
DiscreteFunction prolong(const DiscreteFunction& u, const FeSpace& fine);

void write_coefficients(std::ostream& os, const DiscreteFunction& u);
Eigen::VectorXd read_coefficients(std::istream& is);

}  // namespace nlac
