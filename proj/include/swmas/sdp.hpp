#pragma once

// Small dense semidefinite feasibility/optimization engine for affine
// matrix inequalities F_l(x) < 0 with a linear objective, solved by a
// two-phase log-det barrier method with damped Newton steps.
//
// Symmetric matrix variables are vectorized over their upper triangle;
// an off-diagonal coordinate drives both mirrored entries with weight 1.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace swmas {

/// F(x) = constant + sum_l x[coeffs[l].first] * coeffs[l].second,
/// required negative definite. All matrices share one dimension.
struct AffineMatrixOperator {
    Eigen::MatrixXd constant;
    std::vector<std::pair<int, Eigen::MatrixXd>> coeffs;

    Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

enum class SdpStatus { optimal, infeasible, max_iterations, numerical_error };

const char* to_string(SdpStatus s);

struct SdpOptions {
    double feasibility_margin = 1e-9;  // phase-I infeasibility threshold
    double gap_tol = 1e-8;             // relative duality-gap proxy target
    double mu_initial = 1.0;
    double mu_factor = 0.2;
    double strictness_scale = 1e-9;    // eps = scale * (1 + |constant|_F)
    /// Phase I searches for feasible points inside this coordinate ball;
    /// problems feasible only beyond it are reported infeasible.
    double phase1_radius = 1e8;
    int max_newton_steps = 500;
    std::optional<std::string> debug_csv_path;  // iterate dump, if set
};

struct SdpSolution {
    Eigen::VectorXd x;
    double objective_value = 0.0;
    SdpStatus status = SdpStatus::numerical_error;
    /// Most-positive eigenvalue over all (unshifted) constraints at x.
    double margin = 0.0;
    int newton_steps = 0;
    /// Strictness shifts applied per constraint ("< 0" ran as "<= -eps I").
    std::vector<double> epsilons;
};

/// Problem container. Declare symmetric matrix variables first, then add
/// constraints referencing their scalar coordinates via basis_index().
class SdpProblem {
  public:
    /// Declares a symmetric dim x dim matrix variable; returns its id.
    int add_variable(int dim);

    int n_variables() const { return static_cast<int>(dims_.size()); }
    int dim_of(int var) const { return dims_.at(static_cast<std::size_t>(var)); }
    /// Total number of scalar decision coordinates.
    int n_scalars() const { return total_; }

    /// Coordinate index of entry (r, c) of a variable; order inside (r, c)
    /// does not matter.
    int basis_index(int var, int r, int c) const;

    /// Symmetric basis matrix for one scalar coordinate of a variable
    /// (unit diagonal entry, or a mirrored unit pair off the diagonal).
    Eigen::MatrixXd basis_matrix(int var, int r, int c) const;

    /// Reads the symmetric matrix value of a variable out of x.
    Eigen::MatrixXd extract(int var, const Eigen::VectorXd& x) const;

    void add_constraint(AffineMatrixOperator op);
    const std::vector<AffineMatrixOperator>& constraints() const { return constraints_; }

    /// Appends weight * trace(variable) to the objective.
    void add_trace_objective(int var, double weight);
    void set_objective(Eigen::VectorXd c);
    const Eigen::VectorXd& objective() const { return objective_; }

  private:
    std::vector<int> dims_;
    std::vector<int> offsets_;
    int total_ = 0;
    std::vector<AffineMatrixOperator> constraints_;
    Eigen::VectorXd objective_;
};

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts = {});

/// Symmetric eigendecomposition (values ascending, orthonormal vectors).
/// Rejects matrices whose asymmetry exceeds 1e-10.
struct SymEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

SymEig eig_sym(const Eigen::MatrixXd& m);

/// Largest eigenvalue of a symmetric matrix.
double max_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace swmas
