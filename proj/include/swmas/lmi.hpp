#pragma once

// Analysis LMIs for the switched multi-agent system: the agent-count-
// independent conditions evaluated at the spectral interval endpoints, the
// mode-enumerated small-instance conditions, and the numerical lifting
// check connecting the two.

#include "swmas/model.hpp"
#include "swmas/sdp.hpp"

#include <string>
#include <vector>

namespace swmas {

/// Endpoint-reduced system matrices for a scalar Laplacian eigenvalue:
/// M_bar = M_d + lambda * (p * M_c + M_p), plus the loss-variance weight
/// p_bar = 2p(1-p)lambda.
struct ReducedMatrices {
    Eigen::MatrixXd A, B, C, D;
    double p_bar = 0.0;
};

ReducedMatrices reduced_matrices(const DecomposableMatrices& blocks, double lambda,
                                 double p);

/// Spectral radius of a (generally nonsymmetric) square matrix.
double spectral_radius(const Eigen::MatrixXd& m);

struct Theorem2Problem {
    SdpProblem sdp;
    int q_var = -1;
    int z1_var = -1;
    int z2_var = -1;  // absent (-1) in deflated mode
    bool deflated = false;
};

/// Agent-count-independent analysis problem: variables Q (n_x), Z1 (n_w)
/// and, unless deflated, Z2 (n_w); the coupled LMIs are instantiated at
/// both interval endpoints. Objective: trace(Z2) + (N-1) trace(Z1), the
/// first term dropped in deflated mode.
///
/// Throws if the decoupled block has spectral radius >= 1 and deflated
/// mode was not requested: the decoupled-dynamics LMI is then infeasible
/// for every Q, and only the disagreement-space analysis applies.
Theorem2Problem build_theorem2_problem(const SwitchedMas& mas, bool deflated);

struct LmiCertificate {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd Z1;
    Eigen::MatrixXd Z2;       // empty in deflated mode
    double gamma = 0.0;       // sqrt(trace Z1)
    double beta = 0.0;        // sqrt(trace Z2), 0 in deflated mode
    bool deflated = false;
    double h2_bound = 0.0;    // sqrt(beta^2 + (N-1) gamma^2)
    SdpStatus status = SdpStatus::numerical_error;
    /// Post-hoc most-positive eigenvalue per analysis LMI at the solution.
    std::vector<double> residual_eigs;
    std::vector<double> epsilons;
    int n_agents = 0;

    /// True iff the solver succeeded and every residual is negative.
    bool certified() const;
    std::string report() const;
};

/// Solve for the smallest certified performance bound. An infeasible
/// problem yields a certificate with certified() == false; this means "no
/// certificate at these bounds", never an instability proof.
LmiCertificate solve_h2_bound(const SwitchedMas& mas, bool deflated,
                              const SdpOptions& opts = {});

struct Theorem1Problem {
    SdpProblem sdp;
    int q_var = -1;
    int z_var = -1;
    bool projected = false;
};

/// Mode-enumerated analysis problem over the full stacked state: variables
/// Q (N n_x) and Z (N n_w), two LMIs per topology averaging over all loss
/// patterns, objective trace(Z). With projected = true the dynamics are
/// restricted to the disagreement space (Q becomes (N-1) n_x).
Theorem1Problem build_theorem1_problem(const SwitchedMas& mas, bool projected = false,
                                       int max_edges = kModeEnumerationCap);

struct LiftingTopologyResult {
    int topology_index = 0;
    double gramian_residual_eig = 0.0;  // must be < 0
    double trace_residual_eig = 0.0;    // must be < 0
};

struct LiftingReport {
    std::vector<LiftingTopologyResult> per_topology;
    bool pass = false;
    std::string summary() const;
};

/// Lifts an endpoint certificate onto the stacked state (Q -> I (x) Q,
/// block-diagonal Z) and checks the mode-enumerated LMIs of every topology
/// numerically. Failure indicates an implementation bug; the lifting holds
/// whenever the certificate is valid and the family respects its bounds.
LiftingReport verify_certificate_lifting(const SwitchedMas& mas,
                                         const LmiCertificate& cert,
                                         int max_edges = kModeEnumerationCap);

}  // namespace swmas
