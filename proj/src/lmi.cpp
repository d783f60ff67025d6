#include "swmas/lmi.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace swmas {

ReducedMatrices reduced_matrices(const DecomposableMatrices& blocks, double lambda,
                                 double p) {
    ReducedMatrices out;
    out.A = blocks.A.d + lambda * (p * blocks.A.c + blocks.A.p);
    out.B = blocks.B.d + lambda * (p * blocks.B.c + blocks.B.p);
    out.C = blocks.C.d + lambda * (p * blocks.C.c + blocks.C.p);
    out.D = blocks.D.d + lambda * (p * blocks.D.c + blocks.D.p);
    out.p_bar = 2.0 * p * (1.0 - p) * lambda;
    return out;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

// Gramian-type LMI at one endpoint:
//   Abar^T Q Abar + Cbar^T Cbar + p_bar (Ac^T Q Ac + Cc^T Cc) - Q < 0
AffineMatrixOperator coupled_gramian_lmi(const SdpProblem& sdp, int q_var,
                                         const ReducedMatrices& red,
                                         const DecomposableMatrices& blocks) {
    AffineMatrixOperator op;
    op.constant = red.C.transpose() * red.C +
                  red.p_bar * (blocks.C.c.transpose() * blocks.C.c);
    const int n = sdp.dim_of(q_var);
    for (int r = 0; r < n; ++r) {
        for (int c = r; c < n; ++c) {
            const Eigen::MatrixXd e = sdp.basis_matrix(q_var, r, c);
            Eigen::MatrixXd coeff = red.A.transpose() * e * red.A +
                                    red.p_bar * (blocks.A.c.transpose() * e * blocks.A.c) -
                                    e;
            op.coeffs.emplace_back(sdp.basis_index(q_var, r, c), std::move(coeff));
        }
    }
    return op;
}

// Trace-type LMI at one endpoint:
//   Bbar^T Q Bbar + Dbar^T Dbar + p_bar (Bc^T Q Bc + Dc^T Dc) - Z1 < 0
AffineMatrixOperator coupled_trace_lmi(const SdpProblem& sdp, int q_var, int z1_var,
                                       const ReducedMatrices& red,
                                       const DecomposableMatrices& blocks) {
    AffineMatrixOperator op;
    op.constant = red.D.transpose() * red.D +
                  red.p_bar * (blocks.D.c.transpose() * blocks.D.c);
    const int nq = sdp.dim_of(q_var);
    for (int r = 0; r < nq; ++r) {
        for (int c = r; c < nq; ++c) {
            const Eigen::MatrixXd e = sdp.basis_matrix(q_var, r, c);
            Eigen::MatrixXd coeff = red.B.transpose() * e * red.B +
                                    red.p_bar * (blocks.B.c.transpose() * e * blocks.B.c);
            op.coeffs.emplace_back(sdp.basis_index(q_var, r, c), std::move(coeff));
        }
    }
    const int nz = sdp.dim_of(z1_var);
    for (int r = 0; r < nz; ++r) {
        for (int c = r; c < nz; ++c) {
            op.coeffs.emplace_back(sdp.basis_index(z1_var, r, c),
                                   -sdp.basis_matrix(z1_var, r, c));
        }
    }
    return op;
}

// Decoupled-dynamics LMI: Ad^T Q Ad + Cd^T Cd - Q < 0
AffineMatrixOperator decoupled_gramian_lmi(const SdpProblem& sdp, int q_var,
                                           const DecomposableMatrices& blocks) {
    AffineMatrixOperator op;
    op.constant = blocks.C.d.transpose() * blocks.C.d;
    const int n = sdp.dim_of(q_var);
    for (int r = 0; r < n; ++r) {
        for (int c = r; c < n; ++c) {
            const Eigen::MatrixXd e = sdp.basis_matrix(q_var, r, c);
            Eigen::MatrixXd coeff = blocks.A.d.transpose() * e * blocks.A.d - e;
            op.coeffs.emplace_back(sdp.basis_index(q_var, r, c), std::move(coeff));
        }
    }
    return op;
}

// Decoupled trace LMI: Bd^T Q Bd + Dd^T Dd - Z2 < 0
AffineMatrixOperator decoupled_trace_lmi(const SdpProblem& sdp, int q_var, int z2_var,
                                         const DecomposableMatrices& blocks) {
    AffineMatrixOperator op;
    op.constant = blocks.D.d.transpose() * blocks.D.d;
    const int nq = sdp.dim_of(q_var);
    for (int r = 0; r < nq; ++r) {
        for (int c = r; c < nq; ++c) {
            const Eigen::MatrixXd e = sdp.basis_matrix(q_var, r, c);
            op.coeffs.emplace_back(sdp.basis_index(q_var, r, c),
                                   blocks.B.d.transpose() * e * blocks.B.d);
        }
    }
    const int nz = sdp.dim_of(z2_var);
    for (int r = 0; r < nz; ++r) {
        for (int c = r; c < nz; ++c) {
            op.coeffs.emplace_back(sdp.basis_index(z2_var, r, c),
                                   -sdp.basis_matrix(z2_var, r, c));
        }
    }
    return op;
}

// Positivity constraint -Q < 0.
AffineMatrixOperator positivity_lmi(const SdpProblem& sdp, int q_var) {
    AffineMatrixOperator op;
    const int n = sdp.dim_of(q_var);
    op.constant = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = r; c < n; ++c) {
            op.coeffs.emplace_back(sdp.basis_index(q_var, r, c),
                                   -sdp.basis_matrix(q_var, r, c));
        }
    }
    return op;
}

}  // namespace

Theorem2Problem build_theorem2_problem(const SwitchedMas& mas, bool deflated) {
    const DecomposableMatrices& blocks = mas.blocks;
    if (!deflated) {
        const double rho = spectral_radius(blocks.A.d);
        if (rho >= 1.0) {
            std::ostringstream oss;
            oss << "decoupled block A_d has spectral radius " << rho
                << " >= 1, so the decoupled-dynamics LMI is infeasible for every Q; "
                   "rerun in deflated mode to analyse the disagreement dynamics";
            throw std::invalid_argument(oss.str());
        }
    }

    Theorem2Problem out;
    out.deflated = deflated;
    out.q_var = out.sdp.add_variable(blocks.n_x());
    out.z1_var = out.sdp.add_variable(blocks.n_w());
    if (!deflated) out.z2_var = out.sdp.add_variable(blocks.n_w());

    for (const double lambda : {mas.family.lambda_lo, mas.family.lambda_hi}) {
        const ReducedMatrices red = reduced_matrices(blocks, lambda, mas.p);
        out.sdp.add_constraint(coupled_gramian_lmi(out.sdp, out.q_var, red, blocks));
        out.sdp.add_constraint(coupled_trace_lmi(out.sdp, out.q_var, out.z1_var, red, blocks));
    }
    if (!deflated) {
        out.sdp.add_constraint(decoupled_gramian_lmi(out.sdp, out.q_var, blocks));
        out.sdp.add_constraint(decoupled_trace_lmi(out.sdp, out.q_var, out.z2_var, blocks));
    }
    out.sdp.add_constraint(positivity_lmi(out.sdp, out.q_var));

    const double n_minus_1 = static_cast<double>(mas.n_agents() - 1);
    out.sdp.add_trace_objective(out.z1_var, n_minus_1);
    if (!deflated) out.sdp.add_trace_objective(out.z2_var, 1.0);
    return out;
}

bool LmiCertificate::certified() const {
    if (status != SdpStatus::optimal) return false;
    for (double r : residual_eigs) {
        if (!(r < 0.0)) return false;
    }
    return true;
}

std::string LmiCertificate::report() const {
    std::ostringstream oss;
    oss << "status: " << to_string(status) << (deflated ? " (deflated)" : "") << "\n";
    if (status == SdpStatus::infeasible) {
        oss << "no certificate at these bounds; the analysis conditions are sufficient "
               "only, so this does not prove instability\n";
        return oss.str();
    }
    oss << "h2_bound: " << h2_bound << "\n";
    oss << "gamma: " << gamma << "  beta: " << beta << "\n";
    oss << "Q:\n" << Q << "\nZ1:\n" << Z1 << "\n";
    if (Z2.size() > 0) oss << "Z2:\n" << Z2 << "\n";
    oss << "residual eigenvalues:";
    for (double r : residual_eigs) oss << " " << r;
    oss << "\nstrictness shifts:";
    for (double e : epsilons) oss << " " << e;
    oss << "\n";
    return oss.str();
}

LmiCertificate solve_h2_bound(const SwitchedMas& mas, bool deflated,
                              const SdpOptions& opts) {
    Theorem2Problem problem = build_theorem2_problem(mas, deflated);
    const SdpSolution sol = solve(problem.sdp, opts);

    LmiCertificate cert;
    cert.deflated = deflated;
    cert.status = sol.status;
    cert.epsilons = sol.epsilons;
    cert.n_agents = mas.n_agents();
    if (sol.status != SdpStatus::optimal) return cert;

    cert.Q = problem.sdp.extract(problem.q_var, sol.x);
    cert.Z1 = problem.sdp.extract(problem.z1_var, sol.x);
    if (!deflated) cert.Z2 = problem.sdp.extract(problem.z2_var, sol.x);

    for (const auto& c : problem.sdp.constraints()) {
        cert.residual_eigs.push_back(max_eigenvalue(c.evaluate(sol.x)));
    }

    cert.gamma = std::sqrt(std::max(0.0, cert.Z1.trace()));
    cert.beta = deflated ? 0.0 : std::sqrt(std::max(0.0, cert.Z2.trace()));
    const double n_minus_1 = static_cast<double>(mas.n_agents() - 1);
    cert.h2_bound =
        std::sqrt(cert.beta * cert.beta + n_minus_1 * cert.gamma * cert.gamma);
    return cert;
}

Theorem1Problem build_theorem1_problem(const SwitchedMas& mas, bool projected,
                                       int max_edges) {
    const int n_agents = mas.n_agents();
    const int n_x = mas.blocks.n_x();
    const int n_w = mas.blocks.n_w();
    const int state_dim = (projected ? n_agents - 1 : n_agents) * n_x;
    const int input_dim = n_agents * n_w;

    Theorem1Problem out;
    out.projected = projected;
    out.q_var = out.sdp.add_variable(state_dim);
    out.z_var = out.sdp.add_variable(input_dim);

    Eigen::MatrixXd state_lift;  // U (x) I_nx, empty when not projected
    if (projected) {
        state_lift = kron(disagreement_projection(n_agents),
                          Eigen::MatrixXd::Identity(n_x, n_x));
    }

    const int n_topologies = static_cast<int>(mas.family.graphs.size());
    for (int j = 1; j <= n_topologies; ++j) {
        const ModeDistribution dist = mode_distribution(mas, j, max_edges);
        const Eigen::MatrixXd l_j =
            laplacian(mas.family.graphs[static_cast<std::size_t>(j - 1)]);

        std::vector<Eigen::MatrixXd> a_modes, b_modes;
        Eigen::MatrixXd const_gramian = Eigen::MatrixXd::Zero(state_dim, state_dim);
        Eigen::MatrixXd const_trace = Eigen::MatrixXd::Zero(input_dim, input_dim);
        std::vector<double> weights;
        for (const Mode& mode : dist.modes) {
            ModeMatrices m = assemble_mode(mas, mode.l_tilde, l_j);
            Eigen::MatrixXd a = m.A, b = m.B, c = m.C;
            if (projected) {
                a = state_lift.transpose() * m.A * state_lift;
                b = state_lift.transpose() * m.B;
                c = m.C * state_lift;
            }
            const_gramian.noalias() += mode.probability * (c.transpose() * c);
            const_trace.noalias() += mode.probability * (m.D.transpose() * m.D);
            a_modes.push_back(std::move(a));
            b_modes.push_back(std::move(b));
            weights.push_back(mode.probability);
        }

        AffineMatrixOperator gramian;
        gramian.constant = const_gramian;
        for (int r = 0; r < state_dim; ++r) {
            for (int c = r; c < state_dim; ++c) {
                const Eigen::MatrixXd e = out.sdp.basis_matrix(out.q_var, r, c);
                Eigen::MatrixXd coeff = -e;
                for (std::size_t i = 0; i < a_modes.size(); ++i) {
                    coeff.noalias() += weights[i] * (a_modes[i].transpose() * e * a_modes[i]);
                }
                gramian.coeffs.emplace_back(out.sdp.basis_index(out.q_var, r, c),
                                            std::move(coeff));
            }
        }
        out.sdp.add_constraint(std::move(gramian));

        AffineMatrixOperator trace_op;
        trace_op.constant = const_trace;
        for (int r = 0; r < state_dim; ++r) {
            for (int c = r; c < state_dim; ++c) {
                const Eigen::MatrixXd e = out.sdp.basis_matrix(out.q_var, r, c);
                Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(input_dim, input_dim);
                for (std::size_t i = 0; i < b_modes.size(); ++i) {
                    coeff.noalias() += weights[i] * (b_modes[i].transpose() * e * b_modes[i]);
                }
                trace_op.coeffs.emplace_back(out.sdp.basis_index(out.q_var, r, c),
                                             std::move(coeff));
            }
        }
        for (int r = 0; r < input_dim; ++r) {
            for (int c = r; c < input_dim; ++c) {
                trace_op.coeffs.emplace_back(out.sdp.basis_index(out.z_var, r, c),
                                             -out.sdp.basis_matrix(out.z_var, r, c));
            }
        }
        out.sdp.add_constraint(std::move(trace_op));
    }

    out.sdp.add_constraint(positivity_lmi(out.sdp, out.q_var));
    out.sdp.add_trace_objective(out.z_var, 1.0);
    return out;
}

std::string LiftingReport::summary() const {
    std::ostringstream oss;
    for (const auto& r : per_topology) {
        oss << "topology " << r.topology_index
            << ": gramian residual " << r.gramian_residual_eig
            << ", trace residual " << r.trace_residual_eig
            << ((r.gramian_residual_eig < 0.0 && r.trace_residual_eig < 0.0) ? " ok"
                                                                             : " VIOLATED")
            << "\n";
    }
    oss << "lifting check: " << (pass ? "PASS" : "FAIL") << "\n";
    return oss.str();
}

LiftingReport verify_certificate_lifting(const SwitchedMas& mas,
                                         const LmiCertificate& cert, int max_edges) {
    if (!cert.certified()) {
        throw std::invalid_argument(
            "verify_certificate_lifting: certificate is not valid");
    }
    const int n_agents = mas.n_agents();
    const int n_x = mas.blocks.n_x();
    const int n_w = mas.blocks.n_w();

    const Eigen::MatrixXd identity_n = Eigen::MatrixXd::Identity(n_agents, n_agents);
    const Eigen::MatrixXd u = disagreement_projection(n_agents);
    const Eigen::MatrixXd ones =
        Eigen::MatrixXd::Constant(n_agents, n_agents, 1.0 / n_agents);

    // Q lifted onto the stacked state; in deflated mode it acts on the
    // disagreement subspace only.
    const Eigen::MatrixXd q_full = cert.deflated
                                       ? kron(u * u.transpose(), cert.Q)
                                       : kron(identity_n, cert.Q);

    LiftingReport report;
    report.pass = true;
    const int n_topologies = static_cast<int>(mas.family.graphs.size());
    for (int j = 1; j <= n_topologies; ++j) {
        const ModeDistribution dist = mode_distribution(mas, j, max_edges);
        const Eigen::MatrixXd l_j =
            laplacian(mas.family.graphs[static_cast<std::size_t>(j - 1)]);

        Eigen::MatrixXd m_a =
            Eigen::MatrixXd::Zero(n_agents * n_x, n_agents * n_x);
        Eigen::MatrixXd m_b =
            Eigen::MatrixXd::Zero(n_agents * n_w, n_agents * n_w);
        for (const Mode& mode : dist.modes) {
            const ModeMatrices m = assemble_mode(mas, mode.l_tilde, l_j);
            m_a.noalias() +=
                mode.probability * (m.A.transpose() * q_full * m.A + m.C.transpose() * m.C);
            m_b.noalias() +=
                mode.probability * (m.B.transpose() * q_full * m.B + m.D.transpose() * m.D);
        }

        LiftingTopologyResult result;
        result.topology_index = j;
        if (cert.deflated) {
            const Eigen::MatrixXd lift_x =
                kron(u, Eigen::MatrixXd::Identity(n_x, n_x));
            const Eigen::MatrixXd lift_w =
                kron(u, Eigen::MatrixXd::Identity(n_w, n_w));
            const Eigen::MatrixXd r_a =
                lift_x.transpose() * m_a * lift_x -
                kron(Eigen::MatrixXd::Identity(n_agents - 1, n_agents - 1), cert.Q);
            const Eigen::MatrixXd r_b =
                lift_w.transpose() * m_b * lift_w -
                kron(Eigen::MatrixXd::Identity(n_agents - 1, n_agents - 1), cert.Z1);
            result.gramian_residual_eig = max_eigenvalue(r_a);
            result.trace_residual_eig = max_eigenvalue(r_b);
        } else {
            const Eigen::MatrixXd z_full =
                kron(ones, cert.Z2) + kron(identity_n - ones, cert.Z1);
            const Eigen::MatrixXd r_a = m_a - q_full;
            const Eigen::MatrixXd r_b = m_b - z_full;
            result.gramian_residual_eig = max_eigenvalue(r_a);
            result.trace_residual_eig = max_eigenvalue(r_b);
        }
        report.pass = report.pass && result.gramian_residual_eig < 0.0 &&
                      result.trace_residual_eig < 0.0;
        report.per_topology.push_back(result);
    }
    return report;
}

}  // namespace swmas
