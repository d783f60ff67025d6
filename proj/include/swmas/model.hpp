#pragma once

// Decomposable switched jump-linear model of the multi-agent system:
// per-agent blocks, Kronecker assembly of full mode matrices, the per-
// topology mode distribution induced by Bernoulli loss, and the builders
// for the first-order consensus example.

#include "swmas/graph.hpp"
#include "swmas/loss.hpp"

#include <Eigen/Dense>

#include <vector>

namespace swmas {

/// Per-letter decomposition M = I (x) M_d + L~ (x) M_c + L (x) M_p.
struct BlockTriple {
    Eigen::MatrixXd d;
    Eigen::MatrixXd c;
    Eigen::MatrixXd p;
};

/// The nine structural blocks (plus D) of a decomposable system.
/// Dimensions: A blocks n_x*n_x, B blocks n_x*n_w, C blocks n_z*n_x,
/// D blocks n_z*n_w.
struct DecomposableMatrices {
    BlockTriple A, B, C, D;

    int n_x() const { return static_cast<int>(A.d.rows()); }
    int n_w() const { return static_cast<int>(B.d.cols()); }
    int n_z() const { return static_cast<int>(C.d.rows()); }
};

/// Throws unless all blocks of each letter agree in shape and the four
/// letters are mutually consistent.
void check_dimensions(const DecomposableMatrices& m);

/// Full problem instance: admissible topology family, transmission
/// probability and agent blocks.
struct SwitchedMas {
    GraphFamily family;
    double p = 1.0;
    DecomposableMatrices blocks;

    int n_agents() const { return family.graphs.front().n_vertices; }
};

SwitchedMas make_switched_mas(GraphFamily family, double p, DecomposableMatrices blocks);

struct ModeMatrices {
    Eigen::MatrixXd A, B, C, D;
};

/// Assemble full switched-system matrices from the stochastic Laplacian
/// L_tilde and the deterministic Laplacian L_j:
///   M = I_N (x) M_d + L_tilde (x) M_c + L_j (x) M_p   for each letter.
ModeMatrices assemble_mode(const SwitchedMas& mas, const Eigen::MatrixXd& l_tilde,
                           const Eigen::MatrixXd& l_j);

struct Mode {
    SwitchIndex sigma;        // switching index of this loss pattern
    double probability = 0.0; // p^(active) * (1-p)^(lost)
    Eigen::MatrixXd l_tilde;  // lossy Laplacian
};

/// Probability distribution of the stochastic switching index for one
/// topology. Zero-probability patterns (p in {0,1}) are dropped.
struct ModeDistribution {
    int topology_index = 0;  // 1-based index into the family
    std::vector<Mode> modes;
};

/// Default cap on per-topology loss-pattern enumeration (2^20 patterns).
inline constexpr int kModeEnumerationCap = 20;

/// Enumerate all loss patterns over the topology's edge set. Throws if the
/// edge count exceeds the cap; large instances must use the agent-count-
/// independent analysis instead of mode enumeration.
ModeDistribution mode_distribution(const SwitchedMas& mas, int topology_index,
                                   int max_edges = kModeEnumerationCap);

/// First-order consensus blocks: x+ = x + u + w with the relative-state
/// protocol of gain kappa, consensus error z = L x as output.
DecomposableMatrices consensus_example(double kappa);

/// Variant with performance input and output swapped:
/// disturbance enters through the coupling pattern, output is the state.
DecomposableMatrices consensus_example_swapped(double kappa);

/// Orthonormal basis U (N x (N-1)) of the orthogonal complement of the
/// all-ones vector, built from a fixed Householder reflection so results
/// reproduce bit-for-bit. U^T U = I and U^T 1 = 0.
Eigen::MatrixXd disagreement_projection(int n_agents);

/// Kronecker product helper (row-major block layout, agent index first).
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace swmas
