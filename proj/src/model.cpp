#include "swmas/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace swmas {

namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string("block shape mismatch in ") + what);
    }
}

}  // namespace

void check_dimensions(const DecomposableMatrices& m) {
    require_same_shape(m.A.d, m.A.c, "A");
    require_same_shape(m.A.d, m.A.p, "A");
    require_same_shape(m.B.d, m.B.c, "B");
    require_same_shape(m.B.d, m.B.p, "B");
    require_same_shape(m.C.d, m.C.c, "C");
    require_same_shape(m.C.d, m.C.p, "C");
    require_same_shape(m.D.d, m.D.c, "D");
    require_same_shape(m.D.d, m.D.p, "D");

    const auto n_x = m.A.d.rows();
    if (m.A.d.cols() != n_x) throw std::invalid_argument("A blocks must be square");
    if (m.B.d.rows() != n_x) throw std::invalid_argument("B blocks must have n_x rows");
    if (m.C.d.cols() != n_x) throw std::invalid_argument("C blocks must have n_x columns");
    if (m.D.d.rows() != m.C.d.rows() || m.D.d.cols() != m.B.d.cols()) {
        throw std::invalid_argument("D blocks must be n_z x n_w");
    }
}

SwitchedMas make_switched_mas(GraphFamily family, double p, DecomposableMatrices blocks) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("transmission probability must lie in [0, 1]");
    }
    check_dimensions(blocks);
    return SwitchedMas{std::move(family), p, std::move(blocks)};
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

namespace {

Eigen::MatrixXd assemble_letter(int n_agents, const BlockTriple& blocks,
                                const Eigen::MatrixXd& l_tilde,
                                const Eigen::MatrixXd& l_j) {
    const Eigen::MatrixXd identity =
        Eigen::MatrixXd::Identity(n_agents, n_agents);
    return kron(identity, blocks.d) + kron(l_tilde, blocks.c) + kron(l_j, blocks.p);
}

}  // namespace

ModeMatrices assemble_mode(const SwitchedMas& mas, const Eigen::MatrixXd& l_tilde,
                           const Eigen::MatrixXd& l_j) {
    const int n = mas.n_agents();
    if (l_tilde.rows() != n || l_tilde.cols() != n || l_j.rows() != n || l_j.cols() != n) {
        throw std::invalid_argument("assemble_mode: Laplacians must be N x N");
    }
    ModeMatrices out;
    out.A = assemble_letter(n, mas.blocks.A, l_tilde, l_j);
    out.B = assemble_letter(n, mas.blocks.B, l_tilde, l_j);
    out.C = assemble_letter(n, mas.blocks.C, l_tilde, l_j);
    out.D = assemble_letter(n, mas.blocks.D, l_tilde, l_j);
    return out;
}

ModeDistribution mode_distribution(const SwitchedMas& mas, int topology_index,
                                   int max_edges) {
    if (topology_index < 1 ||
        topology_index > static_cast<int>(mas.family.graphs.size())) {
        throw std::invalid_argument("mode_distribution: topology index out of range");
    }
    const Graph& topology = mas.family.graphs[static_cast<std::size_t>(topology_index - 1)];
    const int n_edges = static_cast<int>(topology.edges.size());
    if (n_edges > max_edges) {
        throw std::runtime_error(
            "mode_distribution: topology has " + std::to_string(n_edges) +
            " edges, above the enumeration cap of " + std::to_string(max_edges) +
            "; use the agent-count-independent analysis for instances of this size");
    }

    const EdgeIndexer indexer(union_edge_set(mas.family));
    const double p = mas.p;

    ModeDistribution dist;
    dist.topology_index = topology_index;
    const std::uint64_t n_patterns = 1ull << n_edges;
    for (std::uint64_t bits = 0; bits < n_patterns; ++bits) {
        const int active = static_cast<int>(__builtin_popcountll(bits));
        const int lost = n_edges - active;
        const double prob = std::pow(p, active) * std::pow(1.0 - p, lost);
        if (prob == 0.0) continue;

        LossMask mask;
        mask.active.assign(static_cast<std::size_t>(indexer.size()), 0);
        for (int e = 0; e < n_edges; ++e) {
            if (bits & (1ull << e)) {
                const int mu = indexer.index_of(topology.edges[static_cast<std::size_t>(e)]);
                mask.active[static_cast<std::size_t>(mu) - 1] = 1;
            }
        }
        Mode mode;
        mode.sigma = switching_index(mask, topology, indexer);
        mode.probability = prob;
        mode.l_tilde = lossy_laplacian(topology, mask, indexer);
        dist.modes.push_back(std::move(mode));
    }
    return dist;
}

namespace {

DecomposableMatrices scalar_blocks(double ad, double ac, double ap, double bd, double bp,
                                   double cd, double cp) {
    auto m = [](double v) {
        Eigen::MatrixXd out(1, 1);
        out(0, 0) = v;
        return out;
    };
    DecomposableMatrices blocks;
    blocks.A = {m(ad), m(ac), m(ap)};
    blocks.B = {m(bd), m(0.0), m(bp)};
    blocks.C = {m(cd), m(0.0), m(cp)};
    blocks.D = {m(0.0), m(0.0), m(0.0)};
    return blocks;
}

}  // namespace

DecomposableMatrices consensus_example(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("consensus gain kappa must be positive");
    return scalar_blocks(1.0, -kappa, 0.0, /*bd=*/1.0, /*bp=*/0.0, /*cd=*/0.0, /*cp=*/1.0);
}

DecomposableMatrices consensus_example_swapped(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("consensus gain kappa must be positive");
    return scalar_blocks(1.0, -kappa, 0.0, /*bd=*/0.0, /*bp=*/1.0, /*cd=*/1.0, /*cp=*/0.0);
}

Eigen::MatrixXd disagreement_projection(int n_agents) {
    if (n_agents < 2) {
        throw std::invalid_argument("disagreement projection needs at least 2 agents");
    }
    const int n = n_agents;
    // Householder reflection mapping e_1 to the normalized all-ones vector;
    // its remaining columns span the orthogonal complement.
    Eigen::VectorXd ones = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    Eigen::VectorXd w = ones - Eigen::VectorXd::Unit(n, 0);
    const double wtw = w.squaredNorm();
    Eigen::MatrixXd reflect = Eigen::MatrixXd::Identity(n, n);
    if (wtw > 0.0) {
        reflect -= (2.0 / wtw) * (w * w.transpose());
    }
    return reflect.rightCols(n - 1);
}

}  // namespace swmas
