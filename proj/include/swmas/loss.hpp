#pragma once

// Stochastic packet-loss layer: Bernoulli edge activation masks over the
// union edge set, the induced switching index, and the lossy Laplacians
// together with their closed-form conditional expectations.
//
// Loss is symmetric: a single Bernoulli variable drives both directions of
// an undirected edge, so lossy Laplacians stay symmetric.

#include "swmas/graph.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace swmas {

/// Arbitrary-precision switching index; sigma can reach 2^|E0|.
using SwitchIndex = boost::multiprecision::cpp_int;

/// Bijection between the union edge set E0 and {1, ..., |E0|},
/// lexicographic on the (u, v) endpoint pairs.
class EdgeIndexer {
  public:
    EdgeIndexer() = default;
    explicit EdgeIndexer(const Graph& union_graph);

    /// 1-based index mu(e); throws if e is not in E0.
    int index_of(const Edge& e) const;
    const std::vector<Edge>& edges() const { return edges_; }
    int size() const { return static_cast<int>(edges_.size()); }

  private:
    std::vector<Edge> edges_;  // sorted; position + 1 is the index
};

/// Activation pattern for every edge of E0, aligned with an EdgeIndexer.
struct LossMask {
    std::vector<std::uint8_t> active;  // active[mu(e) - 1]

    bool is_active(const EdgeIndexer& idx, const Edge& e) const {
        return active[static_cast<std::size_t>(idx.index_of(e)) - 1] != 0;
    }
};

/// Deterministic counter-based generator used for all stochastic sampling.
/// Derived streams (split_for) are independent for distinct key pairs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    /// Uniform double in [0, 1).
    double next_double();
    bool bernoulli(double p);
    /// Stream derived deterministically from this seed and the given keys.
    Rng split_for(std::uint64_t key_a, std::uint64_t key_b) const;

    std::uint64_t seed() const { return state_; }

  private:
    std::uint64_t state_;
};

/// Independent Bernoulli(p) activation for every edge of E0.
LossMask sample_loss_mask(const EdgeIndexer& idx, double p, Rng& rng);

/// Switching index sigma = 1 + sum over active edges of E_j of 2^(mu(e)-1).
/// Edges outside the topology's edge set never contribute.
SwitchIndex switching_index(const LossMask& mask, const Graph& topology,
                            const EdgeIndexer& idx);

/// Laplacian of the lossy graph: an edge of the topology contributes only
/// while its mask bit is set. Rows sum to zero; result is symmetric.
Eigen::MatrixXd lossy_laplacian(const Graph& topology, const LossMask& mask,
                                const EdgeIndexer& idx);

/// Conditional expectations of the lossy Laplacian given the topology:
/// E[L~] = p*L and E[L~^T L~] = p^2*L^2 + 2p(1-p)*L.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> expected_laplacians(const Graph& topology,
                                                                double p);

}  // namespace swmas
