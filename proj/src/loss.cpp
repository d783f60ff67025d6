#include "swmas/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swmas {

namespace {

// splitmix64; full-period mixer, good enough for simulation draws and for
// deriving independent per-(channel, draw) streams.
std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
    if (p >= 1.0) {
        next_u64();  // keep the stream position independent of p
        return true;
    }
    if (p <= 0.0) {
        next_u64();
        return false;
    }
    return next_double() < p;
}

Rng Rng::split_for(std::uint64_t key_a, std::uint64_t key_b) const {
    std::uint64_t s = state_;
    std::uint64_t h = splitmix64(s) ^ (key_a * 0xD1B54A32D192ED03ull);
    h = h * 0x9E3779B97F4A7C15ull + key_b;
    std::uint64_t t = h;
    return Rng(splitmix64(t));
}

EdgeIndexer::EdgeIndexer(const Graph& union_graph) : edges_(union_graph.edges) {
    // make_graph already sorts lexicographically on (u, v)
}

int EdgeIndexer::index_of(const Edge& e) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || !(*it == e)) {
        throw std::invalid_argument("edge {" + std::to_string(e.u) + "," +
                                    std::to_string(e.v) + "} is not in the union edge set");
    }
    return static_cast<int>(it - edges_.begin()) + 1;
}

LossMask sample_loss_mask(const EdgeIndexer& idx, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("loss probability must lie in [0, 1]");
    }
    LossMask mask;
    mask.active.resize(static_cast<std::size_t>(idx.size()));
    for (std::size_t k = 0; k < mask.active.size(); ++k) {
        mask.active[k] = rng.bernoulli(p) ? 1 : 0;
    }
    return mask;
}

SwitchIndex switching_index(const LossMask& mask, const Graph& topology,
                            const EdgeIndexer& idx) {
    SwitchIndex sigma = 1;
    for (const Edge& e : topology.edges) {
        if (mask.is_active(idx, e)) {
            sigma += SwitchIndex(1) << (idx.index_of(e) - 1);
        }
    }
    return sigma;
}

Eigen::MatrixXd lossy_laplacian(const Graph& topology, const LossMask& mask,
                                const EdgeIndexer& idx) {
    const int n = topology.n_vertices;
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : topology.edges) {
        if (!mask.is_active(idx, e)) continue;
        const int i = e.u - 1;
        const int j = e.v - 1;
        lap(i, j) -= 1.0;
        lap(j, i) -= 1.0;
        lap(i, i) += 1.0;
        lap(j, j) += 1.0;
    }
    return lap;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> expected_laplacians(const Graph& topology,
                                                                double p) {
    const Eigen::MatrixXd lap = laplacian(topology);
    Eigen::MatrixXd first = p * lap;
    Eigen::MatrixXd second = p * p * (lap * lap) + 2.0 * p * (1.0 - p) * lap;
    return {std::move(first), std::move(second)};
}

}  // namespace swmas
