#include "swmas/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace swmas {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    return z ^ (z >> 27);
}

}  // namespace

int SwitchingSequence::index_at(int k, int n_topologies) const {
    switch (kind) {
        case SequenceKind::constant:
            return constant_index;
        case SequenceKind::sequential: {
            const int slot = (k / std::max(1, period)) % n_topologies;
            return 1 + slot;
        }
        case SequenceKind::random_uniform: {
            // counter-based draw, stateless in k
            const std::uint64_t h = mix(seed, static_cast<std::uint64_t>(k));
            return 1 + static_cast<int>(h % static_cast<std::uint64_t>(n_topologies));
        }
    }
    return 1;
}

std::uint64_t SwitchingSequence::stream_key() const {
    switch (kind) {
        case SequenceKind::constant:
            return mix(0x636f6e7374ull, static_cast<std::uint64_t>(constant_index));
        case SequenceKind::sequential:
            return mix(0x736571ull, static_cast<std::uint64_t>(period));
        case SequenceKind::random_uniform:
            return mix(0x72616e64ull, seed);
    }
    return 0;
}

std::string SwitchingSequence::label() const {
    std::ostringstream oss;
    switch (kind) {
        case SequenceKind::constant: oss << "constant(" << constant_index << ")"; break;
        case SequenceKind::sequential: oss << "sequential(" << period << ")"; break;
        case SequenceKind::random_uniform: oss << "random(" << seed << ")"; break;
    }
    return oss.str();
}

SwitchingSequence constant_sequence(int topology_index) {
    SwitchingSequence s;
    s.kind = SequenceKind::constant;
    s.constant_index = topology_index;
    return s;
}

SwitchingSequence sequential_sequence(int period) {
    SwitchingSequence s;
    s.kind = SequenceKind::sequential;
    s.period = period;
    return s;
}

SwitchingSequence random_sequence(std::uint64_t seed) {
    SwitchingSequence s;
    s.kind = SequenceKind::random_uniform;
    s.seed = seed;
    return s;
}

namespace {

// Per-topology precomputation for the simulation hot loop. The stochastic
// coupling term is applied edge-by-edge instead of assembling L~ (x) M_c.
struct TopologySim {
    Eigen::MatrixXd a_base;  // I (x) A_d + L_j (x) A_p
    Eigen::MatrixXd c_base;
    Eigen::MatrixXd b_base;
    Eigen::MatrixXd d_base;
    std::vector<Edge> edges;
};

struct Simulator {
    const SwitchedMas& mas;
    std::vector<TopologySim> topologies;
    Eigen::MatrixXd lift_x;  // U (x) I_nx; empty when not projecting
    bool has_coupled_c = false;
    bool has_coupled_b = false;
    bool has_coupled_d = false;

    explicit Simulator(const SwitchedMas& m, bool project) : mas(m) {
        const int n = mas.n_agents();
        const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
        for (const Graph& g : mas.family.graphs) {
            const Eigen::MatrixXd l_j = laplacian(g);
            TopologySim t;
            t.a_base = kron(identity, mas.blocks.A.d) + kron(l_j, mas.blocks.A.p);
            t.c_base = kron(identity, mas.blocks.C.d) + kron(l_j, mas.blocks.C.p);
            t.b_base = kron(identity, mas.blocks.B.d) + kron(l_j, mas.blocks.B.p);
            t.d_base = kron(identity, mas.blocks.D.d) + kron(l_j, mas.blocks.D.p);
            t.edges = g.edges;
            topologies.push_back(std::move(t));
        }
        if (project) {
            lift_x = kron(disagreement_projection(n),
                          Eigen::MatrixXd::Identity(mas.blocks.n_x(), mas.blocks.n_x()));
        }
        has_coupled_c = mas.blocks.C.c.cwiseAbs().maxCoeff() > 0.0;
        has_coupled_b = mas.blocks.B.c.cwiseAbs().maxCoeff() > 0.0;
        has_coupled_d = mas.blocks.D.c.cwiseAbs().maxCoeff() > 0.0;
    }

    bool projecting() const { return lift_x.size() > 0; }

    // out += (L~_edge (x) block) * y for one active edge {u, v}
    static void add_edge_coupling(const Edge& e, const Eigen::MatrixXd& block,
                                  const Eigen::VectorXd& y, Eigen::VectorXd& out) {
        const int d = static_cast<int>(block.rows());
        const int dy = static_cast<int>(block.cols());
        const int u = e.u - 1;
        const int v = e.v - 1;
        const Eigen::VectorXd diff = y.segment(u * dy, dy) - y.segment(v * dy, dy);
        out.segment(u * d, d).noalias() += block * diff;
        out.segment(v * d, d).noalias() -= block * diff;
    }
};

ImpulseSample impulse_energy_impl(const Simulator& sim, const SwitchedMas& mas,
                                  const SwitchingSequence& nu, int channel,
                                  const McConfig& cfg, Rng& rng) {
    const int n = mas.n_agents();
    const int input_dim = n * mas.blocks.n_w();
    if (channel < 1 || channel > input_dim) {
        throw std::invalid_argument("impulse channel out of range");
    }
    if (cfg.horizon < 1) throw std::invalid_argument("horizon must be positive");

    const int n_topologies = static_cast<int>(mas.family.graphs.size());
    const double p = mas.p;

    std::vector<std::uint8_t> active;
    double total = 0.0;
    double tail = 0.0;
    const int tail_start = cfg.horizon - (cfg.horizon + 9) / 10;

    Eigen::VectorXd state;      // projected coordinates when projecting
    Eigen::VectorXd y;          // stacked coordinates
    Eigen::VectorXd z, xnext;

    for (int k = 0; k < cfg.horizon; ++k) {
        const int j = nu.index_at(k, n_topologies);
        if (j < 1 || j > n_topologies) {
            throw std::out_of_range("switching sequence index out of range");
        }
        const TopologySim& top = sim.topologies[static_cast<std::size_t>(j - 1)];

        active.resize(top.edges.size());
        for (std::size_t e = 0; e < top.edges.size(); ++e) {
            active[e] = rng.bernoulli(p) ? 1 : 0;
        }

        if (k == 0) {
            // z_0 = D e_s, xi_1 = B e_s with the sampled loss pattern
            Eigen::VectorXd w_col = Eigen::VectorXd::Unit(input_dim, channel - 1);
            z = top.d_base * w_col;
            if (sim.has_coupled_d) {
                for (std::size_t e = 0; e < top.edges.size(); ++e) {
                    if (active[e]) {
                        Simulator::add_edge_coupling(top.edges[e], mas.blocks.D.c, w_col, z);
                    }
                }
            }
            xnext = top.b_base * w_col;
            if (sim.has_coupled_b) {
                for (std::size_t e = 0; e < top.edges.size(); ++e) {
                    if (active[e]) {
                        Simulator::add_edge_coupling(top.edges[e], mas.blocks.B.c, w_col, xnext);
                    }
                }
            }
        } else {
            y = sim.projecting() ? Eigen::VectorXd(sim.lift_x * state) : state;
            z = top.c_base * y;
            if (sim.has_coupled_c) {
                for (std::size_t e = 0; e < top.edges.size(); ++e) {
                    if (active[e]) {
                        Simulator::add_edge_coupling(top.edges[e], mas.blocks.C.c, y, z);
                    }
                }
            }
            xnext = top.a_base * y;
            for (std::size_t e = 0; e < top.edges.size(); ++e) {
                if (active[e]) {
                    Simulator::add_edge_coupling(top.edges[e], mas.blocks.A.c, y, xnext);
                }
            }
        }

        const double step_energy = z.squaredNorm();
        total += step_energy;
        if (k >= tail_start) tail += step_energy;
        state = sim.projecting() ? Eigen::VectorXd(sim.lift_x.transpose() * xnext) : xnext;
    }

    ImpulseSample out;
    out.energy = total;
    out.tail_flag = !std::isfinite(total) || (total > 0.0 && tail > cfg.tail_tolerance * total);
    return out;
}

}  // namespace

ImpulseSample impulse_energy(const SwitchedMas& mas, const SwitchingSequence& nu,
                             int channel, const McConfig& cfg, Rng& rng) {
    const Simulator sim(mas, cfg.project_disagreement);
    return impulse_energy_impl(sim, mas, nu, channel, cfg, rng);
}

McEstimate estimate_h2(const SwitchedMas& mas, const SwitchingSequence& nu,
                       const McConfig& cfg) {
    if (cfg.n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    const int input_dim = mas.n_agents() * mas.blocks.n_w();
    const Rng base(cfg.seed);
    const Simulator sim(mas, cfg.project_disagreement);

    McEstimate est;
    est.per_channel.resize(static_cast<std::size_t>(input_dim), 0.0);
    double variance_of_mean = 0.0;

    for (int s = 1; s <= input_dim; ++s) {
        std::vector<double> energies;
        energies.reserve(static_cast<std::size_t>(cfg.n_samples));
        for (int d = 0; d < cfg.n_samples; ++d) {
            Rng rng = base.split_for(
                mix(nu.stream_key(), static_cast<std::uint64_t>(s)),
                static_cast<std::uint64_t>(d));
            const ImpulseSample sample = impulse_energy_impl(sim, mas, nu, s, cfg, rng);
            est.truncated_energy_flag = est.truncated_energy_flag || sample.tail_flag;
            energies.push_back(sample.energy);
            if (cfg.collect_draws) est.draw_energies.push_back(sample.energy);
        }
        double mean = 0.0;
        for (double e : energies) mean += e;
        mean /= cfg.n_samples;
        est.per_channel[static_cast<std::size_t>(s - 1)] = mean;

        if (cfg.n_samples >= 2) {
            // Shifted sums keep the variance exactly zero for identical
            // draws (the p = 1 deterministic case).
            const double shift = energies.front();
            double sum = 0.0, sum_sq = 0.0;
            for (double e : energies) {
                const double d2 = e - shift;
                sum += d2;
                sum_sq += d2 * d2;
            }
            const double n = static_cast<double>(cfg.n_samples);
            const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
            variance_of_mean += var / n;
        }
    }

    est.mean = 0.0;
    for (double m : est.per_channel) est.mean += m;
    est.std_error = std::sqrt(variance_of_mean);
    return est;
}

SweepResult worst_case_sweep(const SwitchedMas& mas,
                             const std::vector<SwitchingSequence>& sequences,
                             const McConfig& cfg) {
    if (sequences.empty()) {
        throw std::invalid_argument("worst_case_sweep needs at least one sequence");
    }
    SweepResult result;
    result.max_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        McEstimate est = estimate_h2(mas, sequences[i], cfg);
        if (est.mean > result.max_mean) {
            result.max_mean = est.mean;
            result.argmax = static_cast<int>(i);
        }
        result.estimates.push_back(std::move(est));
    }
    return result;
}

}  // namespace swmas
