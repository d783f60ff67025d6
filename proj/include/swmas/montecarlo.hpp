#pragma once

// Empirical squared-H2 estimation: unit impulses are applied per input
// channel, packet loss is redrawn every step, and output energies are
// averaged over independent loss draws for a configurable deterministic
// switching sequence.

#include "swmas/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace swmas {

enum class SequenceKind { constant, sequential, random_uniform };

/// Deterministic topology switching sequence nu.
struct SwitchingSequence {
    SequenceKind kind = SequenceKind::constant;
    int constant_index = 1;   // constant: the topology to hold
    int period = 1;           // sequential: steps spent on each topology
    std::uint64_t seed = 0;   // random_uniform: draw stream seed

    /// Topology index at step k (1-based, always within the family).
    int index_at(int k, int n_topologies) const;

    /// Key derived from the sequence content, not its list position, so
    /// duplicated sequences reproduce identical estimates.
    std::uint64_t stream_key() const;

    std::string label() const;
};

SwitchingSequence constant_sequence(int topology_index);
SwitchingSequence sequential_sequence(int period = 1);
SwitchingSequence random_sequence(std::uint64_t seed);

struct McConfig {
    int n_samples = 10;          // independent loss draws per channel
    int horizon = 2000;          // simulated steps per impulse response
    double tail_tolerance = 1e-6;
    std::uint64_t seed = 0;
    bool project_disagreement = false;
    bool collect_draws = false;  // keep per-draw energies in the estimate
};

struct ImpulseSample {
    double energy = 0.0;
    bool tail_flag = false;  // last-10% energy above the tail tolerance
};

/// Energy of one impulse response: w_0 = e_channel, loss mask redrawn each
/// step from rng, topology from nu. channel is 1-based in [1, N*n_w].
ImpulseSample impulse_energy(const SwitchedMas& mas, const SwitchingSequence& nu,
                             int channel, const McConfig& cfg, Rng& rng);

struct McEstimate {
    double mean = 0.0;        // estimated squared H2 norm for this nu
    double std_error = 0.0;   // standard error of the mean
    bool truncated_energy_flag = false;
    std::vector<double> per_channel;  // per-channel mean energies
    /// Raw draw energies, channel-major, when collect_draws was set.
    std::vector<double> draw_energies;

    friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

McEstimate estimate_h2(const SwitchedMas& mas, const SwitchingSequence& nu,
                       const McConfig& cfg);

struct SweepResult {
    std::vector<McEstimate> estimates;  // one per input sequence
    double max_mean = 0.0;
    int argmax = -1;
};

/// Empirical lower-bound proxy: evaluates every candidate sequence and
/// reports the worst observed squared norm.
SweepResult worst_case_sweep(const SwitchedMas& mas,
                             const std::vector<SwitchingSequence>& sequences,
                             const McConfig& cfg);

}  // namespace swmas
