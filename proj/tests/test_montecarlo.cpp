#include "swmas/montecarlo.hpp"

#include "swmas/lmi.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>

using namespace swmas;

namespace {

Graph complete_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) edges.push_back({i, j});
    }
    return make_graph(n, std::move(edges));
}

SwitchedMas consensus_mas(std::vector<Graph> graphs, double lo, double hi, double p,
                          double kappa) {
    return make_switched_mas(make_family(std::move(graphs), lo, hi), p,
                             consensus_example(kappa));
}

// plain dense reference simulation of one impulse response (lossless case)
double deterministic_energy(const SwitchedMas& mas, int topology, int channel,
                            int horizon, bool project) {
    const Eigen::MatrixXd lap = laplacian(mas.family.graphs[topology - 1]);
    const ModeMatrices m = assemble_mode(mas, lap, lap);
    const int n_x = mas.blocks.n_x();
    Eigen::MatrixXd lift = Eigen::MatrixXd::Identity(m.A.rows(), m.A.rows());
    if (project) {
        lift = kron(disagreement_projection(mas.n_agents()),
                    Eigen::MatrixXd::Identity(n_x, n_x));
    }
    const Eigen::MatrixXd a = lift.transpose() * m.A * lift;
    const Eigen::MatrixXd b = lift.transpose() * m.B;
    const Eigen::MatrixXd c = m.C * lift;

    Eigen::VectorXd w = Eigen::VectorXd::Unit(m.B.cols(), channel - 1);
    double energy = (m.D * w).squaredNorm();
    Eigen::VectorXd x = b * w;
    for (int k = 1; k < horizon; ++k) {
        energy += (c * x).squaredNorm();
        x = a * x;
    }
    return energy;
}

}  // namespace

TEST_CASE("lossless impulse response matches the deterministic recursion") {
    const SwitchedMas mas = consensus_mas({make_graph(2, {{1, 2}})}, 2.0, 2.0, 1.0, 0.1);
    for (const bool project : {false, true}) {
        McConfig cfg;
        cfg.horizon = 60;
        cfg.project_disagreement = project;
        for (int channel = 1; channel <= 2; ++channel) {
            Rng rng(11);
            const ImpulseSample sample =
                impulse_energy(mas, constant_sequence(1), channel, cfg, rng);
            const double expected = deterministic_energy(mas, 1, channel, 60, project);
            CHECK(sample.energy == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("zero input blocks give zero energy") {
    DecomposableMatrices blocks = consensus_example(0.1);
    blocks.B.d.setZero();
    const SwitchedMas mas = make_switched_mas(
        make_family({complete_graph(4)}, 4.0, 4.0), 0.7, blocks);
    McConfig cfg;
    cfg.horizon = 100;
    cfg.project_disagreement = true;
    Rng rng(3);
    const ImpulseSample sample = impulse_energy(mas, constant_sequence(1), 2, cfg, rng);
    CHECK(sample.energy == 0.0);
    CHECK_FALSE(sample.tail_flag);
}

TEST_CASE("total loss on the deflated consensus system diverges") {
    // p = 0 freezes the disagreement state, so output energy accumulates
    // linearly and the truncation criterion must fire
    const SwitchedMas mas = consensus_mas({complete_graph(4)}, 4.0, 4.0, 0.0, 0.1);
    McConfig cfg;
    cfg.horizon = 500;
    cfg.project_disagreement = true;
    Rng rng(5);
    const ImpulseSample sample = impulse_energy(mas, constant_sequence(1), 1, cfg, rng);
    CHECK(sample.tail_flag);
    CHECK(sample.energy > 0.0);

    const McEstimate est = estimate_h2(mas, constant_sequence(1), cfg);
    CHECK(est.truncated_energy_flag);
}

TEST_CASE("impulse channel bounds are validated") {
    const SwitchedMas mas = consensus_mas({complete_graph(4)}, 4.0, 4.0, 0.5, 0.1);
    McConfig cfg;
    Rng rng(1);
    CHECK_THROWS_AS(impulse_energy(mas, constant_sequence(1), 0, cfg, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(impulse_energy(mas, constant_sequence(1), 5, cfg, rng),
                    std::invalid_argument);
}

TEST_CASE("estimator structure") {
    const SwitchedMas mas = consensus_mas({complete_graph(4)}, 4.0, 4.0, 0.5, 0.1);
    McConfig cfg;
    cfg.horizon = 200;
    cfg.n_samples = 50;
    cfg.seed = 99;
    cfg.project_disagreement = true;
    const McEstimate est = estimate_h2(mas, constant_sequence(1), cfg);

    SUBCASE("channel energies add up exactly") {
        double sum = 0.0;
        for (double v : est.per_channel) sum += v;
        CHECK(est.mean == sum);
        CHECK(est.per_channel.size() == 4);
    }
    SUBCASE("bit-identical reproduction for the same configuration") {
        const McEstimate again = estimate_h2(mas, constant_sequence(1), cfg);
        CHECK(again == est);
    }
    SUBCASE("variance vanishes exactly in the lossless case") {
        const SwitchedMas lossless = consensus_mas({complete_graph(4)}, 4.0, 4.0, 1.0, 0.1);
        const McEstimate det = estimate_h2(lossless, constant_sequence(1), cfg);
        CHECK(det.std_error == 0.0);
    }
}

TEST_CASE("estimates agree with the exact constant-topology norm") {
    const Graph k4 = complete_graph(4);
    const SwitchedMas mas = consensus_mas({k4}, 4.0, 4.0, 0.5, 0.1);
    McConfig cfg;
    cfg.horizon = 250;
    cfg.n_samples = 10000;
    cfg.seed = 2024;
    cfg.project_disagreement = true;
    const McEstimate est = estimate_h2(mas, constant_sequence(1), cfg);
    const double exact = oracles::exact_consensus_h2sq_constant(k4, 0.5, 0.1);
    CHECK(std::abs(est.mean - exact) <= 4.0 * est.std_error);

    SUBCASE("and stay below the certified bound") {
        const LmiCertificate cert = solve_h2_bound(mas, true);
        REQUIRE(cert.certified());
        CHECK(est.mean - 3.0 * est.std_error <= cert.h2_bound * cert.h2_bound);
        // the exact value must respect the bound outright
        CHECK(exact <= cert.h2_bound * cert.h2_bound);
    }
}

TEST_CASE("standard error shrinks like the square root of the sample count") {
    const SwitchedMas mas = consensus_mas({complete_graph(4)}, 4.0, 4.0, 0.4, 0.1);
    McConfig cfg;
    cfg.horizon = 200;
    cfg.seed = 7;
    cfg.project_disagreement = true;

    cfg.n_samples = 400;
    const McEstimate small = estimate_h2(mas, constant_sequence(1), cfg);
    cfg.n_samples = 800;
    const McEstimate large = estimate_h2(mas, constant_sequence(1), cfg);
    const double ratio = small.std_error / large.std_error;
    CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("switching sequences emit valid indices") {
    const int n_topologies = 7;
    SUBCASE("sequential cycles with the configured period") {
        const SwitchingSequence seq = sequential_sequence(3);
        CHECK(seq.index_at(0, n_topologies) == 1);
        CHECK(seq.index_at(2, n_topologies) == 1);
        CHECK(seq.index_at(3, n_topologies) == 2);
        CHECK(seq.index_at(20, n_topologies) == 7);
        CHECK(seq.index_at(21, n_topologies) == 1);
    }
    SUBCASE("random draws are uniform-ish, reproducible and in range") {
        const SwitchingSequence seq = random_sequence(42);
        std::vector<int> counts(static_cast<std::size_t>(n_topologies), 0);
        for (int k = 0; k < 7000; ++k) {
            const int j = seq.index_at(k, n_topologies);
            CHECK(j >= 1);
            CHECK(j <= n_topologies);
            counts[static_cast<std::size_t>(j - 1)]++;
            CHECK(seq.index_at(k, n_topologies) == j);
        }
        for (int c : counts) CHECK(c > 700);
    }
}

TEST_CASE("worst-case sweep") {
    std::vector<Graph> family;
    for (int k = 1; k <= 3; ++k) family.push_back(circulant_graph(8, k));
    const SwitchedMas mas = consensus_mas(family, 0.5, 7.0, 0.6, 0.1);
    McConfig cfg;
    cfg.horizon = 400;
    cfg.n_samples = 20;
    cfg.seed = 31;
    cfg.project_disagreement = true;

    SUBCASE("single sequence: the max is that estimate") {
        const SweepResult r = worst_case_sweep(mas, {constant_sequence(2)}, cfg);
        REQUIRE(r.estimates.size() == 1);
        CHECK(r.max_mean == r.estimates[0].mean);
        CHECK(r.argmax == 0);
    }
    SUBCASE("duplicated sequences give identical estimates") {
        const SweepResult r = worst_case_sweep(
            mas, {constant_sequence(1), constant_sequence(1), random_sequence(9),
                  random_sequence(9)},
            cfg);
        CHECK(r.estimates[0] == r.estimates[1]);
        CHECK(r.estimates[2] == r.estimates[3]);
    }
    SUBCASE("constants plus mixed sequences report their maximum") {
        std::vector<SwitchingSequence> seqs;
        for (int j = 1; j <= 3; ++j) seqs.push_back(constant_sequence(j));
        seqs.push_back(sequential_sequence(1));
        seqs.push_back(random_sequence(17));
        const SweepResult r = worst_case_sweep(mas, seqs, cfg);
        REQUIRE(r.argmax >= 0);
        CHECK(r.max_mean == r.estimates[static_cast<std::size_t>(r.argmax)].mean);
        for (const McEstimate& e : r.estimates) CHECK(e.mean <= r.max_mean);
    }
    SUBCASE("empty sweep is rejected") {
        CHECK_THROWS_AS(worst_case_sweep(mas, {}, cfg), std::invalid_argument);
    }
}
