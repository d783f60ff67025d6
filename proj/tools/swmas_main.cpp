// swmas: analysis and simulation toolkit for homogeneous multi-agent
// systems on switching topologies with Bernoulli packet loss.
//
// Subcommands:
//   analyze   certify a mean-square stability / H2 performance bound
//   contour   sweep the spectral interval and tabulate the bound
//   span      compare certified bounds against Monte-Carlo estimates
//   verify    run the built-in cross-validation suite
//   spectrum  export family Laplacian spectra and validate bounds
//
// Exit codes: 0 success, 1 usage or input error, 2 no certificate,
// 3 verification failure.

#include "swmas/graph.hpp"
#include "swmas/lmi.hpp"
#include "swmas/model.hpp"
#include "swmas/model_io.hpp"
#include "swmas/montecarlo.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

namespace {

constexpr const char* kVersion = "swmas 0.1.0";

using namespace swmas;

int thread_count(std::size_t n_items) {
    unsigned threads = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("SWMAS_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) threads = static_cast<unsigned>(parsed);
    }
    if (threads == 0) threads = 1;
    return static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(n_items, 1)));
}

// Run fn(i) for i in [0, n) on a fixed thread grid; results must be
// written into preallocated slots so output order stays deterministic.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int n_threads = thread_count(n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct FamilySpec {
    std::string model_path;
    std::string circulant;  // "N:KMAX"
    double lambda_lo = 2.68;
    double lambda_hi = 18.24;
    bool lo_overridden = false;
    bool hi_overridden = false;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--model", model_path, "model description file");
        cmd->add_option("--circulant", circulant,
                        "cyclic family N:KMAX (forward neighbour counts 1..KMAX)");
        cmd->add_option("--lo", lambda_lo, "claimed lower spectral bound")
            ->each([this](const std::string&) { lo_overridden = true; });
        cmd->add_option("--hi", lambda_hi, "claimed upper spectral bound")
            ->each([this](const std::string&) { hi_overridden = true; });
    }

    std::string label() const { return circulant.empty() ? model_path : circulant; }

    /// Family from the flags; model-file bounds win unless overridden.
    GraphFamily build_family() const {
        if (!circulant.empty()) {
            const auto colon = circulant.find(':');
            if (colon == std::string::npos) {
                throw std::runtime_error("--circulant expects N:KMAX");
            }
            const int n = std::stoi(circulant.substr(0, colon));
            const int kmax = std::stoi(circulant.substr(colon + 1));
            std::vector<Graph> graphs;
            for (int k = 1; k <= kmax; ++k) graphs.push_back(circulant_graph(n, k));
            return make_family(std::move(graphs), lambda_lo, lambda_hi);
        }
        if (!model_path.empty()) {
            GraphFamily family = parse_model_file(model_path).family;
            if (lo_overridden) family.lambda_lo = lambda_lo;
            if (hi_overridden) family.lambda_hi = lambda_hi;
            return make_family(family.graphs, family.lambda_lo, family.lambda_hi);
        }
        throw std::runtime_error("specify a family via --model or --circulant");
    }
};

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

std::string flag(bool b) { return b ? "1" : "0"; }

// ---------------------------------------------------------------- analyze

int cmd_analyze(const std::string& model_path, bool consensus, bool swapped, int n_agents,
                double kappa, double p, std::optional<double> lo, std::optional<double> hi,
                bool deflate) {
    DecomposableMatrices blocks;
    GraphFamily family;
    if (consensus) {
        if (!lo || !hi) {
            std::cerr << "analyze: --consensus needs --lo and --hi\n";
            return 1;
        }
        blocks = swapped ? consensus_example_swapped(kappa) : consensus_example(kappa);
        // spectral bounds are configuration; a synthetic member pins N
        family = make_family({circulant_graph(n_agents, 1)}, *lo, *hi);
    } else {
        const ModelFile model = parse_model_file(model_path);
        if (!model.blocks) {
            std::cerr << "analyze: model file has no blocks section\n";
            return 1;
        }
        blocks = *model.blocks;
        family = model.family;
        if (lo || hi) {
            family.lambda_lo = lo.value_or(family.lambda_lo);
            family.lambda_hi = hi.value_or(family.lambda_hi);
        }
    }

    const SwitchedMas mas = make_switched_mas(family, p, blocks);
    LmiCertificate cert;
    try {
        cert = solve_h2_bound(mas, deflate);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "analyze: " << ex.what() << "\n";
        return 1;
    }

    std::cout << kVersion << " certificate report\n";
    std::cout << "agents: " << mas.n_agents() << "  p: " << format_double(p)
              << "  bounds: [" << format_double(mas.family.lambda_lo) << ", "
              << format_double(mas.family.lambda_hi) << "]\n";
    std::cout << cert.report();
    if (!cert.certified()) return 2;
    return 0;
}

// ---------------------------------------------------------------- contour

int cmd_contour(const std::string& variant, int n_agents, double kappa, double p, int grid,
                double lo_max, double hi_max, const std::string& out_path) {
    if (grid < 2) {
        std::cerr << "contour: grid must be at least 2\n";
        return 1;
    }
    const bool swapped = variant == "swapped";
    const DecomposableMatrices blocks =
        swapped ? consensus_example_swapped(kappa) : consensus_example(kappa);

    std::vector<double> lo_values, hi_values;
    for (int i = 1; i <= grid; ++i) {
        lo_values.push_back(lo_max * i / grid);
        hi_values.push_back(hi_max * i / grid);
    }

    struct Cell {
        double lo, hi;
        std::optional<double> gamma;
    };
    std::vector<Cell> cells;
    for (const double hi : hi_values) {
        for (const double lo : lo_values) {
            if (lo <= hi) cells.push_back({lo, hi, std::nullopt});
        }
    }

    parallel_for(cells.size(), [&](std::size_t i) {
        Cell& cell = cells[i];
        const GraphFamily family =
            make_family({circulant_graph(n_agents, 1)}, cell.lo, cell.hi);
        const SwitchedMas mas = make_switched_mas(family, p, blocks);
        const LmiCertificate cert = solve_h2_bound(mas, /*deflated=*/true);
        if (cert.certified()) cell.gamma = cert.gamma;
    });

    std::ofstream out = open_output(out_path);
    out << "# " << kVersion << "\n";
    out << "# command: contour variant=" << variant << " N=" << n_agents
        << " kappa=" << format_double(kappa) << " p=" << format_double(p)
        << " grid=" << grid << " lo_max=" << format_double(lo_max)
        << " hi_max=" << format_double(hi_max) << "\n";
    out << "lambda_lo,lambda_hi,gamma\n";
    for (const Cell& cell : cells) {
        out << format_double(cell.lo) << "," << format_double(cell.hi) << ",";
        if (cell.gamma) out << format_double(*cell.gamma);
        out << "\n";
    }
    std::cout << "contour: wrote " << cells.size() << " cells to " << out_path << "\n";
    return 0;
}

// ------------------------------------------------------------------- span

int cmd_span(const FamilySpec& family_spec, double kappa, bool deflate, double pmin,
             double pmax, int pcount, int samples, int horizon, double tail_tol,
             std::uint64_t seed, int sequential_period, int random_sequences,
             const std::string& out_path, const std::string& detail_path,
             const std::string& raw_path) {
    if (pcount < 1 || pmin <= 0.0 || pmax > 1.0 || pmin > pmax) {
        std::cerr << "span: probability grid must satisfy 0 < pmin <= pmax <= 1\n";
        return 1;
    }
    const GraphFamily family = family_spec.build_family();
    const std::vector<Graph>& graphs = family.graphs;
    const DecomposableMatrices blocks = consensus_example(kappa);

    // fail fast on the deflation precondition before any worker threads run
    build_theorem2_problem(make_switched_mas(family, pmax, blocks), deflate);

    {
        // bounds are configuration inputs; surface disagreements early
        const FamilyValidation validation = validate_family(family);
        if (!validation.pass) {
            std::cerr << "span: note: configured bounds [" << format_double(family.lambda_lo)
                      << ", " << format_double(family.lambda_hi)
                      << "] do not contain every member spectrum; computed tightest bounds ["
                      << format_double(validation.tightest_lo) << ", "
                      << format_double(validation.tightest_hi) << "]\n";
        }
    }

    std::vector<SwitchingSequence> sequences;
    for (int j = 1; j <= static_cast<int>(graphs.size()); ++j) {
        sequences.push_back(constant_sequence(j));
    }
    sequences.push_back(sequential_sequence(sequential_period));
    for (int r = 0; r < random_sequences; ++r) {
        sequences.push_back(random_sequence(seed + static_cast<std::uint64_t>(r)));
    }

    std::vector<double> p_grid;
    for (int i = 0; i < pcount; ++i) {
        if (pcount == 1 || i == pcount - 1) {
            p_grid.push_back(pmax);
        } else {
            p_grid.push_back(pmin + (pmax - pmin) * i / (pcount - 1));
        }
    }

    struct Row {
        double p = 0.0;
        std::optional<double> bound;
        SweepResult sweep;
    };
    std::vector<Row> rows(p_grid.size());

    parallel_for(p_grid.size(), [&](std::size_t i) {
        Row& row = rows[i];
        row.p = p_grid[i];
        const SwitchedMas mas = make_switched_mas(family, row.p, blocks);
        const LmiCertificate cert = solve_h2_bound(mas, deflate);
        if (cert.certified()) row.bound = cert.h2_bound;

        McConfig cfg;
        cfg.n_samples = samples;
        cfg.horizon = horizon;
        cfg.tail_tolerance = tail_tol;
        cfg.seed = seed;
        cfg.project_disagreement = deflate;
        cfg.collect_draws = !raw_path.empty();
        row.sweep = worst_case_sweep(mas, sequences, cfg);
    });

    std::ostringstream header;
    header << "# " << kVersion << "\n";
    header << "# command: span family=" << family_spec.label()
           << " lo=" << format_double(family.lambda_lo)
           << " hi=" << format_double(family.lambda_hi) << " kappa=" << format_double(kappa)
           << " deflate=" << flag(deflate) << " pmin=" << format_double(pmin)
           << " pmax=" << format_double(pmax) << " pcount=" << pcount
           << " samples=" << samples << " horizon=" << horizon
           << " tail_tol=" << format_double(tail_tol) << " seed=" << seed
           << " sequential_period=" << sequential_period
           << " random_sequences=" << random_sequences << "\n";

    std::ofstream out = open_output(out_path);
    out << header.str();
    out << "p,h2_bound,h2_mc_min,h2_mc_max\n";
    for (const Row& row : rows) {
        double mc_min = std::numeric_limits<double>::infinity();
        double mc_max = -mc_min;
        for (const McEstimate& est : row.sweep.estimates) {
            mc_min = std::min(mc_min, est.mean);
            mc_max = std::max(mc_max, est.mean);
        }
        out << format_double(row.p) << ",";
        if (row.bound) out << format_double(*row.bound);
        out << "," << format_double(std::sqrt(mc_min)) << ","
            << format_double(std::sqrt(mc_max)) << "\n";
    }
    std::cout << "span: wrote " << rows.size() << " probability points to " << out_path
              << "\n";

    if (!detail_path.empty()) {
        std::ofstream detail = open_output(detail_path);
        detail << header.str();
        detail << "p,sequence_id,h2sq_mean,stderr\n";
        for (const Row& row : rows) {
            for (std::size_t s = 0; s < sequences.size(); ++s) {
                const McEstimate& est = row.sweep.estimates[s];
                detail << format_double(row.p) << "," << sequences[s].label() << ","
                       << format_double(est.mean) << "," << format_double(est.std_error)
                       << "\n";
            }
        }
    }
    if (!raw_path.empty()) {
        std::ofstream raw = open_output(raw_path);
        raw << header.str();
        raw << "p,sequence_id,channel,draw,energy\n";
        for (const Row& row : rows) {
            for (std::size_t s = 0; s < sequences.size(); ++s) {
                const McEstimate& est = row.sweep.estimates[s];
                const int n_channels = static_cast<int>(est.per_channel.size());
                for (int ch = 0; ch < n_channels; ++ch) {
                    for (int d = 0; d < samples; ++d) {
                        raw << format_double(row.p) << "," << sequences[s].label() << ","
                            << (ch + 1) << "," << (d + 1) << ","
                            << format_double(
                                   est.draw_energies[static_cast<std::size_t>(ch) *
                                                         static_cast<std::size_t>(samples) +
                                                     static_cast<std::size_t>(d)])
                            << "\n";
                    }
                }
            }
        }
    }
    return 0;
}

// ----------------------------------------------------------------- verify

int cmd_verify(std::uint64_t seed, bool corrupt_lemma1) {
    int failures = 0;
    const auto check = [&failures](const std::string& name, bool ok,
                                   const std::string& detail = "") {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failures;
    };

    // 1. loss-pattern enumeration against the closed-form expectations
    {
        Rng rng(seed);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 3 + static_cast<int>(rng.next_u64() % 4);  // 3..6 vertices
            std::vector<Edge> all_edges;
            for (int i = 1; i <= n; ++i) {
                for (int j = i + 1; j <= n; ++j) all_edges.push_back({i, j});
            }
            std::vector<Edge> chosen;
            for (const Edge& e : all_edges) {
                if (chosen.size() < 8 && rng.bernoulli(0.6)) chosen.push_back(e);
            }
            if (chosen.empty()) chosen.push_back(all_edges.front());
            const Graph g = make_graph(n, chosen);

            for (const double p : {0.1, 0.5, 0.9}) {
                const SwitchedMas mas = make_switched_mas(
                    make_family({g}, 1e-6, 2.0 * n), p, consensus_example(0.1));
                const ModeDistribution dist = mode_distribution(mas, 1);
                Eigen::MatrixXd mean1 = Eigen::MatrixXd::Zero(n, n);
                Eigen::MatrixXd mean2 = Eigen::MatrixXd::Zero(n, n);
                for (const Mode& m : dist.modes) {
                    mean1 += m.probability * m.l_tilde;
                    mean2 += m.probability * (m.l_tilde.transpose() * m.l_tilde);
                }
                auto [expected1, expected2] = expected_laplacians(g, p);
                if (corrupt_lemma1) {
                    // test hook: misweight the loss-variance term
                    expected2 += 0.01 * 2.0 * p * (1.0 - p) * laplacian(g);
                }
                worst = std::max(worst, (mean1 - expected1).cwiseAbs().maxCoeff());
                worst = std::max(worst, (mean2 - expected2).cwiseAbs().maxCoeff());
            }
        }
        std::ostringstream detail;
        detail << "max residual " << worst;
        check("expected-laplacian enumeration", worst < 1e-12, detail.str());
    }

    // 2. scalar consensus closed form against the solver
    {
        double worst_rel = 0.0;
        bool all_ok = true;
        for (const double p : {0.3, 0.5, 0.8, 1.0}) {
            for (const double kappa : {0.05, 0.1}) {
                const double lo = 2.68, hi = 18.24;
                const double a_lo = 1.0 - p * kappa * lo;
                const double a_hi = 1.0 - p * kappa * hi;
                const double d_lo = 1.0 - a_lo * a_lo - 2.0 * p * (1.0 - p) * lo * kappa * kappa;
                const double d_hi = 1.0 - a_hi * a_hi - 2.0 * p * (1.0 - p) * hi * kappa * kappa;
                if (d_lo <= 0.0 || d_hi <= 0.0) continue;
                const double q_star = std::max(lo * lo / d_lo, hi * hi / d_hi);

                std::vector<Graph> graphs;
                for (int k = 1; k <= 7; ++k) graphs.push_back(circulant_graph(20, k));
                const SwitchedMas mas = make_switched_mas(make_family(graphs, lo, hi), p,
                                                          consensus_example(kappa));
                const LmiCertificate cert = solve_h2_bound(mas, true);
                if (!cert.certified()) {
                    all_ok = false;
                    continue;
                }
                worst_rel = std::max(
                    worst_rel, std::abs(cert.gamma * cert.gamma - q_star) / q_star);
            }
        }
        std::ostringstream detail;
        detail << "max relative deviation " << worst_rel;
        check("scalar closed-form bound", all_ok && worst_rel < 1e-6, detail.str());
    }

    // 3. endpoint certificates lifted onto small stacked instances
    {
        bool all_ok = true;
        std::ostringstream detail;
        for (const int n : {3, 4, 5}) {
            std::vector<Graph> graphs = {circulant_graph(n, 1)};
            std::vector<Edge> complete;
            for (int i = 1; i <= n; ++i) {
                for (int j = i + 1; j <= n; ++j) complete.push_back({i, j});
            }
            graphs.push_back(make_graph(n, complete));
            const FamilyValidation v =
                validate_family(GraphFamily{graphs, 1e-9, 2.0 * n});
            const GraphFamily family =
                make_family(graphs, v.tightest_lo, v.tightest_hi);
            for (const double p : {0.3, 0.7}) {
                const SwitchedMas mas =
                    make_switched_mas(family, p, consensus_example(0.1));
                const LmiCertificate cert = solve_h2_bound(mas, true);
                if (!cert.certified()) {
                    all_ok = false;
                    detail << " no-cert(N=" << n << ",p=" << p << ")";
                    continue;
                }
                const LiftingReport report = verify_certificate_lifting(mas, cert);
                if (!report.pass) {
                    all_ok = false;
                    for (const auto& r : report.per_topology) {
                        if (r.gramian_residual_eig >= 0.0 || r.trace_residual_eig >= 0.0) {
                            detail << " violation(N=" << n << ",p=" << p
                                   << ",topology=" << r.topology_index << ")";
                        }
                    }
                }
            }
        }
        check("stacked-instance lifting", all_ok, detail.str());
    }

    std::cout << (failures == 0 ? "verify: all checks passed\n"
                                : "verify: FAILURES detected\n");
    return failures == 0 ? 0 : 3;
}

// --------------------------------------------------------------- spectrum

int cmd_spectrum(const FamilySpec& family_spec, const std::string& out_path) {
    const GraphFamily family = family_spec.build_family();
    const std::vector<Graph>& graphs = family.graphs;

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file = open_output(out_path);
        out = &file;
    }
    *out << "# " << kVersion << "\n";
    *out << "# command: spectrum family=" << family_spec.label()
         << " lo=" << format_double(family.lambda_lo)
         << " hi=" << format_double(family.lambda_hi) << "\n";
    *out << "graph_index,eig_index,value\n";
    for (std::size_t g = 0; g < graphs.size(); ++g) {
        const Eigen::VectorXd eig = spectrum(laplacian(graphs[g]));
        for (int i = 0; i < eig.size(); ++i) {
            *out << (g + 1) << "," << (i + 1) << "," << format_double(eig(i)) << "\n";
        }
    }

    const FamilyValidation validation = validate_family(family);
    std::cerr << validation.summary();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - stability and H2 performance analysis for multi-agent systems "
                 "with packet loss"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "certify an H2 performance bound");
    std::string analyze_model;
    bool analyze_consensus = false, analyze_swapped = false, analyze_deflate = false;
    int analyze_agents = 20;
    double analyze_kappa = 0.1, analyze_p = 0.5;
    std::optional<double> analyze_lo, analyze_hi;
    analyze->add_option("--model", analyze_model, "model description file");
    analyze->add_flag("--consensus", analyze_consensus, "use the built-in consensus agents");
    analyze->add_flag("--swapped", analyze_swapped,
                      "swap performance input and output of the consensus agents");
    analyze->add_option("-N,--agents", analyze_agents, "number of agents (consensus)");
    analyze->add_option("--kappa", analyze_kappa, "consensus protocol gain");
    analyze->add_option("-p,--probability", analyze_p, "transmission probability")
        ->required();
    analyze->add_option("--lo", analyze_lo, "lower spectral bound");
    analyze->add_option("--hi", analyze_hi, "upper spectral bound");
    analyze->add_flag("--deflate", analyze_deflate,
                      "analyse the disagreement dynamics only");

    // contour
    auto* contour = app.add_subcommand("contour", "bound as a function of the bounds interval");
    std::string contour_variant = "consensus", contour_out = "contour.csv";
    int contour_agents = 20, contour_grid = 50;
    double contour_kappa = 0.1, contour_p = 0.5, contour_lo_max = 0.0, contour_hi_max = 0.0;
    contour->add_option("--variant", contour_variant, "consensus | swapped")
        ->check(CLI::IsMember({"consensus", "swapped"}));
    contour->add_option("-N,--agents", contour_agents, "number of agents");
    contour->add_option("--kappa", contour_kappa, "consensus protocol gain");
    contour->add_option("-p,--probability", contour_p, "transmission probability");
    contour->add_option("--grid", contour_grid, "grid points per axis");
    contour->add_option("--lo-max", contour_lo_max, "largest lower-bound value (default N)");
    contour->add_option("--hi-max", contour_hi_max, "largest upper-bound value (default N)");
    contour->add_option("-o,--output", contour_out, "output CSV path");

    // span
    auto* span = app.add_subcommand("span", "certified bound vs Monte-Carlo estimates");
    FamilySpec span_family;
    span_family.circulant = "20:7";
    span_family.add_flags(span);
    double span_kappa = 0.1, span_pmin = 0.05, span_pmax = 1.0, span_tail = 1e-6;
    int span_pcount = 20, span_samples = 10, span_horizon = 2000;
    int span_seq_period = 1, span_randoms = 2;
    std::uint64_t span_seed = 1;
    bool span_deflate = false;
    std::string span_out = "span.csv", span_detail, span_raw;
    span->add_option("--kappa", span_kappa, "consensus protocol gain");
    span->add_flag("--deflate", span_deflate, "analyse/simulate the disagreement dynamics");
    span->add_option("--pmin", span_pmin, "smallest transmission probability");
    span->add_option("--pmax", span_pmax, "largest transmission probability");
    span->add_option("--pcount", span_pcount, "number of probability grid points");
    span->add_option("--samples", span_samples, "loss draws per input channel");
    span->add_option("--horizon", span_horizon, "simulation steps per impulse");
    span->add_option("--tail-tol", span_tail, "truncation tail tolerance");
    span->add_option("--seed", span_seed, "random seed");
    span->add_option("--sequential-period", span_seq_period,
                     "steps per topology for the sequential sequence");
    span->add_option("--random-sequences", span_randoms, "number of random sequences");
    span->add_option("-o,--output", span_out, "output CSV path");
    span->add_option("--detail", span_detail, "per-sequence aggregate CSV path");
    span->add_option("--raw", span_raw, "per-draw energy CSV path");

    // verify
    auto* verify = app.add_subcommand("verify", "run the built-in cross-check suite");
    std::uint64_t verify_seed = 7;
    bool verify_corrupt = false;
    verify->add_option("--seed", verify_seed, "seed for the randomized checks");
    verify->add_flag("--corrupt-lemma1", verify_corrupt,
                     "test hook: misweight the expected-Laplacian variance term");

    // spectrum
    auto* spectrum_cmd = app.add_subcommand("spectrum", "export spectra and validate bounds");
    FamilySpec spectrum_family;
    spectrum_family.add_flags(spectrum_cmd);
    std::string spectrum_out;
    spectrum_cmd->add_option("-o,--output", spectrum_out, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(analyze)) {
            if (!analyze_consensus && analyze_model.empty()) {
                std::cerr << "analyze: specify --consensus or --model\n";
                return 1;
            }
            return cmd_analyze(analyze_model, analyze_consensus, analyze_swapped,
                               analyze_agents, analyze_kappa, analyze_p, analyze_lo,
                               analyze_hi, analyze_deflate);
        }
        if (app.got_subcommand(contour)) {
            if (contour_lo_max <= 0.0) contour_lo_max = contour_agents;
            if (contour_hi_max <= 0.0) contour_hi_max = contour_agents;
            return cmd_contour(contour_variant, contour_agents, contour_kappa, contour_p,
                               contour_grid, contour_lo_max, contour_hi_max, contour_out);
        }
        if (app.got_subcommand(span)) {
            return cmd_span(span_family, span_kappa, span_deflate, span_pmin, span_pmax,
                            span_pcount, span_samples, span_horizon, span_tail, span_seed,
                            span_seq_period, span_randoms, span_out, span_detail, span_raw);
        }
        if (app.got_subcommand(verify)) {
            return cmd_verify(verify_seed, verify_corrupt);
        }
        if (app.got_subcommand(spectrum_cmd)) {
            return cmd_spectrum(spectrum_family, spectrum_out);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
