#include "swmas/graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace swmas {

Edge make_edge(int a, int b) {
    if (a == b) {
        throw std::invalid_argument("self-loop edge {" + std::to_string(a) + "," +
                                    std::to_string(b) + "} is not allowed");
    }
    if (a <= 0 || b <= 0) {
        throw std::invalid_argument("vertex labels must be positive");
    }
    return a < b ? Edge{a, b} : Edge{b, a};
}

Graph make_graph(int n_vertices, std::vector<Edge> edges) {
    if (n_vertices <= 0) {
        throw std::invalid_argument("graph needs a positive vertex count");
    }
    for (Edge& e : edges) {
        e = make_edge(e.u, e.v);
        if (e.v > n_vertices) {
            throw std::invalid_argument("edge {" + std::to_string(e.u) + "," +
                                        std::to_string(e.v) + "} exceeds vertex count " +
                                        std::to_string(n_vertices));
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Graph{n_vertices, std::move(edges)};
}

bool has_edge(const Graph& g, const Edge& e) {
    return std::binary_search(g.edges.begin(), g.edges.end(), e);
}

Graph circulant_graph(int n, int k_forward) {
    if (n <= 0) throw std::invalid_argument("circulant graph needs n > 0");
    if (k_forward < 1 || k_forward > (n - 1) / 2) {
        throw std::invalid_argument("circulant k_forward=" + std::to_string(k_forward) +
                                    " out of range [1, " + std::to_string((n - 1) / 2) +
                                    "] for n=" + std::to_string(n));
    }
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * k_forward);
    for (int i = 0; i < n; ++i) {
        for (int d = 1; d <= k_forward; ++d) {
            edges.push_back(make_edge(i + 1, (i + d) % n + 1));
        }
    }
    return make_graph(n, std::move(edges));
}

Eigen::MatrixXd laplacian(const Graph& g) {
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n_vertices, g.n_vertices);
    for (const Edge& e : g.edges) {
        const int i = e.u - 1;
        const int j = e.v - 1;
        lap(i, j) -= 1.0;
        lap(j, i) -= 1.0;
        lap(i, i) += 1.0;
        lap(j, j) += 1.0;
    }
    return lap;
}

Eigen::VectorXd spectrum(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("spectrum: matrix must be square");
    }
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) {
        std::ostringstream oss;
        oss << "spectrum: matrix is not symmetric (max asymmetry " << asym << ")";
        throw std::invalid_argument(oss.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("spectrum: eigenvalue computation failed");
    }
    return es.eigenvalues();
}

GraphFamily make_family(std::vector<Graph> graphs, double lambda_lo, double lambda_hi) {
    if (graphs.empty()) throw std::invalid_argument("graph family must not be empty");
    const int n = graphs.front().n_vertices;
    for (const Graph& g : graphs) {
        if (g.n_vertices != n) {
            throw std::invalid_argument("all family members must share the vertex count");
        }
    }
    if (!(lambda_lo > 0.0) || !(lambda_lo <= lambda_hi)) {
        throw std::invalid_argument("family bounds require 0 < lambda_lo <= lambda_hi");
    }
    return GraphFamily{std::move(graphs), lambda_lo, lambda_hi};
}

FamilyValidation validate_family(const GraphFamily& f) {
    if (f.graphs.empty()) throw std::invalid_argument("validate_family: empty family");
    constexpr double kSlack = 1e-8;

    FamilyValidation report;
    report.pass = true;
    report.tightest_lo = std::numeric_limits<double>::infinity();
    report.tightest_hi = -std::numeric_limits<double>::infinity();
    int index = 1;
    for (const Graph& g : f.graphs) {
        const Eigen::VectorXd eig = spectrum(laplacian(g));
        GraphSpectrumReport r;
        r.graph_index = index++;
        r.lambda_min = g.n_vertices > 1 ? eig(1) : 0.0;
        r.lambda_max = eig(eig.size() - 1);
        r.within_bounds = r.lambda_min >= f.lambda_lo - kSlack &&
                          r.lambda_max <= f.lambda_hi + kSlack;
        report.pass = report.pass && r.within_bounds;
        report.tightest_lo = std::min(report.tightest_lo, r.lambda_min);
        report.tightest_hi = std::max(report.tightest_hi, r.lambda_max);
        report.per_graph.push_back(r);
    }
    return report;
}

std::string FamilyValidation::summary() const {
    std::ostringstream oss;
    for (const GraphSpectrumReport& r : per_graph) {
        oss << "graph " << r.graph_index << ": nonzero spectrum in [" << r.lambda_min
            << ", " << r.lambda_max << "] " << (r.within_bounds ? "ok" : "OUT OF BOUNDS")
            << "\n";
    }
    oss << "tightest valid bounds: [" << tightest_lo << ", " << tightest_hi << "]\n";
    oss << "family: " << (pass ? "PASS" : "FAIL") << "\n";
    return oss.str();
}

Graph union_edge_set(const GraphFamily& f) {
    if (f.graphs.empty()) throw std::invalid_argument("union_edge_set: empty family");
    std::vector<Edge> all;
    for (const Graph& g : f.graphs) {
        all.insert(all.end(), g.edges.begin(), g.edges.end());
    }
    return make_graph(f.graphs.front().n_vertices, std::move(all));
}

}  // namespace swmas
