#pragma once

// Undirected graphs, Laplacians and admissible topology families.
//
// Vertices are labelled 1..n to match the on-disk family format; matrix
// row/column i corresponds to vertex i+1.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace swmas {

/// Undirected edge with normalized endpoints (u < v), 1-based labels.
struct Edge {
    int u = 0;
    int v = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Canonicalize an endpoint pair into an Edge. Throws on self-loops.
Edge make_edge(int a, int b);

struct Graph {
    int n_vertices = 0;
    std::vector<Edge> edges;  // sorted, duplicate-free, endpoints in [1, n]
};

/// Validating constructor; normalizes, sorts and deduplicates the edge list.
Graph make_graph(int n_vertices, std::vector<Edge> edges);

bool has_edge(const Graph& g, const Edge& e);

/// Cyclic graph on n vertices where every vertex connects to its
/// k_forward nearest neighbours in each direction. Requires
/// 1 <= k_forward <= (n-1)/2; the result is regular of degree 2*k_forward.
Graph circulant_graph(int n, int k_forward);

/// Graph Laplacian: off-diagonal (i,j) is -1 iff {i,j} is an edge,
/// diagonal entries make every row sum to zero.
Eigen::MatrixXd laplacian(const Graph& g);

/// Eigenvalues of a symmetric matrix, ascending. Rejects inputs whose
/// asymmetry exceeds 1e-10 entrywise.
Eigen::VectorXd spectrum(const Eigen::MatrixXd& m);

/// A finite family of admissible topologies with claimed bounds
/// [lambda_lo, lambda_hi] on all nonzero Laplacian eigenvalues.
struct GraphFamily {
    std::vector<Graph> graphs;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
};

GraphFamily make_family(std::vector<Graph> graphs, double lambda_lo, double lambda_hi);

struct GraphSpectrumReport {
    int graph_index = 0;          // 1-based, matching file order
    double lambda_min = 0.0;      // smallest nonzero eigenvalue (lambda_2)
    double lambda_max = 0.0;      // largest eigenvalue (lambda_N)
    bool within_bounds = false;
};

struct FamilyValidation {
    std::vector<GraphSpectrumReport> per_graph;
    bool pass = false;
    // Tightest bounds that would make the family admissible.
    double tightest_lo = 0.0;
    double tightest_hi = 0.0;

    std::string summary() const;
};

/// Checks every member graph's nonzero spectrum against the family bounds
/// (1e-8 absolute slack). Throws on an empty family.
FamilyValidation validate_family(const GraphFamily& f);

/// Union of all member edge sets on the shared vertex set.
Graph union_edge_set(const GraphFamily& f);

}  // namespace swmas
