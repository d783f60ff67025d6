#pragma once

// Test-only oracles, deliberately independent of the library paths they
// check: loss-pattern enumeration is written against raw edge lists, and
// the closed forms come straight from the scalar algebra.

#include "swmas/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace oracles {

// Expected lossy Laplacian and its expected square, by exhaustive
// enumeration of all activation patterns of the graph's edges.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> enumerate_expected_laplacians(
    const swmas::Graph& g, double p) {
    const int n = g.n_vertices;
    const int m = static_cast<int>(g.edges.size());
    Eigen::MatrixXd first = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    for (std::uint64_t bits = 0; bits < (1ull << m); ++bits) {
        Eigen::MatrixXd lossy = Eigen::MatrixXd::Zero(n, n);
        double prob = 1.0;
        for (int e = 0; e < m; ++e) {
            const bool on = bits & (1ull << e);
            prob *= on ? p : 1.0 - p;
            if (on) {
                const int i = g.edges[static_cast<std::size_t>(e)].u - 1;
                const int j = g.edges[static_cast<std::size_t>(e)].v - 1;
                lossy(i, j) -= 1.0;
                lossy(j, i) -= 1.0;
                lossy(i, i) += 1.0;
                lossy(j, j) += 1.0;
            }
        }
        first += prob * lossy;
        second += prob * (lossy.transpose() * lossy);
    }
    return {first, second};
}

// Denominator of the scalar consensus bound at one eigenvalue.
inline double consensus_denominator(double lambda, double p, double kappa) {
    const double a = 1.0 - p * kappa * lambda;
    return 1.0 - a * a - 2.0 * p * (1.0 - p) * lambda * kappa * kappa;
}

// Best certifiable Q for the scalar consensus system over the interval
// endpoints, or nullopt when no certificate exists.
inline std::optional<double> consensus_qstar(double p, double kappa, double lo,
                                             double hi) {
    const double d_lo = consensus_denominator(lo, p, kappa);
    const double d_hi = consensus_denominator(hi, p, kappa);
    if (d_lo <= 0.0 || d_hi <= 0.0) return std::nullopt;
    return std::max(lo * lo / d_lo, hi * hi / d_hi);
}

// Same for the input/output-swapped variant: q* = 1 / min D, and the
// trace bound gamma^2 = hi^2 * q*.
inline std::optional<double> swapped_gamma_sq(double p, double kappa, double lo,
                                              double hi) {
    const double d_lo = consensus_denominator(lo, p, kappa);
    const double d_hi = consensus_denominator(hi, p, kappa);
    if (d_lo <= 0.0 || d_hi <= 0.0) return std::nullopt;
    const double qstar = 1.0 / std::min(d_lo, d_hi);
    return hi * hi * qstar;
}

// Closed-form circulant Laplacian eigenvalue for harmonic m.
inline double circulant_eigenvalue(int n, int k, int m) {
    double value = 2.0 * k;
    for (int l = 1; l <= k; ++l) {
        value -= 2.0 * std::cos(2.0 * M_PI * l * m / n);
    }
    return value;
}

// Exact squared H2 norm of the projected scalar consensus system under a
// constant topology, from the fixed point of the mode-averaged Gramian
// recursion W = E[A^T W A] + C^T C with per-edge Bernoulli loss.
inline double exact_consensus_h2sq_constant(const swmas::Graph& g, double p,
                                            double kappa) {
    const int n = g.n_vertices;
    const Eigen::MatrixXd lap = swmas::laplacian(g);

    // orthonormal basis of the disagreement space via Householder
    Eigen::VectorXd ones = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    Eigen::VectorXd w = ones - Eigen::VectorXd::Unit(n, 0);
    Eigen::MatrixXd reflect =
        Eigen::MatrixXd::Identity(n, n) - (2.0 / w.squaredNorm()) * (w * w.transpose());
    const Eigen::MatrixXd u = reflect.rightCols(n - 1);

    const Eigen::MatrixXd lap_u = u.transpose() * lap * u;
    const int m = n - 1;

    std::vector<Eigen::MatrixXd> edge_laps;
    for (const swmas::Edge& e : g.edges) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        d(e.u - 1) = 1.0;
        d(e.v - 1) = -1.0;
        edge_laps.push_back(u.transpose() * (d * d.transpose()) * u);
    }

    // E[A^T W A] = W - kappa p (Lu W + W Lu)
    //             + kappa^2 (p^2 Lu W Lu + p(1-p) sum_e Le W Le)
    auto expected_map = [&](const Eigen::MatrixXd& mat) {
        Eigen::MatrixXd out = mat - kappa * p * (lap_u * mat + mat * lap_u) +
                              kappa * kappa * p * p * (lap_u * mat * lap_u);
        for (const Eigen::MatrixXd& le : edge_laps) {
            out += kappa * kappa * p * (1.0 - p) * (le * mat * le);
        }
        return out;
    };

    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(m * m, m * m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m, m);
            basis(a, b) = 1.0;
            const Eigen::MatrixXd image = expected_map(basis);
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    system(r * m + c, a * m + b) = image(r, c);
                }
            }
        }
    }

    const Eigen::MatrixXd rhs_mat = lap_u * lap_u;  // projected C^T C
    Eigen::VectorXd rhs(m * m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) rhs(r * m + c) = rhs_mat(r, c);
    }
    const Eigen::VectorXd solution =
        (Eigen::MatrixXd::Identity(m * m, m * m) - system).lu().solve(rhs);
    Eigen::MatrixXd gramian(m, m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) gramian(r, c) = solution(r * m + c);
    }
    // full-input trace: B_hat = U^T, so trace(U W U^T) = trace(W)
    return gramian.trace();
}

// R^2 of a least-squares line through (x, y).
inline double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ss_res += r * r;
    }
    return 1.0 - ss_res / syy;
}

}  // namespace oracles
