#include "swmas/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

namespace swmas {

Eigen::MatrixXd AffineMatrixOperator::evaluate(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd value = constant;
    for (const auto& [index, coeff] : coeffs) {
        value.noalias() += x(index) * coeff;
    }
    return value;
}

const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::infeasible: return "infeasible";
        case SdpStatus::max_iterations: return "max_iterations";
        case SdpStatus::numerical_error: return "numerical_error";
    }
    return "unknown";
}

int SdpProblem::add_variable(int dim) {
    if (dim <= 0) throw std::invalid_argument("variable dimension must be positive");
    dims_.push_back(dim);
    offsets_.push_back(total_);
    total_ += dim * (dim + 1) / 2;
    return static_cast<int>(dims_.size()) - 1;
}

int SdpProblem::basis_index(int var, int r, int c) const {
    const int dim = dim_of(var);
    if (r > c) std::swap(r, c);
    if (r < 0 || c >= dim) throw std::out_of_range("basis_index: entry out of range");
    // upper triangle walked row by row: (0,0), (0,1), ..., (1,1), ...
    const int within = r * dim - r * (r - 1) / 2 + (c - r);
    return offsets_[static_cast<std::size_t>(var)] + within;
}

Eigen::MatrixXd SdpProblem::basis_matrix(int var, int r, int c) const {
    const int dim = dim_of(var);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
    e(r, c) = 1.0;
    e(c, r) = 1.0;  // idempotent on the diagonal
    return e;
}

Eigen::MatrixXd SdpProblem::extract(int var, const Eigen::VectorXd& x) const {
    const int dim = dim_of(var);
    Eigen::MatrixXd value(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = r; c < dim; ++c) {
            const double v = x(basis_index(var, r, c));
            value(r, c) = v;
            value(c, r) = v;
        }
    }
    return value;
}

void SdpProblem::add_constraint(AffineMatrixOperator op) {
    if (op.constant.rows() != op.constant.cols()) {
        throw std::invalid_argument("constraint constant must be square");
    }
    for (const auto& [index, coeff] : op.coeffs) {
        if (index < 0 || index >= total_) {
            throw std::invalid_argument("constraint references an undeclared coordinate");
        }
        if (coeff.rows() != op.constant.rows() || coeff.cols() != op.constant.cols()) {
            throw std::invalid_argument("constraint coefficient dimension mismatch");
        }
    }
    constraints_.push_back(std::move(op));
}

void SdpProblem::add_trace_objective(int var, double weight) {
    if (objective_.size() != total_) {
        Eigen::VectorXd padded = Eigen::VectorXd::Zero(total_);
        padded.head(objective_.size()) = objective_;
        objective_ = std::move(padded);
    }
    const int dim = dim_of(var);
    for (int r = 0; r < dim; ++r) {
        objective_(basis_index(var, r, r)) += weight;
    }
}

void SdpProblem::set_objective(Eigen::VectorXd c) {
    if (c.size() != total_) throw std::invalid_argument("objective length mismatch");
    objective_ = std::move(c);
}

namespace {

struct ShiftedConstraint {
    Eigen::MatrixXd constant;  // original constant + eps I
    const std::vector<std::pair<int, Eigen::MatrixXd>>* coeffs = nullptr;
    int extra_index = -1;      // phase-I slack coordinate, -1 if absent
};

// Barrier state for one constraint: slack S = -F(x) and its inverse.
struct BarrierTerm {
    Eigen::MatrixXd slack_inv;
    double log_det = 0.0;
};

class BarrierProblem {
  public:
    BarrierProblem(std::vector<ShiftedConstraint> constraints, Eigen::VectorXd objective,
                   int n)
        : constraints_(std::move(constraints)), objective_(std::move(objective)), n_(n) {
        nu_ = 0;
        for (const auto& c : constraints_) nu_ += static_cast<int>(c.constant.rows());
    }

    /// Restrict iterates to |x| < radius. Phase I needs this: its merit
    /// function is unbounded below along coordinates that only inflate
    /// their own slacks, so without a bounded domain no center exists.
    void set_ball(double radius) {
        ball_radius_sq_ = radius * radius;
        nu_ += 2;
    }

    int dimension() const { return n_; }
    int barrier_parameter() const { return nu_; }
    const Eigen::VectorXd& objective() const { return objective_; }

    Eigen::MatrixXd evaluate(const ShiftedConstraint& c, const Eigen::VectorXd& x) const {
        Eigen::MatrixXd value = c.constant;
        if (c.coeffs) {
            for (const auto& [index, coeff] : *c.coeffs) {
                value.noalias() += x(index) * coeff;
            }
        }
        if (c.extra_index >= 0) {
            value.diagonal().array() -= x(c.extra_index);
        }
        return value;
    }

    /// Strict feasibility of x; fills per-constraint inverse slacks.
    bool factorize(const Eigen::VectorXd& x, std::vector<BarrierTerm>& terms) const {
        if (ball_radius_sq_ > 0.0 && x.squaredNorm() >= ball_radius_sq_) return false;
        terms.resize(constraints_.size());
        for (std::size_t l = 0; l < constraints_.size(); ++l) {
            const Eigen::MatrixXd slack = -evaluate(constraints_[l], x);
            Eigen::LLT<Eigen::MatrixXd> llt(slack);
            if (llt.info() != Eigen::Success) return false;
            const Eigen::MatrixXd& chol = llt.matrixL();
            double log_det = 0.0;
            for (Eigen::Index i = 0; i < chol.rows(); ++i) {
                const double d = chol(i, i);
                if (!(d > 0.0) || !std::isfinite(d)) return false;
                log_det += std::log(d);
            }
            terms[l].log_det = 2.0 * log_det;
            terms[l].slack_inv =
                llt.solve(Eigen::MatrixXd::Identity(slack.rows(), slack.cols()));
        }
        return true;
    }

    double merit(double mu, const Eigen::VectorXd& x,
                 const std::vector<BarrierTerm>& terms) const {
        double value = objective_.dot(x);
        for (const auto& t : terms) value -= mu * t.log_det;
        if (ball_radius_sq_ > 0.0) {
            value -= mu * std::log(ball_radius_sq_ - x.squaredNorm());
        }
        return value;
    }

    /// Gradient and Hessian of objective + mu * barrier at a feasible x.
    void derivatives(double mu, const Eigen::VectorXd& x,
                     const std::vector<BarrierTerm>& terms, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const {
        grad = objective_;
        hess.setZero(n_, n_);
        if (ball_radius_sq_ > 0.0) {
            const double slack = ball_radius_sq_ - x.squaredNorm();
            grad.noalias() += (2.0 * mu / slack) * x;
            hess.noalias() += (4.0 * mu / (slack * slack)) * (x * x.transpose());
            hess.diagonal().array() += 2.0 * mu / slack;
        }
        std::vector<std::pair<int, Eigen::MatrixXd>> scratch;
        for (std::size_t l = 0; l < constraints_.size(); ++l) {
            const ShiftedConstraint& c = constraints_[l];
            const Eigen::MatrixXd& s_inv = terms[l].slack_inv;

            scratch.clear();
            if (c.coeffs) {
                for (const auto& [index, coeff] : *c.coeffs) {
                    scratch.emplace_back(index, s_inv * coeff);
                }
            }
            if (c.extra_index >= 0) {
                scratch.emplace_back(c.extra_index, -s_inv);
            }
            for (const auto& [index, t] : scratch) {
                grad(index) += mu * t.trace();
            }
            for (std::size_t a = 0; a < scratch.size(); ++a) {
                for (std::size_t b = a; b < scratch.size(); ++b) {
                    const double h =
                        mu * (scratch[a].second.cwiseProduct(scratch[b].second.transpose()))
                                 .sum();
                    hess(scratch[a].first, scratch[b].first) += h;
                    if (scratch[a].first != scratch[b].first) {
                        hess(scratch[b].first, scratch[a].first) += h;
                    }
                }
            }
        }
    }

    const std::vector<ShiftedConstraint>& constraints() const { return constraints_; }

  private:
    std::vector<ShiftedConstraint> constraints_;
    Eigen::VectorXd objective_;
    int n_;
    int nu_;
    double ball_radius_sq_ = 0.0;
};

enum class CenterResult { converged, out_of_budget, numerical_trouble, early_stop };

struct DebugTrace {
    std::ofstream out;
    int iteration = 0;

    bool enabled() const { return out.is_open(); }

    void log(double mu, double objective, double max_eig) {
        if (out.is_open()) {
            out << iteration << "," << mu << "," << objective << "," << max_eig << "\n";
        }
        ++iteration;
    }
};

// Most-positive eigenvalue of the shifted constraints, recovered from the
// inverse slacks (max eig F' = -1 / max eig S^-1).
double shifted_max_eig(const std::vector<BarrierTerm>& terms) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) {
        worst = std::max(worst, -1.0 / max_eigenvalue(t.slack_inv));
    }
    return worst;
}

using EarlyStop = std::function<bool(const Eigen::VectorXd&)>;

/// Damped Newton centering for fixed mu. x must be strictly feasible on
/// entry and stays so on exit. The early-stop predicate, when given, is
/// checked after every accepted step; phase I uses it to bail out as soon
/// as a strictly feasible point exists, since its merit function is
/// unbounded below on feasible problems with inflatable slacks.
CenterResult center(const BarrierProblem& bp, double mu, Eigen::VectorXd& x,
                    int& steps_left, int inner_budget, DebugTrace* trace,
                    const EarlyStop& early_stop = {}) {
    constexpr double kDecrementTol = 1e-10;
    constexpr double kArmijoSlope = 1e-4;

    std::vector<BarrierTerm> terms;
    if (!bp.factorize(x, terms)) return CenterResult::numerical_trouble;
    if (early_stop && early_stop(x)) return CenterResult::early_stop;

    while (steps_left > 0 && inner_budget > 0) {
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        bp.derivatives(mu, x, terms, grad, hess);
        if (!grad.allFinite() || !hess.allFinite()) return CenterResult::numerical_trouble;

        // The barrier Hessian is positive semidefinite but can be singular
        // along directions that leave every slack unchanged. Prefer the
        // plain Newton system; regularize only when the solve produces an
        // invalid direction, since a blanket ridge swamps the tiny
        // curvature of far-from-binding slacks.
        Eigen::VectorXd step;
        double decrement_sq = 0.0;
        double ridge = 0.0;
        bool have_step = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd h = hess;
            if (ridge > 0.0) h.diagonal().array() += ridge;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
            step = -ldlt.solve(grad);
            decrement_sq = -grad.dot(step);
            if (ldlt.info() == Eigen::Success && step.allFinite() && decrement_sq >= 0.0) {
                have_step = true;
                break;
            }
            ridge = ridge == 0.0 ? 1e-12 * (1.0 + std::abs(hess.trace())) : ridge * 100.0;
        }
        if (!have_step) return CenterResult::numerical_trouble;

        if (!(decrement_sq > 2.0 * kDecrementTol)) return CenterResult::converged;

        // Cap the step length; near-null directions produce astronomically
        // long Newton steps whose scale the line search cannot bridge.
        const double max_step = 1e4 * (1.0 + x.norm());
        double alpha = std::min(1.0, max_step / step.norm());

        const double merit_now = bp.merit(mu, x, terms);
        bool moved = false;
        std::vector<BarrierTerm> trial_terms;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            const Eigen::VectorXd trial = x + alpha * step;
            if (bp.factorize(trial, trial_terms)) {
                const double merit_trial = bp.merit(mu, trial, trial_terms);
                if (std::isfinite(merit_trial) &&
                    merit_trial <= merit_now - kArmijoSlope * alpha * decrement_sq) {
                    x = trial;
                    terms.swap(trial_terms);
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        --steps_left;
        --inner_budget;
        if (trace && trace->enabled()) {
            trace->log(mu, bp.objective().dot(x), shifted_max_eig(terms));
        }
        if (!moved) {
            // Step rejected at tiny alpha: accept the current center if the
            // decrement is already small, otherwise give up on this mu.
            return decrement_sq < 1e-6 ? CenterResult::converged
                                       : CenterResult::numerical_trouble;
        }
        if (early_stop && early_stop(x)) return CenterResult::early_stop;
    }
    return CenterResult::out_of_budget;
}

double max_constraint_eigenvalue(const std::vector<AffineMatrixOperator>& constraints,
                                 const Eigen::VectorXd& x) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : constraints) {
        worst = std::max(worst, max_eigenvalue(c.evaluate(x)));
    }
    return worst;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts) {
    const int n = problem.n_scalars();
    SdpSolution solution;
    solution.x = Eigen::VectorXd::Zero(n);

    if (problem.constraints().empty()) {
        throw std::invalid_argument("solve: problem has no constraints");
    }

    Eigen::VectorXd objective = problem.objective();
    if (objective.size() != n) objective = Eigen::VectorXd::Zero(n);

    // "< 0" is run as "<= -eps I"; the shifts are recorded in the solution.
    std::vector<ShiftedConstraint> shifted;
    shifted.reserve(problem.constraints().size());
    for (const auto& c : problem.constraints()) {
        const double eps = opts.strictness_scale * (1.0 + c.constant.norm());
        solution.epsilons.push_back(eps);
        ShiftedConstraint sc;
        sc.constant = c.constant;
        sc.constant.diagonal().array() += eps;
        sc.coeffs = &c.coeffs;
        shifted.push_back(std::move(sc));
    }

    DebugTrace trace;
    if (opts.debug_csv_path) {
        trace.out.open(*opts.debug_csv_path);
        trace.out << "iteration,mu,objective,max_constraint_eig\n";
    }

    int steps_left = opts.max_newton_steps;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

    // ---- Phase I: minimize t subject to F_l(x) - t I <= 0 ----
    {
        std::vector<ShiftedConstraint> phase1 = shifted;
        const int t_index = n;
        for (auto& c : phase1) c.extra_index = t_index;

        double worst0 = -std::numeric_limits<double>::infinity();
        for (const auto& c : shifted) {
            worst0 = std::max(worst0, max_eigenvalue(c.constant));
        }

        // Strict feasibility with this much depth ends phase I; the merit
        // function has no minimum on feasible problems whose slacks can
        // inflate, so phase I must not chase the central path to the end.
        const double exit_depth = 1e-8 * (1.0 + std::abs(worst0));
        const auto feasible_depth = [&](const Eigen::VectorXd& x1) {
            double depth = -std::numeric_limits<double>::infinity();
            for (const auto& c : shifted) {
                Eigen::MatrixXd value = c.constant;
                for (const auto& [index, coeff] : *c.coeffs) {
                    value.noalias() += x1(index) * coeff;
                }
                depth = std::max(depth, max_eigenvalue(value));
            }
            return depth;
        };
        const auto strictly_feasible = [&](const Eigen::VectorXd& x1) {
            return feasible_depth(x1) < -exit_depth;
        };

        Eigen::VectorXd objective1 = Eigen::VectorXd::Zero(n + 1);
        objective1(t_index) = 1.0;
        BarrierProblem bp(std::move(phase1), std::move(objective1), n + 1);
        bp.set_ball(opts.phase1_radius);
        const double nu = bp.barrier_parameter();

        Eigen::VectorXd x1 = Eigen::VectorXd::Zero(n + 1);
        x1(t_index) = worst0 + 1.0 + 0.1 * std::abs(worst0);

        double mu = opts.mu_initial;
        bool feasible = false;
        bool decided = false;
        while (steps_left > 0) {
            const CenterResult res =
                center(bp, mu, x1, steps_left, /*inner_budget=*/60, &trace,
                       strictly_feasible);
            const double t = x1(t_index);
            if (res == CenterResult::early_stop) {
                feasible = true;
                decided = true;
                break;
            }
            if (res == CenterResult::numerical_trouble) {
                // Barrier endgame: slacks at machine scale. Decide from the
                // actual constraint values if the path made real progress.
                if (mu < 1e-3) {
                    feasible = feasible_depth(x1) < 0.0;
                    decided = true;
                    break;
                }
                solution.status = SdpStatus::numerical_error;
                solution.x = x1.head(n);
                solution.margin = max_constraint_eigenvalue(problem.constraints(), solution.x);
                solution.newton_steps = opts.max_newton_steps - steps_left;
                return solution;
            }
            if (res == CenterResult::out_of_budget) {
                continue;  // keep centering at this mu
            }
            // res == converged: the iterate is near-central, so duality
            // arguments and depth checks are both meaningful.
            const double depth = feasible_depth(x1);
            if (depth < -exit_depth) {
                feasible = true;
                decided = true;
                break;
            }
            if (depth < 0.0 && nu * mu < 1e-6) {
                feasible = true;  // thin but strictly feasible interior point
                decided = true;
                break;
            }
            // Near-centered duality bound: t* >= t - nu * mu, taken with a
            // factor-2 safety slack against imperfect centering.
            if (t - 2.0 * nu * mu >= -opts.feasibility_margin) {
                feasible = false;
                decided = true;
                break;
            }
            if (nu * mu < 1e-9) {
                feasible = depth < 0.0;
                decided = true;
                break;
            }
            mu *= opts.mu_factor;
        }

        if (!decided) {
            solution.status = SdpStatus::max_iterations;
            solution.x = x1.head(n);
            solution.margin = max_constraint_eigenvalue(problem.constraints(), solution.x);
            solution.newton_steps = opts.max_newton_steps - steps_left;
            return solution;
        }
        if (!feasible) {
            solution.status = SdpStatus::infeasible;
            solution.x = x1.head(n);
            solution.objective_value = objective.dot(solution.x);
            solution.margin = max_constraint_eigenvalue(problem.constraints(), solution.x);
            solution.newton_steps = opts.max_newton_steps - steps_left;
            return solution;
        }
        x = x1.head(n);
    }

    // ---- Phase II: minimize the objective along the central path ----
    {
        BarrierProblem bp(shifted, objective, n);
        const double nu = bp.barrier_parameter();
        double mu = opts.mu_initial;
        while (true) {
            const CenterResult res =
                center(bp, mu, x, steps_left, opts.max_newton_steps, &trace);
            if (res == CenterResult::numerical_trouble) {
                solution.status = SdpStatus::numerical_error;
                break;
            }
            if (res == CenterResult::out_of_budget) {
                solution.status = SdpStatus::max_iterations;
                break;
            }
            const double obj = objective.dot(x);
            if (nu * mu < opts.gap_tol * (1.0 + std::abs(obj))) {
                solution.status = SdpStatus::optimal;
                break;
            }
            mu *= opts.mu_factor;
        }
    }

    solution.x = x;
    solution.objective_value = objective.dot(x);
    solution.margin = max_constraint_eigenvalue(problem.constraints(), x);
    solution.newton_steps = opts.max_newton_steps - steps_left;
    if (solution.status == SdpStatus::optimal &&
        (!std::isfinite(solution.objective_value) || solution.margin >= 0.0)) {
        solution.status = SdpStatus::numerical_error;
    }
    return solution;
}

SymEig eig_sym(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eig_sym: matrix must be square");
    if (m.size() > 0) {
        const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-10) {
            throw std::invalid_argument("eig_sym: matrix is not symmetric");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("eig_sym: eigensolver did not converge");
    }
    return SymEig{es.eigenvalues(), es.eigenvectors()};
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace swmas
