#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "efmrf/families.hpp"
#include "efmrf/model.hpp"

namespace efmrf {

struct SolverOptions {
    int max_iters = 5000;
    // Convergence threshold on kkt_gap.
    double tol = 1e-7;
    double backtrack = 0.5;
    double initial_step = 1.0;
    // Starting point in node-vector layout (see node_nll).
    std::optional<Eigen::VectorXd> warm_start;
    // Keep the per-iteration objective values in NeighborhoodFit::objective_trace.
    bool record_objective = false;

    void validate() const;
};

// Solution of min ℓ(θ(s); X) + λ Σ_{t≠s} |θst| subject to the domain constraint.
struct NeighborhoodFit {
    int s = 0;
    int p = 0;
    double intercept = 0.0;
    // Nonzero edge weights only, sorted by neighbour.
    std::vector<std::pair<int, double>> edge_weights;
    double lambda = 0.0;
    double objective = 0.0;
    double kkt_gap = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;

    double weight(int t) const;
    // Node-vector layout: entry s is the intercept.
    Eigen::VectorXd theta() const;
};

double soft_threshold(double z, double tau);

// Largest violation of the first-order optimality conditions of the
// constrained ℓ1 problem at theta, given the smooth-loss gradient.
double kkt_gap(const Eigen::VectorXd& gradient, const Eigen::VectorXd& theta, int s, double lambda,
               const DomainConstraint& constraint);

// Proximal gradient with backtracking. Returns converged=false (best iterate)
// when max_iters is reached; throws DomainError when no feasible step exists.
NeighborhoodFit fit_neighborhood(const SampleMatrix& X, int s, double lambda, const DomainConstraint& constraint,
                                 const SolverOptions& opts = {});

// Minimizer of ℓ over the intercept alone (all edges zero), within node bounds.
double intercept_only_optimum(const SampleMatrix& X, int s, const DomainConstraint& constraint);

// Smallest λ whose solution has no edges (one-sided for sign-constrained families).
double null_lambda(const SampleMatrix& X, int s, const DomainConstraint& constraint);

// [λ_max, ..., ratio·λ_max], geometric, count ≥ 2, 0 < ratio < 1.
std::vector<double> lambda_grid(const SampleMatrix& X, int s, const DomainConstraint& constraint, int count,
                                double ratio);

// Same grid anchored at the largest null_lambda over all nodes.
std::vector<double> graph_lambda_grid(const SampleMatrix& X, const DomainConstraint& constraint, int count,
                                      double ratio);

struct TheoryLambda {
    // c·√κ1·√(log p / n)
    double lambda;
    // (2−α)/α·√κ1·√(log p / n): the sparsistency lower bound with unit constant.
    double incoherence_scaled;
    // Poisson κ2 = 1/(4 log max{n, p}), the choice behind the upper bound.
    double poisson_kappa2;
};

TheoryLambda theory_lambda(int n, int p, double kappa1, double alpha_hint, double c);

// Fits every node at one λ, `jobs` nodes at a time.
std::vector<NeighborhoodFit> fit_all_nodes(const SampleMatrix& X, double lambda, const DomainConstraint& constraint,
                                           const SolverOptions& opts = {}, int jobs = 1);

// Fits every node along a decreasing λ path with warm starts; result[k] holds
// the fits at path[k].
std::vector<std::vector<NeighborhoodFit>> fit_path(const SampleMatrix& X, const std::vector<double>& path,
                                                   const DomainConstraint& constraint, const SolverOptions& opts = {},
                                                   bool warm_starts = true);

}  // namespace efmrf
