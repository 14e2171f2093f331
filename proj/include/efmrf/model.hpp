#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "efmrf/families.hpp"

namespace efmrf {

// Pairwise exponential-family MRF
//   P(x) ∝ exp{ Σ_s B(x_s)·θs + Σ_{s<t} θst·B(x_s)·x_t + Σ_s C(x_s) }
// whose node conditionals are the univariate family with
//   η_s = θs + Σ_t θst·x_t.
// Immutable after construction; construction enforces check_domain.
class PairwiseModel {
public:
    PairwiseModel(FamilySpec family, std::vector<double> node_params, std::vector<Edge> edges,
                  DomainConstraint constraint);

    // Uses DomainConstraint::for_family(family).
    PairwiseModel(FamilySpec family, std::vector<double> node_params, std::vector<Edge> edges);

    int p() const { return static_cast<int>(node_params_.size()); }
    const FamilySpec& family() const { return family_; }
    const DomainConstraint& constraint() const { return constraint_; }
    std::span<const double> node_params() const { return node_params_; }

    // Sorted by (s, t) with s < t; zero weights are dropped on construction.
    std::span<const Edge> edges() const { return edges_; }

    // θst for either orientation; 0 when absent or s == t.
    double edge_weight(int s, int t) const;

    // (neighbour, θst) pairs for node s, sorted by neighbour.
    std::span<const std::pair<int, double>> neighbors(int s) const { return adjacency_[s]; }

    // p×p symmetric edge matrix with zero diagonal.
    Eigen::MatrixXd dense_edges() const;

    // η = θs + Σ_{t∈N(s)} θst·x_t.
    double canonical_param(int s, std::span<const double> x) const;

    // Unnormalized joint log density (log of the integrand of A(θ)).
    double joint_log_weight(std::span<const double> x) const;

private:
    FamilySpec family_;
    DomainConstraint constraint_;
    std::vector<double> node_params_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

// n×p observations, every value inside the family support.
class SampleMatrix {
public:
    SampleMatrix(FamilySpec family, Eigen::MatrixXd values, std::uint64_t seed = 0);

    int n() const { return static_cast<int>(values_.rows()); }
    int p() const { return static_cast<int>(values_.cols()); }
    const FamilySpec& family() const { return family_; }
    const Eigen::MatrixXd& values() const { return values_; }
    double operator()(int i, int s) const { return values_(i, s); }
    std::uint64_t seed() const { return seed_; }

    SampleMatrix select_rows(std::span<const int> rows) const;

private:
    FamilySpec family_;
    Eigen::MatrixXd values_;
    std::uint64_t seed_;
};

struct LogPartition {
    double value;
    // Upper bound on the relative mass missing from the truncated sum or
    // bounded quadrature box; NaN where no bound is available (Gaussian).
    double tail_bound;
};

inline constexpr int kDefaultValueCap = 50;

// A(θ) by enumeration (Ising p ≤ 12; Poisson p ≤ 4 with (cap+1)^p ≤ 2^24)
// or composite Simpson quadrature (Gaussian on [−40σ, 40σ]^p, Exponential on
// [0, 40]^p, p ≤ 3). Throws TooLargeError / NotNormalizableError.
LogPartition exact_log_partition(const PairwiseModel& model, int value_cap = kDefaultValueCap);

// log ∫ exp{η·x_s² + (joint log density)} ν(dx), same limits as above.
// Throws NotNormalizableError when the integral diverges (η > 0 on an
// unbounded support; η ≥ 1/(2σ²) for Gaussian).
LogPartition exact_log_partition_tilted(const PairwiseModel& model, int s, double eta_sq,
                                        int value_cap = kDefaultValueCap);

// Exhaustive joint pmf for discrete families. Index is mixed radix with node 0
// least significant; radix is 2 (Ising) or cap+1 (Poisson).
struct JointPmf {
    int p = 0;
    int radix = 0;
    std::vector<double> prob;
    double log_partition = 0.0;
    double tail_bound = 0.0;

    std::size_t index(std::span<const int> state) const;
    std::vector<int> state(std::size_t index) const;
    // Marginal pmf of node s over 0..radix-1.
    std::vector<double> marginal(int s) const;
};

JointPmf exact_joint_pmf(const PairwiseModel& model, int value_cap = kDefaultValueCap);

// Node-conditional loss ℓ(θ(s); X) = (1/n) Σ_i [ −B(x_is)·η_i + D(η_i) ].
//
// θ(s) is a length-p vector: entry s is the intercept θs, entry t ≠ s is θst,
// so η_i = θ[s] + Σ_{t≠s} θ[t]·x_it. Gradients and Hessians use the same
// layout (the design row for sample i is x_i with x_is replaced by 1).
double node_nll(const SampleMatrix& X, int s, const Eigen::VectorXd& theta);
Eigen::VectorXd node_nll_gradient(const SampleMatrix& X, int s, const Eigen::VectorXd& theta);
Eigen::MatrixXd node_nll_hessian(const SampleMatrix& X, int s, const Eigen::VectorXd& theta);

// θ(s) of the true model for node s in the layout above.
Eigen::VectorXd node_vector(const PairwiseModel& model, int s);

}  // namespace efmrf
