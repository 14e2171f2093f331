#pragma once

#include <Eigen/Dense>

#include <ostream>
#include <vector>

#include "efmrf/model.hpp"

namespace efmrf {

// Empirical tail summary for one variable.
struct TailRecord {
    int node = 0;
    double mean_square = 0.0;
    double max_abs = 0.0;
    // Fraction of row blocks whose mean of x² exceeds delta.
    double exceed_fraction = 0.0;
    double delta = 0.0;
    // max |x| ≤ 4·log max{n, p}
    bool bounded_event = false;
};

struct TailCheckOptions {
    // Threshold for the block mean-square; ≤ 0 uses 1.5× the node's overall mean square.
    double delta = 0.0;
    int blocks = 10;
};

std::vector<TailRecord> tail_checks(const SampleMatrix& X, const TailCheckOptions& opts = {});

// True when every node satisfies max |x| ≤ 4·log max{n, p}.
bool bounded_event_holds(const SampleMatrix& X);

// Q* = ∇²ℓ(θ*(s); X) in node-vector layout (entry s is the intercept).
Eigen::MatrixXd fisher_info(const PairwiseModel& model, const SampleMatrix& X, int s);

struct ConditionReport {
    int s = 0;
    int max_degree = 0;
    // Node-vector indices: s (intercept) plus the true neighbours.
    std::vector<int> support;
    double lambda_min_qss = 0.0;
    double lambda_max_empirical = 0.0;
    double qss_condition = 0.0;
    // max over non-neighbours t of Σ_{u∈N(s)} |(Q*_tS (Q*_SS)⁻¹)_u|; the
    // intercept column is left out because it carries no ℓ1 subgradient.
    double incoherence = 0.0;
    double alpha_implied = 1.0;
    bool singular_qss = false;
    TailRecord tail;
};

// Empirical analogues of the dependency and incoherence conditions at the
// true parameters. A singular Q*_SS is reported (singular_qss) with NaN
// incoherence rather than thrown.
ConditionReport check_conditions(const PairwiseModel& model, const SampleMatrix& X, int s, int max_degree);

struct MomentConstants {
    double kappa_m = 0.0;
    double kappa_v = 0.0;
    // max_{|u|≤1} ∂²A/∂θs² at θs* + u, by finite differences of exact_log_partition.
    double kappa_h_joint = 0.0;
    // max over u of ∂²Ā_s/∂η², u on [−1, −0.01] (Ā diverges for η > 0 on
    // unbounded supports).
    double kappa_h_bar = 0.0;
};

// κm and κv from sample moments; the curvature constants only for p ≤ 3
// (NaN otherwise).
MomentConstants estimate_moment_constants(const PairwiseModel& model, const SampleMatrix& X,
                                          int value_cap = kDefaultValueCap);

// CSV with header node,quantity,value.
void write_condition_csv(std::ostream& os, const std::vector<ConditionReport>& reports,
                         const MomentConstants* constants = nullptr);

}  // namespace efmrf
