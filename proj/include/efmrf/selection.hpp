#pragma once

#include <cstdint>
#include <vector>

#include "efmrf/estimator.hpp"
#include "efmrf/model.hpp"
#include "efmrf/recovery.hpp"

namespace efmrf {

struct StarsConfig {
    int subsamples = 20;
    // 0 selects floor(10·√n) (or floor(0.8·n) when that is not below n).
    int subsample_size = 0;
    double beta = 0.05;
    int grid_count = 20;
    double grid_ratio = 0.05;
    // Explicit decreasing grid; overrides grid_count/grid_ratio when non-empty.
    std::vector<double> grid;
    std::uint64_t seed = 0;
    StitchRule rule = StitchRule::Or;
    int jobs = 1;
    SolverOptions solver;

    int resolved_subsample_size(int n) const;
};

struct StarsResult {
    std::vector<double> lambdas;
    // Total instability D(λ) and its running maximum from the λ_max side.
    std::vector<double> instability;
    std::vector<double> monotone;
    int index = 0;
    double lambda_star = 0.0;
    // false when no grid point met the threshold (the most regularized λ is
    // returned instead).
    bool stable = true;
    std::vector<std::vector<int>> subsample_rows;
    // Graph fitted on the full data at lambda_star.
    EdgeSet graph;
    std::vector<NeighborhoodFit> fits;
};

// 2·f·(1 − f) for an edge selected in a fraction f of subsamples.
double edge_instability(double frequency);

// StARS over the stitched graph: B subsamples without replacement, per-edge
// instability averaged over all p(p−1)/2 pairs, monotonized, and λ* the least
// regularized grid value whose monotonized instability stays ≤ beta.
StarsResult stars_select(const SampleMatrix& X, const DomainConstraint& constraint, const StarsConfig& config);

}  // namespace efmrf
