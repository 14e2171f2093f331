#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "efmrf/estimator.hpp"
#include "efmrf/families.hpp"

namespace efmrf {

// Sorted (s < t) edge list. Weights carry the estimate where one exists.
using EdgeSet = std::vector<Edge>;

enum class StitchRule { Or, And };

StitchRule parse_rule(std::string_view name);
std::string_view to_string(StitchRule rule);

// Neighbourhood union (OR) or intersection (AND) of per-node supports.
// Stitched weights average the nonzero per-node estimates.
// Throws MissingFitError unless fits cover nodes 0..p−1 exactly once.
EdgeSet stitch(std::span<const NeighborhoodFit> fits, int p, StitchRule rule = StitchRule::Or);

struct RecoveryReport {
    EdgeSet estimated_edges;
    StitchRule rule = StitchRule::Or;
    bool exact_recovery = false;
    int true_positives = 0;
    int false_positives = 0;
    int false_negatives = 0;
    int hamming = 0;
    // Estimated neighbourhood N̂(s) per node; empty when built from score().
    std::vector<std::vector<int>> per_node_neighborhoods;
};

// Compares supports only; weights are ignored.
RecoveryReport score(const EdgeSet& estimated, const EdgeSet& truth, int p);

// stitch + score, with per-node neighbourhoods filled in.
RecoveryReport recover(std::span<const NeighborhoodFit> fits, int p, StitchRule rule, const EdgeSet& truth);

}  // namespace efmrf
