#pragma once

#include <cstdint>
#include <vector>

#include "efmrf/families.hpp"
#include "efmrf/model.hpp"
#include "efmrf/rng.hpp"

namespace efmrf {

enum class GibbsInit { Zeros, FamilyMean, Custom };

struct GibbsConfig {
    int burn_in = 500;
    int thin = 10;
    std::uint64_t seed = 0;
    // Substream index; chains with different indices are independent.
    std::uint64_t chain = 0;
    GibbsInit init = GibbsInit::FamilyMean;
    std::vector<double> custom_init;

    void validate(int p) const;
};

inline constexpr double kPoissonMeanCap = 1e6;

// One draw from the node conditional with canonical parameter eta.
double conditional_draw(const FamilySpec& family, double eta, CounterRng& rng);

// Systematic-scan Gibbs sampler: burn_in sweeps, then one row every `thin`
// sweeps. Nodes are updated in order 0..p−1. Deterministic in (model, n, config).
SampleMatrix gibbs_sample(const PairwiseModel& model, int n, const GibbsConfig& config);

// 4-nearest-neighbour grid on p = k² nodes (k ≥ 2), node index = row·k + col,
// no wraparound. Edge weights are 1.
std::vector<Edge> lattice_graph(int p);

// Lattice with θs = theta_s on every node and θst = theta_st on every edge.
PairwiseModel build_lattice_model(int p, const FamilySpec& family, double theta_s, double theta_st,
                                  const DomainConstraint& constraint);

}  // namespace efmrf
