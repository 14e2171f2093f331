#include "efmrf/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "efmrf/errors.hpp"
#include "efmrf/parallel.hpp"
#include "efmrf/rng.hpp"

namespace efmrf {

namespace {

// Partial Fisher–Yates draw of b distinct rows out of n, returned sorted.
std::vector<int> draw_subsample(int n, int b, std::uint64_t seed, std::uint64_t index) {
    CounterRng rng(seed, hash_words({0x5354415253ULL, index}));
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    for (int k = 0; k < b; ++k) {
        const auto span = static_cast<std::uint64_t>(n - k);
        const int j = k + static_cast<int>(rng() % span);
        std::swap(rows[k], rows[j]);
    }
    rows.resize(b);
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

int StarsConfig::resolved_subsample_size(int n) const {
    if (subsample_size > 0) return subsample_size;
    const int b = static_cast<int>(std::floor(10.0 * std::sqrt(static_cast<double>(n))));
    return b < n ? b : std::max(1, static_cast<int>(std::floor(0.8 * n)));
}

double edge_instability(double frequency) { return 2.0 * frequency * (1.0 - frequency); }

StarsResult stars_select(const SampleMatrix& X, const DomainConstraint& constraint, const StarsConfig& config) {
    const int n = X.n();
    const int p = X.p();
    if (n < 20) throw ConfigError("stability selection needs at least 20 samples");
    if (config.subsamples < 1) throw ConfigError("need at least one subsample");
    if (!(config.beta > 0.0 && config.beta < 0.5)) throw ConfigError("stars beta must be in (0, 0.5)");
    const int b = config.resolved_subsample_size(n);
    if (b < 1 || b > n) throw ConfigError("subsample size must be in [1, n]");

    StarsResult out;
    out.lambdas = config.grid.empty() ? graph_lambda_grid(X, constraint, config.grid_count, config.grid_ratio)
                                      : config.grid;
    for (std::size_t k = 1; k < out.lambdas.size(); ++k) {
        if (!(out.lambdas[k] < out.lambdas[k - 1])) throw ConfigError("stars lambda grid must be strictly decreasing");
    }
    if (out.lambdas.empty() || !(out.lambdas.back() > 0.0)) throw ConfigError("stars lambda grid must be positive");
    const std::size_t grid_size = out.lambdas.size();

    out.subsample_rows.resize(config.subsamples);
    for (int j = 0; j < config.subsamples; ++j) out.subsample_rows[j] = draw_subsample(n, b, config.seed, j);

    // selected[j][k] is the stitched edge set of subsample j at λ_k.
    std::vector<std::vector<EdgeSet>> selected(config.subsamples);
    parallel_for(static_cast<std::size_t>(config.subsamples), config.jobs, [&](std::size_t j) {
        const SampleMatrix sub = X.select_rows(out.subsample_rows[j]);
        const auto path = fit_path(sub, out.lambdas, constraint, config.solver, true);
        selected[j].resize(grid_size);
        for (std::size_t k = 0; k < grid_size; ++k) selected[j][k] = stitch(path[k], p, config.rule);
    });

    const double pairs = p * (p - 1) / 2.0;
    out.instability.assign(grid_size, 0.0);
    out.monotone.assign(grid_size, 0.0);
    std::vector<int> counts(static_cast<std::size_t>(p) * p);
    for (std::size_t k = 0; k < grid_size; ++k) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int j = 0; j < config.subsamples; ++j) {
            for (const Edge& e : selected[j][k]) ++counts[static_cast<std::size_t>(e.s) * p + e.t];
        }
        double total = 0.0;
        for (int s = 0; s < p; ++s) {
            for (int t = s + 1; t < p; ++t) {
                const double f = static_cast<double>(counts[static_cast<std::size_t>(s) * p + t]) / config.subsamples;
                total += edge_instability(f);
            }
        }
        out.instability[k] = pairs > 0.0 ? total / pairs : 0.0;
        out.monotone[k] = k == 0 ? out.instability[k] : std::max(out.monotone[k - 1], out.instability[k]);
    }

    int chosen = -1;
    for (std::size_t k = 0; k < grid_size; ++k) {
        if (out.monotone[k] <= config.beta) chosen = static_cast<int>(k);
    }
    out.stable = chosen >= 0;
    out.index = std::max(chosen, 0);
    out.lambda_star = out.lambdas[out.index];
    out.fits = fit_all_nodes(X, out.lambda_star, constraint, config.solver, config.jobs);
    out.graph = stitch(out.fits, p, config.rule);
    return out;
}

}  // namespace efmrf
