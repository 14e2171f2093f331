#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "efmrf/config.hpp"
#include "efmrf/estimator.hpp"
#include "efmrf/families.hpp"
#include "efmrf/recovery.hpp"
#include "efmrf/sampler.hpp"

namespace efmrf {

enum class LambdaRule { Theory, Stars };

struct ExperimentConfig {
    FamilySpec family = FamilySpec::poisson();
    // 0 selects the family default.
    double a0 = 0.0;
    std::vector<int> p_list;
    double theta_s = 0.0;
    double theta_st = 0.0;
    std::vector<int> n_grid;
    int replicates = 20;

    LambdaRule lambda_rule = LambdaRule::Theory;
    // λ = c·√κ1·√(log p / n). c ≤ 0 calibrates c on the smallest p first.
    double lambda_c = 0.0;
    std::vector<double> pilot_candidates = {0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0};
    int pilot_replicates = 10;
    int stars_subsamples = 20;
    double stars_beta = 0.05;

    // β = n / (rescale_c · log p)
    double rescale_c = 1.0;
    StitchRule rule = StitchRule::Or;
    int burn_in = 500;
    int thin = 10;
    SolverOptions solver;
    std::uint64_t master_seed = 1;
    int jobs = 1;
    std::filesystem::path out_dir = "experiment_out";

    DomainConstraint constraint() const;
    // Throws ConfigError (bad sizes, non-square p) or DomainError (lattice
    // model outside the constraint).
    void validate() const;

    static ExperimentConfig desk_poisson();
    static ExperimentConfig desk_exponential();
    // p ∈ {64, 100, 169, 225}, R = 50.
    static ExperimentConfig full_scale(const ExperimentConfig& base);

    // Keys: preset, family, sigma, a0, p, theta_s, theta_st, n_grid (or n_min,
    // n_max, n_count), replicates, lambda_rule, lambda_c, pilot_c,
    // pilot_replicates, stars_subsamples, stars_beta, rescale_c, rule, burn_in,
    // thin, tol, max_iters, seed, jobs, out, full_scale.
    static ExperimentConfig from_key_values(const KeyValues& kv);
    KeyValues to_key_values() const;
};

// round(lo·(hi/lo)^(k/(count−1))), k = 0..count−1, deduplicated.
std::vector<int> geometric_grid(int lo, int hi, int count);

std::uint64_t trial_seed(std::uint64_t master_seed, const FamilySpec& family, int p, int n, int replicate);

struct TrialRecord {
    std::string family;
    int p = 0;
    int n = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    RecoveryReport report;
    int nonconverged_fits = 0;
    double max_kkt_gap = 0.0;
    // Non-empty when the trial threw; such trials count as failures.
    std::string error;
    double seconds = 0.0;
};

// Lattice model, Gibbs sample, fit every node at the configured λ, stitch,
// score. lambda_c must be resolved (> 0) for the theory rule. Errors are
// caught and recorded with the trial coordinates.
TrialRecord run_trial(const ExperimentConfig& config, int p, int n, int replicate, double lambda_c);

struct SuccessRow {
    std::string family;
    int p = 0;
    int n = 0;
    double beta = 0.0;
    int success_count = 0;
    int replicates = 0;
    double success_prob = 0.0;
    // Over trials that did not error; NaN when all errored.
    double mean_hamming = 0.0;

    friend bool operator==(const SuccessRow&, const SuccessRow&) = default;
};

using SuccessTable = std::vector<SuccessRow>;

struct PilotResult {
    int p = 0;
    std::vector<double> candidates;
    std::vector<int> successes;
    std::vector<double> mean_hamming;
    double chosen = 0.0;
};

// Scores each candidate c on the smallest p over the whole n grid with
// pilot_replicates replicates (seeds disjoint from the main run). The winner
// has the most successes; ties go to lower mean Hamming, then smaller c.
PilotResult calibrate_lambda(const ExperimentConfig& config);

struct ExperimentResult {
    ExperimentConfig config;
    double lambda_c = 0.0;
    std::optional<PilotResult> pilot;
    std::vector<TrialRecord> trials;
    SuccessTable table;
    int failed_trials = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Order-independent aggregation of trial records into rows sorted by (p, n).
SuccessTable aggregate(const std::vector<TrialRecord>& trials, int replicates, double rescale_c);

void write_success_csv(std::ostream& os, const SuccessTable& table);
SuccessTable parse_success_csv(std::istream& is);

// success.csv, curves_raw.csv, curves_rescaled.csv and an SVG per curve file.
void emit_outputs(const SuccessTable& table, const std::filesystem::path& dir);
// emit_outputs plus trials.csv and metadata.txt (no timings).
void emit_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

// Smallest grid n with success_prob ≥ level for this p; nullopt if never.
std::optional<int> n_at_level(const SuccessTable& table, int p, double level = 0.8);

// max_p n80(p)/log p ÷ min_p n80(p)/log p; nullopt when some p never reaches 0.8.
std::optional<double> alignment_ratio(const SuccessTable& table);

// Largest drop in success_prob between adjacent n for each p, and whether it
// stays within 2·√(0.25/R).
struct MonotoneCheck {
    double largest_drop = 0.0;
    double bound = 0.0;
    bool ok = true;
};
MonotoneCheck check_monotone(const SuccessTable& table);

}  // namespace efmrf
