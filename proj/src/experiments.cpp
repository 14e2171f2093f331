#include "efmrf/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "efmrf/errors.hpp"
#include "efmrf/io.hpp"
#include "efmrf/parallel.hpp"
#include "efmrf/rng.hpp"
#include "efmrf/selection.hpp"
#include "efmrf/svg.hpp"

namespace efmrf {

namespace {

constexpr std::uint64_t kPilotTag = 0x70696c6f74ULL;

std::string join(const auto& values, auto&& fmt) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out += ',';
        out += fmt(values[k]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    return join(v, [](int x) { return std::to_string(x); });
}

std::string join_doubles(const std::vector<double>& v) { return join(v, [](double x) { return format_double(x); }); }

bool perfect_square(int p) {
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
    return k >= 2 && k * k == p;
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

std::string trial_context(const std::string& family, int p, int n, int replicate) {
    return "trial (family=" + family + ", p=" + std::to_string(p) + ", n=" + std::to_string(n) +
           ", replicate=" + std::to_string(replicate) + "): ";
}

double log_p(int p) { return std::log(static_cast<double>(p)); }

}  // namespace

DomainConstraint ExperimentConfig::constraint() const { return DomainConstraint::for_family(family, a0); }

void ExperimentConfig::validate() const {
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (p_list.empty()) throw ConfigError("p list is empty");
    for (int p : p_list) {
        if (!perfect_square(p)) throw ConfigError("p = " + std::to_string(p) + " is not a perfect square ≥ 4");
    }
    if (n_grid.empty()) throw ConfigError("n grid is empty");
    for (int n : n_grid) {
        if (n < 2) throw ConfigError("every n must be at least 2");
    }
    if (!(rescale_c > 0.0)) throw ConfigError("rescale_c must be positive");
    if (burn_in < 0 || thin < 1) throw ConfigError("burn_in must be ≥ 0 and thin ≥ 1");
    if (lambda_rule == LambdaRule::Theory && !(lambda_c > 0.0)) {
        if (pilot_candidates.empty() || pilot_replicates < 1) throw ConfigError("lambda calibration needs candidates and replicates");
        for (double c : pilot_candidates) {
            if (!(c > 0.0)) throw ConfigError("pilot candidates must be positive");
        }
    }
    if (lambda_rule == LambdaRule::Stars) {
        if (stars_subsamples < 1) throw ConfigError("stars_subsamples must be at least 1");
        if (!(stars_beta > 0.0 && stars_beta < 0.5)) throw ConfigError("stars_beta must be in (0, 0.5)");
    }
    solver.validate();
    const DomainConstraint c = constraint();
    for (int p : p_list) build_lattice_model(p, family, theta_s, theta_st, c);
}

ExperimentConfig ExperimentConfig::desk_poisson() {
    ExperimentConfig c;
    c.family = FamilySpec::poisson();
    c.p_list = {16, 36, 64};
    c.theta_s = 2.0;
    c.theta_st = -0.1;
    c.n_grid = geometric_grid(200, 6000, 10);
    c.replicates = 20;
    c.master_seed = 2012;
    return c;
}

ExperimentConfig ExperimentConfig::desk_exponential() {
    ExperimentConfig c;
    c.family = FamilySpec::exponential();
    c.p_list = {16, 36};
    c.theta_s = 0.1;
    c.theta_st = 1.0;
    c.n_grid = geometric_grid(200, 6000, 10);
    c.replicates = 20;
    c.master_seed = 2013;
    return c;
}

ExperimentConfig ExperimentConfig::full_scale(const ExperimentConfig& base) {
    ExperimentConfig c = base;
    c.p_list = {64, 100, 169, 225};
    c.replicates = 50;
    return c;
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv) {
    kv.require_known({"preset", "family", "sigma", "a0", "p", "theta_s", "theta_st", "n_grid", "n_min", "n_max",
                      "n_count", "replicates", "lambda_rule", "lambda_c", "pilot_c", "pilot_replicates",
                      "stars_subsamples", "stars_beta", "rescale_c", "rule", "burn_in", "thin", "tol", "max_iters",
                      "seed", "jobs", "out", "full_scale"});
    ExperimentConfig c;
    const std::string preset = kv.get_or("preset", "");
    if (preset == "desk_poisson") {
        c = desk_poisson();
    } else if (preset == "desk_exponential") {
        c = desk_exponential();
    } else if (!preset.empty()) {
        throw ConfigError("unknown preset '" + preset + "'");
    } else if (!kv.has("family")) {
        throw ConfigError("config needs 'preset' or 'family'");
    }
    if (kv.has("family")) {
        try {
            c.family = FamilySpec::from_name(kv.get("family"), kv.get_double("sigma", 1.0));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (kv.get_or("full_scale", "false") == "true") c = full_scale(c);
    c.a0 = kv.get_double("a0", c.a0);
    c.p_list = kv.get_ints("p", c.p_list);
    c.theta_s = kv.get_double("theta_s", c.theta_s);
    c.theta_st = kv.get_double("theta_st", c.theta_st);
    if (kv.has("n_grid")) {
        c.n_grid = kv.get_ints("n_grid", {});
    } else if (kv.has("n_min") || kv.has("n_max") || kv.has("n_count")) {
        c.n_grid = geometric_grid(static_cast<int>(kv.get_int("n_min", 200)), static_cast<int>(kv.get_int("n_max", 6000)),
                                  static_cast<int>(kv.get_int("n_count", 10)));
    }
    c.replicates = static_cast<int>(kv.get_int("replicates", c.replicates));
    const std::string rule = kv.get_or("lambda_rule", c.lambda_rule == LambdaRule::Stars ? "stars" : "theory");
    if (rule == "theory") {
        c.lambda_rule = LambdaRule::Theory;
    } else if (rule == "stars") {
        c.lambda_rule = LambdaRule::Stars;
    } else {
        throw ConfigError("lambda_rule must be 'theory' or 'stars'");
    }
    c.lambda_c = kv.get_double("lambda_c", c.lambda_c);
    c.pilot_candidates = kv.get_doubles("pilot_c", c.pilot_candidates);
    c.pilot_replicates = static_cast<int>(kv.get_int("pilot_replicates", c.pilot_replicates));
    c.stars_subsamples = static_cast<int>(kv.get_int("stars_subsamples", c.stars_subsamples));
    c.stars_beta = kv.get_double("stars_beta", c.stars_beta);
    c.rescale_c = kv.get_double("rescale_c", c.rescale_c);
    try {
        c.rule = parse_rule(kv.get_or("rule", std::string(to_string(c.rule))));
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    c.burn_in = static_cast<int>(kv.get_int("burn_in", c.burn_in));
    c.thin = static_cast<int>(kv.get_int("thin", c.thin));
    c.solver.tol = kv.get_double("tol", c.solver.tol);
    c.solver.max_iters = static_cast<int>(kv.get_int("max_iters", c.solver.max_iters));
    c.master_seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.master_seed)));
    c.jobs = static_cast<int>(kv.get_int("jobs", c.jobs));
    c.out_dir = kv.get_or("out", c.out_dir.string());
    return c;
}

KeyValues ExperimentConfig::to_key_values() const {
    KeyValues kv;
    kv.set("family", std::string(family.name()));
    if (family.kind() == FamilyKind::Gaussian) kv.set("sigma", format_double(family.sigma()));
    kv.set("a0", format_double(constraint().a0));
    kv.set("p", join_ints(p_list));
    kv.set("theta_s", format_double(theta_s));
    kv.set("theta_st", format_double(theta_st));
    kv.set("n_grid", join_ints(n_grid));
    kv.set("replicates", std::to_string(replicates));
    kv.set("lambda_rule", lambda_rule == LambdaRule::Theory ? "theory" : "stars");
    kv.set("lambda_c", format_double(lambda_c));
    kv.set("pilot_c", join_doubles(pilot_candidates));
    kv.set("pilot_replicates", std::to_string(pilot_replicates));
    kv.set("stars_subsamples", std::to_string(stars_subsamples));
    kv.set("stars_beta", format_double(stars_beta));
    kv.set("rescale_c", format_double(rescale_c));
    kv.set("rule", std::string(to_string(rule)));
    kv.set("burn_in", std::to_string(burn_in));
    kv.set("thin", std::to_string(thin));
    kv.set("tol", format_double(solver.tol));
    kv.set("max_iters", std::to_string(solver.max_iters));
    kv.set("seed", std::to_string(master_seed));
    kv.set("jobs", std::to_string(jobs));
    kv.set("out", out_dir.string());
    return kv;
}

std::vector<int> geometric_grid(int lo, int hi, int count) {
    if (lo < 1 || hi < lo || count < 1) throw ConfigError("geometric grid needs 1 ≤ lo ≤ hi and count ≥ 1");
    std::vector<int> out;
    for (int k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        const int n = static_cast<int>(std::lround(lo * std::pow(static_cast<double>(hi) / lo, t)));
        if (out.empty() || n != out.back()) out.push_back(n);
    }
    return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, const FamilySpec& family, int p, int n, int replicate) {
    return hash_words({master_seed, static_cast<std::uint64_t>(family.kind()), static_cast<std::uint64_t>(p),
                       static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replicate)});
}

namespace {

struct SampledTrial {
    PairwiseModel model;
    SampleMatrix X;
};

SampledTrial sample_trial(const ExperimentConfig& config, int p, int n, std::uint64_t seed) {
    PairwiseModel model = build_lattice_model(p, config.family, config.theta_s, config.theta_st, config.constraint());
    GibbsConfig g;
    g.burn_in = config.burn_in;
    g.thin = config.thin;
    g.seed = seed;
    SampleMatrix X = gibbs_sample(model, n, g);
    return {std::move(model), std::move(X)};
}

double theory_lambda_for(const ExperimentConfig& config, int n, int p, double c) {
    const double kappa1 = kappa_bounds(config.family, config.constraint()).kappa1;
    return theory_lambda(n, p, kappa1, 0.0, c).lambda;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config, int p, int n, int replicate, double lambda_c) {
    TrialRecord rec;
    rec.family = std::string(config.family.name());
    rec.p = p;
    rec.n = n;
    rec.replicate = replicate;
    rec.seed = trial_seed(config.master_seed, config.family, p, n, replicate);
    rec.report.rule = config.rule;
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto [model, X] = sample_trial(config, p, n, rec.seed);
        const EdgeSet truth(model.edges().begin(), model.edges().end());
        std::vector<NeighborhoodFit> fits;
        if (config.lambda_rule == LambdaRule::Theory) {
            if (!(lambda_c > 0.0)) throw ConfigError("theory lambda constant is not resolved");
            rec.lambda = theory_lambda_for(config, n, p, lambda_c);
            fits = fit_all_nodes(X, rec.lambda, config.constraint(), config.solver, 1);
        } else {
            StarsConfig sc;
            sc.subsamples = config.stars_subsamples;
            sc.beta = config.stars_beta;
            sc.seed = rec.seed;
            sc.rule = config.rule;
            sc.solver = config.solver;
            StarsResult sr = stars_select(X, config.constraint(), sc);
            rec.lambda = sr.lambda_star;
            fits = std::move(sr.fits);
        }
        rec.report = recover(fits, p, config.rule, truth);
        for (const auto& f : fits) {
            if (!f.converged) ++rec.nonconverged_fits;
            rec.max_kkt_gap = std::max(rec.max_kkt_gap, f.kkt_gap);
        }
    } catch (const std::exception& e) {
        rec.error = trial_context(rec.family, p, n, replicate) + e.what();
        rec.report.exact_recovery = false;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

PilotResult calibrate_lambda(const ExperimentConfig& config) {
    PilotResult out;
    out.p = *std::min_element(config.p_list.begin(), config.p_list.end());
    out.candidates = config.pilot_candidates;
    const std::size_t nc = out.candidates.size();
    const std::size_t reps = static_cast<std::size_t>(config.pilot_replicates);
    const std::size_t cells = config.n_grid.size() * reps;
    // per cell: success flag and Hamming distance per candidate
    std::vector<std::vector<std::pair<int, int>>> results(cells, std::vector<std::pair<int, int>>(nc));
    parallel_for(cells, config.jobs, [&](std::size_t cell) {
        const int n = config.n_grid[cell / reps];
        const int r = static_cast<int>(cell % reps);
        const std::uint64_t seed = hash_words({trial_seed(config.master_seed, config.family, out.p, n, r), kPilotTag});
        try {
            const auto [model, X] = sample_trial(config, out.p, n, seed);
            const EdgeSet truth(model.edges().begin(), model.edges().end());
            for (std::size_t k = 0; k < nc; ++k) {
                try {
                    const double lambda = theory_lambda_for(config, n, out.p, out.candidates[k]);
                    const auto fits = fit_all_nodes(X, lambda, config.constraint(), config.solver, 1);
                    const auto rep = recover(fits, out.p, config.rule, truth);
                    results[cell][k] = {rep.exact_recovery ? 1 : 0, rep.hamming};
                } catch (const Error&) {
                    results[cell][k] = {0, static_cast<int>(truth.size())};
                }
            }
        } catch (const Error&) {
            for (auto& r : results[cell]) r = {0, out.p * (out.p - 1) / 2};
        }
    });
    out.successes.assign(nc, 0);
    out.mean_hamming.assign(nc, 0.0);
    for (const auto& cell : results) {
        for (std::size_t k = 0; k < nc; ++k) {
            out.successes[k] += cell[k].first;
            out.mean_hamming[k] += cell[k].second;
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 0; k < nc; ++k) {
        out.mean_hamming[k] /= static_cast<double>(cells);
        const bool better = out.successes[k] > out.successes[best] ||
                            (out.successes[k] == out.successes[best] &&
                             (out.mean_hamming[k] < out.mean_hamming[best] ||
                              (out.mean_hamming[k] == out.mean_hamming[best] && out.candidates[k] < out.candidates[best])));
        if (better) best = k;
    }
    out.chosen = out.candidates[best];
    return out;
}

SuccessTable aggregate(const std::vector<TrialRecord>& trials, int replicates, double rescale_c) {
    struct Cell {
        std::string family;
        int trials = 0;
        int successes = 0;
        int scored = 0;
        double hamming = 0.0;
    };
    std::map<std::pair<int, int>, Cell> cells;
    for (const auto& t : trials) {
        Cell& c = cells[{t.p, t.n}];
        c.family = t.family;
        ++c.trials;
        if (t.error.empty()) {
            ++c.scored;
            c.hamming += t.report.hamming;
            if (t.report.exact_recovery) ++c.successes;
        }
    }
    SuccessTable table;
    for (const auto& [key, c] : cells) {
        SuccessRow row;
        row.family = c.family;
        row.p = key.first;
        row.n = key.second;
        row.beta = row.n / (rescale_c * log_p(row.p));
        row.success_count = c.successes;
        row.replicates = std::max(replicates, c.trials);
        row.success_prob = static_cast<double>(row.success_count) / row.replicates;
        row.mean_hamming = c.scored > 0 ? c.hamming / c.scored : std::numeric_limits<double>::quiet_NaN();
        table.push_back(row);
    }
    return table;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;
    result.config = config;
    result.lambda_c = config.lambda_c;
    if (config.lambda_rule == LambdaRule::Theory && !(config.lambda_c > 0.0)) {
        result.pilot = calibrate_lambda(config);
        result.lambda_c = result.pilot->chosen;
    }
    struct Job {
        int p, n, r;
    };
    std::vector<Job> jobs;
    for (int p : config.p_list) {
        for (int n : config.n_grid) {
            for (int r = 0; r < config.replicates; ++r) jobs.push_back({p, n, r});
        }
    }
    result.trials.resize(jobs.size());
    parallel_for(jobs.size(), config.jobs, [&](std::size_t k) {
        result.trials[k] = run_trial(config, jobs[k].p, jobs[k].n, jobs[k].r, result.lambda_c);
    });
    for (const auto& t : result.trials) {
        if (!t.error.empty()) ++result.failed_trials;
    }
    result.table = aggregate(result.trials, config.replicates, config.rescale_c);
    return result;
}

void write_success_csv(std::ostream& os, const SuccessTable& table) {
    os << "family,p,n,beta,success_count,replicates,success_prob,mean_hamming\n";
    for (const auto& r : table) {
        os << r.family << ',' << r.p << ',' << r.n << ',' << format_double(r.beta) << ',' << r.success_count << ','
           << r.replicates << ',' << format_double(r.success_prob) << ',' << format_double(r.mean_hamming) << '\n';
    }
}

SuccessTable parse_success_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != "family,p,n,beta,success_count,replicates,success_prob,mean_hamming") {
        throw ParseError("line 1: missing success.csv header");
    }
    SuccessTable table;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto c = split(trim(line), ',');
        if (c.size() != 8) throw ParseError("line " + std::to_string(line_no) + ": expected 8 fields");
        SuccessRow r;
        r.family = c[0];
        r.p = static_cast<int>(parse_integer(c[1], "p"));
        r.n = static_cast<int>(parse_integer(c[2], "n"));
        r.beta = parse_double(c[3], "beta");
        r.success_count = static_cast<int>(parse_integer(c[4], "success_count"));
        r.replicates = static_cast<int>(parse_integer(c[5], "replicates"));
        r.success_prob = parse_double(c[6], "success_prob");
        r.mean_hamming = parse_double(c[7], "mean_hamming");
        table.push_back(r);
    }
    return table;
}

void emit_outputs(const SuccessTable& table, const std::filesystem::path& dir) {
    std::ostringstream success, raw, rescaled;
    write_success_csv(success, table);
    raw << "p,n,success_prob\n";
    rescaled << "p,beta,success_prob\n";
    std::map<int, std::pair<PlotSeries, PlotSeries>> series;
    for (const auto& r : table) {
        raw << r.p << ',' << r.n << ',' << format_double(r.success_prob) << '\n';
        rescaled << r.p << ',' << format_double(r.beta) << ',' << format_double(r.success_prob) << '\n';
        auto& [by_n, by_beta] = series[r.p];
        by_n.label = by_beta.label = "p = " + std::to_string(r.p);
        by_n.x.push_back(r.n);
        by_n.y.push_back(r.success_prob);
        by_beta.x.push_back(r.beta);
        by_beta.y.push_back(r.success_prob);
    }
    std::vector<PlotSeries> by_n, by_beta;
    for (auto& [p, s] : series) {
        by_n.push_back(s.first);
        by_beta.push_back(s.second);
    }
    const std::string family = table.empty() ? std::string() : table.front().family + " ";
    std::ostringstream raw_svg, rescaled_svg;
    write_line_plot(raw_svg, {family + "lattice: exact recovery vs n", "n (log scale)", "success probability", true},
                    by_n);
    write_line_plot(rescaled_svg,
                    {family + "lattice: exact recovery vs rescaled n", "beta = n / (c log p) (log scale)",
                     "success probability", true},
                    by_beta);
    write_text_file(dir / "success.csv", success.str());
    write_text_file(dir / "curves_raw.csv", raw.str());
    write_text_file(dir / "curves_rescaled.csv", rescaled.str());
    write_text_file(dir / "curves_raw.svg", raw_svg.str());
    write_text_file(dir / "curves_rescaled.svg", rescaled_svg.str());
}

void emit_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
    emit_outputs(result.table, dir);
    std::ostringstream trials;
    trials << "family,p,n,replicate,seed,lambda,exact_recovery,true_positives,false_positives,false_negatives,hamming,"
              "nonconverged_fits,max_kkt_gap,error\n";
    for (const auto& t : result.trials) {
        trials << t.family << ',' << t.p << ',' << t.n << ',' << t.replicate << ',' << t.seed << ','
               << format_double(t.lambda) << ',' << (t.report.exact_recovery ? 1 : 0) << ',' << t.report.true_positives
               << ',' << t.report.false_positives << ',' << t.report.false_negatives << ',' << t.report.hamming << ','
               << t.nonconverged_fits << ',' << format_double(t.max_kkt_gap) << ',' << csv_safe(t.error) << '\n';
    }
    write_text_file(dir / "trials.csv", trials.str());

    std::ostringstream meta;
    const KeyValues kv = result.config.to_key_values();
    for (const auto& [key, value] : kv.entries()) {
        if (key == "out" || key == "jobs") continue;
        meta << key << " = " << value << '\n';
    }
    meta << "lambda_c_used = " << format_double(result.lambda_c) << '\n';
    if (result.pilot) {
        meta << "pilot_p = " << result.pilot->p << '\n';
        meta << "pilot_candidates = " << join_doubles(result.pilot->candidates) << '\n';
        meta << "pilot_successes = " << join_ints(result.pilot->successes) << '\n';
        meta << "pilot_mean_hamming = " << join_doubles(result.pilot->mean_hamming) << '\n';
    }
    meta << "trials = " << result.trials.size() << '\n';
    meta << "failed_trials = " << result.failed_trials << '\n';
    write_text_file(dir / "metadata.txt", meta.str());
}

std::optional<int> n_at_level(const SuccessTable& table, int p, double level) {
    std::optional<int> best;
    for (const auto& r : table) {
        if (r.p == p && r.success_prob >= level && (!best || r.n < *best)) best = r.n;
    }
    return best;
}

std::optional<double> alignment_ratio(const SuccessTable& table) {
    std::vector<int> ps;
    for (const auto& r : table) {
        if (std::find(ps.begin(), ps.end(), r.p) == ps.end()) ps.push_back(r.p);
    }
    if (ps.empty()) return std::nullopt;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int p : ps) {
        const auto n80 = n_at_level(table, p);
        if (!n80) return std::nullopt;
        const double v = *n80 / log_p(p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi / lo;
}

MonotoneCheck check_monotone(const SuccessTable& table) {
    MonotoneCheck out;
    std::map<int, std::vector<const SuccessRow*>> by_p;
    int min_reps = std::numeric_limits<int>::max();
    for (const auto& r : table) {
        by_p[r.p].push_back(&r);
        min_reps = std::min(min_reps, r.replicates);
    }
    if (table.empty()) return out;
    out.bound = 2.0 * std::sqrt(0.25 / std::max(1, min_reps));
    for (auto& [p, rows] : by_p) {
        std::sort(rows.begin(), rows.end(), [](const SuccessRow* a, const SuccessRow* b) { return a->n < b->n; });
        for (std::size_t k = 1; k < rows.size(); ++k) {
            out.largest_drop = std::max(out.largest_drop, rows[k - 1]->success_prob - rows[k]->success_prob);
        }
    }
    out.ok = out.largest_drop <= out.bound;
    return out;
}

}  // namespace efmrf
