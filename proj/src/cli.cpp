#include "efmrf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "efmrf/diagnostics.hpp"
#include "efmrf/errors.hpp"
#include "efmrf/experiments.hpp"
#include "efmrf/io.hpp"
#include "efmrf/recovery.hpp"
#include "efmrf/sampler.hpp"
#include "efmrf/selection.hpp"

namespace efmrf {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string model;
    std::string data;
    std::string family;
    double sigma = 1.0;
    double a0 = 0.0;
    int n = 0;
    std::uint64_t seed = 0;
    int burn_in = 500;
    int thin = 10;
    std::optional<double> lambda;
    std::string lambda_grid;
    int grid_count = 20;
    double grid_ratio = 0.05;
    std::string rule = "or";
    int jobs = 1;
    std::string out;
    bool shift_nonneg = false;
    std::string config;
    double tol = 1e-7;
    int max_iters = 5000;
    int subsamples = 20;
    double beta = 0.05;
    int max_degree = -1;
    bool seed_given = false;
    bool jobs_given = false;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw ConfigError(std::string(flag) + " is required");
    if (!fs::is_regular_file(path)) throw IoError(std::string(flag) + ": no such file " + path);
}

PairwiseModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return read_model(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

FamilySpec family_from(const Options& o) {
    if (o.family.empty()) throw ConfigError("--family is required");
    try {
        return FamilySpec::from_name(o.family, o.sigma);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

SolverOptions solver_from(const Options& o) {
    SolverOptions s;
    s.tol = o.tol;
    s.max_iters = o.max_iters;
    try {
        s.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return s;
}

StitchRule rule_from(const Options& o) {
    try {
        return parse_rule(o.rule);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    try {
        for (const auto& token : split(text, ',')) grid.push_back(parse_double(token, "--lambda-grid"));
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    if (grid.empty()) throw ConfigError("--lambda-grid is empty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0)) throw ConfigError("--lambda-grid values must be positive");
        if (k && !(grid[k] < grid[k - 1])) throw ConfigError("--lambda-grid must be strictly decreasing");
    }
    return grid;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ostringstream ss;
    writer(ss);
    write_text_file(path, ss.str());
}

void write_graph(const fs::path& dir, const std::vector<NeighborhoodFit>& fits, const EdgeSet& graph, int p) {
    write_file(dir / "fits.tsv", [&](std::ostream& os) { write_fits(os, fits); });
    write_file(dir / "edges.txt", [&](std::ostream& os) { write_edge_list(os, graph); });
    write_file(dir / "edges.json", [&](std::ostream& os) { write_edges_json(os, graph, p); });
}

int count_nonconverged(const std::vector<NeighborhoodFit>& fits) {
    return static_cast<int>(std::count_if(fits.begin(), fits.end(), [](const auto& f) { return !f.converged; }));
}

int run_sample(const Options& o, std::ostream& out) {
    require_file(o.model, "--model");
    if (o.out.empty()) throw ConfigError("--out is required");
    if (o.n < 1) throw ConfigError("--n must be at least 1");
    const PairwiseModel model = load_model(o.model);
    GibbsConfig g;
    g.seed = o.seed;
    g.burn_in = o.burn_in;
    g.thin = o.thin;
    try {
        g.validate(model.p());
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const SampleMatrix X = gibbs_sample(model, o.n, g);
    write_file(o.out, [&](std::ostream& os) { write_samples(os, X); });
    out << "wrote " << X.n() << " samples of " << X.p() << " nodes to " << o.out << '\n';
    return kExitOk;
}

int run_fit(const Options& o, std::ostream& out) {
    require_file(o.data, "--data");
    if (o.out.empty()) throw ConfigError("--out is required");
    const FamilySpec family = family_from(o);
    const SolverOptions solver = solver_from(o);
    const StitchRule rule = rule_from(o);
    if (o.lambda && !o.lambda_grid.empty()) throw ConfigError("use either --lambda or --lambda-grid");
    if (!o.lambda && o.lambda_grid.empty()) throw ConfigError("--lambda or --lambda-grid is required");
    if (o.lambda && !(*o.lambda > 0.0)) throw ConfigError("--lambda must be positive");
    const std::vector<double> grid = o.lambda ? std::vector<double>{*o.lambda} : parse_grid(o.lambda_grid);
    const SampleMatrix X = ingest_matrix(fs::path(o.data), family, {o.shift_nonneg});
    const DomainConstraint constraint = DomainConstraint::for_family(family, o.a0);
    const fs::path dir = o.out;
    int nonconverged = 0;
    if (grid.size() == 1) {
        const auto fits = fit_all_nodes(X, grid[0], constraint, solver, o.jobs);
        const EdgeSet graph = stitch(fits, X.p(), rule);
        write_graph(dir, fits, graph, X.p());
        nonconverged = count_nonconverged(fits);
        out << "lambda " << format_double(grid[0]) << ": " << graph.size() << " edges\n";
    } else {
        const auto path = fit_path(X, grid, constraint, solver, true);
        std::ostringstream summary;
        summary << "index,lambda,edges\n";
        for (std::size_t k = 0; k < path.size(); ++k) {
            const EdgeSet graph = stitch(path[k], X.p(), rule);
            char name[32];
            std::snprintf(name, sizeof name, "lambda_%03zu", k);
            write_graph(dir / name, path[k], graph, X.p());
            nonconverged += count_nonconverged(path[k]);
            summary << k << ',' << format_double(grid[k]) << ',' << graph.size() << '\n';
        }
        write_text_file(dir / "path.csv", summary.str());
        out << "fitted " << grid.size() << " lambda values\n";
    }
    if (nonconverged > 0) {
        throw ConvergenceFailure(std::to_string(nonconverged) + " node fits did not converge (outputs written)");
    }
    return kExitOk;
}

int run_select(const Options& o, std::ostream& out) {
    require_file(o.data, "--data");
    if (o.out.empty()) throw ConfigError("--out is required");
    const FamilySpec family = family_from(o);
    StarsConfig sc;
    sc.subsamples = o.subsamples;
    sc.beta = o.beta;
    sc.grid_count = o.grid_count;
    sc.grid_ratio = o.grid_ratio;
    if (!o.lambda_grid.empty()) sc.grid = parse_grid(o.lambda_grid);
    sc.seed = o.seed;
    sc.rule = rule_from(o);
    sc.jobs = o.jobs;
    sc.solver = solver_from(o);
    const SampleMatrix X = ingest_matrix(fs::path(o.data), family, {o.shift_nonneg});
    const StarsResult result = stars_select(X, DomainConstraint::for_family(family, o.a0), sc);
    const fs::path dir = o.out;
    write_file(dir / "stars.csv", [&](std::ostream& os) { write_stars_csv(os, result); });
    write_graph(dir, result.fits, result.graph, X.p());
    out << "lambda* " << format_double(result.lambda_star) << (result.stable ? "" : " (no stable lambda)") << ": "
        << result.graph.size() << " edges\n";
    if (const int bad = count_nonconverged(result.fits); bad > 0) {
        throw ConvergenceFailure(std::to_string(bad) + " node fits did not converge (outputs written)");
    }
    return kExitOk;
}

int run_experiment_cmd(const Options& o, std::ostream& out) {
    require_file(o.config, "--config");
    std::ifstream in(o.config);
    ExperimentConfig config = ExperimentConfig::from_key_values(KeyValues::parse(in));
    if (!o.out.empty()) config.out_dir = o.out;
    if (o.jobs_given) config.jobs = o.jobs;
    if (o.seed_given) config.master_seed = o.seed;
    const ExperimentResult result = run_experiment(config);
    emit_experiment(result, config.out_dir);
    out << "ran " << result.trials.size() << " trials (" << result.failed_trials << " failed), lambda constant "
        << format_double(result.lambda_c) << "; outputs in " << config.out_dir.string() << '\n';
    return kExitOk;
}

int run_diagnose(const Options& o, std::ostream& out) {
    require_file(o.model, "--model");
    require_file(o.data, "--data");
    if (o.out.empty()) throw ConfigError("--out is required");
    const PairwiseModel model = load_model(o.model);
    const SampleMatrix X = ingest_matrix(fs::path(o.data), model.family(), {o.shift_nonneg});
    if (X.p() != model.p()) throw DomainError("data has " + std::to_string(X.p()) + " columns, model has p = " + std::to_string(model.p()));
    int d = o.max_degree;
    if (d < 0) {
        d = 0;
        for (int s = 0; s < model.p(); ++s) d = std::max(d, static_cast<int>(model.neighbors(s).size()));
    }
    std::vector<ConditionReport> reports;
    for (int s = 0; s < model.p(); ++s) reports.push_back(check_conditions(model, X, s, d));
    const MomentConstants constants = estimate_moment_constants(model, X);
    write_file(o.out, [&](std::ostream& os) { write_condition_csv(os, reports, &constants); });
    out << "wrote condition report for " << model.p() << " nodes to " << o.out << '\n';
    return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structure learning for pairwise exponential-family graphical models"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", o.seed, "Random seed")->each([&](const std::string&) { o.seed_given = true; });
        cmd->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")->each([&](const std::string&) { o.jobs_given = true; });
        cmd->add_option("--out", o.out, "Output file or directory");
    };
    auto add_data = [&](CLI::App* cmd) {
        cmd->add_option("--data", o.data, "Headered TSV/CSV of samples");
        cmd->add_option("--family", o.family, "gaussian | ising | poisson | exponential");
        cmd->add_option("--sigma", o.sigma, "Gaussian conditional standard deviation");
        cmd->add_option("--a0", o.a0, "Node-parameter bound for poisson/exponential (0 = default)");
        cmd->add_flag("--shift-nonneg", o.shift_nonneg, "Exponential: shift each column to minimum 0");
        cmd->add_option("--rule", o.rule, "Stitch rule: or | and");
        cmd->add_option("--tol", o.tol, "Solver KKT tolerance");
        cmd->add_option("--max-iters", o.max_iters, "Solver iteration cap");
    };

    CLI::App* sample = app.add_subcommand("sample", "Gibbs-sample a model file to TSV");
    sample->add_option("--model", o.model, "Model file");
    sample->add_option("--n", o.n, "Number of samples");
    sample->add_option("--burn-in", o.burn_in, "Burn-in sweeps");
    sample->add_option("--thin", o.thin, "Sweeps between kept samples");
    add_common(sample);

    CLI::App* fit = app.add_subcommand("fit", "Fit all neighbourhoods at one lambda or along a grid");
    add_data(fit);
    fit->add_option("--lambda", o.lambda, "Regularization weight");
    fit->add_option("--lambda-grid", o.lambda_grid, "Comma-separated decreasing lambda values");
    add_common(fit);

    CLI::App* select = app.add_subcommand("select", "Choose lambda by StARS and fit the graph");
    add_data(select);
    select->add_option("--lambda-grid", o.lambda_grid, "Comma-separated decreasing lambda values");
    select->add_option("--grid-count", o.grid_count, "Automatic grid size");
    select->add_option("--grid-ratio", o.grid_ratio, "Automatic grid lambda_min / lambda_max");
    select->add_option("--subsamples", o.subsamples, "Number of subsamples");
    select->add_option("--beta", o.beta, "Instability threshold");
    add_common(select);

    CLI::App* experiment = app.add_subcommand("experiment", "Run a lattice recovery study from a config file");
    experiment->add_option("--config", o.config, "Key = value config file");
    add_common(experiment);

    CLI::App* diagnose = app.add_subcommand("diagnose", "Condition diagnostics for a model and data set");
    diagnose->add_option("--model", o.model, "Model file");
    diagnose->add_option("--data", o.data, "Headered TSV/CSV of samples");
    diagnose->add_flag("--shift-nonneg", o.shift_nonneg, "Exponential: shift each column to minimum 0");
    diagnose->add_option("--max-degree", o.max_degree, "Maximum degree d (default: from the model)");
    add_common(diagnose);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream help_out, help_err;
        const int code = app.exit(e, help_out, help_err);
        out << help_out.str();
        err << help_err.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sample->parsed()) return run_sample(o, out);
        if (fit->parsed()) return run_fit(o, out);
        if (select->parsed()) return run_select(o, out);
        if (experiment->parsed()) return run_experiment_cmd(o, out);
        if (diagnose->parsed()) return run_diagnose(o, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConvergenceFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace efmrf
