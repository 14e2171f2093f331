#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>
#include <vector>

#include "efmrf/errors.hpp"
#include "efmrf/estimator.hpp"
#include "efmrf/model.hpp"
#include "efmrf/recovery.hpp"
#include "efmrf/sampler.hpp"
#include "efmrf/selection.hpp"

namespace py = pybind11;
using namespace efmrf;

namespace {

using EdgeTuple = std::tuple<int, int, double>;

std::vector<Edge> to_edges(const std::vector<EdgeTuple>& in) {
    std::vector<Edge> out;
    out.reserve(in.size());
    for (const auto& [s, t, w] : in) out.push_back({s, t, w});
    return out;
}

std::vector<EdgeTuple> from_edges(std::span<const Edge> in) {
    std::vector<EdgeTuple> out;
    out.reserve(in.size());
    for (const auto& e : in) out.emplace_back(e.s, e.t, e.weight);
    return out;
}

SolverOptions solver(double tol, int max_iters) {
    SolverOptions o;
    o.tol = tol;
    o.max_iters = max_iters;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Structure learning for pairwise exponential-family graphical models";

    auto base = py::register_exception<Error>(m, "EfmrfError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
    py::register_exception<SupportError>(m, "SupportError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<MissingFitError>(m, "MissingFitError", base.ptr());
    py::register_exception<TooLargeError>(m, "TooLargeError", base.ptr());
    py::register_exception<NotNormalizableError>(m, "NotNormalizableError", base.ptr());
    py::register_exception<NotSquareError>(m, "NotSquareError", base.ptr());

    py::class_<FamilySpec>(m, "Family")
        .def(py::init([](const std::string& name, double sigma) { return FamilySpec::from_name(name, sigma); }),
             py::arg("name"), py::arg("sigma") = 1.0)
        .def_property_readonly("name", [](const FamilySpec& f) { return std::string(f.name()); })
        .def_property_readonly("sigma", &FamilySpec::sigma)
        .def("in_support", &FamilySpec::in_support)
        .def("log_partition", &FamilySpec::log_partition)
        .def("d1", &FamilySpec::d1)
        .def("d2", &FamilySpec::d2)
        .def("d3", &FamilySpec::d3)
        .def("mean", &FamilySpec::mean)
        .def("__repr__", [](const FamilySpec& f) { return "Family('" + std::string(f.name()) + "')"; });

    m.def(
        "kappa_bounds",
        [](const FamilySpec& f, double a0) {
            const auto kb = kappa_bounds(f, DomainConstraint::for_family(f, a0));
            return std::make_pair(kb.kappa1, kb.kappa3);
        },
        py::arg("family"), py::arg("a0") = 0.0, "(kappa1, kappa3) over the family's constrained eta range");

    py::class_<PairwiseModel>(m, "Model")
        .def(py::init([](const FamilySpec& f, std::vector<double> node_params, const std::vector<EdgeTuple>& edges,
                         double a0) {
                 return PairwiseModel(f, std::move(node_params), to_edges(edges), DomainConstraint::for_family(f, a0));
             }),
             py::arg("family"), py::arg("node_params"), py::arg("edges"), py::arg("a0") = 0.0)
        .def_property_readonly("p", &PairwiseModel::p)
        .def_property_readonly("family", &PairwiseModel::family)
        .def_property_readonly("node_params",
                               [](const PairwiseModel& mdl) {
                                   return std::vector<double>(mdl.node_params().begin(), mdl.node_params().end());
                               })
        .def_property_readonly("edges", [](const PairwiseModel& mdl) { return from_edges(mdl.edges()); })
        .def("dense_edges", &PairwiseModel::dense_edges)
        .def("joint_log_weight", [](const PairwiseModel& mdl, const std::vector<double>& x) {
            return mdl.joint_log_weight(x);
        });

    m.def(
        "lattice_model",
        [](int p, const FamilySpec& f, double theta_s, double theta_st, double a0) {
            return build_lattice_model(p, f, theta_s, theta_st, DomainConstraint::for_family(f, a0));
        },
        py::arg("p"), py::arg("family"), py::arg("theta_s"), py::arg("theta_st"), py::arg("a0") = 0.0);

    m.def(
        "log_partition",
        [](const PairwiseModel& mdl, int value_cap) {
            const auto lp = exact_log_partition(mdl, value_cap);
            return std::make_pair(lp.value, lp.tail_bound);
        },
        py::arg("model"), py::arg("value_cap") = kDefaultValueCap, "(A(theta), tail bound) for small models");

    m.def(
        "sample",
        [](const PairwiseModel& mdl, int n, std::uint64_t seed, int burn_in, int thin, std::uint64_t chain) {
            GibbsConfig g;
            g.seed = seed;
            g.burn_in = burn_in;
            g.thin = thin;
            g.chain = chain;
            py::gil_scoped_release release;
            return gibbs_sample(mdl, n, g).values();
        },
        py::arg("model"), py::arg("n"), py::arg("seed") = 0, py::arg("burn_in") = 500, py::arg("thin") = 10,
        py::arg("chain") = 0, "n x p Gibbs draws");

    py::class_<NeighborhoodFit>(m, "NeighborhoodFit")
        .def_readonly("s", &NeighborhoodFit::s)
        .def_readonly("intercept", &NeighborhoodFit::intercept)
        .def_readonly("edge_weights", &NeighborhoodFit::edge_weights)
        .def_readonly("lambda_", &NeighborhoodFit::lambda)
        .def_readonly("objective", &NeighborhoodFit::objective)
        .def_readonly("kkt_gap", &NeighborhoodFit::kkt_gap)
        .def_readonly("iterations", &NeighborhoodFit::iterations)
        .def_readonly("converged", &NeighborhoodFit::converged)
        .def("theta", &NeighborhoodFit::theta);

    m.def(
        "fit_neighborhood",
        [](const Eigen::MatrixXd& X, const FamilySpec& f, int s, double lam, double a0, double tol, int max_iters) {
            const SampleMatrix data(f, X);
            py::gil_scoped_release release;
            return fit_neighborhood(data, s, lam, DomainConstraint::for_family(f, a0), solver(tol, max_iters));
        },
        py::arg("X"), py::arg("family"), py::arg("s"), py::arg("lam"), py::arg("a0") = 0.0, py::arg("tol") = 1e-7,
        py::arg("max_iters") = 5000);

    m.def(
        "null_lambda",
        [](const Eigen::MatrixXd& X, const FamilySpec& f, int s, double a0) {
            return null_lambda(SampleMatrix(f, X), s, DomainConstraint::for_family(f, a0));
        },
        py::arg("X"), py::arg("family"), py::arg("s"), py::arg("a0") = 0.0);

    m.def(
        "fit_graph",
        [](const Eigen::MatrixXd& X, const FamilySpec& f, double lam, const std::string& rule, double a0, double tol,
           int max_iters, int jobs) {
            const SampleMatrix data(f, X);
            const auto r = parse_rule(rule);
            py::gil_scoped_release release;
            const auto fits = fit_all_nodes(data, lam, DomainConstraint::for_family(f, a0), solver(tol, max_iters), jobs);
            return std::make_pair(from_edges(stitch(fits, data.p(), r)), fits);
        },
        py::arg("X"), py::arg("family"), py::arg("lam"), py::arg("rule") = "or", py::arg("a0") = 0.0,
        py::arg("tol") = 1e-7, py::arg("max_iters") = 5000, py::arg("jobs") = 1,
        "(stitched edges, per-node fits) at one lambda");

    m.def(
        "score",
        [](const std::vector<EdgeTuple>& estimated, const std::vector<EdgeTuple>& truth, int p) {
            const auto r = score(to_edges(estimated), to_edges(truth), p);
            py::dict d;
            d["exact_recovery"] = r.exact_recovery;
            d["true_positives"] = r.true_positives;
            d["false_positives"] = r.false_positives;
            d["false_negatives"] = r.false_negatives;
            d["hamming"] = r.hamming;
            return d;
        },
        py::arg("estimated"), py::arg("truth"), py::arg("p"));

    m.def(
        "stars_select",
        [](const Eigen::MatrixXd& X, const FamilySpec& f, int subsamples, double beta, int grid_count,
           double grid_ratio, std::uint64_t seed, const std::string& rule, double a0, int jobs) {
            const SampleMatrix data(f, X);
            StarsConfig cfg;
            cfg.subsamples = subsamples;
            cfg.beta = beta;
            cfg.grid_count = grid_count;
            cfg.grid_ratio = grid_ratio;
            cfg.seed = seed;
            cfg.rule = parse_rule(rule);
            cfg.jobs = jobs;
            StarsResult r;
            {
                py::gil_scoped_release release;
                r = stars_select(data, DomainConstraint::for_family(f, a0), cfg);
            }
            py::dict d;
            d["lambdas"] = r.lambdas;
            d["instability"] = r.instability;
            d["monotone"] = r.monotone;
            d["lambda_star"] = r.lambda_star;
            d["stable"] = r.stable;
            d["edges"] = from_edges(r.graph);
            return d;
        },
        py::arg("X"), py::arg("family"), py::arg("subsamples") = 20, py::arg("beta") = 0.05,
        py::arg("grid_count") = 20, py::arg("grid_ratio") = 0.05, py::arg("seed") = 0, py::arg("rule") = "or",
        py::arg("a0") = 0.0, py::arg("jobs") = 1);

    m.def(
        "theory_lambda",
        [](int n, int p, double kappa1, double c) { return theory_lambda(n, p, kappa1, 0.0, c).lambda; },
        py::arg("n"), py::arg("p"), py::arg("kappa1"), py::arg("c") = 1.0, "c * sqrt(kappa1) * sqrt(log p / n)");
}
