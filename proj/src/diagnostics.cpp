#include "efmrf/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "efmrf/errors.hpp"
#include "efmrf/io.hpp"

namespace efmrf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TailRecord tail_record(const SampleMatrix& X, int s, const TailCheckOptions& opts) {
    const auto col = X.values().col(s);
    const int n = X.n();
    TailRecord r;
    r.node = s;
    r.mean_square = n > 0 ? col.squaredNorm() / n : 0.0;
    r.max_abs = n > 0 ? col.cwiseAbs().maxCoeff() : 0.0;
    r.delta = opts.delta > 0.0 ? opts.delta : 1.5 * r.mean_square;
    const int blocks = std::max(1, std::min(opts.blocks, n));
    int exceed = 0;
    for (int b = 0; b < blocks; ++b) {
        const int lo = static_cast<int>(static_cast<long long>(n) * b / blocks);
        const int hi = static_cast<int>(static_cast<long long>(n) * (b + 1) / blocks);
        if (hi <= lo) continue;
        const double ms = col.segment(lo, hi - lo).squaredNorm() / (hi - lo);
        if (ms > r.delta) ++exceed;
    }
    r.exceed_fraction = static_cast<double>(exceed) / blocks;
    const double bound = 4.0 * std::log(static_cast<double>(std::max(n, X.p())));
    r.bounded_event = r.max_abs <= bound;
    return r;
}

double second_difference(const auto& f, double x, double h) { return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h); }

}  // namespace

std::vector<TailRecord> tail_checks(const SampleMatrix& X, const TailCheckOptions& opts) {
    std::vector<TailRecord> out;
    out.reserve(X.p());
    for (int s = 0; s < X.p(); ++s) out.push_back(tail_record(X, s, opts));
    return out;
}

bool bounded_event_holds(const SampleMatrix& X) {
    const double bound = 4.0 * std::log(static_cast<double>(std::max(X.n(), X.p())));
    return X.n() == 0 || X.values().cwiseAbs().maxCoeff() <= bound;
}

Eigen::MatrixXd fisher_info(const PairwiseModel& model, const SampleMatrix& X, int s) {
    if (model.p() != X.p()) throw DomainError("model and data disagree on p");
    return node_nll_hessian(X, s, node_vector(model, s));
}

ConditionReport check_conditions(const PairwiseModel& model, const SampleMatrix& X, int s, int max_degree) {
    const int p = model.p();
    const Eigen::MatrixXd Q = fisher_info(model, X, s);
    ConditionReport r;
    r.s = s;
    r.max_degree = max_degree;
    r.support.push_back(s);
    for (const auto& [t, w] : model.neighbors(s)) r.support.push_back(t);
    std::sort(r.support.begin(), r.support.end());
    std::vector<int> complement;
    for (int t = 0; t < p; ++t) {
        if (!std::binary_search(r.support.begin(), r.support.end(), t)) complement.push_back(t);
    }

    const int ns = static_cast<int>(r.support.size());
    Eigen::MatrixXd qss(ns, ns);
    for (int a = 0; a < ns; ++a) {
        for (int b = 0; b < ns; ++b) qss(a, b) = Q(r.support[a], r.support[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qss, Eigen::EigenvaluesOnly);
    r.lambda_min_qss = eig.eigenvalues().minCoeff();
    r.qss_condition = r.lambda_min_qss > 0.0 ? eig.eigenvalues().maxCoeff() / r.lambda_min_qss
                                             : std::numeric_limits<double>::infinity();

    // Ê[X∖s X∖sᵀ]
    Eigen::MatrixXd rest(X.n(), p - 1);
    for (int t = 0, c = 0; t < p; ++t) {
        if (t != s) rest.col(c++) = X.values().col(t);
    }
    if (p > 1 && X.n() > 0) {
        const Eigen::MatrixXd second = rest.transpose() * rest / X.n();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig2(second, Eigen::EigenvaluesOnly);
        r.lambda_max_empirical = eig2.eigenvalues().maxCoeff();
    }

    r.singular_qss = r.lambda_min_qss < 1e-12;
    if (r.singular_qss) {
        r.incoherence = kNaN;
        r.alpha_implied = kNaN;
    } else if (!complement.empty()) {
        Eigen::MatrixXd q_sc(ns, static_cast<int>(complement.size()));
        for (int a = 0; a < ns; ++a) {
            for (std::size_t c = 0; c < complement.size(); ++c) q_sc(a, static_cast<int>(c)) = Q(r.support[a], complement[c]);
        }
        // columns of M are (Q_SS)⁻¹ Q_S,t, i.e. rows of Q_tS (Q_SS)⁻¹
        const Eigen::MatrixXd M = qss.ldlt().solve(q_sc);
        double worst = 0.0;
        for (int c = 0; c < M.cols(); ++c) {
            double norm = 0.0;
            for (int a = 0; a < ns; ++a) {
                if (r.support[a] != s) norm += std::abs(M(a, c));
            }
            worst = std::max(worst, norm);
        }
        r.incoherence = worst;
        r.alpha_implied = 1.0 - worst;
    }
    r.tail = tail_record(X, s, {});
    return r;
}

MomentConstants estimate_moment_constants(const PairwiseModel& model, const SampleMatrix& X, int value_cap) {
    MomentConstants k;
    for (int s = 0; s < X.p(); ++s) {
        const auto col = X.values().col(s);
        k.kappa_m = std::max(k.kappa_m, col.mean());
        k.kappa_v = std::max(k.kappa_v, col.squaredNorm() / std::max(1, X.n()));
    }
    if (model.p() > 3) {
        k.kappa_h_joint = kNaN;
        k.kappa_h_bar = kNaN;
        return k;
    }
    const double h = 1e-3;
    const std::vector<double> offsets = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (int s = 0; s < model.p(); ++s) {
        auto shifted_a = [&](double u) {
            std::vector<double> theta(model.node_params().begin(), model.node_params().end());
            theta[s] += u;
            const PairwiseModel shifted(model.family(), theta,
                                        std::vector<Edge>(model.edges().begin(), model.edges().end()),
                                        DomainConstraint{Interval::all(), model.constraint().edge_sign,
                                                         model.constraint().a0});
            return exact_log_partition(shifted, value_cap).value;
        };
        for (double u : offsets) {
            try {
                k.kappa_h_joint = std::max(k.kappa_h_joint, second_difference(shifted_a, u, h));
            } catch (const Error&) {
                // shifted parameter left the normalizable region
            }
        }
        auto a_bar = [&](double eta) { return exact_log_partition_tilted(model, s, eta, value_cap).value; };
        for (double u : {-1.0, -0.75, -0.5, -0.25, -0.01}) {
            try {
                k.kappa_h_bar = std::max(k.kappa_h_bar, second_difference(a_bar, u, h));
            } catch (const Error&) {
            }
        }
    }
    return k;
}

void write_condition_csv(std::ostream& os, const std::vector<ConditionReport>& reports,
                         const MomentConstants* constants) {
    os << "node,quantity,value\n";
    auto row = [&](const std::string& node, const char* q, double v) { os << node << ',' << q << ',' << format_double(v) << '\n'; };
    for (const auto& r : reports) {
        const std::string node = std::to_string(r.s);
        row(node, "max_degree", r.max_degree);
        row(node, "lambda_min_qss", r.lambda_min_qss);
        row(node, "qss_condition", r.qss_condition);
        row(node, "lambda_max_empirical", r.lambda_max_empirical);
        row(node, "incoherence", r.incoherence);
        row(node, "alpha_implied", r.alpha_implied);
        row(node, "singular_qss", r.singular_qss ? 1.0 : 0.0);
        row(node, "mean_square", r.tail.mean_square);
        row(node, "max_abs", r.tail.max_abs);
        row(node, "exceed_fraction", r.tail.exceed_fraction);
        row(node, "bounded_event", r.tail.bounded_event ? 1.0 : 0.0);
    }
    if (constants) {
        row("all", "kappa_m", constants->kappa_m);
        row("all", "kappa_v", constants->kappa_v);
        row("all", "kappa_h_joint", constants->kappa_h_joint);
        row("all", "kappa_h_bar", constants->kappa_h_bar);
    }
}

}  // namespace efmrf
