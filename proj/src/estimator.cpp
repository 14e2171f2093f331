#include "efmrf/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "efmrf/errors.hpp"
#include "efmrf/parallel.hpp"

namespace efmrf {

namespace {

constexpr double kMinStep = 1e-14;
constexpr double kMaxStep = 1e10;

// Loss, feasibility and gradient of the node-conditional problem; one per fit.
class NodeProblem {
public:
    NodeProblem(const SampleMatrix& X, int s) : X_(X), fam_(X.family()), s_(s), n_(X.n()), stat_(X.n()) {
        for (int i = 0; i < n_; ++i) stat_[i] = fam_.statistic(X(i, s));
    }

    // Fills eta; false when any η leaves the family domain or overflows.
    bool etas(const Eigen::VectorXd& theta, Eigen::VectorXd& eta) const {
        eta.setConstant(n_, theta[s_]);
        for (int t = 0; t < X_.p(); ++t) {
            if (t != s_ && theta[t] != 0.0) eta.noalias() += theta[t] * X_.values().col(t);
        }
        for (int i = 0; i < n_; ++i) {
            const double e = eta[i];
            if (std::isnan(e)) return false;
            if (fam_.kind() == FamilyKind::Exponential && !(e > 0.0)) return false;
            if (fam_.kind() == FamilyKind::Poisson && e > fam_.eta_max()) return false;
        }
        return true;
    }

    double loss(const Eigen::VectorXd& eta) const {
        double sum = 0.0;
        for (int i = 0; i < n_; ++i) sum += fam_.log_partition(eta[i]) - stat_[i] * eta[i];
        return sum / n_;
    }

    void gradient(const Eigen::VectorXd& eta, Eigen::VectorXd& g) const {
        Eigen::VectorXd r(n_);
        for (int i = 0; i < n_; ++i) r[i] = fam_.d1(eta[i]) - stat_[i];
        g.noalias() = X_.values().transpose() * r;
        g /= n_;
        g[s_] = r.sum() / n_;
    }

private:
    const SampleMatrix& X_;
    const FamilySpec& fam_;
    int s_;
    int n_;
    Eigen::VectorXd stat_;
};

double clamp_to(const Interval& iv, double v) {
    if (v < iv.lo) return iv.lo;
    if (v > iv.hi) return iv.hi;
    return v;
}

double sign_project(EdgeSign sign, double v) {
    switch (sign) {
        case EdgeSign::NonPositive: return std::min(v, 0.0);
        case EdgeSign::NonNegative: return std::max(v, 0.0);
        case EdgeSign::Free: return v;
    }
    return v;
}

// Amount by which an edge at zero violates optimality (the one-sided version
// for sign-constrained coordinates), before subtracting λ.
double zero_edge_pull(EdgeSign sign, double g) {
    switch (sign) {
        case EdgeSign::NonPositive: return std::max(g, 0.0);
        case EdgeSign::NonNegative: return std::max(-g, 0.0);
        case EdgeSign::Free: return std::abs(g);
    }
    return std::abs(g);
}

void project(Eigen::VectorXd& theta, int s, const DomainConstraint& c) {
    for (int t = 0; t < theta.size(); ++t) {
        theta[t] = t == s ? clamp_to(c.node_bounds, theta[t]) : sign_project(c.edge_sign, theta[t]);
    }
}

double penalty(const Eigen::VectorXd& theta, int s) { return theta.lpNorm<1>() - std::abs(theta[s]); }

NeighborhoodFit make_fit(int s, double lambda, const Eigen::VectorXd& theta) {
    NeighborhoodFit fit;
    fit.s = s;
    fit.p = static_cast<int>(theta.size());
    fit.lambda = lambda;
    fit.intercept = theta[s];
    for (int t = 0; t < theta.size(); ++t) {
        if (t != s && theta[t] != 0.0) fit.edge_weights.emplace_back(t, theta[t]);
    }
    return fit;
}

}  // namespace

void SolverOptions::validate() const {
    if (!(tol > 0.0)) throw ConfigError("solver tol must be positive");
    if (max_iters < 1) throw ConfigError("solver max_iters must be at least 1");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtracking factor must be in (0, 1)");
    if (!(initial_step > 0.0)) throw ConfigError("initial step must be positive");
}

double NeighborhoodFit::weight(int t) const {
    for (const auto& [u, w] : edge_weights) {
        if (u == t) return w;
    }
    return 0.0;
}

Eigen::VectorXd NeighborhoodFit::theta() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    v[s] = intercept;
    for (const auto& [t, w] : edge_weights) v[t] = w;
    return v;
}

double soft_threshold(double z, double tau) {
    if (z > tau) return z - tau;
    if (z < -tau) return z + tau;
    return 0.0;
}

double kkt_gap(const Eigen::VectorXd& gradient, const Eigen::VectorXd& theta, int s, double lambda,
               const DomainConstraint& constraint) {
    double gap = 0.0;
    for (int t = 0; t < theta.size(); ++t) {
        const double g = gradient[t];
        const double v = theta[t];
        double r;
        if (t == s) {
            const auto& b = constraint.node_bounds;
            if (std::isfinite(b.lo) && v <= b.lo) {
                r = std::max(-g, 0.0);
            } else if (std::isfinite(b.hi) && v >= b.hi) {
                r = std::max(g, 0.0);
            } else {
                r = std::abs(g);
            }
        } else if (v != 0.0) {
            r = std::abs(g + lambda * (v > 0.0 ? 1.0 : -1.0));
        } else {
            r = std::max(zero_edge_pull(constraint.edge_sign, g) - lambda, 0.0);
        }
        gap = std::max(gap, r);
    }
    return gap;
}

double intercept_only_optimum(const SampleMatrix& X, int s, const DomainConstraint& constraint) {
    const auto& fam = X.family();
    double m = 0.0;
    for (int i = 0; i < X.n(); ++i) m += fam.statistic(X(i, s));
    m /= std::max(1, X.n());
    double b = 0.0;
    switch (fam.kind()) {
        case FamilyKind::Gaussian: b = fam.sigma() * fam.sigma() * m; break;
        case FamilyKind::Ising:
            if (m <= 0.0) {
                b = -30.0;
            } else if (m >= 1.0) {
                b = 30.0;
            } else {
                b = std::log(m / (1.0 - m));
            }
            break;
        case FamilyKind::Poisson: b = m > 0.0 ? std::log(m) : -30.0; break;
        case FamilyKind::Exponential: b = m < 0.0 ? -1.0 / m : 1e8; break;
    }
    return clamp_to(constraint.node_bounds, b);
}

double null_lambda(const SampleMatrix& X, int s, const DomainConstraint& constraint) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(X.p());
    theta[s] = intercept_only_optimum(X, s, constraint);
    NodeProblem prob(X, s);
    Eigen::VectorXd eta;
    if (!prob.etas(theta, eta)) throw DomainError("intercept-only start is outside the family domain");
    Eigen::VectorXd g(X.p());
    prob.gradient(eta, g);
    double lmax = 0.0;
    for (int t = 0; t < X.p(); ++t) {
        if (t != s) lmax = std::max(lmax, zero_edge_pull(constraint.edge_sign, g[t]));
    }
    return lmax;
}

NeighborhoodFit fit_neighborhood(const SampleMatrix& X, int s, double lambda, const DomainConstraint& constraint,
                                 const SolverOptions& opts) {
    opts.validate();
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (s < 0 || s >= X.p()) throw ConfigError("node index out of range");
    if (X.n() < 1) throw ConfigError("need at least one sample");
    const int p = X.p();
    NodeProblem prob(X, s);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta;
    bool have_start = false;
    if (opts.warm_start && opts.warm_start->size() == p) {
        theta = *opts.warm_start;
        project(theta, s, constraint);
        have_start = prob.etas(theta, eta);
    }
    if (!have_start) {
        theta.setZero();
        theta[s] = intercept_only_optimum(X, s, constraint);
        if (!prob.etas(theta, eta)) throw DomainError("node " + std::to_string(s) + ": no feasible starting point");
    }

    double f = prob.loss(eta);
    Eigen::VectorXd g(p);
    prob.gradient(eta, g);

    NeighborhoodFit fit;
    std::vector<double> trace;
    if (opts.record_objective) trace.push_back(f + lambda * penalty(theta, s));

    Eigen::VectorXd theta_prev;
    Eigen::VectorXd g_prev;
    Eigen::VectorXd trial(p);
    Eigen::VectorXd eta_trial;
    double step = opts.initial_step;
    double gap = kkt_gap(g, theta, s, lambda, constraint);
    int iter = 0;
    for (; iter < opts.max_iters && gap > opts.tol; ++iter) {
        if (iter > 0) {
            const Eigen::VectorXd ds = theta - theta_prev;
            const Eigen::VectorXd dg = g - g_prev;
            const double sy = ds.dot(dg);
            if (sy > 0.0) step = std::clamp(ds.squaredNorm() / sy, kMinStep, kMaxStep);
        }
        bool accepted = false;
        bool infeasible = false;
        double f_trial = f;
        while (step >= kMinStep) {
            for (int t = 0; t < p; ++t) {
                const double z = theta[t] - step * g[t];
                trial[t] = t == s ? clamp_to(constraint.node_bounds, z)
                                  : sign_project(constraint.edge_sign, soft_threshold(z, step * lambda));
            }
            const Eigen::VectorXd d = trial - theta;
            infeasible = !prob.etas(trial, eta_trial);
            if (!infeasible) {
                f_trial = prob.loss(eta_trial);
                const double model_bound = f + g.dot(d) + d.squaredNorm() / (2.0 * step);
                if (f_trial <= model_bound + 1e-12 * std::max(1.0, std::abs(f))) {
                    accepted = true;
                    break;
                }
            }
            step *= opts.backtrack;
        }
        if (!accepted) {
            if (infeasible) {
                throw DomainError("node " + std::to_string(s) + ": line search found no step keeping eta in the family domain");
            }
            break;  // rounding-level stall; report the current iterate
        }
        theta_prev = theta;
        g_prev = g;
        theta = trial;
        eta = eta_trial;
        f = f_trial;
        prob.gradient(eta, g);
        gap = kkt_gap(g, theta, s, lambda, constraint);
        if (opts.record_objective) trace.push_back(f + lambda * penalty(theta, s));
    }

    fit = make_fit(s, lambda, theta);
    fit.objective = f + lambda * penalty(theta, s);
    fit.kkt_gap = gap;
    fit.iterations = iter;
    fit.converged = gap <= opts.tol;
    fit.objective_trace = std::move(trace);
    return fit;
}

std::vector<double> lambda_grid(const SampleMatrix& X, int s, const DomainConstraint& constraint, int count,
                                double ratio) {
    if (count < 2) throw ConfigError("lambda grid needs count >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("lambda grid ratio must be in (0, 1)");
    const double lmax = null_lambda(X, s, constraint);
    std::vector<double> grid(count);
    for (int k = 0; k < count; ++k) grid[k] = lmax * std::pow(ratio, static_cast<double>(k) / (count - 1));
    grid.back() = lmax * ratio;
    return grid;
}

std::vector<double> graph_lambda_grid(const SampleMatrix& X, const DomainConstraint& constraint, int count,
                                      double ratio) {
    if (count < 2) throw ConfigError("lambda grid needs count >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("lambda grid ratio must be in (0, 1)");
    double lmax = 0.0;
    for (int s = 0; s < X.p(); ++s) lmax = std::max(lmax, null_lambda(X, s, constraint));
    std::vector<double> grid(count);
    for (int k = 0; k < count; ++k) grid[k] = lmax * std::pow(ratio, static_cast<double>(k) / (count - 1));
    grid.back() = lmax * ratio;
    return grid;
}

TheoryLambda theory_lambda(int n, int p, double kappa1, double alpha_hint, double c) {
    if (n < 2 || p < 2) throw ConfigError("theory_lambda needs n, p >= 2");
    if (!(c > 0.0)) throw ConfigError("theory_lambda constant must be positive");
    if (!(kappa1 > 0.0)) throw ConfigError("kappa1 must be positive");
    const double rate = std::sqrt(kappa1) * std::sqrt(std::log(static_cast<double>(p)) / n);
    TheoryLambda out;
    out.lambda = c * rate;
    out.incoherence_scaled = alpha_hint > 0.0 && alpha_hint <= 1.0 ? (2.0 - alpha_hint) / alpha_hint * rate
                                                                   : std::numeric_limits<double>::quiet_NaN();
    out.poisson_kappa2 = 1.0 / (4.0 * std::log(static_cast<double>(std::max(n, p))));
    return out;
}

std::vector<NeighborhoodFit> fit_all_nodes(const SampleMatrix& X, double lambda, const DomainConstraint& constraint,
                                           const SolverOptions& opts, int jobs) {
    std::vector<NeighborhoodFit> fits(X.p());
    parallel_for(static_cast<std::size_t>(X.p()), jobs,
                 [&](std::size_t s) { fits[s] = fit_neighborhood(X, static_cast<int>(s), lambda, constraint, opts); });
    return fits;
}

std::vector<std::vector<NeighborhoodFit>> fit_path(const SampleMatrix& X, const std::vector<double>& path,
                                                   const DomainConstraint& constraint, const SolverOptions& opts,
                                                   bool warm_starts) {
    std::vector<std::vector<NeighborhoodFit>> out(path.size(), std::vector<NeighborhoodFit>(X.p()));
    for (int s = 0; s < X.p(); ++s) {
        SolverOptions local = opts;
        local.warm_start.reset();
        for (std::size_t k = 0; k < path.size(); ++k) {
            out[k][s] = fit_neighborhood(X, s, path[k], constraint, local);
            if (warm_starts) local.warm_start = out[k][s].theta();
        }
    }
    return out;
}

}  // namespace efmrf
