#include "efmrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "efmrf/errors.hpp"

namespace efmrf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp accumulator.
struct LogSum {
    double max = kNegInf;
    double sum = 0.0;

    void add(double log_term) {
        if (log_term == kNegInf) return;
        if (log_term <= max) {
            sum += std::exp(log_term - max);
        } else {
            sum = sum * std::exp(max - log_term) + 1.0;
            max = log_term;
        }
    }
    double value() const { return max == kNegInf ? kNegInf : max + std::log(sum); }
};

// log Σ_{k>cap} μ^k / k! with μ = e^θ.
double log_poisson_upper_tail(double theta, int cap) {
    LogSum acc;
    const double mu_log = theta;
    double prev = kNegInf;
    for (int k = cap + 1; k < cap + 100000; ++k) {
        const double term = k * mu_log - std::lgamma(k + 1.0);
        acc.add(term);
        // terms decrease once k > μ; stop when negligible
        if (term < prev && term < acc.value() - 40.0) break;
        prev = term;
    }
    return acc.value();
}

void require_normalizable(const PairwiseModel& model) {
    const auto& fam = model.family();
    switch (fam.kind()) {
        case FamilyKind::Poisson:
            for (const Edge& e : model.edges()) {
                if (e.weight > 0.0) throw NotNormalizableError("poisson model with positive edge weight");
            }
            break;
        case FamilyKind::Exponential:
            for (double v : model.node_params()) {
                if (!(v > 0.0)) throw NotNormalizableError("exponential model with nonpositive node parameter");
            }
            for (const Edge& e : model.edges()) {
                if (e.weight < 0.0) throw NotNormalizableError("exponential model with negative edge weight");
            }
            break;
        case FamilyKind::Gaussian: {
            Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(model.p(), model.p()) - model.dense_edges();
            Eigen::LLT<Eigen::MatrixXd> llt(precision);
            if (llt.info() != Eigen::Success) throw NotNormalizableError("gaussian precision is not positive definite");
            break;
        }
        case FamilyKind::Ising: break;
    }
}

// Extra log-weight term added to the joint density; used for the tilted
// partition function.
struct Tilt {
    int node = -1;
    double eta_sq = 0.0;
    double operator()(std::span<const double> x) const { return node < 0 ? 0.0 : eta_sq * x[node] * x[node]; }
};

// Mixed-radix enumeration of {0..radix-1}^p calling fn(state, log_weight).
template <class Fn>
void enumerate_states(const PairwiseModel& model, int radix, const Tilt& tilt, Fn&& fn) {
    const int p = model.p();
    std::vector<double> x(p, 0.0);
    std::vector<int> digits(p, 0);
    while (true) {
        fn(digits, model.joint_log_weight(x) + tilt(x));
        int k = 0;
        while (k < p) {
            if (++digits[k] < radix) {
                x[k] = digits[k];
                break;
            }
            digits[k] = 0;
            x[k] = 0.0;
            ++k;
        }
        if (k == p) break;
    }
}

int discrete_radix(const PairwiseModel& model, int value_cap) {
    const int p = model.p();
    if (model.family().kind() == FamilyKind::Ising) {
        if (p > 12) throw TooLargeError("exact enumeration limited to p <= 12 for ising models");
        return 2;
    }
    if (p > 4) throw TooLargeError("exact enumeration limited to p <= 4 for poisson models");
    if (value_cap < 1) throw TooLargeError("value_cap must be at least 1");
    double states = std::pow(static_cast<double>(value_cap) + 1.0, p);
    if (states > static_cast<double>(1 << 24)) {
        throw TooLargeError("poisson enumeration exceeds 2^24 states; lower value_cap");
    }
    return value_cap + 1;
}

double poisson_tail_bound(const PairwiseModel& model, int value_cap, double log_z_trunc) {
    // With θst ≤ 0 and x ≥ 0 each weight is bounded by the independent product
    // Π exp(θs x_s)/x_s!, so the missing mass is at most the product-measure
    // mass outside the box.
    const auto theta = model.node_params();
    double total_indep = 0.0;
    for (double v : theta) total_indep += std::exp(v);
    LogSum tail;
    for (int s = 0; s < model.p(); ++s) {
        tail.add(log_poisson_upper_tail(theta[s], value_cap) + total_indep - std::exp(theta[s]));
    }
    return std::exp(tail.value() - log_z_trunc);
}

LogPartition continuous_log_partition(const PairwiseModel& model, const Tilt& tilt) {
    const int p = model.p();
    if (p > 3) throw TooLargeError("quadrature limited to p <= 3 for continuous families");
    const auto& fam = model.family();
    const int intervals = p <= 2 ? 2000 : 256;
    double lo = 0.0;
    double hi = 40.0;
    if (fam.kind() == FamilyKind::Gaussian) {
        lo = -40.0 * fam.sigma();
        hi = 40.0 * fam.sigma();
    }
    const double h = (hi - lo) / intervals;
    std::vector<double> nodes(intervals + 1);
    std::vector<double> log_w(intervals + 1);
    for (int k = 0; k <= intervals; ++k) {
        nodes[k] = lo + h * k;
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        log_w[k] = std::log(w * h / 3.0);
    }
    std::vector<int> idx(p, 0);
    std::vector<double> x(p, nodes[0]);
    LogSum acc;
    while (true) {
        double lw = model.joint_log_weight(x) + tilt(x);
        for (int s = 0; s < p; ++s) lw += log_w[idx[s]];
        acc.add(lw);
        int k = 0;
        while (k < p) {
            if (++idx[k] <= intervals) {
                x[k] = nodes[idx[k]];
                break;
            }
            idx[k] = 0;
            x[k] = nodes[0];
            ++k;
        }
        if (k == p) break;
    }
    const double log_z = acc.value();
    if (!std::isfinite(log_z)) throw NotNormalizableError("quadrature mass is not finite");
    double tail = std::numeric_limits<double>::quiet_NaN();
    if (fam.kind() == FamilyKind::Exponential) {
        const auto theta = model.node_params();
        double log_prod = 0.0;
        for (double v : theta) log_prod -= std::log(v);
        LogSum t;
        for (int s = 0; s < p; ++s) t.add(log_prod - theta[s] * hi);
        tail = std::exp(t.value() - log_z);
    }
    return {log_z, tail};
}

}  // namespace

PairwiseModel::PairwiseModel(FamilySpec family, std::vector<double> node_params, std::vector<Edge> edges,
                             DomainConstraint constraint)
    : family_(family), constraint_(constraint), node_params_(std::move(node_params)) {
    const int p = static_cast<int>(node_params_.size());
    for (Edge e : edges) {
        if (e.s > e.t) std::swap(e.s, e.t);
        if (e.s == e.t) throw DomainError("self-edge on node " + std::to_string(e.s));
        if (e.s < 0 || e.t >= p) throw DomainError("edge endpoint out of range");
        if (e.weight != 0.0) edges_.push_back(e);
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.s != b.s ? a.s < b.s : a.t < b.t; });
    for (std::size_t k = 1; k < edges_.size(); ++k) {
        if (edges_[k].s == edges_[k - 1].s && edges_[k].t == edges_[k - 1].t) {
            throw DomainError("duplicate edge (" + std::to_string(edges_[k].s) + "," + std::to_string(edges_[k].t) + ")");
        }
    }
    const auto violations = check_domain(node_params_, edges_, family_, constraint_);
    if (!violations.empty()) {
        std::string msg = "model violates domain constraints:";
        for (const auto& v : violations) msg += " " + v.message + ";";
        throw DomainError(msg);
    }
    adjacency_.assign(p, {});
    for (const Edge& e : edges_) {
        adjacency_[e.s].emplace_back(e.t, e.weight);
        adjacency_[e.t].emplace_back(e.s, e.weight);
    }
    for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

PairwiseModel::PairwiseModel(FamilySpec family, std::vector<double> node_params, std::vector<Edge> edges)
    : PairwiseModel(family, std::move(node_params), std::move(edges), DomainConstraint::for_family(family)) {}

double PairwiseModel::edge_weight(int s, int t) const {
    if (s == t) return 0.0;
    for (const auto& [u, w] : adjacency_[s]) {
        if (u == t) return w;
    }
    return 0.0;
}

Eigen::MatrixXd PairwiseModel::dense_edges() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p(), p());
    for (const Edge& e : edges_) {
        m(e.s, e.t) = e.weight;
        m(e.t, e.s) = e.weight;
    }
    return m;
}

double PairwiseModel::canonical_param(int s, std::span<const double> x) const {
    double eta = node_params_[s];
    for (const auto& [t, w] : adjacency_[s]) eta += w * x[t];
    return eta;
}

double PairwiseModel::joint_log_weight(std::span<const double> x) const {
    double lw = 0.0;
    for (int s = 0; s < p(); ++s) {
        lw += family_.statistic(x[s]) * node_params_[s] + family_.base_measure(x[s]);
    }
    for (const Edge& e : edges_) {
        lw += e.weight * family_.statistic(x[e.s]) * x[e.t];
    }
    return lw;
}

SampleMatrix::SampleMatrix(FamilySpec family, Eigen::MatrixXd values, std::uint64_t seed)
    : family_(family), values_(std::move(values)), seed_(seed) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (!family_.in_support(values_(i, j))) {
                std::ostringstream os;
                os.precision(17);
                os << "value " << values_(i, j) << " at row " << i << ", column " << j << " is outside the "
                   << family_.name() << " support";
                throw SupportError(os.str());
            }
        }
    }
}

SampleMatrix SampleMatrix::select_rows(std::span<const int> rows) const {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = values_.row(rows[k]);
    return SampleMatrix(family_, std::move(sub), seed_);
}

namespace {

LogPartition log_partition_impl(const PairwiseModel& model, int value_cap, const Tilt& tilt) {
    require_normalizable(model);
    if (!model.family().discrete()) return continuous_log_partition(model, tilt);
    const int radix = discrete_radix(model, value_cap);
    LogSum acc;
    enumerate_states(model, radix, tilt, [&](const std::vector<int>&, double lw) { acc.add(lw); });
    const double log_z = acc.value();
    double tail = 0.0;
    if (model.family().kind() == FamilyKind::Poisson) tail = poisson_tail_bound(model, value_cap, log_z);
    return {log_z, tail};
}

}  // namespace

LogPartition exact_log_partition(const PairwiseModel& model, int value_cap) {
    return log_partition_impl(model, value_cap, Tilt{});
}

LogPartition exact_log_partition_tilted(const PairwiseModel& model, int s, double eta_sq, int value_cap) {
    if (s < 0 || s >= model.p()) throw DomainError("tilt node out of range");
    const auto& fam = model.family();
    const bool bounded = fam.kind() == FamilyKind::Ising;
    const bool gaussian_ok = fam.kind() == FamilyKind::Gaussian && eta_sq < 1.0 / (2.0 * fam.sigma() * fam.sigma());
    if (!bounded && !gaussian_ok && eta_sq > 0.0) {
        throw NotNormalizableError("tilted partition diverges for positive eta on an unbounded support");
    }
    return log_partition_impl(model, value_cap, Tilt{s, eta_sq});
}

JointPmf exact_joint_pmf(const PairwiseModel& model, int value_cap) {
    if (!model.family().discrete()) throw TooLargeError("exact joint pmf is only available for discrete families");
    require_normalizable(model);
    JointPmf pmf;
    pmf.p = model.p();
    pmf.radix = discrete_radix(model, value_cap);
    std::vector<double> log_weights;
    log_weights.reserve(static_cast<std::size_t>(std::pow(pmf.radix, pmf.p)));
    LogSum acc;
    enumerate_states(model, pmf.radix, Tilt{}, [&](const std::vector<int>&, double lw) {
        log_weights.push_back(lw);
        acc.add(lw);
    });
    pmf.log_partition = acc.value();
    pmf.prob.resize(log_weights.size());
    double total = 0.0;
    for (std::size_t k = 0; k < log_weights.size(); ++k) {
        pmf.prob[k] = std::exp(log_weights[k] - pmf.log_partition);
        total += pmf.prob[k];
    }
    for (double& v : pmf.prob) v /= total;
    if (model.family().kind() == FamilyKind::Poisson) {
        pmf.tail_bound = poisson_tail_bound(model, value_cap, pmf.log_partition);
    }
    return pmf;
}

std::size_t JointPmf::index(std::span<const int> state) const {
    std::size_t idx = 0;
    for (int s = p - 1; s >= 0; --s) idx = idx * static_cast<std::size_t>(radix) + static_cast<std::size_t>(state[s]);
    return idx;
}

std::vector<int> JointPmf::state(std::size_t index) const {
    std::vector<int> out(p);
    for (int s = 0; s < p; ++s) {
        out[s] = static_cast<int>(index % static_cast<std::size_t>(radix));
        index /= static_cast<std::size_t>(radix);
    }
    return out;
}

std::vector<double> JointPmf::marginal(int s) const {
    std::vector<double> m(radix, 0.0);
    std::size_t stride = 1;
    for (int k = 0; k < s; ++k) stride *= static_cast<std::size_t>(radix);
    for (std::size_t k = 0; k < prob.size(); ++k) m[(k / stride) % static_cast<std::size_t>(radix)] += prob[k];
    return m;
}

namespace {

Eigen::VectorXd node_etas(const SampleMatrix& X, int s, const Eigen::VectorXd& theta) {
    const auto& v = X.values();
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(X.n(), theta[s]);
    for (int t = 0; t < X.p(); ++t) {
        if (t != s && theta[t] != 0.0) eta.noalias() += theta[t] * v.col(t);
    }
    return eta;
}

}  // namespace

double node_nll(const SampleMatrix& X, int s, const Eigen::VectorXd& theta) {
    const auto& fam = X.family();
    const Eigen::VectorXd eta = node_etas(X, s, theta);
    double sum = 0.0;
    for (int i = 0; i < X.n(); ++i) sum += -fam.statistic(X(i, s)) * eta[i] + fam.log_partition(eta[i]);
    return sum / X.n();
}

Eigen::VectorXd node_nll_gradient(const SampleMatrix& X, int s, const Eigen::VectorXd& theta) {
    const auto& fam = X.family();
    const Eigen::VectorXd eta = node_etas(X, s, theta);
    Eigen::VectorXd r(X.n());
    for (int i = 0; i < X.n(); ++i) r[i] = fam.d1(eta[i]) - fam.statistic(X(i, s));
    Eigen::VectorXd g = X.values().transpose() * r / X.n();
    g[s] = r.sum() / X.n();
    return g;
}

Eigen::MatrixXd node_nll_hessian(const SampleMatrix& X, int s, const Eigen::VectorXd& theta) {
    const auto& fam = X.family();
    const Eigen::VectorXd eta = node_etas(X, s, theta);
    Eigen::MatrixXd Z = X.values();
    Z.col(s).setOnes();
    Eigen::VectorXd w(X.n());
    for (int i = 0; i < X.n(); ++i) w[i] = fam.d2(eta[i]);
    Eigen::MatrixXd H = Z.transpose() * w.asDiagonal() * Z / X.n();
    return (H + H.transpose()) / 2.0;
}

Eigen::VectorXd node_vector(const PairwiseModel& model, int s) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(model.p());
    theta[s] = model.node_params()[s];
    for (const auto& [t, w] : model.neighbors(s)) theta[t] = w;
    return theta;
}

}  // namespace efmrf
