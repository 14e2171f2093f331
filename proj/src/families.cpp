#include "efmrf/families.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>

#include "efmrf/errors.hpp"

namespace efmrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double eta) {
    if (eta >= 0.0) {
        return 1.0 / (1.0 + std::exp(-eta));
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

std::string format_interval(const Interval& iv) {
    std::ostringstream os;
    os.precision(17);
    os << (iv.lo_open ? '(' : '[') << iv.lo << ", " << iv.hi << (iv.hi_open ? ')' : ']');
    return os.str();
}

}  // namespace

bool Interval::contains(double x) const {
    if (std::isnan(x)) return false;
    const bool above = lo_open ? x > lo : x >= lo;
    const bool below = hi_open ? x < hi : x <= hi;
    return above && below;
}

Interval Interval::all() { return Interval{-kInf, kInf, true, true}; }

FamilySpec::FamilySpec(FamilyKind kind, double sigma, double eta_max)
    : kind_(kind), sigma_(sigma), eta_max_(eta_max) {}

FamilySpec FamilySpec::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("gaussian sigma must be positive");
    }
    return FamilySpec(FamilyKind::Gaussian, sigma, kDefaultEtaMax);
}

FamilySpec FamilySpec::ising() { return FamilySpec(FamilyKind::Ising, 1.0, kDefaultEtaMax); }

FamilySpec FamilySpec::poisson(double eta_max) {
    if (!(eta_max > 0.0)) throw DomainError("poisson eta_max must be positive");
    return FamilySpec(FamilyKind::Poisson, 1.0, eta_max);
}

FamilySpec FamilySpec::exponential() { return FamilySpec(FamilyKind::Exponential, 1.0, kDefaultEtaMax); }

FamilySpec FamilySpec::from_name(std::string_view name, double sigma) {
    if (name == "gaussian") return gaussian(sigma);
    if (name == "ising") return ising();
    if (name == "poisson") return poisson();
    if (name == "exponential") return exponential();
    throw ParseError("unknown family '" + std::string(name) + "'");
}

std::string_view FamilySpec::name() const {
    switch (kind_) {
        case FamilyKind::Gaussian: return "gaussian";
        case FamilyKind::Ising: return "ising";
        case FamilyKind::Poisson: return "poisson";
        case FamilyKind::Exponential: return "exponential";
    }
    return "unknown";
}

Support FamilySpec::support() const {
    switch (kind_) {
        case FamilyKind::Gaussian: return Support::Reals;
        case FamilyKind::Ising: return Support::Binary01;
        case FamilyKind::Poisson: return Support::NonnegativeIntegers;
        case FamilyKind::Exponential: return Support::NonnegativeReals;
    }
    return Support::Reals;
}

Interval FamilySpec::eta_domain() const {
    if (kind_ == FamilyKind::Exponential) return Interval{0.0, kInf, true, true};
    return Interval::all();
}

bool FamilySpec::in_support(double z) const {
    if (!std::isfinite(z)) return false;
    switch (kind_) {
        case FamilyKind::Gaussian: return true;
        case FamilyKind::Ising: return z == 0.0 || z == 1.0;
        case FamilyKind::Poisson: return z >= 0.0 && z == std::floor(z);
        case FamilyKind::Exponential: return z >= 0.0;
    }
    return false;
}

bool FamilySpec::discrete() const { return kind_ == FamilyKind::Ising || kind_ == FamilyKind::Poisson; }

double FamilySpec::statistic(double z) const {
    switch (kind_) {
        case FamilyKind::Gaussian: return z / (sigma_ * sigma_);
        case FamilyKind::Exponential: return -z;
        default: return z;
    }
}

double FamilySpec::base_measure(double z) const {
    switch (kind_) {
        case FamilyKind::Gaussian: return -z * z / (2.0 * sigma_ * sigma_);
        case FamilyKind::Poisson: return -std::lgamma(z + 1.0);
        default: return 0.0;
    }
}

void FamilySpec::check_eta(double eta) const {
    if (std::isnan(eta)) throw DomainError("canonical parameter is NaN");
    if (kind_ == FamilyKind::Exponential && !(eta > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "exponential canonical parameter must be positive, got " << eta;
        throw DomainError(os.str());
    }
    if (kind_ == FamilyKind::Poisson && eta > eta_max_) {
        std::ostringstream os;
        os.precision(17);
        os << "poisson canonical parameter " << eta << " exceeds eta_max " << eta_max_;
        throw OverflowError(os.str());
    }
}

double FamilySpec::log_partition(double eta) const {
    check_eta(eta);
    switch (kind_) {
        case FamilyKind::Gaussian: return eta * eta / (2.0 * sigma_ * sigma_);
        case FamilyKind::Ising: return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        case FamilyKind::Poisson: return std::exp(eta);
        case FamilyKind::Exponential: return -std::log(eta);
    }
    return 0.0;
}

double FamilySpec::d1(double eta) const {
    check_eta(eta);
    switch (kind_) {
        case FamilyKind::Gaussian: return eta / (sigma_ * sigma_);
        case FamilyKind::Ising: return sigmoid(eta);
        case FamilyKind::Poisson: return std::exp(eta);
        case FamilyKind::Exponential: return -1.0 / eta;
    }
    return 0.0;
}

double FamilySpec::d2(double eta) const {
    check_eta(eta);
    switch (kind_) {
        case FamilyKind::Gaussian: return 1.0 / (sigma_ * sigma_);
        case FamilyKind::Ising: {
            const double m = sigmoid(eta);
            return m * (1.0 - m);
        }
        case FamilyKind::Poisson: return std::exp(eta);
        case FamilyKind::Exponential: return 1.0 / (eta * eta);
    }
    return 0.0;
}

double FamilySpec::d3(double eta) const {
    check_eta(eta);
    switch (kind_) {
        case FamilyKind::Gaussian: return 0.0;
        case FamilyKind::Ising: {
            const double m = sigmoid(eta);
            return m * (1.0 - m) * (1.0 - 2.0 * m);
        }
        case FamilyKind::Poisson: return std::exp(eta);
        case FamilyKind::Exponential: return -2.0 / (eta * eta * eta);
    }
    return 0.0;
}

double FamilySpec::mean(double eta) const {
    check_eta(eta);
    switch (kind_) {
        case FamilyKind::Gaussian: return eta;
        case FamilyKind::Ising: return sigmoid(eta);
        case FamilyKind::Poisson: return std::exp(eta);
        case FamilyKind::Exponential: return 1.0 / eta;
    }
    return 0.0;
}

DomainConstraint DomainConstraint::for_family(const FamilySpec& family, double a0) {
    DomainConstraint c;
    switch (family.kind()) {
        case FamilyKind::Exponential:
            c.a0 = a0 > 0.0 ? a0 : kExponentialA0;
            c.node_bounds = Interval{c.a0, kInf, false, true};
            c.edge_sign = EdgeSign::NonNegative;
            break;
        case FamilyKind::Poisson:
            c.a0 = a0 > 0.0 ? a0 : kPoissonA0;
            c.node_bounds = Interval{-kInf, c.a0, true, false};
            c.edge_sign = EdgeSign::NonPositive;
            break;
        default:
            c.a0 = a0 > 0.0 ? a0 : 1.0;
            break;
    }
    return c;
}

DerivativeBounds kappa_bounds(const FamilySpec& family, const DomainConstraint& constraint) {
    const double a0 = constraint.a0;
    switch (family.kind()) {
        case FamilyKind::Gaussian: return {1.0 / (family.sigma() * family.sigma()), 0.0};
        case FamilyKind::Ising: return {0.25, 0.25};
        case FamilyKind::Exponential: return {1.0 / (a0 * a0), 2.0 / (a0 * a0 * a0)};
        case FamilyKind::Poisson: {
            const double k = std::exp(a0 + 1.0);
            return {k, k};
        }
    }
    return {0.0, 0.0};
}

std::string_view to_string(EdgeSign sign) {
    switch (sign) {
        case EdgeSign::Free: return "Free";
        case EdgeSign::NonPositive: return "NonPositive";
        case EdgeSign::NonNegative: return "NonNegative";
    }
    return "?";
}

std::vector<Violation> check_domain(std::span<const double> node_params, std::span<const Edge> edges,
                                    const FamilySpec& family, const DomainConstraint& constraint) {
    std::vector<Violation> out;
    if (!(constraint.a0 > 0.0)) {
        out.push_back({Violation::Kind::Node, -1, -1, "a0 must be positive"});
    }
    const int p = static_cast<int>(node_params.size());
    for (int s = 0; s < p; ++s) {
        const double v = node_params[s];
        if (!std::isfinite(v) || !constraint.node_bounds.contains(v)) {
            std::ostringstream os;
            os.precision(17);
            os << "node " << s << " parameter " << v << " violates bound " << format_interval(constraint.node_bounds);
            out.push_back({Violation::Kind::Node, s, -1, os.str()});
        }
    }
    for (const Edge& e : edges) {
        std::ostringstream os;
        os.precision(17);
        if (e.s < 0 || e.t >= p || e.s >= e.t) {
            os << "edge (" << e.s << "," << e.t << ") is not a valid off-diagonal pair";
            out.push_back({Violation::Kind::Edge, e.s, e.t, os.str()});
            continue;
        }
        bool bad = !std::isfinite(e.weight);
        if (constraint.edge_sign == EdgeSign::NonPositive && e.weight > 0.0) bad = true;
        if (constraint.edge_sign == EdgeSign::NonNegative && e.weight < 0.0) bad = true;
        if (bad) {
            os << "edge (" << e.s << "," << e.t << ") weight " << e.weight << " violates " << to_string(constraint.edge_sign);
            out.push_back({Violation::Kind::Edge, e.s, e.t, os.str()});
        }
    }
    if (family.kind() == FamilyKind::Gaussian && out.empty() && p > 0) {
        Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(p, p);
        for (const Edge& e : edges) {
            precision(e.s, e.t) -= e.weight;
            precision(e.t, e.s) -= e.weight;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(precision);
        if (llt.info() != Eigen::Success) {
            out.push_back({Violation::Kind::Joint, -1, -1, "gaussian precision I - Theta is not positive definite"});
        }
    }
    return out;
}

}  // namespace efmrf
