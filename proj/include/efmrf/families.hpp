#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace efmrf {

enum class FamilyKind { Gaussian, Ising, Poisson, Exponential };

enum class Support { Reals, Binary01, NonnegativeIntegers, NonnegativeReals };

enum class EdgeSign { Free, NonPositive, NonNegative };

// Interval with independently open/closed ends. Infinite ends are always open.
struct Interval {
    double lo;
    double hi;
    bool lo_open = true;
    bool hi_open = true;

    bool contains(double x) const;
    static Interval all();
};

// Undirected weighted edge, stored with s < t.
struct Edge {
    int s;
    int t;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// A univariate exponential family P(z) ∝ exp(η·B(z) + C(z) − D(η)), described
// through its log-partition D and the first three derivatives.
//
// Conventions (canonical parameter η is always linear in the neighbours' raw
// values):
//   Gaussian(σ)  N(η, σ²):      B(z) = z/σ²,  D(η) = η²/(2σ²)
//   Ising        Bernoulli:      B(z) = z,     D(η) = log(1 + e^η)
//   Poisson      mean e^η:       B(z) = z,     D(η) = e^η
//   Exponential  rate η > 0:     B(z) = −z,    D(η) = −log η
class FamilySpec {
public:
    static constexpr double kDefaultEtaMax = 700.0;

    static FamilySpec gaussian(double sigma = 1.0);
    static FamilySpec ising();
    static FamilySpec poisson(double eta_max = kDefaultEtaMax);
    static FamilySpec exponential();

    // Accepts "gaussian", "ising", "poisson", "exponential".
    static FamilySpec from_name(std::string_view name, double sigma = 1.0);

    FamilyKind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    double eta_max() const { return eta_max_; }
    std::string_view name() const;

    Support support() const;
    Interval eta_domain() const;
    bool in_support(double z) const;
    bool discrete() const;

    // Sufficient statistic B(z) and base measure C(z).
    double statistic(double z) const;
    double base_measure(double z) const;

    double log_partition(double eta) const;
    double d1(double eta) const;
    double d2(double eta) const;
    double d3(double eta) const;

    // E[Z] under canonical parameter η.
    double mean(double eta) const;

    // Throws DomainError when η is outside eta_domain, OverflowError when a
    // Poisson η exceeds eta_max.
    void check_eta(double eta) const;

    friend bool operator==(const FamilySpec&, const FamilySpec&) = default;

private:
    FamilySpec(FamilyKind kind, double sigma, double eta_max);

    FamilyKind kind_;
    double sigma_;
    double eta_max_;
};

struct DomainConstraint {
    Interval node_bounds = Interval::all();
    EdgeSign edge_sign = EdgeSign::Free;
    double a0 = 1.0;

    static constexpr double kExponentialA0 = 0.05;
    static constexpr double kPoissonA0 = 2.5;

    // Exponential: θs ≥ a0, θst ≥ 0. Poisson: θs ≤ a0, θst ≤ 0. Others free.
    // a0 ≤ 0 selects the family default.
    static DomainConstraint for_family(const FamilySpec& family, double a0 = 0.0);
};

struct DerivativeBounds {
    double kappa1;
    double kappa3;
};

// Bounds on |D''| and |D'''| over the constrained η region.
DerivativeBounds kappa_bounds(const FamilySpec& family, const DomainConstraint& constraint);

struct Violation {
    enum class Kind { Node, Edge, Joint };
    Kind kind;
    int s = -1;
    int t = -1;
    std::string message;
};

// Empty iff node and edge parameters satisfy the constraint (and, for
// Gaussian models, the joint precision is positive definite).
std::vector<Violation> check_domain(std::span<const double> node_params, std::span<const Edge> edges,
                                    const FamilySpec& family, const DomainConstraint& constraint);

std::string_view to_string(EdgeSign sign);

}  // namespace efmrf
