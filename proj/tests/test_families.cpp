#include <doctest.h>

#include <cmath>
#include <random>

#include "efmrf/errors.hpp"
#include "efmrf/families.hpp"
#include "test_util.hpp"

using namespace efmrf;

namespace {

std::vector<FamilySpec> all_families() {
    return {FamilySpec::gaussian(), FamilySpec::gaussian(0.7), FamilySpec::ising(), FamilySpec::poisson(),
            FamilySpec::exponential()};
}

double random_eta(const FamilySpec& f, std::mt19937_64& rng) {
    if (f.kind() == FamilyKind::Exponential) return std::uniform_real_distribution<double>(0.2, 5.0)(rng);
    return std::uniform_real_distribution<double>(-4.0, 4.0)(rng);
}

}  // namespace

TEST_CASE("derivatives of D match finite differences") {
    std::mt19937_64 rng(11);
    for (const auto& f : all_families()) {
        CAPTURE(f.name());
        for (int k = 0; k < 100; ++k) {
            const double eta = random_eta(f, rng);
            const double h = 1e-5;
            auto D = [&](double e) { return f.log_partition(e); };
            auto d1 = [&](double e) { return f.d1(e); };
            auto d2 = [&](double e) { return f.d2(e); };
            CHECK(testutil::rel_err(f.d1(eta), testutil::central(D, eta, h)) < 1e-5);
            CHECK(testutil::rel_err(f.d2(eta), testutil::central(d1, eta, h)) < 1e-5);
            CHECK(testutil::rel_err(f.d3(eta), testutil::central(d2, eta, h)) < 1e-5);
        }
    }
}

TEST_CASE("mean equals E[B]-derivative convention") {
    // E[B(Z)] = D'(η); the mean of Z follows from the statistic's sign/scale.
    for (double eta : {-1.5, 0.3, 2.0}) {
        CHECK(FamilySpec::gaussian(2.0).mean(eta) == doctest::Approx(FamilySpec::gaussian(2.0).d1(eta) * 4.0));
        CHECK(FamilySpec::ising().mean(eta) == doctest::Approx(FamilySpec::ising().d1(eta)));
        CHECK(FamilySpec::poisson().mean(eta) == doctest::Approx(std::exp(eta)));
    }
    CHECK(FamilySpec::exponential().mean(0.5) == doctest::Approx(2.0));
    CHECK(FamilySpec::exponential().d1(0.5) == doctest::Approx(-2.0));
}

TEST_CASE("Ising log-partition is stable for large |eta|") {
    const auto f = FamilySpec::ising();
    CHECK(f.log_partition(800.0) == doctest::Approx(800.0));
    CHECK(f.log_partition(-800.0) == doctest::Approx(0.0));
    CHECK(std::isfinite(f.d2(800.0)));
    CHECK(f.log_partition(0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("eta domain errors") {
    CHECK_THROWS_AS(FamilySpec::exponential().log_partition(0.0), DomainError);
    CHECK_THROWS_AS(FamilySpec::exponential().d2(-1.0), DomainError);
    CHECK_THROWS_AS(FamilySpec::poisson().log_partition(701.0), OverflowError);
    CHECK_NOTHROW(FamilySpec::poisson().log_partition(699.0));
    CHECK_THROWS_AS(FamilySpec::gaussian().d1(std::nan("")), DomainError);
    CHECK_THROWS_AS(FamilySpec::gaussian(0.0), DomainError);
    CHECK_THROWS_AS(FamilySpec::from_name("gamma"), ParseError);
}

TEST_CASE("support membership") {
    CHECK(FamilySpec::ising().in_support(1.0));
    CHECK_FALSE(FamilySpec::ising().in_support(-1.0));
    CHECK(FamilySpec::poisson().in_support(3.0));
    CHECK_FALSE(FamilySpec::poisson().in_support(2.5));
    CHECK_FALSE(FamilySpec::poisson().in_support(-1.0));
    CHECK(FamilySpec::exponential().in_support(0.0));
    CHECK_FALSE(FamilySpec::exponential().in_support(-1e-9));
    CHECK_FALSE(FamilySpec::gaussian().in_support(INFINITY));
}

TEST_CASE("kappa bounds") {
    const auto g = FamilySpec::gaussian();
    const auto i = FamilySpec::ising();
    const auto p = FamilySpec::poisson();
    const auto e = FamilySpec::exponential();
    auto kb = kappa_bounds(g, DomainConstraint::for_family(g));
    CHECK(kb.kappa1 == 1.0);
    CHECK(kb.kappa3 == 0.0);
    kb = kappa_bounds(i, DomainConstraint::for_family(i));
    CHECK(kb.kappa1 == 0.25);
    CHECK(kb.kappa3 == 0.25);
    const auto ce = DomainConstraint::for_family(e, 0.5);
    kb = kappa_bounds(e, ce);
    CHECK(kb.kappa1 == doctest::Approx(4.0));
    CHECK(kb.kappa3 == doctest::Approx(16.0));
    const auto cp = DomainConstraint::for_family(p, 1.0);
    kb = kappa_bounds(p, cp);
    CHECK(kb.kappa1 == doctest::Approx(std::exp(2.0)));
    CHECK(kb.kappa3 == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("family-default constraints") {
    const auto ce = DomainConstraint::for_family(FamilySpec::exponential());
    CHECK(ce.edge_sign == EdgeSign::NonNegative);
    CHECK(ce.node_bounds.contains(ce.a0));
    CHECK_FALSE(ce.node_bounds.contains(ce.a0 - 1e-12));
    const auto cp = DomainConstraint::for_family(FamilySpec::poisson());
    CHECK(cp.edge_sign == EdgeSign::NonPositive);
    CHECK(cp.node_bounds.contains(cp.a0));
    CHECK_FALSE(cp.node_bounds.contains(cp.a0 + 1e-12));
    CHECK(DomainConstraint::for_family(FamilySpec::ising()).edge_sign == EdgeSign::Free);
}

TEST_CASE("check_domain reports sign and bound violations") {
    const auto p = FamilySpec::poisson();
    const auto cp = DomainConstraint::for_family(p);
    std::vector<double> theta = {1.0, 1.0, 3.0};
    std::vector<Edge> edges = {{0, 1, -0.1}, {1, 2, 0.2}};
    const auto v = check_domain(theta, edges, p, cp);
    REQUIRE(v.size() == 2);
    bool node_seen = false, edge_seen = false;
    for (const auto& x : v) {
        if (x.kind == Violation::Kind::Node) node_seen = x.s == 2;
        if (x.kind == Violation::Kind::Edge) edge_seen = x.s == 1 && x.t == 2;
    }
    CHECK(node_seen);
    CHECK(edge_seen);

    const auto g = FamilySpec::gaussian();
    std::vector<Edge> strong = {{0, 1, 0.9}, {1, 2, 0.9}};
    CHECK_FALSE(check_domain(std::vector<double>{0, 0, 0}, strong, g, DomainConstraint::for_family(g)).empty());
    std::vector<Edge> weak = {{0, 1, 0.4}, {1, 2, 0.4}};
    CHECK(check_domain(std::vector<double>{0, 0, 0}, weak, g, DomainConstraint::for_family(g)).empty());
}
