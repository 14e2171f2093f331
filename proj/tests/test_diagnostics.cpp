#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "efmrf/diagnostics.hpp"
#include "efmrf/sampler.hpp"
#include "test_util.hpp"

using namespace efmrf;

TEST_CASE("Fisher information is the symmetric PSD node Hessian") {
    const auto fam = FamilySpec::poisson();
    const auto model = build_lattice_model(9, fam, 1.0, -0.2, DomainConstraint::for_family(fam));
    GibbsConfig g;
    g.seed = 4;
    g.burn_in = 50;
    g.thin = 2;
    const auto X = gibbs_sample(model, 300, g);
    for (int s = 0; s < 9; ++s) {
        const auto Q = fisher_info(model, X, s);
        CHECK((Q - Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
        CHECK(eig.eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("Gaussian Fisher information is the second-moment matrix") {
    std::mt19937_64 rng(2);
    const auto X = testutil::random_support_matrix(FamilySpec::gaussian(), 100, 3, rng);
    PairwiseModel model(FamilySpec::gaussian(), {0.0, 0.0, 0.0}, {{0, 1, 0.3}});
    const auto Q = fisher_info(model, X, 0);
    Eigen::MatrixXd Z = X.values();
    Z.col(0).setOnes();
    const Eigen::MatrixXd M = Z.transpose() * Z / 100.0;
    CHECK((Q - M).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("incoherence of independent Ising nodes is small") {
    PairwiseModel model(FamilySpec::ising(), std::vector<double>(10, 0.0), {{0, 1, 0.8}});
    GibbsConfig g;
    g.seed = 8;
    g.thin = 1;
    const auto X = gibbs_sample(model, 10000, g);
    const auto r = check_conditions(model, X, 0, 1);
    CHECK_FALSE(r.singular_qss);
    CHECK(r.support == std::vector<int>{0, 1});
    CHECK(r.incoherence < 0.2);
    CHECK(r.alpha_implied == doctest::Approx(1.0 - r.incoherence));
    CHECK(r.lambda_min_qss > 0.0);
}

TEST_CASE("a fully connected node has nothing to be incoherent with") {
    PairwiseModel model(FamilySpec::gaussian(), {0.0, 0.0, 0.0}, {{0, 1, 0.3}, {0, 2, 0.3}});
    std::mt19937_64 rng(3);
    const auto X = testutil::random_support_matrix(FamilySpec::gaussian(), 200, 3, rng);
    CHECK(check_conditions(model, X, 0, 2).incoherence == 0.0);
}

TEST_CASE("conditions are consistent under relabelling") {
    PairwiseModel model(FamilySpec::gaussian(), {0.1, 0.0, -0.1, 0.0}, {{0, 1, 0.3}, {1, 2, 0.3}, {2, 3, 0.3}});
    GibbsConfig g;
    g.seed = 1;
    g.burn_in = 50;
    const auto X = gibbs_sample(model, 500, g);
    // reverse the node order
    PairwiseModel rev(FamilySpec::gaussian(), {0.0, -0.1, 0.0, 0.1}, {{3, 2, 0.3}, {2, 1, 0.3}, {1, 0, 0.3}});
    const SampleMatrix Xr(FamilySpec::gaussian(), X.values().rowwise().reverse());
    for (int s = 0; s < 4; ++s) {
        const auto a = check_conditions(model, X, s, 2);
        const auto b = check_conditions(rev, Xr, 3 - s, 2);
        CHECK(a.incoherence == doctest::Approx(b.incoherence).epsilon(1e-10));
        CHECK(a.lambda_min_qss == doctest::Approx(b.lambda_min_qss).epsilon(1e-10));
    }
}

TEST_CASE("tail records and the bounded event") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(100, 2);
    v(0, 1) = 100.0;
    const SampleMatrix X(FamilySpec::poisson(), v);
    const auto tails = tail_checks(X);
    REQUIRE(tails.size() == 2);
    CHECK(tails[0].bounded_event);
    CHECK_FALSE(tails[1].bounded_event);
    CHECK(tails[1].max_abs == 100.0);
    CHECK(tails[0].exceed_fraction == 0.0);
    CHECK(tails[1].exceed_fraction == doctest::Approx(0.1));
    CHECK_FALSE(bounded_event_holds(X));
}

TEST_CASE("moment constants and the condition CSV") {
    PairwiseModel model(FamilySpec::ising(), {0.2, -0.1}, {{0, 1, 0.5}});
    GibbsConfig g;
    g.seed = 5;
    const auto X = gibbs_sample(model, 500, g);
    const auto mc = estimate_moment_constants(model, X);
    CHECK(mc.kappa_m == doctest::Approx(X.values().colwise().mean().maxCoeff()));
    CHECK(mc.kappa_h_joint > 0.0);
    CHECK(mc.kappa_h_joint <= 0.25 + 1e-6);
    std::vector<ConditionReport> reports = {check_conditions(model, X, 0, 1), check_conditions(model, X, 1, 1)};
    std::ostringstream os;
    write_condition_csv(os, reports, &mc);
    CHECK(os.str().rfind("node,quantity,value\n", 0) == 0);
    CHECK(os.str().find("all,kappa_m,") != std::string::npos);
}
