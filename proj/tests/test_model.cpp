#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "efmrf/errors.hpp"
#include "efmrf/model.hpp"
#include "test_util.hpp"

using namespace efmrf;

namespace {

// log ∫ exp(hᵀx − ½ xᵀKx) dx
double gaussian_log_integral(const Eigen::MatrixXd& K, const Eigen::VectorXd& h) {
    const int p = static_cast<int>(K.rows());
    const Eigen::LLT<Eigen::MatrixXd> llt(K);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return 0.5 * p * std::log(2.0 * std::numbers::pi) - 0.5 * logdet + 0.5 * h.dot(llt.solve(h));
}

}  // namespace

TEST_CASE("edges are normalized on construction") {
    PairwiseModel m(FamilySpec::ising(), {0.1, 0.2, 0.3}, {{2, 0, 0.5}, {1, 2, 0.0}, {0, 1, -0.4}});
    REQUIRE(m.edges().size() == 2);
    CHECK(m.edges()[0] == Edge{0, 1, -0.4});
    CHECK(m.edges()[1] == Edge{0, 2, 0.5});
    CHECK(m.edge_weight(2, 0) == 0.5);
    CHECK(m.edge_weight(1, 2) == 0.0);
    CHECK(m.neighbors(0).size() == 2);
    CHECK(m.dense_edges()(2, 0) == 0.5);
    CHECK_THROWS_AS(PairwiseModel(FamilySpec::ising(), {0, 0}, {{0, 0, 1.0}}), DomainError);
    CHECK_THROWS_AS(PairwiseModel(FamilySpec::ising(), {0, 0}, {{0, 1, 1.0}, {1, 0, 2.0}}), DomainError);
    CHECK_THROWS_AS(PairwiseModel(FamilySpec::ising(), {0, 0}, {{0, 5, 1.0}}), DomainError);
    CHECK_THROWS_AS(PairwiseModel(FamilySpec::poisson(), {1, 1}, {{0, 1, 0.3}}), DomainError);
    CHECK_THROWS_AS(PairwiseModel(FamilySpec::exponential(), {0.01, 1}, {}), DomainError);
}

TEST_CASE("canonical parameter and joint weight") {
    PairwiseModel m(FamilySpec::exponential(), {0.5, 0.7, 0.9}, {{0, 1, 0.2}, {1, 2, 0.3}});
    const std::vector<double> x = {1.0, 2.0, 3.0};
    CHECK(m.canonical_param(1, x) == doctest::Approx(0.7 + 0.2 * 1.0 + 0.3 * 3.0));
    const double expected = -(0.5 * 1 + 0.7 * 2 + 0.9 * 3) - (0.2 * 1 * 2 + 0.3 * 2 * 3);
    CHECK(m.joint_log_weight(x) == doctest::Approx(expected));
}

TEST_CASE("Gaussian log-partition matches the closed form") {
    for (double sigma : {1.0, 0.8}) {
        CAPTURE(sigma);
        const auto fam = FamilySpec::gaussian(sigma);
        PairwiseModel m(fam, {0.3, -0.5}, {{0, 1, 0.4}});
        Eigen::MatrixXd K = (Eigen::MatrixXd::Identity(2, 2) - m.dense_edges()) / (sigma * sigma);
        Eigen::VectorXd h(2);
        h << 0.3 / (sigma * sigma), -0.5 / (sigma * sigma);
        const auto A = exact_log_partition(m);
        CHECK(A.value == doctest::Approx(gaussian_log_integral(K, h)).epsilon(1e-8));
    }
}

TEST_CASE("Gaussian p=3 quadrature") {
    PairwiseModel m(FamilySpec::gaussian(), {0.1, 0.0, -0.2}, {{0, 1, 0.3}, {1, 2, 0.3}});
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(3, 3) - m.dense_edges();
    Eigen::VectorXd h(3);
    h << 0.1, 0.0, -0.2;
    CHECK(exact_log_partition(m).value == doctest::Approx(gaussian_log_integral(K, h)).epsilon(1e-6));
}

TEST_CASE("tilted Gaussian partition") {
    PairwiseModel m(FamilySpec::gaussian(), {0.4}, {});
    for (double eta : {-1.0, -0.2, 0.3}) {
        const double expected = 0.5 * std::log(2.0 * std::numbers::pi / (1.0 - 2.0 * eta)) + 0.16 / (2.0 * (1.0 - 2.0 * eta));
        CHECK(exact_log_partition_tilted(m, 0, eta).value == doctest::Approx(expected).epsilon(1e-8));
    }
    CHECK_THROWS_AS(exact_log_partition_tilted(m, 0, 0.5), NotNormalizableError);
    PairwiseModel e(FamilySpec::exponential(), {0.5}, {});
    CHECK_THROWS_AS(exact_log_partition_tilted(e, 0, 0.1), NotNormalizableError);
}

TEST_CASE("exponential log-partition of independent nodes") {
    PairwiseModel m(FamilySpec::exponential(), {0.5, 2.0}, {});
    CHECK(exact_log_partition(m).value == doctest::Approx(-std::log(0.5) - std::log(2.0)).epsilon(1e-7));
}

TEST_CASE("Ising enumeration matches a direct sum") {
    PairwiseModel m(FamilySpec::ising(), {0.3, -0.2, 0.1}, {{0, 1, 1.0}, {1, 2, -0.7}, {0, 2, 0.2}});
    double z = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int c = 0; c < 2; ++c) {
                z += std::exp(0.3 * a - 0.2 * b + 0.1 * c + 1.0 * a * b - 0.7 * b * c + 0.2 * a * c);
            }
        }
    }
    CHECK(exact_log_partition(m).value == doctest::Approx(std::log(z)).epsilon(1e-12));
    const auto pmf = exact_joint_pmf(m);
    double total = 0.0;
    for (double q : pmf.prob) total += q;
    CHECK(total == doctest::Approx(1.0));
    const std::vector<int> state = {1, 1, 0};
    CHECK(pmf.prob[pmf.index(state)] == doctest::Approx(std::exp(0.3 - 0.2 + 1.0) / z));
    CHECK(pmf.state(pmf.index(state)) == state);
    const auto marg = pmf.marginal(1);
    CHECK(marg[0] + marg[1] == doctest::Approx(1.0));
}

TEST_CASE("Poisson enumeration matches a direct sum") {
    PairwiseModel m(FamilySpec::poisson(), {0.5, 0.2}, {{0, 1, -0.1}});
    double z = 0.0;
    for (int a = 0; a <= 60; ++a) {
        for (int b = 0; b <= 60; ++b) {
            z += std::exp(0.5 * a + 0.2 * b - 0.1 * a * b - std::lgamma(a + 1.0) - std::lgamma(b + 1.0));
        }
    }
    const auto A = exact_log_partition(m, 50);
    CHECK(A.value == doctest::Approx(std::log(z)).epsilon(1e-12));
    CHECK(A.tail_bound < 1e-30);
    CHECK_THROWS_AS(exact_log_partition(PairwiseModel(FamilySpec::poisson(), std::vector<double>(5, 0.0), {})),
                    TooLargeError);
}

TEST_CASE("SampleMatrix validates support") {
    Eigen::MatrixXd v(2, 2);
    v << 0, 1, 2, -1;
    CHECK_THROWS_AS(SampleMatrix(FamilySpec::poisson(), v), SupportError);
    CHECK_NOTHROW(SampleMatrix(FamilySpec::gaussian(), v));
    const SampleMatrix X(FamilySpec::gaussian(), v, 9);
    const std::vector<int> rows = {1};
    const auto sub = X.select_rows(rows);
    CHECK(sub.n() == 1);
    CHECK(sub(0, 1) == -1.0);
}

TEST_CASE("node loss, gradient and Hessian agree with finite differences") {
    std::mt19937_64 rng(5);
    for (const auto& fam : {FamilySpec::gaussian(), FamilySpec::gaussian(1.5), FamilySpec::ising(), FamilySpec::poisson(),
                            FamilySpec::exponential()}) {
        CAPTURE(fam.name());
        const auto X = testutil::random_support_matrix(fam, 40, 4, rng);
        for (int trial = 0; trial < 10; ++trial) {
            const int s = trial % 4;
            Eigen::VectorXd theta = Eigen::VectorXd::Random(4) * 0.3;
            if (fam.kind() == FamilyKind::Exponential) {
                theta = theta.cwiseAbs();
                theta[s] = 0.5;
            }
            auto f = [&](const Eigen::VectorXd& t) { return node_nll(X, s, t); };
            const auto g = node_nll_gradient(X, s, theta);
            CHECK(testutil::rel_err(g, testutil::fd_gradient(f, theta, 1e-6)) < 1e-6);
            const auto H = node_nll_hessian(X, s, theta);
            Eigen::MatrixXd Hfd(4, 4);
            for (int k = 0; k < 4; ++k) {
                auto gk = [&](const Eigen::VectorXd& t) { return node_nll_gradient(X, s, t)[k]; };
                Hfd.row(k) = testutil::fd_gradient(gk, theta, 1e-6).transpose();
            }
            CHECK(testutil::rel_err(H, Hfd) < 1e-6);
            CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("node loss matches its definition") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 0, 0, 2, 3, 1;
    const SampleMatrix X(FamilySpec::poisson(), v);
    Eigen::VectorXd theta(2);
    theta << 0.2, -0.3;  // node 0: intercept 0.2, weight on x1 = -0.3
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double eta = 0.2 - 0.3 * v(i, 1);
        expected += -v(i, 0) * eta + std::exp(eta);
    }
    CHECK(node_nll(X, 0, theta) == doctest::Approx(expected / 3.0));
}
