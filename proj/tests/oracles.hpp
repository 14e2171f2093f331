#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "efmrf/model.hpp"

namespace oracle {

struct LassoSolution {
    double objective = std::numeric_limits<double>::infinity();
    Eigen::VectorXd theta;  // node-vector layout
};

// Exact Gaussian (σ = 1) node lasso by enumerating active sets and sign
// patterns: on each (A, z) solve the stationarity system with an unpenalized
// intercept and keep sign-consistent solutions. The smallest objective among
// them is the global minimum.
inline LassoSolution gaussian_lasso_enumeration(const efmrf::SampleMatrix& X, int s, double lambda) {
    const int n = X.n();
    const int p = X.p();
    std::vector<int> others;
    for (int t = 0; t < p; ++t) {
        if (t != s) others.push_back(t);
    }
    const int m = static_cast<int>(others.size());
    const Eigen::VectorXd y = X.values().col(s);
    LassoSolution best;
    for (int mask = 0; mask < (1 << m); ++mask) {
        std::vector<int> active;
        for (int k = 0; k < m; ++k) {
            if (mask & (1 << k)) active.push_back(others[k]);
        }
        const int a = static_cast<int>(active.size());
        Eigen::MatrixXd Z(n, a + 1);
        Z.col(0).setOnes();
        for (int k = 0; k < a; ++k) Z.col(k + 1) = X.values().col(active[k]);
        const Eigen::MatrixXd G = Z.transpose() * Z / n;
        const Eigen::VectorXd c = Z.transpose() * y / n;
        for (int signs = 0; signs < (1 << a); ++signs) {
            Eigen::VectorXd rhs = c;
            for (int k = 0; k < a; ++k) rhs[k + 1] -= lambda * ((signs & (1 << k)) ? 1.0 : -1.0);
            const Eigen::VectorXd w = G.ldlt().solve(rhs);
            bool consistent = true;
            for (int k = 0; k < a && consistent; ++k) {
                const double sg = (signs & (1 << k)) ? 1.0 : -1.0;
                consistent = w[k + 1] * sg > 0.0;
            }
            if (!consistent) continue;
            Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
            theta[s] = w[0];
            for (int k = 0; k < a; ++k) theta[active[k]] = w[k + 1];
            const Eigen::VectorXd r = y - Z * w;
            double obj = r.squaredNorm() / (2.0 * n) - y.squaredNorm() / (2.0 * n);
            for (int k = 0; k < a; ++k) obj += lambda * std::abs(w[k + 1]);
            if (obj < best.objective) {
                best.objective = obj;
                best.theta = theta;
            }
        }
    }
    return best;
}

// Total variation distance between an empirical pmf (counts) and a pmf.
inline double tv_distance(const std::vector<double>& counts, const std::vector<double>& pmf) {
    double total = 0.0;
    for (double c : counts) total += c;
    double tv = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) tv += std::abs(counts[k] / total - pmf[k]);
    return 0.5 * tv;
}

}  // namespace oracle
