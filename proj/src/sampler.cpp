#include "efmrf/sampler.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "efmrf/errors.hpp"

namespace efmrf {

void GibbsConfig::validate(int p) const {
    if (burn_in < 0) throw ConfigError("burn_in must be nonnegative");
    if (thin < 1) throw ConfigError("thin must be at least 1");
    if (init == GibbsInit::Custom && static_cast<int>(custom_init.size()) != p) {
        throw ConfigError("custom initial state must have length p");
    }
}

double conditional_draw(const FamilySpec& family, double eta, CounterRng& rng) {
    family.check_eta(eta);
    switch (family.kind()) {
        case FamilyKind::Gaussian: {
            std::normal_distribution<double> dist(eta, family.sigma());
            return dist(rng);
        }
        case FamilyKind::Ising: return rng.uniform() < family.mean(eta) ? 1.0 : 0.0;
        case FamilyKind::Poisson: {
            const double mu = std::exp(eta);
            if (mu > kPoissonMeanCap) {
                std::ostringstream os;
                os.precision(17);
                os << "poisson conditional mean " << mu << " exceeds cap " << kPoissonMeanCap;
                throw OverflowError(os.str());
            }
            std::poisson_distribution<long long> dist(mu);
            return static_cast<double>(dist(rng));
        }
        case FamilyKind::Exponential: {
            std::exponential_distribution<double> dist(eta);
            return dist(rng);
        }
    }
    return 0.0;
}

namespace {

std::vector<double> initial_state(const PairwiseModel& model, const GibbsConfig& config) {
    const int p = model.p();
    if (config.init == GibbsInit::Custom) {
        for (int s = 0; s < p; ++s) {
            if (!model.family().in_support(config.custom_init[s])) {
                throw SupportError("custom initial value for node " + std::to_string(s) + " is outside the support");
            }
        }
        return config.custom_init;
    }
    std::vector<double> x(p, 0.0);
    if (config.init == GibbsInit::Zeros) return x;
    const auto& fam = model.family();
    for (int s = 0; s < p; ++s) {
        const double m = fam.mean(model.node_params()[s]);
        switch (fam.kind()) {
            case FamilyKind::Ising: x[s] = m >= 0.5 ? 1.0 : 0.0; break;
            case FamilyKind::Poisson: x[s] = std::floor(std::min(m, kPoissonMeanCap)); break;
            default: x[s] = m; break;
        }
    }
    return x;
}

[[noreturn]] void rethrow_at_sweep(long long sweep, int node) {
    const std::string where = " (gibbs sweep " + std::to_string(sweep) + ", node " + std::to_string(node) + ")";
    try {
        throw;
    } catch (const OverflowError& e) {
        throw OverflowError(e.what() + where);
    } catch (const DomainError& e) {
        throw DomainError(e.what() + where);
    }
}

}  // namespace

SampleMatrix gibbs_sample(const PairwiseModel& model, int n, const GibbsConfig& config) {
    const int p = model.p();
    if (n < 0) throw ConfigError("sample count must be nonnegative");
    config.validate(p);
    CounterRng rng(config.seed, config.chain);
    std::vector<double> x = initial_state(model, config);
    const auto& fam = model.family();
    long long sweep = 0;
    auto run_sweep = [&]() {
        int s = 0;
        try {
            for (s = 0; s < p; ++s) x[s] = conditional_draw(fam, model.canonical_param(s, x), rng);
        } catch (const DomainError&) {
            rethrow_at_sweep(sweep, s);
        } catch (const OverflowError&) {
            rethrow_at_sweep(sweep, s);
        }
        ++sweep;
    };
    for (int b = 0; b < config.burn_in; ++b) run_sweep();
    Eigen::MatrixXd values(n, p);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < config.thin; ++k) run_sweep();
        for (int s = 0; s < p; ++s) values(i, s) = x[s];
    }
    return SampleMatrix(fam, std::move(values), config.seed);
}

std::vector<Edge> lattice_graph(int p) {
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
    if (p < 4 || k * k != p) throw NotSquareError("lattice size " + std::to_string(p) + " is not a perfect square >= 4");
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(2 * k * (k - 1)));
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            const int s = r * k + c;
            if (c + 1 < k) edges.push_back({s, s + 1, 1.0});
            if (r + 1 < k) edges.push_back({s, s + k, 1.0});
        }
    }
    return edges;
}

PairwiseModel build_lattice_model(int p, const FamilySpec& family, double theta_s, double theta_st,
                                  const DomainConstraint& constraint) {
    auto edges = lattice_graph(p);
    for (Edge& e : edges) e.weight = theta_st;
    return PairwiseModel(family, std::vector<double>(p, theta_s), std::move(edges), constraint);
}

}  // namespace efmrf
