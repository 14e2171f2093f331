#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "efmrf/errors.hpp"
#include "efmrf/experiments.hpp"
#include "efmrf/io.hpp"
#include "test_util.hpp"

using namespace efmrf;

namespace {

ExperimentConfig tiny() {
    auto c = ExperimentConfig::desk_poisson();
    c.p_list = {4, 9};
    c.n_grid = {60, 200};
    c.replicates = 3;
    c.burn_in = 20;
    c.thin = 2;
    c.lambda_c = 2.4;
    return c;
}

TrialRecord rec(int p, int n, int rep, bool ok, int hamming) {
    TrialRecord t;
    t.family = "poisson";
    t.p = p;
    t.n = n;
    t.replicate = rep;
    t.report.exact_recovery = ok;
    t.report.hamming = hamming;
    return t;
}

}  // namespace

TEST_CASE("geometric grid") {
    const auto g = geometric_grid(200, 6000, 10);
    CHECK(g == std::vector<int>{200, 292, 426, 621, 907, 1323, 1931, 2818, 4112, 6000});
    CHECK(geometric_grid(5, 6, 5) == std::vector<int>{5, 6});
    CHECK_THROWS_AS(geometric_grid(10, 5, 3), ConfigError);
}

TEST_CASE("trial seeds differ by every coordinate") {
    const auto f = FamilySpec::poisson();
    const auto base = trial_seed(1, f, 16, 200, 0);
    CHECK(base == trial_seed(1, f, 16, 200, 0));
    CHECK(base != trial_seed(2, f, 16, 200, 0));
    CHECK(base != trial_seed(1, FamilySpec::exponential(), 16, 200, 0));
    CHECK(base != trial_seed(1, f, 36, 200, 0));
    CHECK(base != trial_seed(1, f, 16, 292, 0));
    CHECK(base != trial_seed(1, f, 16, 200, 1));
}

TEST_CASE("trials are deterministic and errors are captured") {
    const auto c = tiny();
    const auto a = run_trial(c, 9, 200, 1, 2.4);
    const auto b = run_trial(c, 9, 200, 1, 2.4);
    CHECK(a.error.empty());
    CHECK(a.seed == b.seed);
    CHECK(a.report.estimated_edges == b.report.estimated_edges);
    CHECK(a.lambda == doctest::Approx(2.4 * std::exp((2.5 + 1.0) / 2.0) * std::sqrt(std::log(9.0) / 200.0)));
    const auto tiny_n = run_trial(c, 9, 2, 0, 2.4);
    CHECK(tiny_n.p == 9);  // either a valid record or a captured error, never a throw
}

TEST_CASE("aggregation is order independent") {
    std::vector<TrialRecord> trials = {rec(16, 200, 0, true, 0), rec(16, 200, 1, false, 2), rec(16, 400, 0, true, 0),
                                       rec(16, 400, 1, true, 0)};
    auto t = trials.back();
    t.error = "boom";
    t.replicate = 2;
    t.n = 200;
    trials.push_back(t);
    const auto table = aggregate(trials, 3, 1.0);
    REQUIRE(table.size() == 2);
    CHECK(table[0].n == 200);
    CHECK(table[0].success_count == 1);
    CHECK(table[0].success_prob == doctest::Approx(1.0 / 3.0));
    CHECK(table[0].mean_hamming == doctest::Approx(1.0));
    CHECK(table[0].beta == doctest::Approx(200.0 / std::log(16.0)));
    std::reverse(trials.begin(), trials.end());
    CHECK(aggregate(trials, 3, 1.0) == table);

    std::ostringstream os;
    write_success_csv(os, table);
    std::istringstream is(os.str());
    CHECK(parse_success_csv(is) == table);
}

TEST_CASE("curve summaries") {
    SuccessTable table;
    auto row = [&](int p, int n, double prob) {
        SuccessRow r;
        r.family = "poisson";
        r.p = p;
        r.n = n;
        r.replicates = 20;
        r.success_prob = prob;
        table.push_back(r);
    };
    row(16, 100, 0.2);
    row(16, 200, 0.85);
    row(16, 400, 0.8);
    row(64, 100, 0.0);
    row(64, 200, 0.5);
    row(64, 400, 0.9);
    CHECK(n_at_level(table, 16) == 200);
    CHECK(n_at_level(table, 64) == 400);
    CHECK_FALSE(n_at_level(table, 64, 0.95).has_value());
    const auto ratio = alignment_ratio(table);
    REQUIRE(ratio.has_value());
    CHECK(*ratio == doctest::Approx((400 / std::log(64.0)) / (200 / std::log(16.0))));
    const auto mono = check_monotone(table);
    CHECK(mono.largest_drop == doctest::Approx(0.05));
    CHECK(mono.bound == doctest::Approx(2.0 * std::sqrt(0.25 / 20.0)));
    CHECK(mono.ok);
}

TEST_CASE("emitting an empty table still writes every file") {
    testutil::TempDir dir;
    emit_outputs({}, dir.path());
    for (const char* name : {"success.csv", "curves_raw.csv", "curves_rescaled.csv", "curves_raw.svg",
                             "curves_rescaled.svg"}) {
        CHECK(std::filesystem::exists(dir / name));
    }
}

TEST_CASE("config round-trips through key-values") {
    auto c = tiny();
    c.lambda_rule = LambdaRule::Stars;
    c.rule = StitchRule::And;
    const auto kv = c.to_key_values();
    const auto back = ExperimentConfig::from_key_values(kv);
    const auto kv_back = back.to_key_values();
    CHECK(kv_back.entries() == kv.entries());
    CHECK(back.p_list == c.p_list);
    CHECK(back.n_grid == c.n_grid);

    CHECK_THROWS_AS(ExperimentConfig::from_key_values(KeyValues::parse_string("bogus = 1\n")), ConfigError);
    auto bad = tiny();
    bad.p_list = {15};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    auto out = tiny();
    out.theta_st = 0.3;
    CHECK_THROWS(out.validate());
}

TEST_CASE("small experiment end to end") {
    auto c = tiny();
    c.p_list = {4};
    c.replicates = 2;
    c.jobs = 2;
    const auto a = run_experiment(c);
    c.jobs = 1;
    const auto b = run_experiment(c);
    CHECK(a.table == b.table);
    CHECK(a.trials.size() == 4);
    testutil::TempDir d1, d2;
    emit_experiment(a, d1.path());
    emit_experiment(b, d2.path());
    for (const char* name : {"success.csv", "trials.csv", "metadata.txt", "curves_raw.svg"}) {
        CHECK(read_text_file(d1 / name) == read_text_file(d2 / name));
    }
}
