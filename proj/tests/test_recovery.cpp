#include <doctest.h>

#include "efmrf/errors.hpp"
#include "efmrf/recovery.hpp"

using namespace efmrf;

namespace {

NeighborhoodFit make_fit(int s, int p, std::vector<std::pair<int, double>> weights) {
    NeighborhoodFit f;
    f.s = s;
    f.p = p;
    f.edge_weights = std::move(weights);
    f.converged = true;
    return f;
}

}  // namespace

TEST_CASE("OR and AND stitching") {
    // 0 picks 1 and 2; 1 picks 0; 2 picks nothing; 3 picks 2
    std::vector<NeighborhoodFit> fits = {make_fit(0, 4, {{1, 0.4}, {2, 0.2}}), make_fit(1, 4, {{0, 0.6}}),
                                         make_fit(2, 4, {}), make_fit(3, 4, {{2, -0.3}})};
    const auto or_graph = stitch(fits, 4, StitchRule::Or);
    REQUIRE(or_graph.size() == 3);
    CHECK(or_graph[0] == Edge{0, 1, 0.5});
    CHECK(or_graph[1] == Edge{0, 2, 0.2});
    CHECK(or_graph[2] == Edge{2, 3, -0.3});
    const auto and_graph = stitch(fits, 4, StitchRule::And);
    REQUIRE(and_graph.size() == 1);
    CHECK(and_graph[0] == Edge{0, 1, 0.5});
}

TEST_CASE("stitching needs every node exactly once") {
    std::vector<NeighborhoodFit> fits = {make_fit(0, 3, {}), make_fit(1, 3, {})};
    CHECK_THROWS_AS(stitch(fits, 3), MissingFitError);
    fits.push_back(make_fit(1, 3, {}));
    CHECK_THROWS_AS(stitch(fits, 3), MissingFitError);
}

TEST_CASE("scoring against the truth") {
    const EdgeSet truth = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
    const auto exact = score({{0, 1, 0.2}, {1, 2, 0.1}, {2, 3, 0.4}}, truth, 4);
    CHECK(exact.exact_recovery);
    CHECK(exact.hamming == 0);
    const auto off = score({{0, 1, 0.2}, {0, 3, 0.1}}, truth, 4);
    CHECK_FALSE(off.exact_recovery);
    CHECK(off.true_positives == 1);
    CHECK(off.false_positives == 1);
    CHECK(off.false_negatives == 2);
    CHECK(off.hamming == 3);
}

TEST_CASE("recover fills per-node neighbourhoods") {
    std::vector<NeighborhoodFit> fits = {make_fit(0, 3, {{1, 0.3}}), make_fit(1, 3, {{0, 0.3}, {2, 0.1}}),
                                         make_fit(2, 3, {})};
    const auto r = recover(fits, 3, StitchRule::And, {{0, 1, 1.0}});
    CHECK(r.exact_recovery);
    REQUIRE(r.per_node_neighborhoods.size() == 3);
    CHECK(r.per_node_neighborhoods[1] == std::vector<int>{0, 2});
    CHECK(parse_rule("and") == StitchRule::And);
    CHECK(to_string(StitchRule::Or) == "or");
    CHECK_THROWS_AS(parse_rule("xor"), ParseError);
}
