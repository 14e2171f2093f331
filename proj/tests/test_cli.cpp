#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "efmrf/cli.hpp"
#include "efmrf/io.hpp"
#include "test_util.hpp"

using namespace efmrf;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "efmrf");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const char* kChain =
    "family gaussian\nsigma 1\np 4\n"
    "node 0 0\nnode 1 0\nnode 2 0\nnode 3 0\n"
    "edge 0 1 0.4\nedge 1 2 0.4\nedge 2 3 0.4\n";

}  // namespace

TEST_CASE("sample, fit and select are reproducible") {
    testutil::TempDir dir;
    write_text_file(dir / "chain.model", kChain);
    const std::string model = (dir / "chain.model").string();
    for (const char* name : {"a.tsv", "b.tsv"}) {
        const auto r = run({"sample", "--model", model, "--n", "1500", "--seed", "9", "--out", (dir / name).string()});
        CHECK(r.code == kExitOk);
    }
    CHECK(read_text_file(dir / "a.tsv") == read_text_file(dir / "b.tsv"));

    const std::string data = (dir / "a.tsv").string();
    const auto f = run({"fit", "--data", data, "--family", "gaussian", "--lambda", "0.1", "--out", (dir / "fit").string()});
    REQUIRE(f.code == kExitOk);
    std::istringstream edges(read_text_file(dir / "fit/edges.txt"));
    const auto graph = read_edge_list(edges);
    REQUIRE(graph.size() == 3);
    CHECK(graph[0].s == 0);
    CHECK(graph[0].t == 1);
    CHECK(graph[2].t == 3);

    const auto g = run({"fit", "--data", data, "--family", "gaussian", "--lambda-grid", "0.3,0.1", "--out",
                        (dir / "path").string()});
    CHECK(g.code == kExitOk);
    CHECK(std::filesystem::exists(dir / "path/path.csv"));

    for (const char* name : {"s1", "s2"}) {
        const auto s = run({"select", "--data", data, "--family", "gaussian", "--subsamples", "5", "--grid-count",
                            "6", "--seed", "3", "--out", (dir / name).string()});
        CHECK(s.code == kExitOk);
    }
    CHECK(read_text_file(dir / "s1/stars.csv") == read_text_file(dir / "s2/stars.csv"));
    CHECK(read_text_file(dir / "s1/edges.json") == read_text_file(dir / "s2/edges.json"));

    const auto d = run({"diagnose", "--model", model, "--data", data, "--out", (dir / "diag.csv").string()});
    CHECK(d.code == kExitOk);
    CHECK(read_text_file(dir / "diag.csv").rfind("node,quantity,value", 0) == 0);
}

TEST_CASE("exit codes") {
    testutil::TempDir dir;
    CHECK(run({"nosuch"}).code == kExitUsage);
    CHECK(run({"fit", "--family", "poisson"}).code == kExitUsage);
    write_text_file(dir / "frac.tsv", "a\tb\n0.5\t1\n");
    const auto r = run({"fit", "--data", (dir / "frac.tsv").string(), "--family", "poisson", "--lambda", "0.1",
                        "--out", (dir / "o").string()});
    CHECK(r.code == kExitData);
    CHECK_FALSE(r.err.empty());
    write_text_file(dir / "ok.tsv", "a\tb\n0.5\t1\n1.5\t-1\n0.2\t0.3\n");
    const auto c = run({"fit", "--data", (dir / "ok.tsv").string(), "--family", "gaussian", "--lambda", "0.001",
                        "--max-iters", "1", "--tol", "1e-14", "--out", (dir / "c").string()});
    CHECK(c.code == kExitConvergence);
    CHECK(std::filesystem::exists(dir / "c/fits.tsv"));
}

TEST_CASE("experiment subcommand writes the result schema") {
    testutil::TempDir dir;
    write_text_file(dir / "exp.cfg",
                    "preset = desk_poisson\np = 4\nn_grid = 60, 120\nreplicates = 2\nburn_in = 10\nthin = 2\n"
                    "lambda_c = 2.4\n");
    for (const char* name : {"e1", "e2"}) {
        const auto r = run({"experiment", "--config", (dir / "exp.cfg").string(), "--out", (dir / name).string()});
        REQUIRE(r.code == kExitOk);
    }
    const auto success = read_text_file(dir / "e1/success.csv");
    CHECK(success.rfind("family,p,n,beta,success_count,replicates,success_prob,mean_hamming\n", 0) == 0);
    for (const char* name : {"success.csv", "trials.csv", "metadata.txt", "curves_raw.csv", "curves_rescaled.svg"}) {
        CHECK(read_text_file(dir / "e1" / name) == read_text_file(dir / "e2" / name));
    }
}
