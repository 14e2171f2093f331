#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "efmrf/estimator.hpp"
#include "efmrf/model.hpp"
#include "efmrf/recovery.hpp"
#include "efmrf/selection.hpp"

namespace efmrf {

// 17 significant digits ("%.17g"); strtod reads it back to the same double.
std::string format_double(double v);

// Whole-token parse; throws ParseError naming `what` on junk or trailing text.
double parse_double(std::string_view token, std::string_view what = "value");
long long parse_integer(std::string_view token, std::string_view what = "value");

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Model files:
//   family poisson
//   sigma 1                (Gaussian only)
//   p 4
//   a0 2.5
//   node <s> <theta_s>     one per node
//   edge <s> <t> <theta_st>
// Blank lines and '#' comments are ignored.
void write_model(std::ostream& os, const PairwiseModel& model);
PairwiseModel read_model(std::istream& is);

// Samples: "#<family> <p> <n> <seed>" then n tab-separated rows.
void write_samples(std::ostream& os, const SampleMatrix& X);
SampleMatrix read_samples(std::istream& is);

// One record per node, tab-separated with a header line:
//   node lambda intercept edges kkt_gap iterations converged
// edges is "t:w;t:w" or "-" when empty.
void write_fits(std::ostream& os, const std::vector<NeighborhoodFit>& fits);
std::vector<NeighborhoodFit> read_fits(std::istream& is);

// "s t weight" per line, sorted by (s, t).
void write_edge_list(std::ostream& os, const EdgeSet& edges);
EdgeSet read_edge_list(std::istream& is);

// {"p": .., "edges": [{"s","t","weight"}], "adjacency": [[..], ..]}
void write_edges_json(std::ostream& os, const EdgeSet& edges, int p);

// lambda,D,D_monotone,chosen
void write_stars_csv(std::ostream& os, const StarsResult& result);

struct IngestOptions {
    // Exponential only: x ← x − min(x) per column.
    bool shift_nonneg = false;
    double integrality_tol = 1e-9;
};

// Headered TSV or CSV of numerics (separator detected from the first data
// line; a non-numeric first line is a header; '#' lines are skipped).
// Poisson and Ising values within integrality_tol of an integer are rounded.
SampleMatrix ingest_matrix(std::istream& is, const FamilySpec& family, const IngestOptions& opts = {});
SampleMatrix ingest_matrix(const std::filesystem::path& path, const FamilySpec& family,
                           const IngestOptions& opts = {});

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories; throws IoError with the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace efmrf
