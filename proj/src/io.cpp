#include "efmrf/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include "efmrf/errors.hpp"

namespace efmrf {

namespace {

bool skip_line(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

std::vector<std::string> words(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream ss{std::string(line)};
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::optional<double> try_parse_double(std::string_view token) {
    try {
        return parse_double(token);
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view token, std::string_view what) {
    const std::string s(trim(token));
    if (s.empty()) throw ParseError("empty " + std::string(what));
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ParseError("not a number for " + std::string(what) + ": '" + s + "'");
    if (errno == ERANGE && std::isinf(v)) throw ParseError(std::string(what) + " out of range: '" + s + "'");
    return v;
}

long long parse_integer(std::string_view token, std::string_view what) {
    const auto s = trim(token);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("not an integer for " + std::string(what) + ": '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

void write_model(std::ostream& os, const PairwiseModel& model) {
    const FamilySpec& f = model.family();
    os << "family " << f.name() << '\n';
    if (f.kind() == FamilyKind::Gaussian) os << "sigma " << format_double(f.sigma()) << '\n';
    os << "p " << model.p() << '\n';
    os << "a0 " << format_double(model.constraint().a0) << '\n';
    for (int s = 0; s < model.p(); ++s) os << "node " << s << ' ' << format_double(model.node_params()[s]) << '\n';
    for (const Edge& e : model.edges()) os << "edge " << e.s << ' ' << e.t << ' ' << format_double(e.weight) << '\n';
}

PairwiseModel read_model(std::istream& is) {
    std::string family_name;
    double sigma = 1.0;
    double a0 = 0.0;
    long long p = -1;
    std::vector<std::optional<double>> nodes;
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto w = words(line);
        const std::string& key = w[0];
        auto expect = [&](std::size_t count) {
            if (w.size() != count) throw ParseError(at_line(line_no) + "'" + key + "' expects " + std::to_string(count - 1) + " fields");
        };
        try {
            if (key == "family") {
                expect(2);
                family_name = w[1];
            } else if (key == "sigma") {
                expect(2);
                sigma = parse_double(w[1], "sigma");
            } else if (key == "a0") {
                expect(2);
                a0 = parse_double(w[1], "a0");
            } else if (key == "p") {
                expect(2);
                p = parse_integer(w[1], "p");
                if (p < 1 || p > 1000000) throw ParseError("p out of range");
                nodes.assign(static_cast<std::size_t>(p), std::nullopt);
            } else if (key == "node") {
                expect(3);
                if (p < 0) throw ParseError("'node' before 'p'");
                const long long s = parse_integer(w[1], "node index");
                if (s < 0 || s >= p) throw ParseError("node index out of range");
                if (nodes[s]) throw ParseError("duplicate node " + w[1]);
                nodes[s] = parse_double(w[2], "theta_s");
            } else if (key == "edge") {
                expect(4);
                if (p < 0) throw ParseError("'edge' before 'p'");
                const long long s = parse_integer(w[1], "edge endpoint");
                const long long t = parse_integer(w[2], "edge endpoint");
                if (s < 0 || s >= p || t < 0 || t >= p) throw ParseError("edge endpoint out of range");
                edges.push_back({static_cast<int>(s), static_cast<int>(t), parse_double(w[3], "theta_st")});
            } else {
                throw ParseError("unknown key '" + key + "'");
            }
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            if (msg.rfind("line ", 0) == 0) throw;
            throw ParseError(at_line(line_no) + msg);
        }
    }
    if (family_name.empty()) throw ParseError("model file has no 'family' line");
    if (p < 0) throw ParseError("model file has no 'p' line");
    std::vector<double> theta(static_cast<std::size_t>(p));
    for (long long s = 0; s < p; ++s) {
        if (!nodes[s]) throw ParseError("model file is missing node " + std::to_string(s));
        theta[s] = *nodes[s];
    }
    FamilySpec family = [&] {
        try {
            return FamilySpec::from_name(family_name, sigma);
        } catch (const Error& e) {
            throw ParseError(e.what());
        }
    }();
    return PairwiseModel(family, std::move(theta), std::move(edges), DomainConstraint::for_family(family, a0));
}

void write_samples(std::ostream& os, const SampleMatrix& X) {
    os << '#' << X.family().name() << ' ' << X.p() << ' ' << X.n() << ' ' << X.seed() << '\n';
    for (int i = 0; i < X.n(); ++i) {
        for (int s = 0; s < X.p(); ++s) {
            if (s) os << '\t';
            os << format_double(X(i, s));
        }
        os << '\n';
    }
}

SampleMatrix read_samples(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.empty() || line.front() != '#') {
        throw ParseError("line 1: sample file must start with '#family p n seed'");
    }
    const auto head = words(std::string_view(line).substr(1));
    if (head.size() != 4) throw ParseError("line 1: expected '#family p n seed'");
    const FamilySpec family = FamilySpec::from_name(head[0]);
    const long long p = parse_integer(head[1], "p");
    const long long n = parse_integer(head[2], "n");
    const auto seed = static_cast<std::uint64_t>(std::stoull(head[3]));
    if (p < 1 || n < 0) throw ParseError("line 1: bad dimensions");
    Eigen::MatrixXd values(n, p);
    for (long long i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw ParseError("sample file ends after " + std::to_string(i) + " of " + std::to_string(n) + " rows");
        const auto cells = split(trim(line), '\t');
        if (static_cast<long long>(cells.size()) != p) {
            throw ParseError(at_line(i + 2) + "expected " + std::to_string(p) + " columns, found " + std::to_string(cells.size()));
        }
        for (long long s = 0; s < p; ++s) {
            values(i, s) = parse_double(cells[s], "line " + std::to_string(i + 2) + " column " + std::to_string(s + 1));
        }
    }
    while (std::getline(is, line)) {
        if (!trim(line).empty()) throw ParseError("sample file has more rows than its header declares");
    }
    return SampleMatrix(family, std::move(values), seed);
}

void write_fits(std::ostream& os, const std::vector<NeighborhoodFit>& fits) {
    os << "node\tlambda\tintercept\tedges\tkkt_gap\titerations\tconverged\n";
    for (const auto& f : fits) {
        os << f.s << '\t' << format_double(f.lambda) << '\t' << format_double(f.intercept) << '\t';
        if (f.edge_weights.empty()) os << '-';
        for (std::size_t k = 0; k < f.edge_weights.size(); ++k) {
            if (k) os << ';';
            os << f.edge_weights[k].first << ':' << format_double(f.edge_weights[k].second);
        }
        os << '\t' << format_double(f.kkt_gap) << '\t' << f.iterations << '\t' << (f.converged ? 1 : 0) << '\n';
    }
}

std::vector<NeighborhoodFit> read_fits(std::istream& is) {
    std::vector<NeighborhoodFit> out;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line) || trim(line) != "node\tlambda\tintercept\tedges\tkkt_gap\titerations\tconverged") {
        throw ParseError("line 1: missing fits header");
    }
    ++line_no;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto c = split(trim(line), '\t');
        if (c.size() != 7) throw ParseError(at_line(line_no) + "expected 7 fields");
        NeighborhoodFit f;
        f.s = static_cast<int>(parse_integer(c[0], "node"));
        f.lambda = parse_double(c[1], "lambda");
        f.intercept = parse_double(c[2], "intercept");
        if (c[3] != "-") {
            for (const auto& pair : split(c[3], ';')) {
                const auto kv = split(pair, ':');
                if (kv.size() != 2) throw ParseError(at_line(line_no) + "bad edge entry '" + pair + "'");
                f.edge_weights.emplace_back(static_cast<int>(parse_integer(kv[0], "neighbour")), parse_double(kv[1], "weight"));
            }
        }
        f.kkt_gap = parse_double(c[4], "kkt_gap");
        f.iterations = static_cast<int>(parse_integer(c[5], "iterations"));
        f.converged = parse_integer(c[6], "converged") != 0;
        out.push_back(std::move(f));
    }
    const int p = static_cast<int>(out.size());
    for (auto& f : out) f.p = p;
    return out;
}

void write_edge_list(std::ostream& os, const EdgeSet& edges) {
    EdgeSet sorted = edges;
    std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) { return std::tie(a.s, a.t) < std::tie(b.s, b.t); });
    for (const Edge& e : sorted) os << e.s << ' ' << e.t << ' ' << format_double(e.weight) << '\n';
}

EdgeSet read_edge_list(std::istream& is) {
    EdgeSet out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto w = words(line);
        if (w.size() != 2 && w.size() != 3) throw ParseError(at_line(line_no) + "expected 's t [weight]'");
        int s = static_cast<int>(parse_integer(w[0], "s"));
        int t = static_cast<int>(parse_integer(w[1], "t"));
        if (s > t) std::swap(s, t);
        out.push_back({s, t, w.size() == 3 ? parse_double(w[2], "weight") : 1.0});
    }
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return std::tie(a.s, a.t) < std::tie(b.s, b.t); });
    return out;
}

void write_edges_json(std::ostream& os, const EdgeSet& edges, int p) {
    nlohmann::ordered_json doc;
    doc["p"] = p;
    doc["edges"] = nlohmann::ordered_json::array();
    std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(std::max(p, 0)));
    for (const Edge& e : edges) {
        doc["edges"].push_back({{"s", e.s}, {"t", e.t}, {"weight", e.weight}});
        if (e.s < p && e.t < p) {
            adjacency[e.s].push_back(e.t);
            adjacency[e.t].push_back(e.s);
        }
    }
    for (auto& a : adjacency) std::sort(a.begin(), a.end());
    doc["adjacency"] = adjacency;
    os << doc.dump(2) << '\n';
}

void write_stars_csv(std::ostream& os, const StarsResult& result) {
    os << "lambda,D,D_monotone,chosen\n";
    for (std::size_t k = 0; k < result.lambdas.size(); ++k) {
        os << format_double(result.lambdas[k]) << ',' << format_double(result.instability[k]) << ','
           << format_double(result.monotone[k]) << ',' << (static_cast<int>(k) == result.index ? 1 : 0) << '\n';
    }
}

SampleMatrix ingest_matrix(std::istream& is, const FamilySpec& family, const IngestOptions& opts) {
    std::string line;
    std::size_t line_no = 0;
    char sep = 0;
    bool first = true;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto body = trim(line);
        if (sep == 0) sep = body.find('\t') != std::string_view::npos ? '\t' : ',';
        const auto cells = split(body, sep);
        if (first) {
            first = false;
            width = cells.size();
            if (!try_parse_double(cells[0])) continue;
        }
        if (cells.size() != width) {
            throw ParseError(at_line(line_no) + "expected " + std::to_string(width) + " columns, found " + std::to_string(cells.size()));
        }
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            const auto v = try_parse_double(cells[c]);
            if (!v || !std::isfinite(*v)) {
                throw ParseError(at_line(line_no) + "column " + std::to_string(c + 1) + ": not a finite number '" + cells[c] + "'");
            }
            row[c] = *v;
        }
        rows.push_back(std::move(row));
    }
    if (width == 0) throw ParseError("no columns found");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < width; ++c) values(i, c) = rows[i][c];
    }
    if (opts.shift_nonneg && family.kind() == FamilyKind::Exponential && values.rows() > 0) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            const double lo = values.col(c).minCoeff();
            values.col(c).array() -= lo;
        }
    }
    if (family.discrete()) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            for (Eigen::Index c = 0; c < values.cols(); ++c) {
                const double r = std::round(values(i, c));
                if (std::abs(values(i, c) - r) > opts.integrality_tol) {
                    throw SupportError("row " + std::to_string(i + 1) + " column " + std::to_string(c + 1) +
                                       ": non-integer value " + format_double(values(i, c)) + " for " +
                                       std::string(family.name()));
                }
                values(i, c) = r;
            }
        }
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (!family.in_support(values(i, c))) {
                throw SupportError("row " + std::to_string(i + 1) + " column " + std::to_string(c + 1) + ": value " +
                                   format_double(values(i, c)) + " outside the " + std::string(family.name()) + " support");
            }
        }
    }
    return SampleMatrix(family, std::move(values));
}

SampleMatrix ingest_matrix(const std::filesystem::path& path, const FamilySpec& family, const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return ingest_matrix(in, family, opts);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const SupportError& e) {
        throw SupportError(path.string() + ": " + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace efmrf
