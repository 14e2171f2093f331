#include "efmrf/recovery.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "efmrf/errors.hpp"

namespace efmrf {

namespace {

std::vector<const NeighborhoodFit*> index_fits(std::span<const NeighborhoodFit> fits, int p) {
    std::vector<const NeighborhoodFit*> by_node(p, nullptr);
    for (const auto& f : fits) {
        if (f.s < 0 || f.s >= p) throw MissingFitError("fit for node " + std::to_string(f.s) + " is out of range");
        if (by_node[f.s]) throw MissingFitError("duplicate fit for node " + std::to_string(f.s));
        by_node[f.s] = &f;
    }
    for (int s = 0; s < p; ++s) {
        if (!by_node[s]) throw MissingFitError("no fit for node " + std::to_string(s));
    }
    return by_node;
}

std::set<std::pair<int, int>> support(const EdgeSet& edges) {
    std::set<std::pair<int, int>> out;
    for (const Edge& e : edges) out.emplace(std::min(e.s, e.t), std::max(e.s, e.t));
    return out;
}

}  // namespace

StitchRule parse_rule(std::string_view name) {
    if (name == "or" || name == "OR") return StitchRule::Or;
    if (name == "and" || name == "AND") return StitchRule::And;
    throw ParseError("unknown stitch rule '" + std::string(name) + "'");
}

std::string_view to_string(StitchRule rule) { return rule == StitchRule::Or ? "or" : "and"; }

EdgeSet stitch(std::span<const NeighborhoodFit> fits, int p, StitchRule rule) {
    const auto by_node = index_fits(fits, p);
    EdgeSet out;
    for (int s = 0; s < p; ++s) {
        for (int t = s + 1; t < p; ++t) {
            const double ws = by_node[s]->weight(t);
            const double wt = by_node[t]->weight(s);
            const bool in_s = ws != 0.0;
            const bool in_t = wt != 0.0;
            const bool keep = rule == StitchRule::Or ? (in_s || in_t) : (in_s && in_t);
            if (!keep) continue;
            const double w = in_s && in_t ? 0.5 * (ws + wt) : (in_s ? ws : wt);
            out.push_back({s, t, w});
        }
    }
    return out;
}

RecoveryReport score(const EdgeSet& estimated, const EdgeSet& truth, int p) {
    for (const auto* set : {&estimated, &truth}) {
        for (const Edge& e : *set) {
            if (e.s == e.t || e.s < 0 || e.t < 0 || e.s >= p || e.t >= p) {
                throw DomainError("edge (" + std::to_string(e.s) + "," + std::to_string(e.t) + ") is not over " +
                                  std::to_string(p) + " nodes");
            }
        }
    }
    const auto est = support(estimated);
    const auto tru = support(truth);
    RecoveryReport r;
    r.estimated_edges = estimated;
    for (const auto& e : est) {
        if (tru.count(e)) {
            ++r.true_positives;
        } else {
            ++r.false_positives;
        }
    }
    r.false_negatives = static_cast<int>(tru.size()) - r.true_positives;
    r.hamming = r.false_positives + r.false_negatives;
    r.exact_recovery = r.hamming == 0;
    return r;
}

RecoveryReport recover(std::span<const NeighborhoodFit> fits, int p, StitchRule rule, const EdgeSet& truth) {
    RecoveryReport r = score(stitch(fits, p, rule), truth, p);
    r.rule = rule;
    r.per_node_neighborhoods.assign(p, {});
    for (const auto& f : fits) {
        for (const auto& [t, w] : f.edge_weights) r.per_node_neighborhoods[f.s].push_back(t);
    }
    return r;
}

}  // namespace efmrf
