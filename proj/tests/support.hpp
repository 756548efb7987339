#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "cpmtrack/cpm.hpp"
#include "cpmtrack/graph.hpp"
#include "cpmtrack/synth.hpp"
#include "cpmtrack/tracker.hpp"

namespace testing_support {

using cpmtrack::NodeId;
using cpmtrack::NodeSet;
using cpmtrack::Snapshot;
using cpmtrack::WeightedEdge;

inline Snapshot graph(std::initializer_list<std::pair<NodeId, NodeId>> pairs, double w = 1.0,
                      cpmtrack::Step t = 0) {
  std::vector<WeightedEdge> edges;
  for (auto [u, v] : pairs) edges.push_back({u, v, w});
  return Snapshot::from_edges(t, std::move(edges));
}

inline void add_clique(std::vector<WeightedEdge>& edges, const NodeSet& nodes, double w = 1.0) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) edges.push_back({nodes[i], nodes[j], w});
  }
}

inline Snapshot cliques(std::initializer_list<NodeSet> groups, double w = 1.0, cpmtrack::Step t = 0) {
  std::vector<WeightedEdge> edges;
  for (const auto& g : groups) add_clique(edges, g, w);
  return Snapshot::from_edges(t, std::move(edges));
}

/// G(n, p) with weights uniform on [0.5, 2).
inline Snapshot erdos_renyi(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  std::vector<WeightedEdge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(rng)) edges.push_back({u, v, weight(rng)});
    }
  }
  return Snapshot::from_edges(0, std::move(edges));
}

inline std::vector<NodeSet> members_of(const cpmtrack::CommunityCover& cover) {
  std::vector<NodeSet> out;
  for (const auto& c : cover.communities) out.push_back(c.members);
  return out;
}

/// Disjoint planted communities of constant size with fixed-fraction turnover.
inline cpmtrack::PlantedSchedule turnover_schedule(std::size_t communities, std::size_t size,
                                                   std::size_t steps, double r) {
  cpmtrack::PlantedSchedule s;
  s.steps = steps;
  s.k = 4;
  for (std::size_t i = 0; i < communities; ++i) {
    cpmtrack::PlantedCommunity c;
    c.size = size;
    c.replacement = r;
    s.communities.push_back(c);
  }
  return s;
}

/// Fraction of planted (community, step, member) triples that the recovered
/// timeline best matching each planted community also holds at that step.
/// The best match maximises the summed member overlap over all steps.
inline double membership_recovery(std::span<const cpmtrack::CommunityTimeline> truth,
                                  std::span<const cpmtrack::CommunityTimeline> found) {
  std::size_t total = 0;
  std::size_t hit = 0;
  for (const auto& p : truth) {
    std::map<std::size_t, std::size_t> overlap;
    for (cpmtrack::Step t = p.t0; t <= p.t_last(); ++t) {
      for (const auto& f : found) {
        if (!f.alive_at(t)) continue;
        overlap[f.id] += cpmtrack::intersection_size(p.state_at(t), f.state_at(t));
      }
    }
    std::size_t best = static_cast<std::size_t>(-1);
    std::size_t best_overlap = 0;
    for (auto [id, n] : overlap) {
      if (n > best_overlap) {
        best = id;
        best_overlap = n;
      }
    }
    for (cpmtrack::Step t = p.t0; t <= p.t_last(); ++t) total += p.state_at(t).size();
    if (best == static_cast<std::size_t>(-1)) continue;
    const auto& f = *std::find_if(found.begin(), found.end(), [&](const auto& x) { return x.id == best; });
    for (cpmtrack::Step t = p.t0; t <= p.t_last(); ++t) {
      if (f.alive_at(t)) hit += cpmtrack::intersection_size(p.state_at(t), f.state_at(t));
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace testing_support
