#include "cpmtrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "csv.hpp"

namespace cpmtrack {

NodeId NodeRegistry::intern(std::string_view label) {
  auto it = ids_.find(std::string(label));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<NodeId>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<NodeId> NodeRegistry::find(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Snapshot::Snapshot(Step t, std::vector<WeightedEdge> sorted_unique)
    : t_(t), edges_(std::move(sorted_unique)) {
  nodes_.reserve(edges_.size() * 2);
  for (const auto& e : edges_) {
    nodes_.push_back(e.u);
    nodes_.push_back(e.v);
  }
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
}

Snapshot Snapshot::from_edges(Step t, std::vector<WeightedEdge> edges) {
  std::vector<WeightedEdge> kept;
  kept.reserve(edges.size());
  for (auto e : edges) {
    if (!(e.w >= 0.0) || !std::isfinite(e.w)) {
      throw std::invalid_argument("edge weight must be finite and non-negative");
    }
    if (e.u == e.v) continue;
    if (e.u > e.v) std::swap(e.u, e.v);
    kept.push_back(e);
  }
  std::sort(kept.begin(), kept.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  std::vector<WeightedEdge> merged;
  merged.reserve(kept.size());
  for (const auto& e : kept) {
    if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
      merged.back().w += e.w;
    } else {
      merged.push_back(e);
    }
  }
  return Snapshot(t, std::move(merged));
}

std::optional<double> Snapshot::weight(NodeId a, NodeId b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), WeightedEdge{a, b, 0.0},
                             [](const WeightedEdge& x, const WeightedEdge& y) {
                               return x.u != y.u ? x.u < y.u : x.v < y.v;
                             });
  if (it == edges_.end() || it->u != a || it->v != b) return std::nullopt;
  return it->w;
}

double Snapshot::total_weight() const {
  double sum = 0.0;
  for (const auto& e : edges_) sum += e.w;
  return sum;
}

Adjacency::Adjacency(const Snapshot& s) {
  NodeId max_id = 0;
  for (const auto& e : s.edges()) max_id = std::max(max_id, e.v);
  const std::size_t n = s.empty() ? 0 : static_cast<std::size_t>(max_id) + 1;
  offsets_.assign(n + 1, 0);
  for (const auto& e : s.edges()) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  entries_.resize(offsets_[n]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : s.edges()) entries_[cursor[e.u]++] = {e.v, e.w};
  for (const auto& e : s.edges()) entries_[cursor[e.v]++] = {e.u, e.w};
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]),
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
}

std::span<const Adjacency::Neighbor> Adjacency::neighbors(NodeId v) const {
  if (static_cast<std::size_t>(v) + 1 >= offsets_.size()) return {};
  return {entries_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

SnapshotSeries load_events(std::span<const InteractionEvent> events, double window,
                           std::string step_unit) {
  if (!(window > 0.0) || !std::isfinite(window)) {
    throw std::invalid_argument("window must be positive");
  }
  if (events.empty()) throw std::invalid_argument("no events");

  SnapshotSeries series;
  series.step_unit = std::move(step_unit);
  std::vector<std::vector<WeightedEdge>> buckets;
  for (const auto& ev : events) {
    if (!(ev.time >= 0.0) || !std::isfinite(ev.time)) {
      throw std::invalid_argument("event time must be non-negative");
    }
    if (!(ev.w >= 0.0) || !std::isfinite(ev.w)) {
      throw std::invalid_argument("event weight must be non-negative");
    }
    const NodeId u = series.names.intern(ev.u);
    const NodeId v = series.names.intern(ev.v);
    const auto index = static_cast<std::size_t>(std::floor(ev.time / window));
    if (index >= buckets.size()) buckets.resize(index + 1);
    if (u == v) {
      ++series.skipped_self_loops;
      continue;
    }
    buckets[index].push_back({u, v, ev.w});
  }
  series.snapshots.reserve(buckets.size());
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    series.snapshots.push_back(Snapshot::from_edges(i, std::move(buckets[i])));
  }
  return series;
}

namespace {

double parse_real(const std::string& field, std::size_t line, const char* name) {
  auto value = detail::parse_double(field);
  if (!value) throw ParseError(line, std::string("malformed ") + name + " '" + field + "'");
  return *value;
}

}  // namespace

std::vector<InteractionEvent> read_events_csv(std::istream& in) {
  std::vector<InteractionEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || fields[0] != "time" || fields[1] != "u" || fields[2] != "v" ||
          fields[3] != "w") {
        throw ParseError(line_no, "expected header 'time,u,v,w'");
      }
      continue;
    }
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    InteractionEvent ev;
    ev.time = parse_real(fields[0], line_no, "time");
    ev.u = fields[1];
    ev.v = fields[2];
    ev.w = parse_real(fields[3], line_no, "weight");
    if (ev.u.empty() || ev.v.empty()) throw ParseError(line_no, "empty node label");
    if (ev.time < 0.0) throw ParseError(line_no, "negative time");
    if (ev.w < 0.0) throw ParseError(line_no, "negative weight");
    events.push_back(std::move(ev));
  }
  if (!header_seen) throw ParseError(line_no, "missing header");
  return events;
}

void write_events_csv(std::ostream& out, std::span<const InteractionEvent> events) {
  out << "time,u,v,w\n";
  for (const auto& ev : events) {
    out << detail::format_real(ev.time) << ',' << detail::quote_csv(ev.u) << ',' << detail::quote_csv(ev.v) << ','
        << detail::format_real(ev.w) << '\n';
  }
}

AttributeTable read_attributes_csv(std::istream& in, const NodeRegistry& names) {
  AttributeTable attrs;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 3 || fields[0] != "node" || fields[1] != "categorical" ||
          fields[2] != "numeric") {
        throw ParseError(line_no, "expected header 'node,categorical,numeric'");
      }
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    auto id = names.find(fields[0]);
    if (!id) {
      ++attrs.unknown_nodes;
      continue;
    }
    if (!fields[1].empty()) attrs.categorical[*id] = fields[1];
    if (!fields[2].empty()) attrs.numeric[*id] = parse_real(fields[2], line_no, "numeric");
  }
  if (!header_seen) throw ParseError(line_no, "missing header");
  return attrs;
}

void write_attributes_csv(std::ostream& out, const AttributeTable& attrs,
                          const NodeRegistry& names) {
  out << "node,categorical,numeric\n";
  for (NodeId id = 0; id < names.size(); ++id) {
    auto c = attrs.categorical.find(id);
    auto n = attrs.numeric.find(id);
    if (c == attrs.categorical.end() && n == attrs.numeric.end()) continue;
    out << detail::quote_csv(names.label(id)) << ',';
    if (c != attrs.categorical.end()) out << detail::quote_csv(c->second);
    out << ',';
    if (n != attrs.numeric.end()) out << detail::format_real(n->second);
    out << '\n';
  }
}

Snapshot threshold(const Snapshot& s, double w_star) {
  std::vector<WeightedEdge> kept;
  kept.reserve(s.edge_count());
  for (const auto& e : s.edges()) {
    if (e.w >= w_star) kept.push_back(e);
  }
  return Snapshot::from_edges(s.t(), std::move(kept));
}

Snapshot join(const Snapshot& a, const Snapshot& b) {
  std::vector<WeightedEdge> merged;
  merged.reserve(a.edge_count() + b.edge_count());
  auto less = [](const WeightedEdge& x, const WeightedEdge& y) {
    return x.u != y.u ? x.u < y.u : x.v < y.v;
  };
  auto ia = a.edges().begin();
  auto ib = b.edges().begin();
  while (ia != a.edges().end() || ib != b.edges().end()) {
    if (ib == b.edges().end() || (ia != a.edges().end() && less(*ia, *ib))) {
      merged.push_back(*ia++);
    } else if (ia == a.edges().end() || less(*ib, *ia)) {
      merged.push_back(*ib++);
    } else {
      merged.push_back({ia->u, ia->v, std::max(ia->w, ib->w)});
      ++ia;
      ++ib;
    }
  }
  return Snapshot::from_edges(a.t(), std::move(merged));
}

}  // namespace cpmtrack
