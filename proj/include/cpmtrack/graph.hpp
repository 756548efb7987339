#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cpmtrack {

using NodeId = std::uint32_t;
using Step = std::size_t;

/// Sorted, duplicate-free list of node ids. Used for community states,
/// cliques and node sets throughout.
using NodeSet = std::vector<NodeId>;

/// Bidirectional map between external labels and dense node ids.
/// Ids are assigned in order of first appearance.
class NodeRegistry {
 public:
  NodeId intern(std::string_view label);
  std::optional<NodeId> find(std::string_view label) const;
  const std::string& label(NodeId id) const { return labels_.at(id); }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> ids_;
};

/// Undirected weighted edge, always stored with u < v.
struct WeightedEdge {
  NodeId u = 0;
  NodeId v = 0;
  double w = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// One time step of the network. Immutable after construction: edges are
/// kept sorted by (u, v) with at most one edge per pair.
class Snapshot {
 public:
  Snapshot() = default;

  /// Normalizes endpoints, drops self-loops and sums the weights of repeated
  /// pairs. Throws std::invalid_argument on a negative weight.
  static Snapshot from_edges(Step t, std::vector<WeightedEdge> edges);

  Step t() const { return t_; }
  std::span<const WeightedEdge> edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  /// Nodes with at least one incident edge, ascending.
  const NodeSet& nodes() const { return nodes_; }

  std::optional<double> weight(NodeId a, NodeId b) const;
  double total_weight() const;

 private:
  Snapshot(Step t, std::vector<WeightedEdge> sorted_unique);

  Step t_ = 0;
  std::vector<WeightedEdge> edges_;
  NodeSet nodes_;
};

/// Per-node weighted adjacency lists (CSR) over a snapshot. Valid for ids up
/// to the largest endpoint; nodes beyond that have no neighbors.
class Adjacency {
 public:
  struct Neighbor {
    NodeId node;
    double w;
  };

  explicit Adjacency(const Snapshot& s);

  std::span<const Neighbor> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> entries_;
};

struct SnapshotSeries {
  std::vector<Snapshot> snapshots;
  std::string step_unit;
  NodeRegistry names;
  /// Self-loop events dropped at ingestion.
  std::size_t skipped_self_loops = 0;

  std::size_t size() const { return snapshots.size(); }
};

/// Per-node metadata for homogeneity tests; both maps are partial.
struct AttributeTable {
  std::map<NodeId, std::string> categorical;
  std::map<NodeId, double> numeric;
  /// Rows whose label is unknown to the node registry.
  std::size_t unknown_nodes = 0;
};

struct InteractionEvent {
  double time = 0.0;
  std::string u;
  std::string v;
  double w = 0.0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Buckets events into windows [i*window, (i+1)*window); repeated pairs within
/// a window have their weights summed. Empty windows are kept so that the
/// snapshot index equals the window index.
SnapshotSeries load_events(std::span<const InteractionEvent> events, double window,
                           std::string step_unit = {});

/// Reads a `time,u,v,w` CSV with header.
std::vector<InteractionEvent> read_events_csv(std::istream& in);
void write_events_csv(std::ostream& out, std::span<const InteractionEvent> events);

/// Reads a `node,categorical,numeric` CSV with header; empty fields allowed.
AttributeTable read_attributes_csv(std::istream& in, const NodeRegistry& names);
void write_attributes_csv(std::ostream& out, const AttributeTable& attrs,
                          const NodeRegistry& names);

/// Keeps exactly the edges with w >= w_star.
Snapshot threshold(const Snapshot& s, double w_star);

/// Union of both edge sets; a pair present in both keeps the larger weight.
/// The result carries the step index of `a`.
Snapshot join(const Snapshot& a, const Snapshot& b);

}  // namespace cpmtrack
