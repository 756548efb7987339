#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cpmtrack/graph.hpp"

namespace cpmtrack {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One k-clique percolation community.
struct Community {
  NodeSet members;
  /// The maximal cliques (size >= k) whose union is `members`, each sorted.
  /// Kept so that clique-level ownership can be resolved without relying on
  /// node-set containment alone.
  std::vector<NodeSet> cliques;
};

struct CommunityCover {
  Step t = 0;
  int k = 0;
  double w_star = 0.0;
  /// True for covers of a joint graph built from steps t and t+1.
  bool joint = false;
  /// Sorted lexicographically by member list.
  std::vector<Community> communities;

  std::size_t largest_size() const;
  std::size_t second_largest_size() const;
};

/// How the percolation classes are assembled. Both produce identical covers.
enum class PercolationMethod {
  /// Union maximal cliques that share at least k-1 nodes.
  kMaximalCliques,
  /// Expand every maximal clique into its k-subsets and union k-cliques that
  /// share a (k-1)-subset. Memory grows with C(|clique|, k).
  kKCliques,
};

/// Maximal cliques with at least `min_size` nodes, found per connected
/// component by Bron-Kerbosch with Tomita pivoting over a degeneracy order.
/// Each clique is sorted; the list is sorted lexicographically.
std::vector<NodeSet> maximal_cliques(const Snapshot& g, std::size_t min_size = 1);

/// All node sets of size k whose induced subgraph is complete, sorted.
/// Throws ParameterError if k < 3.
std::vector<NodeSet> enumerate_k_cliques(const Snapshot& g, int k);

/// k-clique percolation cover of an already-thresholded graph. Nodes that lie
/// in no k-clique belong to no community.
CommunityCover cpm_communities(const Snapshot& g, int k,
                               PercolationMethod method = PercolationMethod::kMaximalCliques);

/// Scans the distinct edge weights from the largest down and returns the
/// first threshold at which the cover of threshold(g, w) has at least two
/// communities and the largest is at most twice the second largest. Returns
/// 0 if no candidate qualifies.
double select_parameters(const Snapshot& g, int k);

/// Node-to-community lookup over one cover.
class CoverIndex {
 public:
  explicit CoverIndex(const CommunityCover& cover);

  /// Communities containing `v`, ascending.
  std::span<const std::size_t> containing(NodeId v) const;

  /// The community whose percolation class contains the clique `q` (sorted,
  /// at least k nodes), if any.
  std::optional<std::size_t> owner_of_clique(std::span<const NodeId> q) const;

  /// Communities whose member set includes every node of `nodes`.
  std::vector<std::size_t> supersets_of(std::span<const NodeId> nodes) const;

 private:
  const CommunityCover* cover_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> entries_;
};

bool is_subset(std::span<const NodeId> sub, std::span<const NodeId> super);
std::size_t intersection_size(std::span<const NodeId> a, std::span<const NodeId> b);

}  // namespace cpmtrack
