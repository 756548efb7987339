#include "cpmtrack/cpm.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "cpmtrack/disjoint_sets.hpp"

namespace cpmtrack {

namespace {

using Local = std::uint32_t;
using LocalSet = std::vector<Local>;

struct NodeSetHash {
  std::size_t operator()(const NodeSet& s) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (NodeId v : s) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

LocalSet intersect(const LocalSet& a, const LocalSet& b) {
  LocalSet out;
  out.reserve(std::min(a.size(), b.size()));
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::size_t intersect_count(const LocalSet& a, const LocalSet& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

/// Bron-Kerbosch over one connected component in local indices.
class CliqueSearch {
 public:
  CliqueSearch(const std::vector<LocalSet>& adj, std::size_t min_size,
               std::function<void(const LocalSet&)> emit)
      : adj_(adj), min_size_(min_size), emit_(std::move(emit)) {}

  void run() {
    const auto order = degeneracy_order();
    std::vector<std::size_t> position(adj_.size());
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    for (Local v : order) {
      LocalSet p;
      LocalSet x;
      for (Local u : adj_[v]) (position[u] > position[v] ? p : x).push_back(u);
      LocalSet r{v};
      expand(r, std::move(p), std::move(x));
    }
  }

 private:
  std::vector<Local> degeneracy_order() const {
    const std::size_t n = adj_.size();
    std::vector<std::size_t> degree(n);
    std::size_t max_degree = 0;
    for (std::size_t v = 0; v < n; ++v) {
      degree[v] = adj_[v].size();
      max_degree = std::max(max_degree, degree[v]);
    }
    std::vector<std::vector<Local>> buckets(max_degree + 1);
    for (std::size_t v = 0; v < n; ++v) buckets[degree[v]].push_back(static_cast<Local>(v));
    std::vector<bool> removed(n, false);
    std::vector<Local> order;
    order.reserve(n);
    std::size_t d = 0;
    while (order.size() < n) {
      d = std::min(d, max_degree);
      while (buckets[d].empty()) ++d;
      const Local v = buckets[d].back();
      buckets[d].pop_back();
      if (removed[v] || degree[v] != d) continue;
      removed[v] = true;
      order.push_back(v);
      for (Local u : adj_[v]) {
        if (removed[u]) continue;
        --degree[u];
        buckets[degree[u]].push_back(u);
        if (degree[u] < d) d = degree[u];
      }
    }
    return order;
  }

  void expand(LocalSet& r, LocalSet p, LocalSet x) {
    if (p.empty()) {
      if (x.empty() && r.size() >= min_size_) emit_(r);
      return;
    }
    if (r.size() + p.size() < min_size_) return;

    Local pivot = p.front();
    std::size_t best = 0;
    bool first = true;
    for (const LocalSet* pool : {&p, &x}) {
      for (Local u : *pool) {
        const std::size_t c = intersect_count(p, adj_[u]);
        if (first || c > best) {
          pivot = u;
          best = c;
          first = false;
        }
      }
    }
    LocalSet candidates;
    std::set_difference(p.begin(), p.end(), adj_[pivot].begin(), adj_[pivot].end(),
                        std::back_inserter(candidates));
    for (Local v : candidates) {
      r.push_back(v);
      expand(r, intersect(p, adj_[v]), intersect(x, adj_[v]));
      r.pop_back();
      p.erase(std::lower_bound(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  }

  const std::vector<LocalSet>& adj_;
  std::size_t min_size_;
  std::function<void(const LocalSet&)> emit_;
};

void require_k(int k) {
  if (k < 3) throw ParameterError("clique size k must be at least 3, got " + std::to_string(k));
}

/// Calls `visit` for every size-k subset of `set`, in lexicographic order.
template <typename Visit>
void for_each_subset(const NodeSet& set, std::size_t k, Visit&& visit) {
  if (k > set.size()) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  NodeSet subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = set[idx[i]];
    visit(subset);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == set.size() - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<Community> assemble(std::vector<NodeSet> cliques, DisjointSets& classes) {
  std::map<std::size_t, Community> by_root;
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    by_root[classes.find(i)].cliques.push_back(std::move(cliques[i]));
  }
  std::vector<Community> out;
  out.reserve(by_root.size());
  for (auto& [root, c] : by_root) {
    for (const auto& q : c.cliques) c.members.insert(c.members.end(), q.begin(), q.end());
    std::sort(c.members.begin(), c.members.end());
    c.members.erase(std::unique(c.members.begin(), c.members.end()), c.members.end());
    std::sort(c.cliques.begin(), c.cliques.end());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(),
            [](const Community& a, const Community& b) { return a.members < b.members; });
  return out;
}

/// Unions maximal cliques sharing at least k-1 nodes.
void percolate_maximal(const std::vector<NodeSet>& cliques, std::size_t k, DisjointSets& classes) {
  std::unordered_map<NodeId, std::vector<std::size_t>> by_node;
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    for (NodeId v : cliques[i]) by_node[v].push_back(i);
  }
  std::vector<std::size_t> shared(cliques.size(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    touched.clear();
    for (NodeId v : cliques[i]) {
      for (std::size_t j : by_node[v]) {
        if (j <= i) continue;
        if (shared[j]++ == 0) touched.push_back(j);
      }
    }
    for (std::size_t j : touched) {
      if (shared[j] >= k - 1) classes.unite(i, j);
      shared[j] = 0;
    }
  }
}

/// Unions maximal cliques through their k-subsets: two k-cliques are adjacent
/// iff they share a (k-1)-subset.
void percolate_k_cliques(const std::vector<NodeSet>& cliques, std::size_t k,
                         DisjointSets& classes) {
  // Each k-clique and each (k-1)-subset remembers the first maximal clique
  // that produced it; later producers are united with that one.
  std::unordered_map<NodeSet, std::size_t, NodeSetHash> k_owner;
  std::unordered_map<NodeSet, std::size_t, NodeSetHash> face_owner;
  NodeSet face;
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    for_each_subset(cliques[i], k, [&](const NodeSet& q) {
      auto [it, fresh] = k_owner.emplace(q, i);
      if (!fresh) {
        classes.unite(i, it->second);
        return;
      }
      for (std::size_t drop = 0; drop < k; ++drop) {
        face.clear();
        for (std::size_t j = 0; j < k; ++j) {
          if (j != drop) face.push_back(q[j]);
        }
        auto [f, new_face] = face_owner.emplace(face, i);
        if (!new_face) classes.unite(i, f->second);
      }
    });
  }
}

}  // namespace

std::size_t CommunityCover::largest_size() const {
  std::size_t best = 0;
  for (const auto& c : communities) best = std::max(best, c.members.size());
  return best;
}

std::size_t CommunityCover::second_largest_size() const {
  std::size_t first = 0;
  std::size_t second = 0;
  for (const auto& c : communities) {
    const std::size_t s = c.members.size();
    if (s > first) {
      second = first;
      first = s;
    } else if (s > second) {
      second = s;
    }
  }
  return second;
}

std::vector<NodeSet> maximal_cliques(const Snapshot& g, std::size_t min_size) {
  std::vector<NodeSet> out;
  if (g.empty()) return out;
  const Adjacency adj(g);
  const auto& nodes = g.nodes();

  std::unordered_map<NodeId, Local> local_of;
  DisjointSets components(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) local_of[nodes[i]] = static_cast<Local>(i);
  for (const auto& e : g.edges()) components.unite(local_of[e.u], local_of[e.v]);

  std::map<std::size_t, std::vector<NodeId>> groups;
  for (std::size_t i = 0; i < nodes.size(); ++i) groups[components.find(i)].push_back(nodes[i]);

  for (const auto& [root, members] : groups) {
    if (members.size() < min_size) continue;
    std::unordered_map<NodeId, Local> index;
    for (std::size_t i = 0; i < members.size(); ++i) index[members[i]] = static_cast<Local>(i);
    std::vector<LocalSet> local_adj(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (const auto& nb : adj.neighbors(members[i])) local_adj[i].push_back(index.at(nb.node));
    }
    CliqueSearch search(local_adj, min_size, [&](const LocalSet& r) {
      NodeSet q;
      q.reserve(r.size());
      for (Local v : r) q.push_back(members[v]);
      std::sort(q.begin(), q.end());
      out.push_back(std::move(q));
    });
    search.run();
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeSet> enumerate_k_cliques(const Snapshot& g, int k) {
  require_k(k);
  const auto kk = static_cast<std::size_t>(k);
  std::unordered_map<NodeSet, bool, NodeSetHash> seen;
  std::vector<NodeSet> out;
  for (const auto& m : maximal_cliques(g, kk)) {
    for_each_subset(m, kk, [&](const NodeSet& q) {
      if (seen.emplace(q, true).second) out.push_back(q);
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

CommunityCover cpm_communities(const Snapshot& g, int k, PercolationMethod method) {
  require_k(k);
  const auto kk = static_cast<std::size_t>(k);
  CommunityCover cover;
  cover.t = g.t();
  cover.k = k;

  auto cliques = maximal_cliques(g, kk);
  DisjointSets classes(cliques.size());
  if (method == PercolationMethod::kMaximalCliques) {
    percolate_maximal(cliques, kk, classes);
  } else {
    percolate_k_cliques(cliques, kk, classes);
  }
  cover.communities = assemble(std::move(cliques), classes);
  return cover;
}

double select_parameters(const Snapshot& g, int k) {
  require_k(k);
  std::vector<double> weights;
  weights.reserve(g.edge_count());
  for (const auto& e : g.edges()) weights.push_back(e.w);
  std::sort(weights.begin(), weights.end(), std::greater<>());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  for (double w : weights) {
    const auto cover = cpm_communities(threshold(g, w), k);
    if (cover.communities.size() < 2) continue;
    if (cover.largest_size() <= 2 * cover.second_largest_size()) return w;
  }
  return 0.0;
}

CoverIndex::CoverIndex(const CommunityCover& cover) : cover_(&cover) {
  NodeId max_id = 0;
  bool any = false;
  for (const auto& c : cover.communities) {
    if (!c.members.empty()) {
      max_id = std::max(max_id, c.members.back());
      any = true;
    }
  }
  const std::size_t n = any ? static_cast<std::size_t>(max_id) + 1 : 0;
  offsets_.assign(n + 1, 0);
  for (const auto& c : cover.communities) {
    for (NodeId v : c.members) ++offsets_[v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  entries_.resize(offsets_[n]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t ci = 0; ci < cover.communities.size(); ++ci) {
    for (NodeId v : cover.communities[ci].members) entries_[cursor[v]++] = ci;
  }
}

std::span<const std::size_t> CoverIndex::containing(NodeId v) const {
  if (static_cast<std::size_t>(v) + 1 >= offsets_.size()) return {};
  return {entries_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::optional<std::size_t> CoverIndex::owner_of_clique(std::span<const NodeId> q) const {
  if (q.empty()) return std::nullopt;
  for (std::size_t ci : containing(q.front())) {
    for (const auto& clique : cover_->communities[ci].cliques) {
      if (is_subset(q, clique)) return ci;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> CoverIndex::supersets_of(std::span<const NodeId> nodes) const {
  std::vector<std::size_t> out;
  if (nodes.empty()) return out;
  for (std::size_t ci : containing(nodes.front())) {
    if (is_subset(nodes, cover_->communities[ci].members)) out.push_back(ci);
  }
  return out;
}

bool is_subset(std::span<const NodeId> sub, std::span<const NodeId> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

std::size_t intersection_size(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace cpmtrack
