#include "cpmtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace cpmtrack {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

BinnedCurve empty_curve(std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("need at least two bin edges");
  BinnedCurve c;
  c.bin_edges.assign(edges.begin(), edges.end());
  c.values.assign(edges.size() - 1, 0.0);
  c.counts.assign(edges.size() - 1, 0);
  return c;
}

/// Turns accumulated sums in `values` into per-bin means.
void finish_means(BinnedCurve& c) {
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    c.values[i] = c.counts[i] > 0 ? c.values[i] / static_cast<double>(c.counts[i])
                                  : std::nan("");
  }
}

std::vector<Adjacency> adjacency_by_step(std::span<const Snapshot> snapshots) {
  std::vector<Adjacency> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.emplace_back(s);
  return out;
}

const Adjacency& adjacency_at(const std::vector<Adjacency>& adj, Step t) {
  if (t >= adj.size()) {
    throw std::out_of_range("no snapshot for step " + std::to_string(t));
  }
  return adj[t];
}

bool contains(const NodeSet& s, NodeId v) { return std::binary_search(s.begin(), s.end(), v); }

}  // namespace

double jaccard(std::span<const NodeId> a, std::span<const NodeId> b) {
  if (a.empty() && b.empty()) return 1.0;
  const std::size_t inter = intersection_size(a, b);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double autocorrelation(const CommunityTimeline& tl, Step t0, Step lag) {
  if (!tl.alive_at(t0) || !tl.alive_at(t0 + lag)) {
    throw std::out_of_range("autocorrelation: steps " + std::to_string(t0) + " and " +
                            std::to_string(t0 + lag) + " are not both within the timeline [" +
                            std::to_string(tl.t0) + ", " + std::to_string(tl.t_last()) + "]");
  }
  return jaccard(tl.state_at(t0), tl.state_at(t0 + lag));
}

std::optional<double> stationarity(const CommunityTimeline& tl) {
  if (tl.states.size() < 2) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < tl.states.size(); ++i) {
    sum += jaccard(tl.states[i], tl.states[i + 1]);
  }
  return sum / static_cast<double>(tl.states.size() - 1);
}

std::optional<std::size_t> lifetime(const CommunityTimeline& tl) {
  if (tl.alive_at_end) return std::nullopt;
  return tl.states.size();
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("invalid bin range");
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  edges.back() = hi;
  return edges;
}

std::optional<std::size_t> bin_of(std::span<const double> edges, double x) {
  if (edges.size() < 2 || std::isnan(x)) return std::nullopt;
  if (x < edges.front() || x > edges.back()) return std::nullopt;
  if (x == edges.back()) return edges.size() - 2;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::size_t BinnedCurve::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::vector<AutocorrelationCurve> mean_autocorrelation_by_birth_size(
    std::span<const CommunityTimeline> timelines, std::span<const std::size_t> size_edges) {
  std::vector<AutocorrelationCurve> out;
  for (std::size_t c = 0; c < size_edges.size(); ++c) {
    const std::size_t lo = size_edges[c];
    const std::size_t hi = c + 1 < size_edges.size() ? size_edges[c + 1]
                                                     : std::numeric_limits<std::size_t>::max();
    std::vector<double> sums;
    std::vector<std::size_t> counts;
    for (const auto& tl : timelines) {
      const std::size_t birth = tl.states.front().size();
      if (birth < lo || birth >= hi) continue;
      const std::size_t n = tl.states.size();
      if (sums.size() < n) {
        sums.resize(n, 0.0);
        counts.resize(n, 0);
      }
      for (std::size_t start = 0; start < n; ++start) {
        for (std::size_t lag = 0; start + lag < n; ++lag) {
          sums[lag] += jaccard(tl.states[start], tl.states[start + lag]);
          ++counts[lag];
        }
      }
    }
    AutocorrelationCurve curve;
    curve.size_lo = lo;
    curve.size_hi = hi;
    for (std::size_t lag = 0; lag < sums.size(); ++lag) {
      if (counts[lag] == 0) continue;
      curve.lags.push_back(lag);
      curve.mean.push_back(sums[lag] / static_cast<double>(counts[lag]));
      curve.counts.push_back(counts[lag]);
    }
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<AgeSizePoint> age_size_profile(std::span<const AgeObservation> observations) {
  std::map<std::size_t, std::pair<double, std::size_t>> by_size;
  double total_age = 0.0;
  for (const auto& o : observations) {
    auto& cell = by_size[o.size];
    cell.first += static_cast<double>(o.age);
    ++cell.second;
    total_age += static_cast<double>(o.age);
  }
  std::vector<AgeSizePoint> out;
  if (observations.empty() || total_age == 0.0) return out;
  const double mean_age = total_age / static_cast<double>(observations.size());
  for (const auto& [size, cell] : by_size) {
    out.push_back({size, cell.first / static_cast<double>(cell.second) / mean_age, cell.second});
  }
  return out;
}

std::vector<AgeSizePoint> age_size_profile(std::span<const CommunityTimeline> timelines) {
  std::vector<AgeObservation> observations;
  for (const auto& tl : timelines) {
    for (std::size_t age = 0; age < tl.states.size(); ++age) {
      observations.push_back({tl.states[age].size(), age});
    }
  }
  return age_size_profile(observations);
}

std::optional<double> CommitmentRatios::outside_share() const {
  const double total = w_in + w_out;
  if (!(total > 0.0)) return std::nullopt;
  return w_out / total;
}

CommitmentRatios commitment(NodeId node, std::span<const NodeId> members, const Adjacency& adj) {
  if (!std::binary_search(members.begin(), members.end(), node)) {
    throw std::domain_error("node " + std::to_string(node) + " is not a community member");
  }
  CommitmentRatios r;
  for (const auto& nb : adj.neighbors(node)) {
    if (std::binary_search(members.begin(), members.end(), nb.node)) {
      r.w_in += nb.w;
    } else {
      r.w_out += nb.w;
    }
  }
  return r;
}

CommitmentRatios commitment(NodeId node, std::span<const NodeId> members, const Snapshot& s) {
  return commitment(node, members, Adjacency(s));
}

CommitmentRatios community_commitment(std::span<const NodeId> members, const Adjacency& adj) {
  CommitmentRatios r;
  for (NodeId m : members) {
    for (const auto& nb : adj.neighbors(m)) {
      if (std::binary_search(members.begin(), members.end(), nb.node)) {
        if (m < nb.node) r.w_in += nb.w;
      } else {
        r.w_out += nb.w;
      }
    }
  }
  return r;
}

AbandonmentCurves abandonment_curve(std::span<const CommunityTimeline> timelines,
                                    std::span<const Snapshot> snapshots,
                                    std::span<const double> bins) {
  AbandonmentCurves out{empty_curve(bins), empty_curve(bins)};
  const auto adj = adjacency_by_step(snapshots);
  for (const auto& tl : timelines) {
    for (Step t = tl.t0; t < tl.t_last(); ++t) {
      const auto& state = tl.state_at(t);
      const auto& next = tl.state_at(t + 1);
      const auto& a = adjacency_at(adj, t);
      for (NodeId m : state) {
        const auto x = commitment(m, state, a).outside_share();
        if (!x) continue;
        const auto b = bin_of(bins, *x);
        if (!b) continue;
        ++out.p_leave.counts[*b];
        if (!contains(next, m)) out.p_leave.values[*b] += 1.0;
      }
    }

    std::map<NodeId, Step> first_seen;
    for (Step t = tl.t0; t <= tl.t_last(); ++t) {
      for (NodeId m : tl.state_at(t)) first_seen.emplace(m, t);
    }
    for (const auto& [m, first] : first_seen) {
      Step end = first;
      while (end + 1 <= tl.t_last() && contains(tl.state_at(end + 1), m)) ++end;
      if (end == tl.t_last() && tl.alive_at_end) continue;
      const auto x = commitment(m, tl.state_at(first), adjacency_at(adj, first)).outside_share();
      if (!x) continue;
      const auto b = bin_of(bins, *x);
      if (!b) continue;
      ++out.member_time.counts[*b];
      out.member_time.values[*b] += static_cast<double>(end - first + 1);
    }
  }
  finish_means(out.p_leave);
  finish_means(out.member_time);
  return out;
}

DisintegrationCurves disintegration_curve(std::span<const CommunityTimeline> timelines,
                                          std::span<const Snapshot> snapshots,
                                          std::span<const double> bins) {
  DisintegrationCurves out{empty_curve(bins), empty_curve(bins)};
  const auto adj = adjacency_by_step(snapshots);
  for (const auto& tl : timelines) {
    for (Step t = tl.t0; t <= tl.t_last(); ++t) {
      const bool last = t == tl.t_last();
      if (last && tl.alive_at_end) continue;
      const auto x = community_commitment(tl.state_at(t), adjacency_at(adj, t)).outside_share();
      if (!x) continue;
      const auto b = bin_of(bins, *x);
      if (!b) continue;
      ++out.p_disintegrate.counts[*b];
      if (last) out.p_disintegrate.values[*b] += 1.0;
    }
    const auto tau = lifetime(tl);
    if (!tau) continue;
    const auto x = community_commitment(tl.states.front(), adjacency_at(adj, tl.t0)).outside_share();
    if (!x) continue;
    const auto b = bin_of(bins, *x);
    if (!b) continue;
    ++out.lifetime.counts[*b];
    out.lifetime.values[*b] += static_cast<double>(*tau);
  }
  finish_means(out.p_disintegrate);
  finish_means(out.lifetime);
  return out;
}

std::optional<double> WeightRatio::ratio() const {
  if (intra_count == 0 || inter_count == 0) return std::nullopt;
  const double inter_mean = inter_sum / static_cast<double>(inter_count);
  if (!(inter_mean > 0.0)) return std::nullopt;
  return (intra_sum / static_cast<double>(intra_count)) / inter_mean;
}

WeightRatio& WeightRatio::operator+=(const WeightRatio& o) {
  intra_sum += o.intra_sum;
  intra_count += o.intra_count;
  inter_sum += o.inter_sum;
  inter_count += o.inter_count;
  return *this;
}

WeightRatio weight_ratio(const CommunityCover& cover, const Snapshot& s) {
  const CoverIndex index(cover);
  WeightRatio r;
  for (const auto& e : s.edges()) {
    const auto cu = index.containing(e.u);
    const auto cv = index.containing(e.v);
    bool share = false;
    for (auto a = cu.begin(), b = cv.begin(); a != cu.end() && b != cv.end();) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        share = true;
        break;
      }
    }
    if (share) {
      r.intra_sum += e.w;
      ++r.intra_count;
    } else {
      r.inter_sum += e.w;
      ++r.inter_count;
    }
  }
  return r;
}

std::optional<double> HomogeneityRow::ratio_high() const {
  const double d = n_rand - sigma_rand;
  if (!(d > 0.0)) return std::nullopt;
  return n_real / d;
}

bool HomogeneityRow::within_sigma(double n_sigma) const {
  return std::abs(n_real - n_rand) <= n_sigma * sigma_rand;
}

std::size_t largest_same_value(std::span<const NodeId> members, const AttributeTable& attrs) {
  std::map<std::string, std::size_t> counts;
  std::size_t best = 0;
  for (NodeId m : members) {
    auto it = attrs.categorical.find(m);
    if (it == attrs.categorical.end()) continue;
    best = std::max(best, ++counts[it->second]);
  }
  return best;
}

std::size_t largest_window(std::span<const NodeId> members, const AttributeTable& attrs,
                           double width) {
  std::vector<double> values;
  values.reserve(members.size());
  for (NodeId m : members) {
    auto it = attrs.numeric.find(m);
    if (it != attrs.numeric.end()) values.push_back(it->second);
  }
  std::sort(values.begin(), values.end());
  std::size_t best = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < values.size(); ++hi) {
    while (values[hi] - values[lo] >= width) ++lo;
    best = std::max(best, hi - lo + 1);
  }
  return best;
}

HomogeneityResult homogeneity_ratio(std::span<const CommunityCover> covers,
                                    const AttributeTable& attrs,
                                    const HomogeneityConfig& config) {
  if (config.draws == 0) throw std::invalid_argument("homogeneity needs at least one draw");
  const bool numeric = config.mode == HomogeneityMode::kNumericWindow;
  if (numeric && !(config.width > 0.0)) {
    throw std::invalid_argument("numeric window width must be positive");
  }
  auto score = [&](std::span<const NodeId> nodes) {
    return numeric ? largest_window(nodes, attrs, config.width)
                   : largest_same_value(nodes, attrs);
  };
  auto attributed = [&](NodeId v) {
    return numeric ? attrs.numeric.count(v) > 0 : attrs.categorical.count(v) > 0;
  };

  HomogeneityResult result;
  std::map<std::size_t, std::pair<double, std::size_t>> by_size;
  for (const auto& cover : covers) {
    for (const auto& c : cover.communities) {
      const std::size_t s = c.members.size();
      const auto covered = static_cast<std::size_t>(
          std::count_if(c.members.begin(), c.members.end(), attributed));
      if (static_cast<double>(covered) < config.min_coverage * static_cast<double>(s)) {
        ++result.skipped_low_coverage;
        continue;
      }
      auto& cell = by_size[s];
      cell.first += static_cast<double>(score(c.members));
      ++cell.second;
    }
  }

  NodeSet population;
  if (numeric) {
    for (const auto& [v, value] : attrs.numeric) population.push_back(v);
  } else {
    for (const auto& [v, value] : attrs.categorical) population.push_back(v);
  }

  for (const auto& [s, cell] : by_size) {
    if (population.size() < s) continue;
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(s)));
    NodeSet pool = population;
    NodeSet sample(s);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t d = 0; d < config.draws; ++d) {
      // Partial Fisher-Yates: the first s slots become a uniform s-subset.
      for (std::size_t i = 0; i < s; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      std::copy(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s), sample.begin());
      std::sort(sample.begin(), sample.end());
      const auto n = static_cast<double>(score(sample));
      sum += n;
      sum_sq += n * n;
    }
    const auto draws = static_cast<double>(config.draws);
    HomogeneityRow row;
    row.size = s;
    row.communities = cell.second;
    row.n_real = cell.first / static_cast<double>(cell.second);
    row.n_rand = sum / draws;
    const double var = config.draws > 1
                           ? std::max(0.0, (sum_sq - sum * sum / draws) / (draws - 1.0))
                           : 0.0;
    row.sigma_rand = std::sqrt(var);
    result.rows.push_back(row);
  }
  return result;
}

HeatmapGrid lifespan_heatmap(std::span<const CommunityTimeline> timelines,
                             std::span<const double> s_edges, std::span<const double> zeta_edges,
                             HeatmapSize size_mode) {
  if (s_edges.size() < 2 || zeta_edges.size() < 2) {
    throw std::invalid_argument("heatmap needs at least two edges per axis");
  }
  HeatmapGrid grid;
  grid.s_edges.assign(s_edges.begin(), s_edges.end());
  grid.zeta_edges.assign(zeta_edges.begin(), zeta_edges.end());
  const std::size_t cells = grid.s_bins() * grid.zeta_bins();
  grid.mean_lifetime.assign(cells, 0.0);
  grid.counts.assign(cells, 0);
  for (const auto& tl : timelines) {
    const auto tau = lifetime(tl);
    const auto zeta = stationarity(tl);
    if (!tau || !zeta) continue;
    double size = static_cast<double>(tl.states.front().size());
    if (size_mode == HeatmapSize::kMean) {
      double total = 0.0;
      for (const auto& s : tl.states) total += static_cast<double>(s.size());
      size = total / static_cast<double>(tl.states.size());
    }
    const auto sb = bin_of(s_edges, size);
    const auto zb = bin_of(zeta_edges, *zeta);
    if (!sb || !zb) {
      ++grid.outside;
      continue;
    }
    const auto c = grid.cell(*sb, *zb);
    grid.mean_lifetime[c] += static_cast<double>(*tau);
    ++grid.counts[c];
  }
  grid.ridge.assign(grid.s_bins(), std::nullopt);
  for (std::size_t s = 0; s < grid.s_bins(); ++s) {
    double best = 0.0;
    for (std::size_t z = 0; z < grid.zeta_bins(); ++z) {
      const auto c = grid.cell(s, z);
      if (grid.counts[c] == 0) {
        grid.mean_lifetime[c] = std::nan("");
        continue;
      }
      grid.mean_lifetime[c] /= static_cast<double>(grid.counts[c]);
      if (!grid.ridge[s] || grid.mean_lifetime[c] > best) {
        grid.ridge[s] = z;
        best = grid.mean_lifetime[c];
      }
    }
  }
  return grid;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t r = i; r <= j; ++r) ranks[order[r]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace cpmtrack
