#include "cpmtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cpmtrack {

namespace {

using Rng = std::mt19937_64;

Step death_of(const PlantedCommunity& c, const PlantedSchedule& s) {
  return c.death.value_or(s.steps);
}

bool exists_at(const PlantedCommunity& c, const PlantedSchedule& s, Step t) {
  return t >= c.birth && t < death_of(c, s);
}

long signed_size(const NodeSet& s) { return static_cast<long>(s.size()); }

std::string where(std::size_t index) { return "community " + std::to_string(index) + ": "; }

class Generator {
 public:
  Generator(const PlantedSchedule& schedule, std::uint64_t seed)
      : s_(schedule), rng_(seed), members_(schedule.communities.size()),
        target_(schedule.communities.size(), 0), alive_(schedule.communities.size(), false) {}

  SynthOutput run() {
    SynthOutput out;
    out.truth.timelines.resize(s_.communities.size());
    for (std::size_t c = 0; c < s_.communities.size(); ++c) {
      out.truth.timelines[c].id = c;
      out.truth.timelines[c].t0 = s_.communities[c].birth;
    }
    for (std::size_t i = 0; i < s_.background_nodes; ++i) fresh(std::nullopt);

    std::vector<Snapshot> snapshots;
    for (Step t = 0; t < s_.steps; ++t) {
      evolve(t, out.truth.events);
      for (std::size_t c = 0; c < s_.communities.size(); ++c) {
        if (alive_[c]) out.truth.timelines[c].states.push_back(members_[c]);
      }
      snapshots.push_back(wire(t));
    }
    for (std::size_t c = 0; c < s_.communities.size(); ++c) {
      out.truth.timelines[c].alive_at_end = death_of(s_.communities[c], s_) >= s_.steps;
    }

    for (NodeId id = 0; id < zip_.size(); ++id) {
      out.series.names.intern(synth_label(id));
      out.attrs.categorical[id] = zip_[id];
      out.attrs.numeric[id] = age_[id];
    }
    out.series.step_unit = "step";
    for (const auto& snap : snapshots) {
      for (const auto& e : snap.edges()) {
        out.events.push_back({static_cast<double>(snap.t()), synth_label(e.u), synth_label(e.v), e.w});
      }
    }
    out.series.snapshots = std::move(snapshots);
    return out;
  }

 private:
  double uniform(double lo, double hi) {
    if (hi <= lo) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool chance(double p) { return p >= 1.0 || (p > 0.0 && uniform(0.0, 1.0) < p); }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  /// Allocates a node; attributes follow the community's planting rule.
  NodeId fresh(std::optional<std::size_t> community) {
    const auto id = static_cast<NodeId>(zip_.size());
    const PlantedCommunity* c = community ? &s_.communities[*community] : nullptr;
    if (c && !c->zip.empty() && chance(s_.zip_purity)) {
      zip_.push_back(c->zip);
    } else {
      zip_.push_back("z" + std::to_string(pick(std::max<std::size_t>(1, s_.zip_values))));
    }
    if (c && c->age) {
      age_.push_back(*c->age + uniform(-s_.age_spread, s_.age_spread));
    } else {
      age_.push_back(uniform(s_.age_lo, s_.age_hi));
    }
    propensity_.push_back(c ? uniform(c->propensity_lo, c->propensity_hi) : 0.0);
    return id;
  }

  /// Removes `count` members chosen uniformly without replacement.
  void drop_random(NodeSet& members, std::size_t count) {
    count = std::min(count, members.size());
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + pick(members.size() - i);
      std::swap(members[i], members[j]);
    }
    members.erase(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(members.begin(), members.end());
  }

  void top_up(std::size_t c, std::size_t target) {
    auto& m = members_[c];
    if (m.size() > target) drop_random(m, m.size() - target);
    while (m.size() < target) m.push_back(fresh(c));
    std::sort(m.begin(), m.end());
  }

  std::size_t target_at(std::size_t c, Step t) const {
    const auto& pc = s_.communities[c];
    if (pc.sizes.empty()) return target_[c];
    return pc.sizes[std::min<std::size_t>(t - pc.birth, pc.sizes.size() - 1)];
  }

  void evolve(Step t, std::vector<EventRecord>& truth) {
    const std::size_t n = s_.communities.size();
    std::vector<bool> handled(n, false);

    for (std::size_t c = 0; c < n; ++c) {
      if (alive_[c] && death_of(s_.communities[c], s_) == t) {
        bool absorbed = false;
        for (const auto& mg : s_.merges) absorbed |= mg.step == t && mg.absorbed == c;
        if (!absorbed) {
          alive_[c] = false;
          truth.push_back({t, EventKind::kDeath, {c}, {}, -signed_size(members_[c])});
          members_[c].clear();
        }
      }
    }
    for (const auto& mg : s_.merges) {
      if (mg.step != t) continue;
      const auto absorbed_size = signed_size(members_[mg.absorbed]);
      auto& into = members_[mg.into];
      into.insert(into.end(), members_[mg.absorbed].begin(), members_[mg.absorbed].end());
      std::sort(into.begin(), into.end());
      into.erase(std::unique(into.begin(), into.end()), into.end());
      target_[mg.into] = into.size();
      members_[mg.absorbed].clear();
      alive_[mg.absorbed] = false;
      handled[mg.into] = true;
      handled[mg.absorbed] = true;
      truth.push_back({t, EventKind::kMerge, {std::min(mg.absorbed, mg.into), std::max(mg.absorbed, mg.into)},
                       {mg.into}, 0});
      truth.push_back({t, EventKind::kDeath, {mg.absorbed}, {}, -absorbed_size});
    }
    for (const auto& sp : s_.splits) {
      if (sp.step != t) continue;
      auto& source = members_[sp.source];
      const auto moving =
          static_cast<std::size_t>(std::llround(sp.fraction * static_cast<double>(source.size())));
      for (std::size_t i = 0; i < moving; ++i) {
        const std::size_t j = i + pick(source.size() - i);
        std::swap(source[i], source[j]);
      }
      NodeSet part(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(moving));
      source.erase(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(moving));
      std::sort(source.begin(), source.end());
      std::sort(part.begin(), part.end());
      members_[sp.offspring] = std::move(part);
      target_[sp.source] = source.size();
      target_[sp.offspring] = members_[sp.offspring].size();
      alive_[sp.offspring] = true;
      handled[sp.source] = true;
      handled[sp.offspring] = true;
      truth.push_back({t, EventKind::kSplit, {sp.source}, {std::min(sp.source, sp.offspring),
                                                           std::max(sp.source, sp.offspring)}, 0});
      truth.push_back({t, EventKind::kBirth, {}, {sp.offspring}, signed_size(members_[sp.offspring])});
    }

    for (std::size_t c = 0; c < n; ++c) {
      if (handled[c]) continue;
      const auto& pc = s_.communities[c];
      if (pc.birth == t) {
        alive_[c] = true;
        target_[c] = pc.size;
        members_[c].clear();
        top_up(c, target_at(c, t));
        truth.push_back({t, EventKind::kBirth, {}, {c}, signed_size(members_[c])});
        continue;
      }
      if (!alive_[c]) continue;
      auto& m = members_[c];
      if (pc.leave) {
        NodeSet stay;
        for (NodeId v : m) {
          const double p = std::clamp(pc.leave->base + pc.leave->slope * propensity_[v], 0.0, 1.0);
          if (!chance(p)) stay.push_back(v);
        }
        m = std::move(stay);
      } else if (pc.replacement > 0.0) {
        const auto swaps =
            static_cast<std::size_t>(std::llround(pc.replacement * static_cast<double>(m.size())));
        const std::size_t keep = m.size() - std::min(swaps, m.size());
        drop_random(m, m.size() - keep);
        for (std::size_t i = 0; i < swaps; ++i) m.push_back(fresh(c));
        std::sort(m.begin(), m.end());
      }
      top_up(c, target_at(c, t));
    }
  }

  Snapshot wire(Step t) {
    std::vector<WeightedEdge> edges;
    std::vector<double> w_in(zip_.size(), 0.0);
    std::vector<bool> member(zip_.size(), false);
    for (std::size_t c = 0; c < members_.size(); ++c) {
      if (!alive_[c]) continue;
      const auto& m = members_[c];
      for (NodeId v : m) member[v] = true;
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
          if (!chance(s_.intra_p)) continue;
          const double w = uniform(s_.intra.lo, s_.intra.hi);
          edges.push_back({m[i], m[j], w});
          w_in[m[i]] += w;
          w_in[m[j]] += w;
        }
      }
    }

    // Each outside contact is a distinct non-member per step, so it touches at
    // most one member and cannot close a clique with the community.
    NodeSet outsiders;
    for (NodeId v = 0; v < member.size(); ++v) {
      if (!member[v]) outsiders.push_back(v);
    }
    std::size_t cursor = 0;
    for (std::size_t c = 0; c < members_.size(); ++c) {
      const auto& pc = s_.communities[c];
      if (!alive_[c] || pc.propensity_hi <= 0.0 || pc.contacts == 0) continue;
      for (NodeId v : members_[c]) {
        const double share = std::min(propensity_[v], 0.95);
        if (share <= 0.0 || w_in[v] <= 0.0) continue;
        const double total = w_in[v] * share / (1.0 - share);
        for (std::size_t i = 0; i < pc.contacts; ++i) {
          if (cursor >= outsiders.size()) {
            throw ScheduleError("step " + std::to_string(t) +
                                ": not enough background nodes for outside contacts");
          }
          const std::size_t j = cursor + pick(outsiders.size() - cursor);
          std::swap(outsiders[cursor], outsiders[j]);
          edges.push_back({v, outsiders[cursor++], total / static_cast<double>(pc.contacts)});
        }
      }
    }

    const std::size_t n = zip_.size();
    if (s_.background_p > 0.0 && n >= 2) {
      const auto pairs = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
      const long long count = std::binomial_distribution<long long>(pairs, s_.background_p)(rng_);
      for (long long i = 0; i < count; ++i) {
        const auto u = static_cast<NodeId>(pick(n));
        auto v = static_cast<NodeId>(pick(n - 1));
        if (v >= u) ++v;
        edges.push_back({u, v, uniform(s_.inter.lo, s_.inter.hi)});
      }
    }
    return Snapshot::from_edges(t, std::move(edges));
  }

  const PlantedSchedule& s_;
  Rng rng_;
  std::vector<NodeSet> members_;
  std::vector<std::size_t> target_;
  std::vector<bool> alive_;
  std::vector<std::string> zip_;
  std::vector<double> age_;
  std::vector<double> propensity_;
};

}  // namespace

std::string synth_label(NodeId id) { return "n" + std::to_string(id); }

void validate(const PlantedSchedule& s) {
  if (s.steps == 0) throw ScheduleError("schedule needs at least one step");
  if (s.k < 3) throw ScheduleError("k must be at least 3");
  const auto k = static_cast<std::size_t>(s.k);
  auto probability = [](double p, const std::string& what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ScheduleError(what + " must lie in [0, 1]");
  };
  probability(s.background_p, "background_p");
  probability(s.intra_p, "intra_p");
  probability(s.zip_purity, "zip_purity");
  if (s.intra.lo < 0.0 || s.intra.hi < s.intra.lo || s.inter.lo < 0.0 || s.inter.hi < s.inter.lo) {
    throw ScheduleError("weight laws need 0 <= lo <= hi");
  }

  std::vector<bool> offspring(s.communities.size(), false);
  for (const auto& sp : s.splits) {
    if (sp.offspring < offspring.size()) offspring[sp.offspring] = true;
  }
  for (std::size_t i = 0; i < s.communities.size(); ++i) {
    const auto& c = s.communities[i];
    if (c.birth >= s.steps) throw ScheduleError(where(i) + "birth after the last step");
    if (c.death && (*c.death <= c.birth || *c.death > s.steps)) {
      throw ScheduleError(where(i) + "death must lie in (birth, steps]");
    }
    if (!offspring[i] && c.size < k) {
      throw ScheduleError(where(i) + "size " + std::to_string(c.size) + " is below k");
    }
    for (auto target : c.sizes) {
      if (target < k) throw ScheduleError(where(i) + "target size below k");
    }
    probability(c.replacement, where(i) + "replacement");
    if (c.propensity_lo < 0.0 || c.propensity_hi < c.propensity_lo || c.propensity_hi >= 1.0) {
      throw ScheduleError(where(i) + "propensity range must satisfy 0 <= lo <= hi < 1");
    }
  }
  const auto n = s.communities.size();
  for (const auto& mg : s.merges) {
    if (mg.absorbed >= n || mg.into >= n || mg.absorbed == mg.into) {
      throw ScheduleError("merge references invalid communities");
    }
    const auto& a = s.communities[mg.absorbed];
    const auto& b = s.communities[mg.into];
    if (mg.step == 0 || !exists_at(a, s, mg.step - 1) || !exists_at(b, s, mg.step - 1) ||
        !exists_at(b, s, mg.step)) {
      throw ScheduleError("merge at step " + std::to_string(mg.step) +
                          ": both communities must exist before it and the target after");
    }
    if (death_of(a, s) != mg.step) {
      throw ScheduleError("merge at step " + std::to_string(mg.step) +
                          ": absorbed community must die at the merge step");
    }
  }
  for (const auto& sp : s.splits) {
    if (sp.source >= n || sp.offspring >= n || sp.source == sp.offspring) {
      throw ScheduleError("split references invalid communities");
    }
    const auto& src = s.communities[sp.source];
    const auto& off = s.communities[sp.offspring];
    if (sp.step == 0 || !exists_at(src, s, sp.step - 1) || !exists_at(src, s, sp.step)) {
      throw ScheduleError("split at step " + std::to_string(sp.step) +
                          ": source must exist before and after");
    }
    if (off.birth != sp.step) {
      throw ScheduleError("split at step " + std::to_string(sp.step) +
                          ": offspring must be born at the split step");
    }
    if (!(sp.fraction > 0.0 && sp.fraction < 1.0)) {
      throw ScheduleError("split fraction must lie in (0, 1)");
    }
  }
}

SynthOutput generate(const PlantedSchedule& schedule, std::uint64_t seed) {
  validate(schedule);
  return Generator(schedule, seed).run();
}

}  // namespace cpmtrack
