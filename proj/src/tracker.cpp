#include "cpmtrack/tracker.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "parallel.hpp"

namespace cpmtrack {

namespace {

constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

std::size_t locate(const Community& c, const CommunityCover& joint, const CoverIndex& index,
                   const char* side, std::size_t position) {
  std::size_t owner = kUnassigned;
  if (!c.cliques.empty()) {
    if (auto o = index.owner_of_clique(c.cliques.front())) owner = *o;
  } else {
    auto candidates = index.supersets_of(c.members);
    if (candidates.size() == 1) owner = candidates.front();
  }
  if (owner == kUnassigned || !is_subset(c.members, joint.communities[owner].members)) {
    throw InvariantViolation(std::string("community ") + std::to_string(position) + " of step " +
                             side + " is not contained in any joint community; covers and " +
                             "joint cover were built with different parameters");
  }
  return owner;
}

struct Candidate {
  std::size_t x;
  std::size_t y;
  std::size_t inter;
  std::size_t uni;
  NodeId min_member;
};

/// Strict ordering: higher Jaccard first, then larger intersection, then
/// smaller minimum member id, then cover positions.
bool ranks_before(const Candidate& a, const Candidate& b) {
  const auto lhs = static_cast<unsigned long long>(a.inter) * b.uni;
  const auto rhs = static_cast<unsigned long long>(b.inter) * a.uni;
  if (lhs != rhs) return lhs > rhs;
  if (a.inter != b.inter) return a.inter > b.inter;
  if (a.min_member != b.min_member) return a.min_member < b.min_member;
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

}  // namespace

StepMatching match_step(const CommunityCover& cover_t, const CommunityCover& cover_t1,
                        const CommunityCover& joint_cover) {
  StepMatching m;
  m.t = cover_t.t;
  const CoverIndex index(joint_cover);

  std::map<std::size_t, JointGroup> groups;
  for (std::size_t i = 0; i < cover_t.communities.size(); ++i) {
    const auto j = locate(cover_t.communities[i], joint_cover, index, "t", i);
    groups[j].from_t.push_back(i);
  }
  for (std::size_t i = 0; i < cover_t1.communities.size(); ++i) {
    const auto j = locate(cover_t1.communities[i], joint_cover, index, "t+1", i);
    groups[j].from_t1.push_back(i);
  }

  std::vector<bool> used_t(cover_t.communities.size(), false);
  std::vector<bool> used_t1(cover_t1.communities.size(), false);
  for (auto& [j, group] : groups) {
    group.joint_index = j;
    std::vector<Candidate> candidates;
    for (std::size_t x : group.from_t) {
      const auto& a = cover_t.communities[x].members;
      for (std::size_t y : group.from_t1) {
        const auto& b = cover_t1.communities[y].members;
        const std::size_t inter = intersection_size(a, b);
        if (inter == 0) continue;
        candidates.push_back({x, y, inter, a.size() + b.size() - inter,
                              std::min(a.front(), b.front())});
      }
    }
    std::sort(candidates.begin(), candidates.end(), ranks_before);
    for (const auto& c : candidates) {
      if (used_t[c.x] || used_t1[c.y]) continue;
      used_t[c.x] = true;
      used_t1[c.y] = true;
      m.pairs.emplace_back(c.x, c.y);
    }
    m.joint_groups.push_back(std::move(group));
  }
  for (std::size_t i = 0; i < used_t.size(); ++i) {
    if (!used_t[i]) m.deaths.push_back(i);
  }
  for (std::size_t i = 0; i < used_t1.size(); ++i) {
    if (!used_t1[i]) m.births.push_back(i);
  }
  return m;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kBirth: return "birth";
    case EventKind::kDeath: return "death";
    case EventKind::kGrowth: return "growth";
    case EventKind::kContraction: return "contraction";
    case EventKind::kUnchanged: return "unchanged";
    case EventKind::kMerge: return "merge";
    case EventKind::kSplit: return "split";
  }
  return "unknown";
}

EventKind event_kind_from_string(std::string_view text) {
  for (auto kind : {EventKind::kBirth, EventKind::kDeath, EventKind::kGrowth,
                    EventKind::kContraction, EventKind::kUnchanged, EventKind::kMerge,
                    EventKind::kSplit}) {
    if (to_string(kind) == text) return kind;
  }
  throw std::invalid_argument("unknown event kind '" + std::string(text) + "'");
}

std::vector<CommunityCover> detect_covers(const SnapshotSeries& series, int k, double w_star,
                                          unsigned jobs) {
  std::vector<CommunityCover> covers(series.size());
  detail::parallel_for(series.size(), jobs, [&](std::size_t i) {
    covers[i] = cpm_communities(threshold(series.snapshots[i], w_star), k);
    covers[i].w_star = w_star;
  });
  return covers;
}

void stitch(TrackingResult& result) {
  auto& timelines = result.timelines;
  auto& events = result.events;
  timelines.clear();
  events.clear();
  if (result.covers.empty()) return;

  auto open_timeline = [&](Step t, const NodeSet& members) {
    CommunityTimeline tl;
    tl.id = timelines.size();
    tl.t0 = t;
    tl.states.push_back(members);
    timelines.push_back(std::move(tl));
    events.push_back({t, EventKind::kBirth, {}, {timelines.back().id},
                      static_cast<long>(members.size())});
    return timelines.back().id;
  };

  std::vector<std::size_t> ids_t;
  for (const auto& c : result.covers.front().communities) {
    ids_t.push_back(open_timeline(result.covers.front().t, c.members));
  }

  for (std::size_t s = 0; s + 1 < result.covers.size(); ++s) {
    const auto& m = result.matchings.at(s);
    const auto& cover_t = result.covers[s];
    const auto& cover_t1 = result.covers[s + 1];
    const Step next = cover_t1.t;
    std::vector<std::size_t> ids_t1(cover_t1.communities.size(), kUnassigned);
    std::vector<std::size_t> pair_of_x(cover_t.communities.size(), kUnassigned);
    for (std::size_t p = 0; p < m.pairs.size(); ++p) pair_of_x[m.pairs[p].first] = p;

    for (const auto& group : m.joint_groups) {
      std::size_t lead = kUnassigned;
      for (std::size_t p = 0; p < m.pairs.size() && lead == kUnassigned; ++p) {
        for (std::size_t x : group.from_t) {
          if (m.pairs[p].first == x) {
            lead = p;
            break;
          }
        }
      }
      for (std::size_t x : group.from_t) {
        const std::size_t p = pair_of_x[x];
        if (p == kUnassigned) continue;
        const std::size_t y = m.pairs[p].second;
        const std::size_t id = ids_t[x];
        ids_t1[y] = id;
        const auto& before = cover_t.communities[x].members;
        const auto& after = cover_t1.communities[y].members;
        timelines[id].states.push_back(after);
        const long delta = static_cast<long>(after.size()) - static_cast<long>(before.size());
        const EventKind kind = delta > 0   ? EventKind::kGrowth
                               : delta < 0 ? EventKind::kContraction
                                           : EventKind::kUnchanged;
        events.push_back({next, kind, {id}, {id}, delta});
      }
      if (lead == kUnassigned) continue;
      const std::size_t lead_x = m.pairs[lead].first;
      if (group.from_t.size() >= 2) {
        EventRecord merge{next, EventKind::kMerge, {}, {ids_t[lead_x]}, 0};
        for (std::size_t x : group.from_t) merge.sources.push_back(ids_t[x]);
        events.push_back(std::move(merge));
      }
      if (group.from_t1.size() >= 2) {
        EventRecord split{next, EventKind::kSplit, {ids_t[lead_x]}, {}, 0};
        for (std::size_t y : group.from_t1) {
          if (ids_t1[y] == kUnassigned) {
            ids_t1[y] = open_timeline(next, cover_t1.communities[y].members);
          }
          split.targets.push_back(ids_t1[y]);
        }
        events.push_back(std::move(split));
      }
    }
    for (std::size_t y : m.births) {
      if (ids_t1[y] == kUnassigned) ids_t1[y] = open_timeline(next, cover_t1.communities[y].members);
    }
    for (std::size_t x : m.deaths) {
      events.push_back({next, EventKind::kDeath, {ids_t[x]}, {},
                        -static_cast<long>(cover_t.communities[x].members.size())});
    }
    ids_t = std::move(ids_t1);
  }

  const Step last = result.covers.back().t;
  for (auto& tl : timelines) tl.alive_at_end = tl.t_last() == last;
}

TrackingResult build_timelines(const SnapshotSeries& series, int k, double w_star,
                               unsigned jobs) {
  if (series.size() == 0) throw std::invalid_argument("series is empty");
  if (k < 3) throw ParameterError("clique size k must be at least 3, got " + std::to_string(k));
  TrackingResult result;
  const std::size_t n = series.size();

  std::vector<Snapshot> thresholded(n);
  detail::parallel_for(n, jobs, [&](std::size_t i) {
    thresholded[i] = threshold(series.snapshots[i], w_star);
  });
  result.covers.resize(n);
  detail::parallel_for(n, jobs, [&](std::size_t i) {
    result.covers[i] = cpm_communities(thresholded[i], k);
    result.covers[i].w_star = w_star;
  });
  result.matchings.resize(n - 1);
  detail::parallel_for(n - 1, jobs, [&](std::size_t i) {
    auto joint = cpm_communities(join(thresholded[i], thresholded[i + 1]), k);
    joint.w_star = w_star;
    joint.joint = true;
    result.matchings[i] = match_step(result.covers[i], result.covers[i + 1], joint);
  });
  stitch(result);
  return result;
}

std::vector<CompositionCounts> composition_profile(const CommunityTimeline& tl) {
  std::vector<CompositionCounts> out(tl.states.size());
  for (std::size_t i = 0; i < tl.states.size(); ++i) {
    const auto& state = tl.states[i];
    const NodeSet* prev = i > 0 ? &tl.states[i - 1] : nullptr;
    const NodeSet* next = i + 1 < tl.states.size() ? &tl.states[i + 1] : nullptr;
    auto& c = out[i];
    for (NodeId v : state) {
      const bool old = prev && std::binary_search(prev->begin(), prev->end(), v);
      const bool leaves = next && !std::binary_search(next->begin(), next->end(), v);
      if (old) {
        ++c.old_members;
        if (leaves) ++c.leaving_old;
      } else {
        ++c.new_members;
        if (leaves) ++c.leaving_new;
      }
    }
  }
  return out;
}

}  // namespace cpmtrack
