#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cpmtrack/synth.hpp"
#include "cpmtrack/tracker.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace cpmtrack;
using namespace testing_support;

namespace {

StepMatching match_graphs(const Snapshot& a, const Snapshot& b, int k) {
  return match_step(cpm_communities(a, k), cpm_communities(b, k), cpm_communities(join(a, b), k));
}

SnapshotSeries series_of(std::vector<Snapshot> snaps) {
  SnapshotSeries s;
  for (std::size_t t = 0; t < snaps.size(); ++t) {
    std::vector<WeightedEdge> e(snaps[t].edges().begin(), snaps[t].edges().end());
    s.snapshots.push_back(Snapshot::from_edges(t, std::move(e)));
  }
  return s;
}

std::vector<EventRecord> of_kind(const std::vector<EventRecord>& events, EventKind kind) {
  std::vector<EventRecord> out;
  std::ranges::copy_if(events, std::back_inserter(out), [&](const auto& e) { return e.kind == kind; });
  return out;
}

TEST(MatchStep, SingleCommunityEachSideIsMatched) {
  const auto a = cliques({{0, 1, 2, 3}});
  const auto b = cliques({{0, 1, 2, 3, 4}});
  const auto m = match_graphs(a, b, 4);
  EXPECT_EQ(m.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_TRUE(m.births.empty());
  EXPECT_TRUE(m.deaths.empty());
}

TEST(MatchStep, GreedyPrefersHigherOverlap) {
  // X={0,1,2,3}; Y1={0,1,2} (3/4), Y2={2,3,4,5} (2/6).
  const auto a = cliques({{0, 1, 2, 3}});
  const auto b = cliques({{0, 1, 2}, {2, 3, 4, 5}});
  const auto c_t1 = cpm_communities(b, 3);
  ASSERT_EQ(members_of(c_t1), (std::vector<NodeSet>{{0, 1, 2}, {2, 3, 4, 5}}));
  const auto m = match_graphs(a, b, 3);
  ASSERT_EQ(m.joint_groups.size(), 1u);
  EXPECT_EQ(m.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_EQ(m.births, (std::vector<std::size_t>{1}));

  const auto tr = build_timelines(series_of({a, b}), 3, 0.0);
  const auto splits = of_kind(tr.events, EventKind::kSplit);
  ASSERT_EQ(splits.size(), 1u);
  EXPECT_EQ(splits[0].t, 1u);
  EXPECT_EQ(splits[0].sources, (std::vector<std::size_t>{0}));
  EXPECT_EQ(splits[0].targets.size(), 2u);
}

TEST(MatchStep, LoneCommunityDies) {
  const auto a = cliques({{0, 1, 2, 3}});
  const auto m = match_graphs(a, Snapshot{}, 4);
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.deaths, (std::vector<std::size_t>{0}));
}

TEST(MatchStep, ZeroOverlapNeverMatches) {
  // Both communities percolate into one joint community but share no member.
  const auto a = cliques({{0, 1, 2}});
  const auto b = cliques({{3, 4, 5}, {1, 2, 3}});
  const auto cb = cpm_communities(b, 3);
  const auto m = match_step(cpm_communities(a, 3), cb, cpm_communities(join(a, b), 3));
  for (auto [x, y] : m.pairs) EXPECT_GT(intersection_size(NodeSet{0, 1, 2}, cb.communities[y].members), 0u);
}

TEST(MatchStep, TieBreaksOnSmallestMemberId) {
  // X={2,3,4,5} overlaps Y1={0,1,2,3} and Y2={4,5,6,7} by 2/6 each.
  const auto a = cliques({{2, 3, 4, 5}});
  const auto b = cliques({{0, 1, 2, 3}, {4, 5, 6, 7}});
  const auto m = match_graphs(a, b, 3);
  ASSERT_EQ(m.joint_groups.size(), 1u);
  EXPECT_EQ(m.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_EQ(m.births, (std::vector<std::size_t>{1}));
}

TEST(MatchStep, MismatchedJointCoverIsReported) {
  const auto a = cliques({{0, 1, 2, 3}});
  EXPECT_THROW(match_step(cpm_communities(a, 4), cpm_communities(a, 4), CommunityCover{}),
               InvariantViolation);
}

TEST(BuildTimelines, StaticSeriesIsUnchanged) {
  const auto g = cliques({{0, 1, 2, 3, 4}, {4, 5, 6, 7}, {10, 11, 12, 13, 14, 15}});
  const auto tr = build_timelines(series_of({g, g, g, g, g}), 4, 0.0);
  ASSERT_EQ(tr.timelines.size(), 3u);
  for (const auto& tl : tr.timelines) {
    EXPECT_EQ(tl.t0, 0u);
    EXPECT_EQ(tl.states.size(), 5u);
    EXPECT_TRUE(tl.alive_at_end);
    for (const auto& s : tl.states) EXPECT_EQ(s, tl.states.front());
  }
  for (const auto& e : tr.events) {
    EXPECT_TRUE(e.kind == EventKind::kBirth || e.kind == EventKind::kUnchanged);
    if (e.kind == EventKind::kBirth) EXPECT_EQ(e.t, 0u);
  }
  EXPECT_EQ(of_kind(tr.events, EventKind::kUnchanged).size(), 12u);
}

TEST(BuildTimelines, DeathIsStampedAtFirstAbsentStep) {
  std::vector<Snapshot> snaps;
  for (Step t = 0; t < 10; ++t) {
    snaps.push_back(t >= 3 && t <= 7 ? cliques({{0, 1, 2, 3}}) : graph({{8, 9}}));
  }
  const auto tr = build_timelines(series_of(snaps), 4, 0.0);
  ASSERT_EQ(tr.timelines.size(), 1u);
  EXPECT_EQ(tr.timelines[0].t0, 3u);
  EXPECT_EQ(tr.timelines[0].t_last(), 7u);
  EXPECT_FALSE(tr.timelines[0].alive_at_end);
  const auto deaths = of_kind(tr.events, EventKind::kDeath);
  ASSERT_EQ(deaths.size(), 1u);
  EXPECT_EQ(deaths[0].t, 8u);
  EXPECT_EQ(deaths[0].size_delta, -4);
  EXPECT_EQ(of_kind(tr.events, EventKind::kBirth)[0].t, 3u);
}

TEST(BuildTimelines, MergeContinuesBetterOverlappingParent) {
  const auto before = cliques({{0, 1, 2, 3, 4}, {5, 6, 7, 8}});
  // Bridge cliques laid along the ids wire both parents into one community.
  const auto after = cliques({{0, 1, 2, 3, 4}, {5, 6, 7, 8}, {2, 3, 4, 5}, {3, 4, 5, 6}, {4, 5, 6, 7}});
  ASSERT_EQ(cpm_communities(after, 4).communities.size(), 1u);
  const auto tr = build_timelines(series_of({before, after}), 4, 0.0);
  const auto merges = of_kind(tr.events, EventKind::kMerge);
  ASSERT_EQ(merges.size(), 1u);
  EXPECT_EQ(merges[0].t, 1u);
  EXPECT_EQ(merges[0].sources, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(merges[0].targets, (std::vector<std::size_t>{0}));
  EXPECT_EQ(tr.timelines[0].states.size(), 2u);
  EXPECT_FALSE(tr.timelines[1].alive_at_end);
  EXPECT_EQ(of_kind(tr.events, EventKind::kSplit).size(), 0u);
}

TEST(BuildTimelines, GrowthAndContractionCarrySizeDelta) {
  const auto a = cliques({{0, 1, 2, 3}});
  const auto b = cliques({{0, 1, 2, 3, 4, 5}});
  const auto tr = build_timelines(series_of({a, b, a}), 4, 0.0);
  ASSERT_EQ(tr.timelines.size(), 1u);
  const auto g = of_kind(tr.events, EventKind::kGrowth);
  const auto c = of_kind(tr.events, EventKind::kContraction);
  ASSERT_EQ(g.size(), 1u);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(g[0].size_delta, 2);
  EXPECT_EQ(c[0].size_delta, -2);
  EXPECT_EQ(c[0].t, 2u);
}

TEST(BuildTimelines, ReappearanceStartsNewTimeline) {
  const auto a = cliques({{0, 1, 2, 3}});
  const auto tr = build_timelines(series_of({a, Snapshot{}, a}), 4, 0.0);
  EXPECT_EQ(tr.timelines.size(), 2u);
  EXPECT_EQ(tr.timelines[1].t0, 2u);
}

/// Synthetic series with background noise and churn.
SnapshotSeries noisy_series(std::uint64_t seed) {
  auto s = turnover_schedule(4, 9, 12, 0.2);
  s.background_nodes = 40;
  s.background_p = 0.15;
  s.intra_p = 0.85;
  s.inter = {0.5, 6.0};
  return generate(s, seed).series;
}

TEST(TrackerProperties, MatchingInvariantsOnSyntheticSeries) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto series = noisy_series(seed);
    for (int k : {3, 4}) {
      const double w = 2.0;
      const auto tr = build_timelines(series, k, w);
      for (std::size_t s = 0; s < tr.matchings.size(); ++s) {
        const auto& m = tr.matchings[s];
        const auto& ct = tr.covers[s];
        const auto& ct1 = tr.covers[s + 1];
        EXPECT_EQ(ct.communities.size(), m.pairs.size() + m.deaths.size());
        EXPECT_EQ(ct1.communities.size(), m.pairs.size() + m.births.size());
        std::set<std::size_t> xs, ys;
        for (auto [x, y] : m.pairs) {
          EXPECT_TRUE(xs.insert(x).second);
          EXPECT_TRUE(ys.insert(y).second);
          EXPECT_GT(intersection_size(ct.communities[x].members, ct1.communities[y].members), 0u);
        }
        // Each community sits in exactly one joint group, and inside it.
        const auto joint = cpm_communities(
            join(threshold(series.snapshots[s], w), threshold(series.snapshots[s + 1], w)), k);
        std::vector<int> seen_t(ct.communities.size(), 0), seen_t1(ct1.communities.size(), 0);
        for (const auto& g : m.joint_groups) {
          for (auto x : g.from_t) {
            ++seen_t[x];
            EXPECT_TRUE(is_subset(ct.communities[x].members, joint.communities[g.joint_index].members));
          }
          for (auto y : g.from_t1) {
            ++seen_t1[y];
            EXPECT_TRUE(is_subset(ct1.communities[y].members, joint.communities[g.joint_index].members));
          }
        }
        EXPECT_TRUE(std::ranges::all_of(seen_t, [](int c) { return c == 1; }));
        EXPECT_TRUE(std::ranges::all_of(seen_t1, [](int c) { return c == 1; }));
      }
      for (const auto& tl : tr.timelines) {
        ASSERT_FALSE(tl.states.empty());
        for (const auto& st : tl.states) EXPECT_GE(st.size(), static_cast<std::size_t>(k));
      }
      for (const auto& e : tr.events) {
        if (e.kind == EventKind::kMerge) {
          EXPECT_GE(e.sources.size(), 2u);
          EXPECT_EQ(e.targets.size(), 1u);
        }
        if (e.kind == EventKind::kSplit) {
          EXPECT_EQ(e.sources.size(), 1u);
          EXPECT_GE(e.targets.size(), 2u);
        }
      }
    }
  }
}

TEST(TrackerProperties, ResultIndependentOfThreadCount) {
  const auto series = noisy_series(3);
  const auto one = build_timelines(series, 3, 2.0, 1);
  const auto many = build_timelines(series, 3, 2.0, 4);
  ASSERT_EQ(one.timelines.size(), many.timelines.size());
  for (std::size_t i = 0; i < one.timelines.size(); ++i) {
    EXPECT_EQ(one.timelines[i].t0, many.timelines[i].t0);
    EXPECT_EQ(one.timelines[i].states, many.timelines[i].states);
  }
  EXPECT_EQ(one.events, many.events);
}

TEST(Composition, StaticTimeline) {
  CommunityTimeline tl{0, 0, {{0, 1, 2}, {0, 1, 2}}, true};
  const auto p = composition_profile(tl);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].old_members, 0u);
  EXPECT_EQ(p[0].new_members, 3u);
  EXPECT_EQ(p[0].leaving_old + p[0].leaving_new, 0u);
  EXPECT_EQ(p[1].old_members, 3u);
  EXPECT_EQ(p[1].new_members, 0u);
}

TEST(Composition, Turnover) {
  CommunityTimeline tl{0, 0, {{0, 1}, {1, 2}}, true};
  const auto p = composition_profile(tl);
  EXPECT_EQ(p[0].new_members, 2u);
  EXPECT_EQ(p[0].leaving_new, 1u);
  EXPECT_EQ(p[1].old_members, 1u);
  EXPECT_EQ(p[1].new_members, 1u);
}

TEST(Composition, SingleStep) {
  CommunityTimeline tl{0, 4, {{0, 1, 2, 3}}, false};
  const auto p = composition_profile(tl);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].old_members, 0u);
  EXPECT_EQ(p[0].new_members, 4u);
  EXPECT_EQ(p[0].leaving_old + p[0].leaving_new, 0u);
}

TEST(EventKind, RoundTripsNames) {
  for (auto k : {EventKind::kBirth, EventKind::kDeath, EventKind::kGrowth, EventKind::kContraction,
                 EventKind::kUnchanged, EventKind::kMerge, EventKind::kSplit}) {
    EXPECT_EQ(event_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(event_kind_from_string("teleport"), std::invalid_argument);
}

}  // namespace
