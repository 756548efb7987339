#pragma once

#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "cpmtrack/cpm.hpp"
#include "cpmtrack/graph.hpp"

namespace cpmtrack {

/// Raised when a community cannot be placed in the joint cover, which means
/// the covers were built with mismatched parameters.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Communities of cover_t and cover_t1 that sit inside one joint community.
struct JointGroup {
  std::size_t joint_index = 0;
  std::vector<std::size_t> from_t;
  std::vector<std::size_t> from_t1;
};

/// Pairing of communities between steps t and t+1. All indices refer to
/// positions in the respective covers.
struct StepMatching {
  Step t = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> births;
  std::vector<std::size_t> deaths;
  std::vector<JointGroup> joint_groups;
};

/// Matches communities at t and t+1 inside each joint group, greedily in
/// descending Jaccard overlap. Ties go to the larger intersection, then to the
/// pair with the smaller minimum member id. Disjoint pairs never match.
StepMatching match_step(const CommunityCover& cover_t, const CommunityCover& cover_t1,
                        const CommunityCover& joint_cover);

struct CommunityTimeline {
  std::size_t id = 0;
  Step t0 = 0;
  std::vector<NodeSet> states;
  bool alive_at_end = false;

  Step t_last() const { return t0 + states.size() - 1; }
  bool alive_at(Step t) const { return t >= t0 && t <= t_last(); }
  const NodeSet& state_at(Step t) const { return states.at(t - t0); }
};

enum class EventKind { kBirth, kDeath, kGrowth, kContraction, kUnchanged, kMerge, kSplit };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view text);

/// One lifecycle event, stamped with the step at which the new state is
/// observed (a death at t means the community is gone at t).
///
/// sources/targets hold timeline ids: birth has only a target, death only a
/// source, growth/contraction/unchanged one of each. A merge lists every
/// timeline entering the joint group and the single continuation; a split
/// lists the continuing source and every timeline leaving the group.
struct EventRecord {
  Step t = 0;
  EventKind kind = EventKind::kBirth;
  std::vector<std::size_t> sources;
  std::vector<std::size_t> targets;
  long size_delta = 0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct TrackingResult {
  std::vector<CommunityCover> covers;
  std::vector<StepMatching> matchings;
  std::vector<CommunityTimeline> timelines;
  std::vector<EventRecord> events;
};

/// Covers of every thresholded snapshot, computed on up to `jobs` threads.
std::vector<CommunityCover> detect_covers(const SnapshotSeries& series, int k, double w_star,
                                          unsigned jobs = 1);

/// Stitches precomputed per-step matchings into timelines and events.
void stitch(TrackingResult& result);

/// Runs detection, joint-graph matching and stitching over the whole series.
TrackingResult build_timelines(const SnapshotSeries& series, int k, double w_star,
                               unsigned jobs = 1);

struct CompositionCounts {
  std::size_t old_members = 0;
  std::size_t new_members = 0;
  std::size_t leaving_old = 0;
  std::size_t leaving_new = 0;
};

/// Per-step split of a timeline's members into those carried over from the
/// previous state and newcomers, and how many of each leave at the next step.
std::vector<CompositionCounts> composition_profile(const CommunityTimeline& tl);

}  // namespace cpmtrack
