#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpmtrack/graph.hpp"
#include "cpmtrack/tracker.hpp"

namespace cpmtrack {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform weight law on [lo, hi].
struct WeightLaw {
  double lo = 0.0;
  double hi = 0.0;
};

/// A member leaves at each step with probability base + slope * propensity,
/// clamped to [0, 1].
struct LeaveModel {
  double base = 0.0;
  double slope = 0.0;
};

struct PlantedCommunity {
  Step birth = 0;
  /// First step at which the community no longer exists; unset means it
  /// survives to the last step.
  std::optional<Step> death;
  std::size_t size = 0;
  /// Optional per-step target sizes, indexed from the birth step. The last
  /// entry holds for later steps.
  std::vector<std::size_t> sizes;
  /// Fraction of members swapped for fresh nodes at every step after birth.
  double replacement = 0.0;
  /// When set, members leave stochastically instead of by `replacement` and
  /// are topped up with fresh nodes.
  std::optional<LeaveModel> leave;
  /// Members draw a propensity uniformly from [lo, hi]: the share of their
  /// link weight that goes to outside contacts.
  double propensity_lo = 0.0;
  double propensity_hi = 0.0;
  std::size_t contacts = 2;
  /// Planted categorical value (empty: drawn at random like background).
  std::string zip;
  /// Planted numeric centre (unset: drawn at random like background).
  std::optional<double> age;
};

/// At `step`, every member of `absorbed` joins `into` and `absorbed` ends.
struct PlantedMerge {
  Step step = 0;
  std::size_t absorbed = 0;
  std::size_t into = 0;
};

/// At `step`, a random `fraction` of `source`'s members leave to form
/// `offspring`, whose own birth must be `step`.
struct PlantedSplit {
  Step step = 0;
  std::size_t source = 0;
  std::size_t offspring = 0;
  double fraction = 0.5;
};

struct PlantedSchedule {
  std::size_t steps = 1;
  int k = 4;
  std::vector<PlantedCommunity> communities;
  std::vector<PlantedMerge> merges;
  std::vector<PlantedSplit> splits;

  /// Nodes that belong to no community at start.
  std::size_t background_nodes = 0;
  /// Per-pair probability of a background edge among all nodes.
  double background_p = 0.0;
  /// Per-pair probability of an edge between two members of one community.
  double intra_p = 1.0;
  WeightLaw intra{3.0, 7.0};
  WeightLaw inter{0.1, 1.9};

  std::size_t zip_values = 20;
  /// Probability that a member of a community with a planted zip carries it.
  double zip_purity = 0.8;
  double age_lo = 18.0;
  double age_hi = 80.0;
  /// Members of a community with a planted age draw from centre ± spread.
  double age_spread = 1.0;
};

struct GroundTruth {
  /// Ids equal the planted community index.
  std::vector<CommunityTimeline> timelines;
  /// Births, deaths, merges and splits only.
  std::vector<EventRecord> events;
};

struct SynthOutput {
  SnapshotSeries series;
  AttributeTable attrs;
  GroundTruth truth;
  /// The series as an event stream with one time unit per step.
  std::vector<InteractionEvent> events;
};

/// Throws ScheduleError describing the first inconsistency.
void validate(const PlantedSchedule& schedule);

/// Deterministic for a given schedule and seed.
SynthOutput generate(const PlantedSchedule& schedule, std::uint64_t seed);

/// Node labels used by the generator.
std::string synth_label(NodeId id);

}  // namespace cpmtrack
