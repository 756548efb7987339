#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cpmtrack/cpm.hpp"
#include "cpmtrack/graph.hpp"
#include "cpmtrack/tracker.hpp"

namespace cpmtrack {

/// Jaccard overlap |A(t0) ∩ A(t0+lag)| / |A(t0) ∪ A(t0+lag)| of one timeline.
/// `t0` is an absolute step. Throws std::out_of_range outside the span.
double autocorrelation(const CommunityTimeline& tl, Step t0, Step lag);

double jaccard(std::span<const NodeId> a, std::span<const NodeId> b);

/// Mean consecutive-step autocorrelation, averaged over the t_last - t0 pairs.
/// Absent for single-step timelines.
std::optional<double> stationarity(const CommunityTimeline& tl);

/// Number of snapshots the timeline exists in. Absent for timelines still
/// alive at the last snapshot, which are censored.
std::optional<std::size_t> lifetime(const CommunityTimeline& tl);

/// Equal-width bin edges over [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

/// Index of the half-open bin [e_i, e_{i+1}) holding x; the last bin also
/// takes its upper edge.
std::optional<std::size_t> bin_of(std::span<const double> edges, double x);

struct BinnedCurve {
  std::vector<double> bin_edges;
  /// Per-bin mean or probability; meaningful only where counts > 0.
  std::vector<double> values;
  std::vector<std::size_t> counts;

  std::size_t bins() const { return values.size(); }
  bool occupied(std::size_t i) const { return counts[i] > 0; }
  std::size_t total() const;
};

/// ⟨C(lag)⟩ for timelines whose birth size falls in [size_lo, size_hi).
struct AutocorrelationCurve {
  std::size_t size_lo = 0;
  std::size_t size_hi = 0;
  std::vector<Step> lags;
  std::vector<double> mean;
  std::vector<std::size_t> counts;
};

/// Averages C over every timeline in the class and every valid starting step.
/// `size_edges` are ascending class boundaries; a class is [e_i, e_{i+1}),
/// and the last class is unbounded above. Lags without samples are omitted.
std::vector<AutocorrelationCurve> mean_autocorrelation_by_birth_size(
    std::span<const CommunityTimeline> timelines, std::span<const std::size_t> size_edges);

struct AgeSizePoint {
  std::size_t size = 0;
  double relative_age = 0.0;
  std::size_t count = 0;
};

struct AgeObservation {
  std::size_t size = 0;
  Step age = 0;
};

/// Mean age per community size, divided by the mean age over all
/// observations. Empty if the mean age is zero.
std::vector<AgeSizePoint> age_size_profile(std::span<const AgeObservation> observations);

/// Profile over every (state size, steps since birth) of every timeline.
std::vector<AgeSizePoint> age_size_profile(std::span<const CommunityTimeline> timelines);

struct CommitmentRatios {
  double w_in = 0.0;
  double w_out = 0.0;

  /// w_out / (w_in + w_out); absent when the node has no weight at all.
  std::optional<double> outside_share() const;
};

/// Weight of `node`'s edges to fellow members and to everyone else.
/// Throws std::domain_error if `node` is not a member.
CommitmentRatios commitment(NodeId node, std::span<const NodeId> members, const Adjacency& adj);
CommitmentRatios commitment(NodeId node, std::span<const NodeId> members, const Snapshot& s);

/// Internal edges (each counted once) against boundary edges.
CommitmentRatios community_commitment(std::span<const NodeId> members, const Adjacency& adj);

struct AbandonmentCurves {
  /// Probability of leaving at the next step against w_out/(w_in+w_out).
  BinnedCurve p_leave;
  /// Mean uninterrupted membership length against the ratio at joining.
  BinnedCurve member_time;
};

/// `snapshots[t]` must be the graph observed at step t; commitment weights are
/// taken from it as given (pass the raw series to include sub-threshold ties).
/// Member runs still going at the end of a surviving timeline are censored
/// from the inset.
AbandonmentCurves abandonment_curve(std::span<const CommunityTimeline> timelines,
                                    std::span<const Snapshot> snapshots,
                                    std::span<const double> bins);

struct DisintegrationCurves {
  BinnedCurve p_disintegrate;
  /// Mean lifetime against the community's ratio at birth; censored
  /// timelines excluded.
  BinnedCurve lifetime;
};

DisintegrationCurves disintegration_curve(std::span<const CommunityTimeline> timelines,
                                          std::span<const Snapshot> snapshots,
                                          std::span<const double> bins);

/// Sums behind w_c / w_ic; accumulate over snapshots to pool them.
struct WeightRatio {
  double intra_sum = 0.0;
  std::size_t intra_count = 0;
  double inter_sum = 0.0;
  std::size_t inter_count = 0;

  /// Absent when either class of edges is empty.
  std::optional<double> ratio() const;
  WeightRatio& operator+=(const WeightRatio& o);
};

/// Splits the edges of `s` by whether their endpoints share a community of
/// `cover`.
WeightRatio weight_ratio(const CommunityCover& cover, const Snapshot& s);

enum class HomogeneityMode { kCategorical, kNumericWindow };

struct HomogeneityConfig {
  HomogeneityMode mode = HomogeneityMode::kCategorical;
  /// Window width for numeric mode; values v_i, v_j share a window iff
  /// |v_i - v_j| < width.
  double width = 3.0;
  std::size_t draws = 1000;
  std::uint64_t seed = 1;
  /// Communities with a smaller fraction of attributed members are skipped.
  double min_coverage = 0.8;
};

/// ⟨n_real⟩ against ⟨n_rand⟩ for communities of one size.
struct HomogeneityRow {
  std::size_t size = 0;
  std::size_t communities = 0;
  double n_real = 0.0;
  double n_rand = 0.0;
  double sigma_rand = 0.0;

  double ratio() const { return n_real / n_rand; }
  double ratio_low() const { return n_real / (n_rand + sigma_rand); }
  /// Absent when n_rand - sigma_rand is not positive.
  std::optional<double> ratio_high() const;
  double real_per_size() const { return n_real / static_cast<double>(size); }
  bool within_sigma(double n_sigma) const;
};

struct HomogeneityResult {
  std::vector<HomogeneityRow> rows;
  std::size_t skipped_low_coverage = 0;
};

/// Largest subset sharing one categorical value among the attributed members.
std::size_t largest_same_value(std::span<const NodeId> members, const AttributeTable& attrs);

/// Largest subset whose numeric values fit in one window of `width`.
std::size_t largest_window(std::span<const NodeId> members, const AttributeTable& attrs,
                           double width);

HomogeneityResult homogeneity_ratio(std::span<const CommunityCover> covers,
                                    const AttributeTable& attrs,
                                    const HomogeneityConfig& config);

enum class HeatmapSize { kBirth, kMean };

struct HeatmapGrid {
  std::vector<double> s_edges;
  std::vector<double> zeta_edges;
  /// Row-major [s_bin][zeta_bin].
  std::vector<double> mean_lifetime;
  std::vector<std::size_t> counts;
  /// Per s-bin, the ζ-bin with the largest mean lifetime; absent for empty rows.
  std::vector<std::optional<std::size_t>> ridge;
  /// Eligible timelines that fell outside the grid.
  std::size_t outside = 0;

  std::size_t s_bins() const { return s_edges.size() - 1; }
  std::size_t zeta_bins() const { return zeta_edges.size() - 1; }
  std::size_t cell(std::size_t s, std::size_t z) const { return s * zeta_bins() + z; }
};

/// Mean lifetime per (size, stationarity) cell over uncensored timelines with
/// a defined stationarity.
HeatmapGrid lifespan_heatmap(std::span<const CommunityTimeline> timelines,
                             std::span<const double> s_edges, std::span<const double> zeta_edges,
                             HeatmapSize size_mode = HeatmapSize::kBirth);

/// Spearman rank correlation with average ranks for ties. Absent when either
/// side is constant or fewer than two samples.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

}  // namespace cpmtrack
