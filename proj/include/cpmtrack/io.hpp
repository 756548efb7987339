#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpmtrack/cpm.hpp"
#include "cpmtrack/graph.hpp"
#include "cpmtrack/metrics.hpp"
#include "cpmtrack/synth.hpp"
#include "cpmtrack/tracker.hpp"

namespace cpmtrack {

/// Ordered key=value pairs written as `# key=value` comment lines on top of
/// every metric CSV.
using RunHeader = std::vector<std::pair<std::string, std::string>>;

void write_header(std::ostream& out, const RunHeader& header);

/// One line per community: {"t":..,"k":..,"w_star":..,"members":[labels]}.
void write_cover_jsonl(std::ostream& out, const CommunityCover& cover, const NodeRegistry& names);

/// Covers keyed by the t field of each line, ascending. Communities come back
/// without clique lists. Throws ParseError if k or w_star differ between lines.
std::vector<CommunityCover> read_covers_jsonl(std::istream& in, const NodeRegistry& names);

/// {"id":..,"t0":..,"alive_at_end":..,"states":[[labels],..]} per timeline.
void write_timelines_jsonl(std::ostream& out, std::span<const CommunityTimeline> timelines,
                           const NodeRegistry& names);
std::vector<CommunityTimeline> read_timelines_jsonl(std::istream& in, const NodeRegistry& names);

/// `t,kind,participants,size_delta`, participants as `sources>targets` with
/// ';'-separated timeline ids.
void write_lifecycle_csv(std::ostream& out, std::span<const EventRecord> events);
std::vector<EventRecord> read_lifecycle_csv(std::istream& in);

/// Schedule from a JSON document; absent keys keep their defaults.
PlantedSchedule read_schedule_json(std::istream& in);
void write_schedule_json(std::ostream& out, const PlantedSchedule& schedule);

void write_binned_csv(std::ostream& out, const RunHeader& header, const BinnedCurve& curve,
                      const std::string& value_name);
void write_autocorrelation_csv(std::ostream& out, const RunHeader& header,
                               std::span<const AutocorrelationCurve> curves);
void write_age_size_csv(std::ostream& out, const RunHeader& header,
                        std::span<const AgeSizePoint> points);
void write_heatmap_csv(std::ostream& out, const RunHeader& header, const HeatmapGrid& grid);
void write_ridge_csv(std::ostream& out, const RunHeader& header, const HeatmapGrid& grid);
void write_homogeneity_csv(std::ostream& out, const RunHeader& header,
                           const HomogeneityResult& result);

/// Per-timeline table: id, t0, t_last, alive_at_end, birth size, ζ, τ*.
void write_timeline_stats_csv(std::ostream& out, const RunHeader& header,
                              std::span<const CommunityTimeline> timelines);
void write_composition_csv(std::ostream& out, const RunHeader& header,
                           std::span<const CommunityTimeline> timelines);

/// Formats a real for CSV/JSON output; empty for NaN.
std::string format_value(double value);

}  // namespace cpmtrack
