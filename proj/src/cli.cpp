#include "cpmtrack/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpmtrack/cpm.hpp"
#include "cpmtrack/graph.hpp"
#include "cpmtrack/io.hpp"
#include "cpmtrack/metrics.hpp"
#include "cpmtrack/synth.hpp"
#include "cpmtrack/tracker.hpp"
#include "csv.hpp"

namespace fs = std::filesystem;

namespace cpmtrack {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Invalid flags or missing inputs; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string events;
  std::string attrs;
  std::string covers;
  std::string timelines;
  std::string schedule;
  std::string out;
  double window = 1.0;
  int k = 4;
  std::string w_star = "0";
  std::size_t bins = 10;
  std::size_t draws = 1000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  double width = 3.0;
  double min_coverage = 0.8;
  std::vector<std::size_t> size_classes{3, 6, 12, 24, 48};
  std::size_t s_bins = 8;
  std::size_t zeta_bins = 10;
  std::string heatmap_size = "birth";

  std::size_t communities = 3;
  std::size_t size = 20;
  std::size_t steps = 20;
  double replacement = 0.1;
  std::size_t background_nodes = 100;
  double background_p = 0.01;
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

/// Writes through a temporary file and renames it into place.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::ifstream open_input(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(std::string("cannot open ") + what + " file '" + path + "'");
  return in;
}

fs::path output_dir(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("missing --out");
  fs::create_directories(cfg.out);
  return fs::path(cfg.out);
}

void validate_common(const RunConfig& cfg) {
  if (cfg.k < 3) throw UsageError("--k must be at least 3");
  if (!(cfg.window > 0.0)) throw UsageError("--window must be positive");
  if (cfg.bins == 0) throw UsageError("--bins must be positive");
  if (cfg.draws == 0) throw UsageError("--draws must be positive");
}

SnapshotSeries load_series(const RunConfig& cfg) {
  auto in = open_input(cfg.events, "events");
  const auto events = read_events_csv(in);
  return load_events(events, cfg.window);
}

/// Resolves --wstar; "auto" takes the lower median of the per-snapshot
/// recommendations over non-empty snapshots.
double resolve_w_star(const RunConfig& cfg, const SnapshotSeries& series) {
  if (cfg.w_star != "auto") {
    auto value = detail::parse_double(cfg.w_star);
    if (!value || *value < 0.0) throw UsageError("--wstar must be a non-negative number or 'auto'");
    return *value;
  }
  std::vector<double> picks;
  for (const auto& s : series.snapshots) {
    if (!s.empty()) picks.push_back(select_parameters(s, cfg.k));
  }
  if (picks.empty()) return 0.0;
  std::sort(picks.begin(), picks.end());
  return picks[(picks.size() - 1) / 2];
}

ordered_json base_parameters(const RunConfig& cfg, double w_star) {
  ordered_json p;
  p["window"] = cfg.window;
  p["k"] = cfg.k;
  p["w_star"] = w_star;
  p["w_star_requested"] = cfg.w_star;
  return p;
}

void record_manifest(const fs::path& dir, const std::string& command, ordered_json parameters,
                     const std::vector<std::pair<std::string, std::string>>& inputs) {
  const fs::path path = dir / "manifest.json";
  ordered_json manifest;
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      manifest = ordered_json::parse(in);
    } catch (const nlohmann::json::exception&) {
      manifest = ordered_json();
    }
  }
  manifest["tool"] = "cpmtrack";
  manifest["version"] = kToolVersion;
  ordered_json entry;
  entry["parameters"] = std::move(parameters);
  ordered_json hashed = ordered_json::array();
  for (const auto& [role, file] : inputs) {
    if (file.empty()) continue;
    hashed.push_back({{"role", role}, {"path", file}, {"sha256", sha256_file(file)}});
  }
  entry["inputs"] = std::move(hashed);
  manifest["runs"][command] = std::move(entry);
  write_atomic(path, [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

std::string cover_file_name(Step t) {
  std::ostringstream name;
  name << "cover_" << std::setw(6) << std::setfill('0') << t << ".jsonl";
  return name.str();
}

int cmd_detect(const RunConfig& cfg, std::ostream& out) {
  validate_common(cfg);
  const auto series = load_series(cfg);
  const auto dir = output_dir(cfg);
  const double w_star = resolve_w_star(cfg, series);
  const auto covers = detect_covers(series, cfg.k, w_star, cfg.jobs);

  for (const auto& cover : covers) {
    write_atomic(dir / "covers" / cover_file_name(cover.t),
                 [&](std::ostream& o) { write_cover_jsonl(o, cover, series.names); });
  }
  std::ostringstream table;
  table << "t,nodes,edges,communities,largest,second_largest\n";
  for (std::size_t i = 0; i < covers.size(); ++i) {
    const auto th = threshold(series.snapshots[i], w_star);
    table << covers[i].t << ',' << th.nodes().size() << ',' << th.edge_count() << ','
          << covers[i].communities.size() << ',' << covers[i].largest_size() << ','
          << covers[i].second_largest_size() << '\n';
  }
  write_atomic(dir / "detect_summary.csv", [&](std::ostream& o) { o << table.str(); });
  out << table.str();
  record_manifest(dir, "detect", base_parameters(cfg, w_star), {{"events", cfg.events}});
  return kExitOk;
}

/// Loads covers written by `detect` and checks they agree with a fresh run.
void verify_covers(const RunConfig& cfg, const SnapshotSeries& series,
                   const std::vector<CommunityCover>& computed, double w_star) {
  const fs::path dir(cfg.covers);
  if (!fs::is_directory(dir)) throw UsageError("covers directory '" + cfg.covers + "' not found");
  for (const auto& cover : computed) {
    const fs::path file = dir / cover_file_name(cover.t);
    std::ifstream in(file);
    if (!in) throw std::runtime_error("missing cover file " + file.string());
    const auto loaded = read_covers_jsonl(in, series.names);
    if (loaded.size() > 1 || (loaded.size() == 1 && loaded.front().t != cover.t)) {
      throw std::runtime_error(file.string() + " holds communities of another step");
    }
    if (loaded.empty()) {
      if (!cover.communities.empty()) {
        throw std::runtime_error(file.string() + " is empty but step " + std::to_string(cover.t) +
                                 " has communities");
      }
      continue;
    }
    const auto& l = loaded.front();
    if (l.k != cfg.k || l.w_star != w_star) {
      throw std::runtime_error("parameter mismatch: " + file.string() + " was built with k=" +
                               std::to_string(l.k) + " w_star=" + detail::format_real(l.w_star) +
                               ", this run uses k=" + std::to_string(cfg.k) +
                               " w_star=" + detail::format_real(w_star));
    }
    bool same = l.communities.size() == cover.communities.size();
    for (std::size_t i = 0; same && i < l.communities.size(); ++i) {
      same = l.communities[i].members == cover.communities[i].members;
    }
    if (!same) throw std::runtime_error(file.string() + " does not match the event data");
  }
}

int cmd_track(const RunConfig& cfg, std::ostream& out) {
  validate_common(cfg);
  const auto series = load_series(cfg);
  const auto dir = output_dir(cfg);
  const double w_star = resolve_w_star(cfg, series);
  const auto result = build_timelines(series, cfg.k, w_star, cfg.jobs);
  if (!cfg.covers.empty()) verify_covers(cfg, series, result.covers, w_star);

  write_atomic(dir / "timelines.jsonl",
               [&](std::ostream& o) { write_timelines_jsonl(o, result.timelines, series.names); });
  write_atomic(dir / "lifecycle_events.csv",
               [&](std::ostream& o) { write_lifecycle_csv(o, result.events); });
  std::map<std::string, std::size_t> kinds;
  for (const auto& e : result.events) ++kinds[std::string(to_string(e.kind))];
  out << "timelines: " << result.timelines.size() << '\n';
  for (const auto& [kind, n] : kinds) out << kind << ": " << n << '\n';
  record_manifest(dir, "track", base_parameters(cfg, w_star),
                  {{"events", cfg.events}, {"covers", ""}});
  return kExitOk;
}

std::vector<double> parse_edges_or_uniform(std::size_t bins, double lo, double hi) {
  return uniform_edges(lo, hi, bins);
}

int cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validate_common(cfg);
  const auto series = load_series(cfg);
  const auto dir = output_dir(cfg);
  const double w_star = resolve_w_star(cfg, series);

  std::vector<CommunityCover> covers;
  std::vector<CommunityTimeline> timelines;
  if (!cfg.timelines.empty()) {
    auto in = open_input(cfg.timelines, "timelines");
    timelines = read_timelines_jsonl(in, series.names);
    covers = detect_covers(series, cfg.k, w_star, cfg.jobs);
  } else {
    auto result = build_timelines(series, cfg.k, w_star, cfg.jobs);
    covers = std::move(result.covers);
    timelines = std::move(result.timelines);
  }
  AttributeTable attrs;
  if (!cfg.attrs.empty()) {
    auto in = open_input(cfg.attrs, "attrs");
    attrs = read_attributes_csv(in, series.names);
  }

  RunHeader header{{"k", std::to_string(cfg.k)},
                   {"w_star", detail::format_real(w_star)},
                   {"window", detail::format_real(cfg.window)},
                   {"bins", std::to_string(cfg.bins)},
                   {"seed", std::to_string(cfg.seed)}};
  auto with = [&](std::initializer_list<std::pair<std::string, std::string>> extra) {
    RunHeader h = header;
    h.insert(h.end(), extra.begin(), extra.end());
    return h;
  };

  std::size_t censored = 0;
  for (const auto& tl : timelines) censored += tl.alive_at_end ? 1 : 0;
  if (timelines.size() == censored) {
    err << "warning: no uncensored timelines; lifetime statistics are empty\n";
  }

  const auto fig_bins = uniform_edges(0.0, 1.0, cfg.bins);
  const auto zeta_edges = uniform_edges(0.0, 1.0, cfg.zeta_bins);
  std::size_t max_size = cfg.k;
  for (const auto& tl : timelines) {
    for (const auto& s : tl.states) max_size = std::max(max_size, s.size());
  }
  const auto s_edges = parse_edges_or_uniform(cfg.s_bins, static_cast<double>(cfg.k),
                                              static_cast<double>(max_size) + 1.0);

  write_atomic(dir / "timeline_stats.csv", [&](std::ostream& o) {
    write_timeline_stats_csv(o, with({{"stationarity_denominator", "t_last-t0"},
                                      {"lifetime", "t_last-t0+1"}}),
                             timelines);
  });
  write_atomic(dir / "composition.csv",
               [&](std::ostream& o) { write_composition_csv(o, header, timelines); });
  const auto acf = mean_autocorrelation_by_birth_size(timelines, cfg.size_classes);
  write_atomic(dir / "autocorrelation.csv",
               [&](std::ostream& o) { write_autocorrelation_csv(o, header, acf); });
  const auto ages = age_size_profile(timelines);
  write_atomic(dir / "age_size.csv", [&](std::ostream& o) { write_age_size_csv(o, header, ages); });

  const HeatmapSize size_mode =
      cfg.heatmap_size == "mean" ? HeatmapSize::kMean : HeatmapSize::kBirth;
  const auto grid = lifespan_heatmap(timelines, s_edges, zeta_edges, size_mode);
  const auto grid_header = with({{"heatmap_size", cfg.heatmap_size},
                                 {"s_bins", std::to_string(cfg.s_bins)},
                                 {"zeta_bins", std::to_string(cfg.zeta_bins)}});
  write_atomic(dir / "lifespan_heatmap.csv",
               [&](std::ostream& o) { write_heatmap_csv(o, grid_header, grid); });
  write_atomic(dir / "lifespan_ridge.csv",
               [&](std::ostream& o) { write_ridge_csv(o, grid_header, grid); });

  const auto leave = abandonment_curve(timelines, series.snapshots, fig_bins);
  write_atomic(dir / "abandonment.csv",
               [&](std::ostream& o) { write_binned_csv(o, header, leave.p_leave, "p_leave"); });
  write_atomic(dir / "member_time.csv", [&](std::ostream& o) {
    write_binned_csv(o, with({{"ratio_measured_at", "first_step_in_timeline"}}), leave.member_time,
                     "mean_member_time");
  });
  const auto dis = disintegration_curve(timelines, series.snapshots, fig_bins);
  write_atomic(dir / "disintegration.csv", [&](std::ostream& o) {
    write_binned_csv(o, header, dis.p_disintegrate, "p_disintegrate");
  });
  write_atomic(dir / "community_lifetime.csv", [&](std::ostream& o) {
    write_binned_csv(o, with({{"ratio_measured_at", "birth"}}), dis.lifetime, "mean_lifetime");
  });

  WeightRatio pooled;
  std::ostringstream ratio_table;
  ratio_table << "t,intra_mean,inter_mean,intra_count,inter_count,ratio\n";
  for (std::size_t i = 0; i < covers.size(); ++i) {
    const auto r = weight_ratio(covers[i], threshold(series.snapshots[i], w_star));
    pooled += r;
    const auto ratio = r.ratio();
    ratio_table << covers[i].t << ','
                << (r.intra_count ? detail::format_real(r.intra_sum / static_cast<double>(r.intra_count)) : "")
                << ','
                << (r.inter_count ? detail::format_real(r.inter_sum / static_cast<double>(r.inter_count)) : "")
                << ',' << r.intra_count << ',' << r.inter_count << ','
                << (ratio ? detail::format_real(*ratio) : "") << '\n';
  }
  const auto pooled_ratio = pooled.ratio();
  ratio_table << "pooled,"
              << (pooled.intra_count ? detail::format_real(pooled.intra_sum / static_cast<double>(pooled.intra_count)) : "")
              << ','
              << (pooled.inter_count ? detail::format_real(pooled.inter_sum / static_cast<double>(pooled.inter_count)) : "")
              << ',' << pooled.intra_count << ',' << pooled.inter_count << ','
              << (pooled_ratio ? detail::format_real(*pooled_ratio) : "") << '\n';
  write_atomic(dir / "weight_ratio.csv", [&](std::ostream& o) {
    write_header(o, header);
    o << ratio_table.str();
  });

  ordered_json summary;
  summary["timelines"] = timelines.size();
  summary["censored"] = censored;
  double zeta_sum = 0.0;
  std::size_t zeta_n = 0;
  for (const auto& tl : timelines) {
    if (auto z = stationarity(tl)) {
      zeta_sum += *z;
      ++zeta_n;
    }
  }
  summary["mean_stationarity"] = zeta_n ? ordered_json(zeta_sum / static_cast<double>(zeta_n))
                                        : ordered_json(nullptr);
  // Single-state timelines have no ζ, so they are uncensored but off the grid.
  summary["heatmap_observations"] =
      std::accumulate(grid.counts.begin(), grid.counts.end(), std::size_t{0}) + grid.outside;
  summary["weight_ratio"] = pooled_ratio ? ordered_json(*pooled_ratio) : ordered_json(nullptr);

  if (!cfg.attrs.empty()) {
    HomogeneityConfig hc;
    hc.draws = cfg.draws;
    hc.seed = cfg.seed;
    hc.width = cfg.width;
    hc.min_coverage = cfg.min_coverage;
    for (auto mode : {HomogeneityMode::kCategorical, HomogeneityMode::kNumericWindow}) {
      hc.mode = mode;
      const auto h = homogeneity_ratio(covers, attrs, hc);
      const bool numeric = mode == HomogeneityMode::kNumericWindow;
      const std::string name = numeric ? "homogeneity_numeric.csv" : "homogeneity_categorical.csv";
      auto h_header = with({{"draws", std::to_string(cfg.draws)},
                            {"mode", numeric ? "numeric_window" : "categorical"}});
      if (numeric) h_header.emplace_back("width", detail::format_real(cfg.width));
      write_atomic(dir / name, [&](std::ostream& o) { write_homogeneity_csv(o, h_header, h); });
      summary[numeric ? "homogeneity_numeric_rows" : "homogeneity_categorical_rows"] = h.rows.size();
    }
  }
  write_atomic(dir / "summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
  out << summary.dump(2) << '\n';

  auto params = base_parameters(cfg, w_star);
  params["bins"] = cfg.bins;
  params["draws"] = cfg.draws;
  params["seed"] = cfg.seed;
  params["width"] = cfg.width;
  params["min_coverage"] = cfg.min_coverage;
  params["size_classes"] = cfg.size_classes;
  params["s_bins"] = cfg.s_bins;
  params["zeta_bins"] = cfg.zeta_bins;
  params["heatmap_size"] = cfg.heatmap_size;
  record_manifest(dir, "stats", std::move(params),
                  {{"events", cfg.events}, {"attrs", cfg.attrs}, {"timelines", cfg.timelines}});
  return kExitOk;
}

PlantedSchedule quick_schedule(const RunConfig& cfg) {
  PlantedSchedule s;
  s.steps = cfg.steps;
  s.k = cfg.k;
  s.background_nodes = cfg.background_nodes;
  s.background_p = cfg.background_p;
  for (std::size_t i = 0; i < cfg.communities; ++i) {
    PlantedCommunity c;
    c.size = cfg.size;
    c.replacement = cfg.replacement;
    c.zip = "z" + std::to_string(i);
    c.age = 25.0 + 10.0 * static_cast<double>(i);
    s.communities.push_back(std::move(c));
  }
  return s;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  PlantedSchedule schedule;
  if (!cfg.schedule.empty()) {
    auto in = open_input(cfg.schedule, "schedule");
    try {
      schedule = read_schedule_json(in);
    } catch (const ScheduleError& e) {
      throw UsageError(e.what());
    }
  } else {
    schedule = quick_schedule(cfg);
  }
  try {
    validate(schedule);
  } catch (const ScheduleError& e) {
    throw UsageError(std::string("invalid schedule: ") + e.what());
  }
  const auto dir = output_dir(cfg);
  const auto gen = generate(schedule, cfg.seed);
  write_atomic(dir / "events.csv", [&](std::ostream& o) { write_events_csv(o, gen.events); });
  write_atomic(dir / "attrs.csv",
               [&](std::ostream& o) { write_attributes_csv(o, gen.attrs, gen.series.names); });
  write_atomic(dir / "truth_timelines.jsonl", [&](std::ostream& o) {
    write_timelines_jsonl(o, gen.truth.timelines, gen.series.names);
  });
  write_atomic(dir / "truth_events.csv",
               [&](std::ostream& o) { write_lifecycle_csv(o, gen.truth.events); });
  write_atomic(dir / "schedule.json", [&](std::ostream& o) { write_schedule_json(o, schedule); });
  out << "steps: " << schedule.steps << "\nnodes: " << gen.series.names.size()
      << "\nevents: " << gen.events.size() << '\n';
  ordered_json params;
  params["seed"] = cfg.seed;
  params["schedule"] = "schedule.json";
  record_manifest(dir, "synth", std::move(params), {{"schedule", cfg.schedule}});
  return kExitOk;
}

void append_file(std::ostream& out, const fs::path& path, const std::string& title) {
  std::ifstream in(path);
  if (!in) return;
  out << "== " << title << " (" << path.filename().string() << ")\n" << in.rdbuf() << '\n';
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw UsageError("missing --out");
  const fs::path dir(cfg.out);
  if (!fs::is_directory(dir)) throw UsageError("output directory '" + cfg.out + "' not found");
  std::ostringstream report;
  append_file(report, dir / "manifest.json", "manifest");
  append_file(report, dir / "detect_summary.csv", "detection");
  if (std::ifstream in{dir / "lifecycle_events.csv"}) {
    const auto events = read_lifecycle_csv(in);
    std::map<std::string, std::size_t> kinds;
    for (const auto& e : events) ++kinds[std::string(to_string(e.kind))];
    report << "== lifecycle events\n";
    for (const auto& [kind, n] : kinds) report << kind << ": " << n << '\n';
    report << '\n';
  }
  append_file(report, dir / "summary.json", "statistics");
  append_file(report, dir / "weight_ratio.csv", "intra/inter weight ratio");
  append_file(report, dir / "lifespan_ridge.csv", "optimal stationarity per size");
  write_atomic(dir / "report.txt", [&](std::ostream& o) { o << report.str(); });
  out << report.str();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Overlapping community evolution analytics"};
  app.set_config("--config", "", "key=value configuration file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;

  app.add_option("--events", cfg.events, "Interaction events CSV (time,u,v,w)");
  app.add_option("--attrs", cfg.attrs, "Node attributes CSV (node,categorical,numeric)");
  app.add_option("--covers", cfg.covers, "Directory of covers written by detect");
  app.add_option("--timelines", cfg.timelines, "Timelines JSON-lines written by track");
  app.add_option("--schedule", cfg.schedule, "Planted schedule JSON for synth");
  app.add_option("--out", cfg.out, "Output directory");
  app.add_option("--window", cfg.window, "Snapshot window length in time units");
  app.add_option("--k", cfg.k, "Clique size");
  app.add_option("--wstar", cfg.w_star, "Weight threshold, or 'auto'");
  app.add_option("--bins", cfg.bins, "Bins on [0,1] for commitment curves");
  app.add_option("--draws", cfg.draws, "Random sets per size for homogeneity");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--jobs", cfg.jobs, "Worker threads for detection");
  app.add_option("--width", cfg.width, "Numeric attribute window width");
  app.add_option("--min-coverage", cfg.min_coverage, "Minimum attributed fraction per community");
  app.add_option("--size-classes", cfg.size_classes, "Birth-size class boundaries for C(t)");
  app.add_option("--s-bins", cfg.s_bins, "Size bins for the lifetime heatmap");
  app.add_option("--zeta-bins", cfg.zeta_bins, "Stationarity bins for the lifetime heatmap");
  app.add_option("--heatmap-size", cfg.heatmap_size, "Heatmap community size: birth or mean")
      ->check(CLI::IsMember({"birth", "mean"}));
  app.add_option("--communities", cfg.communities, "synth: number of planted communities");
  app.add_option("--size", cfg.size, "synth: planted community size");
  app.add_option("--steps", cfg.steps, "synth: number of steps");
  app.add_option("--replacement", cfg.replacement, "synth: per-step member replacement fraction");
  app.add_option("--background-nodes", cfg.background_nodes, "synth: background node count");
  app.add_option("--background-p", cfg.background_p, "synth: background edge probability");

  auto* detect = app.add_subcommand("detect", "Clique percolation covers per snapshot");
  auto* track = app.add_subcommand("track", "Match covers across steps into timelines");
  auto* stats = app.add_subcommand("stats", "Evolution statistics");
  auto* synth = app.add_subcommand("synth", "Synthetic series with planted communities");
  auto* report = app.add_subcommand("report", "Human-readable summary of an output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (detect->parsed()) return cmd_detect(cfg, out);
    if (track->parsed()) return cmd_track(cfg, out);
    if (stats->parsed()) return cmd_stats(cfg, out, err);
    if (synth->parsed()) return cmd_synth(cfg, out);
    if (report->parsed()) return cmd_report(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace cpmtrack
