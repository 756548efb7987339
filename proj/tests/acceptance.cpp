// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cpmtrack/cli.hpp"
#include "cpmtrack/io.hpp"
#include "cpmtrack/metrics.hpp"
#include "cpmtrack/synth.hpp"
#include "cpmtrack/tracker.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace cpmtrack;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

constexpr int kOracleGraphs = 200;
constexpr std::size_t kOracleMaxNodes = 25;
constexpr double kOracleSeconds = 30.0;
constexpr int kContainmentPairs = 100;
constexpr double kExactTol = 1e-12;
constexpr std::size_t kTurnoverSize = 50;
constexpr std::size_t kTurnoverSteps = 40;
constexpr int kTurnoverSeeds = 20;
constexpr double kTurnoverTol = 0.05;
constexpr double kTurnoverSeconds = 60.0;
constexpr double kRecoveryFloor = 0.95;
constexpr int kFidelitySeeds = 10;
constexpr double kSpearmanFloor = 0.9;
constexpr double kSigmaBand = 3.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Outcome cpm_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> n_dist(6, kOracleMaxNodes);
  std::uniform_real_distribution<double> p_dist(0.1, 0.5);
  int mismatches = 0;
  std::size_t communities = 0;
  for (int i = 0; i < kOracleGraphs; ++i) {
    const auto g = erdos_renyi(n_dist(rng), p_dist(rng), rng);
    for (int k : {3, 4, 5}) {
      const auto expected = oracle::cpm(g, k);
      communities += expected.size();
      if (members_of(cpm_communities(g, k)) != expected) ++mismatches;
      if (members_of(cpm_communities(g, k, PercolationMethod::kKCliques)) != expected) ++mismatches;
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < kOracleSeconds,
          fmt("%d graphs x k={3,4,5}, %zu oracle communities, %d mismatches, %.2fs (limit %.0fs)",
              kOracleGraphs, communities, mismatches, elapsed, kOracleSeconds)};
}

Outcome containment() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> n_dist(10, 25);
  std::uniform_real_distribution<double> p_dist(0.2, 0.6);
  std::uniform_real_distribution<double> keep_dist(0.4, 0.95);
  std::size_t checked = 0;
  std::size_t violations = 0;
  for (int i = 0; i < kContainmentPairs; ++i) {
    const auto big = erdos_renyi(n_dist(rng), p_dist(rng), rng);
    std::bernoulli_distribution keep(keep_dist(rng));
    std::vector<WeightedEdge> sub;
    for (const auto& e : big.edges()) {
      if (keep(rng)) sub.push_back(e);
    }
    const auto small = Snapshot::from_edges(0, sub);
    for (int k : {3, 4, 5}) {
      const auto outer = cpm_communities(big, k);
      CoverIndex index(outer);
      for (const auto& c : cpm_communities(small, k).communities) {
        ++checked;
        if (index.supersets_of(c.members).size() != 1) ++violations;
      }
    }
  }
  return {violations == 0, fmt("%d pairs x k={3,4,5}, %zu communities checked, %zu not inside exactly one",
                               kContainmentPairs, checked, violations)};
}

Outcome equations() {
  double worst = 0.0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const CommunityTimeline abc{0, 0, {{0, 1, 2}, {1, 2, 3}, {2, 3, 4}}, false};
  track(*stationarity(abc), 0.5);
  track(autocorrelation(abc, 0, 1), 0.5);
  track(autocorrelation(abc, 0, 2), 0.2);
  track(autocorrelation(abc, 1, 1), 0.5);
  const CommunityTimeline turn{0, 3, {{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 5, 6}, {0, 1, 5, 6}}, false};
  track(autocorrelation(turn, 3, 1), 3.0 / 5.0);
  track(autocorrelation(turn, 4, 1), 2.0 / 6.0);
  track(autocorrelation(turn, 3, 3), 2.0 / 6.0);
  track(*stationarity(turn), (3.0 / 5.0 + 2.0 / 6.0 + 1.0) / 3.0);
  const CommunityTimeline fixed{0, 0, {{4, 5, 6}, {4, 5, 6}, {4, 5, 6}}, false};
  track(*stationarity(fixed), 1.0);

  std::size_t samples = 0;
  std::size_t not_one = 0;
  auto sched = turnover_schedule(5, 12, 15, 0.25);
  sched.background_nodes = 100;
  sched.background_p = 0.03;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto out = generate(sched, seed);
    const auto tr = build_timelines(out.series, 4, 0.0);
    for (const auto* set : {&tr.timelines, &out.truth.timelines}) {
      for (const auto& tl : *set) {
        for (Step t = tl.t0; t <= tl.t_last(); ++t) {
          ++samples;
          if (autocorrelation(tl, t, 0) != 1.0) ++not_one;
        }
      }
    }
  }
  return {worst <= kExactTol && not_one == 0,
          fmt("max fixture error %.3g (tol %.0e); C(t,0)=1 on %zu/%zu sampled states", worst, kExactTol,
              samples - not_one, samples)};
}

Outcome turnover() {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;
  for (double r : {0.0, 0.1, 0.3}) {
    double measured = 0.0, truth = 0.0;
    std::size_t n_measured = 0, n_truth = 0;
    for (int seed = 1; seed <= kTurnoverSeeds; ++seed) {
      auto s = turnover_schedule(3, kTurnoverSize, kTurnoverSteps, r);
      // Background and outside contacts follow the inter law [0.1, 1.9];
      // intra edges start at 3, so w*=2 removes exactly the noise.
      s.background_nodes = 300;
      s.background_p = 0.002;
      const auto out = generate(s, static_cast<std::uint64_t>(seed));
      const auto tr = build_timelines(out.series, 4, 2.0);
      for (const auto& tl : tr.timelines) {
        if (auto z = stationarity(tl)) {
          measured += *z;
          ++n_measured;
        }
      }
      for (const auto& tl : out.truth.timelines) {
        if (auto z = stationarity(tl)) {
          truth += *z;
          ++n_truth;
        }
      }
    }
    const double zeta = measured / static_cast<double>(n_measured);
    const double zeta_truth = truth / static_cast<double>(n_truth);
    const bool ok = r == 0.0 ? zeta == 1.0 : std::abs((1.0 - zeta) - (1.0 - zeta_truth)) <= kTurnoverTol;
    pass &= ok;
    detail += fmt("r=%.1f: 1-zeta tracked %.4f, truth %.4f (2r/(1+r) %.4f, %zu timelines); ", r, 1.0 - zeta,
                  1.0 - zeta_truth, 2.0 * r / (1.0 + r), n_measured);
  }
  const double elapsed = seconds_since(start);
  pass &= elapsed < kTurnoverSeconds;
  detail += fmt("%.2fs (limit %.0fs)", elapsed, kTurnoverSeconds);
  return {pass, detail};
}

/// Tracked timeline ids that carry the most of planted community `c`'s members
/// at step `t`.
std::size_t tracked_id_of(const CommunityTimeline& planted, Step t,
                          std::span<const CommunityTimeline> found) {
  std::size_t best = static_cast<std::size_t>(-1), best_n = 0;
  for (const auto& f : found) {
    if (!f.alive_at(t)) continue;
    const auto n = intersection_size(planted.state_at(t), f.state_at(t));
    if (n > best_n) {
      best = f.id;
      best_n = n;
    }
  }
  return best;
}

Outcome fidelity() {
  constexpr Step kMergeStep = 10;
  constexpr Step kSplitStep = 20;
  double worst_recovery = 1.0;
  int bad_merges = 0, bad_splits = 0;
  for (int seed = 1; seed <= kFidelitySeeds; ++seed) {
    PlantedSchedule s = turnover_schedule(5, 20, 30, 0.2);
    s.background_nodes = 300;
    s.background_p = 0.02;
    s.intra_p = 0.9;
    s.communities[1].death = kMergeStep;
    s.communities[4].birth = kSplitStep;
    s.communities[4].size = 0;
    s.merges.push_back({kMergeStep, 1, 0});
    s.splits.push_back({kSplitStep, 2, 4, 0.5});
    const auto out = generate(s, static_cast<std::uint64_t>(seed));
    const auto tr = build_timelines(out.series, 4, 2.5);
    worst_recovery = std::min(worst_recovery, membership_recovery(out.truth.timelines, tr.timelines));

    const auto& truth = out.truth.timelines;
    std::size_t merges_at = 0, merges_elsewhere = 0, splits_at = 0, splits_elsewhere = 0;
    bool merge_ok = false, split_ok = false;
    for (const auto& e : tr.events) {
      if (e.kind == EventKind::kMerge) {
        if (e.t != kMergeStep) {
          ++merges_elsewhere;
          continue;
        }
        ++merges_at;
        const std::set<std::size_t> src(e.sources.begin(), e.sources.end());
        const auto a = tracked_id_of(truth[0], kMergeStep - 1, tr.timelines);
        const auto b = tracked_id_of(truth[1], kMergeStep - 1, tr.timelines);
        const auto into = tracked_id_of(truth[0], kMergeStep, tr.timelines);
        merge_ok = src.count(a) && src.count(b) && e.targets.size() == 1 && e.targets[0] == into;
      }
      if (e.kind == EventKind::kSplit) {
        if (e.t != kSplitStep) {
          ++splits_elsewhere;
          continue;
        }
        ++splits_at;
        const std::set<std::size_t> dst(e.targets.begin(), e.targets.end());
        const auto src = tracked_id_of(truth[2], kSplitStep - 1, tr.timelines);
        const auto a = tracked_id_of(truth[2], kSplitStep, tr.timelines);
        const auto b = tracked_id_of(truth[4], kSplitStep, tr.timelines);
        split_ok = e.sources == std::vector<std::size_t>{src} && dst.count(a) && dst.count(b);
      }
    }
    if (merges_at != 1 || merges_elsewhere != 0 || !merge_ok) ++bad_merges;
    if (splits_at != 1 || splits_elsewhere != 0 || !split_ok) ++bad_splits;
  }
  return {worst_recovery >= kRecoveryFloor && bad_merges == 0 && bad_splits == 0,
          fmt("worst membership recovery %.4f (floor %.2f) over %d seeds; seeds without exactly one "
              "matching merge: %d, split: %d",
              worst_recovery, kRecoveryFloor, kFidelitySeeds, bad_merges, bad_splits)};
}

double occupied_spearman(const BinnedCurve& c, std::string& shape) {
  std::vector<double> idx, val;
  for (std::size_t b = 0; b < c.bins(); ++b) {
    if (!c.occupied(b)) continue;
    idx.push_back(static_cast<double>(b));
    val.push_back(c.values[b]);
    shape += fmt("%.3f/%zu ", c.values[b], c.counts[b]);
  }
  return spearman(idx, val).value_or(0.0);
}

Outcome mechanisms() {
  const auto bins = uniform_edges(0.0, 1.0, 10);

  // Leaving: per-member probability rises with the member's outside share.
  std::vector<CommunityTimeline> leave_tls;
  std::vector<Snapshot> leave_snaps;
  BinnedCurve p_leave;
  {
    std::vector<AbandonmentCurves> runs;
    double counts[10] = {0}, hits[10] = {0};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      PlantedSchedule s = turnover_schedule(10, 20, 30, 0.0);
      for (auto& c : s.communities) {
        c.leave = LeaveModel{0.02, 0.4};
        c.propensity_lo = 0.0;
        c.propensity_hi = 0.9;
      }
      s.background_nodes = 500;
      const auto out = generate(s, seed);
      const auto tr = build_timelines(out.series, 4, 0.0);
      const auto a = abandonment_curve(tr.timelines, out.series.snapshots, bins);
      for (std::size_t b = 0; b < 10; ++b) {
        counts[b] += static_cast<double>(a.p_leave.counts[b]);
        if (a.p_leave.occupied(b)) hits[b] += a.p_leave.values[b] * static_cast<double>(a.p_leave.counts[b]);
      }
      p_leave = a.p_leave;
    }
    for (std::size_t b = 0; b < 10; ++b) {
      p_leave.counts[b] = static_cast<std::size_t>(counts[b]);
      p_leave.values[b] = counts[b] > 0 ? hits[b] / counts[b] : std::nan("");
    }
  }

  // Disintegration: community death hazard rises with its members' outside share.
  BinnedCurve p_dis;
  {
    double counts[10] = {0}, hits[10] = {0};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      std::mt19937_64 rng(seed * 7919);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      PlantedSchedule s;
      s.steps = 30;
      s.background_nodes = 1200;
      for (int c = 0; c < 60; ++c) {
        PlantedCommunity pc;
        pc.size = 6;
        pc.birth = static_cast<Step>(u(rng) * 10.0);
        const double pi = 0.9 * u(rng);
        pc.propensity_lo = pi;
        pc.propensity_hi = pi;
        const double hazard = 0.02 + 0.3 * pi;
        Step death = pc.birth + 1;
        while (death < s.steps && u(rng) >= hazard) ++death;
        if (death < s.steps) pc.death = death;
        s.communities.push_back(pc);
      }
      const auto out = generate(s, seed);
      const auto tr = build_timelines(out.series, 4, 0.0);
      const auto d = disintegration_curve(tr.timelines, out.series.snapshots, bins);
      for (std::size_t b = 0; b < 10; ++b) {
        counts[b] += static_cast<double>(d.p_disintegrate.counts[b]);
        if (d.p_disintegrate.occupied(b)) {
          hits[b] += d.p_disintegrate.values[b] * static_cast<double>(d.p_disintegrate.counts[b]);
        }
      }
      p_dis = d.p_disintegrate;
    }
    for (std::size_t b = 0; b < 10; ++b) {
      p_dis.counts[b] = static_cast<std::size_t>(counts[b]);
      p_dis.values[b] = counts[b] > 0 ? hits[b] / counts[b] : std::nan("");
    }
  }

  std::string leave_shape, dis_shape;
  const double rho_l = occupied_spearman(p_leave, leave_shape);
  const double rho_d = occupied_spearman(p_dis, dis_shape);
  return {rho_l > kSpearmanFloor && rho_d > kSpearmanFloor,
          fmt("spearman p_l %.3f, p_d %.3f (floor %.1f); p_l bins [%s] p_d bins [%s]", rho_l, rho_d,
              kSpearmanFloor, leave_shape.c_str(), dis_shape.c_str())};
}

Outcome homogeneity() {
  auto schedule = [](bool planted) {
    PlantedSchedule s;
    s.steps = 12;
    s.background_nodes = 800;
    for (std::size_t i = 0; i < 8; ++i) {
      PlantedCommunity c;
      c.size = 6 + 4 * i;
      c.replacement = 0.1;
      if (planted) {
        c.zip = "z" + std::to_string(i);
        c.age = 20.0 + 7.0 * static_cast<double>(i);
      }
      s.communities.push_back(c);
    }
    return s;
  };
  HomogeneityConfig cfg;
  cfg.draws = 1000;
  std::size_t planted_rows = 0, planted_bad = 0, random_rows = 0, random_bad = 0;
  double worst_random = 0.0;
  for (auto mode : {HomogeneityMode::kCategorical, HomogeneityMode::kNumericWindow}) {
    cfg.mode = mode;
    for (bool planted : {true, false}) {
      const auto out = generate(schedule(planted), planted ? 21 : 22);
      const auto covers = detect_covers(out.series, 4, 0.0);
      const auto h = homogeneity_ratio(covers, out.attrs, cfg);
      for (const auto& row : h.rows) {
        if (planted) {
          ++planted_rows;
          if (!(row.ratio() > 1.0)) ++planted_bad;
        } else {
          ++random_rows;
          if (!row.within_sigma(kSigmaBand)) ++random_bad;
          if (row.sigma_rand > 0.0) {
            worst_random = std::max(worst_random, std::abs(row.n_real - row.n_rand) / row.sigma_rand);
          }
        }
      }
    }
  }
  return {planted_bad == 0 && random_bad == 0 && planted_rows > 0 && random_rows > 0,
          fmt("planted rows with ratio<=1: %zu/%zu; random rows outside %.0f sigma: %zu/%zu (worst %.2f sigma)",
              planted_bad, planted_rows, kSigmaBand, random_bad, random_rows, worst_random)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "cpmtrack_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) { return run_cli(args, sink, sink); };
  bool ok = true;
  // Every run uses the same working path because the manifest records input
  // paths; results are moved aside afterwards.
  const std::string base = (root / "work").string();
  for (const char* dir : {"a", "b", "c"}) {
    const std::string jobs = std::string(dir) == "c" ? "4" : "1";
    ok &= cli({"synth", "--out", base + "/syn", "--communities", "5", "--size", "15", "--steps", "15",
               "--replacement", "0.2", "--background-nodes", "150", "--background-p", "0.02", "--seed", "8"}) == 0;
    for (const char* cmd : {"detect", "track", "stats"}) {
      ok &= cli({cmd, "--events", base + "/syn/events.csv", "--attrs", base + "/syn/attrs.csv", "--out",
                 base + "/out", "--wstar", "auto", "--draws", "200", "--seed", "3", "--jobs", jobs}) == 0;
    }
    ok &= cli({"report", "--out", base + "/out"}) == 0;
    fs::rename(base, root / dir);
  }
  std::size_t files = 0, differing = 0;
  for (auto it = fs::recursive_directory_iterator(root / "a"); it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(it->path(), root / "a");
    const auto bytes = slurp(it->path());
    if (bytes != slurp(root / "b" / rel) || bytes != slurp(root / "c" / rel)) ++differing;
  }
  fs::remove_all(root);
  return {ok && files > 0 && differing == 0,
          fmt("%zu output files compared across 2 reruns and --jobs 1 vs 4; %zu differ%s", files, differing,
              ok ? "" : "; a command failed")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {"1 cpm-oracle-equivalence", cpm_oracle},
      {"2 containment-monotonicity", containment},
      {"3 autocorrelation-stationarity-exactness", equations},
      {"4 turnover-calibration", turnover},
      {"5 tracking-fidelity", fidelity},
      {"6 mechanism-recovery", mechanisms},
      {"7 homogeneity-sanity", homogeneity},
      {"8 determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
