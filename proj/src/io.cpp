#include "cpmtrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"

namespace cpmtrack {

using ordered_json = nlohmann::ordered_json;

namespace {

NodeSet labels_to_ids(const nlohmann::json& labels, const NodeRegistry& names, std::size_t line) {
  if (!labels.is_array()) throw ParseError(line, "expected an array of node labels");
  NodeSet out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    if (!l.is_string()) throw ParseError(line, "node labels must be strings");
    auto id = names.find(l.get<std::string>());
    if (!id) throw ParseError(line, "unknown node '" + l.get<std::string>() + "'");
    out.push_back(*id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ordered_json ids_to_labels(const NodeSet& ids, const NodeRegistry& names) {
  ordered_json arr = ordered_json::array();
  for (NodeId v : ids) arr.push_back(names.label(v));
  return arr;
}

nlohmann::json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  if (!obj.contains(key)) throw ParseError(line_no, std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(line_no, std::string("field '") + key + "' has the wrong type");
  }
}

std::string join_ids(const std::vector<std::size_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<std::size_t> split_ids(const std::string& text, std::size_t line_no) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw ParseError(line_no, "malformed timeline id '" + part + "'");
    }
    out.push_back(value);
  }
  return out;
}

void write_edges(std::ostream& out, std::span<const double> edges, std::size_t i) {
  out << format_value(edges[i]) << ',' << format_value(edges[i + 1]);
}

}  // namespace

std::string format_value(double value) {
  if (std::isnan(value)) return {};
  return detail::format_real(value);
}

void write_header(std::ostream& out, const RunHeader& header) {
  for (const auto& [key, value] : header) out << "# " << key << '=' << value << '\n';
}

void write_cover_jsonl(std::ostream& out, const CommunityCover& cover, const NodeRegistry& names) {
  for (const auto& c : cover.communities) {
    ordered_json line;
    line["t"] = cover.t;
    line["k"] = cover.k;
    line["w_star"] = cover.w_star;
    line["members"] = ids_to_labels(c.members, names);
    out << line.dump() << '\n';
  }
}

std::vector<CommunityCover> read_covers_jsonl(std::istream& in, const NodeRegistry& names) {
  std::map<Step, CommunityCover> by_t;
  std::optional<int> k;
  std::optional<double> w_star;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto obj = parse_line(line, line_no);
    const auto t = field<Step>(obj, "t", line_no);
    const auto line_k = field<int>(obj, "k", line_no);
    const auto line_w = field<double>(obj, "w_star", line_no);
    if ((k && *k != line_k) || (w_star && *w_star != line_w)) {
      throw ParseError(line_no, "cover parameters differ from earlier lines");
    }
    k = line_k;
    w_star = line_w;
    auto& cover = by_t[t];
    cover.t = t;
    cover.k = line_k;
    cover.w_star = line_w;
    Community c;
    c.members = labels_to_ids(obj.at("members"), names, line_no);
    cover.communities.push_back(std::move(c));
  }
  std::vector<CommunityCover> out;
  for (auto& [t, cover] : by_t) {
    std::sort(cover.communities.begin(), cover.communities.end(),
              [](const Community& a, const Community& b) { return a.members < b.members; });
    out.push_back(std::move(cover));
  }
  return out;
}

void write_timelines_jsonl(std::ostream& out, std::span<const CommunityTimeline> timelines,
                           const NodeRegistry& names) {
  for (const auto& tl : timelines) {
    ordered_json line;
    line["id"] = tl.id;
    line["t0"] = tl.t0;
    line["alive_at_end"] = tl.alive_at_end;
    ordered_json states = ordered_json::array();
    for (const auto& s : tl.states) states.push_back(ids_to_labels(s, names));
    line["states"] = std::move(states);
    out << line.dump() << '\n';
  }
}

std::vector<CommunityTimeline> read_timelines_jsonl(std::istream& in, const NodeRegistry& names) {
  std::vector<CommunityTimeline> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto obj = parse_line(line, line_no);
    CommunityTimeline tl;
    tl.id = field<std::size_t>(obj, "id", line_no);
    tl.t0 = field<Step>(obj, "t0", line_no);
    tl.alive_at_end = field<bool>(obj, "alive_at_end", line_no);
    if (!obj.contains("states") || !obj["states"].is_array() || obj["states"].empty()) {
      throw ParseError(line_no, "timeline needs a non-empty 'states' array");
    }
    for (const auto& s : obj["states"]) tl.states.push_back(labels_to_ids(s, names, line_no));
    out.push_back(std::move(tl));
  }
  return out;
}

void write_lifecycle_csv(std::ostream& out, std::span<const EventRecord> events) {
  out << "t,kind,participants,size_delta\n";
  for (const auto& e : events) {
    out << e.t << ',' << to_string(e.kind) << ',' << join_ids(e.sources) << '>'
        << join_ids(e.targets) << ',' << e.size_delta << '\n';
  }
}

std::vector<EventRecord> read_lifecycle_csv(std::istream& in) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "t,kind,participants,size_delta") {
        throw ParseError(line_no, "expected header 't,kind,participants,size_delta'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv(line);
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    EventRecord e;
    auto t = detail::parse_double(fields[0]);
    auto delta = detail::parse_double(fields[3]);
    if (!t || !delta) throw ParseError(line_no, "malformed number");
    e.t = static_cast<Step>(*t);
    e.size_delta = static_cast<long>(*delta);
    try {
      e.kind = event_kind_from_string(fields[1]);
    } catch (const std::invalid_argument& err) {
      throw ParseError(line_no, err.what());
    }
    const auto arrow = fields[2].find('>');
    if (arrow == std::string::npos) throw ParseError(line_no, "participants need '>'");
    e.sources = split_ids(fields[2].substr(0, arrow), line_no);
    e.targets = split_ids(fields[2].substr(arrow + 1), line_no);
    out.push_back(std::move(e));
  }
  return out;
}

PlantedSchedule read_schedule_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScheduleError(std::string("invalid schedule JSON: ") + e.what());
  }
  PlantedSchedule s;
  try {
    auto num = [&](const nlohmann::json& obj, const char* key, auto& target) {
      if (obj.contains(key) && !obj[key].is_null()) obj[key].get_to(target);
    };
    auto law = [&](const char* key, WeightLaw& target) {
      if (!doc.contains(key)) return;
      num(doc[key], "lo", target.lo);
      num(doc[key], "hi", target.hi);
    };
    num(doc, "steps", s.steps);
    num(doc, "k", s.k);
    num(doc, "background_nodes", s.background_nodes);
    num(doc, "background_p", s.background_p);
    num(doc, "intra_p", s.intra_p);
    law("intra", s.intra);
    law("inter", s.inter);
    num(doc, "zip_values", s.zip_values);
    num(doc, "zip_purity", s.zip_purity);
    num(doc, "age_lo", s.age_lo);
    num(doc, "age_hi", s.age_hi);
    num(doc, "age_spread", s.age_spread);
    for (const auto& c : doc.value("communities", nlohmann::json::array())) {
      PlantedCommunity pc;
      num(c, "birth", pc.birth);
      if (c.contains("death") && !c["death"].is_null()) pc.death = c["death"].get<Step>();
      num(c, "size", pc.size);
      num(c, "sizes", pc.sizes);
      num(c, "replacement", pc.replacement);
      if (c.contains("leave") && !c["leave"].is_null()) {
        LeaveModel lm;
        num(c["leave"], "base", lm.base);
        num(c["leave"], "slope", lm.slope);
        pc.leave = lm;
      }
      if (c.contains("propensity")) {
        pc.propensity_lo = c["propensity"].at(0).get<double>();
        pc.propensity_hi = c["propensity"].at(1).get<double>();
      }
      num(c, "contacts", pc.contacts);
      num(c, "zip", pc.zip);
      if (c.contains("age") && !c["age"].is_null()) pc.age = c["age"].get<double>();
      s.communities.push_back(std::move(pc));
    }
    for (const auto& m : doc.value("merges", nlohmann::json::array())) {
      PlantedMerge pm;
      num(m, "step", pm.step);
      num(m, "absorbed", pm.absorbed);
      num(m, "into", pm.into);
      s.merges.push_back(pm);
    }
    for (const auto& m : doc.value("splits", nlohmann::json::array())) {
      PlantedSplit ps;
      num(m, "step", ps.step);
      num(m, "source", ps.source);
      num(m, "offspring", ps.offspring);
      num(m, "fraction", ps.fraction);
      s.splits.push_back(ps);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScheduleError(std::string("malformed schedule: ") + e.what());
  }
  return s;
}

void write_schedule_json(std::ostream& out, const PlantedSchedule& s) {
  ordered_json doc;
  doc["steps"] = s.steps;
  doc["k"] = s.k;
  doc["background_nodes"] = s.background_nodes;
  doc["background_p"] = s.background_p;
  doc["intra_p"] = s.intra_p;
  doc["intra"] = {{"lo", s.intra.lo}, {"hi", s.intra.hi}};
  doc["inter"] = {{"lo", s.inter.lo}, {"hi", s.inter.hi}};
  doc["zip_values"] = s.zip_values;
  doc["zip_purity"] = s.zip_purity;
  doc["age_lo"] = s.age_lo;
  doc["age_hi"] = s.age_hi;
  doc["age_spread"] = s.age_spread;
  ordered_json communities = ordered_json::array();
  for (const auto& c : s.communities) {
    ordered_json j;
    j["birth"] = c.birth;
    j["death"] = c.death ? ordered_json(*c.death) : ordered_json(nullptr);
    j["size"] = c.size;
    j["sizes"] = c.sizes;
    j["replacement"] = c.replacement;
    if (c.leave) j["leave"] = {{"base", c.leave->base}, {"slope", c.leave->slope}};
    j["propensity"] = {c.propensity_lo, c.propensity_hi};
    j["contacts"] = c.contacts;
    j["zip"] = c.zip;
    if (c.age) j["age"] = *c.age;
    communities.push_back(std::move(j));
  }
  doc["communities"] = std::move(communities);
  ordered_json merges = ordered_json::array();
  for (const auto& m : s.merges) {
    merges.push_back({{"step", m.step}, {"absorbed", m.absorbed}, {"into", m.into}});
  }
  doc["merges"] = std::move(merges);
  ordered_json splits = ordered_json::array();
  for (const auto& m : s.splits) {
    splits.push_back(
        {{"step", m.step}, {"source", m.source}, {"offspring", m.offspring}, {"fraction", m.fraction}});
  }
  doc["splits"] = std::move(splits);
  out << doc.dump(2) << '\n';
}

void write_binned_csv(std::ostream& out, const RunHeader& header, const BinnedCurve& curve,
                      const std::string& value_name) {
  write_header(out, header);
  out << "bin_lo,bin_hi," << value_name << ",count\n";
  for (std::size_t i = 0; i < curve.bins(); ++i) {
    write_edges(out, curve.bin_edges, i);
    out << ',' << (curve.occupied(i) ? format_value(curve.values[i]) : std::string()) << ','
        << curve.counts[i] << '\n';
  }
}

void write_autocorrelation_csv(std::ostream& out, const RunHeader& header,
                               std::span<const AutocorrelationCurve> curves) {
  write_header(out, header);
  out << "size_lo,size_hi,lag,mean_c,count\n";
  for (const auto& c : curves) {
    const std::string hi =
        c.size_hi == std::numeric_limits<std::size_t>::max() ? "" : std::to_string(c.size_hi);
    for (std::size_t i = 0; i < c.lags.size(); ++i) {
      out << c.size_lo << ',' << hi << ',' << c.lags[i] << ',' << format_value(c.mean[i]) << ','
          << c.counts[i] << '\n';
    }
  }
}

void write_age_size_csv(std::ostream& out, const RunHeader& header,
                        std::span<const AgeSizePoint> points) {
  write_header(out, header);
  out << "size,relative_age,count\n";
  for (const auto& p : points) {
    out << p.size << ',' << format_value(p.relative_age) << ',' << p.count << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, const RunHeader& header, const HeatmapGrid& grid) {
  write_header(out, header);
  out << "s_lo,s_hi,zeta_lo,zeta_hi,mean_lifetime,count\n";
  for (std::size_t s = 0; s < grid.s_bins(); ++s) {
    for (std::size_t z = 0; z < grid.zeta_bins(); ++z) {
      const auto c = grid.cell(s, z);
      write_edges(out, grid.s_edges, s);
      out << ',';
      write_edges(out, grid.zeta_edges, z);
      out << ',' << (grid.counts[c] ? format_value(grid.mean_lifetime[c]) : std::string()) << ','
          << grid.counts[c] << '\n';
    }
  }
}

void write_ridge_csv(std::ostream& out, const RunHeader& header, const HeatmapGrid& grid) {
  write_header(out, header);
  out << "s_lo,s_hi,zeta_lo,zeta_hi,mean_lifetime\n";
  for (std::size_t s = 0; s < grid.s_bins(); ++s) {
    write_edges(out, grid.s_edges, s);
    if (!grid.ridge[s]) {
      out << ",,,\n";
      continue;
    }
    const auto z = *grid.ridge[s];
    out << ',';
    write_edges(out, grid.zeta_edges, z);
    out << ',' << format_value(grid.mean_lifetime[grid.cell(s, z)]) << '\n';
  }
}

void write_homogeneity_csv(std::ostream& out, const RunHeader& header,
                           const HomogeneityResult& result) {
  write_header(out, header);
  out << "# skipped_low_coverage=" << result.skipped_low_coverage << '\n';
  out << "size,communities,n_real,n_rand,sigma_rand,ratio,ratio_low,ratio_high,real_per_size\n";
  for (const auto& r : result.rows) {
    const auto high = r.ratio_high();
    out << r.size << ',' << r.communities << ',' << format_value(r.n_real) << ','
        << format_value(r.n_rand) << ',' << format_value(r.sigma_rand) << ','
        << format_value(r.ratio()) << ',' << format_value(r.ratio_low()) << ','
        << (high ? format_value(*high) : std::string()) << ',' << format_value(r.real_per_size())
        << '\n';
  }
}

void write_timeline_stats_csv(std::ostream& out, const RunHeader& header,
                              std::span<const CommunityTimeline> timelines) {
  write_header(out, header);
  out << "id,t0,t_last,alive_at_end,birth_size,stationarity,lifetime\n";
  for (const auto& tl : timelines) {
    const auto zeta = stationarity(tl);
    const auto tau = lifetime(tl);
    out << tl.id << ',' << tl.t0 << ',' << tl.t_last() << ',' << (tl.alive_at_end ? 1 : 0) << ','
        << tl.states.front().size() << ',' << (zeta ? format_value(*zeta) : std::string()) << ','
        << (tau ? std::to_string(*tau) : std::string()) << '\n';
  }
}

void write_composition_csv(std::ostream& out, const RunHeader& header,
                           std::span<const CommunityTimeline> timelines) {
  write_header(out, header);
  out << "id,t,size,old,new,leaving_old,leaving_new\n";
  for (const auto& tl : timelines) {
    const auto profile = composition_profile(tl);
    for (std::size_t i = 0; i < profile.size(); ++i) {
      const auto& p = profile[i];
      out << tl.id << ',' << tl.t0 + i << ',' << tl.states[i].size() << ',' << p.old_members << ','
          << p.new_members << ',' << p.leaving_old << ',' << p.leaving_new << '\n';
    }
  }
}

}  // namespace cpmtrack
