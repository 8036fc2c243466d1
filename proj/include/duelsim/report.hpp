#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duelsim/engine.hpp"
#include "duelsim/errors.hpp"
#include "duelsim/ltr.hpp"

namespace duelsim {

// ---------------------------------------------------------------------------
// Per-condition metrics CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kMetricsHeader =
    "condition_id,policy,k,effect_w,checkpoint_t,mean_power,pair_id,pair_power,mean_cum_regret,"
    "condorcet_prop,per_pair_fpr,family_fpr";

/// One CSV line: a (checkpoint, pair) cell with the checkpoint-level values
/// repeated on every pair of that checkpoint.
struct MetricsRow {
  std::string condition_id;
  std::string policy;
  std::size_t k = 0;
  std::optional<double> effect_w;
  std::uint64_t checkpoint_t = 0;
  double mean_power = 0.0;
  std::string pair_id;
  double pair_power = 0.0;
  double mean_cum_regret = 0.0;
  std::optional<double> condorcet_prop;
  std::optional<double> per_pair_fpr;
  std::optional<double> family_fpr;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline std::string pair_id(const ArmPair& p) { return std::to_string(p.lo()) + "-" + std::to_string(p.hi()); }

inline std::vector<MetricsRow> metrics_rows(const AggregateReport& r) {
  std::vector<MetricsRow> rows;
  for (const CheckpointSummary& c : r.checkpoints)
    for (std::size_t p = 0; p < r.pairs.size(); ++p) {
      MetricsRow row;
      row.condition_id = r.condition_id;
      row.policy = to_string(r.policy);
      row.k = r.k;
      row.effect_w = r.effect_w;
      row.checkpoint_t = c.t;
      row.mean_power = c.mean_power;
      row.pair_id = pair_id(r.pairs[p]);
      row.pair_power = c.pair_power[p];
      row.mean_cum_regret = c.mean_cum_regret;
      row.condorcet_prop = c.condorcet_prop;
      row.per_pair_fpr = c.per_pair_fpr;
      row.family_fpr = c.family_fpr;
      rows.push_back(std::move(row));
    }
  return rows;
}

namespace detail {
inline std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }
}  // namespace detail

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) {
    out << r.condition_id << ',' << r.policy << ',' << r.k << ',' << detail::optional_field(r.effect_w) << ','
        << r.checkpoint_t << ',' << format_number(r.mean_power) << ',' << r.pair_id << ','
        << format_number(r.pair_power) << ',' << format_number(r.mean_cum_regret) << ','
        << detail::optional_field(r.condorcet_prop) << ',' << detail::optional_field(r.per_pair_fpr) << ','
        << detail::optional_field(r.family_fpr) << '\n';
  }
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  write_metrics_csv(out, rows);
  return out.str();
}

inline std::vector<MetricsRow> parse_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kMetricsHeader)
    throw ParseError("metrics CSV header does not match the expected schema");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_commas(detail::trim(line));
    if (f.size() != 12) throw ParseError("line " + std::to_string(line_no) + ": expected 12 fields");
    auto number = [&](std::size_t i) {
      const auto v = detail::parse_double(f[i]);
      if (!v) throw ParseError("line " + std::to_string(line_no) + ": field " + std::to_string(i + 1) + " not numeric");
      return *v;
    };
    auto optional = [&](std::size_t i) -> std::optional<double> {
      if (f[i].empty()) return std::nullopt;
      return number(i);
    };
    auto integer = [&](std::size_t i) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
      if (ec != std::errc{} || ptr != f[i].data() + f[i].size())
        throw ParseError("line " + std::to_string(line_no) + ": field " + std::to_string(i + 1) + " not an integer");
      return v;
    };
    MetricsRow r;
    r.condition_id = std::string(f[0]);
    r.policy = std::string(f[1]);
    r.k = static_cast<std::size_t>(integer(2));
    r.effect_w = optional(3);
    r.checkpoint_t = integer(4);
    r.mean_power = number(5);
    r.pair_id = std::string(f[6]);
    r.pair_power = number(7);
    r.mean_cum_regret = number(8);
    r.condorcet_prop = optional(9);
    r.per_pair_fpr = optional(10);
    r.family_fpr = optional(11);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summary JSON and manifest
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json report_json(const AggregateReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["condition_id"] = r.condition_id;
  j["environment_id"] = r.environment_id;
  j["policy"] = to_string(r.policy);
  j["k"] = r.k;
  j["effect_w"] = r.effect_w ? ordered_json(*r.effect_w) : ordered_json(nullptr);
  j["zero_effect"] = r.zero_effect;
  j["horizon"] = r.horizon;
  j["replications"] = r.replications;
  ordered_json pairs = ordered_json::array();
  for (const ArmPair& p : r.pairs) pairs.push_back(pair_id(p));
  j["pairs"] = pairs;
  ordered_json cps = ordered_json::array();
  for (const CheckpointSummary& c : r.checkpoints) {
    ordered_json cj;
    cj["t"] = c.t;
    cj["mean_power"] = c.mean_power;
    cj["pair_power"] = c.pair_power;
    cj["mean_cum_regret"] = c.mean_cum_regret;
    cj["regret_q10"] = c.regret_q10;
    cj["regret_median"] = c.regret_median;
    cj["regret_q90"] = c.regret_q90;
    cj["condorcet_prop"] = c.condorcet_prop ? ordered_json(*c.condorcet_prop) : ordered_json(nullptr);
    if (r.zero_effect) {
      cj["per_pair_fpr"] = *c.per_pair_fpr;
      cj["family_fpr"] = *c.family_fpr;
    }
    cps.push_back(std::move(cj));
  }
  j["checkpoints"] = cps;
  j["final_pair_power"] = r.final_pair_power;
  const double final_mean = r.final_regret.empty() ? 0.0 : r.checkpoints.back().mean_cum_regret;
  j["final_regret"] = {{"mean", final_mean},
                       {"q10", quantile(r.final_regret, 0.1)},
                       {"median", quantile(r.final_regret, 0.5)},
                       {"q90", quantile(r.final_regret, 0.9)}};
  if (r.condorcet_prop_mean) {
    j["condorcet_proportion"] = {{"replications", r.condorcet_proportions.size()},
                                 {"mean", *r.condorcet_prop_mean},
                                 {"median", *r.condorcet_prop_median},
                                 {"q10", quantile(r.condorcet_proportions, 0.1)},
                                 {"q90", quantile(r.condorcet_proportions, 0.9)}};
  }
  if (r.zero_effect)
    j["fpr"] = {{"per_pair", *r.checkpoints.back().per_pair_fpr}, {"family_wise", *r.checkpoints.back().family_fpr}};
  return j;
}

/// Resolved form of a condition; the manifest digest is computed over these.
inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["condition_id"] = c.id();
  j["policy"] = to_string(c.policy);
  if (const auto* s = std::get_if<SyntheticEnvironment>(&c.environment)) {
    j["environment"] = {{"type", "synthetic"},
                        {"k", s->k},
                        {"delta", s->delta_level},
                        {"zero_effect", s->zero_effect},
                        {"require_condorcet", s->require_condorcet}};
  } else {
    const auto& l = std::get<LtrEnvironment>(c.environment);
    ordered_json env = {{"type", "ltr"},
                        {"matrix", l.matrix_path},
                        {"size", l.submatrix.size},
                        {"mode", to_string(l.submatrix.mode)}};
    env["indices"] = l.submatrix.indices ? ordered_json(*l.submatrix.indices) : ordered_json(nullptr);
    if (l.matrix) {
      std::string flat;
      for (Arm i = 0; i < l.matrix->size(); ++i)
        for (double v : l.matrix->row(i)) flat += format_number(v) + ",";
      char hex[17];
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(flat)));
      env["matrix_digest"] = hex;
    }
    j["environment"] = env;
  }
  j["horizon"] = c.horizon;
  j["replications"] = c.replications;
  j["checkpoints"] = c.checkpoints;
  j["base_seed"] = c.base_seed;
  j["alpha_explore"] = c.alpha_explore;
  j["significance_alpha"] = c.significance_alpha;
  j["horizon_multiplier"] = c.horizon_multiplier;
  return j;
}

inline std::string config_digest(const std::vector<ExperimentConfig>& configs) {
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (const auto& c : configs) all.push_back(config_json(c));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(all.dump())));
  return hex;
}

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::uint64_t base_seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
};

inline nlohmann::ordered_json manifest_json(const RunManifest& m) {
  return {{"config_digest", m.config_digest}, {"tool_version", m.tool_version}, {"base_seed", m.base_seed},
          {"started", m.started},             {"finished", m.finished},         {"outputs", m.outputs}};
}

/// Writes through a temporary sibling and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// SVG charts
// ---------------------------------------------------------------------------

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline const char* series_color(const std::string& name, std::size_t index) {
  if (name == "dts") return "#1f4e9c";
  if (name == "uniform") return "#c0392b";
  static const char* palette[] = {"#2e8b57", "#8e44ad", "#d35400", "#7f8c8d"};
  return palette[index % 4];
}

struct Frame {
  double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 55;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline std::string svg_frame(const Frame& f, const std::string& title, const std::string& xlabel,
                             const std::string& ylabel) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  const double bx = f.left, by = f.height - f.bottom, tx = f.width - f.right, ty = f.top;
  s << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << tx << "\" y2=\"" << by << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << ty << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s << "<text x=\"" << bx - 6 << "\" y=\"" << svg_number(f.py(yv) + 4) << "\" text-anchor=\"end\">"
      << format_number(std::round(yv * 1000.0) / 1000.0) << "</text>\n";
  }
  s << "<text x=\"" << (bx + tx) / 2 << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(xlabel) << "</text>\n";
  s << "<text x=\"16\" y=\"" << (by + ty) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (by + ty) / 2
    << ")\">" << xml_escape(ylabel) << "</text>\n";
  return s.str();
}

inline std::string svg_legend(const Frame& f, const std::vector<std::string>& names) {
  std::ostringstream s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = f.top + 14 * static_cast<double>(i);
    s << "<rect x=\"" << f.width - f.right - 90 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
      << series_color(names[i], i) << "\"/>\n";
    s << "<text x=\"" << f.width - f.right - 75 << "\" y=\"" << y << "\">" << xml_escape(names[i]) << "</text>\n";
  }
  return s.str();
}

}  // namespace detail

/// Line chart, one polyline per series.
inline std::string render_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                     const std::vector<Series>& series) {
  detail::Frame f;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!any) {
        f.x0 = f.x1 = x;
        f.y0 = f.y1 = y;
        any = true;
      }
      f.x0 = std::min(f.x0, x);
      f.x1 = std::max(f.x1, x);
      f.y0 = std::min(f.y0, y);
      f.y1 = std::max(f.y1, y);
    }
  f.x0 = std::min(f.x0, 0.0);
  f.y0 = std::min(f.y0, 0.0);
  if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;
  if (f.y1 <= f.y0) f.y1 = f.y0 + 1.0;
  std::string out = detail::svg_frame(f, title, xlabel, ylabel);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    names.push_back(series[i].name);
    out += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" +
           std::string(detail::series_color(series[i].name, i)) + "\" data-series=\"" +
           detail::xml_escape(series[i].name) + "\" points=\"";
    for (std::size_t p = 0; p < series[i].points.size(); ++p) {
      if (p) out += ' ';
      out += detail::svg_number(f.px(series[i].points[p].first)) + "," +
             detail::svg_number(f.py(series[i].points[p].second));
    }
    out += "\"/>\n";
  }
  out += detail::svg_legend(f, names);
  out += "</svg>\n";
  return out;
}

/// Grouped bar chart: one group per category, one bar per series.
inline std::string render_bar_chart(const std::string& title, const std::string& ylabel,
                                    const std::vector<std::string>& categories,
                                    const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  detail::Frame f;
  f.x0 = 0.0;
  f.x1 = static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  f.y0 = 0.0;
  f.y1 = 1.0;
  for (const auto& s : series)
    for (double v : s.second) f.y1 = std::max(f.y1, v);
  std::string out = detail::svg_frame(f, title, "", ylabel);
  const double group = f.px(1.0) - f.px(0.0);
  const double bar = group * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < categories.size(); ++c) {
    out += "<text x=\"" + detail::svg_number(f.px(c + 0.5)) + "\" y=\"" + detail::svg_number(f.height - f.bottom + 16) +
           "\" text-anchor=\"middle\">" + detail::xml_escape(categories[c]) + "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    names.push_back(series[s].first);
    for (std::size_t c = 0; c < categories.size() && c < series[s].second.size(); ++c) {
      const double v = series[s].second[c];
      const double x = f.px(static_cast<double>(c)) + group * 0.1 + bar * static_cast<double>(s);
      out += "<rect x=\"" + detail::svg_number(x) + "\" y=\"" + detail::svg_number(f.py(v)) + "\" width=\"" +
             detail::svg_number(bar) + "\" height=\"" + detail::svg_number(f.py(0.0) - f.py(v)) + "\" fill=\"" +
             detail::series_color(series[s].first, s) + "\" data-series=\"" + detail::xml_escape(series[s].first) +
             "\"/>\n";
    }
  }
  out += detail::svg_legend(f, names);
  out += "</svg>\n";
  return out;
}

// ---------------------------------------------------------------------------
// Figure analogues from a metrics directory
// ---------------------------------------------------------------------------

enum class ReportFormat { csv, json, svg };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  if (s == "svg") return ReportFormat::svg;
  return std::nullopt;
}

/// Reads every metrics CSV in `dir` (files named after their condition).
inline std::vector<MetricsRow> load_metrics_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError("metrics directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<MetricsRow> rows;
  for (const auto& path : files) {
    std::ifstream in(path);
    std::string first;
    if (!std::getline(in, first) || detail::trim(first) != kMetricsHeader) continue;  // not a metrics file
    in.seekg(0);
    auto part = parse_metrics_csv(in);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw ParseError("no metrics CSV files in '" + dir.string() + "'");
  return rows;
}

/// Environment id of a condition id, i.e. without the trailing "-<policy>".
inline std::string environment_of(const MetricsRow& row) {
  const std::string suffix = "-" + row.policy;
  if (row.condition_id.size() > suffix.size() && row.condition_id.ends_with(suffix))
    return row.condition_id.substr(0, row.condition_id.size() - suffix.size());
  return row.condition_id;
}

/// One figure analogue: named series of (x, y) points, or bar groups.
struct Figure {
  std::string name;  // file stem
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool bars = false;
  std::vector<std::string> categories;  // bar charts
  std::vector<Series> series;           // bar charts store y-values in point.second, x = category index
};

inline std::vector<Figure> build_figures(const std::vector<MetricsRow>& rows) {
  // environment -> policy -> rows
  std::map<std::string, std::map<std::string, std::vector<const MetricsRow*>>> groups;
  for (const MetricsRow& r : rows) groups[environment_of(r)][r.policy].push_back(&r);

  std::vector<Figure> figures;
  Figure fpr{"fpr", "False positive rate (zero effect)", "", "family-wise FPR", true, {}, {}};
  std::map<std::string, Series> fpr_series;

  for (const auto& [env, by_policy] : groups) {
    Figure power{env + "_power", "Mean power over time: " + env, "participants", "mean power", false, {}, {}};
    Figure regret{env + "_regret", "Cumulative strong regret: " + env, "participants", "mean cumulative regret",
                  false, {}, {}};
    Figure condorcet{env + "_condorcet", "Condorcet winner presented: " + env, "participants", "proportion",
                     false, {}, {}};
    Figure final_power{env + "_final_power", "Final power per pair: " + env, "", "power", true, {}, {}};
    bool has_condorcet = false;
    bool zero = false;
    for (const auto& [policy, list] : by_policy) {
      Series p{policy, {}}, g{policy, {}}, c{policy, {}}, fp{policy, {}};
      std::uint64_t last_t = 0;
      std::uint64_t final_t = 0;
      for (const MetricsRow* r : list) final_t = std::max(final_t, r->checkpoint_t);
      for (const MetricsRow* r : list) {
        if (r->checkpoint_t != last_t) {
          last_t = r->checkpoint_t;
          const double t = static_cast<double>(r->checkpoint_t);
          p.points.emplace_back(t, r->mean_power);
          g.points.emplace_back(t, r->mean_cum_regret);
          if (r->condorcet_prop) {
            c.points.emplace_back(t, *r->condorcet_prop);
            has_condorcet = true;
          }
          if (r->checkpoint_t == final_t && r->family_fpr) {
            zero = true;
            auto& s = fpr_series[policy];
            s.name = policy;
            s.points.emplace_back(0.0, *r->family_fpr);
          }
        }
        if (r->checkpoint_t == final_t) {
          if (std::find(final_power.categories.begin(), final_power.categories.end(), r->pair_id) ==
              final_power.categories.end())
            final_power.categories.push_back(r->pair_id);
          fp.points.emplace_back(static_cast<double>(fp.points.size()), r->pair_power);
        }
      }
      power.series.push_back(std::move(p));
      regret.series.push_back(std::move(g));
      if (!c.points.empty()) condorcet.series.push_back(std::move(c));
      final_power.series.push_back(std::move(fp));
    }
    if (zero) fpr.categories.push_back(env);
    figures.push_back(std::move(power));
    figures.push_back(std::move(final_power));
    figures.push_back(std::move(regret));
    if (has_condorcet) figures.push_back(std::move(condorcet));
  }
  if (!fpr.categories.empty()) {
    for (auto& [policy, s] : fpr_series) {
      for (std::size_t i = 0; i < s.points.size(); ++i) s.points[i].first = static_cast<double>(i);
      fpr.series.push_back(s);
    }
    figures.push_back(std::move(fpr));
  }
  return figures;
}

inline std::string figure_csv(const Figure& f) {
  std::ostringstream out;
  if (f.bars) {
    out << "series,category,value\n";
    for (const auto& s : f.series)
      for (std::size_t i = 0; i < s.points.size() && i < f.categories.size(); ++i)
        out << s.name << ',' << f.categories[i] << ',' << format_number(s.points[i].second) << '\n';
  } else {
    out << "series,x,y\n";
    for (const auto& s : f.series)
      for (const auto& [x, y] : s.points) out << s.name << ',' << format_number(x) << ',' << format_number(y) << '\n';
  }
  return out.str();
}

inline std::string figure_json(const Figure& f) {
  nlohmann::ordered_json j;
  j["figure"] = f.name;
  j["title"] = f.title;
  j["kind"] = f.bars ? "bar" : "line";
  if (f.bars) j["categories"] = f.categories;
  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& s : f.series) {
    nlohmann::ordered_json sj;
    sj["name"] = s.name;
    if (f.bars) {
      std::vector<double> values;
      for (const auto& pt : s.points) values.push_back(pt.second);
      sj["values"] = values;
    } else {
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      for (const auto& [x, y] : s.points) pts.push_back({x, y});
      sj["points"] = pts;
    }
    series.push_back(std::move(sj));
  }
  j["series"] = series;
  return j.dump(2) + "\n";
}

inline std::string figure_svg(const Figure& f) {
  if (!f.bars) return render_line_chart(f.title, f.xlabel, f.ylabel, f.series);
  std::vector<std::pair<std::string, std::vector<double>>> bars;
  for (const auto& s : f.series) {
    std::vector<double> values;
    for (const auto& pt : s.points) values.push_back(pt.second);
    bars.emplace_back(s.name, std::move(values));
  }
  return render_bar_chart(f.title, f.ylabel, f.categories, bars);
}

/// Renders every figure analogue into `out_dir`; returns the written paths.
inline std::vector<std::filesystem::path> write_report(const std::vector<MetricsRow>& rows,
                                                       const std::filesystem::path& out_dir, ReportFormat format) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const Figure& f : build_figures(rows)) {
    std::filesystem::path path = out_dir / f.name;
    switch (format) {
      case ReportFormat::csv:
        path += ".csv";
        atomic_write(path, figure_csv(f));
        break;
      case ReportFormat::json:
        path += ".json";
        atomic_write(path, figure_json(f));
        break;
      case ReportFormat::svg:
        path += ".svg";
        atomic_write(path, figure_svg(f));
        break;
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace duelsim
