#include "curvespace/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "curvespace/common.hpp"

namespace curvespace {

namespace {

constexpr double kSvgValueFloor = 1e-18;  // log-scale clamp for zero values

Json entries_json(const std::vector<LadderEntry>& entries) {
  Json arr = Json::array();
  for (const LadderEntry& e : entries) {
    Json row;
    row["level"] = e.level;
    row["value"] = e.value;
    row["err"] = e.err;
    row["cumulative"] = e.cumulative;
    arr.push_back(std::move(row));
  }
  return arr;
}

Json criteria_json(const std::vector<CheckCriterion>& criteria) {
  Json arr = Json::array();
  for (const CheckCriterion& c : criteria) {
    Json row;
    row["metric"] = c.metric;
    row["op"] = c.op;
    row["threshold"] = c.threshold;
    row["value"] = c.value;
    row["pass"] = c.pass;
    arr.push_back(std::move(row));
  }
  return arr;
}

bool eval_op(double value, const std::string& op, double threshold) {
  if (op == "<") return value < threshold;
  if (op == "<=") return value <= threshold;
  if (op == ">") return value > threshold;
  if (op == ">=") return value >= threshold;
  if (op == "==") return value == threshold;
  return false;
}

std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

SeriesBlock series_block(const std::string& name, const LadderReport& ladder) {
  SeriesBlock block;
  block.name = name;
  block.entries = ladder.entries;
  block.has_summary = true;
  block.verdict = ladder.verdict;
  block.limit_or_slope = ladder.limit_or_slope;
  block.tail_ratio = ladder.tail_ratio;
  block.cumulative = ladder.cumulative;
  return block;
}

std::vector<SeriesBlock> measurement_blocks(const SuiteReport& report) {
  std::vector<SeriesBlock> blocks;
  for (const CheckRecord& check : report.checks) {
    if (check.series.empty()) continue;
    SeriesBlock block;
    block.name = check.name;
    block.entries = check.series;
    blocks.push_back(std::move(block));
  }
  return blocks;
}

Json report_json(const std::string& command, Json config,
                 const std::vector<CheckRecord>& checks,
                 const std::vector<SeriesBlock>& measurements) {
  Json doc;
  doc["version"] = kReportVersion;
  doc["command"] = command;
  doc["config"] = std::move(config);
  Json check_arr = Json::array();
  for (const CheckRecord& check : checks) {
    Json row;
    row["name"] = check.name;
    row["verdict"] = check.status;
    row["detail"] = check.detail;
    row["criteria"] = criteria_json(check.criteria);
    check_arr.push_back(std::move(row));
  }
  doc["checks"] = std::move(check_arr);
  Json meas_arr = Json::array();
  for (const SeriesBlock& block : measurements) {
    if (block.entries.empty()) continue;
    Json row;
    row["series"] = block.name;
    if (block.has_summary) {
      row["verdict"] = block.verdict;
      row["limit_or_slope"] = block.limit_or_slope;
      row["tail_ratio"] = block.tail_ratio;
      row["cumulative"] = block.cumulative;
    }
    row["entries"] = entries_json(block.entries);
    meas_arr.push_back(std::move(row));
  }
  doc["measurements"] = std::move(meas_arr);
  return doc;
}

Json report_json(const SuiteReport& report, const std::string& command) {
  Json config;
  config["suite"] = report.suite;
  config["map"] = report.map_name;
  Json params = Json::object();
  for (const auto& [key, value] : report.map_params) params[key] = value;
  config["params"] = std::move(params);
  const SuiteConfig& c = report.config;
  config["depth"] = c.depth;
  config["tol"] = c.tol;
  config["seed"] = c.seed;
  config["samples"] = c.samples;
  config["points"] = c.points;
  config["chain_samples"] = c.chain_samples;
  config["p_qp"] = c.p_qp;
  config["p_dlog"] = c.p_dlog;
  config["p_dini"] = c.p_dini;
  config["outer_radius"] = c.outer_radius;
  const Thresholds& t = report.thresholds;
  Json th;
  th["vanish_final"] = t.vanish_final;
  th["vanish_trend_levels"] = t.vanish_trend_levels;
  th["tail_ratio_max"] = t.tail_ratio_max;
  th["plateau_tolerance"] = t.plateau_tolerance;
  th["stability_factor"] = t.stability_factor;
  th["comparability_factor"] = t.comparability_factor;
  th["eta_gate"] = t.eta_gate;
  th["k_clamp"] = t.k_clamp;
  th["shrink_noise"] = t.shrink_noise;
  th["increment_decay"] = t.increment_decay;
  th["sup_ratio_cap"] = t.sup_ratio_cap;
  th["limit_decay"] = t.limit_decay;
  config["thresholds"] = std::move(th);
  return report_json(command, std::move(config), report.checks,
                     measurement_blocks(report));
}

Json report_json(const LadderReport& ladder, const std::string& series_name,
                 const std::string& command, Json config) {
  std::vector<SeriesBlock> blocks;
  blocks.push_back(series_block(series_name, ladder));
  return report_json(command, std::move(config), {}, blocks);
}

bool verdicts_reproducible(const Json& document) {
  if (!document.contains("checks") || !document["checks"].is_array())
    return false;
  for (const Json& check : document["checks"]) {
    if (!check.contains("verdict") || !check.contains("criteria")) return false;
    const std::string verdict = check["verdict"].get<std::string>();
    bool all_pass = true;
    for (const Json& crit : check["criteria"]) {
      const double value = crit["value"].get<double>();
      const double threshold = crit["threshold"].get<double>();
      const std::string op = crit["op"].get<std::string>();
      const bool expect = eval_op(value, op, threshold);
      if (crit["pass"].get<bool>() != expect) return false;
      all_pass = all_pass && expect;
    }
    if (verdict == "pass" || verdict == "fail") {
      if ((verdict == "pass") != all_pass) return false;
    }
  }
  return true;
}

std::string report_csv(const std::vector<SeriesBlock>& blocks) {
  std::ostringstream out;
  out << "series,level,value,err,cumulative\n";
  for (const SeriesBlock& block : blocks) {
    for (const LadderEntry& e : block.entries) {
      out << block.name << ',' << e.level << ',' << format_double(e.value)
          << ',' << format_double(e.err) << ',' << format_double(e.cumulative)
          << '\n';
    }
  }
  return out.str();
}

std::string report_svg(const std::vector<SeriesBlock>& blocks, int width,
                       int height) {
  const double margin = 48.0;
  const double plot_w = std::max(1.0, width - 2 * margin);
  const double plot_h = std::max(1.0, height - 2 * margin);

  int lo_level = 0, hi_level = 1;
  double lo_log = 0.0, hi_log = 1.0;
  bool any = false;
  for (const SeriesBlock& block : blocks) {
    for (const LadderEntry& e : block.entries) {
      const double lg = std::log10(std::max(std::fabs(e.value), kSvgValueFloor));
      if (!any) {
        lo_level = hi_level = e.level;
        lo_log = hi_log = lg;
        any = true;
      } else {
        lo_level = std::min(lo_level, e.level);
        hi_level = std::max(hi_level, e.level);
        lo_log = std::min(lo_log, lg);
        hi_log = std::max(hi_log, lg);
      }
    }
  }
  if (hi_level == lo_level) hi_level = lo_level + 1;
  if (hi_log - lo_log < 1e-12) hi_log = lo_log + 1.0;

  const auto x_of = [&](int level) {
    return margin + plot_w * double(level - lo_level) / double(hi_level - lo_level);
  };
  const auto y_of = [&](double value) {
    const double lg = std::log10(std::max(std::fabs(value), kSvgValueFloor));
    return margin + plot_h * (hi_log - lg) / (hi_log - lo_log);
  };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr int kPaletteSize = 8;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << svg_coord(margin) << "\" y1=\""
      << svg_coord(margin + plot_h) << "\" x2=\"" << svg_coord(margin + plot_w)
      << "\" y2=\"" << svg_coord(margin + plot_h)
      << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << svg_coord(margin) << "\" y1=\"" << svg_coord(margin)
      << "\" x2=\"" << svg_coord(margin) << "\" y2=\""
      << svg_coord(margin + plot_h)
      << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << svg_coord(margin + plot_w / 2) << "\" y=\""
      << svg_coord(height - 12.0)
      << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333\">level"
      << "</text>\n";
  out << "<text x=\"14\" y=\"" << svg_coord(margin + plot_h / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333\" "
      << "transform=\"rotate(-90 14 " << svg_coord(margin + plot_h / 2)
      << ")\">log10 value</text>\n";

  int color = 0;
  double label_y = margin;
  for (const SeriesBlock& block : blocks) {
    if (block.entries.empty()) continue;
    const char* stroke = kPalette[color % kPaletteSize];
    out << "<polyline fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const LadderEntry& e : block.entries) {
      if (!first) out << ' ';
      first = false;
      out << svg_coord(x_of(e.level)) << ',' << svg_coord(y_of(e.value));
    }
    out << "\"/>\n";
    out << "<text x=\"" << svg_coord(margin + plot_w + 4.0 - 160.0) << "\" y=\""
        << svg_coord(label_y) << "\" font-size=\"11\" fill=\"" << stroke
        << "\">" << block.name << "</text>\n";
    label_y += 14.0;
    ++color;
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace curvespace
