#include "curvespace/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "curvespace/common.hpp"
#include "curvespace/curve.hpp"
#include "curvespace/dyadic.hpp"
#include "curvespace/extension.hpp"
#include "curvespace/harness.hpp"
#include "curvespace/maps.hpp"
#include "curvespace/quadrature.hpp"
#include "curvespace/report.hpp"
#include "curvespace/spaces.hpp"

namespace curvespace {
namespace {

constexpr double kResidualGate = 1e-9;  // extend identity pass threshold
constexpr int kBoxCsvMaxLevel = 7;      // per-arc CSV depth cap (2^8-2 arcs)
constexpr int kResidualBatch = 1000;    // points per ladder entry
constexpr double kRatioTol = 1e-3;      // omega tolerance for ratio sweeps

// ---- shared option bundles --------------------------------------------------

struct MapOptions {
  std::string name = "identity";
  std::vector<std::string> params;  // key=value tokens
  std::string coeffs_path;          // JSON array for the series family
};

struct OutputOptions {
  std::string json_path;  // --out; empty prints the document to stdout
  std::string csv_path;   // --csv
  std::string svg_path;   // --svg
};

std::map<std::string, double> parse_params(const std::vector<std::string>& tokens) {
  std::map<std::string, double> out;
  for (const std::string& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("--param expects key=value, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string raw = tok.substr(eq + 1);
    bool ok = !raw.empty();
    double value = 0.0;
    if (ok) {
      try {
        size_t used = 0;
        value = std::stod(raw, &used);
        ok = used == raw.size();
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok)
      throw UsageError("--param value for '" + key + "' is not a number: '" +
                       raw + "'");
    out[key] = value;
  }
  return out;
}

std::vector<Complex> parse_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--coeffs file not readable: " + path);
  Json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw UsageError(std::string("--coeffs is not valid JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw UsageError("--coeffs must be a non-empty JSON array");
  std::vector<Complex> coeffs;
  for (const Json& item : doc) {
    if (item.is_number()) {
      coeffs.emplace_back(item.get<double>(), 0.0);
    } else if (item.is_array() && item.size() == 2 && item[0].is_number() &&
               item[1].is_number()) {
      coeffs.emplace_back(item[0].get<double>(), item[1].get<double>());
    } else {
      throw UsageError("--coeffs entries must be numbers or [re, im] pairs");
    }
  }
  return coeffs;
}

AnalyticMap build_map(const MapOptions& opts) {
  if (!opts.coeffs_path.empty()) {
    if (opts.name != "identity" && opts.name != "series")
      throw UsageError("--coeffs conflicts with --map " + opts.name);
    if (!opts.params.empty()) throw UsageError("--coeffs conflicts with --param");
    return AnalyticMap::series(parse_coeffs(opts.coeffs_path));
  }
  if (opts.name == "series") throw UsageError("--map series requires --coeffs");
  return registry_get(opts.name, parse_params(opts.params));
}

void echo_map(Json& config, const MapOptions& opts, const AnalyticMap& map) {
  config["map"] = opts.coeffs_path.empty() ? opts.name : "series";
  Json params = Json::object();
  for (const auto& [key, value] : map.params()) params[key] = value;
  config["params"] = std::move(params);
  if (!opts.coeffs_path.empty()) config["coeffs"] = opts.coeffs_path;
}

std::string join_command(int argc, char** argv) {
  std::ostringstream out;
  out << "curvespace";
  for (int i = 1; i < argc; ++i) out << ' ' << argv[i];
  return out.str();
}

// Writes/prints the document plus optional CSV/SVG side files.
// svg_blocks lets callers chart a subset of what lands in the CSV.
int emit(const Json& doc, const std::vector<SeriesBlock>& csv_blocks,
         const std::vector<SeriesBlock>& svg_blocks, const OutputOptions& out,
         bool all_passed) {
  const std::string text = doc.dump(2) + "\n";
  if (out.json_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_file(out.json_path, text);
    std::printf("wrote %s\n", out.json_path.c_str());
  }
  if (!out.csv_path.empty()) write_text_file(out.csv_path, report_csv(csv_blocks));
  if (!out.svg_path.empty()) write_text_file(out.svg_path, report_svg(svg_blocks));
  return all_passed ? 0 : 1;
}

DyadicArc root_arc(int level, int64_t index, const std::string& shift) {
  if (level < 0 || level > 20)
    throw UsageError("--root-level must be in [0, 20]");
  if (index < 0 || index >= (int64_t(1) << level))
    throw UsageError("--root-index must be in [0, 2^level)");
  return make_arc(level, index, shift == "third" ? Shift::Third : Shift::None);
}

const char* shift_tag(Shift s) { return s == Shift::Third ? "third" : "none"; }

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  MapOptions map;
  OutputOptions out;
  std::string space = "dlogp";
  double p = 0.5;
  int depth = 12;
  double tol = 1e-5;
  uint64_t seed = 42;
};

int run_analyze(const AnalyzeArgs& a, const std::string& command) {
  if (a.space == "dlogp") {
    if (a.p < 0.0) throw UsageError("--p must be >= 0 for --space dlogp");
  } else if (!(a.p > 0.0 && a.p <= 1.0)) {
    throw UsageError("--p must be in (0, 1] for --space qp0");
  }
  const AnalyticMap map = build_map(a.map);
  const LadderReport rep = a.space == "dlogp"
                               ? dlogp_energy(map, a.p, a.depth, a.tol)
                               : qp_vanishing_profile(map, a.p, a.depth, a.tol);
  Json config;
  echo_map(config, a.map, map);
  config["space"] = a.space;
  config["p"] = a.p;
  config["depth"] = a.depth;
  config["tol"] = a.tol;
  config["seed"] = a.seed;
  const std::string series = a.space == "dlogp" ? "dlogp-energy" : "qp0-profile";
  const Json doc = report_json(rep, series, command, std::move(config));

  std::vector<SeriesBlock> blocks{series_block(series, rep)};
  const std::vector<SeriesBlock> svg_blocks = blocks;
  if (a.space == "qp0" && !a.out.csv_path.empty()) {
    // Per-arc box ratios, capped so the CSV stays a few hundred rows.
    const int top = std::min(a.depth, kBoxCsvMaxLevel);
    double running = 0.0;
    for (int level = 1; level <= top; ++level) {
      for (int64_t index = 0; index < (int64_t(1) << level); ++index) {
        const BoxRatio r = qp_box_ratio(map, a.p, make_arc(level, index), a.tol);
        running = std::max(running, r.value);
        SeriesBlock b;
        std::ostringstream name;
        name << "box-ratio/" << level << '/' << index;
        b.name = name.str();
        LadderEntry e;
        e.level = level;
        e.value = r.value;
        e.err = r.err;
        e.cumulative = running;
        b.entries.push_back(e);
        blocks.push_back(std::move(b));
      }
    }
  }
  return emit(doc, blocks, svg_blocks, a.out, true);
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  MapOptions map;
  OutputOptions out;
  std::string suite = "all";
  SuiteConfig cfg;
  double p = 0.5;
  bool p_given = false;
};

int run_verify(const VerifyArgs& a, const std::string& command) {
  SuiteConfig cfg = a.cfg;
  if (a.p_given) {
    if (!(a.p > 0.0 && a.p <= 1.0))
      throw UsageError("--p must be in (0, 1]; it sets both window exponents "
                       "(use --p-dlog for exponents above 1)");
    cfg.p_qp = a.p;
    cfg.p_dlog = a.p;
  }
  if (cfg.depth < 4 || cfg.depth > 20)
    throw UsageError("--depth must be in [4, 20] for verify");
  if (cfg.samples < 3) throw UsageError("--samples must be >= 3");
  if (cfg.points < 4) throw UsageError("--points must be >= 4");
  if (cfg.chain_samples < 50) throw UsageError("--chain-samples must be >= 50");
  if (!(cfg.p_qp > 0.0 && cfg.p_qp <= 1.0))
    throw UsageError("--p-qp must be in (0, 1]");
  if (cfg.p_dlog < 0.0) throw UsageError("--p-dlog must be >= 0");
  if (!(cfg.p_dini > 2.0)) throw UsageError("--p-dini must be > 2");
  if (!(cfg.outer_radius > 1.0 && cfg.outer_radius <= 8.0))
    throw UsageError("--R must be in (1, 8]");

  const AnalyticMap map = build_map(a.map);
  const SuiteReport rep = run_suite(map, a.suite, cfg);
  const Json doc = report_json(rep, command);
  if (!a.out.json_path.empty()) {
    int pass = 0, fail = 0, other = 0;
    for (const CheckRecord& check : rep.checks) {
      std::printf("%-14s %s\n", check.status.c_str(), check.name.c_str());
      if (check.status == "pass") ++pass;
      else if (check.status == "fail" || check.status == "error") ++fail;
      else ++other;
    }
    std::printf("%d pass, %d fail, %d inconclusive/not-checked\n", pass, fail,
                other);
  }
  const std::vector<SeriesBlock> blocks = measurement_blocks(rep);
  return emit(doc, blocks, blocks, a.out, rep.all_passed());
}

// ---- extend -----------------------------------------------------------------

struct ExtendArgs {
  MapOptions map;
  OutputOptions out;
  double R = 1.5;
  std::string check = "identity";
  double p = 0.5;
  int depth = 12;
  double tol = 1e-5;
  uint64_t seed = 42;
  int points = 0;  // 0 = per-check default (identity 10000, dynkin 24)
};

int run_extend(const ExtendArgs& a, const std::string& command) {
  if (!(a.R > 1.0 && a.R <= 8.0)) throw UsageError("--R must be in (1, 8]");
  if (a.check == "t1" && a.p < 0.0)
    throw UsageError("--p must be >= 0 for --check t1");
  if (a.check == "t2" && !(a.p > 0.0 && a.p <= 1.0))
    throw UsageError("--p must be in (0, 1] for --check t2");
  const AnalyticMap map = build_map(a.map);
  const ExtensionField field(map, a.R);

  Json config;
  echo_map(config, a.map, map);
  config["R"] = a.R;
  config["check"] = a.check;
  config["p"] = a.p;
  config["depth"] = a.depth;
  config["tol"] = a.tol;
  config["seed"] = a.seed;

  std::vector<CheckRecord> checks;
  std::vector<SeriesBlock> blocks;
  std::vector<SeriesBlock> svg_blocks;
  bool all_passed = true;

  SeriesBlock kblock;
  kblock.name = "k-estimate";
  {
    LadderEntry e;
    e.level = 0;
    e.value = field.k_estimate();
    e.cumulative = field.k_estimate();
    kblock.entries.push_back(e);
  }

  if (a.check == "identity") {
    const int npts = a.points > 0 ? a.points : 10000;
    config["points"] = npts;
    LadderReport rep;
    std::vector<SeriesBlock> point_blocks;
    const bool want_points = !a.out.csv_path.empty();
    double running = 0.0, batch_max = 0.0, prev_batch = -1.0;
    rep.monotone = true;
    for (int i = 0; i < npts; ++i) {
      const auto [u, v] = halton2(uint64_t(i), a.seed);
      const double r = std::sqrt(1.0 + 3.0 * u);  // area-uniform in 1<|z|<2
      const Complex z = std::polar(r, kTwoPi * v);
      const double res = field.eta_identity_residual(z);
      running = std::max(running, res);
      batch_max = std::max(batch_max, res);
      if (want_points) {
        SeriesBlock b;
        std::ostringstream name;
        name << "residual/" << i;
        b.name = name.str();
        LadderEntry e;
        e.level = i;
        e.value = res;
        e.cumulative = running;
        b.entries.push_back(e);
        point_blocks.push_back(std::move(b));
      }
      if ((i + 1) % kResidualBatch == 0 || i + 1 == npts) {
        LadderEntry e;
        e.level = int(rep.entries.size());
        e.value = batch_max;
        e.cumulative = running;
        rep.entries.push_back(e);
        if (prev_batch >= 0.0 && batch_max > prev_batch) rep.monotone = false;
        prev_batch = batch_max;
        batch_max = 0.0;
      }
    }
    rep.verdict = "converged";
    rep.limit_or_slope = running;
    rep.cumulative = running;
    CheckRecord check;
    check.name = "identity-residual";
    CheckCriterion crit;
    crit.metric = "max-residual";
    crit.op = "<=";
    crit.threshold = kResidualGate;
    crit.value = running;
    crit.pass = running <= kResidualGate;
    check.criteria.push_back(crit);
    check.status = crit.pass ? "pass" : "fail";
    {
      std::ostringstream d;
      d << "max |mu| vs eta reflection residual over " << npts
        << " collar points";
      check.detail = d.str();
    }
    check.series = rep.entries;
    checks.push_back(check);
    all_passed = crit.pass;
    blocks.push_back(series_block("identity-residual", rep));
    svg_blocks = blocks;
    blocks.push_back(kblock);
    for (SeriesBlock& b : point_blocks) blocks.push_back(std::move(b));
  } else if (a.check == "t1" || a.check == "t2") {
    const LadderReport rep = a.check == "t1"
                                 ? exterior_condition_t1(field, a.p, a.depth, a.tol)
                                 : exterior_condition_t2(field, a.p, a.depth, a.tol);
    const std::string name = a.check == "t1" ? "exterior-dirichlet" : "exterior-carleson";
    blocks.push_back(series_block(name, rep));
    svg_blocks = blocks;
    blocks.push_back(kblock);
  } else {  // dynkin
    const int npts = a.points > 0 ? a.points : 24;
    config["points"] = npts;
    const double k_used = std::min(field.k_estimate(), 0.95);
    config["k_used"] = k_used;
    LadderReport rep;
    double sup = 0.0;
    bool finite = true;
    for (int i = 0; i < npts; ++i) {
      const auto [u, v] = halton2(uint64_t(i), a.seed);
      const double d = std::pow(2.0, -(4.0 + 6.0 * u));
      const Complex z = std::polar(1.0 - d, kTwoPi * v);
      const double ratio = field.dynkin_ratio(z, kRatioTol, k_used);
      finite = finite && std::isfinite(ratio);
      sup = std::max(sup, ratio);
      LadderEntry e;
      e.level = i;
      e.value = ratio;
      e.cumulative = sup;
      rep.entries.push_back(e);
    }
    rep.monotone = false;
    rep.verdict = finite ? "converged" : "inconclusive";
    rep.limit_or_slope = sup;
    rep.cumulative = sup;
    blocks.push_back(series_block("derivative-ratio", rep));
    svg_blocks = blocks;
    blocks.push_back(kblock);
  }

  const Json doc = report_json(command, std::move(config), checks, blocks);
  return emit(doc, blocks, svg_blocks, a.out, all_passed);
}

// ---- beta -------------------------------------------------------------------

struct BetaArgs {
  MapOptions map;
  OutputOptions out;
  std::string curve_path;
  int root_level = 3;
  int64_t root_index = 0;
  std::string root_shift = "none";
  int depth = 6;
  int samples = 33;
  double p = 0.5;
  bool global_mode = false;
  uint64_t seed = 42;
};

std::vector<Complex> read_polyline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--curve file not readable: " + path);
  std::vector<Complex> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    double x = 0.0, y = 0.0;
    if (std::sscanf(line.c_str(), " %lf , %lf", &x, &y) != 2) {
      std::ostringstream msg;
      msg << "--curve line " << lineno << " is not an x,y pair: '" << line << "'";
      throw UsageError(msg.str());
    }
    pts.emplace_back(x, y);
  }
  if (pts.size() < 3) throw UsageError("--curve needs at least 3 points");
  if (std::abs(pts.front() - pts.back()) > 0.0) pts.push_back(pts.front());
  return pts;
}

int run_beta(const BetaArgs& a, const std::string& command) {
  if (a.depth < 1 || a.depth > 20) throw UsageError("--depth must be in [1, 20]");
  if (!a.curve_path.empty()) {
    const std::vector<Complex> pts = read_polyline(a.curve_path);
    LadderReport rep;
    double prev = 0.0;
    for (int d = 1; d <= a.depth; ++d) {
      const double total = remark2_sum(pts, d);
      LadderEntry e;
      e.level = d;
      e.value = total - prev;
      e.cumulative = total;
      rep.entries.push_back(e);
      prev = total;
    }
    finish_ladder(rep);
    Json config;
    config["curve"] = a.curve_path;
    config["points"] = int(pts.size());
    config["depth"] = a.depth;
    config["seed"] = a.seed;
    const Json doc =
        report_json(rep, "quadtree-flatness", command, std::move(config));
    const std::vector<SeriesBlock> blocks{series_block("quadtree-flatness", rep)};
    return emit(doc, blocks, blocks, a.out, true);
  }

  const DyadicArc root = root_arc(a.root_level, a.root_index, a.root_shift);
  if (a.root_level + a.depth > 22)
    throw UsageError("--depth: root level plus depth must stay <= 22");
  if (a.samples < 5) throw UsageError("--samples must be >= 5");
  const WhitneySumMode mode =
      a.global_mode ? WhitneySumMode::DlogpGlobal : WhitneySumMode::QpWindow;
  if (a.global_mode) {
    if (a.p < 0.0) throw UsageError("--p must be >= 0 with --global");
  } else if (!(a.p > 0.0 && a.p <= 1.0)) {
    throw UsageError("--p must be in (0, 1] for windowed sums");
  }
  const AnalyticMap map = build_map(a.map);
  const LadderReport beta_rep =
      theorem3_statistic(map, a.p, root, a.depth, a.samples, mode);
  const LadderReport delta_rep =
      corollary1_statistic(map, a.p, root, a.depth, a.samples, mode);

  Json config;
  echo_map(config, a.map, map);
  config["root_level"] = a.root_level;
  config["root_index"] = a.root_index;
  config["root_shift"] = a.root_shift;
  config["depth"] = a.depth;
  config["samples"] = a.samples;
  config["p"] = a.p;
  config["mode"] = a.global_mode ? "global" : "window";
  config["seed"] = a.seed;

  std::vector<SeriesBlock> blocks{series_block("beta-sum", beta_rep),
                                  series_block("delta-sum", delta_rep)};
  const std::vector<SeriesBlock> svg_blocks = blocks;
  if (!a.out.csv_path.empty()) {
    // Per-arc rows keyed by (level, index, shift) in the series column.
    for (const DyadicArc& arc : mr_subarcs(root, a.depth)) {
      const std::vector<Complex> pts = sample_arc(map, arc, a.samples);
      const double beta = beta_arc(pts);
      const double delta = delta_arc(pts);
      std::ostringstream key;
      key << arc.level << '/' << arc.index << '/' << shift_tag(arc.shift);
      SeriesBlock bb;
      bb.name = "beta/" + key.str();
      LadderEntry be;
      be.level = arc.level;
      be.value = beta;
      be.cumulative = beta;
      bb.entries.push_back(be);
      blocks.push_back(std::move(bb));
      SeriesBlock db;
      db.name = "delta/" + key.str();
      LadderEntry de;
      de.level = arc.level;
      de.value = delta;
      de.cumulative = delta;
      db.entries.push_back(de);
      blocks.push_back(std::move(db));
    }
  }
  const Json doc = report_json(command, std::move(config), {},
                               {blocks.begin(), blocks.begin() + 2});
  return emit(doc, blocks, svg_blocks, a.out, true);
}

// ---- tst --------------------------------------------------------------------

struct TstArgs {
  MapOptions map;
  OutputOptions out;
  int root_level = 2;
  int64_t root_index = 0;
  std::string root_shift = "none";
  int depth = 10;
  int samples = 33;
  uint64_t seed = 42;
};

int run_tst(const TstArgs& a, const std::string& command) {
  const DyadicArc root = root_arc(a.root_level, a.root_index, a.root_shift);
  if (a.depth < 1 || a.root_level + a.depth > 22)
    throw UsageError("--depth: root level plus depth must stay <= 22");
  if (a.samples < 5) throw UsageError("--samples must be >= 5");
  const AnalyticMap map = build_map(a.map);
  const TstReport rep = tst_sum(map, root, a.depth, a.samples);
  const double ratio = rep.ratio();

  Json config;
  echo_map(config, a.map, map);
  config["root_level"] = a.root_level;
  config["root_index"] = a.root_index;
  config["root_shift"] = a.root_shift;
  config["depth"] = a.depth;
  config["samples"] = a.samples;
  config["seed"] = a.seed;

  std::vector<SeriesBlock> blocks;
  const auto single = [&](const std::string& name, double value) {
    SeriesBlock b;
    b.name = name;
    LadderEntry e;
    e.level = a.depth;
    e.value = value;
    e.cumulative = value;
    b.entries.push_back(e);
    blocks.push_back(std::move(b));
  };
  single("tst-lhs", rep.lhs);
  single("tst-rhs", rep.rhs);
  single("tst-ratio", ratio);

  CheckRecord check;
  check.name = "lhs-rhs-comparable";
  CheckCriterion lo;
  lo.metric = "lhs-over-rhs";
  lo.op = ">=";
  lo.threshold = 0.1;
  lo.value = ratio;
  lo.pass = ratio >= 0.1;
  CheckCriterion hi;
  hi.metric = "lhs-over-rhs";
  hi.op = "<=";
  hi.threshold = 10.0;
  hi.value = ratio;
  hi.pass = ratio <= 10.0;
  check.criteria = {lo, hi};
  check.status = lo.pass && hi.pass ? "pass" : "fail";
  {
    std::ostringstream d;
    d << "excess length " << format_double(rep.lhs) << " vs beta-square sum "
      << format_double(rep.rhs);
    check.detail = d.str();
  }
  const Json doc = report_json(command, std::move(config), {check}, blocks);
  return emit(doc, blocks, blocks, a.out, check.status == "pass");
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  MapOptions map;
  OutputOptions out;
  std::string space = "dlogp";
  double p_from = 0.0;
  double p_to = 1.0;
  int steps = 5;
  int depth = 8;
  double tol = 1e-4;
  uint64_t seed = 42;
};

int run_sweep(const SweepArgs& a, const std::string& command) {
  if (a.steps < 1 || a.steps > 64) throw UsageError("--steps must be in [1, 64]");
  std::vector<double> grid;
  for (int i = 0; i < a.steps; ++i) {
    const double t = a.steps == 1 ? 0.0 : double(i) / double(a.steps - 1);
    grid.push_back(a.p_from + t * (a.p_to - a.p_from));
  }
  for (const double p : grid) {
    if (a.space == "dlogp" && p < 0.0)
      throw UsageError("--p-from/--p-to: dlogp grid values must be >= 0");
    if (a.space == "qp0" && !(p > 0.0 && p <= 1.0))
      throw UsageError("--p-from/--p-to: qp0 grid values must be in (0, 1]");
  }
  const AnalyticMap map = build_map(a.map);
  LadderReport rep;
  bool settled = true;
  for (int i = 0; i < a.steps; ++i) {
    const LadderReport sub =
        a.space == "dlogp" ? dlogp_energy(map, grid[size_t(i)], a.depth, a.tol)
                           : qp_vanishing_profile(map, grid[size_t(i)], a.depth, a.tol);
    double value = 0.0;
    if (a.space == "dlogp") {
      value = sub.verdict == "converged" ? sub.limit_or_slope : sub.cumulative;
      settled = settled && sub.verdict == "converged";
    } else {
      value = sub.entries.empty() ? 0.0 : sub.entries.back().value;
      settled = settled && sub.verdict != "inconclusive";
    }
    LadderEntry e;
    e.level = i;
    e.value = value;
    e.cumulative = value;
    rep.entries.push_back(e);
  }
  rep.monotone = false;
  rep.verdict = settled ? "converged" : "inconclusive";
  rep.limit_or_slope = rep.entries.empty() ? 0.0 : rep.entries.back().value;
  rep.cumulative = rep.limit_or_slope;

  Json config;
  echo_map(config, a.map, map);
  config["space"] = a.space;
  config["p_grid"] = grid;
  config["depth"] = a.depth;
  config["tol"] = a.tol;
  config["seed"] = a.seed;
  const Json doc = report_json(rep, "sweep", command, std::move(config));
  const std::vector<SeriesBlock> blocks{series_block("sweep", rep)};
  return emit(doc, blocks, blocks, a.out, true);
}

// ---- wiring -----------------------------------------------------------------

void add_map_options(CLI::App* cmd, MapOptions& opts) {
  std::vector<std::string> names = registry_names();
  if (std::find(names.begin(), names.end(), "series") == names.end())
    names.push_back("series");
  cmd->add_option("--map", opts.name, "map family")
      ->capture_default_str()
      ->check(CLI::IsMember(names));
  cmd->add_option("--param", opts.params,
                  "family parameter key=value (repeatable)");
  cmd->add_option("--coeffs", opts.coeffs_path,
                  "JSON array of Taylor coefficients for --map series")
      ->check(CLI::ExistingFile);
}

void add_output_options(CLI::App* cmd, OutputOptions& opts) {
  cmd->add_option("--out", opts.json_path, "write the JSON report here");
  cmd->add_option("--csv", opts.csv_path, "write all series as CSV here");
  cmd->add_option("--svg", opts.svg_path, "write a log-scale chart here");
}

}  // namespace

int cli_main(int argc, char** argv) {
  try {
    CLI::App app{"numerical diagnostics for conformal maps: weighted "
                 "Dirichlet energies, vanishing box profiles, reflection "
                 "extensions and dyadic curve statistics"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "energy ladder or vanishing-box profile of one map");
    add_map_options(analyze, analyze_args.map);
    add_output_options(analyze, analyze_args.out);
    analyze->add_option("--space", analyze_args.space, "dlogp or qp0")
        ->capture_default_str()
        ->check(CLI::IsMember({"dlogp", "qp0"}));
    analyze->add_option("--p", analyze_args.p, "weight exponent")
        ->capture_default_str();
    analyze->add_option("--depth", analyze_args.depth, "ladder levels")
        ->capture_default_str()
        ->check(CLI::Range(1, 20));
    analyze->add_option("--tol", analyze_args.tol, "integration tolerance")
        ->capture_default_str()
        ->check(CLI::Range(1e-12, 1e-2));
    analyze->add_option("--seed", analyze_args.seed, "sample seed")
        ->capture_default_str();

    VerifyArgs verify_args;
    CLI::App* verify =
        app.add_subcommand("verify", "run a verification suite (or all)");
    add_map_options(verify, verify_args.map);
    add_output_options(verify, verify_args.out);
    {
      std::vector<std::string> suites = suite_tags();
      suites.push_back("all");
      verify->add_option("--suite", verify_args.suite, "suite tag")
          ->capture_default_str()
          ->check(CLI::IsMember(suites));
    }
    CLI::Option* verify_p = verify->add_option(
        "--p", verify_args.p, "sets both --p-qp and --p-dlog, in (0, 1]");
    verify->add_option("--depth", verify_args.cfg.depth, "ladder levels")
        ->capture_default_str()
        ->check(CLI::Range(1, 20));
    verify->add_option("--tol", verify_args.cfg.tol, "integration tolerance")
        ->capture_default_str()
        ->check(CLI::Range(1e-12, 1e-2));
    verify->add_option("--seed", verify_args.cfg.seed, "sample seed")
        ->capture_default_str();
    verify->add_option("--samples", verify_args.cfg.samples,
                       "boundary samples per arc")
        ->capture_default_str();
    verify->add_option("--points", verify_args.cfg.points,
                       "interior points for ratio sweeps")
        ->capture_default_str();
    verify->add_option("--chain-samples", verify_args.cfg.chain_samples,
                       "box samples for chain estimates")
        ->capture_default_str();
    verify->add_option("--p-qp", verify_args.cfg.p_qp,
                       "vanishing-box exponent")
        ->capture_default_str();
    verify->add_option("--p-dlog", verify_args.cfg.p_dlog,
                       "Dirichlet weight exponent")
        ->capture_default_str();
    verify->add_option("--p-dini", verify_args.cfg.p_dini,
                       "radial profile exponent")
        ->capture_default_str();
    verify->add_option("--R", verify_args.cfg.outer_radius,
                       "reflection collar radius")
        ->capture_default_str();

    ExtendArgs extend_args;
    CLI::App* extend =
        app.add_subcommand("extend", "reflection extension diagnostics");
    add_map_options(extend, extend_args.map);
    add_output_options(extend, extend_args.out);
    extend->add_option("--R", extend_args.R, "collar radius")
        ->capture_default_str();
    extend->add_option("--check", extend_args.check,
                       "identity, t1, t2 or dynkin")
        ->capture_default_str()
        ->check(CLI::IsMember({"identity", "t1", "t2", "dynkin"}));
    extend->add_option("--p", extend_args.p, "exponent for t1/t2")
        ->capture_default_str();
    extend->add_option("--depth", extend_args.depth, "ladder levels")
        ->capture_default_str()
        ->check(CLI::Range(1, 20));
    extend->add_option("--tol", extend_args.tol, "integration tolerance")
        ->capture_default_str()
        ->check(CLI::Range(1e-12, 1e-2));
    extend->add_option("--seed", extend_args.seed, "sample seed")
        ->capture_default_str();
    extend->add_option("--points", extend_args.points,
                       "sample points (0 = per-check default)")
        ->capture_default_str()
        ->check(CLI::Range(0, 1000000));

    BetaArgs beta_args;
    CLI::App* beta = app.add_subcommand(
        "beta", "dyadic beta/delta statistics of a map or polyline");
    add_map_options(beta, beta_args.map);
    add_output_options(beta, beta_args.out);
    beta->add_option("--curve", beta_args.curve_path,
                     "polyline CSV, one x,y per line (closed implicitly)")
        ->check(CLI::ExistingFile);
    beta->add_option("--root-level", beta_args.root_level, "root arc level")
        ->capture_default_str();
    beta->add_option("--root-index", beta_args.root_index, "root arc index")
        ->capture_default_str();
    beta->add_option("--root-shift", beta_args.root_shift, "none or third")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "third"}));
    beta->add_option("--depth", beta_args.depth, "generations below the root")
        ->capture_default_str();
    beta->add_option("--samples", beta_args.samples, "boundary samples per arc")
        ->capture_default_str();
    beta->add_option("--p", beta_args.p, "weight exponent")
        ->capture_default_str();
    beta->add_flag("--global", beta_args.global_mode,
                   "log-weighted global sum instead of the windowed sum");
    beta->add_option("--seed", beta_args.seed, "sample seed")
        ->capture_default_str();

    TstArgs tst_args;
    CLI::App* tst = app.add_subcommand(
        "tst", "traveling-salesman comparison on one dyadic root");
    add_map_options(tst, tst_args.map);
    add_output_options(tst, tst_args.out);
    tst->add_option("--root-level", tst_args.root_level, "root arc level")
        ->capture_default_str();
    tst->add_option("--root-index", tst_args.root_index, "root arc index")
        ->capture_default_str();
    tst->add_option("--root-shift", tst_args.root_shift, "none or third")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "third"}));
    tst->add_option("--depth", tst_args.depth, "generations below the root")
        ->capture_default_str();
    tst->add_option("--samples", tst_args.samples, "boundary samples per arc")
        ->capture_default_str();
    tst->add_option("--seed", tst_args.seed, "sample seed")
        ->capture_default_str();

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "energy or profile endpoint over a grid of exponents");
    add_map_options(sweep, sweep_args.map);
    add_output_options(sweep, sweep_args.out);
    sweep->add_option("--space", sweep_args.space, "dlogp or qp0")
        ->capture_default_str()
        ->check(CLI::IsMember({"dlogp", "qp0"}));
    sweep->add_option("--p-from", sweep_args.p_from, "first exponent")
        ->capture_default_str();
    sweep->add_option("--p-to", sweep_args.p_to, "last exponent")
        ->capture_default_str();
    sweep->add_option("--steps", sweep_args.steps, "grid size")
        ->capture_default_str();
    sweep->add_option("--depth", sweep_args.depth, "ladder levels")
        ->capture_default_str()
        ->check(CLI::Range(1, 20));
    sweep->add_option("--tol", sweep_args.tol, "integration tolerance")
        ->capture_default_str()
        ->check(CLI::Range(1e-12, 1e-2));
    sweep->add_option("--seed", sweep_args.seed, "sample seed")
        ->capture_default_str();

    try {
      app.parse(argc, argv);
    } catch (const CLI::Success& e) {
      return app.exit(e);  // --help and friends print and exit 0
    } catch (const CLI::ParseError& e) {
      app.exit(e);  // prints a message naming the offending flag
      return 2;
    }

    const std::string command = join_command(argc, argv);
    verify_args.p_given = verify_p->count() > 0;
    if (analyze->parsed()) return run_analyze(analyze_args, command);
    if (verify->parsed()) return run_verify(verify_args, command);
    if (extend->parsed()) return run_extend(extend_args, command);
    if (beta->parsed()) return run_beta(beta_args, command);
    if (tst->parsed()) return run_tst(tst_args, command);
    if (sweep->parsed()) return run_sweep(sweep_args, command);
    throw UsageError("missing subcommand");
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace curvespace
