// Acceptance gate: ten end-to-end criteria covering the CLI, the reflection
// extension, boundary geometry, and the separation of map families by their
// energy and box statistics.  One [PASS]/[FAIL] line per criterion; the exit
// code is the number of failures.  argv[1] must be the CLI binary (criteria
// 1 and 10 shell out to it).
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvespace/common.hpp"
#include "curvespace/curve.hpp"
#include "curvespace/dyadic.hpp"
#include "curvespace/extension.hpp"
#include "curvespace/harness.hpp"
#include "curvespace/maps.hpp"
#include "curvespace/spaces.hpp"

using namespace curvespace;
using Clock = std::chrono::steady_clock;

namespace {

// ---- pinned tolerances ------------------------------------------------------
constexpr double kEnergyRelTol = 0.01;        // criterion 1: 1% of the oracle
constexpr double kEnergyTimeLimit = 30.0;     // criterion 1: seconds
constexpr double kResidualTol = 1e-10;        // criterion 2
constexpr int kResidualPoints = 10000;        // criterion 2
constexpr double kResidualTimeLimit = 5.0;    // criterion 2: seconds
constexpr double kWirtingerTol = 1e-6;        // criterion 3
constexpr int kWirtingerPoints = 1000;        // criterion 3
constexpr double kWirtingerStep = 1e-5;       // criterion 3: fd step
constexpr double kSemicircleTol = 1e-6;       // criterion 4
constexpr double kQuarterTol = 1e-4;          // criterion 4
constexpr int kShapeSamples = 20001;          // criterion 4
constexpr double kTstLow = 0.1;               // criterion 5
constexpr double kTstHigh = 10.0;             // criterion 5
constexpr double kTstDrift = 0.2;             // criterion 5: depth 10 -> 14
constexpr double kVanishTol = 1e-3;           // criterion 6: small endpoint
constexpr double kPersistFloor = 0.1;         // criterion 6: large endpoint
constexpr double kPersistFlat = 0.15;         // criterion 6: levels 10..14
constexpr double kDiniSlack = 1e-9;           // criterion 7
constexpr double kShrinkNoise = 1.1;          // criterion 8: per-halving
constexpr double kIncrementDecay = 0.8;       // criterion 8: global tail
constexpr double kSpreadCap = 2.0;            // criterion 9
constexpr double kLimitDecayCap = 0.05;       // criterion 9
constexpr double kVerifyTimeLimit = 300.0;    // criterion 10: seconds

int g_failures = 0;
std::string g_cli;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion-%02d %s — %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int run_command(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null";
  const int raw = std::system(cmd.c_str());
  if (raw == -1) return -1;
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

struct NamedMap {
  const char* name;
  AnalyticMap map;
};

std::vector<NamedMap> registry_exemplars() {
  std::vector<NamedMap> maps;
  maps.push_back({"identity", registry_get("identity", {})});
  maps.push_back({"moebius", registry_get("moebius", {{"a", 0.5}})});
  maps.push_back({"power_perturbation",
                  registry_get("power_perturbation", {{"eps", 0.4}, {"n", 3}})});
  maps.push_back({"log_singular(2.1)",
                  registry_get("log_singular", {{"beta", 2.1}})});
  maps.push_back({"log_singular(0)",
                  registry_get("log_singular", {{"beta", 0.0}})});
  maps.push_back({"lacunary",
                  registry_get("lacunary", {{"amp", 0.2}, {"decay", 0.8}})});
  return maps;
}

// ---- criteria ---------------------------------------------------------------

void criterion_1_cli_energy_oracle() {
  const std::string out = "acceptance_c1.json";
  const auto t0 = Clock::now();
  const int code = run_command(
      "analyze --map moebius --param a=0.5 --space dlogp --p 0 --depth 14 "
      "--out " + out);
  const double elapsed = seconds_since(t0);
  const double oracle = 4.0 * kPi * std::log(4.0 / 3.0);
  bool pass = code == 0 && elapsed < kEnergyTimeLimit;
  double limit = 0.0;
  std::string verdict = "(missing)";
  if (pass) {
    try {
      const auto doc = nlohmann::json::parse(slurp(out));
      const auto& m = doc.at("measurements").at(0);
      verdict = m.at("verdict").get<std::string>();
      limit = m.at("limit_or_slope").get<double>();
    } catch (const std::exception&) {
      pass = false;
    }
  }
  pass = pass && verdict == "converged" &&
         std::fabs(limit - oracle) <= kEnergyRelTol * oracle;
  report(1, "cli-energy-matches-oracle", pass,
         "limit=" + fmt(limit) + " oracle=" + fmt(oracle) + " verdict=" +
             verdict + " exit=" + std::to_string(code) + " in " +
             fmt(elapsed) + " s");
}

void criterion_2_reflection_identity() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_map = "-";
  for (const NamedMap& nm : registry_exemplars()) {
    const ExtensionField field(nm.map, 1.5);
    for (int i = 0; i < kResidualPoints; ++i) {
      const auto [u, v] = halton2(uint64_t(i), 2);
      const double r = std::sqrt(1.0 + 3.0 * u);  // area-uniform, 1 < |z| < 2
      const double res =
          field.eta_identity_residual(std::polar(r, kTwoPi * v));
      if (res > worst) {
        worst = res;
        worst_map = nm.name;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  const bool pass = worst <= kResidualTol && elapsed < kResidualTimeLimit;
  report(2, "reflection-identity-residual", pass,
         "max residual " + fmt(worst) + " (" + worst_map + ") over " +
             std::to_string(kResidualPoints) + " pts/map in " + fmt(elapsed) +
             " s");
}

void criterion_3_wirtinger_agreement() {
  double worst = 0.0;
  std::string worst_map = "-";
  const double h = kWirtingerStep;
  for (const NamedMap& nm : registry_exemplars()) {
    const ExtensionField field(nm.map, 2.5);
    for (int i = 0; i < kWirtingerPoints; ++i) {
      const auto [u, v] = halton2(uint64_t(i), 7);
      const Complex z = std::polar(1.01 + 0.94 * u, kTwoPi * v);
      const Complex mu = field.dilatation_raw(z);
      const auto F = [&](Complex w) { return field.extend(w); };
      const Complex dx = (F(z + h) - F(z - h)) / (2.0 * h);
      const Complex dy =
          (F(z + Complex(0, h)) - F(z - Complex(0, h))) / (2.0 * h);
      const Complex fz = 0.5 * (dx - Complex(0, 1) * dy);
      const Complex fzb = 0.5 * (dx + Complex(0, 1) * dy);
      const double err = std::abs(fzb / fz - mu);
      if (err > worst) {
        worst = err;
        worst_map = nm.name;
      }
    }
  }
  const bool pass = worst <= kWirtingerTol;
  report(3, "dilatation-matches-finite-difference", pass,
         "max |mu_fd - mu| = " + fmt(worst) + " (" + worst_map + ") at " +
             std::to_string(kWirtingerPoints) + " pts/map, h=" + fmt(h));
}

void criterion_4_beta_shapes() {
  std::vector<Complex> semi, quarter, segment;
  for (int i = 0; i < kShapeSamples; ++i) {
    const double t = double(i) / double(kShapeSamples - 1);
    semi.push_back(std::polar(1.0, kPi * t));
    quarter.push_back(std::polar(1.0, 0.5 * kPi * t));
    segment.push_back(Complex(t, 2.0 * t));
  }
  const double b_semi = beta_arc(semi);
  const double b_quarter = beta_arc(quarter);
  const double b_segment = beta_arc(segment);
  const double quarter_target = 0.5 * (std::sqrt(2.0) - 1.0);
  const bool pass = std::fabs(b_semi - 0.5) <= kSemicircleTol &&
                    std::fabs(b_quarter - quarter_target) <= kQuarterTol &&
                    b_segment == 0.0;
  report(4, "beta-of-canonical-shapes", pass,
         "semicircle=" + fmt(b_semi) + " quarter=" + fmt(b_quarter) +
             " (target " + fmt(quarter_target) + ") segment=" +
             fmt(b_segment));
}

void criterion_5_tst_band() {
  bool pass = true;
  std::ostringstream detail;
  for (const char* name : {"identity", "moebius"}) {
    const AnalyticMap map =
        name == std::string("identity")
            ? registry_get("identity", {})
            : registry_get("moebius", {{"a", 0.5}});
    const double r10 = tst_sum(map, make_arc(2, 0), 10, 33).ratio();
    const double r14 = tst_sum(map, make_arc(2, 0), 14, 33).ratio();
    const bool in_band = r10 >= kTstLow && r10 <= kTstHigh && r14 >= kTstLow &&
                         r14 <= kTstHigh;
    const bool stable = std::fabs(r14 / r10 - 1.0) <= kTstDrift;
    pass = pass && in_band && stable;
    detail << name << ": d10=" << fmt(r10) << " d14=" << fmt(r14) << "  ";
  }
  report(5, "length-excess-comparison-band", pass, detail.str());
}

void criterion_6_vanishing_separation() {
  const AnalyticMap moeb = registry_get("moebius", {{"a", 0.5}});
  const AnalyticMap flat = registry_get("log_singular", {{"beta", 0.0}});

  const LadderReport small_in = qp_vanishing_profile(moeb, 0.5, 14, 1e-5);
  const double small_final = small_in.entries.back().value;
  bool small_trend = true;
  const size_t n = small_in.entries.size();
  for (size_t i = n - 4; i < n; ++i)
    small_trend = small_trend &&
                  small_in.entries[i].value < small_in.entries[i - 1].value;

  const LadderReport big_in = qp_vanishing_profile(flat, 0.5, 14, 1e-5);
  double lo = 1e300, hi = 0.0;
  for (const LadderEntry& e : big_in.entries)
    if (e.level >= 10) {
      lo = std::min(lo, e.value);
      hi = std::max(hi, e.value);
    }
  const bool big_persists = lo > kPersistFloor && hi / lo - 1.0 <= kPersistFlat;

  const ExtensionField fm(moeb, 1.5);
  const ExtensionField ff(flat, 1.5);
  const double small_ext =
      exterior_condition_t2(fm, 0.5, 14, 1e-5).entries.back().value;
  const double big_ext =
      exterior_condition_t2(ff, 0.5, 14, 1e-5).entries.back().value;

  const bool pass = small_final < kVanishTol && small_trend && big_persists &&
                    small_ext < kVanishTol && big_ext > kPersistFloor;
  report(6, "vanishing-box-separation", pass,
         "interior: " + fmt(small_final) + " vs [" + fmt(lo) + ", " + fmt(hi) +
             "]; exterior: " + fmt(small_ext) + " vs " + fmt(big_ext));
}

void criterion_7_radial_profile() {
  const AnalyticMap map = registry_get("log_singular", {{"beta", 2.1}});
  std::vector<double> radii;
  for (int k = 4; k <= 14; ++k) radii.push_back(1.0 - std::pow(2.0, -k));
  const auto prof = dini_profile(map, 3.0, radii);
  bool finite = true;
  for (const auto& [r, v] : prof) finite = finite && std::isfinite(v);
  bool tail_monotone = true;
  for (size_t i = prof.size() - 5; i + 1 < prof.size(); ++i)
    tail_monotone = tail_monotone &&
                    prof[i + 1].second <= prof[i].second * (1.0 + kDiniSlack);
  const bool pass = finite && tail_monotone && prof.size() == radii.size();
  report(7, "radial-modulus-profile-bounded", pass,
         "first=" + fmt(prof.front().second) + " last=" +
             fmt(prof.back().second) + " over k=4..14" +
             (tail_monotone ? ", tail non-increasing" : ", tail increases"));
}

void criterion_8_window_shrink() {
  const AnalyticMap map = registry_get("moebius", {{"a", 0.5}});
  bool pass = true;
  std::ostringstream detail;
  for (const bool use_delta : {false, true}) {
    std::vector<double> values;
    for (int k = 0; k < 4; ++k) {
      const DyadicArc root = make_arc(3 + k, 0);
      const LadderReport rep =
          use_delta
              ? corollary1_statistic(map, 0.5, root, 6, 33,
                                     WhitneySumMode::QpWindow)
              : theorem3_statistic(map, 0.5, root, 6, 33,
                                   WhitneySumMode::QpWindow);
      values.push_back(rep.cumulative);
    }
    for (size_t i = 1; i < values.size(); ++i)
      pass = pass && values[i] <= kShrinkNoise * values[i - 1];
    pass = pass && values.back() < values.front();
    detail << (use_delta ? "delta" : "beta") << ": " << fmt(values.front())
           << " -> " << fmt(values.back()) << "  ";
  }
  const LadderReport global = theorem3_statistic(
      map, 0.0, make_arc(0, 0), 12, 33, WhitneySumMode::DlogpGlobal);
  const size_t n = global.entries.size();
  const double increment_ratio =
      global.entries[n - 1].value / global.entries[n - 2].value;
  pass = pass && increment_ratio < kIncrementDecay;
  detail << "global increment ratio " << fmt(increment_ratio);
  report(8, "window-shrink-and-global-decay", pass, detail.str());
}

void criterion_9_chain_control() {
  bool pass = true;
  std::ostringstream detail;
  for (const char* name : {"moebius", "power_perturbation"}) {
    const AnalyticMap map =
        name == std::string("moebius")
            ? registry_get("moebius", {{"a", 0.5}})
            : registry_get("power_perturbation", {{"eps", 0.4}, {"n", 3}});
    const DyadicArc arc = make_arc(8, 128);
    const ChainCheckResult r = chain_estimate_check(map, arc, 100, 0.75, 42);
    const std::vector<double> series = chain_limit_series(map, arc, 7);
    const double first = series.front();
    const double last = series.back();
    const double decay = first > 0.0 ? last / first : 0.0;
    pass = pass && std::isfinite(r.max_ratio()) && r.spread() < kSpreadCap &&
           decay <= kLimitDecayCap;
    detail << name << ": max=" << fmt(r.max_ratio()) << " spread="
           << fmt(r.spread()) << " limit-decay=" << fmt(decay) << "  ";
  }
  report(9, "chain-approximation-control", pass, detail.str());
}

void criterion_10_cli_determinism() {
  const std::string out = "acceptance_c10.json";
  const std::string args =
      "verify --suite all --map moebius --param a=0.5 --depth 12 --out " + out;
  const auto t0 = Clock::now();
  const int code1 = run_command(args);
  const std::string first = slurp(out);
  const int code2 = run_command(args);
  const std::string second = slurp(out);
  const double elapsed = seconds_since(t0);
  const bool pass = code1 == 0 && code2 == 0 && !first.empty() &&
                    first == second && elapsed < kVerifyTimeLimit;
  report(10, "cli-suite-determinism", pass,
         "exits " + std::to_string(code1) + "/" + std::to_string(code2) +
             ", " + std::to_string(first.size()) + " bytes, identical=" +
             (first == second ? "yes" : "no") + ", in " + fmt(elapsed) + " s");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli-binary>\n");
    return 64;
  }
  g_cli = argv[1];
  criterion_1_cli_energy_oracle();
  criterion_2_reflection_identity();
  criterion_3_wirtinger_agreement();
  criterion_4_beta_shapes();
  criterion_5_tst_band();
  criterion_6_vanishing_separation();
  criterion_7_radial_profile();
  criterion_8_window_shrink();
  criterion_9_chain_control();
  criterion_10_cli_determinism();
  std::printf("%d of 10 criteria passed\n", 10 - g_failures);
  return g_failures;
}
