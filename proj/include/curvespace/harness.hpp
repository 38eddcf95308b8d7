#pragma once
// Verification suites.  Each suite exercises one implication of the theory on
// a concrete map, compares the measured statistics against the map's declared
// membership labels, and renders verdicts that can be re-derived from the
// recorded numbers alone: every check carries its criteria (value, operator,
// threshold) and the per-level series it was judged on.
//
// Verdict policy: a declared member failing a forward implication is a hard
// fail; a declared non-member exhibiting the expected separation is a pass; a
// non-member whose statistic looks like a member's (or any undecidable
// profile) is inconclusive, never a silent pass.  Converse directions need an
// existential hypothesis no single constructed extension can witness, so they
// are recorded as not-checked.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "curvespace/common.hpp"
#include "curvespace/dyadic.hpp"
#include "curvespace/maps.hpp"
#include "curvespace/quadrature.hpp"

namespace curvespace {

// Decision gates, echoed into every report so the conventions are auditable.
// The first four restate the quadrature module's exported verdict constants;
// the rest are harness-level conventions.
struct Thresholds {
  double vanish_final = kVanishFinalThreshold;    // profile endpoint gate
  int vanish_trend_levels = kVanishTrendLevels;   // trailing trend window
  double tail_ratio_max = kTailRatioThreshold;    // geometric-decay gate
  double plateau_tolerance = kPlateauTolerance;   // profile flatness gate
  double stability_factor = 2.0;      // max spread between sample-depth bands
  double comparability_factor = 8.0;  // two-sided interior/exterior ratio cap
  double eta_gate = 0.5;              // max root-top eta for chain estimates
  double k_clamp = 0.95;              // dilatation bound used in ratio sweeps
  double shrink_noise = 1.1;          // per-halving noise allowance
  double increment_decay = 0.8;       // trailing level-increment ratio cap
  double sup_ratio_cap = 50.0;        // pointwise two-sided-bound ceiling
  double limit_decay = 0.05;          // required drop across a limit ladder
};

// Knobs shared by every suite; the whole block is stamped into the report.
struct SuiteConfig {
  int depth = 12;             // ladder levels / dyadic generations
  double tol = 1e-5;          // integration tolerance
  uint64_t seed = 42;         // quasi-random sample offset
  int samples = 33;           // boundary samples per arc for curve statistics
  int points = 24;            // interior sample points for pointwise sweeps
  int chain_samples = 100;    // box samples for the chain estimate
  double p_qp = 0.5;          // exponent for the vanishing-box family
  double p_dlog = 0.0;        // exponent for the weighted Dirichlet family
  double p_dini = 3.0;        // exponent for the radial modulus profile
  double outer_radius = 1.5;  // reflection collar radius
};

// One numeric criterion: pass iff `value op threshold` with op in
// {"<", "<=", ">", ">=", "=="}.  Boolean observations are encoded as
// value 1.0 (true) / 0.0 (false) against op "==" threshold 1.
struct CheckCriterion {
  std::string metric;
  std::string op;
  double threshold = 0.0;
  double value = 0.0;
  bool pass = false;
};

// One named check.  status: pass | fail | inconclusive | not-checked | error.
// Unless the status was forced (inconclusive/not-checked/error), it is
// exactly "all criteria pass".  `series` holds per-level evidence when the
// check was judged on a ladder or profile.
struct CheckRecord {
  std::string name;
  std::string status;
  std::vector<CheckCriterion> criteria;
  std::string detail;
  std::vector<LadderEntry> series;
};

struct SuiteReport {
  std::string suite;
  std::string map_name;
  std::map<std::string, double> map_params;
  SuiteConfig config;
  Thresholds thresholds;
  std::vector<CheckRecord> checks;  // sorted by name

  // True when no check has status "fail" or "error" (inconclusive and
  // not-checked records do not pass, but they do not fail the suite).
  bool all_passed() const;
};

// The atomic suite tags in canonical order ("all" runs them all).
const std::vector<std::string>& suite_tags();

// Runs one suite (or every suite for tag "all") against the map.  Checks are
// executed independently: a throwing check is recorded with status "error"
// and the suite continues.  Throws UsageError for an unknown tag and
// ParamOutOfRange for an invalid config.  Deterministic given (map, config).
SuiteReport run_suite(const AnalyticMap& map, const std::string& suite,
                      const SuiteConfig& config = {});

// ------------------------------------------------- chain estimate ---------
// Linearization error against the geodesic chain bound.  For sampled points z
// in the Carleson box of `arc` (angles inside the arc; depths split into a
// shallow band 1-|z| in [|I|/4, |I|] and a deep band [|I|/64, |I|/4)):
//   LHS(z) = |f(z) - f(z_I) - f'(z_I)(z - z_I)|
//   RHS(z) = diam(f(W_I)) * sum over the geodesic chain W of
//            eta(W) * (diam W / diam W_I)^alpha
// with z_I the root-top anchor.  Both-zero ratios count as 0; a zero RHS
// against a nonzero LHS counts as infinity.
struct ChainCheckResult {
  double alpha = 0.0;
  double eta_root = 0.0;     // eta on the root top (gate: < 0.5)
  double shallow_max = 0.0;  // max LHS/RHS over the shallow band
  double deep_max = 0.0;     // max LHS/RHS over the deep band

  double max_ratio() const { return std::max(shallow_max, deep_max); }
  // Spread of the two band maxima (>= 1); 1 when both bands are zero,
  // infinite when exactly one is zero.
  double spread() const;
};

// Throws EtaGateFailed when eta(root top) >= 0.5, ParamOutOfRange for
// samples < 50 or alpha outside (0,1); ChainOverflow propagates.
ChainCheckResult chain_estimate_check(const AnalyticMap& map,
                                      const DyadicArc& arc, int samples,
                                      double alpha, uint64_t seed = 42);

// LHS/RHS at z_j = z_I + (z_0 - z_I) 2^{-j}, j = 0..levels-1, for a fixed
// interior point z_0 of the box: the ratio must vanish as z_j -> z_I (the
// numerator is second-order in |z - z_I|, the denominator first-order in the
// chain weight).  Same gates as chain_estimate_check; alpha fixed at 0.75.
std::vector<double> chain_limit_series(const AnalyticMap& map,
                                       const DyadicArc& arc, int levels);

// Least-squares slope of cumulative value against level over the trailing
// half of the ladder (>= 2 points).  Throws TooFewLevels below 4 entries.
double convergence_slope(const LadderReport& report);

}  // namespace curvespace
