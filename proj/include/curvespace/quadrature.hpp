#pragma once
// Adaptive polar-cell quadrature for weighted area integrands on the disc
// and its exterior, plus dyadic-shell ladders that exhaust the boundary
// circle and classify the result (converged / diverging / inconclusive).
//
// All weights are radial.  Regions never straddle |z| = 1: Carleson boxes,
// which touch the circle by definition, are integrated as an internal ladder
// of Whitney bands with a geometric tail extrapolation folded into err.

#include <functional>
#include <string>
#include <vector>

#include "curvespace/common.hpp"
#include "curvespace/dyadic.hpp"

namespace curvespace {

enum class WeightTag {
  One,                    // 1
  LogP,                   // (log 1/(1-|z|))^p           interior
  OneMinusSqP,            // (1-|z|^2)^p                  interior
  ExteriorDirichletLogP,  // (log |z|/(|z|-1))^p / (|z|^2-1)^2
  ExteriorCarlesonP,      // 1/(|z|-1)^(2-p)
};

struct WeightedIntegrand {
  std::function<double(Complex)> core;  // nonnegative density, e.g. |f''/f'|^2
  WeightTag weight = WeightTag::One;
  double p = 0.0;

  double weight_at(Complex z) const;
  double eval(Complex z) const { return core(z) * weight_at(z); }
};

struct Annulus {
  double r0 = 0.0;
  double r1 = 0.0;
};

struct IntegralResult {
  double value = 0.0;
  double err = 0.0;  // accumulated refinement discrepancies (+ tail share)
  long cells = 0;
};

// Core engine: adaptive tensor Gauss-Legendre over [r0,r1] x [t0,t1] in
// polar coordinates, deterministic depth-first refinement, compensated
// accumulation.  The rectangle must not straddle |z| = 1.  Throws
// NoConvergence (message carries the best estimate) past max_cells.
IntegralResult integrate_polar_rect(const WeightedIntegrand& f, double r0,
                                    double r1, double t0, double t1,
                                    double tol, long max_cells = 2000000);

IntegralResult integrate_annulus(const WeightedIntegrand& f,
                                 const Annulus& region, double tol);

IntegralResult integrate_top(const WeightedIntegrand& f,
                             const WhitneyTop& region, double tol);

// Carleson box = stack of Whitney bands over the arc.  Bands are integrated
// until they fall below the tolerance budget (at least six), then the
// remainder is extrapolated geometrically; half the tail enters err.
// exterior_clip truncates exterior boxes at |z| = exterior_clip (used when
// the core vanishes beyond a reflection collar); 0 means no clipping.
IntegralResult integrate_box(const WeightedIntegrand& f,
                             const CarlesonBox& region, double tol,
                             double exterior_clip = 0.0);

struct LadderEntry {
  int level = 0;
  double value = 0.0;
  double err = 0.0;
  double cumulative = 0.0;
};

struct LadderReport {
  std::vector<LadderEntry> entries;  // levels strictly increasing
  bool monotone = true;              // shell values non-increasing
  std::string verdict;  // converged | diverging-with-slope | inconclusive
                        // (profile builders also use vanishing | not-vanishing)
  double limit_or_slope = 0.0;  // extrapolated limit, or cumulative slope/level
  double tail_ratio = 0.0;      // last ratio of consecutive shell values
  double cumulative = 0.0;
};

enum class Exhaustion { InteriorAnnuli, ExteriorAnnuli };

// Shell k is 1-2^-k <= |z| <= 1-2^-(k+1) (interior) or the mirror image
// 1+2^-(k+1) <= |z| <= 1+2^-k (exterior), k = 0..levels-1.
// exterior_clip truncates exterior shells as in integrate_box.
LadderReport ladder(const WeightedIntegrand& f, Exhaustion mode, int levels,
                    double tol, double exterior_clip = 0.0);

// Classification + extrapolation for an entries vector assembled elsewhere:
// fills cumulative, monotone, verdict, limit_or_slope, tail_ratio.
// Verdict rule (three trailing shell ratios, threshold 0.9): all below =>
// converged with geometric tail; all at-or-above => diverging-with-slope
// (least-squares slope of cumulative over the last half); mixed =>
// inconclusive.
void finish_ladder(LadderReport& report);

// Decision constants for ladder and profile verdicts, exported so reports can
// echo the thresholds they were judged against.
inline constexpr double kTailRatioThreshold = 0.9;    // geometric-decay gate
inline constexpr double kVanishFinalThreshold = 1e-3; // profile "small" gate
inline constexpr int kVanishTrendLevels = 4;          // trailing trend window
inline constexpr double kPlateauTolerance = 0.15;     // flatness gate

// Verdict for a profile of per-level suprema (entries hold the per-level
// maxima; cumulative fields are ignored).  "vanishing" needs the final value
// below kVanishFinalThreshold and a non-increasing trend across the last
// kVanishTrendLevels levels; "not-vanishing" needs a final value at or above
// the threshold that is flat to kPlateauTolerance over the same window;
// anything else is "inconclusive".  limit_or_slope becomes the final value.
void classify_vanishing_profile(LadderReport& report);

}  // namespace curvespace
