#pragma once
// Numerical statistics deciding membership of log f' in the weighted
// Dirichlet family (log-power weight) and the vanishing Carleson family
// (power weight): energy ladders, per-arc box ratios and their vanishing
// profiles, the Whitney-cell sup statistic eta, boundary decay profiles,
// and discrete Whitney-sum counterparts of the integrals.

#include <utility>
#include <vector>

#include "curvespace/dyadic.hpp"
#include "curvespace/maps.hpp"
#include "curvespace/quadrature.hpp"

namespace curvespace {

// Interior ladder of |f''/f'|^2 (log 1/(1-|z|))^p dA.  p >= 0.
LadderReport dlogp_energy(const AnalyticMap& map, double p, int levels, double tol);

struct BoxRatio {
  DyadicArc arc;
  double value = 0.0;
  double err = 0.0;
};

// (1/|I|^p) * integral over the Carleson box of |f''/f'|^2 (1-|z|^2)^p dA,
// 0 < p <= 1.  |I| is the arclength of the arc on the unit circle.
BoxRatio qp_box_ratio(const AnalyticMap& map, double p, const DyadicArc& arc, double tol);

// Per-level maxima of qp_box_ratio over all plain arcs at levels 1..levels.
// Verdict: "vanishing" (final max below 1e-3 and decreasing across the last
// four levels), "not-vanishing" (final max at least 1e-3 and flat within 15%
// across the last four levels), else "inconclusive".  Arcs at a level are
// evaluated concurrently; the scan order is fixed, so output is deterministic.
LadderReport qp_vanishing_profile(const AnalyticMap& map, double p, int levels, double tol);

// eta(z) = (1-|z|) |f''/f'(z)|, the Whitney-scale Bloch statistic.
double eta_point(const AnalyticMap& map, Complex z);

// sup of eta over a Whitney top, via a closed grid scan doubled until two
// successive grids agree within 5% (an under-estimate by construction).
double eta_top(const AnalyticMap& map, const WhitneyTop& w, int grid = 8);

// (r, sup_{|z|=r} |f''/f'(z)| (1-r) (log 1/(1-r))^(p/2)) for each radius.
// Requires p > 2 and radii inside (0.9, 1).
std::vector<std::pair<double, double>> dini_profile(const AnalyticMap& map, double p,
                                                    const std::vector<double>& radii);

enum class WhitneySumMode { QpWindow, DlogpGlobal };

// Discrete Whitney counterparts of the two integrals, over tops of the
// subtree below root down to root.level + depth:
//   QpWindow:    (1/|I|^p) sum eta(W)^2 diam(W)^p
//   DlogpGlobal: sum eta(W)^2 (log 1/diam W)^p, levels >= 3 only, where
//                every top has diam < 1 and the log weight is positive.
double whitney_energy_sum(const AnalyticMap& map, double p, const DyadicArc& root,
                          WhitneySumMode mode, int depth);

}  // namespace curvespace
