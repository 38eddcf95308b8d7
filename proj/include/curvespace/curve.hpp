#pragma once
// Geometry of boundary images: extrapolated boundary sampling, flatness
// (beta) and excess-length (delta) statistics of sampled arcs,
// traveling-salesman sums over the multiresolution family, windowed and
// global beta sums matching the analytic energies, grid-based beta numbers
// over dyadic squares, and the conformality modulus built from arc detours.

#include <vector>

#include "curvespace/dyadic.hpp"
#include "curvespace/maps.hpp"
#include "curvespace/spaces.hpp"

namespace curvespace {

// Boundary values f(e^{i theta}) on a uniform grid over the arc (endpoints
// included, n >= 2 points).  Values are double Richardson extrapolations of
// f at radii 1-t0, 1-t0/2, 1-t0/4 with t0 = max(1e-4, 4*(1-guard)); the two
// first-order extrapolants must agree to 1e-6 or ExtrapolationUnstable is
// thrown (families whose trusted radius is far from 1 cannot fabricate
// boundary values).
std::vector<Complex> sample_arc(const AnalyticMap& map, const DyadicArc& arc,
                                int n);

// Max distance from interior points to the endpoint chord, over the chord
// length.  Zero for fewer than three points; DegenerateChord when the
// endpoints coincide (|chord| <= 1e-12).
double beta_arc(const std::vector<Complex>& points);

// Length of the inscribed polyline, Richardson-extrapolated against its
// every-other-point subsample to cancel the leading quadratic defect.
double arclength(const std::vector<Complex>& points);

// Excess length over the chord, (arclength - |chord|) / |chord|.
// Clamped at zero against extrapolation noise; DegenerateChord as above.
double delta_arc(const std::vector<Complex>& points);

// Multiresolution sub-arcs of root (both shift families, root included)
// down to root.level + depth.
std::vector<DyadicArc> mr_subarcs(const DyadicArc& root, int depth);

struct TstReport {
  double lhs = 0.0;  // arclength(f(root)) - chord(f(root))
  double rhs = 0.0;  // sum of beta^2 * image diameter over mr_subarcs
  double ratio() const { return lhs / rhs; }
};

// Traveling-salesman comparison on the image of root: absolute excess
// length against the multiresolution beta-squared sum, each arc sampled
// with `samples` points.
TstReport tst_sum(const AnalyticMap& map, const DyadicArc& root, int depth,
                  int samples);

// Plain-dyadic beta-squared sums mirroring the analytic energies.  Each
// ladder entry is one level's contribution; cumulative is the statistic.
//   QpWindow:     (1/|J|^p) sum beta(I)^2 |I|^p over descendants I of J
//   DlogpGlobal:  sum beta(I)^2 (log 1/|I|)^p, levels >= max(3, root.level)
// where |I| is the source arc length.
LadderReport theorem3_statistic(const AnalyticMap& map, double p,
                                const DyadicArc& root, int depth, int samples,
                                WhitneySumMode mode);

// Same weights with the excess-length delta in place of beta^2, summed over
// the multiresolution family (both shifts).
LadderReport corollary1_statistic(const AnalyticMap& map, double p,
                                  const DyadicArc& root, int depth,
                                  int samples, WhitneySumMode mode);

// Width-based beta number of a polyline in the tripled axis-aligned square
// of the given center and side: segments are clipped to the triple, the
// minimal enclosing strip width of the clipped points is found by rotating
// calipers over their convex hull, and beta = (width/2) / (side * sqrt(2)).
// An empty intersection gives 0.
double jones_beta_grid(const std::vector<Complex>& polyline, Complex center,
                       double side);

// Sum of beta(3Q)^2 * side(Q) over the dyadic squares Q of a quadtree that
// meet the polyline, descending `depth` levels from a power-of-two bounding
// square; squares with diameter >= 1 are skipped to match the logarithmic
// weights, which vanish at unit scale.
double remark2_sum(const std::vector<Complex>& polyline, int depth);

// Nondecreasing step function eps(t): the worst square-root detour among
// multiresolution arcs whose image diameter is at most t.  detour(I) =
// max over samples w of (|w1-w| + |w-w2|)/|w1-w2| - 1 for endpoints w1,w2.
class ConformalityModulus {
 public:
  ConformalityModulus(const AnalyticMap& map, int maxlevel, int samples);

  double eval(double t) const;  // 0 below the smallest recorded diameter
  double max_diameter() const { return knots_.empty() ? 0.0 : knots_.back().first; }

 private:
  std::vector<std::pair<double, double>> knots_;  // (diam, running max detour)
};

}  // namespace curvespace
