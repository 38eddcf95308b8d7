#include "curvespace/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace curvespace {

double WeightedIntegrand::weight_at(Complex z) const {
  const double r = std::abs(z);
  switch (weight) {
    case WeightTag::One:
      return 1.0;
    case WeightTag::LogP: {
      if (p == 0.0) return 1.0;
      const double l = std::log(1.0 / (1.0 - r));
      return l <= 0.0 ? 0.0 : std::pow(l, p);
    }
    case WeightTag::OneMinusSqP: {
      if (p == 0.0) return 1.0;
      const double s = 1.0 - r * r;
      return s <= 0.0 ? 0.0 : std::pow(s, p);
    }
    case WeightTag::ExteriorDirichletLogP: {
      const double d = r * r - 1.0;
      const double l = std::log(r / (r - 1.0));
      const double lp = (p == 0.0) ? 1.0 : std::pow(l, p);
      return lp / (d * d);
    }
    case WeightTag::ExteriorCarlesonP:
      return std::pow(r - 1.0, p - 2.0);
  }
  return 0.0;
}

namespace {

struct Rect {
  double r0, r1, t0, t1;
};

// integral of r dr dtheta, the true area of the polar rectangle
double rect_measure(const Rect& c) {
  return 0.5 * (c.r1 * c.r1 - c.r0 * c.r0) * (c.t1 - c.t0);
}

double gl7_rect(const WeightedIntegrand& f, const Rect& c) {
  const GaussRule& g = gauss7();
  const double rm = 0.5 * (c.r0 + c.r1), rh = 0.5 * (c.r1 - c.r0);
  const double tm = 0.5 * (c.t0 + c.t1), th = 0.5 * (c.t1 - c.t0);
  double s = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double r = rm + rh * g.nodes[i];
    double row = 0.0;
    for (int j = 0; j < 7; ++j) {
      row += g.weights[j] * f.eval(std::polar(r, tm + th * g.nodes[j]));
    }
    s += g.weights[i] * r * row;
  }
  return s * rh * th;
}

struct StackCell {
  Rect rect;
  double est;
  int depth;
};

}  // namespace

IntegralResult integrate_polar_rect(const WeightedIntegrand& f, double r0,
                                    double r1, double t0, double t1,
                                    double tol, long max_cells) {
  if (!(r0 >= 0.0) || !(r1 > r0) || !(t1 > t0)) {
    throw ParamOutOfRange("integrate_polar_rect: empty or inverted rectangle");
  }
  if (r0 < 1.0 && r1 > 1.0) {
    throw ParamOutOfRange("integrate_polar_rect: rectangle straddles |z| = 1");
  }
  if (!(tol > 0.0)) throw ParamOutOfRange("integrate_polar_rect: tol must be positive");

  const Rect root{r0, r1, t0, t1};
  const double total_measure = rect_measure(root);
  const double root_est = gl7_rect(f, root);
  if (!std::isfinite(root_est)) throw NonFinite("integrate_polar_rect: integrand overflow");
  const double scale = std::max(1.0, std::abs(root_est));

  std::vector<StackCell> stack;
  stack.push_back({root, root_est, 0});
  CompensatedSum total, err;
  long cells = 1;

  while (!stack.empty()) {
    const StackCell cell = stack.back();
    stack.pop_back();

    const Rect& c = cell.rect;
    const double wr = c.r1 - c.r0;
    const double wt = std::max(0.5 * (c.r0 + c.r1), 1e-12) * (c.t1 - c.t0);
    Rect kids[4];
    int nkids;
    if (wt > 8.0 * wr) {  // long in angle: bisect angle only
      const double tm = 0.5 * (c.t0 + c.t1);
      kids[0] = {c.r0, c.r1, c.t0, tm};
      kids[1] = {c.r0, c.r1, tm, c.t1};
      nkids = 2;
    } else if (wr > 8.0 * wt) {  // long in radius: bisect radius only
      const double rm = 0.5 * (c.r0 + c.r1);
      kids[0] = {c.r0, rm, c.t0, c.t1};
      kids[1] = {rm, c.r1, c.t0, c.t1};
      nkids = 2;
    } else {
      const double rm = 0.5 * (c.r0 + c.r1);
      const double tm = 0.5 * (c.t0 + c.t1);
      kids[0] = {c.r0, rm, c.t0, tm};
      kids[1] = {c.r0, rm, tm, c.t1};
      kids[2] = {rm, c.r1, c.t0, tm};
      kids[3] = {rm, c.r1, tm, c.t1};
      nkids = 4;
    }

    double kid_est[4];
    double s = 0.0;
    for (int i = 0; i < nkids; ++i) {
      kid_est[i] = gl7_rect(f, kids[i]);
      s += kid_est[i];
    }
    if (!std::isfinite(s)) throw NonFinite("integrate_polar_rect: integrand overflow");
    cells += nkids;

    const double diff = std::abs(s - cell.est);
    const double frac = std::max(rect_measure(c) / total_measure, 1e-9);
    if (diff <= tol * scale * frac || cell.depth >= 40) {
      total.add(s);
      err.add(diff);
    } else {
      if (cells > max_cells) {
        double best = total.value() + s;
        for (const StackCell& sc : stack) best += sc.est;
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "quadrature cell budget exceeded (%ld cells); best estimate %.17g +- %.3g",
                      cells, best, err.value() + diff);
        throw NoConvergence(msg);
      }
      for (int i = nkids - 1; i >= 0; --i) {
        stack.push_back({kids[i], kid_est[i], cell.depth + 1});
      }
    }
  }
  return {total.value(), err.value(), cells};
}

IntegralResult integrate_annulus(const WeightedIntegrand& f,
                                 const Annulus& region, double tol) {
  if (!(region.r1 > region.r0) || region.r0 < 0.0) {
    throw ParamOutOfRange("integrate_annulus: need 0 <= r0 < r1");
  }
  return integrate_polar_rect(f, region.r0, region.r1, 0.0, kTwoPi, tol);
}

IntegralResult integrate_top(const WeightedIntegrand& f,
                             const WhitneyTop& region, double tol) {
  const double rl = region.r_lo(), rh = region.r_hi();
  if (rh <= rl) return {0.0, 0.0, 0};  // levels 0-1 are empty bands
  const double lo = region.arc.theta_lo();
  return integrate_polar_rect(f, rl, rh, lo, lo + region.arc.length(), tol);
}

IntegralResult integrate_box(const WeightedIntegrand& f,
                             const CarlesonBox& region, double tol,
                             double exterior_clip) {
  if (!(tol > 0.0)) throw ParamOutOfRange("integrate_box: tol must be positive");
  const DyadicArc& arc = region.arc;
  const double lo = arc.theta_lo();
  const double hi = lo + arc.length();
  const bool interior = region.side == BoxSide::Interior;

  CompensatedSum total, err;
  long cells = 0;
  double u_prev = 0.0, u_last = 0.0;
  int bands = 0;
  // Whitney band at depth m below the arc's level; at least six bands, then
  // continue until a band falls under 5% of the remaining tolerance budget.
  for (int m = 0;; ++m) {
    const double len = arc.length() * std::ldexp(1.0, -m);  // band |I_m|
    double brl, brh;
    if (interior) {
      brl = std::max(0.0, 1.0 - len);
      brh = 1.0 - 0.5 * len;
    } else {
      brl = 1.0 + 0.5 * len;
      brh = 1.0 + len;
      if (exterior_clip > 1.0) {
        brh = std::min(brh, exterior_clip);
        if (brl >= brh) continue;  // band entirely beyond the clip radius
      }
    }
    if (brh <= brl) continue;  // oversized interior band collapses
    const IntegralResult band = integrate_polar_rect(f, brl, brh, lo, hi, tol);
    total.add(band.value);
    err.add(band.err);
    cells += band.cells;
    u_prev = u_last;
    u_last = band.value;
    ++bands;
    const double stop = tol * std::max(1.0, std::abs(total.value())) * 0.05;
    if ((bands >= 6 && std::abs(u_last) <= stop) || m >= 59) break;
  }
  double rho = (u_prev > 0.0 && u_last > 0.0) ? u_last / u_prev : 0.0;
  rho = std::clamp(rho, 0.0, 0.97);
  const double tail = u_last * rho / (1.0 - rho);
  total.add(tail);
  err.add(0.5 * std::abs(tail));
  return {total.value(), err.value(), cells};
}

LadderReport ladder(const WeightedIntegrand& f, Exhaustion mode, int levels,
                    double tol, double exterior_clip) {
  if (levels < 3) throw TooFewLevels("ladder: need at least 3 levels");
  LadderReport report;
  report.entries.reserve(levels);
  for (int k = 0; k < levels; ++k) {
    const double h0 = std::ldexp(1.0, -k);
    const double h1 = 0.5 * h0;
    double r0, r1;
    if (mode == Exhaustion::InteriorAnnuli) {
      r0 = 1.0 - h0;  // k = 0 starts at the origin
      r1 = 1.0 - h1;
    } else {
      r0 = 1.0 + h1;
      r1 = 1.0 + h0;
      if (exterior_clip > 1.0) {
        r0 = std::min(r0, exterior_clip);
        r1 = std::min(r1, exterior_clip);
      }
    }
    LadderEntry e;
    e.level = k;
    if (r1 > r0) {
      const IntegralResult shell = integrate_annulus(f, {r0, r1}, tol);
      e.value = shell.value;
      e.err = shell.err;
    }
    report.entries.push_back(e);
  }
  finish_ladder(report);
  return report;
}

void finish_ladder(LadderReport& report) {
  auto& es = report.entries;
  CompensatedSum cum;
  report.monotone = true;
  for (size_t i = 0; i < es.size(); ++i) {
    cum.add(es[i].value);
    es[i].cumulative = cum.value();
    if (i > 0 && es[i].value > es[i - 1].value * (1.0 + 1e-12) + 1e-300) {
      report.monotone = false;
    }
  }
  report.cumulative = cum.value();
  report.tail_ratio = 0.0;
  report.verdict = "inconclusive";
  report.limit_or_slope = report.cumulative;
  const size_t n = es.size();
  if (n == 0) return;

  double vmax = 0.0;
  for (const auto& e : es) vmax = std::max(vmax, std::abs(e.value));
  if (vmax <= 0.0) {  // identically zero ladder
    report.verdict = "converged";
    report.tail_ratio = 0.0;
    return;
  }
  if (n < 3) return;

  const size_t nratios = std::min<size_t>(3, n - 1);
  bool all_below = true, all_above = true;
  for (size_t i = n - nratios; i < n; ++i) {
    const double prev = es[i - 1].value;
    const double cur = es[i].value;
    double rho;
    if (prev <= 0.0) {
      rho = (cur <= 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      rho = cur / prev;
    }
    if (i == n - 1) report.tail_ratio = rho;
    (rho < kTailRatioThreshold ? all_above : all_below) = false;
  }
  if (all_below) {
    report.verdict = "converged";
    const double rho = std::clamp(std::isfinite(report.tail_ratio) ? report.tail_ratio : 0.0, 0.0, 0.97);
    report.limit_or_slope = report.cumulative + es[n - 1].value * rho / (1.0 - rho);
  } else if (all_above) {
    report.verdict = "diverging-with-slope";
    // least-squares slope of cumulative vs level over the trailing half
    const size_t start = n / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(n - start);
    for (size_t i = start; i < n; ++i) {
      sx += es[i].level;
      sy += es[i].cumulative;
      sxx += double(es[i].level) * es[i].level;
      sxy += es[i].level * es[i].cumulative;
    }
    report.limit_or_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
}

void classify_vanishing_profile(LadderReport& report) {
  finish_ladder(report);  // cumulative, monotone, tail_ratio bookkeeping
  const auto& es = report.entries;
  const size_t n = es.size();
  report.verdict = "inconclusive";
  if (n == 0) return;
  const double last = es[n - 1].value;
  report.limit_or_slope = last;
  if (n < size_t(kVanishTrendLevels)) return;

  bool decreasing = true;
  for (size_t i = n - kVanishTrendLevels + 1; i < n; ++i) {
    if (es[i].value > es[i - 1].value * (1.0 + 1e-9)) decreasing = false;
  }
  const double anchor = es[n - kVanishTrendLevels].value;
  const bool plateau =
      last > 0.0 && std::abs(last - anchor) <= kPlateauTolerance * last;

  if (last < kVanishFinalThreshold && decreasing) {
    report.verdict = "vanishing";
  } else if (last >= kVanishFinalThreshold && plateau) {
    report.verdict = "not-vanishing";
  }
}

}  // namespace curvespace
