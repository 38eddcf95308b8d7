#include "curvespace/spaces.hpp"

#include <algorithm>
#include <cmath>

namespace curvespace {

namespace {

WeightedIntegrand dirichlet_density(const AnalyticMap& map, WeightTag w, double p) {
  return {[&map](Complex z) { return std::norm(map.log_deriv(z)); }, w, p};
}

}  // namespace

LadderReport dlogp_energy(const AnalyticMap& map, double p, int levels, double tol) {
  if (p < 0.0) throw ParamOutOfRange("dlogp_energy: p must be >= 0");
  return ladder(dirichlet_density(map, WeightTag::LogP, p),
                Exhaustion::InteriorAnnuli, levels, tol);
}

BoxRatio qp_box_ratio(const AnalyticMap& map, double p, const DyadicArc& arc, double tol) {
  if (!(p > 0.0) || p > 1.0) throw ParamOutOfRange("qp_box_ratio: need 0 < p <= 1");
  const IntegralResult r =
      integrate_box(dirichlet_density(map, WeightTag::OneMinusSqP, p), box(arc), tol);
  const double norm = std::pow(arc.length(), p);
  return {arc, r.value / norm, r.err / norm};
}

LadderReport qp_vanishing_profile(const AnalyticMap& map, double p, int levels, double tol) {
  if (!(p > 0.0) || p > 1.0) throw ParamOutOfRange("qp_vanishing_profile: need 0 < p <= 1");
  if (levels < 1 || levels > 20) throw DepthExceeded("qp_vanishing_profile: levels must be in 1..20");

  LadderReport rep;
  rep.entries.reserve(levels);
  for (int n = 1; n <= levels; ++n) {
    const int64_t count = int64_t(1) << n;
    std::vector<double> vals(count), errs(count);
    parallel_guarded(count, [&](int64_t i) {
      const BoxRatio b = qp_box_ratio(map, p, make_arc(n, i), tol);
      vals[i] = b.value;
      errs[i] = b.err;
    });
    LadderEntry e;
    e.level = n;
    for (int64_t i = 0; i < count; ++i) {  // serial reduce, fixed order
      if (vals[i] > e.value) {
        e.value = vals[i];
        e.err = errs[i];
      }
    }
    rep.entries.push_back(e);
  }
  classify_vanishing_profile(rep);
  return rep;
}

double eta_point(const AnalyticMap& map, Complex z) {
  return (1.0 - std::abs(z)) * std::abs(map.log_deriv(z));
}

double eta_top(const AnalyticMap& map, const WhitneyTop& w, int grid) {
  if (grid < 2) throw ParamOutOfRange("eta_top: grid must be >= 2");
  if (w.r_hi() <= w.r_lo()) return 0.0;  // levels 0-1 are empty bands
  const double lo = w.arc.theta_lo(), len = w.arc.length();
  auto scan = [&](int g) {
    double best = 0.0;
    for (int i = 0; i <= g; ++i) {
      const double r = w.r_lo() + (w.r_hi() - w.r_lo()) * i / g;
      for (int j = 0; j <= g; ++j) {
        best = std::max(best, eta_point(map, std::polar(r, lo + len * j / g)));
      }
    }
    return best;
  };
  double prev = scan(grid);
  for (int g = 2 * grid; g <= 256; g *= 2) {
    const double cur = scan(g);
    if (std::abs(cur - prev) <= 0.05 * std::max(cur, 1e-12)) return cur;
    prev = cur;
  }
  return prev;
}

std::vector<std::pair<double, double>> dini_profile(const AnalyticMap& map, double p,
                                                    const std::vector<double>& radii) {
  if (!(p > 2.0)) throw ParamOutOfRange("dini_profile: p must exceed 2");
  std::vector<std::pair<double, double>> out;
  out.reserve(radii.size());
  for (const double r : radii) {
    if (!(r > 0.9) || !(r < 1.0)) {
      throw ParamOutOfRange("dini_profile: radii must lie in (0.9, 1)");
    }
    auto h = [&](double theta) { return std::abs(map.log_deriv(std::polar(r, theta))); };

    // coarse circle scan, then zoom the best windows until the angular
    // resolution is finer than the distance to the boundary
    const int kCoarse = 64;
    std::vector<std::pair<double, double>> vals(kCoarse);  // (value, theta)
    for (int i = 0; i < kCoarse; ++i) {
      const double t = kTwoPi * i / kCoarse;
      vals[i] = {h(t), t};
    }
    std::partial_sort(vals.begin(), vals.begin() + 8, vals.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = vals[0].first;
    const double target = (1.0 - r) / 8.0;
    for (int c = 0; c < 8; ++c) {
      double center = vals[c].second;
      double w = kTwoPi / kCoarse;
      while (w > target) {
        double local_best = -1.0, local_arg = center;
        for (int j = -4; j <= 4; ++j) {
          const double t = center + j * w / 4.0;
          const double v = h(t);
          if (v > local_best) {
            local_best = v;
            local_arg = t;
          }
        }
        best = std::max(best, local_best);
        center = local_arg;
        w /= 4.0;
      }
    }
    const double l = std::log(1.0 / (1.0 - r));
    out.emplace_back(r, best * (1.0 - r) * std::pow(l, 0.5 * p));
  }
  return out;
}

double whitney_energy_sum(const AnalyticMap& map, double p, const DyadicArc& root,
                          WhitneySumMode mode, int depth) {
  if (depth < 0) throw ParamOutOfRange("whitney_energy_sum: depth must be >= 0");
  if (root.level + depth > 22) throw DepthExceeded("whitney_energy_sum: subtree deeper than level 22");
  if (mode == WhitneySumMode::QpWindow && (!(p > 0.0) || p > 1.0)) {
    throw ParamOutOfRange("whitney_energy_sum: QpWindow needs 0 < p <= 1");
  }
  if (mode == WhitneySumMode::DlogpGlobal && p < 0.0) {
    throw ParamOutOfRange("whitney_energy_sum: DlogpGlobal needs p >= 0");
  }

  CompensatedSum total;
  const int first_level =
      (mode == WhitneySumMode::DlogpGlobal) ? std::max(3, root.level) : root.level;
  for (int m = first_level; m <= root.level + depth; ++m) {
    const int64_t count = int64_t(1) << (m - root.level);
    const int64_t base = root.index << (m - root.level);
    std::vector<double> vals(count);
    parallel_guarded(count, [&](int64_t i) {
      const WhitneyTop w = top(DyadicArc{m, base + i, root.shift});
      const double d = w.diam();
      if (d <= 0.0) {
        vals[i] = 0.0;
        return;
      }
      const double e = eta_top(map, w);
      const double weight = (mode == WhitneySumMode::QpWindow)
                                ? std::pow(d, p)
                                : std::pow(std::log(1.0 / d), p);
      vals[i] = e * e * weight;
    });
    for (int64_t i = 0; i < count; ++i) total.add(vals[i]);
  }
  if (mode == WhitneySumMode::QpWindow) {
    return total.value() / std::pow(root.length(), p);
  }
  return total.value();
}

}  // namespace curvespace
