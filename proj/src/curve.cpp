#include "curvespace/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <utility>

namespace curvespace {

namespace {

double chord_of(const std::vector<Complex>& pts) {
  return std::abs(pts.back() - pts.front());
}

double image_diameter(const std::vector<Complex>& pts) {
  double best = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      best = std::max(best, std::abs(pts[i] - pts[j]));
    }
  }
  return best;
}

double polyline_length(const std::vector<Complex>& pts, size_t stride) {
  CompensatedSum len;
  size_t i = 0;
  while (i + stride < pts.size()) {
    len.add(std::abs(pts[i + stride] - pts[i]));
    i += stride;
  }
  if (i + 1 < pts.size()) len.add(std::abs(pts.back() - pts[i]));
  return len.value();
}

// Per-level weight of the two beta-sum flavours; |I| is the source length.
double level_weight(WhitneySumMode mode, double p, double len) {
  if (mode == WhitneySumMode::QpWindow) return std::pow(len, p);
  const double l = std::log(1.0 / len);
  return l <= 0.0 ? 0.0 : std::pow(l, p);
}

void check_sum_params(WhitneySumMode mode, double p, const DyadicArc& root,
                      int depth, int samples, const char* who) {
  char buf[96];
  if (mode == WhitneySumMode::QpWindow && (!(p > 0.0) || p > 1.0)) {
    std::snprintf(buf, sizeof buf, "%s: window mode needs 0 < p <= 1", who);
    throw ParamOutOfRange(buf);
  }
  if (mode == WhitneySumMode::DlogpGlobal && p < 0.0) {
    std::snprintf(buf, sizeof buf, "%s: global mode needs p >= 0", who);
    throw ParamOutOfRange(buf);
  }
  if (depth < 0 || samples < 3) {
    std::snprintf(buf, sizeof buf, "%s: need depth >= 0 and samples >= 3", who);
    throw ParamOutOfRange(buf);
  }
  if (root.level + depth > 22) {
    std::snprintf(buf, sizeof buf, "%s: root.level + depth must stay <= 22", who);
    throw DepthExceeded(buf);
  }
}

// ------------------------------------------------ grid-beta helpers -------

// Liang-Barsky clip of segment [p, q] to an axis-aligned rectangle; returns
// false when the segment misses it.
bool clip_segment(Complex p, Complex q, double x0, double x1, double y0,
                  double y1, Complex& a, Complex& b) {
  const double dx = q.real() - p.real(), dy = q.imag() - p.imag();
  double t0 = 0.0, t1 = 1.0;
  const double pk[4] = {-dx, dx, -dy, dy};
  const double qk[4] = {p.real() - x0, x1 - p.real(), p.imag() - y0,
                        y1 - p.imag()};
  for (int k = 0; k < 4; ++k) {
    if (pk[k] == 0.0) {
      if (qk[k] < 0.0) return false;  // parallel and outside
    } else {
      const double t = qk[k] / pk[k];
      if (pk[k] < 0.0) {
        t0 = std::max(t0, t);
      } else {
        t1 = std::min(t1, t);
      }
    }
  }
  if (t0 > t1) return false;
  a = p + t0 * Complex{dx, dy};
  b = p + t1 * Complex{dx, dy};
  return true;
}

double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

// Andrew monotone-chain convex hull.
std::vector<Complex> convex_hull(std::vector<Complex> pts) {
  std::sort(pts.begin(), pts.end(), [](Complex u, Complex v) {
    return u.real() < v.real() ||
           (u.real() == v.real() && u.imag() < v.imag());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Complex> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {  // upper
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Minimal enclosing strip width of a point set.
double min_strip_width(const std::vector<Complex>& pts) {
  const std::vector<Complex> hull = convex_hull(pts);
  if (hull.size() <= 2) return 0.0;
  double width = std::numeric_limits<double>::infinity();
  for (size_t e = 0; e < hull.size(); ++e) {
    const Complex a = hull[e], b = hull[(e + 1) % hull.size()];
    const double len = std::abs(b - a);
    if (len <= 0.0) continue;
    double far = 0.0;
    for (const Complex& p : hull) far = std::max(far, std::abs(cross(a, b, p)));
    width = std::min(width, far / len);
  }
  return std::isfinite(width) ? width : 0.0;
}

struct QuadNode {
  double x0, y0, side;
  std::vector<size_t> segs;  // polyline segments meeting the tripled square
};

}  // namespace

std::vector<Complex> sample_arc(const AnalyticMap& map, const DyadicArc& arc,
                                int n) {
  if (n < 2) throw ParamOutOfRange("sample_arc: need at least 2 points");
  const double guard = map.radius_guard();
  const double t0 = std::max(1e-4, 4.0 * (1.0 - guard));
  const double r[3] = {1.0 - t0, 1.0 - 0.5 * t0, 1.0 - 0.25 * t0};
  std::vector<Complex> out(static_cast<size_t>(n));
  const double lo = arc.theta_lo(), len = arc.length();
  parallel_guarded(n, [&](int64_t i) {
    const double theta = lo + len * double(i) / double(n - 1);
    const Complex a1 = map.value(std::polar(r[0], theta));
    const Complex a2 = map.value(std::polar(r[1], theta));
    const Complex a3 = map.value(std::polar(r[2], theta));
    const Complex e1 = 2.0 * a2 - a1;
    const Complex e2 = 2.0 * a3 - a2;
    if (std::abs(e2 - e1) > 1e-6) {
      throw ExtrapolationUnstable(
          "sample_arc: radial extrapolants disagree beyond 1e-6 at theta=" +
          format_double(theta));
    }
    out[size_t(i)] = (4.0 * e2 - e1) / 3.0;
  });
  return out;
}

double beta_arc(const std::vector<Complex>& points) {
  if (points.size() < 2) throw ParamOutOfRange("beta_arc: need >= 2 points");
  const Complex a = points.front(), c = points.back() - points.front();
  const double chord = std::abs(c);
  if (chord <= 1e-12) throw DegenerateChord("beta_arc: endpoints coincide");
  double worst = 0.0;
  for (size_t i = 1; i + 1 < points.size(); ++i) {
    const Complex d = points[i] - a;
    const double x = std::abs(d.real() * c.imag() - d.imag() * c.real());
    worst = std::max(worst, x / chord);  // distance to the chord line
  }
  return worst / chord;
}

double arclength(const std::vector<Complex>& points) {
  if (points.size() < 2) throw ParamOutOfRange("arclength: need >= 2 points");
  const double fine = polyline_length(points, 1);
  const double coarse = polyline_length(points, 2);
  return (4.0 * fine - coarse) / 3.0;
}

double delta_arc(const std::vector<Complex>& points) {
  const double chord = chord_of(points);
  if (chord <= 1e-12) throw DegenerateChord("delta_arc: endpoints coincide");
  const double v = (arclength(points) - chord) / chord;
  if (v < -1e-9) {
    throw DegenerateInput("delta_arc: inscribed length fell below the chord");
  }
  return std::max(v, 0.0);
}

std::vector<DyadicArc> mr_subarcs(const DyadicArc& root, int depth) {
  if (depth < 0) throw ParamOutOfRange("mr_subarcs: depth must be >= 0");
  if (root.level + depth > 22) {
    throw DepthExceeded("mr_subarcs: root.level + depth must stay <= 22");
  }
  std::vector<DyadicArc> out;
  const Shift other = root.shift == Shift::None ? Shift::Third : Shift::None;
  for (int m = root.level; m <= root.level + depth; ++m) {
    const int64_t count = int64_t(1) << (m - root.level);
    const int64_t base = root.index << (m - root.level);
    for (int64_t i = 0; i < count; ++i) {
      out.push_back(DyadicArc{m, base + i, root.shift});
    }
    // Arcs of the complementary shift are offset by a third of a turn; scan
    // the index window overlapping root and keep the contained ones.
    const double len = kTwoPi * std::ldexp(1.0, -m);
    const double off = other == Shift::Third ? kTwoPi / 3.0 : 0.0;
    const int64_t total = int64_t(1) << m;
    const int64_t j0 = int64_t(std::floor((root.theta_lo() - off) / len)) - 1;
    for (int64_t j = j0; j <= j0 + count + 2; ++j) {
      const DyadicArc cand{m, ((j % total) + total) % total, other};
      if (root.contains_arc(cand)) out.push_back(cand);
    }
  }
  return out;
}

TstReport tst_sum(const AnalyticMap& map, const DyadicArc& root, int depth,
                  int samples) {
  if (samples < 3) throw ParamOutOfRange("tst_sum: need samples >= 3");
  const std::vector<DyadicArc> arcs = mr_subarcs(root, depth);

  TstReport rep;
  const std::vector<Complex> rootpts = sample_arc(map, root, samples);
  rep.lhs = arclength(rootpts) - chord_of(rootpts);

  std::vector<double> terms(arcs.size());
  parallel_guarded(int64_t(arcs.size()), [&](int64_t i) {
    const std::vector<Complex> pts = sample_arc(map, arcs[size_t(i)], samples);
    const double b = beta_arc(pts);
    terms[size_t(i)] = b * b * image_diameter(pts);
  });
  CompensatedSum rhs;
  for (double t : terms) rhs.add(t);
  rep.rhs = rhs.value();
  return rep;
}

LadderReport theorem3_statistic(const AnalyticMap& map, double p,
                                const DyadicArc& root, int depth, int samples,
                                WhitneySumMode mode) {
  check_sum_params(mode, p, root, depth, samples, "theorem3_statistic");
  const int first_level = mode == WhitneySumMode::DlogpGlobal
                              ? std::max(3, root.level)
                              : root.level;
  LadderReport rep;
  for (int m = first_level; m <= root.level + depth; ++m) {
    const int64_t count = int64_t(1) << (m - root.level);
    const int64_t base = root.index << (m - root.level);
    std::vector<double> terms(static_cast<size_t>(count));
    parallel_guarded(count, [&](int64_t i) {
      const DyadicArc arc{m, base + i, root.shift};
      const double b = beta_arc(sample_arc(map, arc, samples));
      terms[size_t(i)] = b * b * level_weight(mode, p, arc.length());
    });
    CompensatedSum sum;
    for (double t : terms) sum.add(t);
    double value = sum.value();
    if (mode == WhitneySumMode::QpWindow) value /= std::pow(root.length(), p);
    rep.entries.push_back({m, value, 0.0, 0.0});
  }
  finish_ladder(rep);
  return rep;
}

LadderReport corollary1_statistic(const AnalyticMap& map, double p,
                                  const DyadicArc& root, int depth,
                                  int samples, WhitneySumMode mode) {
  check_sum_params(mode, p, root, depth, samples, "corollary1_statistic");
  const int first_level = mode == WhitneySumMode::DlogpGlobal
                              ? std::max(3, root.level)
                              : root.level;
  const std::vector<DyadicArc> arcs = mr_subarcs(root, depth);
  std::vector<double> terms(arcs.size());
  parallel_guarded(int64_t(arcs.size()), [&](int64_t i) {
    const DyadicArc& arc = arcs[size_t(i)];
    if (arc.level < first_level) {
      terms[size_t(i)] = 0.0;
      return;
    }
    const double d = delta_arc(sample_arc(map, arc, samples));
    terms[size_t(i)] = d * level_weight(mode, p, arc.length());
  });
  LadderReport rep;
  for (int m = first_level; m <= root.level + depth; ++m) {
    CompensatedSum sum;
    for (size_t i = 0; i < arcs.size(); ++i) {
      if (arcs[i].level == m) sum.add(terms[i]);
    }
    double value = sum.value();
    if (mode == WhitneySumMode::QpWindow) value /= std::pow(root.length(), p);
    rep.entries.push_back({m, value, 0.0, 0.0});
  }
  finish_ladder(rep);
  return rep;
}

double jones_beta_grid(const std::vector<Complex>& polyline, Complex center,
                       double side) {
  if (!(side > 0.0)) throw ParamOutOfRange("jones_beta_grid: side must be > 0");
  if (polyline.size() < 2) {
    throw ParamOutOfRange("jones_beta_grid: need >= 2 points");
  }
  const double h = 1.5 * side;  // half-extent of the tripled square
  const double x0 = center.real() - h, x1 = center.real() + h;
  const double y0 = center.imag() - h, y1 = center.imag() + h;
  std::vector<Complex> clipped;
  for (size_t i = 0; i + 1 < polyline.size(); ++i) {
    Complex a, b;
    if (clip_segment(polyline[i], polyline[i + 1], x0, x1, y0, y1, a, b)) {
      clipped.push_back(a);
      clipped.push_back(b);
    }
  }
  if (clipped.empty()) return 0.0;
  return 0.5 * min_strip_width(clipped) / (side * std::sqrt(2.0));
}

double remark2_sum(const std::vector<Complex>& polyline, int depth) {
  if (polyline.size() < 2) {
    throw ParamOutOfRange("remark2_sum: need >= 2 points");
  }
  if (depth < 0 || depth > 24) {
    throw ParamOutOfRange("remark2_sum: depth must be in 0..24");
  }
  double xmin = std::numeric_limits<double>::infinity(), xmax = -std::numeric_limits<double>::infinity(), ymin = std::numeric_limits<double>::infinity(), ymax = -std::numeric_limits<double>::infinity();
  for (const Complex& p : polyline) {
    xmin = std::min(xmin, p.real());
    xmax = std::max(xmax, p.real());
    ymin = std::min(ymin, p.imag());
    ymax = std::max(ymax, p.imag());
  }
  const double extent = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double s = std::exp2(std::ceil(std::log2(extent)));
  QuadNode rootnode;
  rootnode.side = 2.0 * s;
  rootnode.x0 = std::floor(xmin / s) * s;
  rootnode.y0 = std::floor(ymin / s) * s;
  rootnode.segs.resize(polyline.size() - 1);
  for (size_t i = 0; i < rootnode.segs.size(); ++i) rootnode.segs[i] = i;

  CompensatedSum total;
  std::vector<std::pair<QuadNode, int>> stack{{std::move(rootnode), 0}};
  while (!stack.empty()) {
    auto [node, level] = std::move(stack.back());
    stack.pop_back();
    Complex ca, cb;

    // Contribution requires the square itself (not just its triple) to meet
    // the polyline, and a sub-unit diameter to match the vanishing weights.
    if (node.side * std::sqrt(2.0) < 1.0) {
      bool hit = false;
      for (size_t si : node.segs) {
        if (clip_segment(polyline[si], polyline[si + 1], node.x0,
                         node.x0 + node.side, node.y0, node.y0 + node.side,
                         ca, cb)) {
          hit = true;
          break;
        }
      }
      if (hit) {
        const Complex center{node.x0 + 0.5 * node.side,
                             node.y0 + 0.5 * node.side};
        const double b = jones_beta_grid(polyline, center, node.side);
        total.add(b * b * node.side);
      }
    }
    if (level >= depth) continue;

    for (int cy = 0; cy < 2; ++cy) {
      for (int cx = 0; cx < 2; ++cx) {
        QuadNode child;
        child.side = 0.5 * node.side;
        child.x0 = node.x0 + cx * child.side;
        child.y0 = node.y0 + cy * child.side;
        const double m = 0.5 * child.side;  // triple margin of the child
        for (size_t si : node.segs) {
          if (clip_segment(polyline[si], polyline[si + 1], child.x0 - m,
                           child.x0 + child.side + m, child.y0 - m,
                           child.y0 + child.side + m, ca, cb)) {
            child.segs.push_back(si);
          }
        }
        if (!child.segs.empty()) stack.push_back({std::move(child), level + 1});
      }
    }
  }
  return total.value();
}

ConformalityModulus::ConformalityModulus(const AnalyticMap& map, int maxlevel,
                                         int samples) {
  if (maxlevel < 1 || maxlevel > 16) {
    throw ParamOutOfRange("ConformalityModulus: maxlevel must be in 1..16");
  }
  if (samples < 3) {
    throw ParamOutOfRange("ConformalityModulus: need samples >= 3");
  }
  const std::vector<DyadicArc> arcs = mr_family(maxlevel);
  std::vector<std::pair<double, double>> raw(arcs.size(), {0.0, -1.0});
  parallel_guarded(int64_t(arcs.size()), [&](int64_t i) {
    const std::vector<Complex> pts = sample_arc(map, arcs[size_t(i)], samples);
    const Complex w1 = pts.front(), w2 = pts.back();
    const double chord = std::abs(w2 - w1);
    if (chord <= 1e-12) return;  // whole-circle arcs carry no detour
    double detour = 0.0;
    for (size_t j = 1; j + 1 < pts.size(); ++j) {
      const double loop = (std::abs(w1 - pts[j]) + std::abs(pts[j] - w2)) / chord;
      detour = std::max(detour, loop - 1.0);
    }
    raw[size_t(i)] = {image_diameter(pts), detour};
  });
  for (const auto& r : raw) {
    if (r.second >= 0.0) knots_.push_back(r);
  }
  std::sort(knots_.begin(), knots_.end());
  double running = 0.0;
  for (auto& k : knots_) {
    running = std::max(running, k.second);
    k.second = running;
  }
}

double ConformalityModulus::eval(double t) const {
  if (!(t > 0.0)) throw ParamOutOfRange("ConformalityModulus: t must be > 0");
  // Largest knot with diameter <= t.
  auto it = std::upper_bound(
      knots_.begin(), knots_.end(), std::make_pair(t, std::numeric_limits<double>::infinity()));
  if (it == knots_.begin()) return 0.0;
  return std::sqrt(std::max(0.0, std::prev(it)->second));
}

}  // namespace curvespace
