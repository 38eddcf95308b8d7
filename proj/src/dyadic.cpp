#include "curvespace/dyadic.hpp"

#include <cmath>
#include <unordered_set>

namespace curvespace {
namespace {

// Wrap into (-pi, pi].
double wrap_pm(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t > kPi) t -= kTwoPi;
  if (t <= -kPi) t += kTwoPi;
  return t;
}

int64_t cell_count(int level) { return int64_t{1} << level; }

}  // namespace

// ------------------------------------------------------------ DyadicArc ---

DyadicArc make_arc(int level, int64_t index, Shift shift) {
  if (level < 0 || level > kMaxArcLevel)
    throw ParamOutOfRange("arc level must be in [0, " + std::to_string(kMaxArcLevel) + "]");
  if (index < 0 || index >= cell_count(level))
    throw ParamOutOfRange("arc index out of range for level " + std::to_string(level));
  return DyadicArc{level, index, shift};
}

std::pair<DyadicArc, DyadicArc> DyadicArc::children() const {
  if (level + 1 > kMaxArcLevel)
    throw DepthExceeded("arc refinement beyond level " + std::to_string(kMaxArcLevel));
  return {DyadicArc{level + 1, 2 * index, shift}, DyadicArc{level + 1, 2 * index + 1, shift}};
}

DyadicArc DyadicArc::parent() const {
  if (level == 0) throw ParamOutOfRange("level-0 arc has no parent");
  return DyadicArc{level - 1, index / 2, shift};
}

bool DyadicArc::contains_angle(double theta) const {
  // Half-open [theta_lo, theta_hi) modulo 2*pi.
  return wrap_angle(theta - theta_lo()) < length();
}

bool DyadicArc::contains_arc(const DyadicArc& other) const {
  if (level == 0) return true;  // whole circle, regardless of shift
  if (shift == other.shift) {
    if (other.level < level) return false;
    return (other.index >> (other.level - level)) == index;
  }
  const double d = wrap_angle(other.theta_lo() - theta_lo());
  return d + other.length() <= length() + 1e-12;
}

// ----------------------------------------------------------- CarlesonBox --

bool CarlesonBox::contains(Complex z) const {
  const double r = std::abs(z);
  if (side == BoxSide::Interior) {
    if (r < r_inner() || r >= 1.0) return false;
  } else {
    if (r <= 1.0 || r > r_outer()) return false;
  }
  return arc.contains_angle(std::arg(z));
}

double CarlesonBox::area() const {
  const double ri = r_inner(), ro = r_outer();
  return arc.length() * (ro * ro - ri * ri) / 2.0;
}

bool in_scaled_box(const DyadicArc& arc, Complex z, double scale) {
  const double r = std::abs(z);
  const double len = std::min(scale * arc.length(), kTwoPi);
  if (r < std::max(0.0, 1.0 - len) || r >= 1.0) return false;
  if (len >= kTwoPi) return true;
  return std::abs(wrap_pm(std::arg(z) - arc.theta_mid())) <= len / 2.0;
}

// ------------------------------------------------------------ WhitneyTop --

Complex WhitneyTop::center() const {
  const double r = 1.0 - 0.75 * arc.length();
  return std::polar(r, arc.theta_mid());
}

double WhitneyTop::diam() const {
  const double rh = r_hi(), rl = r_lo();
  if (rh <= 0.0) return 0.0;  // levels 0 and 1 have empty tops
  const double dth = arc.length();
  if (dth >= kPi) return 2.0 * rh;
  const double chord = 2.0 * rh * std::sin(dth / 2.0);
  const double diag = std::sqrt(rl * rl + rh * rh - 2.0 * rl * rh * std::cos(dth));
  return std::max(chord, diag);
}

bool WhitneyTop::contains(Complex z) const {
  const double r = std::abs(z);
  if (r < r_lo() || r >= r_hi()) return false;
  return arc.contains_angle(std::arg(z));
}

// -------------------------------------------------------------- Geodesic --

Geodesic geodesic(Complex z1, Complex z2) {
  if (std::abs(z1 - z2) < 1e-14)
    throw DegenerateInput("geodesic endpoints coincide");
  Geodesic g;
  g.z1 = z1;
  g.z2 = z2;
  const double cross = z1.real() * z2.imag() - z1.imag() * z2.real();
  if (std::abs(cross) < 1e-14) {
    g.is_segment = true;
    return g;
  }
  const double s1 = std::norm(z1) + 1.0, s2 = std::norm(z2) + 1.0;
  g.center = Complex{(s1 * z2.imag() - s2 * z1.imag()) / (2.0 * cross),
                     (s2 * z1.real() - s1 * z2.real()) / (2.0 * cross)};
  g.radius = 0.5 * (std::abs(z1 - g.center) + std::abs(z2 - g.center));
  const double ortho = std::abs(std::norm(g.center) - g.radius * g.radius - 1.0);
  if (!(ortho <= 1e-10 * (std::norm(g.center) + 1.0)))
    throw DegenerateInput("geodesic circle is numerically degenerate");
  g.ang1 = std::arg(z1 - g.center);
  // Both endpoints lie on the in-disc arc, which subtends less than pi as
  // seen from the center, so the short sweep is the in-disc one.
  g.sweep = wrap_pm(std::arg(z2 - g.center) - g.ang1);
  return g;
}

Complex Geodesic::point(double u) const {
  if (is_segment) return z1 + u * (z2 - z1);
  return center + std::polar(radius, ang1 + u * sweep);
}

double Geodesic::euclid_length() const {
  return is_segment ? std::abs(z2 - z1) : radius * std::abs(sweep);
}

// ---------------------------------------------------------------- chains --

int level_from_radius(double r) {
  if (r >= 1.0) return kMaxArcLevel;
  const double gap = 1.0 - r;
  if (gap > kPi / 4.0) return 2;
  const int level = static_cast<int>(std::floor(std::log2(kPi / gap))) + 1;
  return std::clamp(level, 3, kMaxArcLevel);
}

namespace {

// Curve parameter of a point known to lie on the geodesic, or nullopt when
// it falls outside the [0, 1] range.
std::optional<double> param_of(const Geodesic& g, Complex p) {
  if (g.is_segment) {
    const Complex d = g.z2 - g.z1;
    const double u = ((p - g.z1) * std::conj(d)).real() / std::norm(d);
    return (u > 0.0 && u < 1.0) ? std::optional<double>(u) : std::nullopt;
  }
  const double psi = std::arg(p - g.center);
  const double d = wrap_pm(psi - g.ang1);
  if (g.sweep > 0.0 ? (d > 0.0 && d < g.sweep) : (d < 0.0 && d > g.sweep))
    return d / g.sweep;
  return std::nullopt;
}

// Parameters where |point(u)| crosses a Whitney band boundary 1 - pi*2^-l.
void radial_crossings(const Geodesic& g, std::vector<double>& out) {
  double rmin, rmax;
  if (g.is_segment) {
    const Complex d = g.z2 - g.z1;
    const double t = std::clamp(-((g.z1) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
    rmin = std::min({std::abs(g.z1), std::abs(g.z2), std::abs(g.point(t))});
    rmax = std::max(std::abs(g.z1), std::abs(g.z2));
  } else {
    const double dc = std::abs(g.center);
    rmin = std::min(std::abs(g.z1), std::abs(g.z2));
    rmax = std::max(std::abs(g.z1), std::abs(g.z2));
    // Interior radius minimum when the nearest-to-origin circle point is on
    // the traversed arc.
    const Complex nearest = g.center * (1.0 - g.radius / dc);
    if (param_of(g, nearest)) rmin = std::min(rmin, dc - g.radius);
  }
  for (int level = 2; level <= kMaxArcLevel; ++level) {
    const double b = 1.0 - kPi * std::ldexp(1.0, -level);
    if (b <= rmin || b >= rmax) continue;
    if (g.is_segment) {
      const Complex d = g.z2 - g.z1;
      const double A = std::norm(d), B = 2.0 * ((g.z1) * std::conj(d)).real();
      const double C = std::norm(g.z1) - b * b;
      const double disc = B * B - 4.0 * A * C;
      if (disc <= 0.0) continue;
      const double sq = std::sqrt(disc);
      for (double u : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)})
        if (u > 0.0 && u < 1.0) out.push_back(u);
    } else {
      const double dc = std::abs(g.center);
      const double alpha = (b * b + 1.0) / (2.0 * dc);  // uses |c|^2 - rho^2 = 1
      const double h2 = b * b - alpha * alpha;
      if (h2 <= 0.0) continue;
      const double h = std::sqrt(h2);
      const Complex chat = g.center / dc;
      const Complex perp{-chat.imag(), chat.real()};
      for (const Complex& p : {alpha * chat + h * perp, alpha * chat - h * perp})
        if (auto u = param_of(g, p)) out.push_back(*u);
    }
  }
  // Radius minimum of an origin-crossing segment: split there so each piece
  // has a single polar angle.
  if (g.is_segment) {
    const Complex d = g.z2 - g.z1;
    const double t = -((g.z1) * std::conj(d)).real() / std::norm(d);
    if (t > 0.0 && t < 1.0) out.push_back(t);
  }
}

// Parameters in (u0, u1) where the geodesic crosses a mesh ray of the given
// level/shift.  The piece must not cross band boundaries (angle-monotone:
// inside the disc the polar angle of a geodesic is strictly monotone).
void angular_crossings(const Geodesic& g, double u0, double u1, int level,
                       double offset, std::vector<double>& out) {
  if (g.is_segment) return;  // constant polar angle per piece
  const double phi0 = std::arg(g.point(u0));
  const double dphi = wrap_pm(std::arg(g.point(u1)) - phi0);
  const double lo = std::min(phi0, phi0 + dphi), hi = std::max(phi0, phi0 + dphi);
  const double w = kTwoPi * std::ldexp(1.0, -level);
  const int64_t jlo = static_cast<int64_t>(std::floor((lo - offset) / w)) + 1;
  const int64_t jhi = static_cast<int64_t>(std::ceil((hi - offset) / w)) - 1;
  for (int64_t j = jlo; j <= jhi; ++j) {
    const double theta = offset + double(j) * w;
    const double b = (std::conj(g.center) * std::polar(1.0, theta)).real();
    if (b < 1.0) continue;
    const double r_in = b - std::sqrt(std::max(0.0, b * b - 1.0));
    if (auto u = param_of(g, std::polar(r_in, theta)))
      if (*u > u0 && *u < u1) out.push_back(*u);
  }
}

WhitneyTop top_at(Complex z, Shift shift) {
  const int level = level_from_radius(std::abs(z));
  const double offset = shift == Shift::Third ? kTwoPi / 3.0 : 0.0;
  const double w = kTwoPi * std::ldexp(1.0, -level);
  int64_t index = static_cast<int64_t>(std::floor(wrap_angle(std::arg(z) - offset) / w));
  index = std::clamp<int64_t>(index, 0, cell_count(level) - 1);
  return WhitneyTop{DyadicArc{level, index, shift}};
}

uint64_t top_key(const WhitneyTop& t) {
  return (uint64_t(t.arc.level) << 56) | uint64_t(t.arc.index);
}

}  // namespace

std::vector<WhitneyTop> chain(const WhitneyTop& root, Complex z, int max_tops) {
  if (!in_scaled_box(root.arc, z, 2.0))
    throw ParamOutOfRange("chain target must lie in the doubled Carleson box");
  std::vector<WhitneyTop> tops{root};
  const Complex zi = root.center();
  if (std::abs(z - zi) < 1e-14) return tops;

  const Geodesic g = geodesic(zi, z);
  std::vector<double> splits{0.0, 1.0};
  radial_crossings(g, splits);
  std::sort(splits.begin(), splits.end());

  const double offset = root.arc.shift_offset();
  std::vector<double> angular;
  for (size_t i = 0; i + 1 < splits.size(); ++i) {
    if (splits[i + 1] - splits[i] < 1e-15) continue;
    const double um = 0.5 * (splits[i] + splits[i + 1]);
    const int level = level_from_radius(std::abs(g.point(um)));
    angular_crossings(g, splits[i], splits[i + 1], level, offset, angular);
  }
  splits.insert(splits.end(), angular.begin(), angular.end());
  std::sort(splits.begin(), splits.end());

  std::unordered_set<uint64_t> seen{top_key(root)};
  for (size_t i = 0; i + 1 < splits.size(); ++i) {
    if (splits[i + 1] - splits[i] < 1e-15) continue;
    const WhitneyTop t = top_at(g.point(0.5 * (splits[i] + splits[i + 1])), root.arc.shift);
    if (seen.insert(top_key(t)).second) {
      tops.push_back(t);
      if (static_cast<int>(tops.size()) > max_tops)
        throw ChainOverflow("geodesic chain exceeds " + std::to_string(max_tops) + " tops");
    }
  }
  return tops;
}

// ------------------------------------------------- covering arc family ----

std::vector<DyadicArc> mr_family(int maxlevel) {
  if (maxlevel < 0 || maxlevel > 20)
    throw DepthExceeded("covering family depth must be in [0, 20]");
  std::vector<DyadicArc> out;
  out.reserve(size_t(2) * ((size_t(1) << (maxlevel + 1)) - 1));
  for (Shift shift : {Shift::None, Shift::Third})
    for (int level = 0; level <= maxlevel; ++level)
      for (int64_t index = 0; index < cell_count(level); ++index)
        out.push_back(DyadicArc{level, index, shift});
  return out;
}

std::optional<DyadicArc> mr_cover(double theta, double len, double max_ratio) {
  if (!(len > 0.0) || len > kTwoPi)
    throw ParamOutOfRange("cover query length must be in (0, 2*pi]");
  if (!(max_ratio >= 1.0))
    throw ParamOutOfRange("cover ratio must be >= 1");
  std::optional<DyadicArc> best;
  double best_margin = -1.0;
  for (int level = 0; level <= kMaxArcLevel; ++level) {
    const double w = kTwoPi * std::ldexp(1.0, -level);
    if (w < len) break;
    if (w > max_ratio * len) continue;
    for (Shift shift : {Shift::None, Shift::Third}) {
      const double offset = shift == Shift::Third ? kTwoPi / 3.0 : 0.0;
      const double d = wrap_angle(theta - offset);
      const int64_t j = std::clamp<int64_t>(
          static_cast<int64_t>(std::floor(d / w)), 0, cell_count(level) - 1);
      const double into = d - double(j) * w;  // distance from cell start
      const double margin = std::min(into, w - into - len);
      if (margin >= 0.0 && margin > best_margin) {
        best_margin = margin;
        best = DyadicArc{level, j, shift};
      }
    }
  }
  return best;
}

}  // namespace curvespace
