#pragma once
// Dyadic decomposition of the unit circle and the associated disc geometry:
// Carleson boxes, Whitney tops, hyperbolic geodesics and geodesic chains.
//
// Arc conventions: a level-n arc has angular length 2*pi*2^-n; the plain grid
// starts at angle 0 and the "third" grid is the same mesh rotated by 2*pi/3,
// which together form the multi-resolution covering family.
//
// Whitney top of arc I: { r e^it : e^it in I, |I|/2 < 1-r <= |I| }.  Tops of
// all arcs at levels >= 3 tile the annulus 1 - pi/4 < |z| < 1; the half-open
// radial convention r in [1-|I|, 1-|I|/2) makes the tiling exact.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "curvespace/common.hpp"

namespace curvespace {

inline constexpr int kMaxArcLevel = 52;

enum class Shift { None, Third };

struct DyadicArc {
  int level = 0;
  int64_t index = 0;
  Shift shift = Shift::None;

  double length() const { return kTwoPi * std::ldexp(1.0, -level); }
  double shift_offset() const { return shift == Shift::Third ? kTwoPi / 3.0 : 0.0; }
  double theta_lo() const { return shift_offset() + double(index) * length(); }
  double theta_hi() const { return shift_offset() + double(index + 1) * length(); }
  double theta_mid() const { return shift_offset() + (double(index) + 0.5) * length(); }

  std::pair<DyadicArc, DyadicArc> children() const;
  DyadicArc parent() const;
  bool contains_angle(double theta) const;
  bool contains_arc(const DyadicArc& other) const;

  bool operator==(const DyadicArc& o) const {
    return level == o.level && index == o.index && shift == o.shift;
  }
};

// Validating constructor: level in [0, kMaxArcLevel], index in [0, 2^level).
DyadicArc make_arc(int level, int64_t index, Shift shift = Shift::None);

enum class BoxSide { Interior, Exterior };

struct CarlesonBox {
  DyadicArc arc;
  BoxSide side = BoxSide::Interior;

  // interior: max(0, 1-|I|) <= |z| < 1;  exterior: 1 < |z| <= 1+|I|
  double r_inner() const {
    return side == BoxSide::Interior ? std::max(0.0, 1.0 - arc.length()) : 1.0;
  }
  double r_outer() const {
    return side == BoxSide::Interior ? 1.0 : 1.0 + arc.length();
  }
  bool contains(Complex z) const;
  double area() const;  // exact: |I| * |r_outer^2 - r_inner^2| / 2
};

inline CarlesonBox box(const DyadicArc& arc, BoxSide side = BoxSide::Interior) {
  return {arc, side};
}

// Concentric dilate membership: z in scale*Q_I (interior side).
bool in_scaled_box(const DyadicArc& arc, Complex z, double scale);

struct WhitneyTop {
  DyadicArc arc;

  double r_lo() const { return std::max(0.0, 1.0 - arc.length()); }
  double r_hi() const { return 1.0 - 0.5 * arc.length(); }
  // Anchor point z_I at radius 1 - 3|I|/4 over the arc midpoint; geometric
  // only for levels >= 3 (coarser tops are clipped by the origin).
  Complex center() const;
  double diam() const;
  bool contains(Complex z) const;

  bool operator==(const WhitneyTop& o) const { return arc == o.arc; }
};

inline WhitneyTop top(const DyadicArc& arc) { return {arc}; }

// ------------------------------------------------------------ geodesics ---

// Hyperbolic geodesic between two interior points: the arc of the circle
// orthogonal to the unit circle (|center|^2 - radius^2 = 1), or a diameter
// segment when the points are collinear with the origin.
struct Geodesic {
  Complex z1, z2;
  bool is_segment = false;
  Complex center{0.0, 0.0};
  double radius = 0.0;
  double ang1 = 0.0;   // angle of z1 - center
  double sweep = 0.0;  // signed sweep to z2 staying inside the disc

  Complex point(double u) const;  // u in [0, 1], point(0)=z1, point(1)=z2
  double euclid_length() const;
};

Geodesic geodesic(Complex z1, Complex z2);

// ------------------------------------------------------------- chains -----

// Whitney tops met by the geodesic from root.center() to z, ordered by first
// intersection and starting with the root.  Crossings are computed exactly
// from circle-circle and circle-ray intersections.  Requires z in 2Q_I.
std::vector<WhitneyTop> chain(const WhitneyTop& root, Complex z, int max_tops = 10000);

// ------------------------------------------------- covering arc family ----

// All arcs of both shifts, levels 0..maxlevel: 2*(2^(maxlevel+1)-1) arcs.
std::vector<DyadicArc> mr_family(int maxlevel);

// Best covering member for the arc [theta, theta+len]: among family members
// of length <= max_ratio * len that contain it, the one maximizing the
// two-sided containment margin.  nullopt when none qualifies.
std::optional<DyadicArc> mr_cover(double theta, double len, double max_ratio);

// Whitney level owning radius r: the level l with |I_l|/2 < 1-r <= |I_l|,
// clamped to [2, kMaxArcLevel].
int level_from_radius(double r);

}  // namespace curvespace
