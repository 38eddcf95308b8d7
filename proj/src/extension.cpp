#include "curvespace/extension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace curvespace {

namespace {

// Reflected point 1/conj(z) and the shared dilatation formula.
inline Complex reflect(Complex z) { return 1.0 / std::conj(z); }

constexpr int kBatchSize = 20000;  // quasi-random points per sup-norm batch
constexpr int kMaxBatches = 5;
constexpr double kBatchStable = 0.02;  // stop when the sup moves under 2%
constexpr int kMassLevels = 40;        // exterior shells feeding total_mass

}  // namespace

ExtensionField::ExtensionField(AnalyticMap map, double outer_radius)
    : map_(std::move(map)), R_(outer_radius) {
  if (!(R_ > 1.0) || !(R_ <= 8.0)) {
    throw ParamOutOfRange("ExtensionField: outer_radius must be in (1, 8]");
  }

  // Sampled sup norm of |mu| over the collar, area-uniform Halton batches.
  const double rr = R_ * R_ - 1.0;
  double sup = 0.0;
  for (int b = 0; b < kMaxBatches; ++b) {
    std::vector<double> vals(kBatchSize);
    parallel_guarded(kBatchSize, [&](int64_t i) {
      const auto [u, v] = halton2(uint64_t(b) * kBatchSize + uint64_t(i), 17);
      const double r = std::sqrt(1.0 + u * rr);
      vals[size_t(i)] = std::abs(dilatation_raw(std::polar(r, kTwoPi * v)));
    });
    const double prev = sup;
    for (double v : vals) sup = std::max(sup, v);
    if (b > 0 && sup - prev <= kBatchStable * sup) break;
  }
  k_est_ = sup;

  // Total squared-mu mass of the collar via the exterior shell ladder.
  WeightedIntegrand density{
      [this](Complex z) { return std::norm(dilatation_raw(z)); },
      WeightTag::One, 0.0};
  LadderReport rep =
      ladder(density, Exhaustion::ExteriorAnnuli, kMassLevels, 1e-9, R_);
  mass_ = rep.verdict == "converged" ? rep.limit_or_slope : rep.cumulative;
}

Complex ExtensionField::extend(Complex z) const {
  if (!(std::abs(z) > 1.0)) {
    throw ParamOutOfRange("extend: z must lie outside the closed disc");
  }
  const Complex w = reflect(z);
  const MapJet j = map_.jet(w);
  return j.f + j.fp * (z - w);
}

Complex ExtensionField::dilatation_raw(Complex z) const {
  if (!(std::abs(z) > 1.0)) {
    throw ParamOutOfRange("dilatation: z must lie outside the closed disc");
  }
  const Complex w = reflect(z);
  const Complex cz = std::conj(z);
  return -(z - w) * map_.log_deriv(w) / (cz * cz);
}

Complex ExtensionField::dilatation(Complex z) const {
  if (!(std::abs(z) > 1.0)) {
    throw ParamOutOfRange("dilatation: z must lie outside the closed disc");
  }
  if (std::abs(z) > R_) return 0.0;
  return dilatation_raw(z);
}

double ExtensionField::eta_identity_residual(Complex z) const {
  const double az = std::abs(z);
  const Complex w = reflect(z);
  const double eta = (1.0 - std::abs(w)) * std::abs(map_.log_deriv(w));
  return std::abs(std::abs(dilatation_raw(z)) - (az + 1.0) / (az * az) * eta);
}

double ExtensionField::omega(Complex z, double t, double tol) const {
  if (!(t > 0.0)) throw ParamOutOfRange("omega: t must be positive");
  if (!(tol > 0.0)) throw ParamOutOfRange("omega: tol must be positive");
  const double a = std::abs(z);
  const double dist = a < 1.0 ? 1.0 - a : (a > R_ ? a - R_ : 0.0);
  if (t <= dist || mass_ <= 0.0) return 0.0;
  if (t >= a + R_) return std::sqrt(mass_ / kPi) / t;  // ball covers the collar

  // Squared-mass of mu over B(z,t) intersect the collar, in polar slices:
  // for each radius the ball cuts the angular window |theta - arg z| < phi(r).
  const double rlo = std::max(1.0, a - t);
  const double rhi = std::min(R_, a + t);
  if (!(rhi > rlo)) return 0.0;
  const double phi0 = std::arg(z);
  const auto slice = [&](double r, double inner_tol) {
    const double den = 2.0 * r * a;
    double c;
    if (den < 1e-300) {
      c = r <= t ? -1.0 : 1.0;  // z at the origin: window is all or nothing
    } else {
      c = std::clamp((r * r + a * a - t * t) / den, -1.0, 1.0);
    }
    const double phi = std::acos(c);
    if (!(phi > 0.0)) return 0.0;
    return integrate_line(
        [&](double theta) { return std::norm(dilatation_raw(std::polar(r, theta))); },
        phi0 - phi, phi0 + phi, inner_tol, 24);
  };
  const auto mass_in_ball = [&](double abs_tol) {
    const double inner_tol = 0.5 * abs_tol / (rhi - rlo);
    return integrate_line([&](double r) { return r * slice(r, inner_tol); },
                          rlo, rhi, abs_tol, 24);
  };
  // Coarse magnitude pass sets the absolute budget for the final pass.
  const double coarse = mass_in_ball(0.05 * mass_);
  const double scale = std::max(std::abs(coarse), 1e-9 * mass_);
  const double m = mass_in_ball(tol * scale);
  return std::sqrt(std::max(m, 0.0) / kPi) / t;
}

double ExtensionField::dynkin_ratio(Complex z, double tol,
                                    std::optional<double> k_override) const {
  const double az = std::abs(z);
  if (!(az < 1.0)) {
    throw ParamOutOfRange("dynkin_ratio: z must lie in the open disc");
  }
  if (!(tol > 0.0)) throw ParamOutOfRange("dynkin_ratio: tol must be positive");
  const double lhs = std::abs(map_.log_deriv(z));
  if (lhs == 0.0) return 0.0;

  const double k = k_override ? *k_override : k_est_;
  if (!(k >= 0.0)) throw ParamOutOfRange("dynkin_ratio: k must be >= 0");
  if (k >= 1.0) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "dynkin_ratio: layered integral needs k < 1, got %.6g", k);
    throw KTooLarge(buf);
  }

  const double d = 1.0 - az;
  const double cut = R_ + 1.0;  // beyond this the ball covers the collar
  // Magnitude of the layer integral if omega were k throughout, for the
  // absolute tolerance handed to the outer quadrature.
  const double layers =
      (std::pow(d, k - 1.0) - std::pow(cut, k - 1.0)) / (1.0 - k);
  const double scale = std::max(k_est_, 1e-6) * layers;
  const double integral = integrate_line(
      [&](double t) { return omega(z, t, tol) * std::pow(t, k - 2.0); }, d,
      cut, tol * scale, 24);
  const double tail =
      std::sqrt(mass_ / kPi) * std::pow(cut, k - 2.0) / (2.0 - k);
  const double rhs = std::pow(d, -k) * (integral + tail);
  return lhs / rhs;
}

LadderReport exterior_condition_t1(const ExtensionField& field, double p,
                                   int levels, double tol) {
  if (p < 0.0) throw ParamOutOfRange("exterior_condition_t1: p must be >= 0");
  WeightedIntegrand f{
      [&field](Complex z) { return std::norm(field.dilatation_raw(z)); },
      WeightTag::ExteriorDirichletLogP, p};
  return ladder(f, Exhaustion::ExteriorAnnuli, levels, tol,
                field.outer_radius());
}

LadderReport exterior_condition_t2(const ExtensionField& field, double p,
                                   int levels, double tol) {
  if (!(p > 0.0) || p > 1.0) {
    throw ParamOutOfRange("exterior_condition_t2: need 0 < p <= 1");
  }
  if (levels < 1 || levels > 20) {
    throw DepthExceeded("exterior_condition_t2: levels must be in 1..20");
  }
  WeightedIntegrand f{
      [&field](Complex z) { return std::norm(field.dilatation_raw(z)); },
      WeightTag::ExteriorCarlesonP, p};
  LadderReport rep;
  rep.entries.reserve(size_t(levels));
  for (int n = 1; n <= levels; ++n) {
    const int64_t count = int64_t(1) << n;
    const size_t slots = size_t(count);
    std::vector<double> vals(slots), errs(slots);
    parallel_guarded(count, [&](int64_t i) {
      const DyadicArc arc = make_arc(n, i);
      const IntegralResult r = integrate_box(f, box(arc, BoxSide::Exterior),
                                             tol, field.outer_radius());
      const double norm = std::pow(arc.length(), p);
      vals[size_t(i)] = r.value / norm;
      errs[size_t(i)] = r.err / norm;
    });
    LadderEntry e{n, 0.0, 0.0, 0.0};
    for (int64_t i = 0; i < count; ++i) {
      if (vals[size_t(i)] > e.value) {
        e.value = vals[size_t(i)];
        e.err = errs[size_t(i)];
      }
    }
    rep.entries.push_back(e);
  }
  classify_vanishing_profile(rep);
  return rep;
}

}  // namespace curvespace
