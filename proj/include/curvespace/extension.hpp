#pragma once
// Reflection extension of a disc map across the unit circle and the
// quasiconformal statistics of its Beltrami coefficient mu: sampled sup
// norm, exterior Dirichlet/Carleson conditions, circle-averaged local
// dilatation omega, and the weighted singular-integral ratio comparing
// |f''/f'| against the layered omega integral.

#include <optional>

#include "curvespace/maps.hpp"
#include "curvespace/quadrature.hpp"

namespace curvespace {

class ExtensionField {
 public:
  // Builds the field and eagerly samples k_estimate (quasi-random batches
  // over the collar 1 < |z| <= outer_radius until the running sup moves
  // under 2%) and the total squared-mu mass of the collar.
  explicit ExtensionField(AnalyticMap map, double outer_radius = 1.5);

  const AnalyticMap& map() const { return map_; }
  double outer_radius() const { return R_; }
  double k_estimate() const { return k_est_; }
  double total_mass() const { return mass_; }

  // f(1/conj(z)) + f'(1/conj(z)) (z - 1/conj(z)) for |z| > 1.
  Complex extend(Complex z) const;

  // dbar/d quotient of extend: -(1/conj(z)^2)(z - 1/conj(z)) f''/f'(1/conj(z)).
  // dilatation() applies the collar cutoff (0 beyond outer_radius);
  // dilatation_raw() is the bare formula on all of |z| > 1.
  Complex dilatation(Complex z) const;
  Complex dilatation_raw(Complex z) const;

  // | |mu(z)| - (|z|+1)/|z|^2 * eta(1/conj(z)) |, an exact identity of the
  // raw formula; used as a cross-module consistency residual.
  double eta_identity_residual(Complex z) const;

  // Circle-averaged dilatation omega(z,t) = sqrt( (1/pi t^2) *
  // integral of |mu|^2 over B(z,t) ).  Exact once B(z,t) swallows the
  // collar; tol is relative.
  double omega(Complex z, double t, double tol = 1e-4) const;

  // |f''/f'(z)| divided by (1-|z|)^-k integral_(1-|z|)^(R+1) omega(z,t)
  // t^(k-2) dt plus the exact tail beyond R+1.  z in the disc; k defaults
  // to k_estimate, overridable; throws KTooLarge when the used k >= 1.
  // Returns 0 when f''/f'(z) = 0 (identity map convention).
  double dynkin_ratio(Complex z, double tol = 1e-4,
                      std::optional<double> k_override = std::nullopt) const;

 private:
  AnalyticMap map_;
  double R_;
  double k_est_ = 0.0;
  double mass_ = 0.0;
};

// Exterior ladder of |mu|^2 (log |z|/(|z|-1))^p / (|z|^2-1)^2 dA over
// mirror shells clipped at the collar radius.
LadderReport exterior_condition_t1(const ExtensionField& field, double p,
                                   int levels, double tol);

// Per-level maxima over exterior boxes of
// (1/|I|^p) integral |mu|^2 / (|z|-1)^(2-p) dA, classified like the
// interior vanishing profile.
LadderReport exterior_condition_t2(const ExtensionField& field, double p,
                                   int levels, double tol);

}  // namespace curvespace
