#pragma once
// Conformal-map families on the unit disc with exact jets (f, f', f'').
//
// Every family normalizes f'(0) != 0.  The registry spans the membership
// spectrum used by the verification harness:
//   identity             trivial baseline, every analytic diagnostic is 0
//   moebius(a)           log f' analytic across the closed disc
//   power_perturbation   polynomial, analytic across the closed disc
//   log_singular(beta)   one boundary singularity; (log f')' =
//                        1 / ((1-z) * log(e/(1-z))^beta)
//   lacunary(amp,decay)  log f' = sum amp*2^(-decay*k) * z^(2^k)
//   series               user-supplied Taylor coefficients of f
//
// f'' / f' and log f' are closed-form for all kinds.  f itself is closed-form
// except for log_singular(beta>0) and lacunary, where it is recovered by
// adaptive Gauss-Legendre integration of f' along [0, z] (abs tol 1e-13).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curvespace/common.hpp"

namespace curvespace {

enum class MapKind { Identity, Moebius, PowerPerturbation, LogSingular, Lacunary, Series };

enum class Space { DLogP, Qp0 };

struct MembershipLabel {
  Space space;
  double p;
  bool member;
  std::string oracle;  // one-line justification of the declared label
};

struct MapJet {
  Complex f;
  Complex fp;
  Complex fpp;
  double trunc_error = 0.0;  // series kind only: |c_N| |z|^N / (1 - |z|)
};

class AnalyticMap {
 public:
  static AnalyticMap identity();
  static AnalyticMap moebius(Complex a);
  static AnalyticMap power_perturbation(double eps, int n);
  static AnalyticMap log_singular(double beta);
  static AnalyticMap lacunary(double amp, double decay);
  static AnalyticMap series(std::vector<Complex> coeffs, double radius_guard = 0.99);

  MapKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double radius_guard() const { return radius_guard_; }

  // Full jet at z.  Throws GuardExceeded outside the trusted radius and
  // NonFinite on overflow.
  MapJet jet(Complex z) const;

  // f''/f' (= (log f')').  Throws DerivativeVanished if |f'| < 1e-300.
  Complex log_deriv(Complex z) const;

  // log f', normalized to 0 at z = 0.
  Complex log_fp(Complex z) const;

  // f alone (same value as jet().f).
  Complex value(Complex z) const;

  // Declared membership of log f' in the given space; nullopt when the family
  // carries no analytic label (user series).
  std::optional<MembershipLabel> declared_membership(Space space, double p) const;

  // Convenience: labels at the harness's canonical exponents.
  std::vector<MembershipLabel> membership_labels() const;

  // Family parameters, exposed for reports.
  std::map<std::string, double> params() const;

 private:
  AnalyticMap() = default;

  MapKind kind_ = MapKind::Identity;
  Complex a_{0.0, 0.0};          // moebius
  double eps_ = 0.0;             // power perturbation
  int n_ = 0;                    // power perturbation
  double beta_ = 0.0;            // log singular
  double amp_ = 0.0;             // lacunary
  double decay_ = 0.0;           // lacunary
  std::vector<Complex> coeffs_;  // series: f
  std::vector<Complex> dcoeffs_;
  std::vector<Complex> ddcoeffs_;
  double radius_guard_ = 0.0;
  std::string name_;

  void check_domain(Complex z) const;
  Complex path_integral_f(Complex z) const;
};

struct UnivalenceVerdict {
  bool pass;        // true: no collision found
  Complex z, w;     // witness pair when pass == false
  double fdist = 0.0;  // |f(z) - f(w)| at the witness
};

// Searches for a collision f(z) = f(w), z != w, by scanning seeded random
// pairs and polishing the most suspicious ones with Gauss-Newton steps.
// A witness requires |f(z)-f(w)| < 1e-12 with |z-w| > 1e-6.
UnivalenceVerdict univalence_probe(const AnalyticMap& map, int samples, uint64_t seed);

// Builds a registry family from CLI-style parameters.  Throws UnknownFamily
// or ParamOutOfRange.  "series" must be built via AnalyticMap::series.
AnalyticMap registry_get(const std::string& name, const std::map<std::string, double>& params);

// Names of the built-in families, in registry order.
std::vector<std::string> registry_names();

}  // namespace curvespace
