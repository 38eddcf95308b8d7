#include "curvespace/maps.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace curvespace {

namespace {

// z^n by repeated squaring; n >= 0.
Complex ipow(Complex z, int n) {
  Complex r{1.0, 0.0};
  while (n > 0) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

std::string fmt_name(const std::string& head, std::initializer_list<std::pair<const char*, double>> ps) {
  std::ostringstream os;
  os << head;
  if (ps.size() > 0) {
    os << "(";
    bool first = true;
    for (const auto& [k, v] : ps) {
      if (!first) os << ",";
      first = false;
      os << k << "=" << v;
    }
    os << ")";
  }
  return os.str();
}

// log(e / (1-z)) = 1 - log(1-z); real part >= 1 - log 2 > 0 on the disc.
Complex log_e_over(Complex one_minus_z) {
  return Complex{1.0, 0.0} - std::log(one_minus_z);
}

struct LacunaryEval {
  Complex g;       // log f'
  Complex gprime;  // (log f')'
};

// Partial sums of the gap series; terms die double-exponentially once
// 2^k (1-|z|) >> 1, so 60 terms exceed double range for any |z| < 1.
LacunaryEval lacunary_eval(Complex z, double amp, double decay) {
  LacunaryEval out{{0.0, 0.0}, {0.0, 0.0}};
  Complex zpow = z;  // z^(2^k)
  double scale = 1.0;
  double pow2 = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double coeff = amp * scale;
    out.g += coeff * zpow;
    // derivative term: coeff * 2^k * z^(2^k - 1)
    if (std::abs(z) > 0.0) out.gprime += coeff * pow2 * zpow / z;
    const double mag = std::abs(zpow);
    if (coeff * pow2 * mag < 1e-18 && mag < 0.5) break;
    zpow *= zpow;
    pow2 *= 2.0;
    scale *= std::pow(2.0, -decay);
  }
  return out;
}

}  // namespace

AnalyticMap AnalyticMap::identity() {
  AnalyticMap m;
  m.kind_ = MapKind::Identity;
  m.radius_guard_ = 1.0 - 1e-12;
  m.name_ = "identity";
  return m;
}

AnalyticMap AnalyticMap::moebius(Complex a) {
  if (std::abs(a) >= 1.0) throw ParamOutOfRange("moebius: |a| must be < 1");
  AnalyticMap m;
  m.kind_ = MapKind::Moebius;
  m.a_ = a;
  m.radius_guard_ = 1.0 - 1e-12;
  m.name_ = a.imag() == 0.0 ? fmt_name("moebius", {{"a", a.real()}})
                            : fmt_name("moebius", {{"a_re", a.real()}, {"a_im", a.imag()}});
  return m;
}

AnalyticMap AnalyticMap::power_perturbation(double eps, int n) {
  if (n < 2 || n > 64) throw ParamOutOfRange("power_perturbation: n must be in [2, 64]");
  if (eps < 0.0 || eps >= 1.0) throw ParamOutOfRange("power_perturbation: eps must be in [0, 1)");
  AnalyticMap m;
  m.kind_ = MapKind::PowerPerturbation;
  m.eps_ = eps;
  m.n_ = n;
  m.radius_guard_ = 1.0 - 1e-12;
  m.name_ = fmt_name("power_perturbation", {{"eps", eps}, {"n", double(n)}});
  return m;
}

AnalyticMap AnalyticMap::log_singular(double beta) {
  if (beta < 0.0 || !(beta < 64.0)) throw ParamOutOfRange("log_singular: beta must be in [0, 64)");
  AnalyticMap m;
  m.kind_ = MapKind::LogSingular;
  m.beta_ = beta;
  m.radius_guard_ = 1.0 - 1e-12;
  m.name_ = fmt_name("log_singular", {{"beta", beta}});
  return m;
}

AnalyticMap AnalyticMap::lacunary(double amp, double decay) {
  if (amp < 0.0 || amp > 0.6) throw ParamOutOfRange("lacunary: amp must be in [0, 0.6]");
  if (decay < 0.0 || decay > 8.0) throw ParamOutOfRange("lacunary: decay must be in [0, 8]");
  AnalyticMap m;
  m.kind_ = MapKind::Lacunary;
  m.amp_ = amp;
  m.decay_ = decay;
  m.radius_guard_ = 1.0 - 1e-12;
  m.name_ = fmt_name("lacunary", {{"amp", amp}, {"decay", decay}});
  return m;
}

AnalyticMap AnalyticMap::series(std::vector<Complex> coeffs, double radius_guard) {
  if (coeffs.size() < 2) throw ParamOutOfRange("series: need at least coefficients c0, c1");
  if (!(radius_guard > 0.0) || !(radius_guard < 1.0))
    throw ParamOutOfRange("series: radius_guard must be in (0, 1)");
  AnalyticMap m;
  m.kind_ = MapKind::Series;
  m.coeffs_ = std::move(coeffs);
  m.dcoeffs_.resize(m.coeffs_.size() > 1 ? m.coeffs_.size() - 1 : 0);
  for (size_t j = 0; j + 1 < m.coeffs_.size(); ++j)
    m.dcoeffs_[j] = double(j + 1) * m.coeffs_[j + 1];
  m.ddcoeffs_.resize(m.dcoeffs_.size() > 1 ? m.dcoeffs_.size() - 1 : 0);
  for (size_t j = 0; j + 1 < m.dcoeffs_.size(); ++j)
    m.ddcoeffs_[j] = double(j + 1) * m.dcoeffs_[j + 1];
  m.radius_guard_ = radius_guard;
  m.name_ = fmt_name("series", {{"terms", double(m.coeffs_.size())}});
  return m;
}

void AnalyticMap::check_domain(Complex z) const {
  const double r = std::abs(z);
  if (kind_ == MapKind::Series) {
    if (r > radius_guard_)
      throw GuardExceeded("series evaluation outside radius_guard=" + format_double(radius_guard_));
  } else if (r >= 1.0) {
    throw GuardExceeded("map evaluation requires |z| < 1, got |z|=" + format_double(r));
  }
}

namespace {

Complex fp_log_singular(Complex z, double beta) {
  const Complex u = log_e_over(Complex{1.0, 0.0} - z);
  if (beta == 1.0) return std::exp(std::log(u));
  return std::exp((std::pow(u, 1.0 - beta) - 1.0) / (1.0 - beta));
}

Complex fp_lacunary(Complex z, double amp, double decay) {
  return std::exp(lacunary_eval(z, amp, decay).g);
}

}  // namespace

Complex AnalyticMap::path_integral_f(Complex z) const {
  // f(z) = z * Integral_0^1 f'(t z) dt; the integrand is analytic on the
  // segment, with all growth concentrated at t -> 1.
  auto fp = [this](Complex w) {
    return kind_ == MapKind::LogSingular ? fp_log_singular(w, beta_)
                                         : fp_lacunary(w, amp_, decay_);
  };
  struct Panel { double a, b; int depth; };
  std::vector<Panel> stack{{0.0, 1.0, 0}};
  CompensatedSum tre, tim;
  const GaussRule r7 = gauss7(), r15 = gauss15();
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b), half = 0.5 * (p.b - p.a);
    Complex s7{0, 0}, s15{0, 0};
    for (int i = 0; i < 15; ++i) s15 += r15.weights[i] * fp((mid + half * r15.nodes[i]) * z);
    for (int i = 0; i < 7; ++i) s7 += r7.weights[i] * fp((mid + half * r7.nodes[i]) * z);
    s7 *= half;
    s15 *= half;
    if (std::abs(s15 - s7) <= 1e-14 * std::max(1.0, std::abs(s15)) || p.depth >= 40) {
      tre.add(s15.real());
      tim.add(s15.imag());
    } else {
      stack.push_back({mid, p.b, p.depth + 1});
      stack.push_back({p.a, mid, p.depth + 1});
    }
  }
  return Complex{tre.value(), tim.value()} * z;
}

MapJet AnalyticMap::jet(Complex z) const {
  check_domain(z);
  MapJet out;
  switch (kind_) {
    case MapKind::Identity:
      out = {z, {1.0, 0.0}, {0.0, 0.0}};
      break;
    case MapKind::Moebius: {
      const Complex d = Complex{1.0, 0.0} - a_ * z;
      const Complex d2 = d * d;
      out = {z / d, Complex{1.0, 0.0} / d2, 2.0 * a_ / (d2 * d)};
      break;
    }
    case MapKind::PowerPerturbation: {
      const Complex zn2 = ipow(z, n_ - 2);
      const Complex zn1 = zn2 * z;
      const Complex zn = zn1 * z;
      out = {z + (eps_ / n_) * zn, Complex{1.0, 0.0} + eps_ * zn1, eps_ * double(n_ - 1) * zn2};
      break;
    }
    case MapKind::LogSingular: {
      const Complex w = Complex{1.0, 0.0} - z;
      const Complex u = log_e_over(w);
      Complex g;
      if (beta_ == 1.0)
        g = std::log(u);
      else
        g = (std::pow(u, 1.0 - beta_) - 1.0) / (1.0 - beta_);
      const Complex fp = std::exp(g);
      const Complex gp = 1.0 / (w * std::pow(u, beta_));
      out.fp = fp;
      out.fpp = gp * fp;
      out.f = beta_ == 0.0 ? -std::log(w) : path_integral_f(z);
      break;
    }
    case MapKind::Lacunary: {
      const LacunaryEval le = lacunary_eval(z, amp_, decay_);
      const Complex fp = std::exp(le.g);
      out.fp = fp;
      out.fpp = le.gprime * fp;
      out.f = path_integral_f(z);
      break;
    }
    case MapKind::Series: {
      Complex f{0, 0}, fp{0, 0}, fpp{0, 0};
      for (size_t j = coeffs_.size(); j-- > 0;) f = f * z + coeffs_[j];
      for (size_t j = dcoeffs_.size(); j-- > 0;) fp = fp * z + dcoeffs_[j];
      for (size_t j = ddcoeffs_.size(); j-- > 0;) fpp = fpp * z + ddcoeffs_[j];
      out = {f, fp, fpp};
      const double r = std::abs(z);
      out.trunc_error = std::abs(coeffs_.back()) * std::pow(r, double(coeffs_.size() - 1)) /
                        std::max(1.0 - r, 1e-30);
      break;
    }
  }
  if (!finite(out.f) || !finite(out.fp) || !finite(out.fpp))
    throw NonFinite("jet overflow at z=" + format_double(z.real()) + "+" +
                    format_double(z.imag()) + "i for " + name_);
  return out;
}

Complex AnalyticMap::log_deriv(Complex z) const {
  check_domain(z);
  switch (kind_) {
    case MapKind::Identity:
      return {0.0, 0.0};
    case MapKind::Moebius:
      return 2.0 * a_ / (Complex{1.0, 0.0} - a_ * z);
    case MapKind::PowerPerturbation: {
      const Complex zn2 = ipow(z, n_ - 2);
      return eps_ * double(n_ - 1) * zn2 / (Complex{1.0, 0.0} + eps_ * zn2 * z);
    }
    case MapKind::LogSingular: {
      const Complex w = Complex{1.0, 0.0} - z;
      return 1.0 / (w * std::pow(log_e_over(w), beta_));
    }
    case MapKind::Lacunary:
      return lacunary_eval(z, amp_, decay_).gprime;
    case MapKind::Series: {
      const MapJet j = jet(z);
      if (std::abs(j.fp) < 1e-300)
        throw DerivativeVanished("f' vanishes at z=" + format_double(z.real()) + "+" +
                                 format_double(z.imag()) + "i");
      return j.fpp / j.fp;
    }
  }
  return {0.0, 0.0};
}

Complex AnalyticMap::log_fp(Complex z) const {
  check_domain(z);
  switch (kind_) {
    case MapKind::Identity:
      return {0.0, 0.0};
    case MapKind::Moebius:
      return -2.0 * std::log(Complex{1.0, 0.0} - a_ * z);
    case MapKind::PowerPerturbation:
      return std::log(Complex{1.0, 0.0} + eps_ * ipow(z, n_ - 1));
    case MapKind::LogSingular: {
      const Complex u = log_e_over(Complex{1.0, 0.0} - z);
      if (beta_ == 1.0) return std::log(u);
      return (std::pow(u, 1.0 - beta_) - 1.0) / (1.0 - beta_);
    }
    case MapKind::Lacunary:
      return lacunary_eval(z, amp_, decay_).g;
    case MapKind::Series: {
      const MapJet j = jet(z);
      if (std::abs(j.fp) < 1e-300)
        throw DerivativeVanished("f' vanishes");
      return std::log(j.fp);  // principal branch; fine away from zeros of f'
    }
  }
  return {0.0, 0.0};
}

Complex AnalyticMap::value(Complex z) const { return jet(z).f; }

std::optional<MembershipLabel> AnalyticMap::declared_membership(Space space, double p) const {
  switch (kind_) {
    case MapKind::Identity:
    case MapKind::Moebius:
    case MapKind::PowerPerturbation:
      return MembershipLabel{space, p, true, "log f' analytic on the closed disc"};
    case MapKind::LogSingular:
      if (space == Space::DLogP)
        return MembershipLabel{space, p, 2.0 * beta_ - p > 1.0,
                               "radial integral converges iff 2*beta - p > 1"};
      return MembershipLabel{space, p, beta_ > 0.0,
                             "box ratio at the singular arc scales like log(1/|I|)^(-2*beta)"};
    case MapKind::Lacunary:
      if (space == Space::DLogP)
        return MembershipLabel{space, p, 2.0 * decay_ > 1.0,
                               "gap-series energy sum 2^(k(1-2*decay)) k^p"};
      return MembershipLabel{space, p, decay_ > 0.0 && 2.0 * decay_ + p > 1.0,
                             "gap-series box ratios scale like 2^(-level*(2*decay+p-1))"};
    case MapKind::Series:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<MembershipLabel> AnalyticMap::membership_labels() const {
  std::vector<MembershipLabel> out;
  for (double p : {0.0, 1.0, 3.0})
    if (auto l = declared_membership(Space::DLogP, p)) out.push_back(*l);
  for (double p : {0.25, 0.5, 1.0})
    if (auto l = declared_membership(Space::Qp0, p)) out.push_back(*l);
  return out;
}

std::map<std::string, double> AnalyticMap::params() const {
  switch (kind_) {
    case MapKind::Identity:
      return {};
    case MapKind::Moebius:
      return {{"a", a_.real()}, {"a_im", a_.imag()}};
    case MapKind::PowerPerturbation:
      return {{"eps", eps_}, {"n", double(n_)}};
    case MapKind::LogSingular:
      return {{"beta", beta_}};
    case MapKind::Lacunary:
      return {{"amp", amp_}, {"decay", decay_}};
    case MapKind::Series:
      return {{"terms", double(coeffs_.size())}, {"guard", radius_guard_}};
  }
  return {};
}

UnivalenceVerdict univalence_probe(const AnalyticMap& map, int samples, uint64_t seed) {
  if (samples < 2) throw ParamOutOfRange("univalence_probe: samples must be >= 2");
  const double rmax = std::min(0.95, map.radius_guard());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Complex> zs(samples), fs(samples);
  for (int i = 0; i < samples; ++i) {
    const double r = rmax * std::sqrt(uni(rng));
    const double t = kTwoPi * uni(rng);
    zs[i] = Complex{r * std::cos(t), r * std::sin(t)};
    fs[i] = map.value(zs[i]);
  }

  // Rank pairs by |f(z)-f(w)| / |z-w|; a univalent map keeps this bounded
  // away from 0, a collision drives it to 0 somewhere.
  struct Cand { double score; int i, j; };
  std::vector<Cand> best;
  for (int i = 0; i < samples; ++i) {
    for (int j = i + 1; j < samples; ++j) {
      const double dz = std::abs(zs[i] - zs[j]);
      if (dz < 1e-6) continue;
      const double score = std::abs(fs[i] - fs[j]) / dz;
      if (best.size() < 8) {
        best.push_back({score, i, j});
        std::sort(best.begin(), best.end(), [](const Cand& a, const Cand& b) { return a.score < b.score; });
      } else if (score < best.back().score) {
        best.back() = {score, i, j};
        std::sort(best.begin(), best.end(), [](const Cand& a, const Cand& b) { return a.score < b.score; });
      }
    }
  }

  for (const Cand& c : best) {
    Complex z = zs[c.i], w = zs[c.j];
    for (int it = 0; it < 80; ++it) {
      MapJet jz, jw;
      try {
        jz = map.jet(z);
        jw = map.jet(w);
      } catch (const Error&) {
        break;
      }
      const Complex d = jz.f - jw.f;
      if (std::abs(d) < 1e-13 && std::abs(z - w) > 1e-6)
        return {false, z, w, std::abs(d)};
      const double denom = std::norm(jz.fp) + std::norm(jw.fp);
      if (denom < 1e-300) break;
      Complex nz = z - d * std::conj(jz.fp) / denom;
      Complex nw = w + d * std::conj(jw.fp) / denom;
      auto clamp_disc = [&](Complex v) {
        const double r = std::abs(v);
        return r > rmax ? v * (rmax / r) : v;
      };
      nz = clamp_disc(nz);
      nw = clamp_disc(nw);
      if (std::abs(nz - z) < 1e-16 && std::abs(nw - w) < 1e-16) break;
      z = nz;
      w = nw;
    }
  }
  return {true, {0, 0}, {0, 0}, 0.0};
}

AnalyticMap registry_get(const std::string& name, const std::map<std::string, double>& params) {
  auto known = [&params](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* key : keys)
        if (k == key) ok = true;
      if (!ok) throw ParamOutOfRange("unknown parameter '" + k + "'");
    }
  };
  auto get = [&params](const char* k, double dflt) {
    auto it = params.find(k);
    return it == params.end() ? dflt : it->second;
  };
  if (name == "identity") {
    known({});
    return AnalyticMap::identity();
  }
  if (name == "moebius") {
    known({"a", "a_im"});
    return AnalyticMap::moebius({get("a", 0.5), get("a_im", 0.0)});
  }
  if (name == "power_perturbation") {
    known({"eps", "n"});
    const double n = get("n", 3.0);
    if (n != std::floor(n)) throw ParamOutOfRange("power_perturbation: n must be an integer");
    return AnalyticMap::power_perturbation(get("eps", 0.4), int(n));
  }
  if (name == "log_singular") {
    known({"beta"});
    return AnalyticMap::log_singular(get("beta", 0.0));
  }
  if (name == "lacunary") {
    known({"amp", "decay"});
    return AnalyticMap::lacunary(get("amp", 0.2), get("decay", 0.0));
  }
  if (name == "series")
    throw ParamOutOfRange("series maps require a coefficient file (--coeffs)");
  throw UnknownFamily("unknown map family '" + name + "'");
}

std::vector<std::string> registry_names() {
  return {"identity", "moebius", "power_perturbation", "log_singular", "lacunary", "series"};
}

}  // namespace curvespace
