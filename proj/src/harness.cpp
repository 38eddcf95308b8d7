#include "curvespace/harness.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>

#include "curvespace/curve.hpp"
#include "curvespace/extension.hpp"
#include "curvespace/spaces.hpp"

namespace curvespace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;
constexpr double kNarrowCollar = 1.1;   // fallback when the default collar
                                        // pushes the dilatation past the clamp
constexpr int kWindowHalvings = 4;      // nested windows for shrink checks
constexpr int kWindowDepth = 6;         // relative depth inside each window
constexpr int kWindowRootLevel = 3;     // coarsest window level
constexpr int kLimitLevels = 7;         // points on the z -> z_I ladder
constexpr double kOmegaTol = 1e-3;      // tolerance for pointwise ratio sweeps

bool eval_op(const std::string& op, double value, double threshold) {
  if (op == "<=") return value <= threshold;
  if (op == ">=") return value >= threshold;
  if (op == "<") return value < threshold;
  if (op == ">") return value > threshold;
  if (op == "==") return value == threshold;
  throw UsageError("unknown criterion operator: " + op);
}

CheckCriterion crit(std::string metric, std::string op, double threshold,
                    double value) {
  CheckCriterion c;
  c.metric = std::move(metric);
  c.op = std::move(op);
  c.threshold = threshold;
  c.value = value;
  c.pass = eval_op(c.op, c.value, c.threshold);
  return c;
}

// Derive pass/fail from the criteria unless the status was forced.
void settle(CheckRecord& rec) {
  if (!rec.status.empty()) return;
  bool all = true;
  for (const CheckCriterion& c : rec.criteria) all = all && c.pass;
  rec.status = all ? "pass" : "fail";
}

template <typename Fn>
CheckRecord guarded_check(const std::string& name, Fn&& body) {
  CheckRecord rec;
  rec.name = name;
  try {
    body(rec);
    settle(rec);
  } catch (const Error& e) {
    rec.status = "error";
    rec.detail = e.what();
  }
  return rec;
}

CheckRecord not_checked(const std::string& name) {
  CheckRecord rec;
  rec.name = name;
  rec.status = "not-checked";
  rec.detail = "not checked — existential hypothesis";
  return rec;
}

// Memoizes a computation shared by several checks of one suite; a failure is
// replayed into every check that asks for the value.
template <typename T>
class Lazy {
 public:
  template <typename Fn>
  const T& get(Fn&& fn) {
    if (err_) std::rethrow_exception(err_);
    if (!val_) {
      try {
        val_.emplace(fn());
      } catch (...) {
        err_ = std::current_exception();
        std::rethrow_exception(err_);
      }
    }
    return *val_;
  }

 private:
  std::optional<T> val_;
  std::exception_ptr err_;
};

std::string fmt(double v) { return format_double(v); }

std::string ladder_detail(const LadderReport& r) {
  std::ostringstream os;
  os << "verdict=" << r.verdict << " cumulative=" << fmt(r.cumulative)
     << " limit_or_slope=" << fmt(r.limit_or_slope)
     << " tail_ratio=" << fmt(r.tail_ratio);
  return os.str();
}

double guarded_ratio(double num, double den) {
  if (den <= kTiny) return num <= kTiny ? 0.0 : kInf;
  return num / den;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Shared state for one run_suite call (possibly spanning all suites).
struct SuiteCtx {
  const AnalyticMap& map;
  const SuiteConfig& cfg;
  const Thresholds& th;
  Lazy<ExtensionField> field;

  const ExtensionField& get_field() {
    return field.get(
        [&] { return ExtensionField(map, cfg.outer_radius); });
  }
};

// ------------------------------------------------------------- theorem1 ---
// Weighted Dirichlet energy inside the disc against the reflected exterior
// energy: members must make both ladders converge at comparable limits,
// non-members must make both diverge.

std::vector<CheckRecord> suite_theorem1(SuiteCtx& ctx) {
  const SuiteConfig& cfg = ctx.cfg;
  const Thresholds& th = ctx.th;
  const auto label = ctx.map.declared_membership(Space::DLogP, cfg.p_dlog);

  auto interior = std::make_shared<Lazy<LadderReport>>();
  auto exterior = std::make_shared<Lazy<LadderReport>>();
  auto get_interior = [&ctx, &cfg, interior]() -> const LadderReport& {
    return interior->get(
        [&] { return dlogp_energy(ctx.map, cfg.p_dlog, cfg.depth, cfg.tol); });
  };
  auto get_exterior = [&ctx, &cfg, exterior]() -> const LadderReport& {
    return exterior->get([&] {
      return exterior_condition_t1(ctx.get_field(), cfg.p_dlog, cfg.depth,
                                   cfg.tol);
    });
  };

  auto ladder_check = [&](CheckRecord& rec, const LadderReport& r) {
    rec.series = r.entries;
    rec.detail = ladder_detail(r);
    if (!label) {
      rec.status = "inconclusive";
      rec.detail += "; family carries no declared membership label";
      return;
    }
    const bool conv = r.verdict == "converged";
    if (label->member) {
      rec.criteria.push_back(
          crit("ladder-verdict-converged", "==", 1.0, conv ? 1.0 : 0.0));
    } else {
      rec.criteria.push_back(
          crit("ladder-verdict-not-converged", "==", 1.0, conv ? 0.0 : 1.0));
      if (conv) {
        rec.status = "inconclusive";
        rec.detail += "; declared non-member but the ladder converged";
      }
    }
  };

  std::vector<CheckRecord> out;
  out.push_back(guarded_check("1-interior-energy", [&](CheckRecord& rec) {
    ladder_check(rec, get_interior());
  }));
  out.push_back(guarded_check("2-exterior-dirichlet", [&](CheckRecord& rec) {
    ladder_check(rec, get_exterior());
  }));
  out.push_back(
      guarded_check("3-interior-exterior-comparability", [&](CheckRecord& rec) {
        const LadderReport& ri = get_interior();
        const LadderReport& re = get_exterior();
        std::ostringstream os;
        os << "interior=" << ri.verdict << "/" << fmt(ri.limit_or_slope)
           << " exterior=" << re.verdict << "/" << fmt(re.limit_or_slope);
        rec.detail = os.str();
        const bool ci = ri.verdict == "converged";
        const bool ce = re.verdict == "converged";
        if (ci && ce) {
          double ratio;
          if (ri.limit_or_slope <= kTiny && re.limit_or_slope <= kTiny)
            ratio = 1.0;  // both energies identically zero
          else
            ratio = guarded_ratio(re.limit_or_slope, ri.limit_or_slope);
          rec.criteria.push_back(crit("exterior-over-interior", "<=",
                                      th.comparability_factor, ratio));
          rec.criteria.push_back(crit("exterior-over-interior", ">=",
                                      1.0 / th.comparability_factor, ratio));
        } else if (ri.verdict == "diverging-with-slope" &&
                   re.verdict == "diverging-with-slope") {
          rec.criteria.push_back(crit("both-ladders-diverge", "==", 1.0, 1.0));
        } else {
          rec.status = "inconclusive";
          rec.detail += "; comparability needs both ladders decided the same way";
        }
      }));
  out.push_back(not_checked("4-converse"));
  return out;
}

// ------------------------------------------------------------- theorem2 ---
// Vanishing box-ratio profile inside the disc against the exterior Carleson
// profile of the reflected field: the two verdicts must match the declared
// label and each other.

std::vector<CheckRecord> suite_theorem2(SuiteCtx& ctx) {
  const SuiteConfig& cfg = ctx.cfg;
  const Thresholds& th = ctx.th;
  const auto label = ctx.map.declared_membership(Space::Qp0, cfg.p_qp);

  auto interior = std::make_shared<Lazy<LadderReport>>();
  auto exterior = std::make_shared<Lazy<LadderReport>>();
  auto get_interior = [&ctx, &cfg, interior]() -> const LadderReport& {
    return interior->get([&] {
      return qp_vanishing_profile(ctx.map, cfg.p_qp, cfg.depth, cfg.tol);
    });
  };
  auto get_exterior = [&ctx, &cfg, exterior]() -> const LadderReport& {
    return exterior->get([&] {
      return exterior_condition_t2(ctx.get_field(), cfg.p_qp, cfg.depth,
                                   cfg.tol);
    });
  };

  auto profile_check = [&](CheckRecord& rec, const LadderReport& r) {
    rec.series = r.entries;
    rec.detail = ladder_detail(r);
    if (!label) {
      rec.status = "inconclusive";
      rec.detail += "; family carries no declared membership label";
      return;
    }
    const double final_max = r.entries.empty() ? 0.0 : r.entries.back().value;
    if (r.verdict == "inconclusive") {
      rec.status = "inconclusive";
      rec.detail += "; profile verdict undecided";
      return;
    }
    const std::string expected =
        label->member ? "vanishing" : "not-vanishing";
    const bool match = r.verdict == expected;
    rec.criteria.push_back(
        crit("profile-verdict-matches-label", "==", 1.0, match ? 1.0 : 0.0));
    if (label->member)
      rec.criteria.push_back(crit("final-max", "<", th.vanish_final, final_max));
    else
      rec.criteria.push_back(crit("final-max", ">=", th.vanish_final, final_max));
    if (!label->member && !match) {
      rec.status = "inconclusive";
      rec.detail += "; declared non-member but the profile vanished";
    }
  };

  std::vector<CheckRecord> out;
  out.push_back(guarded_check("1-interior-vanishing-profile",
                              [&](CheckRecord& rec) {
                                profile_check(rec, get_interior());
                              }));
  out.push_back(guarded_check("2-exterior-carleson-profile",
                              [&](CheckRecord& rec) {
                                profile_check(rec, get_exterior());
                              }));
  out.push_back(
      guarded_check("3-interior-exterior-agreement", [&](CheckRecord& rec) {
        const std::string vi = get_interior().verdict;
        const std::string ve = get_exterior().verdict;
        rec.detail = "interior=" + vi + " exterior=" + ve;
        if (vi == "inconclusive" || ve == "inconclusive") {
          rec.status = "inconclusive";
          return;
        }
        rec.criteria.push_back(
            crit("profiles-agree", "==", 1.0, vi == ve ? 1.0 : 0.0));
      }));
  out.push_back(not_checked("4-converse"));
  return out;
}

// ------------------------------------------- theorem3 / corollary1 --------
// Geometric statistics of the image curve: windowed sums must shrink with the
// window for members (flat windows separate non-members), and globally
// weighted sums must converge with geometrically decaying increments.

using CurveStatistic = LadderReport (*)(const AnalyticMap&, double,
                                        const DyadicArc&, int, int,
                                        WhitneySumMode);

// Wraps a check whose statistic needs boundary values: a map whose image
// curve cannot be reached by radial extrapolation (unbounded or untrusted
// near the boundary) makes the statistic inapplicable, not broken.
template <typename Fn>
CheckRecord boundary_check(const std::string& name, Fn&& body) {
  CheckRecord rec;
  rec.name = name;
  try {
    body(rec);
    settle(rec);
  } catch (const ExtrapolationUnstable& e) {
    rec.status = "inconclusive";
    rec.detail = std::string("boundary values not extrapolable (") + e.what() +
                 "); geometric statistic inapplicable";
  } catch (const Error& e) {
    rec.status = "error";
    rec.detail = e.what();
  }
  return rec;
}

std::vector<CheckRecord> curve_statistic_suite(SuiteCtx& ctx,
                                               CurveStatistic statistic,
                                               const std::string& quantity,
                                               bool with_converse) {
  const SuiteConfig& cfg = ctx.cfg;
  const Thresholds& th = ctx.th;
  const auto qp_label = ctx.map.declared_membership(Space::Qp0, cfg.p_qp);
  const auto dl_label = ctx.map.declared_membership(Space::DLogP, cfg.p_dlog);

  std::vector<CheckRecord> out;
  out.push_back(boundary_check(
      "1-windowed-" + quantity + "-shrink", [&](CheckRecord& rec) {
        std::vector<double> vals;
        for (int k = 0; k < kWindowHalvings; ++k) {
          const DyadicArc root = make_arc(kWindowRootLevel + k, 0);
          const LadderReport r =
              statistic(ctx.map, cfg.p_qp, root, kWindowDepth, cfg.samples,
                        WhitneySumMode::QpWindow);
          vals.push_back(r.cumulative);
          rec.series.push_back(LadderEntry{root.level, r.cumulative, 0.0,
                                           r.cumulative});
        }
        std::ostringstream os;
        os << "window statistics:";
        for (double v : vals) os << " " << fmt(v);
        rec.detail = os.str();
        if (!qp_label) {
          rec.status = "inconclusive";
          rec.detail += "; family carries no declared membership label";
          return;
        }
        double max_step = 0.0;
        for (size_t i = 0; i + 1 < vals.size(); ++i)
          max_step = std::max(max_step, guarded_ratio(vals[i + 1], vals[i]));
        const double overall = guarded_ratio(vals.back(), vals.front());
        if (qp_label->member) {
          rec.criteria.push_back(
              crit("max-halving-ratio", "<=", th.shrink_noise, max_step));
          rec.criteria.push_back(crit("overall-ratio", "<", 1.0, overall));
        } else {
          rec.criteria.push_back(crit("overall-ratio", ">=", 0.5, overall));
          if (overall < 0.5) {
            rec.status = "inconclusive";
            rec.detail += "; declared non-member but the windows shrank";
          }
        }
      }));
  out.push_back(boundary_check(
      "2-global-" + quantity + "-ladder", [&](CheckRecord& rec) {
        const LadderReport r =
            statistic(ctx.map, cfg.p_dlog, make_arc(0, 0), cfg.depth,
                      cfg.samples, WhitneySumMode::DlogpGlobal);
        rec.series = r.entries;
        rec.detail = ladder_detail(r);
        if (!dl_label) {
          rec.status = "inconclusive";
          rec.detail += "; family carries no declared membership label";
          return;
        }
        const bool conv = r.verdict == "converged";
        if (dl_label->member) {
          rec.criteria.push_back(
              crit("ladder-verdict-converged", "==", 1.0, conv ? 1.0 : 0.0));
          rec.criteria.push_back(crit("tail-increment-ratio", "<=",
                                      th.increment_decay, r.tail_ratio));
        } else {
          rec.criteria.push_back(crit("ladder-verdict-not-converged", "==",
                                      1.0, conv ? 0.0 : 1.0));
          if (conv) {
            rec.status = "inconclusive";
            rec.detail += "; declared non-member but the ladder converged";
          }
        }
      }));
  if (with_converse) out.push_back(not_checked("3-converse"));
  return out;
}

// ------------------------------------------------------------ dini --------
// Radial modulus profile sup_{|z|=r} |f''/f'| (1-r) (log 1/(1-r))^{p/2}:
// bounded with a non-increasing tail for declared members.

std::vector<CheckRecord> suite_dini(SuiteCtx& ctx) {
  const SuiteConfig& cfg = ctx.cfg;
  const auto label = ctx.map.declared_membership(Space::DLogP, cfg.p_dini);

  std::vector<CheckRecord> out;
  out.push_back(
      guarded_check("1-normalized-profile-trend", [&](CheckRecord& rec) {
        const int k_max = std::min(14, std::max(8, cfg.depth + 2));
        std::vector<double> radii;
        for (int k = 4; k <= k_max; ++k)
          radii.push_back(1.0 - std::pow(2.0, -k));
        const auto prof = dini_profile(ctx.map, cfg.p_dini, radii);
        std::vector<double> vals;
        for (size_t i = 0; i < prof.size(); ++i) {
          vals.push_back(prof[i].second);
          rec.series.push_back(LadderEntry{4 + static_cast<int>(i),
                                           prof[i].second, 0.0,
                                           prof[i].second});
        }
        std::ostringstream os;
        os << "profile values:";
        for (double v : vals) os << " " << fmt(v);
        rec.detail = os.str();
        if (!label) {
          rec.status = "inconclusive";
          rec.detail += "; family carries no declared membership label";
          return;
        }
        const size_t window = std::min<size_t>(5, vals.size());
        double max_step = 0.0;
        for (size_t i = vals.size() - window; i + 1 < vals.size(); ++i)
          max_step = std::max(max_step, guarded_ratio(vals[i + 1], vals[i]));
        double peak = 0.0;
        for (double v : vals) peak = std::max(peak, v);
        const double bound_ratio =
            vals.front() <= kTiny ? (peak <= kTiny ? 1.0 : kInf)
                                  : peak / vals.front();
        if (label->member) {
          rec.criteria.push_back(
              crit("profile-finite", "==", 1.0, all_finite(vals) ? 1.0 : 0.0));
          rec.criteria.push_back(
              crit("trailing-max-step-ratio", "<=", 1.0 + 1e-9, max_step));
          rec.criteria.push_back(
              crit("peak-over-first", "<=", 10.0, bound_ratio));
        } else {
          rec.status = "inconclusive";
          rec.detail += "; boundedness is only asserted for members";
        }
      }));
  return out;
}

// ---------------------------------------------------------- dynkin --------
// Pointwise two-sided bound: |f''/f'(z)| against the layer-cake integral of
// the reflected field's area distribution, at a dilatation bound k clamped
// below 1.  When the default collar pushes the measured bound past the clamp
// the suite retries on a narrower collar before giving up.

std::vector<CheckRecord> suite_dynkin(SuiteCtx& ctx) {
  const SuiteConfig& cfg = ctx.cfg;
  const Thresholds& th = ctx.th;

  struct Chosen {
    ExtensionField field;
    double collar;
    bool premise_ok;
  };
  auto chosen = std::make_shared<Lazy<Chosen>>();
  auto get_chosen = [&ctx, &cfg, &th, chosen]() -> const Chosen& {
    return chosen->get([&]() -> Chosen {
      ExtensionField field = ctx.get_field();
      if (field.k_estimate() <= th.k_clamp)
        return {std::move(field), cfg.outer_radius, true};
      ExtensionField narrow(ctx.map, kNarrowCollar);
      const bool ok = narrow.k_estimate() <= th.k_clamp;
      return {std::move(narrow), kNarrowCollar, ok};
    });
  };

  std::vector<CheckRecord> out;
  out.push_back(
      guarded_check("1-quasiconformality-margin", [&](CheckRecord& rec) {
        const Chosen& ch = get_chosen();
        rec.criteria.push_back(
            crit("k-estimate", "<=", th.k_clamp, ch.field.k_estimate()));
        std::ostringstream os;
        os << "collar=" << fmt(ch.collar)
           << " k=" << fmt(ch.field.k_estimate());
        if (ch.collar != cfg.outer_radius)
          os << " (narrowed from " << fmt(cfg.outer_radius) << ")";
        rec.detail = os.str();
        if (!ch.premise_ok) {
          rec.status = "inconclusive";
          rec.detail +=
              "; reflection is not quasiconformal on any tried collar";
        }
      }));
  out.push_back(
      guarded_check("2-pointwise-ratio-bound", [&](CheckRecord& rec) {
        const Chosen& ch = get_chosen();
        const double k_used = std::min(ch.field.k_estimate(), th.k_clamp);
        std::vector<double> ratios;
        for (int i = 0; i < cfg.points; ++i) {
          const auto [u, v] = halton2(static_cast<uint64_t>(i), cfg.seed);
          const double d = std::pow(2.0, -(4.0 + 6.0 * u));
          const Complex z = std::polar(1.0 - d, kTwoPi * v);
          const double r = ch.field.dynkin_ratio(z, kOmegaTol, k_used);
          ratios.push_back(r);
          rec.series.push_back(LadderEntry{i, r, 0.0, r});
        }
        double sup = 0.0;
        for (double r : ratios) sup = std::max(sup, r);
        rec.criteria.push_back(
            crit("ratios-finite", "==", 1.0, all_finite(ratios) ? 1.0 : 0.0));
        rec.criteria.push_back(
            crit("sup-ratio", "<=", th.sup_ratio_cap, sup));
        std::ostringstream os;
        os << "collar=" << fmt(ch.collar) << " k_used=" << fmt(k_used)
           << " omega_tol=" << fmt(kOmegaTol) << " sup=" << fmt(sup);
        rec.detail = os.str();
        if (!ch.premise_ok) {
          rec.status = "inconclusive";
          rec.detail += "; dilatation bound exceeds the clamp on every collar";
        }
      }));
  return out;
}

// ----------------------------------------------------------- prop1 --------
// Linearization error against the geodesic chain bound on a level-8 arc away
// from the registry families' singular direction.

std::vector<CheckRecord> suite_prop1(SuiteCtx& ctx) {
  const SuiteConfig& cfg = ctx.cfg;
  const Thresholds& th = ctx.th;
  const DyadicArc arc = make_arc(8, 128);  // theta_lo = pi

  std::vector<CheckRecord> out;
  out.push_back(guarded_check("1-eta-gate", [&](CheckRecord& rec) {
    const double eta = eta_top(ctx.map, top(arc));
    rec.criteria.push_back(crit("eta-root", "<", th.eta_gate, eta));
    rec.detail = "arc level=8 index=128";
  }));
  out.push_back(guarded_check("2-band-spread", [&](CheckRecord& rec) {
    const ChainCheckResult res =
        chain_estimate_check(ctx.map, arc, cfg.chain_samples, 0.75, cfg.seed);
    rec.criteria.push_back(crit("max-ratio-finite", "==", 1.0,
                                std::isfinite(res.max_ratio()) ? 1.0 : 0.0));
    rec.criteria.push_back(
        crit("band-spread", "<", th.stability_factor, res.spread()));
    std::ostringstream os;
    os << "alpha=" << fmt(res.alpha) << " shallow_max=" << fmt(res.shallow_max)
       << " deep_max=" << fmt(res.deep_max)
       << " eta_root=" << fmt(res.eta_root);
    rec.detail = os.str();
  }));
  out.push_back(guarded_check("3-alpha-sweep", [&](CheckRecord& rec) {
    std::ostringstream os;
    const double alphas[] = {0.6, 0.75, 0.9};
    for (int i = 0; i < 3; ++i) {
      const ChainCheckResult res = chain_estimate_check(
          ctx.map, arc, cfg.chain_samples, alphas[i], cfg.seed);
      char metric[48];
      std::snprintf(metric, sizeof metric, "max-ratio-finite-alpha-%.2f",
                    alphas[i]);
      rec.criteria.push_back(crit(metric, "==", 1.0,
                                  std::isfinite(res.max_ratio()) ? 1.0 : 0.0));
      rec.series.push_back(LadderEntry{static_cast<int>(100 * alphas[i]),
                                       res.max_ratio(), 0.0, res.max_ratio()});
      os << (i ? " " : "") << "alpha=" << fmt(alphas[i])
         << ":max=" << fmt(res.max_ratio()) << ",spread=" << fmt(res.spread());
    }
    rec.detail = os.str();
  }));
  out.push_back(guarded_check("4-limit-ladder", [&](CheckRecord& rec) {
    const std::vector<double> ratios =
        chain_limit_series(ctx.map, arc, kLimitLevels);
    for (size_t j = 0; j < ratios.size(); ++j)
      rec.series.push_back(
          LadderEntry{static_cast<int>(j), ratios[j], 0.0, ratios[j]});
    std::ostringstream os;
    os << "ratios:";
    for (double r : ratios) os << " " << fmt(r);
    rec.detail = os.str();
    rec.criteria.push_back(
        crit("ratios-finite", "==", 1.0, all_finite(ratios) ? 1.0 : 0.0));
    rec.criteria.push_back(crit("final-over-initial", "<=", th.limit_decay,
                                guarded_ratio(ratios.back(), ratios.front())));
  }));
  return out;
}

void validate_config(const SuiteConfig& cfg) {
  if (cfg.depth < 4 || cfg.depth > 20)
    throw ParamOutOfRange("suite config: depth must be in [4, 20]");
  if (!(cfg.tol >= 1e-12 && cfg.tol <= 1e-2))
    throw ParamOutOfRange("suite config: tol must be in [1e-12, 1e-2]");
  if (cfg.samples < 3)
    throw ParamOutOfRange("suite config: samples must be >= 3");
  if (cfg.points < 4)
    throw ParamOutOfRange("suite config: points must be >= 4");
  if (cfg.chain_samples < 50)
    throw ParamOutOfRange("suite config: chain_samples must be >= 50");
  if (!(cfg.p_qp > 0.0 && cfg.p_qp <= 1.0))
    throw ParamOutOfRange("suite config: p_qp must be in (0, 1]");
  if (!(cfg.p_dlog >= 0.0))
    throw ParamOutOfRange("suite config: p_dlog must be >= 0");
  if (!(cfg.p_dini > 2.0))
    throw ParamOutOfRange("suite config: p_dini must exceed 2");
  if (!(cfg.outer_radius > 1.0 && cfg.outer_radius <= 8.0))
    throw ParamOutOfRange("suite config: outer_radius must be in (1, 8]");
}

// Frame shared by the chain-estimate entry points: root-top data, the
// linearization jet, and an eta cache keyed by (level, index).
struct ChainFrame {
  const AnalyticMap& map;
  WhitneyTop root;
  Complex zi;
  MapJet ji;
  double diam_root;
  double diam_image;
  double eta_root;
  std::map<std::pair<int, int64_t>, double> cache;

  ChainFrame(const AnalyticMap& m, const DyadicArc& arc)
      : map(m), root(top(arc)) {
    eta_root = eta_top(map, root);
    if (eta_root >= 0.5)
      throw EtaGateFailed("chain estimate: eta on the root top is " +
                          format_double(eta_root) + " >= 0.5");
    zi = root.center();
    ji = map.jet(zi);
    diam_root = root.diam();
    // Image diameter of the root top from a fixed lattice; the map is smooth
    // well inside the disc, so a moderate grid suffices.
    const int g = 12;
    std::vector<Complex> pts;
    pts.reserve(static_cast<size_t>((g + 1) * (g + 1)));
    const double lo = arc.theta_lo(), len = arc.length();
    for (int i = 0; i <= g; ++i) {
      const double r = root.r_lo() + (root.r_hi() - root.r_lo()) * i / g;
      for (int j = 0; j <= g; ++j)
        pts.push_back(map.value(std::polar(r, lo + len * j / g)));
    }
    diam_image = 0.0;
    for (size_t a = 0; a < pts.size(); ++a)
      for (size_t b = a + 1; b < pts.size(); ++b)
        diam_image = std::max(diam_image, std::abs(pts[a] - pts[b]));
  }

  double eta_of(const WhitneyTop& w) {
    const auto key = std::make_pair(w.arc.level, w.arc.index);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double v = eta_top(map, w);
    cache.emplace(key, v);
    return v;
  }

  double ratio_at(Complex z, double alpha) {
    const double lhs = std::abs(map.value(z) - ji.f - ji.fp * (z - zi));
    double sum = 0.0;
    for (const WhitneyTop& w : chain(root, z))
      sum += eta_of(w) * std::pow(w.diam() / diam_root, alpha);
    const double rhs = diam_image * sum;
    if (rhs <= 0.0) return lhs <= 0.0 ? 0.0 : kInf;
    return lhs / rhs;
  }
};

}  // namespace

double ChainCheckResult::spread() const {
  const double hi = std::max(shallow_max, deep_max);
  const double lo = std::min(shallow_max, deep_max);
  if (hi <= 0.0) return 1.0;
  if (lo <= 0.0) return kInf;
  return hi / lo;
}

ChainCheckResult chain_estimate_check(const AnalyticMap& map,
                                      const DyadicArc& arc, int samples,
                                      double alpha, uint64_t seed) {
  if (samples < 50)
    throw ParamOutOfRange("chain_estimate_check: samples must be >= 50");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ParamOutOfRange("chain_estimate_check: alpha must be in (0, 1)");
  ChainFrame frame(map, arc);
  ChainCheckResult res;
  res.alpha = alpha;
  res.eta_root = frame.eta_root;
  const double lo = arc.theta_lo(), len = arc.length();
  for (int i = 0; i < samples; ++i) {
    const auto [u, v] = halton2(static_cast<uint64_t>(i), seed);
    const double theta = lo + len * v;
    // Shallow band 1-|z| in [len/4, len]; deep band [len/64, len/4).
    const double ds = 0.25 * len * std::pow(4.0, u);
    const double dd = len / 64.0 * std::pow(16.0, u);
    res.shallow_max = std::max(
        res.shallow_max, frame.ratio_at(std::polar(1.0 - ds, theta), alpha));
    res.deep_max = std::max(
        res.deep_max, frame.ratio_at(std::polar(1.0 - dd, theta), alpha));
  }
  return res;
}

std::vector<double> chain_limit_series(const AnalyticMap& map,
                                       const DyadicArc& arc, int levels) {
  if (levels < 2)
    throw ParamOutOfRange("chain_limit_series: levels must be >= 2");
  ChainFrame frame(map, arc);
  const Complex z0 =
      std::polar(1.0 - arc.length() / 8.0, arc.theta_lo() + 0.75 * arc.length());
  std::vector<double> out;
  out.reserve(static_cast<size_t>(levels));
  for (int j = 0; j < levels; ++j) {
    const Complex z = frame.zi + (z0 - frame.zi) * std::pow(0.5, j);
    out.push_back(frame.ratio_at(z, 0.75));
  }
  return out;
}

double convergence_slope(const LadderReport& report) {
  const size_t n = report.entries.size();
  if (n < 4)
    throw TooFewLevels("convergence_slope needs >= 4 ladder entries");
  const size_t start = n / 2;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(n - start);
  for (size_t i = start; i < n; ++i) {
    const double x = report.entries[i].level;
    const double y = report.entries[i].cumulative;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

bool SuiteReport::all_passed() const {
  for (const CheckRecord& c : checks)
    if (c.status == "fail" || c.status == "error") return false;
  return true;
}

const std::vector<std::string>& suite_tags() {
  static const std::vector<std::string> tags{
      "theorem1", "theorem2",    "theorem3", "corollary1",
      "dini_remark", "dynkin", "prop1"};
  return tags;
}

SuiteReport run_suite(const AnalyticMap& map, const std::string& suite,
                      const SuiteConfig& config) {
  validate_config(config);
  const auto& tags = suite_tags();
  const bool run_all = suite == "all";
  if (!run_all &&
      std::find(tags.begin(), tags.end(), suite) == tags.end())
    throw UsageError("unknown suite tag: " + suite);

  SuiteReport rep;
  rep.suite = suite;
  rep.map_name = map.name();
  rep.map_params = map.params();
  rep.config = config;
  rep.thresholds = Thresholds{};
  SuiteCtx ctx{map, config, rep.thresholds, {}};

  auto run_one = [&](const std::string& tag) {
    std::vector<CheckRecord> checks;
    if (tag == "theorem1")
      checks = suite_theorem1(ctx);
    else if (tag == "theorem2")
      checks = suite_theorem2(ctx);
    else if (tag == "theorem3")
      checks = curve_statistic_suite(ctx, &theorem3_statistic, "beta", true);
    else if (tag == "corollary1")
      checks = curve_statistic_suite(ctx, &corollary1_statistic, "delta", false);
    else if (tag == "dini_remark")
      checks = suite_dini(ctx);
    else if (tag == "dynkin")
      checks = suite_dynkin(ctx);
    else
      checks = suite_prop1(ctx);
    for (CheckRecord& c : checks) {
      c.name = tag + "/" + c.name;
      rep.checks.push_back(std::move(c));
    }
  };

  if (run_all)
    for (const std::string& tag : tags) run_one(tag);
  else
    run_one(suite);

  std::sort(rep.checks.begin(), rep.checks.end(),
            [](const CheckRecord& a, const CheckRecord& b) {
              return a.name < b.name;
            });
  return rep;
}

}  // namespace curvespace
