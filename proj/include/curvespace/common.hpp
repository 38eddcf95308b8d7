#pragma once
// Shared utilities: error types, compensated summation, low-discrepancy
// sampling, Gauss-Legendre nodes and a deterministic parallel loop.
//
// Determinism contract: every routine here is bit-reproducible for fixed
// inputs.  parallel_for only partitions index ranges; callers must write
// results into preallocated slots and reduce serially.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace curvespace {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// ---------------------------------------------------------------- errors ---

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GuardExceeded : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct DerivativeVanished : Error { using Error::Error; };
struct UnknownFamily : Error { using Error::Error; };
struct ParamOutOfRange : Error { using Error::Error; };
struct DepthExceeded : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct ChainOverflow : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct ExtrapolationUnstable : Error { using Error::Error; };
struct DegenerateChord : Error { using Error::Error; };
struct EmptyIntersection : Error { using Error::Error; };
struct EtaGateFailed : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };
struct TooFewLevels : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// ----------------------------------------------------------- summation ----

// Neumaier variant of Kahan summation; order of add() calls is part of the
// reproducibility contract.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ------------------------------------------------------------- sampling ---

// Radical-inverse (van der Corput) sequence in the given base.
inline double radical_inverse(uint64_t i, uint32_t base) {
  double inv = 1.0 / base, f = inv, x = 0.0;
  while (i > 0) {
    x += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return x;
}

// Deterministic 2-d Halton point; `seed` offsets the index so distinct seeds
// give distinct (still low-discrepancy) streams.
inline std::pair<double, double> halton2(uint64_t i, uint64_t seed = 0) {
  const uint64_t j = i + 1 + (seed % 65537) * 7919;
  return {radical_inverse(j, 2), radical_inverse(j, 3)};
}

// --------------------------------------------------- Gauss-Legendre data --

struct GaussRule {
  const double* nodes;    // on [-1, 1]
  const double* weights;
  int n;
};

namespace detail {
inline constexpr double kGl7Nodes[7] = {
    -0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
    0.0,
    0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
inline constexpr double kGl7Weights[7] = {
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189, 0.2797053914892766, 0.1294849661688697};
inline constexpr double kGl15Nodes[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
inline constexpr double kGl15Weights[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};
}  // namespace detail

inline GaussRule gauss7() { return {detail::kGl7Nodes, detail::kGl7Weights, 7}; }
inline GaussRule gauss15() { return {detail::kGl15Nodes, detail::kGl15Weights, 15}; }

// Adaptive 1-d integration on [a, b]: per-panel error from the GL7/GL15
// embedded pair, depth-first splitting in fixed order.
template <typename F>
double integrate_line(F&& f, double a, double b, double tol, int max_depth = 48) {
  struct Panel { double a, b; int depth; };
  std::vector<Panel> stack{{a, b, 0}};
  CompensatedSum total;
  const double span = std::abs(b - a);
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b), half = 0.5 * (p.b - p.a);
    double s7 = 0.0, s15 = 0.0;
    const GaussRule r7 = gauss7(), r15 = gauss15();
    for (int i = 0; i < 7; ++i) s7 += r7.weights[i] * f(mid + half * r7.nodes[i]);
    for (int i = 0; i < 15; ++i) s15 += r15.weights[i] * f(mid + half * r15.nodes[i]);
    s7 *= half;
    s15 *= half;
    const double local_tol = tol * std::max(std::abs(p.b - p.a) / span, 1e-6);
    if (std::abs(s15 - s7) <= local_tol || p.depth >= max_depth) {
      total.add(s15);
    } else {
      stack.push_back({mid, p.b, p.depth + 1});
      stack.push_back({p.a, mid, p.depth + 1});
    }
  }
  return total.value();
}

// ------------------------------------------------------------- threading --

inline int worker_count() {
  if (const char* env = std::getenv("CURVESPACE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 256) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

// Runs fn(i) for i in [0, n).  Work is split into contiguous blocks; fn must
// only write to slots owned by index i so the result is thread-agnostic.
template <typename F>
void parallel_for(int64_t n, F&& fn) {
  const int workers = std::min<int64_t>(worker_count(), std::max<int64_t>(n, 1));
  if (workers <= 1 || n < 2) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int64_t block = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int64_t lo = w * block, hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// parallel_for offers no exception transport; this wrapper captures the
// first worker exception and rethrows it on the calling thread.
template <typename F>
void parallel_guarded(int64_t n, F&& fn) {
  std::mutex mu;
  std::exception_ptr first;
  parallel_for(n, [&](int64_t i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!first) first = std::current_exception();
    }
  });
  if (first) std::rethrow_exception(first);
}

// ------------------------------------------------------------- misc -------

inline bool finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Principal-branch wrap of an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  return t;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace curvespace
