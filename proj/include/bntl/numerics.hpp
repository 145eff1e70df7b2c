#pragma once

// Log-space special functions, robust Beta/Gamma draws and the 1-D search
// and slice-sampling primitives used by the estimators and the sampler.

#include <cmath>
#include <limits>
#include <random>
#include <span>

#include "bntl/core.hpp"

namespace bntl {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Reentrant log|Gamma(x)|.
double log_gamma(double x);

/// log of x (x+1) ... (x+len-1) for x > 0. Short runs are multiplied out
/// directly, long runs use a log-gamma difference.
double log_rising(double x, Count len);

/// log C(n, k) for integers 0 <= k <= n; -inf otherwise.
double log_binomial(Count n, Count k);

double log_sum_exp(std::span<const double> xs);
double log_mean_exp(std::span<const double> xs);

/// Sample log G with G ~ Gamma(shape, 1). Stays finite for tiny shapes.
double sample_log_gamma(double shape, Rng& rng);

/// Beta(a, b) draw computed from log-gamma variates, clamped into the open
/// unit interval.
double sample_beta(double a, double b, Rng& rng);

inline double uniform01(Rng& rng) {
  // (0, 1): never returns exactly zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Index drawn with probability proportional to exp(log_weights[i]).
std::size_t sample_log_categorical(std::span<const double> log_weights,
                                   Rng& rng);

struct SliceTuning {
  double width = 1.0;
  int max_step_out = 50;
};

/// One univariate slice-sampling move (stepping out, then shrinkage) on
/// the open interval (lo, hi). log_density must be finite at x0.
template <class LogDensity>
double slice_sample(double x0, LogDensity&& log_density, SliceTuning tuning,
                    double lo, double hi, Rng& rng) {
  auto f = [&](double x) {
    if (!(x > lo && x < hi)) return kNegInf;
    return static_cast<double>(log_density(x));
  };
  const double fx0 = f(x0);
  if (!std::isfinite(fx0))
    throw Error(ErrorCode::invariant_violation,
                "slice sampler started at a zero-density point");
  const double level = fx0 + std::log(uniform01(rng));
  const double w = tuning.width;
  double left = x0 - w * uniform01(rng);
  double right = left + w;
  int j = static_cast<int>(std::floor(tuning.max_step_out * uniform01(rng)));
  int k = tuning.max_step_out - 1 - j;
  while (j-- > 0 && left > lo && f(left) > level) left -= w;
  while (k-- > 0 && right < hi && f(right) > level) right += w;
  if (left < lo) left = lo;
  if (right > hi) right = hi;
  for (int iter = 0; iter < 200; ++iter) {
    const double x1 = left + uniform01(rng) * (right - left);
    if (f(x1) > level) return x1;
    if (x1 < x0)
      left = x1;
    else
      right = x1;
  }
  return x0;
}

/// Golden-section maximization of a unimodal function on [a, b].
template <class F>
double golden_section_max(F&& f, double a, double b, double tol = 1e-10,
                          int max_iter = 200) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol * (1.0 + std::abs(c)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace bntl
