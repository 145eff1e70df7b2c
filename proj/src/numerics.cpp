#include "bntl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bntl {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_rising(double x, Count len) {
  if (len <= 0) return 0.0;
  if (len > 24) return log_gamma(x + static_cast<double>(len)) - log_gamma(x);
  double acc = 0.0;
  double prod = 1.0;
  for (Count k = 0; k < len; ++k) {
    prod *= x + static_cast<double>(k);
    if (prod > 1e250 || prod < 1e-250) {
      acc += std::log(prod);
      prod = 1.0;
    }
  }
  return acc + std::log(prod);
}

double log_binomial(Count n, Count k) {
  if (k < 0 || n < 0 || k > n) return kNegInf;
  if (k == 0 || k == n) return 0.0;
  return log_gamma(static_cast<double>(n) + 1.0) -
         log_gamma(static_cast<double>(k) + 1.0) -
         log_gamma(static_cast<double>(n - k) + 1.0);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_mean_exp(std::span<const double> xs) {
  return log_sum_exp(xs) - std::log(static_cast<double>(xs.size()));
}

std::size_t sample_log_categorical(std::span<const double> log_weights,
                                   Rng& rng) {
  if (log_weights.empty())
    throw Error(ErrorCode::invariant_violation, "empty categorical support");
  double top = kNegInf;
  for (double w : log_weights) top = std::max(top, w);
  if (!std::isfinite(top))
    throw Error(ErrorCode::invariant_violation, "categorical has no mass");
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - top);
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    u -= std::exp(log_weights[i] - top);
    if (u <= 0.0) return i;
  }
  // Round-off: fall back to the last index with mass.
  for (std::size_t i = log_weights.size(); i-- > 0;)
    if (std::isfinite(log_weights[i])) return i;
  return log_weights.size() - 1;
}

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0))
    throw Error(ErrorCode::invariant_violation,
                "gamma shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    double x = g(rng);
    while (x <= 0.0) x = g(rng);
    return std::log(x);
  }
  // G(a) = G(a + 1) * U^(1/a)
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  double x = g(rng);
  while (x <= 0.0) x = g(rng);
  return std::log(x) + std::log(uniform01(rng)) / shape;
}

double sample_beta(double a, double b, Rng& rng) {
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  // x = Ga / (Ga + Gb) = 1 / (1 + exp(lb - la))
  const double diff = lb - la;
  double x = diff > 0 ? std::exp(-diff) / (1.0 + std::exp(-diff))
                      : 1.0 / (1.0 + std::exp(diff));
  constexpr double tiny = std::numeric_limits<double>::min();
  return std::clamp(x, tiny, std::nextafter(1.0, 0.0));
}

}  // namespace bntl
