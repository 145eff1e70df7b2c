#include "bntl/arrivals.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace bntl {

namespace {

[[noreturn]] void reject_coupled() {
  throw Error(ErrorCode::invalid_argument,
              "coupled pyp arrivals must be resolved against alpha first");
}

void check_pyp_state(const PypInduced& m, Count existing, Count t_prev) {
  if (existing < 1 || t_prev < 1)
    throw Error(ErrorCode::domain, "pyp arrivals need existing >= 1, T >= 1");
  if (!(static_cast<double>(t_prev) - static_cast<double>(existing) * m.tau > 0.0))
    throw Error(ErrorCode::domain, "infeasible pyp state: T - j*tau <= 0");
}

double poisson_log_upper_tail(double lambda, Count s) {
  // log P(X >= s), X ~ Poisson(lambda).
  if (s <= 0) return 0.0;
  const double ds = static_cast<double>(s);
  if (ds <= lambda) {
    const double lower = boost::math::gamma_q(ds, lambda);  // P(X <= s-1)
    return std::log1p(-lower);
  }
  // Series around the first term: P(X >= s) = p(s) sum_k prod_i lambda/(s+i)
  const double log_first = -lambda + ds * std::log(lambda) - log_gamma(ds + 1.0);
  double term = 1.0, sum = 1.0;
  for (Count k = 1; k < 100000; ++k) {
    term *= lambda / (ds + static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return log_first + std::log(sum);
}

void check_times(std::span<const Count> times, Count n) {
  if (times.empty() || times[0] != 1)
    throw Error(ErrorCode::infeasible, "arrival times must start at 1");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (times[j] <= times[j - 1])
      throw Error(ErrorCode::infeasible, "arrival times not increasing");
  if (times.back() > n)
    throw Error(ErrorCode::infeasible, "last arrival beyond n");
}

double log_beta_density(double x, double a, double b) {
  if (a == 1.0 && b == 1.0) return 0.0;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

}  // namespace

double log_pmf(const InterarrivalModel& model, Count existing, Count s,
               Count t_prev) {
  if (s < 1) throw Error(ErrorCode::domain, "interarrival must be >= 1");
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Geometric>) {
          return std::log(m.beta) +
                 static_cast<double>(s - 1) * std::log1p(-m.beta);
        } else if constexpr (std::is_same_v<M, ShiftedPoisson>) {
          const double k = static_cast<double>(s - 1);
          return -m.lambda + k * std::log(m.lambda) - log_gamma(k + 1.0);
        } else if constexpr (std::is_same_v<M, PypInduced>) {
          check_pyp_state(m, existing, t_prev);
          const double j = static_cast<double>(existing);
          const double t = static_cast<double>(t_prev);
          return std::log(m.theta + j * m.tau) +
                 log_rising(t - j * m.tau, s - 1) - log_rising(t + m.theta, s);
        } else {
          reject_coupled();
        }
      },
      model);
}

double log_survival(const InterarrivalModel& model, Count s, Count existing,
                    Count t_prev) {
  if (s < 0) throw Error(ErrorCode::domain, "survival horizon must be >= 0");
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CoupledPyp>) {
          reject_coupled();
        } else {
          if (s == 0) return 0.0;
          if constexpr (std::is_same_v<M, Geometric>) {
            return static_cast<double>(s) * std::log1p(-m.beta);
          } else if constexpr (std::is_same_v<M, ShiftedPoisson>) {
            return poisson_log_upper_tail(m.lambda, s);
          } else {
            check_pyp_state(m, existing, t_prev);
            const double j = static_cast<double>(existing);
            const double t = static_cast<double>(t_prev);
            return log_rising(t - j * m.tau, s) - log_rising(t + m.theta, s);
          }
        }
      },
      model);
}

Count sample_interarrival(const InterarrivalModel& model, Count existing,
                          Count t_prev, Rng& rng, Count limit) {
  return std::visit(
      [&](const auto& m) -> Count {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Geometric>) {
          std::geometric_distribution<Count> g(m.beta);
          return std::min<Count>(g(rng) + 1, limit + 1);
        } else if constexpr (std::is_same_v<M, ShiftedPoisson>) {
          std::poisson_distribution<Count> p(m.lambda);
          return std::min<Count>(p(rng) + 1, limit + 1);
        } else if constexpr (std::is_same_v<M, PypInduced>) {
          // Inversion: smallest s with P(Delta > s) <= U.
          check_pyp_state(m, existing, t_prev);
          const double log_u = std::log(uniform01(rng));
          auto above = [&](Count s) {
            return log_survival(m, s, existing, t_prev) > log_u;
          };
          Count lo = 0, hi = 1;
          while (above(hi)) {
            if (hi >= limit) return limit + 1;
            lo = hi;
            hi = std::min(hi * 2, limit);
          }
          while (hi - lo > 1) {
            const Count mid = lo + (hi - lo) / 2;
            if (above(mid))
              lo = mid;
            else
              hi = mid;
          }
          return hi;
        } else {
          reject_coupled();
        }
      },
      model);
}

double pyp_theta_term(double theta, double tau, Count k, Count n) {
  double acc = -log_rising(1.0 + theta, n - 1);
  const double x = theta / tau;
  if (k > 64 && tau > 0.0 && x < 1e6) {
    // prod_{j=1}^{K-1} (theta + j tau) = tau^{K-1} Gamma(x + K) / Gamma(x + 1)
    return acc + static_cast<double>(k - 1) * std::log(tau) +
           log_rising(x + 1.0, k - 1);
  }
  double prod = 1.0;
  for (Count j = 1; j < k; ++j) {
    prod *= theta + static_cast<double>(j) * tau;
    if ((j & 15) == 0 || prod > 1e200 || prod < 1e-200) {
      acc += std::log(prod);
      prod = 1.0;
    }
  }
  return acc + std::log(prod);
}

double pyp_segment_term(double tau, std::span<const Count> times, Count n) {
  const auto k = times.size();
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const Count next = j + 1 < k ? times[j + 1] : n + 1;
    const Count len = next - 1 - times[j];
    if (len > 0)
      acc += log_rising(
          static_cast<double>(times[j]) - static_cast<double>(j + 1) * tau, len);
  }
  return acc;
}

double log_arrival_sequence_prob(const InterarrivalModel& model,
                                 std::span<const Count> times, Count n) {
  check_times(times, n);
  const Count k = static_cast<Count>(times.size());
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Geometric>) {
          return static_cast<double>(k - 1) * std::log(m.beta) +
                 static_cast<double>(n - k) * std::log1p(-m.beta);
        } else if constexpr (std::is_same_v<M, ShiftedPoisson>) {
          return log_arrival_sequence_prob_by_terms(m, times, n);
        } else if constexpr (std::is_same_v<M, PypInduced>) {
          return pyp_theta_term(m.theta, m.tau, k, n) +
                 pyp_segment_term(m.tau, times, n);
        } else {
          reject_coupled();
        }
      },
      model);
}

double log_arrival_sequence_prob(const InterarrivalModel& model,
                                 const ArrivalTimes& times, Count n) {
  return log_arrival_sequence_prob(model, times.times(), n);
}

double log_arrival_sequence_prob_by_terms(const InterarrivalModel& model,
                                          std::span<const Count> times,
                                          Count n) {
  check_times(times, n);
  double acc = 0.0;
  for (std::size_t j = 1; j < times.size(); ++j)
    acc += log_pmf(model, static_cast<Count>(j), times[j] - times[j - 1],
                   times[j - 1]);
  acc += log_survival(model, n - times.back(),
                      static_cast<Count>(times.size()), times.back());
  return acc;
}

void ArrivalPriors::validate() const {
  if (!(beta_a > 0 && beta_b > 0 && lambda_shape > 0 && lambda_rate > 0 &&
        tau_a > 0 && tau_b > 0 && theta_max > 0))
    throw Error(ErrorCode::invalid_argument,
                "prior hyperparameters must be positive");
}

Count sample_truncated_poisson(double lambda, Count m, Rng& rng) {
  std::poisson_distribution<Count> pois(lambda);
  if (m <= 0) return pois(rng);
  if (static_cast<double>(m) <= lambda) {
    // P(X >= m) is at least about one half here; plain rejection.
    for (;;) {
      const Count x = pois(rng);
      if (x >= m) return x;
    }
  }
  // Inversion on the tail, weights relative to X = m.
  const double dm = static_cast<double>(m);
  double total = 1.0, w = 1.0;
  for (Count k = 1; k < 100000; ++k) {
    w *= lambda / (dm + static_cast<double>(k));
    total += w;
    if (w < 1e-17 * total) break;
  }
  double u = uniform01(rng) * total;
  w = 1.0;
  Count x = m;
  while (u > w) {
    u -= w;
    ++x;
    w *= lambda / static_cast<double>(x);
    if (w < 1e-300) break;
  }
  return x;
}

InterarrivalModel posterior_update_arrival_params(
    const InterarrivalModel& current, std::span<const Count> times, Count n,
    const ArrivalPriors& prior, Rng& rng, const ArrivalSliceTuning& tuning,
    double coupled_alpha) {
  check_times(times, n);
  const Count k = static_cast<Count>(times.size());
  return std::visit(
      [&](const auto& m) -> InterarrivalModel {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Geometric>) {
          return Geometric{sample_beta(prior.beta_a + static_cast<double>(k - 1),
                                       prior.beta_b + static_cast<double>(n - k),
                                       rng)};
        } else if constexpr (std::is_same_v<M, ShiftedPoisson>) {
          const Count latent =
              sample_truncated_poisson(m.lambda, n - times.back(), rng);
          const double excess =
              static_cast<double>(times.back() - k) + static_cast<double>(latent);
          std::gamma_distribution<double> g(prior.lambda_shape + excess,
                                            1.0 / (prior.lambda_rate +
                                                   static_cast<double>(k)));
          double lambda = g(rng);
          if (!(lambda > 0.0)) lambda = std::numeric_limits<double>::min();
          return ShiftedPoisson{lambda};
        } else if constexpr (std::is_same_v<M, PypInduced>) {
          double theta = m.theta, tau = m.tau;
          const double seg = pyp_segment_term(tau, times, n);
          theta = slice_sample(
              theta,
              [&](double th) { return pyp_theta_term(th, tau, k, n) + seg; },
              tuning.theta, -tau, prior.theta_max, rng);
          tau = slice_sample(
              tau,
              [&](double ta) {
                // theta | tau is uniform on (-tau, theta_max)
                return pyp_theta_term(theta, ta, k, n) +
                       pyp_segment_term(ta, times, n) +
                       log_beta_density(ta, prior.tau_a, prior.tau_b) -
                       std::log(prior.theta_max + ta);
              },
              tuning.tau, std::max(0.0, -theta), 1.0, rng);
          return PypInduced{theta, tau};
        } else {
          if (!(coupled_alpha > 0.0 && coupled_alpha < 1.0))
            throw Error(ErrorCode::invalid_argument,
                        "coupled pyp update needs alpha in (0,1)");
          const double tau = coupled_alpha;
          const double theta = slice_sample(
              m.theta,
              [&](double th) { return pyp_theta_term(th, tau, k, n); },
              tuning.theta, -tau, prior.theta_max, rng);
          return CoupledPyp{theta};
        }
      },
      current);
}

double argmax_pyp_theta(double tau, Count k, Count n, const PypSearch& search,
                        double* best_value) {
  // Search in u = log(theta + tau) so both ends of the range resolve.
  const double u_lo = std::log(search.eps);
  const double u_hi = std::log(search.theta_max + tau);
  auto f = [&](double u) { return pyp_theta_term(std::exp(u) - tau, tau, k, n); };
  constexpr int grid = 24;
  const double step = (u_hi - u_lo) / (grid - 1);
  int best = 0;
  double best_f = kNegInf;
  for (int i = 0; i < grid; ++i) {
    const double v = f(u_lo + step * i);
    if (v > best_f) best_f = v, best = i;
  }
  const double a = u_lo + step * std::max(0, best - 1);
  const double b = u_lo + step * std::min(grid - 1, best + 1);
  const double u = golden_section_max(f, a, b, 1e-10);
  const double fu = f(u);
  double u_star = u, f_star = fu;
  if (best_f > fu) u_star = u_lo + step * best, f_star = best_f;
  if (best_value) *best_value = f_star;
  return std::exp(u_star) - tau;
}

ArrivalFit fit_arrivals_mle(Family family, std::span<const Count> times,
                            Count n, PypSearch search) {
  check_times(times, n);
  const Count k = static_cast<Count>(times.size());
  if (k < 2)
    throw Error(ErrorCode::insufficient_data,
                "at least two arrivals are needed to fit arrival parameters");
  ArrivalFit fit{Geometric{0.5}, 0.0, false, {}};
  switch (family) {
    case Family::geometric: {
      double beta;
      if (n == k) {
        beta = std::nextafter(1.0, 0.0);
        fit.at_boundary = true;
        fit.note = "every step is an arrival; beta at upper boundary";
      } else {
        beta = static_cast<double>(k - 1) / static_cast<double>(n - k);
        if (beta >= 1.0) {
          beta = std::nextafter(1.0, 0.0);
          fit.at_boundary = true;
          fit.note = "closed form (K-1)/(n-K) >= 1; clamped to boundary";
        }
      }
      fit.model = Geometric{beta};
      break;
    }
    case Family::shifted_poisson: {
      double lambda = static_cast<double>(n - k) / static_cast<double>(k - 1);
      if (n == k) {
        lambda = std::numeric_limits<double>::min();
        fit.at_boundary = true;
        fit.note = "every step is an arrival; lambda at lower boundary";
      }
      fit.model = ShiftedPoisson{lambda};
      break;
    }
    case Family::pyp_induced: {
      const double eps = search.eps;
      auto profile = [&](double tau) {
        double v = 0.0;
        argmax_pyp_theta(tau, k, n, search, &v);
        return v + pyp_segment_term(tau, times, n);
      };
      constexpr int grid = 20;
      const double lo = eps, hi = 1.0 - eps;
      const double step = (hi - lo) / (grid - 1);
      int best = 0;
      double best_f = kNegInf;
      for (int i = 0; i < grid; ++i) {
        const double v = profile(lo + step * i);
        if (v > best_f) best_f = v, best = i;
      }
      const double a = lo + step * std::max(0, best - 1);
      const double b = lo + step * std::min(grid - 1, best + 1);
      double tau = golden_section_max(profile, a, b, 1e-9);
      if (profile(tau) < best_f) tau = lo + step * best;
      const double theta = argmax_pyp_theta(tau, k, n, search);
      fit.model = PypInduced{theta, tau};
      if (tau < 1e-4 || tau > 1.0 - 1e-4 || theta + tau < 10 * eps ||
          theta > search.theta_max * (1 - 1e-6)) {
        fit.at_boundary = true;
        fit.note = "pyp estimate at the edge of the search box";
      }
      break;
    }
    case Family::coupled_pyp:
      throw Error(ErrorCode::invalid_argument,
                  "coupled pyp arrivals are fitted jointly with alpha");
  }
  fit.log_likelihood = log_arrival_sequence_prob(fit.model, times, n);
  return fit;
}

}  // namespace bntl
