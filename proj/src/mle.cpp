#include "bntl/mle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace bntl {

namespace {

double log_normal_pdf(double x, const AlphaPrior& p) {
  const double z = (x - p.mean) / p.sd;
  return -0.5 * z * z - std::log(p.sd) - 0.9189385332046727;
}

double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

bool alpha_identifiable(const DegreeHistogram& hist) {
  if (hist.k < 2) return false;
  for (const auto& [d, m] : hist.counts)
    if (d >= 2) return true;
  return false;
}

void check_stats(const DegreeHistogram& hist, std::span<const Count> times) {
  if (static_cast<Count>(times.size()) != hist.k || hist.k < 1)
    throw Error(ErrorCode::invalid_argument,
                "arrival times and histogram disagree on K");
  if (times[0] != 1 || times.back() > hist.n)
    throw Error(ErrorCode::infeasible, "arrival times incompatible with n");
}

// Grid of `grid` points on [lo, hi], then golden section between the
// neighbours of the best grid point. Returns (argmax, max, best grid index).
template <class F>
std::tuple<double, double, int> grid_then_golden(F&& f, double lo, double hi,
                                                 int grid) {
  const double step = (hi - lo) / (grid - 1);
  int best = 0;
  double best_f = kNegInf;
  for (int i = 0; i < grid; ++i) {
    const double v = f(lo + step * i);
    if (v > best_f) best_f = v, best = i;
  }
  double x_star = lo + step * best, f_star = best_f;
  for (int widen : {1, 3}) {
    const double a = lo + step * std::max(0, best - widen);
    const double b = lo + step * std::min(grid - 1, best + widen);
    const double x = golden_section_max(f, a, b, 1e-12);
    const double fx = f(x);
    if (fx >= f_star) {
      x_star = x, f_star = fx;
      break;
    }
  }
  return {x_star, f_star, best};
}

}  // namespace

AlphaFit fit_alpha(const DegreeHistogram& hist, std::span<const Count> times,
                   AlphaSearch search, const std::optional<AlphaPrior>& prior) {
  check_stats(hist, times);
  if (!prior && !alpha_identifiable(hist))
    throw Error(ErrorCode::unidentifiable,
                "alpha is not identifiable: every vertex has degree 1");
  if (prior && !(prior->sd > 0.0))
    throw Error(ErrorCode::invalid_argument, "alpha prior sd must be positive");
  if (!(search.lower < 1.0 - search.eps) || search.grid < 3)
    throw Error(ErrorCode::invalid_argument, "bad alpha search box");

  auto loglik = [&](double a) {
    return log_seq_prob_from_histogram(hist, times, a);
  };
  auto objective = [&](double a) {
    return loglik(a) + (prior ? log_normal_pdf(a, *prior) : 0.0);
  };
  // u = log(1 - alpha) spreads the grid over both the long negative range
  // and the approach to 1.
  const double u_lo = std::log(search.eps);
  const double u_hi = std::log(1.0 - search.lower);
  auto in_u = [&](double u) { return objective(1.0 - std::exp(u)); };
  auto [u_star, f_star, best] = grid_then_golden(in_u, u_lo, u_hi, search.grid);
  double alpha = 1.0 - std::exp(u_star);

  // Refine by bisection on the numerical derivative inside the bracket.
  const double step = (u_hi - u_lo) / (search.grid - 1);
  const double a_lo = 1.0 - std::exp(std::min(u_hi, u_lo + step * (best + 1)));
  const double a_hi = 1.0 - std::exp(std::max(u_lo, u_lo + step * (best - 1)));
  auto slope = [&](double a) {
    const double h = 1e-6 * std::min(1.0 - a, 1.0 + std::abs(a));
    return (objective(a + h) - objective(a - h)) / (2.0 * h);
  };
  if (a_lo < alpha && alpha < a_hi) {
    double lo = a_lo, hi = a_hi;
    if (slope(lo) > 0.0 && slope(hi) < 0.0) {
      for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
      }
      const double cand = 0.5 * (lo + hi);
      if (objective(cand) >= objective(alpha)) alpha = cand;
    }
  }

  AlphaFit fit;
  fit.alpha = alpha;
  fit.log_likelihood = loglik(alpha);
  fit.at_boundary = (best == 0 || best == search.grid - 1) &&
                    (std::log(1.0 - alpha) < u_lo + step ||
                     std::log(1.0 - alpha) > u_hi - step);
  return fit;
}

AlphaFit fit_alpha(const OrderedDegrees& d, const ArrivalTimes& t,
                   AlphaSearch search) {
  if (!validate_feasible(d, t))
    throw Error(ErrorCode::infeasible, "degrees and arrival times are infeasible");
  return fit_alpha(DegreeHistogram::from_degrees(d.degrees()), t.times(), search);
}

void MapPriors::validate() const {
  if (alpha && !(alpha->sd > 0.0))
    throw Error(ErrorCode::invalid_argument, "alpha prior sd must be positive");
  if (!(beta_a > 0.0 && beta_b > 0.0 && tau_a > 0.0 && tau_b > 0.0 &&
        lambda_shape > 0.0 && lambda_rate >= 0.0))
    throw Error(ErrorCode::invalid_argument, "invalid MAP prior hyperparameters");
}

namespace {

// Profile maximization over tau in (eps, 1 - eps) of
// max_theta pyp_theta_term(theta, tau) + rest(tau).
template <class Rest>
std::pair<double, double> fit_pyp_profile(Count k, Count n, double theta_max,
                                          double eps, Rest&& rest) {
  const PypSearch search{theta_max, eps};
  auto profile = [&](double tau) {
    double v = 0.0;
    argmax_pyp_theta(tau, k, n, search, &v);
    return v + rest(tau);
  };
  auto [tau, f, best] = grid_then_golden(profile, eps, 1.0 - eps, 20);
  (void)f;
  (void)best;
  return {argmax_pyp_theta(tau, k, n, search), tau};
}

bool pyp_at_edge(double theta, double tau, double theta_max, double eps) {
  return tau < 1e-4 || tau > 1.0 - 1e-4 || theta + tau < 10 * eps ||
         theta > theta_max * (1 - 1e-6);
}

FittedModel fit_coupled(const DegreeHistogram& hist, const FitOptions& options,
                        double (*tau_prior)(double, const MapPriors*),
                        const MapPriors* priors) {
  if (hist.k < 2)
    throw Error(ErrorCode::insufficient_data,
                "coupled fit needs at least two vertices");
  const auto [theta, tau] = fit_pyp_profile(
      hist.k, hist.n, options.coupled_theta_max, options.eps, [&](double t) {
        return histogram_degree_term(hist, t) + tau_prior(t, priors);
      });
  FittedModel out;
  out.model = BntlModel{tau, CoupledPyp{theta}};
  out.log_likelihood = log_coupled_pyp_likelihood(hist, theta, tau);
  out.alpha_at_boundary = out.arrivals_at_boundary =
      pyp_at_edge(theta, tau, options.coupled_theta_max, options.eps);
  if (out.alpha_at_boundary) out.note = "coupled estimate at the edge of the search box";
  return out;
}

double no_prior(double, const MapPriors*) { return 0.0; }
double beta_tau_prior(double t, const MapPriors* p) {
  return log_beta_pdf(t, p->tau_a, p->tau_b);
}

template <class Body>
FittedModel timed(Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  FittedModel out = body();
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

FittedModel fit_model(const DegreeHistogram& hist, std::span<const Count> times,
                      Family family, const FitOptions& options,
                      const std::optional<AlphaFit>& alpha_fit) {
  check_stats(hist, times);
  return timed([&] {
    if (family == Family::coupled_pyp)
      return fit_coupled(hist, options, no_prior, nullptr);
    const AlphaFit af = alpha_fit ? *alpha_fit : fit_alpha(hist, times, options.alpha);
    const ArrivalFit arr = fit_arrivals_mle(family, times, hist.n,
                                            PypSearch{options.pyp_theta_max, options.eps});
    FittedModel out;
    out.model = BntlModel{af.alpha, arr.model};
    out.alpha_log_likelihood = af.log_likelihood;
    out.arrival_log_likelihood = arr.log_likelihood;
    out.log_likelihood = af.log_likelihood + arr.log_likelihood;
    out.alpha_at_boundary = af.at_boundary;
    out.arrivals_at_boundary = arr.at_boundary;
    out.note = arr.note;
    return out;
  });
}

FittedModel fit_model(const EdgeEndSequence& z, Family family,
                      const FitOptions& options) {
  const auto [d, t] = degrees_from_ends(z);
  return fit_model(DegreeHistogram::from_degrees(d.degrees()), t.times(), family,
                   options);
}

FittedModel fit_map(const DegreeHistogram& hist, std::span<const Count> times,
                    Family family, const MapPriors& priors,
                    const FitOptions& options) {
  check_stats(hist, times);
  priors.validate();
  return timed([&] {
    if (family == Family::coupled_pyp) {
      FittedModel out = fit_coupled(hist, options, beta_tau_prior, &priors);
      if (priors.alpha)
        out.note += (out.note.empty() ? "" : "; ") +
                    std::string("coupled fit uses the tau prior; alpha prior ignored");
      return out;
    }
    const Count k = hist.k, n = hist.n;
    if (k < 2)
      throw Error(ErrorCode::insufficient_data,
                  "at least two arrivals are needed to fit arrival parameters");
    const AlphaFit af = fit_alpha(hist, times, options.alpha, priors.alpha);
    FittedModel out;
    const double kd = static_cast<double>(k), nd = static_cast<double>(n);
    switch (family) {
      case Family::geometric: {
        const double num = kd - 1.0 + priors.beta_a - 1.0;
        const double den = nd - kd + priors.beta_a + priors.beta_b - 2.0;
        double beta = den > 0.0 ? num / den : 1.0;
        if (!(beta > 0.0 && beta < 1.0)) {
          beta = std::clamp(beta, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
          out.arrivals_at_boundary = true;
          out.note = "beta MAP outside (0,1); clamped to boundary";
        }
        out.model.arrivals = Geometric{beta};
        break;
      }
      case Family::shifted_poisson: {
        double lambda = (nd - kd + priors.lambda_shape - 1.0) /
                        (kd - 1.0 + priors.lambda_rate);
        if (!(lambda > 0.0)) {
          lambda = std::numeric_limits<double>::min();
          out.arrivals_at_boundary = true;
          out.note = "lambda MAP at lower boundary";
        }
        out.model.arrivals = ShiftedPoisson{lambda};
        break;
      }
      case Family::pyp_induced: {
        const auto [theta, tau] = fit_pyp_profile(
            k, n, options.pyp_theta_max, options.eps, [&](double t) {
              return pyp_segment_term(t, times, n) +
                     log_beta_pdf(t, priors.tau_a, priors.tau_b);
            });
        out.model.arrivals = PypInduced{theta, tau};
        out.arrivals_at_boundary =
            pyp_at_edge(theta, tau, options.pyp_theta_max, options.eps);
        break;
      }
      case Family::coupled_pyp:
        break;
    }
    out.model.alpha = af.alpha;
    out.alpha_at_boundary = af.at_boundary;
    out.alpha_log_likelihood = af.log_likelihood;
    out.arrival_log_likelihood = log_arrival_sequence_prob(out.model.arrivals, times, n);
    out.log_likelihood = out.alpha_log_likelihood + out.arrival_log_likelihood;
    return out;
  });
}

FittedModel fit_map(const EdgeEndSequence& z, Family family,
                    const MapPriors& priors, const FitOptions& options) {
  const auto [d, t] = degrees_from_ends(z);
  return fit_map(DegreeHistogram::from_degrees(d.degrees()), t.times(), family,
                 priors, options);
}

std::vector<std::optional<double>> psi_estimators(std::span<const Count> degrees,
                                                  std::span<const Count> times,
                                                  PsiMode mode, double alpha) {
  if (degrees.size() != times.size() || degrees.empty())
    throw Error(ErrorCode::invalid_argument, "degrees and times differ in length");
  if (mode == PsiMode::mle && !validate_feasible(degrees, times))
    throw Error(ErrorCode::infeasible, "degrees and arrival times are infeasible");
  if (mode == PsiMode::map && !(alpha < 1.0))
    throw Error(ErrorCode::domain, "alpha must be < 1");
  std::vector<std::optional<double>> out(degrees.size());
  out[0] = 1.0;
  Count dbar = degrees[0];
  for (std::size_t i = 1; i < degrees.size(); ++i) {
    dbar += degrees[i];
    const double d = static_cast<double>(degrees[i]);
    const double db = static_cast<double>(dbar);
    const double j = static_cast<double>(i + 1);
    switch (mode) {
      case PsiMode::mle: {
        const Count den = dbar - times[i];
        if (den > 0) out[i] = (d - 1.0) / static_cast<double>(den);
        break;
      }
      case PsiMode::map: {
        const double den = db - j * alpha - 2.0;
        if (den > 0.0) out[i] = (d - 1.0 - alpha) / den;
        break;
      }
      case PsiMode::ratio:
        out[i] = d / db;
        break;
    }
  }
  return out;
}

}  // namespace bntl
