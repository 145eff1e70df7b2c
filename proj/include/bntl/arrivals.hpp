#pragma once

// The arrival-time law: interarrival pmf and survival, sampling, posterior
// updates of the arrival parameters and their maximum-likelihood fits.
//
// Indexing follows the Markov factorization of the arrival law. When
// `existing` vertices are present and the most recent one arrived at step
// `t_prev`, the next interarrival s = T_next - t_prev has pmf
// log_pmf(model, existing, s, t_prev). The arrival of vertex j (1-based)
// therefore uses existing = j - 1 and t_prev = T_{j-1}.

#include <limits>
#include <optional>

#include "bntl/core.hpp"
#include "bntl/numerics.hpp"

namespace bntl {

/// Models passed to the functions below must be resolved: a CoupledPyp is
/// rejected (use resolve_arrivals first).
double log_pmf(const InterarrivalModel& model, Count existing, Count s,
               Count t_prev);

/// log P(interarrival > s). Zero for s = 0.
double log_survival(const InterarrivalModel& model, Count s, Count existing,
                    Count t_prev);

inline constexpr Count kNoLimit = std::numeric_limits<Count>::max() / 4;

/// Draws one interarrival. With a finite limit, any draw beyond it is
/// reported as limit + 1 (only "not within limit" is materialized).
Count sample_interarrival(const InterarrivalModel& model, Count existing,
                          Count t_prev, Rng& rng, Count limit = kNoLimit);

/// log of the arrival-law factor for T observed up to step n, including
/// the censored term P(T_{K+1} > n | T_K).
double log_arrival_sequence_prob(const InterarrivalModel& model,
                                 std::span<const Count> times, Count n);
double log_arrival_sequence_prob(const InterarrivalModel& model,
                                 const ArrivalTimes& times, Count n);

/// The same quantity evaluated term by term from log_pmf / log_survival.
/// Kept as the reference the closed forms are tested against.
double log_arrival_sequence_prob_by_terms(const InterarrivalModel& model,
                                          std::span<const Count> times,
                                          Count n);

/// Theta-dependent part of the PYP arrival log-likelihood:
/// log Gamma(1+theta) - log Gamma(n+theta) + sum_{j=1}^{K-1} log(theta + j tau).
double pyp_theta_term(double theta, double tau, Count k, Count n);

/// Tau-only part of the PYP arrival log-likelihood: the product over
/// non-arrival steps i of (i - 1 - K_{i-1} tau), accumulated per run.
double pyp_segment_term(double tau, std::span<const Count> times, Count n);

/// Hyperparameters of the arrival-parameter priors.
struct ArrivalPriors {
  double beta_a = 1.0;  // beta ~ Beta(a, b)
  double beta_b = 1.0;
  double lambda_shape = 1.0;  // lambda ~ Gamma(shape, rate)
  double lambda_rate = 1.0;
  double tau_a = 1.0;  // tau ~ Beta(a, b); Beta(1,1) is uniform
  double tau_b = 1.0;
  double theta_max = 1e4;  // theta | tau uniform on (-tau, theta_max)

  void validate() const;
};

struct ArrivalSliceTuning {
  SliceTuning theta{1.0, 50};
  SliceTuning tau{0.1, 50};
};

/// One posterior move for the arrival parameters given T and n: exact
/// conjugate draws for Geometric and ShiftedPoisson (the latter augments
/// the censored interarrival), slice sampling for theta and tau otherwise.
/// For a CoupledPyp only theta moves; its tau is `coupled_alpha`.
InterarrivalModel posterior_update_arrival_params(
    const InterarrivalModel& current, std::span<const Count> times, Count n,
    const ArrivalPriors& prior, Rng& rng, const ArrivalSliceTuning& tuning = {},
    double coupled_alpha = std::numeric_limits<double>::quiet_NaN());

/// Draw X ~ Poisson(lambda) conditioned on X >= m.
Count sample_truncated_poisson(double lambda, Count m, Rng& rng);

struct ArrivalFit {
  InterarrivalModel model;
  double log_likelihood = 0.0;
  bool at_boundary = false;
  std::string note;
};

struct PypSearch {
  double theta_max = 1e4;
  double eps = 1e-6;
};

/// Closed forms for Geometric (beta = (K-1)/(n-K)) and ShiftedPoisson
/// (lambda = (n-K)/(K-1)); nested golden-section search for PypInduced.
ArrivalFit fit_arrivals_mle(Family family, std::span<const Count> times,
                            Count n, PypSearch search = {});

/// Maximize pyp_theta_term over theta in (-tau + eps, theta_max) for fixed
/// tau. Shared with the coupled-model optimizer.
double argmax_pyp_theta(double tau, Count k, Count n, const PypSearch& search,
                        double* best_value = nullptr);

}  // namespace bntl
