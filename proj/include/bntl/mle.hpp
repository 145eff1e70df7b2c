#pragma once

// Maximum-likelihood and MAP estimation for an observed edge-end sequence,
// plus point estimators of the stick weights.

#include <optional>
#include <string>

#include "bntl/arrivals.hpp"
#include "bntl/core.hpp"
#include "bntl/likelihood.hpp"

namespace bntl {

struct AlphaSearch {
  double lower = -1000.0;   // alpha in (lower, 1 - eps)
  double eps = 1e-9;
  int grid = 1000;
};

struct AlphaFit {
  double alpha = 0.0;
  double log_likelihood = 0.0;  // sequence log-probability given T
  bool at_boundary = false;
};

/// Normal prior on alpha, used by the MAP fits.
struct AlphaPrior {
  double mean = 0.0;
  double sd = 1.0;
};

/// Maximizes the sequence log-probability given T over alpha. Throws
/// ErrorCode::unidentifiable when the likelihood does not depend on alpha
/// (every vertex has degree 1, or there is a single vertex).
AlphaFit fit_alpha(const DegreeHistogram& hist, std::span<const Count> times,
                   AlphaSearch search = {},
                   const std::optional<AlphaPrior>& prior = std::nullopt);
AlphaFit fit_alpha(const OrderedDegrees& d, const ArrivalTimes& t,
                   AlphaSearch search = {});

struct MapPriors {
  std::optional<AlphaPrior> alpha;  // flat when absent
  double beta_a = 1.0;              // beta ~ Beta(a, b)
  double beta_b = 1.0;
  double lambda_shape = 1.0;        // lambda ~ Gamma(shape, rate); rate 0 is flat
  double lambda_rate = 0.0;
  double tau_a = 1.0;               // tau ~ Beta(a, b); theta flat
  double tau_b = 1.0;

  void validate() const;
};

struct FittedModel {
  BntlModel model{0.0, Geometric{0.5}};
  double log_likelihood = 0.0;        // full log-likelihood at the estimate
  double alpha_log_likelihood = 0.0;  // uncoupled families only
  double arrival_log_likelihood = 0.0;
  bool alpha_at_boundary = false;
  bool arrivals_at_boundary = false;
  std::string note;
  double seconds = 0.0;
};

struct FitOptions {
  AlphaSearch alpha;
  double pyp_theta_max = 1e4;
  double coupled_theta_max = 1e7;
  double eps = 1e-6;
};

/// Uncoupled families: alpha and the arrival parameters separately.
/// Coupled PYP: joint maximization over (theta, tau).
FittedModel fit_model(const EdgeEndSequence& z, Family family,
                      const FitOptions& options = {});

/// Same fit from precomputed sufficient statistics. A precomputed alpha
/// fit is reused for uncoupled families when given.
FittedModel fit_model(const DegreeHistogram& hist, std::span<const Count> times,
                      Family family, const FitOptions& options = {},
                      const std::optional<AlphaFit>& alpha_fit = std::nullopt);

FittedModel fit_map(const EdgeEndSequence& z, Family family,
                    const MapPriors& priors, const FitOptions& options = {});
FittedModel fit_map(const DegreeHistogram& hist, std::span<const Count> times,
                    Family family, const MapPriors& priors,
                    const FitOptions& options = {});

enum class PsiMode { mle, map, ratio };

/// Point estimates of Psi_1..Psi_K; an entry is empty where the estimator's
/// denominator vanishes (or is negative, for the MAP form).
std::vector<std::optional<double>> psi_estimators(
    std::span<const Count> degrees, std::span<const Count> times, PsiMode mode,
    double alpha = 0.0);

}  // namespace bntl
