#pragma once

// Evaluation quantities: predictive log-likelihood, the S statistic,
// plug-in power-law exponents, interarrival summaries and ESS.

#include <optional>
#include <string>

#include "bntl/core.hpp"
#include "bntl/likelihood.hpp"

namespace bntl {

struct ChainArchive;

/// log p(test | train) at fixed parameters, computed as the difference of
/// full log-likelihoods of train+test and train. `test` continues the
/// first-appearance labeling of `train`.
double predictive_loglik(const BntlModel& model, const EdgeEndSequence& train,
                         std::span<const Count> test);

/// log p(test | state) by running the predictive rule forward from a state
/// summarized by per-vertex degrees, K = degrees.size() and the last arrival
/// time. New vertices in `test` must take ids K+1, K+2, ... in order.
/// `arrivals` must be resolved.
double continuation_log_prob(double alpha, const InterarrivalModel& arrivals,
                             std::vector<Count> degrees, Count last_arrival,
                             Count n, std::span<const Count> test);

/// Posterior predictive: log-mean-exp over archived samples of the
/// per-sample continuation probability. `degrees` are the observed
/// per-vertex degrees indexed by external id.
double predictive_loglik(const ChainArchive& archive,
                         std::span<const Count> degrees,
                         std::span<const Count> test);

/// Plug-in variant: continuation at the posterior-mean parameters and the
/// posterior-median last arrival time.
double predictive_loglik_plugin(const ChainArchive& archive,
                                std::span<const Count> degrees,
                                std::span<const Count> test);

/// (1/(K-1)) sum_{j>=2} (dbar_{j-1} - T_j).
double s_statistic(std::span<const Count> degrees, std::span<const Count> times);

struct EtaEstimate {
  std::optional<double> value;
  std::string note;
};

/// Plug-in power-law exponent of the asymptotic degree distribution.
EtaEstimate eta_plugin(const BntlModel& model);

/// (T_K - T_1) / (K - 1).
double mean_interarrival(std::span<const Count> times);

DegreeHistogram degree_histogram(std::span<const Count> degrees);

/// (T_j, j) for j = 1..K: the vertex count as a step function of n.
std::vector<std::pair<Count, Count>> arrival_curve(std::span<const Count> times);

struct EssResult {
  double factor = 0.0;      // ESS / N, in [0, 1]
  bool degenerate = false;  // constant trace
  Count lags = 0;           // autocorrelation lags used
};

/// ESS/N from Geyer's initial positive sequence estimator.
EssResult ess_factor(std::span<const double> trace);

/// log of the normalized L1 distance between two degree sequences in
/// arrival order, floored at 1/(4n) so identical sequences stay finite.
double log_l1_distance(std::span<const Count> a, std::span<const Count> b,
                       Count n);

}  // namespace bntl
