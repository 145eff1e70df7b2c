#pragma once

// Forward samplers: the predictive urn, the stick-breaking construction and
// reference urns for the Pitman-Yor and Yule-Simon processes.

#include <optional>

#include "bntl/core.hpp"
#include "bntl/likelihood.hpp"

namespace bntl {

struct GeneratedTrace {
  EdgeEndSequence ends;
  ArrivalTimes arrivals;
  std::optional<StickWeights> psi;  // present iff the stick sampler ran
  std::optional<std::uint64_t> seed;
};

/// Sequential predictive rule: arrivals drawn lazily from the interarrival
/// law, otherwise vertex j is chosen with probability
/// (d_j - alpha) / (i - K alpha).
GeneratedTrace sample_predictive(const BntlModel& model, Count n, Rng& rng);
GeneratedTrace sample_predictive(const BntlModel& model, Count n,
                                 std::uint64_t seed);

/// Predictive rule with the arrival times held fixed.
EdgeEndSequence sample_given_arrivals(double alpha, std::span<const Count> times,
                                      Count n, Rng& rng);

/// Stick-breaking representation: Psi_j ~ Beta(1 - alpha, T_j - 1 - (j-1) alpha),
/// Z ~ Categorical(P_{., K}) between arrivals.
GeneratedTrace sample_stick(const BntlModel& model, Count n, Rng& rng);
GeneratedTrace sample_stick(const BntlModel& model, Count n, std::uint64_t seed);

/// Categorical weights P_{j,K} = Psi_j prod_{l=j+1}^{K} (1 - Psi_l).
std::vector<double> stick_probabilities(std::span<const double> psi);

/// Pitman-Yor urn with concentration theta and discount tau.
EdgeEndSequence sample_pyp_reference(double theta, double tau, Count n,
                                     Rng& rng);

/// Yule-Simon urn: new vertex with probability beta, otherwise an existing
/// vertex proportionally to its degree.
EdgeEndSequence sample_ys_reference(double beta, Count n, Rng& rng);

}  // namespace bntl
