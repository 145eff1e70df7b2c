#pragma once

// Closed-form log-likelihood kernels of the BNTL sequence model.

#include <string_view>

#include "bntl/arrivals.hpp"
#include "bntl/core.hpp"

namespace bntl {

/// Stick weights Psi_1..Psi_K with Psi_1 = 1 and Psi_j in (0,1) for j >= 2.
class StickWeights {
 public:
  explicit StickWeights(std::vector<double> psi);
  std::span<const double> values() const { return psi_; }
  double operator[](std::size_t j) const { return psi_[j]; }
  Count size() const { return static_cast<Count>(psi_.size()); }

 private:
  std::vector<double> psi_;
};

enum class ZeroMass { none, infeasible_arrivals, empty_binomial };

/// Log-probability that may be -inf; a -inf value always carries a reason.
struct LogProb {
  double value = 0.0;
  ZeroMass reason = ZeroMass::none;

  bool zero_mass() const { return reason != ZeroMass::none; }
  static LogProb zero(ZeroMass why) { return {kNegInf, why}; }
};

/// Degree multiset m(d) = #{j : d_j = d}, sorted by degree.
struct DegreeHistogram {
  std::vector<std::pair<Count, Count>> counts;  // (degree, multiplicity)
  Count n = 0;
  Count k = 0;

  static DegreeHistogram from_degrees(std::span<const Count> degrees);
};

/// log P(Z | T): probability of one specific edge-end sequence consistent
/// with (d, T), term by term over vertices.
double log_seq_prob_given_arrivals(const OrderedDegrees& d,
                                   const ArrivalTimes& t, double alpha);
double log_seq_prob_given_arrivals(std::span<const Count> degrees,
                                   std::span<const Count> times, double alpha);

/// Same value from the degree histogram and one pass over arrival runs.
/// No feasibility check: the caller guarantees it.
double log_seq_prob_from_histogram(const DegreeHistogram& hist,
                                   std::span<const Count> times, double alpha);

/// Joint of the sequence and the stick weights (Psi not marginalized),
/// including the arrival factor and its censored term. `arrivals` must be
/// resolved.
double log_joint_with_psi(const OrderedDegrees& d, const ArrivalTimes& t,
                          const StickWeights& psi, double alpha,
                          const InterarrivalModel& arrivals, Count n);

/// log P(d | T): sequence probability times the number of sequences that
/// share (d, T).
LogProb log_degree_prob_given_arrivals(const OrderedDegrees& d,
                                       const ArrivalTimes& t, double alpha);
LogProb log_degree_prob_given_arrivals(std::span<const Count> degrees,
                                       std::span<const Count> times,
                                       double alpha);

/// Full likelihood of an edge-end sequence: alpha part plus arrival part.
/// Coupled models use the closed exchangeable form.
double log_full_likelihood(const OrderedDegrees& d, const ArrivalTimes& t,
                           const BntlModel& model);
double log_full_likelihood(const EdgeEndSequence& z, const BntlModel& model);

/// Coupled PYP likelihood, which depends on the data only through the
/// degree histogram, K and n.
double log_coupled_pyp_likelihood(const DegreeHistogram& hist, double theta,
                                  double tau);

/// Alpha-dependent part shared by the coupled form:
/// sum_d m(d) [log Gamma(d - alpha) - log Gamma(1 - alpha)].
double histogram_degree_term(const DegreeHistogram& hist, double alpha);

}  // namespace bntl
