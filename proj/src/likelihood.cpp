#include "bntl/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bntl {

StickWeights::StickWeights(std::vector<double> psi) : psi_(std::move(psi)) {
  if (psi_.empty() || psi_[0] != 1.0)
    throw Error(ErrorCode::domain, "stick weights must start with Psi_1 = 1");
  for (std::size_t j = 1; j < psi_.size(); ++j)
    if (!(psi_[j] > 0.0 && psi_[j] < 1.0))
      throw Error(ErrorCode::domain, "stick weights must lie in (0,1)");
}

DegreeHistogram DegreeHistogram::from_degrees(std::span<const Count> degrees) {
  std::map<Count, Count> m;
  DegreeHistogram h;
  for (Count d : degrees) {
    ++m[d];
    h.n += d;
  }
  h.k = static_cast<Count>(degrees.size());
  h.counts.assign(m.begin(), m.end());
  return h;
}

namespace {

void require_alpha(double alpha) {
  if (!(alpha < 1.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::domain, "alpha must be < 1");
}

void require_feasible(std::span<const Count> degrees,
                      std::span<const Count> times) {
  if (!validate_feasible(degrees, times))
    throw Error(ErrorCode::infeasible,
                "degrees and arrival times are not jointly feasible");
}

double log_beta_fn(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace

double log_seq_prob_given_arrivals(std::span<const Count> degrees,
                                   std::span<const Count> times, double alpha) {
  require_alpha(alpha);
  require_feasible(degrees, times);
  const auto k = degrees.size();
  Count n = 0;
  for (Count d : degrees) n += d;
  const double lg1 = log_gamma(1.0 - alpha);
  double acc = log_gamma(static_cast<double>(degrees[0]) - alpha) -
               log_gamma(static_cast<double>(n) - static_cast<double>(k) * alpha);
  for (std::size_t j = 1; j < k; ++j) {
    const double jj = static_cast<double>(j + 1);
    const double t = static_cast<double>(times[j]);
    acc += log_gamma(t - jj * alpha) +
           log_gamma(static_cast<double>(degrees[j]) - alpha) -
           log_gamma(t - 1.0 - (jj - 1.0) * alpha) - lg1;
  }
  return acc;
}

double log_seq_prob_given_arrivals(const OrderedDegrees& d,
                                   const ArrivalTimes& t, double alpha) {
  return log_seq_prob_given_arrivals(d.degrees(), t.times(), alpha);
}

double histogram_degree_term(const DegreeHistogram& hist, double alpha) {
  const double lg1 = log_gamma(1.0 - alpha);
  double acc = 0.0;
  for (const auto& [d, m] : hist.counts) {
    if (d == 1) continue;
    acc += static_cast<double>(m) *
           (log_gamma(static_cast<double>(d) - alpha) - lg1);
  }
  return acc;
}

double log_seq_prob_from_histogram(const DegreeHistogram& hist,
                                   std::span<const Count> times, double alpha) {
  // Non-arrival step i contributes (d - alpha) / (i - 1 - K_{i-1} alpha);
  // the denominators over one run between arrivals form a rising product.
  return histogram_degree_term(hist, alpha) -
         pyp_segment_term(alpha, times, hist.n);
}

double log_joint_with_psi(const OrderedDegrees& d, const ArrivalTimes& t,
                          const StickWeights& psi, double alpha,
                          const InterarrivalModel& arrivals, Count n) {
  require_alpha(alpha);
  require_feasible(d.degrees(), t.times());
  if (psi.size() != d.size())
    throw Error(ErrorCode::invalid_argument,
                "stick weights and degrees differ in length");
  if (n != d.total())
    throw Error(ErrorCode::invalid_argument, "n must equal the degree total");
  const auto degs = d.degrees();
  const auto cum = d.cumsums();
  double acc = 0.0;
  for (std::size_t j = 1; j < degs.size(); ++j) {
    const double jm1 = static_cast<double>(j);  // (j+1) - 1 in 1-based terms
    const double p = psi[j];
    acc += (static_cast<double>(degs[j]) - alpha - 1.0) * std::log(p) +
           (static_cast<double>(cum[j - 1]) - jm1 * alpha - 1.0) *
               std::log1p(-p) -
           log_beta_fn(1.0 - alpha,
                       static_cast<double>(t[j]) - 1.0 - jm1 * alpha);
  }
  return acc + log_arrival_sequence_prob(arrivals, t.times(), n);
}

LogProb log_degree_prob_given_arrivals(std::span<const Count> degrees,
                                       std::span<const Count> times,
                                       double alpha) {
  require_alpha(alpha);
  if (degrees.size() != times.size() || degrees.empty())
    throw Error(ErrorCode::invalid_argument,
                "degrees and arrival times differ in length");
  for (Count d : degrees)
    if (d < 1) throw Error(ErrorCode::malformed_input, "degrees must be >= 1");
  if (!validate_feasible(degrees, times))
    return LogProb::zero(ZeroMass::infeasible_arrivals);
  double acc = log_seq_prob_given_arrivals(degrees, times, alpha);
  Count cum = degrees[0];
  for (std::size_t j = 1; j < degrees.size(); ++j) {
    cum += degrees[j];
    const double b = log_binomial(cum - times[j], degrees[j] - 1);
    if (!std::isfinite(b)) return LogProb::zero(ZeroMass::empty_binomial);
    acc += b;
  }
  return {acc, ZeroMass::none};
}

LogProb log_degree_prob_given_arrivals(const OrderedDegrees& d,
                                       const ArrivalTimes& t, double alpha) {
  return log_degree_prob_given_arrivals(d.degrees(), t.times(), alpha);
}

double log_coupled_pyp_likelihood(const DegreeHistogram& hist, double theta,
                                  double tau) {
  if (!(tau > 0.0 && tau < 1.0) || !(theta > -tau))
    throw Error(ErrorCode::domain, "coupled pyp needs tau in (0,1), theta > -tau");
  return pyp_theta_term(theta, tau, hist.k, hist.n) +
         histogram_degree_term(hist, tau);
}

double log_full_likelihood(const OrderedDegrees& d, const ArrivalTimes& t,
                           const BntlModel& model) {
  validate(model);
  require_feasible(d.degrees(), t.times());
  if (const auto* c = std::get_if<CoupledPyp>(&model.arrivals))
    return log_coupled_pyp_likelihood(DegreeHistogram::from_degrees(d.degrees()),
                                      c->theta, model.alpha);
  return log_seq_prob_given_arrivals(d, t, model.alpha) +
         log_arrival_sequence_prob(model.arrivals, t.times(), d.total());
}

double log_full_likelihood(const EdgeEndSequence& z, const BntlModel& model) {
  const auto [d, t] = degrees_from_ends(z);
  return log_full_likelihood(d, t, model);
}

}  // namespace bntl
