#include "bntl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bntl/arrivals.hpp"
#include "bntl/gibbs.hpp"

namespace bntl {

double predictive_loglik(const BntlModel& model, const EdgeEndSequence& train,
                         std::span<const Count> test) {
  if (test.empty()) return 0.0;
  std::vector<Count> all(train.ends().begin(), train.ends().end());
  all.insert(all.end(), test.begin(), test.end());
  std::optional<EdgeEndSequence> joined;
  try {
    joined.emplace(std::move(all));
  } catch (const Error&) {
    throw Error(ErrorCode::malformed_input,
                "test ends do not continue the training labeling");
  }
  return log_full_likelihood(*joined, model) - log_full_likelihood(train, model);
}

double continuation_log_prob(double alpha, const InterarrivalModel& arrivals,
                             std::vector<Count> degrees, Count last_arrival,
                             Count n, std::span<const Count> test) {
  if (!(alpha < 1.0)) throw Error(ErrorCode::domain, "alpha must be < 1");
  if (degrees.empty() || last_arrival < 1 || last_arrival > n)
    throw Error(ErrorCode::invalid_argument, "bad continuation state");
  Count k = static_cast<Count>(degrees.size());
  Count t_last = last_arrival;
  double acc = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Count step = n + 1 + static_cast<Count>(i);
    const Count s = step - t_last;
    // hazard of an arrival exactly now, given none since t_last
    const double log_hazard =
        log_pmf(arrivals, k, s, t_last) - log_survival(arrivals, s - 1, k, t_last);
    const Count z = test[i];
    if (z == k + 1) {
      acc += log_hazard;
      degrees.push_back(1);
      ++k;
      t_last = step;
    } else if (z >= 1 && z <= k) {
      const double no_arrival =
          log_hazard < 0.0 ? std::log(-std::expm1(log_hazard)) : kNegInf;
      const double denom = static_cast<double>(step - 1) - static_cast<double>(k) * alpha;
      acc += no_arrival +
             std::log((static_cast<double>(degrees[static_cast<std::size_t>(z - 1)]) -
                       alpha) /
                      denom);
      ++degrees[static_cast<std::size_t>(z - 1)];
    } else {
      throw Error(ErrorCode::malformed_input,
                  "test ends do not continue the training labeling");
    }
  }
  return acc;
}

namespace {

InterarrivalModel resolved(const InterarrivalModel& m, double alpha) {
  return resolve_arrivals(BntlModel{alpha, m});
}

Count total(std::span<const Count> degrees) {
  return std::accumulate(degrees.begin(), degrees.end(), Count{0});
}

}  // namespace

double predictive_loglik(const ChainArchive& archive,
                         std::span<const Count> degrees,
                         std::span<const Count> test) {
  if (archive.samples.empty())
    throw Error(ErrorCode::insufficient_data, "archive holds no samples");
  if (test.empty()) return 0.0;
  const Count n = total(degrees);
  std::vector<double> per_sample;
  per_sample.reserve(archive.samples.size());
  for (const auto& s : archive.samples)
    per_sample.push_back(continuation_log_prob(
        s.alpha, resolved(s.arrivals, s.alpha), {degrees.begin(), degrees.end()},
        s.times.back(), n, test));
  return log_mean_exp(per_sample);
}

double predictive_loglik_plugin(const ChainArchive& archive,
                                std::span<const Count> degrees,
                                std::span<const Count> test) {
  if (archive.samples.empty())
    throw Error(ErrorCode::insufficient_data, "archive holds no samples");
  if (test.empty()) return 0.0;
  const double m = static_cast<double>(archive.samples.size());
  double alpha = 0.0, p0 = 0.0, p1 = 0.0;
  std::vector<Count> last;
  for (const auto& s : archive.samples) {
    alpha += s.alpha / m;
    last.push_back(s.times.back());
    std::visit(
        [&](const auto& a) {
          using M = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<M, Geometric>)
            p0 += a.beta / m;
          else if constexpr (std::is_same_v<M, ShiftedPoisson>)
            p0 += a.lambda / m;
          else if constexpr (std::is_same_v<M, PypInduced>)
            p0 += a.theta / m, p1 += a.tau / m;
          else
            p0 += a.theta / m;
        },
        s.arrivals);
  }
  std::nth_element(last.begin(), last.begin() + static_cast<long>(last.size() / 2),
                   last.end());
  const Count t_last = last[last.size() / 2];
  InterarrivalModel mean;
  switch (archive.family) {
    case Family::geometric:
      mean = Geometric{p0};
      break;
    case Family::shifted_poisson:
      mean = ShiftedPoisson{p0};
      break;
    case Family::pyp_induced:
      mean = PypInduced{p0, p1};
      break;
    case Family::coupled_pyp:
      mean = CoupledPyp{p0};
      break;
  }
  return continuation_log_prob(alpha, resolved(mean, alpha),
                               {degrees.begin(), degrees.end()}, t_last,
                               total(degrees), test);
}

double s_statistic(std::span<const Count> degrees, std::span<const Count> times) {
  if (degrees.size() != times.size())
    throw Error(ErrorCode::invalid_argument, "degrees and times differ in length");
  if (degrees.size() < 2)
    throw Error(ErrorCode::insufficient_data, "S statistic needs K >= 2");
  double acc = 0.0;
  Count dbar = 0;
  for (std::size_t j = 1; j < degrees.size(); ++j) {
    dbar += degrees[j - 1];
    acc += static_cast<double>(dbar - times[j]);
  }
  return acc / static_cast<double>(degrees.size() - 1);
}

EtaEstimate eta_plugin(const BntlModel& model) {
  validate(model);
  return std::visit(
      [&](const auto& a) -> EtaEstimate {
        using M = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<M, CoupledPyp>) {
          return {1.0 + model.alpha, "coupled: eta = 1 + tau"};
        } else if constexpr (std::is_same_v<M, PypInduced>) {
          return {std::nullopt,
                  "asymptotic degree distribution of the uncoupled PYP model "
                  "is unknown"};
        } else {
          double mu;
          if constexpr (std::is_same_v<M, Geometric>)
            mu = 1.0 / a.beta;
          else
            mu = 1.0 + a.lambda;  // support starts at 1
          if (!(mu > 1.0))
            throw Error(ErrorCode::domain,
                        "mean interarrival <= 1: every step is an arrival");
          return {1.0 + (mu - model.alpha) / (mu - 1.0),
                  "eta = 1 + (mu - alpha) / (mu - 1)"};
        }
      },
      model.arrivals);
}

double mean_interarrival(std::span<const Count> times) {
  if (times.size() < 2)
    throw Error(ErrorCode::insufficient_data, "mean interarrival needs K >= 2");
  return static_cast<double>(times.back() - times.front()) /
         static_cast<double>(times.size() - 1);
}

DegreeHistogram degree_histogram(std::span<const Count> degrees) {
  return DegreeHistogram::from_degrees(degrees);
}

std::vector<std::pair<Count, Count>> arrival_curve(std::span<const Count> times) {
  std::vector<std::pair<Count, Count>> out;
  out.reserve(times.size());
  for (std::size_t j = 0; j < times.size(); ++j)
    out.emplace_back(times[j], static_cast<Count>(j + 1));
  return out;
}

EssResult ess_factor(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 10)
    throw Error(ErrorCode::insufficient_data, "ESS needs a trace of length >= 10");
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) /
                      static_cast<double>(n);
  std::vector<double> c(trace.begin(), trace.end());
  for (double& x : c) x -= mean;
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0) || c0 <= 1e-300) return {0.0, true, 0};
  // tau = -1 + 2 sum_m Gamma_m with Gamma_m = rho_{2m} + rho_{2m+1}, summed
  // while positive.
  double tau = -1.0;
  std::size_t m = 0;
  for (; 2 * m + 1 < n; ++m) {
    const double g = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (!(g > 0.0)) break;
    tau += 2.0 * g;
  }
  const double factor = tau > 0.0 ? std::min(1.0, 1.0 / tau) : 1.0;
  return {factor, false, static_cast<Count>(2 * m)};
}

double log_l1_distance(std::span<const Count> a, std::span<const Count> b,
                       Count n) {
  if (a.size() != b.size())
    throw Error(ErrorCode::invalid_argument, "degree sequences differ in length");
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  Count l1 = 0;
  for (std::size_t j = 0; j < a.size(); ++j) l1 += std::llabs(a[j] - b[j]);
  const double nd = static_cast<double>(n);
  return std::log(std::max(static_cast<double>(l1) / (2.0 * nd), 1.0 / (4.0 * nd)));
}

}  // namespace bntl
