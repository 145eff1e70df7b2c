#include "bntl/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bntl/diagnostics.hpp"

namespace bntl {

void ChainConfig::validate() const {
  if (iterations < 0 || burn_in < 0)
    throw Error(ErrorCode::invalid_argument, "iterations and burn-in must be >= 0");
  if (iterations > 0 && burn_in >= iterations)
    throw Error(ErrorCode::invalid_argument, "burn-in must be < iterations");
  if (thin < 1) throw Error(ErrorCode::invalid_argument, "thinning must be >= 1");
  if (swaps_per_iteration < 0)
    throw Error(ErrorCode::invalid_argument, "swap count must be >= 0");
  if (!(alpha_lo < alpha_hi) || !(alpha_hi <= 1.0) || !std::isfinite(alpha_lo))
    throw Error(ErrorCode::invalid_argument,
                "alpha prior needs finite lo < hi <= 1");
  if (!(alpha_slice.width > 0.0) || !(arrival_slice.theta.width > 0.0) ||
      !(arrival_slice.tau.width > 0.0))
    throw Error(ErrorCode::invalid_argument, "slice widths must be positive");
  arrival_prior.validate();
  if (initial_arrivals) bntl::validate(*initial_arrivals);
}

namespace {

double log_beta_pdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

InterarrivalModel default_arrivals(Family family) {
  switch (family) {
    case Family::geometric:
      return Geometric{0.5};
    case Family::shifted_poisson:
      return ShiftedPoisson{1.0};
    case Family::pyp_induced:
      return PypInduced{1.0, 0.5};
    case Family::coupled_pyp:
      return CoupledPyp{1.0};
  }
  return Geometric{0.5};
}

// Effective alpha support: the prior range, restricted to (max(0, -theta), 1)
// when alpha doubles as the coupled discount.
std::pair<double, double> alpha_support(const GibbsState& s, const ChainConfig& c) {
  double lo = c.alpha_lo, hi = c.alpha_hi;
  if (const auto* cp = std::get_if<CoupledPyp>(&s.arrivals)) {
    lo = std::max({lo, 0.0, -cp->theta});
    hi = std::min(hi, 1.0);
  }
  return {lo, hi};
}

std::vector<double> log_factorials(Count n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 2, 0.0);
  for (std::size_t k = 1; k < lf.size(); ++k)
    lf[k] = lf[k - 1] + std::log(static_cast<double>(k));
  return lf;
}

// log C(a, b) from the factorial table; -inf outside the support.
inline double table_binomial(const std::vector<double>& lf, Count a, Count b) {
  if (b < 0 || a < 0 || b > a) return kNegInf;
  return lf[static_cast<std::size_t>(a)] - lf[static_cast<std::size_t>(b)] -
         lf[static_cast<std::size_t>(a - b)];
}

// Log swap weight of placing degree x at position j: Gamma(a + x - T_j + 1) /
// Gamma(a + x - T_{j+1} + 2); -inf when the denominator argument is <= 0.
template <class LogGammaInt>
double swap_log_weight(Count a, Count x, Count t_j, Count t_next,
                       LogGammaInt&& lgi) {
  const Count num = a + x - t_j + 1;
  const Count den = a + x - t_next + 2;
  if (den <= 0 || num <= 0) return kNegInf;
  return lgi(num) - lgi(den);
}

template <class LogGammaInt>
double swap_prob_impl(Count a, Count d_j, Count d_next, Count t_j, Count t_next,
                      LogGammaInt&& lgi) {
  const double keep = swap_log_weight(a, d_j, t_j, t_next, lgi);
  const double swap = swap_log_weight(a, d_next, t_j, t_next, lgi);
  if (!std::isfinite(swap)) return 0.0;
  if (!std::isfinite(keep)) return 1.0;
  // logistic(swap - keep)
  const double z = swap - keep;
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double s_stat_or_zero(const GibbsState& s) {
  if (s.k() < 2) return 0.0;
  return s_statistic(s.degrees, s.times);
}

void check_state(const GibbsState& s, const char* where) {
  if (!s.feasible())
    throw Error(ErrorCode::invariant_violation,
                std::string("infeasible state after ") + where);
}

}  // namespace

GibbsState GibbsState::initial(const UnlabeledObservation& obs, Family family,
                               const ChainConfig& config) {
  bntl::validate(obs);
  config.validate();
  GibbsState s;
  s.n = obs.n;
  const auto k = obs.degrees.size();
  std::vector<Count> sigma(k);
  std::iota(sigma.begin(), sigma.end(), Count{1});
  std::stable_sort(sigma.begin(), sigma.end(), [&](Count a, Count b) {
    return obs.degrees[static_cast<std::size_t>(a - 1)] >
           obs.degrees[static_cast<std::size_t>(b - 1)];
  });
  std::vector<Count> degrees(k);
  for (std::size_t j = 0; j < k; ++j)
    degrees[j] = obs.degrees[static_cast<std::size_t>(sigma[j] - 1)];
  s.set_order(std::move(sigma), std::move(degrees));
  s.times.resize(k);
  std::iota(s.times.begin(), s.times.end(), Count{1});
  if (config.spread_initial_times && k > 1) {
    const auto kk = static_cast<Count>(k);
    for (std::size_t p = 1; p < k; ++p) {
      const auto j = static_cast<Count>(p);
      Count t = 1 + static_cast<Count>(std::llround(
                        static_cast<double>(j) * static_cast<double>(s.n - 1) /
                        static_cast<double>(kk - 1)));
      t = std::min({t, s.cumsum[p - 1] + 1, s.n - (kk - 1 - j)});
      s.times[p] = std::max(t, s.times[p - 1] + 1);
    }
  }
  s.histogram = DegreeHistogram::from_degrees(obs.degrees);
  s.log_factorial = log_factorials(s.n);

  s.arrivals = config.initial_arrivals.value_or(default_arrivals(family));
  if (family_of(s.arrivals) != family)
    throw Error(ErrorCode::invalid_argument,
                "initial arrival parameters do not match the family");
  s.alpha = config.initial_alpha;
  const auto [lo, hi] = alpha_support(s, config);
  if (!(s.alpha > lo && s.alpha < hi))
    s.alpha = family == Family::coupled_pyp ? 0.5 * (lo + hi)
                                            : std::clamp(0.0, lo, hi);
  if (!(s.alpha > lo && s.alpha < hi)) s.alpha = 0.5 * (lo + hi);
  return s;
}

GibbsState GibbsState::from_ordered(std::span<const Count> degrees,
                                    std::span<const Count> times, double alpha,
                                    const InterarrivalModel& arrivals) {
  if (!validate_feasible(degrees, times))
    throw Error(ErrorCode::infeasible, "ordered state is not feasible");
  if (!(alpha < 1.0)) throw Error(ErrorCode::domain, "alpha must be < 1");
  bntl::validate(arrivals);
  GibbsState s;
  std::vector<Count> sigma(degrees.size());
  std::iota(sigma.begin(), sigma.end(), Count{1});
  s.set_order(std::move(sigma), {degrees.begin(), degrees.end()});
  s.times.assign(times.begin(), times.end());
  s.n = s.cumsum.back();
  s.alpha = alpha;
  s.arrivals = arrivals;
  s.histogram = DegreeHistogram::from_degrees(degrees);
  s.log_factorial = log_factorials(s.n);
  return s;
}

void GibbsState::set_order(std::vector<Count> sigma_in,
                           std::vector<Count> degrees_in) {
  if (sigma_in.size() != degrees_in.size())
    throw Error(ErrorCode::invalid_argument, "sigma and degrees differ in length");
  sigma = std::move(sigma_in);
  degrees = std::move(degrees_in);
  cumsum.resize(degrees.size());
  std::partial_sum(degrees.begin(), degrees.end(), cumsum.begin());
}

double log_ordered_degree_joint(const GibbsState& s) {
  if (!s.feasible()) return kNegInf;
  double acc;
  if (const auto* c = std::get_if<CoupledPyp>(&s.arrivals)) {
    acc = log_coupled_pyp_likelihood(s.histogram, c->theta, s.alpha);
  } else {
    acc = log_seq_prob_from_histogram(s.histogram, s.times, s.alpha) +
          log_arrival_sequence_prob(s.arrivals, s.times, s.n);
  }
  for (std::size_t j = 1; j < s.degrees.size(); ++j)
    acc += table_binomial(s.log_factorial, s.cumsum[j] - s.times[j],
                          s.degrees[j] - 1);
  return acc;
}

double log_joint(const GibbsState& s, const ChainConfig& config) {
  const auto& p = config.arrival_prior;
  double prior = 0.0;
  if (std::holds_alternative<CoupledPyp>(s.arrivals))
    prior = -std::log(config.alpha_hi - std::max(config.alpha_lo, 0.0)) -
            std::log(p.theta_max + s.alpha);
  else
    prior = -std::log(config.alpha_hi - config.alpha_lo);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Geometric>) {
          prior += log_beta_pdf(m.beta, p.beta_a, p.beta_b);
        } else if constexpr (std::is_same_v<M, ShiftedPoisson>) {
          prior += log_gamma_pdf(m.lambda, p.lambda_shape, p.lambda_rate);
        } else if constexpr (std::is_same_v<M, PypInduced>) {
          prior += log_beta_pdf(m.tau, p.tau_a, p.tau_b) - std::log(p.theta_max + m.tau);
        }
      },
      s.arrivals);
  return log_ordered_degree_joint(s) + prior;
}

void update_psi(GibbsState& s, Rng& rng) {
  const auto k = s.degrees.size();
  s.psi.assign(k, 1.0);
  for (std::size_t j = 1; j < k; ++j) {
    const double a = static_cast<double>(s.degrees[j]) - s.alpha;
    const double b =
        static_cast<double>(s.cumsum[j - 1]) - static_cast<double>(j) * s.alpha;
    if (!(a > 0.0 && b > 0.0))
      throw Error(ErrorCode::invariant_violation,
                  "stick weight conditional has a non-positive shape");
    s.psi[j] = sample_beta(a, b, rng);
  }
}

void update_alpha(GibbsState& s, const ChainConfig& config, Rng& rng) {
  const auto [lo, hi] = alpha_support(s, config);
  if (const auto* c = std::get_if<CoupledPyp>(&s.arrivals)) {
    const double theta = c->theta;
    s.alpha = slice_sample(
        s.alpha,
        [&](double a) {
          // theta | alpha is uniform on (-alpha, theta_max)
          return log_coupled_pyp_likelihood(s.histogram, theta, a) -
                 std::log(config.arrival_prior.theta_max + a);
        },
        config.alpha_slice, lo, hi, rng);
  } else {
    s.alpha = slice_sample(
        s.alpha,
        [&](double a) { return log_seq_prob_from_histogram(s.histogram, s.times, a); },
        config.alpha_slice, lo, hi, rng);
  }
}

void update_phi(GibbsState& s, const ChainConfig& config, Rng& rng) {
  s.arrivals = posterior_update_arrival_params(s.arrivals, s.times, s.n,
                                               config.arrival_prior, rng,
                                               config.arrival_slice, s.alpha);
}

std::vector<double> arrival_time_log_weights(const GibbsState& s,
                                             std::size_t p) {
  const std::size_t k = s.degrees.size();
  if (p == 0 || p >= k)
    throw Error(ErrorCode::invalid_argument, "arrival index out of range");
  const bool last = p + 1 == k;
  const Count t_prev = s.times[p - 1];
  const Count gap = last ? s.n - t_prev : s.times[p + 1] - t_prev - 1;
  const Count m = std::min(gap, s.cumsum[p - 1] - t_prev + 1);
  if (m < 1)
    throw Error(ErrorCode::invariant_violation, "empty arrival-time support");

  const double j = static_cast<double>(p + 1);  // 1-based position
  const double alpha = s.alpha;
  // Sequence factor lgamma(t - j alpha) - lgamma(t - 1 - (j-1) alpha) and the
  // PYP arrival factors both change by simple log ratios as t grows by one.
  // In the coupled model the two cancel exactly.
  const bool coupled = std::holds_alternative<CoupledPyp>(s.arrivals);
  const auto* pyp = std::get_if<PypInduced>(&s.arrivals);
  const auto* poisson = std::get_if<ShiftedPoisson>(&s.arrivals);

  std::vector<double> w(static_cast<std::size_t>(m));
  double seq = 0.0;  // relative to t = t_prev + 1
  double arr = 0.0;
  const Count span_next = last ? 0 : s.times[p + 1] - t_prev;
  for (Count i = 0; i < m; ++i) {
    const Count t = t_prev + 1 + i;
    const double td = static_cast<double>(t);
    if (i > 0) {
      const double tp = td - 1.0;  // previous candidate
      if (!coupled)
        seq += std::log(tp - j * alpha) - std::log(tp - 1.0 - (j - 1.0) * alpha);
      if (pyp)
        arr += std::log(tp - 1.0 - (j - 1.0) * pyp->tau) - std::log(tp - j * pyp->tau);
    }
    double a = arr;
    if (poisson) {
      const Count gap_in = i + 1;
      if (!last) {
        a = -s.log_factorial[static_cast<std::size_t>(gap_in - 1)] -
            s.log_factorial[static_cast<std::size_t>(span_next - gap_in - 1)];
      } else {
        a = log_pmf(s.arrivals, static_cast<Count>(p), gap_in, t_prev) +
            log_survival(s.arrivals, s.n - t, static_cast<Count>(p + 1), t);
      }
    }
    w[static_cast<std::size_t>(i)] =
        seq + a + table_binomial(s.log_factorial, s.cumsum[p] - t, s.degrees[p] - 1);
  }
  return w;
}

void update_arrival_times(GibbsState& s, Rng& rng) {
  for (std::size_t p = 1; p < s.degrees.size(); ++p) {
    const auto w = arrival_time_log_weights(s, p);
    if (w.size() == 1) {
      s.times[p] = s.times[p - 1] + 1;
      continue;
    }
    s.times[p] = s.times[p - 1] + 1 + static_cast<Count>(sample_log_categorical(w, rng));
  }
}

double swap_probability(Count dbar_prev, Count d_j, Count d_next, Count t_j,
                        Count t_next) {
  return swap_prob_impl(dbar_prev, d_j, d_next, t_j, t_next, [](Count m) {
    return log_gamma(static_cast<double>(m));
  });
}

void update_permutation(GibbsState& s, Rng& rng, Count sweeps) {
  const std::size_t k = s.degrees.size();
  if (k < 2) return;
  std::uniform_int_distribution<std::size_t> pick(0, k - 2);
  const auto& lf = s.log_factorial;
  auto lgi = [&lf](Count m) { return lf[static_cast<std::size_t>(m - 1)]; };
  for (Count r = 0; r < sweeps; ++r) {
    const std::size_t p = pick(rng);
    const Count d_j = s.degrees[p], d_next = s.degrees[p + 1];
    if (d_j == d_next) {
      // Symmetric states: swap with probability 1/2, which only permutes ids.
      if (rng() >> 63) std::swap(s.sigma[p], s.sigma[p + 1]);
      continue;
    }
    const Count a = p == 0 ? 0 : s.cumsum[p - 1];
    const double prob = swap_prob_impl(a, d_j, d_next, s.times[p], s.times[p + 1], lgi);
    if (prob > 0.0 && uniform01(rng) < prob) {
      std::swap(s.sigma[p], s.sigma[p + 1]);
      std::swap(s.degrees[p], s.degrees[p + 1]);
      s.cumsum[p] = a + s.degrees[p];
    }
  }
}

GibbsChain::GibbsChain(const UnlabeledObservation& obs, Family family,
                       ChainConfig config)
    : config_(std::move(config)),
      family_(family),
      state_(GibbsState::initial(obs, family, config_)),
      rng_(config_.seed) {
  archive_.family = family;
  archive_.initial_sigma = state_.sigma;
}

void GibbsChain::step() {
  ++iteration_;
  const bool check = config_.check_feasibility;
  if (config_.sample_alpha) update_alpha(state_, config_, rng_);
  if (config_.sample_phi) update_phi(state_, config_, rng_);
  if (config_.sample_times) {
    update_arrival_times(state_, rng_);
    if (check) check_state(state_, "arrival-time update");
  }
  if (config_.sample_permutation) {
    const Count sweeps =
        config_.swaps_per_iteration > 0 ? config_.swaps_per_iteration : state_.k();
    update_permutation(state_, rng_, sweeps);
    if (check) check_state(state_, "permutation update");
  }
  const double lj = log_joint(state_, config_);
  if (!std::isfinite(lj))
    throw Error(ErrorCode::invariant_violation, "log-joint left the support");
  archive_.log_joint_trace.push_back(lj);
  if (iteration_ > config_.burn_in &&
      (iteration_ - config_.burn_in) % config_.thin == 0) {
    if (config_.sample_psi) update_psi(state_, rng_);
    ChainSample sample;
    sample.iteration = iteration_;
    sample.alpha = state_.alpha;
    sample.arrivals = state_.arrivals;
    sample.log_joint = lj;
    sample.s_statistic = s_stat_or_zero(state_);
    sample.times = state_.times;
    sample.sigma = state_.sigma;
    sample.psi = state_.psi;
    archive_.samples.push_back(std::move(sample));
  }
}

void GibbsChain::advance(Count count) {
  const auto start = std::chrono::steady_clock::now();
  const Count stop = std::min(config_.iterations, iteration_ + count);
  auto& trace = archive_.log_joint_trace;
  if (static_cast<std::size_t>(stop) > trace.capacity())
    trace.reserve(std::max(static_cast<std::size_t>(stop), 2 * trace.capacity()));
  while (iteration_ < stop) step();
  archive_.seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void GibbsChain::run() { advance(config_.iterations - iteration_); }

namespace {

constexpr const char* kCheckpointMagic = "bntl-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double read_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw Error(ErrorCode::io, "truncated checkpoint");
  char* end = nullptr;
  const double x = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw Error(ErrorCode::io, "bad number in checkpoint: " + tok);
  return x;
}

Count read_count(std::istream& in) {
  Count x;
  if (!(in >> x)) throw Error(ErrorCode::io, "truncated checkpoint");
  return x;
}

template <class T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  out << v.size();
  for (const auto& x : v) {
    if constexpr (std::is_floating_point_v<T>)
      out << ' ' << hex(x);
    else
      out << ' ' << x;
  }
  out << '\n';
}

template <class T>
std::vector<T> read_vec(std::istream& in) {
  const Count size = read_count(in);
  if (size < 0) throw Error(ErrorCode::io, "bad vector length in checkpoint");
  std::vector<T> v(static_cast<std::size_t>(size));
  for (auto& x : v) {
    if constexpr (std::is_floating_point_v<T>)
      x = read_double(in);
    else
      x = read_count(in);
  }
  return v;
}

void write_arrivals(std::ostream& out, const InterarrivalModel& m) {
  std::visit(
      [&](const auto& a) {
        using M = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<M, Geometric>)
          out << hex(a.beta) << ' ' << hex(0.0);
        else if constexpr (std::is_same_v<M, ShiftedPoisson>)
          out << hex(a.lambda) << ' ' << hex(0.0);
        else if constexpr (std::is_same_v<M, PypInduced>)
          out << hex(a.theta) << ' ' << hex(a.tau);
        else
          out << hex(a.theta) << ' ' << hex(0.0);
      },
      m);
}

InterarrivalModel read_arrivals(std::istream& in, Family family) {
  const double x = read_double(in);
  const double y = read_double(in);
  switch (family) {
    case Family::geometric:
      return Geometric{x};
    case Family::shifted_poisson:
      return ShiftedPoisson{x};
    case Family::pyp_induced:
      return PypInduced{x, y};
    case Family::coupled_pyp:
      return CoupledPyp{x};
  }
  return Geometric{x};
}

}  // namespace

void GibbsChain::save_checkpoint(std::ostream& out) const {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << to_string(family_) << ' ' << iteration_ << ' ' << state_.n << ' '
      << hex(archive_.seconds) << '\n';
  out << hex(state_.alpha) << ' ';
  write_arrivals(out, state_.arrivals);
  out << '\n';
  write_vec(out, state_.sigma);
  write_vec(out, state_.degrees);
  write_vec(out, state_.times);
  write_vec(out, state_.psi);
  out << rng_ << '\n';
  write_vec(out, archive_.log_joint_trace);
  out << archive_.samples.size() << '\n';
  for (const auto& s : archive_.samples) {
    out << s.iteration << ' ' << hex(s.alpha) << ' ';
    write_arrivals(out, s.arrivals);
    out << ' ' << hex(s.log_joint) << ' ' << hex(s.s_statistic) << '\n';
    write_vec(out, s.times);
    write_vec(out, s.sigma);
    write_vec(out, s.psi);
  }
  if (!out) throw Error(ErrorCode::io, "failed to write checkpoint");
}

void GibbsChain::load_checkpoint(std::istream& in) {
  std::string magic, family;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic)
    throw Error(ErrorCode::io, "not a chain checkpoint");
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::io, "unsupported checkpoint version");
  in >> family;
  if (parse_family(family) != family_)
    throw Error(ErrorCode::invalid_argument, "checkpoint family mismatch");
  const Count iteration = read_count(in);
  const Count n = read_count(in);
  if (n != state_.n)
    throw Error(ErrorCode::invalid_argument, "checkpoint is for different data");
  const double seconds = read_double(in);
  GibbsState s = state_;
  s.alpha = read_double(in);
  s.arrivals = read_arrivals(in, family_);
  auto sigma = read_vec<Count>(in);
  auto degrees = read_vec<Count>(in);
  s.set_order(std::move(sigma), std::move(degrees));
  s.times = read_vec<Count>(in);
  s.psi = read_vec<double>(in);
  if (DegreeHistogram::from_degrees(s.degrees).counts != state_.histogram.counts)
    throw Error(ErrorCode::invalid_argument, "checkpoint is for different data");
  if (!s.feasible())
    throw Error(ErrorCode::invariant_violation, "checkpoint state is infeasible");
  Rng rng;
  if (!(in >> rng)) throw Error(ErrorCode::io, "bad RNG state in checkpoint");
  ChainArchive archive;
  archive.family = family_;
  archive.initial_sigma = archive_.initial_sigma;
  archive.seconds = seconds;
  archive.log_joint_trace = read_vec<double>(in);
  const Count count = read_count(in);
  for (Count i = 0; i < count; ++i) {
    ChainSample c;
    c.iteration = read_count(in);
    c.alpha = read_double(in);
    c.arrivals = read_arrivals(in, family_);
    c.log_joint = read_double(in);
    c.s_statistic = read_double(in);
    c.times = read_vec<Count>(in);
    c.sigma = read_vec<Count>(in);
    c.psi = read_vec<double>(in);
    archive.samples.push_back(std::move(c));
  }
  state_ = std::move(s);
  rng_ = rng;
  iteration_ = iteration;
  archive_ = std::move(archive);
}

ChainArchive run_chain(const UnlabeledObservation& obs, Family family,
                       const ChainConfig& config) {
  GibbsChain chain(obs, family, config);
  chain.run();
  return std::move(chain.archive());
}

}  // namespace bntl
