#include "bntl/generate.hpp"

#include <cmath>

#include "bntl/arrivals.hpp"

namespace bntl {

namespace {

// Urn state for size-biased reinforcement with discount alpha. Weight
// d_j - alpha splits into (d_j - 1), drawn by picking a uniform repeat end,
// and (1 - alpha), drawn by picking a uniform vertex.
class DiscountUrn {
 public:
  explicit DiscountUrn(Count reserve) {
    ends_.reserve(static_cast<std::size_t>(reserve));
  }

  Count vertices() const { return k_; }
  Count steps() const { return static_cast<Count>(ends_.size()); }

  void add_new() { ends_.push_back(++k_); }

  void add_existing(double alpha, Rng& rng) {
    const Count i = steps();
    const double repeats = static_cast<double>(i - k_);
    const double total = static_cast<double>(i) - static_cast<double>(k_) * alpha;
    Count v;
    if (uniform01(rng) * total < repeats) {
      std::uniform_int_distribution<std::size_t> pick(0, repeat_pos_.size() - 1);
      v = ends_[repeat_pos_[pick(rng)]];
    } else {
      std::uniform_int_distribution<Count> pick(1, k_);
      v = pick(rng);
    }
    repeat_pos_.push_back(ends_.size());
    ends_.push_back(v);
  }

  std::vector<Count> take() { return std::move(ends_); }

 private:
  std::vector<Count> ends_;
  std::vector<std::size_t> repeat_pos_;
  Count k_ = 0;
};

// Fenwick tree over non-negative weights with a lazy global scale, so that
// multiplying every existing weight by (1 - Psi) is O(1).
class ScaledCategorical {
 public:
  void push(double prob) {
    if (scale_ < 1e-150) renormalize();
    raw_.push_back(prob / scale_);
    tree_.push_back(0.0);
    const std::size_t i = tree_.size();
    // Fenwick node i covers (i - lowbit(i), i]; fill from raw values.
    double s = raw_.back();
    const std::size_t low = i & (~i + 1);
    for (std::size_t k = 1; k < low; k <<= 1) s += tree_[i - k - 1];
    tree_[i - 1] = s;
  }

  void scale_all(double factor) { scale_ *= factor; }

  // Index (0-based) drawn with probability proportional to weight.
  std::size_t draw(Rng& rng) const {
    double total = 0.0;
    for (std::size_t i = tree_.size(); i > 0; i -= i & (~i + 1))
      total += tree_[i - 1];
    double u = uniform01(rng) * total;
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 <= tree_.size()) step *= 2;
    for (; step > 0; step >>= 1) {
      if (pos + step <= tree_.size() && tree_[pos + step - 1] < u) {
        pos += step;
        u -= tree_[pos - 1];
      }
    }
    return std::min(pos, tree_.size() - 1);
  }

 private:
  void renormalize() {
    for (double& r : raw_) r *= scale_;
    scale_ = 1.0;
    tree_.assign(raw_.size(), 0.0);
    for (std::size_t i = 1; i <= raw_.size(); ++i) {
      tree_[i - 1] += raw_[i - 1];
      const std::size_t parent = i + (i & (~i + 1));
      if (parent <= raw_.size()) tree_[parent - 1] += tree_[i - 1];
    }
  }

  std::vector<double> raw_;
  std::vector<double> tree_;
  double scale_ = 1.0;
};

Count next_arrival(const InterarrivalModel& arrivals, Count k, Count t_last,
                   Count n, Rng& rng) {
  if (t_last >= n) return n + 1;
  return t_last + sample_interarrival(arrivals, k, t_last, rng, n - t_last);
}

}  // namespace

GeneratedTrace sample_predictive(const BntlModel& model, Count n, Rng& rng) {
  validate(model);
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  const auto arrivals = resolve_arrivals(model);
  DiscountUrn urn(n);
  std::vector<Count> times{1};
  urn.add_new();
  Count upcoming = next_arrival(arrivals, 1, 1, n, rng);
  for (Count step = 2; step <= n; ++step) {
    if (step == upcoming) {
      urn.add_new();
      times.push_back(step);
      upcoming = next_arrival(arrivals, urn.vertices(), step, n, rng);
    } else {
      urn.add_existing(model.alpha, rng);
    }
  }
  return {EdgeEndSequence(urn.take()), ArrivalTimes(std::move(times)),
          std::nullopt, std::nullopt};
}

GeneratedTrace sample_predictive(const BntlModel& model, Count n,
                                 std::uint64_t seed) {
  Rng rng(seed);
  auto trace = sample_predictive(model, n, rng);
  trace.seed = seed;
  return trace;
}

EdgeEndSequence sample_given_arrivals(double alpha, std::span<const Count> times,
                                      Count n, Rng& rng) {
  if (!(alpha < 1.0)) throw Error(ErrorCode::domain, "alpha must be < 1");
  if (times.empty() || times[0] != 1 || times.back() > n)
    throw Error(ErrorCode::infeasible, "arrival times incompatible with n");
  DiscountUrn urn(n);
  std::size_t next = 0;
  for (Count step = 1; step <= n; ++step) {
    if (next < times.size() && times[next] == step) {
      urn.add_new();
      ++next;
      if (next < times.size() && times[next] <= times[next - 1])
        throw Error(ErrorCode::infeasible, "arrival times not increasing");
    } else {
      urn.add_existing(alpha, rng);
    }
  }
  return EdgeEndSequence(urn.take());
}

GeneratedTrace sample_stick(const BntlModel& model, Count n, Rng& rng) {
  validate(model);
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  const auto arrivals = resolve_arrivals(model);
  const double alpha = model.alpha;
  std::vector<Count> ends;
  ends.reserve(static_cast<std::size_t>(n));
  std::vector<Count> times{1};
  std::vector<double> psi{1.0};
  ScaledCategorical table;
  table.push(1.0);
  ends.push_back(1);
  Count upcoming = next_arrival(arrivals, 1, 1, n, rng);
  for (Count step = 2; step <= n; ++step) {
    if (step == upcoming) {
      const Count j = static_cast<Count>(times.size()) + 1;
      const double p = sample_beta(
          1.0 - alpha,
          static_cast<double>(step) - 1.0 - static_cast<double>(j - 1) * alpha,
          rng);
      // P_{i,k+1} = P_{i,k} (1 - Psi_{k+1}); P_{k+1,k+1} = Psi_{k+1}
      table.scale_all(1.0 - p);
      table.push(p);
      psi.push_back(p);
      times.push_back(step);
      ends.push_back(j);
      upcoming = next_arrival(arrivals, j, step, n, rng);
    } else {
      ends.push_back(static_cast<Count>(table.draw(rng)) + 1);
    }
  }
  return {EdgeEndSequence(std::move(ends)), ArrivalTimes(std::move(times)),
          StickWeights(std::move(psi)), std::nullopt};
}

GeneratedTrace sample_stick(const BntlModel& model, Count n, std::uint64_t seed) {
  Rng rng(seed);
  auto trace = sample_stick(model, n, rng);
  trace.seed = seed;
  return trace;
}

std::vector<double> stick_probabilities(std::span<const double> psi) {
  std::vector<double> p(psi.size());
  double tail = 1.0;
  for (std::size_t j = psi.size(); j-- > 0;) {
    p[j] = psi[j] * tail;
    tail *= 1.0 - psi[j];
  }
  return p;
}

EdgeEndSequence sample_pyp_reference(double theta, double tau, Count n,
                                     Rng& rng) {
  if (!(tau > 0.0 && tau < 1.0) || !(theta > -tau))
    throw Error(ErrorCode::domain, "pyp reference needs tau in (0,1), theta > -tau");
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  DiscountUrn urn(n);
  urn.add_new();
  for (Count i = 1; i < n; ++i) {
    const double k = static_cast<double>(urn.vertices());
    const double p_new = (theta + k * tau) / (static_cast<double>(i) + theta);
    if (uniform01(rng) < p_new)
      urn.add_new();
    else
      urn.add_existing(tau, rng);
  }
  return EdgeEndSequence(urn.take());
}

EdgeEndSequence sample_ys_reference(double beta, Count n, Rng& rng) {
  if (!(beta > 0.0 && beta < 1.0))
    throw Error(ErrorCode::domain, "yule-simon beta must lie in (0,1)");
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  std::vector<Count> ends;
  ends.reserve(static_cast<std::size_t>(n));
  ends.push_back(1);
  Count k = 1;
  for (Count i = 1; i < n; ++i) {
    if (uniform01(rng) < beta) {
      ends.push_back(++k);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, ends.size() - 1);
      ends.push_back(ends[pick(rng)]);
    }
  }
  return EdgeEndSequence(std::move(ends));
}

}  // namespace bntl
