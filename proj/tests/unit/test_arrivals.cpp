#include "doctest.h"

#include <cmath>

#include "bntl/arrivals.hpp"
#include "bntl/generate.hpp"
#include "oracles.hpp"

using namespace bntl;
using doctest::Approx;

namespace {

const std::vector<InterarrivalModel> kModels{
    Geometric{0.25}, Geometric{0.9}, ShiftedPoisson{0.7}, ShiftedPoisson{6.5},
    PypInduced{1.0, 0.5}, PypInduced{-0.3, 0.75}, PypInduced{20.0, 0.1}};

}  // namespace

TEST_CASE("pmf values") {
  const InterarrivalModel pyp = PypInduced{1.0, 0.5};
  CHECK(log_pmf(pyp, 1, 1, 1) == Approx(std::log(0.75)).epsilon(1e-14));
  CHECK(log_pmf(pyp, 1, 2, 1) == Approx(std::log(0.125)).epsilon(1e-14));
  CHECK(log_pmf(Geometric{0.25}, 1, 3, 1) == Approx(std::log(0.140625)).epsilon(1e-14));
}

TEST_CASE("survival values") {
  CHECK(log_survival(Geometric{0.25}, 3, 1, 1) == Approx(std::log(0.421875)).epsilon(1e-14));
  for (const auto& m : kModels) CHECK(log_survival(m, 0, 1, 1) == 0.0);
  CHECK(log_survival(PypInduced{1.0, 0.5}, 1, 1, 1) == Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("pmf plus survival sums to one") {
  for (const auto& m : kModels) {
    for (Count existing : {1, 3}) {
      const Count t_prev = existing + 2;
      double total = 0.0;
      for (Count s = 1; s <= 1000; ++s) total += std::exp(log_pmf(m, existing, s, t_prev));
      total += std::exp(log_survival(m, 1000, existing, t_prev));
      CHECK(total == Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("survival equals the summed upper tail") {
  for (const auto& m : kModels) {
    for (Count s = 0; s <= 50; ++s) {
      double tail = 0.0;
      for (Count u = s + 1; u <= s + 5000; ++u) tail += std::exp(log_pmf(m, 2, u, 4));
      tail += std::exp(log_survival(m, s + 5000, 2, 4));
      CHECK(std::exp(log_survival(m, s, 2, 4)) == Approx(tail).epsilon(1e-9));
    }
  }
}

TEST_CASE("geometric survival is memoryless") {
  const InterarrivalModel g = Geometric{0.3};
  for (Count s = 0; s < 30; ++s)
    CHECK(log_survival(g, s, 1, 1) ==
          Approx(static_cast<double>(s) * log_survival(g, 1, 1, 1)).epsilon(1e-12));
}

TEST_CASE("pyp pmf matches the urn step by step") {
  for (double theta : {-0.2, 0.5, 3.0}) {
    for (double tau : {0.25, 0.6, 0.9}) {
      if (!(theta > -tau)) continue;
      const auto hazard = oracle::pyp_hazard(theta, tau);
      const InterarrivalModel m = PypInduced{theta, tau};
      for (Count j : {1, 2, 4}) {
        for (Count t_prev : {j, j + 3}) {
          double log_surv = 0.0;
          for (Count s = 1; s <= 20; ++s) {
            const double h = hazard(t_prev + s, j, t_prev);
            CHECK(log_pmf(m, j, s, t_prev) == Approx(log_surv + std::log(h)).epsilon(1e-11));
            log_surv += std::log1p(-h);
            CHECK(log_survival(m, s, j, t_prev) == Approx(log_surv).epsilon(1e-11));
          }
        }
      }
    }
  }
}

TEST_CASE("pyp state checks") {
  const InterarrivalModel m = PypInduced{1.0, 0.9};
  CHECK_THROWS_AS(log_pmf(m, 0, 1, 1), Error);
  CHECK_THROWS_AS(log_pmf(CoupledPyp{1.0}, 1, 1, 1), Error);
}

TEST_CASE("sampled interarrivals") {
  Rng rng(11);
  const int draws = 100000;
  {
    const double beta = 0.25;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += static_cast<double>(sample_interarrival(Geometric{beta}, 1, 1, rng));
    const double se = std::sqrt((1.0 - beta) / (beta * beta) / draws);
    CHECK(std::abs(sum / draws - 1.0 / beta) < 3.0 * se);
  }
  {
    const double lambda = 2.5;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += static_cast<double>(sample_interarrival(ShiftedPoisson{lambda}, 1, 1, rng));
    const double se = std::sqrt(lambda / draws);
    CHECK(std::abs(sum / draws - (1.0 + lambda)) < 3.0 * se);
  }
  {
    const InterarrivalModel m = PypInduced{1.0, 0.5};
    std::array<int, 4> hits{};
    for (int i = 0; i < draws; ++i) {
      const Count s = sample_interarrival(m, 2, 3, rng);
      if (s <= 3) ++hits[static_cast<std::size_t>(s)];
    }
    for (Count s = 1; s <= 3; ++s) {
      const double p = std::exp(log_pmf(m, 2, s, 3));
      const double se = std::sqrt(p * (1 - p) / draws);
      CHECK(std::abs(hits[static_cast<std::size_t>(s)] / double(draws) - p) < 3.0 * se);
    }
  }
}

TEST_CASE("limit caps report beyond-limit draws") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Count s = sample_interarrival(Geometric{0.01}, 1, 1, rng, 5);
    CHECK(s >= 1);
    CHECK(s <= 6);
  }
}

TEST_CASE("arrival sequence probability") {
  const std::vector<Count> t{1, 2, 4};
  CHECK(log_arrival_sequence_prob(Geometric{0.5}, t, 6) == Approx(std::log(0.03125)).epsilon(1e-14));
  for (const auto& m : kModels)
    CHECK(log_arrival_sequence_prob(m, std::vector<Count>{1}, 1) == 0.0);
  CHECK(log_arrival_sequence_prob(PypInduced{1.0, 0.5}, std::vector<Count>{1, 2}, 2) ==
        Approx(std::log(0.75)).epsilon(1e-14));
  CHECK_THROWS_AS(log_arrival_sequence_prob(Geometric{0.5}, std::vector<Count>{1, 3}, 2), Error);
}

TEST_CASE("closed forms agree with the term-by-term evaluation") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Count n = 50 + static_cast<Count>(rng() % 400);
    std::vector<Count> t{1};
    while (true) {
      const Count next = t.back() + 1 + static_cast<Count>(rng() % 6);
      if (next > n) break;
      t.push_back(next);
    }
    for (const auto& m : kModels)
      CHECK(log_arrival_sequence_prob(m, t, n) ==
            Approx(log_arrival_sequence_prob_by_terms(m, t, n)).epsilon(1e-10));
  }
}

TEST_CASE("long pyp products use the same value") {
  // K > 64 switches pyp_theta_term to its log-gamma form.
  std::vector<Count> t;
  for (Count j = 1; j <= 300; ++j) t.push_back(2 * j - 1);
  for (const auto& m : {PypInduced{1.0, 0.5}, PypInduced{40.0, 0.05}, PypInduced{-0.2, 0.3}}) {
    CHECK(log_arrival_sequence_prob(m, t, 700) ==
          Approx(log_arrival_sequence_prob_by_terms(m, t, 700)).epsilon(1e-10));
  }
}

TEST_CASE("geometric posterior update is the conjugate Beta draw") {
  Rng rng(17);
  const std::vector<Count> t{1, 3, 4, 8};  // K = 4
  const int draws = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double b =
        std::get<Geometric>(posterior_update_arrival_params(Geometric{0.5}, t, 10, {}, rng)).beta;
    sum += b;
    sq += b * b;
  }
  const double mean = 4.0 / 11.0;
  const double var = 4.0 * 7.0 / (11.0 * 11.0 * 12.0);
  CHECK(std::abs(sum / draws - mean) < 3.0 * std::sqrt(var / draws));
  CHECK(sq / draws - (sum / draws) * (sum / draws) == Approx(var).epsilon(0.03));

  // every step an arrival: Beta(K, 1)
  const std::vector<Count> all{1, 2, 3, 4, 5};
  double s2 = 0.0;
  for (int i = 0; i < 20000; ++i)
    s2 += std::get<Geometric>(posterior_update_arrival_params(Geometric{0.5}, all, 5, {}, rng)).beta;
  CHECK(s2 / 20000 == Approx(5.0 / 6.0).epsilon(0.01));
}

TEST_CASE("truncated poisson draws") {
  Rng rng(23);
  const double lambda = 1.5;
  for (Count m : {0, 2, 7}) {
    // exact conditional mean E[X | X >= m]
    double num = 0.0, den = 0.0, p = std::exp(-lambda);
    for (Count x = 0; x < 200; ++x) {
      if (x >= m) num += static_cast<double>(x) * p, den += p;
      p *= lambda / static_cast<double>(x + 1);
    }
    double sum = 0.0;
    for (int i = 0; i < 50000; ++i) {
      const Count x = sample_truncated_poisson(lambda, m, rng);
      CHECK_MESSAGE(x >= m, "draw below the truncation point");
      sum += static_cast<double>(x);
    }
    CHECK(sum / 50000 == Approx(num / den).epsilon(0.02));
  }
}

TEST_CASE("poisson augmentation targets the censored posterior") {
  // Exact posterior mean of lambda under a Gamma(1,1) prior by quadrature,
  // against the long-run average of the augmented update.
  const std::vector<Count> t{1, 3, 4, 7};
  const Count n = 12;
  const InterarrivalModel start = ShiftedPoisson{1.0};
  double num = 0.0, den = 0.0;
  for (int i = 1; i < 200000; ++i) {
    const double l = i * 1e-4;
    const double w = std::exp(log_arrival_sequence_prob(ShiftedPoisson{l}, t, n) - l);
    num += l * w;
    den += w;
  }
  Rng rng(29);
  InterarrivalModel cur = start;
  double sum = 0.0;
  const int iters = 200000;
  for (int i = 0; i < iters; ++i) {
    cur = posterior_update_arrival_params(cur, t, n, {}, rng);
    sum += std::get<ShiftedPoisson>(cur).lambda;
  }
  CHECK(sum / iters == Approx(num / den).epsilon(0.01));
}

TEST_CASE("pyp posterior update concentrates near the generating values") {
  Rng rng(31);
  const Count n = 10000;
  const auto z = sample_pyp_reference(1.0, 0.75, n, rng);
  const auto [d, t] = degrees_from_ends(z);
  InterarrivalModel cur = PypInduced{1.0, 0.5};
  double th = 0.0, ta = 0.0;
  const int burn = 200, iters = 1500;
  for (int i = 0; i < burn + iters; ++i) {
    cur = posterior_update_arrival_params(cur, t.times(), n, {}, rng);
    if (i >= burn) {
      th += std::get<PypInduced>(cur).theta / iters;
      ta += std::get<PypInduced>(cur).tau / iters;
    }
  }
  CHECK(std::abs(ta - 0.75) < 0.1);
  CHECK(std::abs(th - 1.0) < 1.5);
}

TEST_CASE("arrival-parameter closed forms") {
  const std::vector<Count> t{1, 3, 4, 8};  // K = 4, n = 10
  auto g = fit_arrivals_mle(Family::geometric, t, 10);
  CHECK(std::get<Geometric>(g.model).beta == 0.5);
  auto p = fit_arrivals_mle(Family::shifted_poisson, t, 10);
  CHECK(std::get<ShiftedPoisson>(p.model).lambda == 2.0);
  CHECK_THROWS_AS(fit_arrivals_mle(Family::geometric, std::vector<Count>{1}, 4), Error);
  auto all = fit_arrivals_mle(Family::geometric, std::vector<Count>{1, 2, 3}, 3);
  CHECK(all.at_boundary);
}

TEST_CASE("poisson closed form is stationary without censoring slack") {
  const std::vector<Count> t{1, 3, 4, 10};  // T_K = n
  const Count n = 10;
  const double l = std::get<ShiftedPoisson>(fit_arrivals_mle(Family::shifted_poisson, t, n).model).lambda;
  const double h = 1e-5;
  const double slope = (log_arrival_sequence_prob(ShiftedPoisson{l + h}, t, n) -
                        log_arrival_sequence_prob(ShiftedPoisson{l - h}, t, n)) / (2 * h);
  CHECK(std::abs(slope) < 1e-6);
}

TEST_CASE("geometric closed form is the odds of the censored-likelihood maximizer") {
  const std::vector<Count> t{1, 3, 4, 8};
  const Count n = 10, k = 4;
  const double b = static_cast<double>(k - 1) / static_cast<double>(n - 1);
  const double h = 1e-6;
  const double slope = (log_arrival_sequence_prob(Geometric{b + h}, t, n) -
                        log_arrival_sequence_prob(Geometric{b - h}, t, n)) / (2 * h);
  CHECK(std::abs(slope) < 1e-6);
  const double closed = std::get<Geometric>(fit_arrivals_mle(Family::geometric, t, n).model).beta;
  CHECK(closed == Approx(b / (1.0 - b)).epsilon(1e-14));
}

TEST_CASE("pyp fit recovers tau and beats a grid") {
  Rng rng(41);
  const Count n = 100000;
  const auto z = sample_pyp_reference(1.0, 0.75, n, rng);
  const auto [d, t] = degrees_from_ends(z);
  const auto fit = fit_arrivals_mle(Family::pyp_induced, t.times(), n);
  const auto m = std::get<PypInduced>(fit.model);
  CHECK(std::abs(m.tau - 0.75) < 0.05);
  double grid_best = kNegInf;
  for (int i = 0; i < 100; ++i) {
    const double tau = 0.005 + 0.99 * i / 99.0;
    for (int j = 0; j < 100; ++j) {
      const double theta = -tau + 1e-3 + (20.0 + tau) * j / 99.0;
      grid_best = std::max(grid_best, log_arrival_sequence_prob(PypInduced{theta, tau}, t.times(), n));
    }
  }
  CHECK(fit.log_likelihood >= grid_best - 1e-9);
}
