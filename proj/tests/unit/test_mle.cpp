#include "doctest.h"

#include <cmath>

#include "bntl/generate.hpp"
#include "bntl/mle.hpp"

using namespace bntl;
using doctest::Approx;
using V = std::vector<Count>;

namespace {

// Per-vertex transcription of the sequence log-probability given T.
double direct_loglik(const V& d, const V& t, double a) {
  double acc = 0.0;
  for (Count x : d)
    for (Count k = 1; k < x; ++k) acc += std::log(static_cast<double>(k) - a);
  Count n = 0;
  for (Count x : d) n += x;
  std::size_t k = 1;
  for (Count i = 2; i <= n; ++i) {
    if (k < t.size() && t[k] == i) {
      ++k;
      continue;
    }
    acc -= std::log(static_cast<double>(i - 1) - static_cast<double>(k) * a);
  }
  return acc;
}

std::pair<V, V> stats(const EdgeEndSequence& z) {
  const auto [d, t] = degrees_from_ends(z);
  return {V(d.degrees().begin(), d.degrees().end()), V(t.times().begin(), t.times().end())};
}

std::optional<ErrorCode> code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("discount estimate agrees with a dense grid") {
  for (auto [alpha, seed] : {std::pair{0.3, 1}, {-1.0, 2}, {0.7, 3}}) {
    const auto tr = sample_predictive(BntlModel{alpha, Geometric{0.3}}, 200, static_cast<std::uint64_t>(seed));
    const auto [d, t] = stats(tr.ends);
    const auto fit = fit_alpha(OrderedDegrees(d), ArrivalTimes(t));
    double best = -INFINITY, arg = 0.0;
    const int grid = 100000;
    for (int i = 1; i < grid; ++i) {
      const double a = -5.0 + 6.0 * i / grid;
      const double v = direct_loglik(d, t, a);
      if (v > best) best = v, arg = a;
    }
    REQUIRE(arg > -4.9);
    CHECK(std::abs(fit.alpha - arg) < 1e-4);
    CHECK(fit.log_likelihood >= best - 1e-9);
    CHECK(fit.log_likelihood == Approx(direct_loglik(d, t, fit.alpha)).epsilon(1e-10));
    CHECK_FALSE(fit.at_boundary);
  }
}

TEST_CASE("unidentifiable discount") {
  CHECK(code_of([] { fit_alpha(OrderedDegrees({1, 1, 1}), ArrivalTimes({1, 2, 3})); }) ==
        ErrorCode::unidentifiable);
  CHECK(code_of([] { fit_alpha(OrderedDegrees({5}), ArrivalTimes({1})); }) == ErrorCode::unidentifiable);
  CHECK(code_of([] { fit_model(EdgeEndSequence({1, 2, 3, 4}), Family::geometric); }) ==
        ErrorCode::unidentifiable);
}

TEST_CASE("closed-form arrival estimates") {
  // n = 10, K = 4
  const EdgeEndSequence z({1, 1, 2, 1, 3, 2, 1, 4, 2, 3});
  const auto g = fit_model(z, Family::geometric);
  CHECK(std::get<Geometric>(g.model.arrivals).beta == 0.5);
  const auto p = fit_model(z, Family::shifted_poisson);
  CHECK(std::get<ShiftedPoisson>(p.model.arrivals).lambda == 2.0);
}

TEST_CASE("uncoupled families share the discount estimate") {
  const auto tr = sample_predictive(BntlModel{0.5, PypInduced{2.0, 0.4}}, 3000, std::uint64_t{4});
  const auto g = fit_model(tr.ends, Family::geometric);
  const auto p = fit_model(tr.ends, Family::shifted_poisson);
  const auto y = fit_model(tr.ends, Family::pyp_induced);
  CHECK(g.model.alpha == p.model.alpha);
  CHECK(g.model.alpha == y.model.alpha);
  CHECK(g.alpha_log_likelihood == y.alpha_log_likelihood);
  for (const auto* f : {&g, &p, &y})
    CHECK(f->log_likelihood == Approx(log_full_likelihood(tr.ends, f->model)).epsilon(1e-10));

  const auto [d, t] = stats(tr.ends);
  const auto hist = DegreeHistogram::from_degrees(d);
  const auto h = fit_model(hist, t, Family::pyp_induced);
  CHECK(h.model.alpha == y.model.alpha);
  CHECK(std::get<PypInduced>(h.model.arrivals).theta == std::get<PypInduced>(y.model.arrivals).theta);
}

TEST_CASE("separable fit is the joint maximum on a grid") {
  const auto tr = sample_predictive(BntlModel{0.4, PypInduced{3.0, 0.5}}, 2000, std::uint64_t{5});
  const auto fit = fit_model(tr.ends, Family::pyp_induced);
  const auto [theta0, tau0] = std::get<PypInduced>(fit.model.arrivals);
  double best = -INFINITY;
  for (int i = -15; i <= 15; ++i)
    for (int j = -15; j <= 15; ++j)
      for (int k = -15; k <= 15; ++k) {
        const double a = fit.model.alpha + 0.004 * i;
        const double th = theta0 * (1.0 + 0.01 * j);
        const double ta = tau0 + 0.002 * k;
        best = std::max(best, log_full_likelihood(tr.ends, BntlModel{a, PypInduced{th, ta}}));
      }
  CHECK(fit.log_likelihood >= best - 1e-7);
  CHECK(fit.log_likelihood - best < 1e-2);
}

TEST_CASE("coupled fit dominates the plug-in of the uncoupled fits") {
  const auto tr = sample_predictive(BntlModel{0.6, CoupledPyp{3.0}}, 4000, std::uint64_t{6});
  const auto coupled = fit_model(tr.ends, Family::coupled_pyp);
  const auto alpha = fit_model(tr.ends, Family::pyp_induced);
  const double a = alpha.model.alpha;
  const double theta = std::get<PypInduced>(alpha.model.arrivals).theta;
  REQUIRE(a > 0.0);
  REQUIRE(theta > -a);
  CHECK(log_full_likelihood(tr.ends, BntlModel{a, CoupledPyp{theta}}) <= coupled.log_likelihood + 1e-9);
  CHECK(coupled.log_likelihood == Approx(log_full_likelihood(tr.ends, coupled.model)).epsilon(1e-10));
  // local optimality in both coordinates
  const double th = std::get<CoupledPyp>(coupled.model.arrivals).theta;
  for (double da : {-1e-3, 1e-3})
    CHECK(log_full_likelihood(tr.ends, BntlModel{coupled.model.alpha + da, CoupledPyp{th}}) <=
          coupled.log_likelihood + 1e-9);
  for (double f : {0.99, 1.01})
    CHECK(log_full_likelihood(tr.ends, BntlModel{coupled.model.alpha, CoupledPyp{th * f}}) <=
          coupled.log_likelihood + 1e-9);
}

TEST_CASE("flat priors reproduce the maximum-likelihood fit") {
  const auto tr = sample_predictive(BntlModel{0.55, CoupledPyp{2.0}}, 2000, std::uint64_t{7});
  for (Family f : {Family::geometric, Family::shifted_poisson, Family::pyp_induced, Family::coupled_pyp}) {
    const auto mle = fit_model(tr.ends, f);
    const auto map = fit_map(tr.ends, f, MapPriors{});
    CHECK(map.model.alpha == Approx(mle.model.alpha).epsilon(1e-9));
    CHECK(map.log_likelihood == Approx(mle.log_likelihood).epsilon(1e-9));
  }
}

TEST_CASE("beta prior gives the interior closed form") {
  const auto tr = sample_predictive(BntlModel{0.3, Geometric{0.15}}, 500, std::uint64_t{8});
  const auto [d, t] = stats(tr.ends);
  const double k = static_cast<double>(d.size()), n = 500.0;
  MapPriors priors;
  priors.beta_a = 3.0;
  priors.beta_b = 5.0;
  const auto map = fit_map(tr.ends, Family::geometric, priors);
  const double beta = std::get<Geometric>(map.model.arrivals).beta;
  CHECK(beta == Approx((k - 1 + 2) / (n - k + 6)).epsilon(1e-12));
  const double flat = std::get<Geometric>(fit_model(tr.ends, Family::geometric).model.arrivals).beta;
  CHECK(flat == (k - 1) / (n - k));
}

TEST_CASE("a concentrated discount prior pulls the estimate to its mean") {
  const auto tr = sample_predictive(BntlModel{0.6, Geometric{0.3}}, 300, std::uint64_t{9});
  double last = INFINITY;
  for (double sd : {1.0, 0.1, 0.01, 1e-4}) {
    MapPriors priors;
    priors.alpha = AlphaPrior{0.0, sd};
    const double a = std::abs(fit_map(tr.ends, Family::geometric, priors).model.alpha);
    CHECK(a < last);
    last = a;
  }
  CHECK(last < 1e-3);
}

TEST_CASE("stick weight estimators") {
  const V d{7, 3}, t{1, 4};
  const auto mle = psi_estimators(d, t, PsiMode::mle);
  CHECK(*mle[0] == 1.0);
  CHECK(*mle[1] == Approx(1.0 / 3.0).epsilon(1e-15));
  const auto map = psi_estimators(d, t, PsiMode::map, 0.5);
  CHECK(*map[0] == 1.0);
  CHECK(*map[1] == Approx(1.5 / 7.0).epsilon(1e-15));
  const auto ratio = psi_estimators(d, t, PsiMode::ratio);
  CHECK(*ratio[1] == Approx(0.3).epsilon(1e-15));

  const auto undefined = psi_estimators(V{1, 1}, V{1, 2}, PsiMode::mle);
  CHECK(*undefined[0] == 1.0);
  CHECK_FALSE(undefined[1].has_value());
  const auto neg = psi_estimators(V{1, 1}, V{1, 2}, PsiMode::map, 0.0);
  CHECK_FALSE(neg[1].has_value());
}

TEST_CASE("degree ratios approach the stick weights") {
  Rng rng(10);
  std::vector<double> err;
  for (Count n : {1000, 10000, 100000}) {
    double total = 0.0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
      const auto tr = sample_stick(BntlModel{0.5, Geometric{0.05}}, n, rng);
      const auto [d, t] = stats(tr.ends);
      const auto ratio = psi_estimators(d, t, PsiMode::ratio);
      const auto psi = tr.psi->values();
      for (std::size_t j = 0; j < 5 && j < d.size(); ++j) total += std::abs(*ratio[j] - psi[j]);
    }
    err.push_back(total / (5.0 * reps));
  }
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
}
