#include "doctest.h"

#include <cmath>
#include <map>

#include "bntl/generate.hpp"
#include "oracles.hpp"

using namespace bntl;
using doctest::Approx;
using V = std::vector<Count>;

namespace {

template <class Draw>
oracle::Dist empirical(Draw&& draw, int reps) {
  oracle::Dist p;
  for (int i = 0; i < reps; ++i) {
    const EdgeEndSequence z = draw();
    V zz(z.ends().begin(), z.ends().end());
    p[oracle::key(oracle::summarize(zz))] += 1.0;
  }
  oracle::normalize(p);
  return p;
}

oracle::Dist exact(Count n, double alpha, const oracle::Hazard& hazard) {
  oracle::Dist p;
  for (const auto& z : oracle::all_sequences(n))
    p[oracle::key(oracle::summarize(z))] += std::exp(oracle::log_path(z, alpha, hazard));
  return p;
}

}  // namespace

TEST_CASE("predictive rule conditional frequencies") {
  Rng rng(1);
  // T = (1,2), alpha = 0: third end picks either vertex with probability 1/2
  int ones = 0;
  const int reps = 100000;
  for (int i = 0; i < reps; ++i) ones += sample_given_arrivals(0.0, V{1, 2}, 3, rng)[2] == 1;
  CHECK(std::abs(ones / double(reps) - 0.5) < 3.0 * std::sqrt(0.25 / reps));

  // d = (2,1) after three ends, alpha = 0.5: P(Z_4 = 1) = 1.5 / 2
  int hit = 0, base = 0;
  for (int i = 0; i < 2 * reps; ++i) {
    const auto z = sample_given_arrivals(0.5, V{1, 3}, 4, rng);
    if (z[1] != 1) continue;
    ++base;
    hit += z[3] == 1;
  }
  const double p = hit / double(base);
  CHECK(std::abs(p - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / base));
}

TEST_CASE("four-step traces match the exact path probabilities") {
  Rng rng(2);
  const BntlModel model{0.4, Geometric{0.35}};
  const auto hazard = oracle::geometric_hazard(0.35);
  std::map<V, int> counts;
  const int reps = 100000;
  for (int i = 0; i < reps; ++i) {
    const auto tr = sample_predictive(model, 4, rng);
    counts[V(tr.ends.ends().begin(), tr.ends.ends().end())]++;
  }
  for (const auto& z : oracle::all_sequences(4)) {
    const double p = std::exp(oracle::log_path(z, model.alpha, hazard));
    const double se = std::sqrt(p * (1 - p) / reps);
    CHECK(std::abs(counts[z] / double(reps) - p) < 3.5 * se);
  }
}

TEST_CASE("stick weights") {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto tr = sample_stick(BntlModel{0.6, Geometric{0.3}}, 200, rng);
    REQUIRE(tr.psi);
    const auto psi = tr.psi->values();
    CHECK(psi[0] == 1.0);
    CHECK(validate_feasible(degrees_from_ends(tr.ends).first, tr.arrivals));
    for (std::size_t k = 1; k <= psi.size(); ++k) {
      const auto p = stick_probabilities(psi.subspan(0, k));
      double total = 0.0;
      for (double x : p) total += x;
      CHECK(total == Approx(1.0).epsilon(1e-12));
      // R_j = P_{j,k} / sum_{i<=j} P_{i,k} recovers Psi_j
      double cum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        cum += p[j];
        CHECK(p[j] / cum == Approx(psi[j]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("stick and predictive samplers agree in distribution") {
  Rng rng(4);
  const BntlModel model{0.5, Geometric{0.4}};
  const int reps = 100000;
  auto a = empirical([&] { return sample_predictive(model, 6, rng).ends; }, reps);
  auto b = empirical([&] { return sample_stick(model, 6, rng).ends; }, reps);
  CHECK(oracle::total_variation(a, b) < 0.02);
  CHECK(oracle::total_variation(a, exact(6, model.alpha, oracle::geometric_hazard(0.4))) < 0.02);
}

TEST_CASE("pitman-yor urn") {
  Rng rng(5);
  const int reps = 100000;
  int fresh = 0;
  for (int i = 0; i < reps; ++i) fresh += sample_pyp_reference(1.0, 0.5, 2, rng)[1] == 2;
  CHECK(std::abs(fresh / double(reps) - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / reps));
  int same = 0;
  for (int i = 0; i < reps; ++i) same += sample_pyp_reference(0.0, 0.05, 2, rng)[1] == 1;
  CHECK(std::abs(same / double(reps) - 0.95) < 3.0 * std::sqrt(0.95 * 0.05 / reps));
}

TEST_CASE("coupled model reproduces the pitman-yor urn") {
  Rng rng(6);
  const int reps = 100000;
  auto a = empirical([&] { return sample_predictive(BntlModel{0.6, CoupledPyp{1.3}}, 6, rng).ends; }, reps);
  auto b = empirical([&] { return sample_pyp_reference(1.3, 0.6, 6, rng); }, reps);
  CHECK(oracle::total_variation(a, b) < 0.02);
}

TEST_CASE("geometric arrivals with zero discount reproduce yule-simon") {
  Rng rng(7);
  const int reps = 100000;
  auto a = empirical([&] { return sample_predictive(BntlModel{0.0, Geometric{0.3}}, 6, rng).ends; }, reps);
  auto b = empirical([&] { return sample_ys_reference(0.3, 6, rng); }, reps);
  CHECK(oracle::total_variation(a, b) < 0.02);
  int fresh = 0;
  for (int i = 0; i < reps; ++i) fresh += sample_ys_reference(0.3, 2, rng)[1] == 2;
  CHECK(std::abs(fresh / double(reps) - 0.3) < 3.0 * std::sqrt(0.21 / reps));
}

TEST_CASE("yule-simon maximum degree grows sublinearly") {
  Rng rng(8);
  std::vector<double> xs, ys;
  for (Count n : {1000, 10000, 100000}) {
    double mean = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      const auto z = sample_ys_reference(0.5, n, rng);
      const auto [d, t] = degrees_from_ends(z);
      mean += static_cast<double>(*std::max_element(d.degrees().begin(), d.degrees().end())) / reps;
    }
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(mean));
  }
  const double slope = (ys[2] - ys[0]) / (xs[2] - xs[0]);
  CHECK(slope > 0.3);
  CHECK(slope < 0.75);
}

TEST_CASE("seeded samplers are deterministic and feasible") {
  const BntlModel model{0.75, CoupledPyp{1.0}};
  const auto a = sample_predictive(model, 2000, std::uint64_t{99});
  const auto b = sample_predictive(model, 2000, std::uint64_t{99});
  CHECK(a.ends == b.ends);
  CHECK(a.arrivals == b.arrivals);
  CHECK(*a.seed == 99);
  const auto s1 = sample_stick(BntlModel{-2.0, ShiftedPoisson{3.0}}, 2000, std::uint64_t{5});
  const auto s2 = sample_stick(BntlModel{-2.0, ShiftedPoisson{3.0}}, 2000, std::uint64_t{5});
  CHECK(s1.ends == s2.ends);
  for (const auto* tr : {&a, &s1}) {
    const auto [d, t] = degrees_from_ends(tr->ends);
    CHECK(t == tr->arrivals);
    CHECK(validate_feasible(d, t));
  }
}

TEST_CASE("long stick traces stay numerically sound") {
  // many rescalings force the lazy scale to renormalize
  const auto tr = sample_stick(BntlModel{0.9, Geometric{0.5}}, 200000, std::uint64_t{12});
  const auto [d, t] = degrees_from_ends(tr.ends);
  CHECK(d.total() == 200000);
  CHECK(t.size() > 90000);
}
