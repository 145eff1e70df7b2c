#pragma once

// Gibbs sampler for unlabeled graphs. The state holds a permutation sigma
// from arrival positions to external vertex ids, the arrival times, the
// discount alpha and the arrival parameters. Stick weights are integrated
// out of every conditional and only drawn at collection times.

#include <iosfwd>
#include <optional>

#include "bntl/arrivals.hpp"
#include "bntl/core.hpp"
#include "bntl/likelihood.hpp"

namespace bntl {

struct ChainConfig {
  Count iterations = 125000;
  Count burn_in = 25000;
  Count thin = 100;
  Count swaps_per_iteration = 0;  // 0 means K swaps

  SliceTuning alpha_slice{0.5, 50};
  ArrivalSliceTuning arrival_slice;

  double alpha_lo = -100.0;  // alpha ~ Uniform(alpha_lo, alpha_hi)
  double alpha_hi = 1.0;
  ArrivalPriors arrival_prior;

  std::uint64_t seed = 1;

  bool sample_alpha = true;
  bool sample_phi = true;
  bool sample_times = true;
  bool sample_permutation = true;
  bool sample_psi = true;
  bool check_feasibility = false;  // validate after every update
  // Start arrival times spread evenly over the sequence rather than at
  // T_j = j. From the packed start, alpha and T drift together slowly and
  // large graphs need far longer burn-in.
  bool spread_initial_times = true;

  double initial_alpha = 0.0;
  std::optional<InterarrivalModel> initial_arrivals;

  void validate() const;
};

struct GibbsState {
  std::vector<Count> sigma;    // external id (1-based) at arrival position j
  std::vector<Count> degrees;  // degree at arrival position j
  std::vector<Count> cumsum;   // partial sums of degrees
  std::vector<Count> times;
  double alpha = 0.0;
  InterarrivalModel arrivals = Geometric{0.5};
  std::vector<double> psi;  // empty until update_psi runs
  Count n = 0;

  DegreeHistogram histogram;         // invariant under sigma
  std::vector<double> log_factorial;  // log k! for k = 0..n

  Count k() const { return static_cast<Count>(degrees.size()); }
  bool feasible() const { return validate_feasible(degrees, times); }

  /// Sigma orders vertices by degree (descending, ties by external id). T is
  /// spread evenly and clipped to feasibility, or T_j = j when
  /// spread_initial_times is off. Alpha and the arrival parameters come from
  /// the config.
  static GibbsState initial(const UnlabeledObservation& obs, Family family,
                            const ChainConfig& config);

  /// State for a known arrival order: sigma is the identity.
  static GibbsState from_ordered(std::span<const Count> degrees,
                                 std::span<const Count> times, double alpha,
                                 const InterarrivalModel& arrivals);

  void set_order(std::vector<Count> sigma_in, std::vector<Count> degrees_in);
};

/// log p(d_sigma, T | alpha, phi) with Psi marginalized (binomial form).
double log_ordered_degree_joint(const GibbsState& state);

/// Above plus the log prior density of alpha and the arrival parameters.
double log_joint(const GibbsState& state, const ChainConfig& config);

void update_psi(GibbsState& state, Rng& rng);
void update_alpha(GibbsState& state, const ChainConfig& config, Rng& rng);
void update_phi(GibbsState& state, const ChainConfig& config, Rng& rng);
void update_arrival_times(GibbsState& state, Rng& rng);
void update_permutation(GibbsState& state, Rng& rng, Count sweeps);

/// Unnormalized log weights of the discrete conditional of T at arrival
/// position `index` (0-based, >= 1), for candidate values
/// T_{index-1} + 1, ..., T_{index-1} + M.
std::vector<double> arrival_time_log_weights(const GibbsState& state,
                                             std::size_t index);

/// Probability of swapping arrival positions j and j+1 (1-based j), given
/// dbar_{j-1}, d_j, d_{j+1}, T_j, T_{j+1}.
double swap_probability(Count dbar_prev, Count d_j, Count d_next, Count t_j,
                        Count t_next);

struct ChainSample {
  Count iteration = 0;
  double alpha = 0.0;
  InterarrivalModel arrivals = Geometric{0.5};
  double log_joint = 0.0;
  double s_statistic = 0.0;
  std::vector<Count> times;
  std::vector<Count> sigma;
  std::vector<double> psi;
};

struct ChainArchive {
  Family family = Family::geometric;
  std::vector<ChainSample> samples;
  std::vector<double> log_joint_trace;  // one entry per iteration
  std::vector<Count> initial_sigma;
  double seconds = 0.0;
};

/// Chain driver with checkpointing. Per iteration the update order is
/// alpha, phi, T, sigma; Psi is drawn only at collection times.
class GibbsChain {
 public:
  GibbsChain(const UnlabeledObservation& obs, Family family, ChainConfig config);

  /// Runs until `config.iterations` in total have been performed.
  void run();
  /// Runs at most `count` further iterations.
  void advance(Count count);

  const GibbsState& state() const { return state_; }
  const ChainArchive& archive() const { return archive_; }
  ChainArchive& archive() { return archive_; }
  Count iteration() const { return iteration_; }
  const ChainConfig& config() const { return config_; }

  /// Text checkpoint of the mutable chain state including the RNG.
  void save_checkpoint(std::ostream& out) const;
  void load_checkpoint(std::istream& in);

 private:
  void step();

  ChainConfig config_;
  Family family_;
  GibbsState state_;
  Rng rng_;
  Count iteration_ = 0;
  ChainArchive archive_;
};

ChainArchive run_chain(const UnlabeledObservation& obs, Family family,
                       const ChainConfig& config);

}  // namespace bntl
