#pragma once

// Domain types shared by every part of the library: edge-end sequences,
// arrival times, arrival-ordered degrees, model parameterizations and the
// error type used throughout.

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace bntl {

using Count = std::int64_t;
using Rng = std::mt19937_64;

enum class ErrorCode {
  invalid_argument,
  domain,
  infeasible,
  malformed_input,
  insufficient_data,
  unidentifiable,
  invariant_violation,
  numeric,
  io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Vertex ids in order of first appearance, one entry per edge end.
/// Ids are 1-based; vertex j+1 never appears before vertex j.
class EdgeEndSequence {
 public:
  explicit EdgeEndSequence(std::vector<Count> ends);

  std::span<const Count> ends() const { return ends_; }
  Count size() const { return static_cast<Count>(ends_.size()); }
  Count vertex_count() const { return vertex_count_; }
  Count operator[](std::size_t i) const { return ends_[i]; }

  bool operator==(const EdgeEndSequence&) const = default;

 private:
  std::vector<Count> ends_;
  Count vertex_count_ = 0;
};

/// Steps at which new vertices appear: T_1 = 1 < T_2 < ... < T_K.
class ArrivalTimes {
 public:
  explicit ArrivalTimes(std::vector<Count> times);

  std::span<const Count> times() const { return times_; }
  Count size() const { return static_cast<Count>(times_.size()); }
  Count operator[](std::size_t i) const { return times_[i]; }
  Count last() const { return times_.back(); }

  bool operator==(const ArrivalTimes&) const = default;

 private:
  std::vector<Count> times_;
};

/// Degrees d_1..d_K in arrival order together with their partial sums.
class OrderedDegrees {
 public:
  explicit OrderedDegrees(std::vector<Count> degrees);

  std::span<const Count> degrees() const { return degrees_; }
  // cumsum(j) is the sum of the first j+1 degrees (0-based j).
  std::span<const Count> cumsums() const { return cumsums_; }
  Count operator[](std::size_t i) const { return degrees_[i]; }
  Count total() const { return cumsums_.empty() ? 0 : cumsums_.back(); }
  Count size() const { return static_cast<Count>(degrees_.size()); }

  bool operator==(const OrderedDegrees&) const = default;

 private:
  std::vector<Count> degrees_;
  std::vector<Count> cumsums_;
};

// Interarrival laws. A CoupledPyp carries no discount of its own: it reads
// tau from the model's alpha (see resolve_arrivals).
struct Geometric {
  double beta;
};
struct ShiftedPoisson {
  double lambda;
};
struct PypInduced {
  double theta;
  double tau;
};
struct CoupledPyp {
  double theta;
};

using InterarrivalModel =
    std::variant<Geometric, ShiftedPoisson, PypInduced, CoupledPyp>;

enum class Family { geometric, shifted_poisson, pyp_induced, coupled_pyp };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);
Family family_of(const InterarrivalModel& model);

void validate(const InterarrivalModel& model);

struct BntlModel {
  double alpha;
  InterarrivalModel arrivals;
};

void validate(const BntlModel& model);

/// Arrival law with the coupling resolved: CoupledPyp(theta) becomes
/// PypInduced(theta, alpha); everything else passes through.
InterarrivalModel resolve_arrivals(const BntlModel& model);

/// Degree multiset of a graph whose arrival order is unknown. Vertex with
/// external id i (1-based) has degree degrees[i-1].
struct UnlabeledObservation {
  std::vector<Count> degrees;
  Count n = 0;
};

void validate(const UnlabeledObservation& obs);

std::pair<OrderedDegrees, ArrivalTimes> degrees_from_ends(
    const EdgeEndSequence& z);

/// Pure predicate: strictly increasing T with T_1 = 1, T_j - 1 <= dbar_{j-1}
/// for j >= 2, and T_K <= n.
bool validate_feasible(std::span<const Count> degrees,
                       std::span<const Count> times);
bool validate_feasible(const OrderedDegrees& d, const ArrivalTimes& t);

/// Relabels by order of first appearance. label_of[j-1] is the original
/// label of canonical vertex j.
template <class Label, class Hash = std::hash<Label>>
std::pair<EdgeEndSequence, std::vector<Label>> canonical_relabel(
    std::span<const Label> ends) {
  if (ends.empty())
    throw Error(ErrorCode::invalid_argument, "canonical_relabel: empty input");
  std::unordered_map<Label, Count, Hash> ids;
  std::vector<Label> label_of;
  std::vector<Count> out;
  out.reserve(ends.size());
  for (const auto& label : ends) {
    auto [it, inserted] =
        ids.try_emplace(label, static_cast<Count>(label_of.size()) + 1);
    if (inserted) label_of.push_back(label);
    out.push_back(it->second);
  }
  return {EdgeEndSequence(std::move(out)), std::move(label_of)};
}

}  // namespace bntl
