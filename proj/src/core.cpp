#include "bntl/core.hpp"

#include <cmath>

namespace bntl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::malformed_input: return "malformed_input";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::unidentifiable: return "unidentifiable";
    case ErrorCode::invariant_violation: return "invariant_violation";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

EdgeEndSequence::EdgeEndSequence(std::vector<Count> ends)
    : ends_(std::move(ends)) {
  if (ends_.empty())
    throw Error(ErrorCode::malformed_input, "edge-end sequence is empty");
  Count max_id = 0;
  for (std::size_t i = 0; i < ends_.size(); ++i) {
    const Count v = ends_[i];
    if (v < 1 || v > max_id + 1)
      throw Error(ErrorCode::malformed_input,
                  "edge-end sequence not labeled in order of first appearance "
                  "at position " +
                      std::to_string(i + 1) + " (vertex " + std::to_string(v) +
                      " after max " + std::to_string(max_id) + ")");
    if (v == max_id + 1) max_id = v;
  }
  vertex_count_ = max_id;
}

ArrivalTimes::ArrivalTimes(std::vector<Count> times) : times_(std::move(times)) {
  if (times_.empty())
    throw Error(ErrorCode::malformed_input, "arrival times are empty");
  if (times_[0] != 1)
    throw Error(ErrorCode::malformed_input, "first arrival time must be 1");
  for (std::size_t j = 1; j < times_.size(); ++j)
    if (times_[j] <= times_[j - 1])
      throw Error(ErrorCode::malformed_input,
                  "arrival times must be strictly increasing");
}

OrderedDegrees::OrderedDegrees(std::vector<Count> degrees)
    : degrees_(std::move(degrees)) {
  if (degrees_.empty())
    throw Error(ErrorCode::malformed_input, "degree sequence is empty");
  cumsums_.resize(degrees_.size());
  Count acc = 0;
  for (std::size_t j = 0; j < degrees_.size(); ++j) {
    if (degrees_[j] < 1)
      throw Error(ErrorCode::malformed_input, "degrees must be >= 1");
    acc += degrees_[j];
    cumsums_[j] = acc;
  }
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::geometric: return "geometric";
    case Family::shifted_poisson: return "poisson";
    case Family::pyp_induced: return "pyp";
    case Family::coupled_pyp: return "coupled-pyp";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "geometric" || name == "geom") return Family::geometric;
  if (name == "poisson" || name == "shifted-poisson") return Family::shifted_poisson;
  if (name == "pyp" || name == "uncoupled-pyp") return Family::pyp_induced;
  if (name == "coupled-pyp" || name == "coupled") return Family::coupled_pyp;
  throw Error(ErrorCode::invalid_argument,
              "unknown arrival family '" + std::string(name) + "'");
}

Family family_of(const InterarrivalModel& model) {
  return static_cast<Family>(model.index());
}

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void validate(const InterarrivalModel& model) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Geometric>) {
          if (!(m.beta > 0.0 && m.beta < 1.0))
            throw Error(ErrorCode::domain, "geometric beta must lie in (0,1)");
        } else if constexpr (std::is_same_v<M, ShiftedPoisson>) {
          if (!(m.lambda > 0.0) || !finite(m.lambda))
            throw Error(ErrorCode::domain, "poisson lambda must be > 0");
        } else if constexpr (std::is_same_v<M, PypInduced>) {
          if (!(m.tau > 0.0 && m.tau < 1.0))
            throw Error(ErrorCode::domain, "pyp tau must lie in (0,1)");
          if (!(m.theta > -m.tau) || !finite(m.theta))
            throw Error(ErrorCode::domain, "pyp theta must exceed -tau");
        } else {
          if (!finite(m.theta))
            throw Error(ErrorCode::domain, "coupled pyp theta must be finite");
        }
      },
      model);
}

void validate(const BntlModel& model) {
  if (!(model.alpha < 1.0) || !finite(model.alpha))
    throw Error(ErrorCode::domain, "alpha must be < 1");
  if (const auto* c = std::get_if<CoupledPyp>(&model.arrivals)) {
    if (!(model.alpha > 0.0))
      throw Error(ErrorCode::domain, "coupled pyp requires alpha in (0,1)");
    if (!(c->theta > -model.alpha))
      throw Error(ErrorCode::domain, "coupled pyp theta must exceed -alpha");
  } else {
    validate(model.arrivals);
  }
}

InterarrivalModel resolve_arrivals(const BntlModel& model) {
  if (const auto* c = std::get_if<CoupledPyp>(&model.arrivals))
    return PypInduced{c->theta, model.alpha};
  return model.arrivals;
}

void validate(const UnlabeledObservation& obs) {
  if (obs.degrees.empty())
    throw Error(ErrorCode::infeasible, "observation has no vertices");
  Count total = 0;
  for (Count d : obs.degrees) {
    if (d < 1) throw Error(ErrorCode::infeasible, "observation degree < 1");
    total += d;
  }
  if (total != obs.n)
    throw Error(ErrorCode::infeasible, "observation degrees do not sum to n");
}

std::pair<OrderedDegrees, ArrivalTimes> degrees_from_ends(
    const EdgeEndSequence& z) {
  std::vector<Count> degrees(static_cast<std::size_t>(z.vertex_count()), 0);
  std::vector<Count> times;
  times.reserve(degrees.size());
  const auto ends = z.ends();
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const auto v = static_cast<std::size_t>(ends[i] - 1);
    if (degrees[v]++ == 0) times.push_back(static_cast<Count>(i) + 1);
  }
  return {OrderedDegrees(std::move(degrees)), ArrivalTimes(std::move(times))};
}

bool validate_feasible(std::span<const Count> degrees,
                       std::span<const Count> times) {
  if (degrees.empty() || degrees.size() != times.size()) return false;
  if (times[0] != 1) return false;
  Count cum = 0;
  for (std::size_t j = 0; j < degrees.size(); ++j) {
    if (degrees[j] < 1) return false;
    if (j > 0) {
      if (times[j] <= times[j - 1]) return false;
      if (times[j] - 1 > cum) return false;
    }
    cum += degrees[j];
  }
  return times.back() <= cum;
}

bool validate_feasible(const OrderedDegrees& d, const ArrivalTimes& t) {
  return validate_feasible(d.degrees(), t.times());
}

}  // namespace bntl
