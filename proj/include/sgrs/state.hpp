#ifndef SGRS_STATE_HPP
#define SGRS_STATE_HPP

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sgrs/error.hpp"

namespace sgrs {

struct GridCell {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;
  friend constexpr bool operator==(const Bounds&, const Bounds&) = default;
};

/// Discrete state of a grid-shaped space. Abstract MDPs are a single row.
struct DiscreteState {
  std::size_t id = 0;
  std::size_t width = 1;

  GridCell cell() const {
    return {static_cast<int>(id / width), static_cast<int>(id % width)};
  }
  friend bool operator==(const DiscreteState&, const DiscreteState&) = default;
};

struct ContinuousState {
  std::vector<double> values;
  std::vector<Bounds> bounds;  // empty, or one entry per value
  friend bool operator==(const ContinuousState&, const ContinuousState&) = default;
};

/// Exactly one of a discrete id or a bounded real vector.
class StateVec {
 public:
  static StateVec discrete(std::size_t id, std::size_t width = 1) {
    if (width == 0) throw ConfigError("StateVec: grid width must be positive");
    return StateVec(DiscreteState{id, width});
  }

  static StateVec grid(GridCell cell, std::size_t width) {
    if (cell.row < 0 || cell.col < 0 || static_cast<std::size_t>(cell.col) >= width)
      throw InvalidStateError("StateVec: cell outside grid");
    return discrete(static_cast<std::size_t>(cell.row) * width + static_cast<std::size_t>(cell.col), width);
  }

  static StateVec continuous(std::vector<double> values, std::vector<Bounds> bounds = {}) {
    if (!bounds.empty()) {
      if (bounds.size() != values.size())
        throw ConfigError("StateVec: bounds dimension mismatch");
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= bounds[i].lower && values[i] <= bounds[i].upper))
          throw InvalidStateError("StateVec: component " + std::to_string(i) + " out of bounds");
      }
    }
    return StateVec(ContinuousState{std::move(values), std::move(bounds)});
  }

  bool is_discrete() const noexcept { return std::holds_alternative<DiscreteState>(value_); }
  bool is_continuous() const noexcept { return std::holds_alternative<ContinuousState>(value_); }

  std::optional<std::size_t> discrete_id() const {
    if (auto* d = std::get_if<DiscreteState>(&value_)) return d->id;
    return std::nullopt;
  }

  const DiscreteState& as_discrete() const {
    if (auto* d = std::get_if<DiscreteState>(&value_)) return *d;
    throw TypeError("StateVec: expected a discrete state");
  }

  const ContinuousState& as_continuous() const {
    if (auto* c = std::get_if<ContinuousState>(&value_)) return *c;
    throw TypeError("StateVec: expected a continuous state");
  }

  friend bool operator==(const StateVec&, const StateVec&) = default;

 private:
  explicit StateVec(DiscreteState d) : value_(d) {}
  explicit StateVec(ContinuousState c) : value_(std::move(c)) {}

  std::variant<DiscreteState, ContinuousState> value_;
};

struct Transition {
  StateVec state;
  std::size_t action = 0;
  double reward = 0.0;
  StateVec next_state;
  bool terminal = false;
};

/// What the environment returns from one step.
struct StepResult {
  StateVec next_state;
  double reward = 0.0;
  bool terminal = false;
};

struct EpisodeRecord {
  std::size_t steps = 0;
  double env_return = 0.0;     // undiscounted sum of environment rewards
  double shaped_return = 0.0;  // undiscounted sum of reward + shaping
  std::size_t subgoals_achieved = 0;
  bool truncated = false;
  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

enum class Method { Baseline, Hsrs, Rsrs, Nrs };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Baseline: return "baseline";
    case Method::Hsrs: return "hsrs";
    case Method::Rsrs: return "rsrs";
    case Method::Nrs: return "nrs";
  }
  return "baseline";
}

inline Method method_from_string(const std::string& s) {
  if (s == "baseline" || s == "BASELINE") return Method::Baseline;
  if (s == "hsrs" || s == "HSRS") return Method::Hsrs;
  if (s == "rsrs" || s == "RSRS") return Method::Rsrs;
  if (s == "nrs" || s == "NRS") return Method::Nrs;
  throw ConfigError("unknown method '" + s + "'");
}

struct RunRecord {
  std::uint64_t seed = 0;
  Method method = Method::Baseline;
  std::string config_digest;
  std::vector<EpisodeRecord> episodes;
  friend bool operator==(const RunRecord&, const RunRecord&) = default;

  std::vector<double> step_curve() const {
    std::vector<double> out;
    out.reserve(episodes.size());
    for (const auto& e : episodes) out.push_back(static_cast<double>(e.steps));
    return out;
  }
};

}  // namespace sgrs

#endif  // SGRS_STATE_HPP
