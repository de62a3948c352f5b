#ifndef SGRS_SUBGOAL_HPP
#define SGRS_SUBGOAL_HPP

#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"
#include "sgrs/geometry.hpp"
#include "sgrs/map.hpp"
#include "sgrs/state.hpp"

namespace sgrs {

struct CellMatcher {
  GridCell cell;
  friend bool operator==(const CellMatcher&, const CellMatcher&) = default;
};

/// Position-only disc; velocity components are ignored.
struct DiscMatcher {
  Vec2 center;
  double radius = 0.0;
  friend bool operator==(const DiscMatcher&, const DiscMatcher&) = default;
};

/// Axis-aligned box over the leading center.size() state components.
struct BoxMatcher {
  std::vector<double> center;
  std::vector<double> margin;
  friend bool operator==(const BoxMatcher&, const BoxMatcher&) = default;
};

using SubgoalMatcher = std::variant<CellMatcher, DiscMatcher, BoxMatcher>;

inline bool matches(const SubgoalMatcher& matcher, const StateVec& state) {
  return std::visit(
      [&](const auto& m) -> bool {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CellMatcher>) {
          if (!state.is_discrete()) throw TypeError("cell subgoal applied to a continuous state");
          return state.as_discrete().cell() == m.cell;
        } else if constexpr (std::is_same_v<M, DiscMatcher>) {
          if (!state.is_continuous()) throw TypeError("disc subgoal applied to a discrete state");
          const auto& v = state.as_continuous().values;
          if (v.size() < 2) throw TypeError("disc subgoal needs a state with a 2-D position");
          return std::hypot(v[0] - m.center.x, v[1] - m.center.y) <= m.radius;
        } else {
          if (!state.is_continuous()) throw TypeError("box subgoal applied to a discrete state");
          const auto& v = state.as_continuous().values;
          if (m.margin.size() != m.center.size()) throw TypeError("box subgoal margin/center size mismatch");
          if (v.size() < m.center.size()) throw TypeError("box subgoal has more dimensions than the state");
          for (std::size_t i = 0; i < m.center.size(); ++i)
            if (std::abs(v[i] - m.center[i]) > m.margin[i]) return false;
          return true;
        }
      },
      matcher);
}

enum class SubgoalSource { Human, Random };

/// Totally ordered subgoal series: index order is the achievement order.
/// Partially ordered series are not supported; the file format reserves an
/// "order" field for them and currently accepts only "total".
struct SubgoalSeries {
  std::vector<SubgoalMatcher> subgoals;
  SubgoalSource source = SubgoalSource::Human;

  std::size_t size() const noexcept { return subgoals.size(); }
  bool empty() const noexcept { return subgoals.empty(); }
  const SubgoalMatcher& operator[](std::size_t i) const { return subgoals[i]; }
  friend bool operator==(const SubgoalSeries&, const SubgoalSeries&) = default;
};

/// On-disk / wire form of a series, tagged with the environment it belongs to.
struct SubgoalFile {
  std::string env;
  SubgoalSeries series;
  friend bool operator==(const SubgoalFile&, const SubgoalFile&) = default;
};

inline void to_json(nlohmann::json& j, const SubgoalMatcher& m) {
  std::visit(
      [&](const auto& v) {
        using M = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<M, CellMatcher>)
          j = {{"type", "cell"}, {"row", v.cell.row}, {"col", v.cell.col}};
        else if constexpr (std::is_same_v<M, DiscMatcher>)
          j = {{"type", "disc"}, {"cx", v.center.x}, {"cy", v.center.y}, {"r", v.radius}};
        else
          j = {{"type", "box"}, {"center", v.center}, {"margin", v.margin}};
      },
      m);
}

inline void from_json(const nlohmann::json& j, SubgoalMatcher& m) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "cell") {
    m = CellMatcher{{j.at("row").get<int>(), j.at("col").get<int>()}};
  } else if (type == "disc") {
    m = DiscMatcher{{j.at("cx").get<double>(), j.at("cy").get<double>()}, j.at("r").get<double>()};
  } else if (type == "box") {
    BoxMatcher b{j.at("center").get<std::vector<double>>(), j.at("margin").get<std::vector<double>>()};
    if (b.center.size() != b.margin.size()) throw ValidationError("margin", "must have one entry per center component");
    m = std::move(b);
  } else {
    throw ValidationError("type", "unknown subgoal type '" + type + "'");
  }
}

inline void to_json(nlohmann::json& j, const SubgoalFile& f) {
  j = {{"env", f.env},
       {"source", f.series.source == SubgoalSource::Human ? "human" : "random"},
       {"subgoals", f.series.subgoals}};
}

inline void from_json(const nlohmann::json& j, SubgoalFile& f) {
  try {
    f.env = j.at("env").get<std::string>();
    const std::string source = j.value("source", std::string("human"));
    if (source == "human")
      f.series.source = SubgoalSource::Human;
    else if (source == "random")
      f.series.source = SubgoalSource::Random;
    else
      throw ValidationError("source", "must be 'human' or 'random'");
    if (j.value("order", std::string("total")) != "total")
      throw ValidationError("order", "only totally ordered series are supported");
    f.series.subgoals.clear();
    const auto& list = j.at("subgoals");
    if (!list.is_array()) throw ValidationError("subgoals", "must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      try {
        f.series.subgoals.push_back(list[i].get<SubgoalMatcher>());
      } catch (const ValidationError& e) {
        throw ValidationError("subgoals[" + std::to_string(i) + "]." + e.field(), e.message());
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("subgoals[" + std::to_string(i) + "]", e.what());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("subgoal file", e.what());
  }
}

inline SubgoalFile load_subgoal_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open subgoal file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("subgoal file " + path + " is not JSON: " + e.what());
  }
  return j.get<SubgoalFile>();
}

/// Checks a series against an environment layout. Throws ValidationError
/// naming the first offending field.
inline void validate_series(const SubgoalFile& file, const MapDescriptor& map) {
  if (file.env != map.env) throw ValidationError("env", "series is for '" + file.env + "', map is '" + map.env + "'");
  const auto& sg = file.series.subgoals;
  if (sg.empty()) throw ValidationError("subgoals", "series must not be empty");
  for (std::size_t i = 0; i < sg.size(); ++i) {
    const std::string field = "subgoals[" + std::to_string(i) + "]";
    if (const auto* g = map.grid()) {
      const auto* c = std::get_if<CellMatcher>(&sg[i]);
      if (!c) throw ValidationError(field, "grid environments take cell subgoals");
      if (!g->in_bounds(c->cell)) throw ValidationError(field, "cell is outside the map");
      if (!g->is_free(c->cell)) throw ValidationError(field, "cell is a wall");
      if (c->cell == g->start) throw ValidationError(field, "subgoal matches the start state");
    } else {
      const auto& a = *map.arena();
      if (const auto* d = std::get_if<DiscMatcher>(&sg[i])) {
        if (!(d->radius > 0.0)) throw ValidationError(field, "radius must be positive");
        if (!a.is_free(d->center)) throw ValidationError(field, "disc center is not in free space");
        if (norm(a.start - d->center) <= d->radius) throw ValidationError(field, "subgoal matches the start state");
      } else if (const auto* b = std::get_if<BoxMatcher>(&sg[i])) {
        if (b->center.empty()) throw ValidationError(field, "box needs at least one dimension");
        for (double m : b->margin)
          if (!(m > 0.0)) throw ValidationError(field, "margins must be positive");
      } else {
        throw ValidationError(field, "arena environments take disc or box subgoals");
      }
    }
  }
}

}  // namespace sgrs

#endif  // SGRS_SUBGOAL_HPP
