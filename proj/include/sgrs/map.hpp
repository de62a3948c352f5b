#ifndef SGRS_MAP_HPP
#define SGRS_MAP_HPP

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/four_rooms.hpp"
#include "sgrs/pinball.hpp"

namespace sgrs {

struct GridMap {
  int rows = 0;
  int cols = 0;
  std::vector<std::string> cells;  // '#' wall, '.' free
  GridCell start;
  GridCell goal;

  bool in_bounds(GridCell c) const { return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols; }
  bool is_free(GridCell c) const {
    return in_bounds(c) && cells[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] != '#';
  }
  std::size_t free_cell_count() const {
    std::size_t n = 0;
    for (const auto& r : cells)
      for (char ch : r) n += ch != '#';
    return n;
  }
  friend bool operator==(const GridMap&, const GridMap&) = default;
};

struct ArenaMap {
  std::vector<Polygon> obstacles;
  double ball_radius = 0.02;
  Vec2 start;
  Vec2 target_center;
  double target_radius = 0.04;

  bool is_free(Vec2 p) const { return arena_point_is_free(obstacles, ball_radius, p); }
  friend bool operator==(const ArenaMap&, const ArenaMap&) = default;
};

/// Static layout of an environment, as drawn by the annotation UI.
struct MapDescriptor {
  std::string env;
  std::variant<GridMap, ArenaMap> layout;

  const GridMap* grid() const { return std::get_if<GridMap>(&layout); }
  const ArenaMap* arena() const { return std::get_if<ArenaMap>(&layout); }
  friend bool operator==(const MapDescriptor&, const MapDescriptor&) = default;
};

inline MapDescriptor env_map(const FourRoomsConfig& cfg) {
  GridMap m;
  m.rows = cfg.rows();
  m.cols = cfg.cols();
  for (const auto& row : cfg.ascii_map) {
    std::string r = row;
    for (char& ch : r) ch = ch == '#' ? '#' : '.';
    m.cells.push_back(std::move(r));
  }
  m.start = cfg.start_cell;
  m.goal = cfg.goal_cell;
  return {"four_rooms", m};
}

inline MapDescriptor env_map(const PinballConfig& cfg) {
  return {"pinball", ArenaMap{cfg.obstacles, cfg.ball_radius, cfg.start, cfg.target_center, cfg.target_radius}};
}

inline MapDescriptor env_map(const FourRooms& env) { return env_map(env.config()); }
inline MapDescriptor env_map(const Pinball& env) { return env_map(env.config()); }

inline void to_json(nlohmann::json& j, const MapDescriptor& m) {
  using nlohmann::json;
  if (const auto* g = m.grid()) {
    j = json{{"env", m.env},
             {"kind", "grid"},
             {"rows", g->rows},
             {"cols", g->cols},
             {"cells", g->cells},
             {"start", {g->start.row, g->start.col}},
             {"goal", {g->goal.row, g->goal.col}}};
  } else {
    const auto& a = *m.arena();
    json obstacles = json::array();
    for (const auto& poly : a.obstacles) {
      json verts = json::array();
      for (Vec2 v : poly.vertices) verts.push_back({v.x, v.y});
      obstacles.push_back(verts);
    }
    j = json{{"env", m.env},
             {"kind", "arena"},
             {"obstacles", obstacles},
             {"ball_radius", a.ball_radius},
             {"start", {a.start.x, a.start.y}},
             {"target", {{"center", {a.target_center.x, a.target_center.y}}, {"radius", a.target_radius}}}};
  }
}

inline void from_json(const nlohmann::json& j, MapDescriptor& m) {
  try {
    m.env = j.at("env").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "grid") {
      GridMap g;
      g.rows = j.at("rows").get<int>();
      g.cols = j.at("cols").get<int>();
      g.cells = j.at("cells").get<std::vector<std::string>>();
      g.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
      g.goal = {j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
      m.layout = std::move(g);
    } else if (kind == "arena") {
      ArenaMap a;
      for (const auto& poly : j.at("obstacles")) {
        Polygon p;
        for (const auto& v : poly) p.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        a.obstacles.push_back(std::move(p));
      }
      a.ball_radius = j.at("ball_radius").get<double>();
      a.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
      const auto& t = j.at("target");
      a.target_center = {t.at("center").at(0).get<double>(), t.at("center").at(1).get<double>()};
      a.target_radius = t.at("radius").get<double>();
      m.layout = std::move(a);
    } else {
      throw ConfigError("map: unknown kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("map: malformed descriptor: ") + e.what());
  }
}

}  // namespace sgrs

#endif  // SGRS_MAP_HPP
