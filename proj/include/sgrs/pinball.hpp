#ifndef SGRS_PINBALL_HPP
#define SGRS_PINBALL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"
#include "sgrs/geometry.hpp"
#include "sgrs/rng.hpp"
#include "sgrs/state.hpp"

namespace sgrs {

enum class PinballAction : std::size_t { PushRight = 0, PushLeft = 1, PushUp = 2, PushDown = 3, None = 4 };

inline constexpr std::size_t kPinballActionCount = 5;

struct BallState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  friend bool operator==(const BallState&, const BallState&) = default;
};

/// A ball of `ball_radius` centered at `p` fits: inside the unit arena,
/// outside every polygon, and clear of every edge by more than the radius.
inline bool arena_point_is_free(const std::vector<Polygon>& obstacles, double ball_radius, Vec2 p) {
  if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) return false;
  if (std::min({p.x, p.y, 1.0 - p.x, 1.0 - p.y}) <= ball_radius) return false;
  for (const auto& poly : obstacles) {
    if (point_in_polygon(p, poly) || point_polygon_distance(p, poly) <= ball_radius) return false;
  }
  return true;
}

struct PinballConfig {
  std::vector<Polygon> obstacles;
  double ball_radius = 0.02;
  Vec2 start{0.1, 0.1};
  Vec2 target_center{0.9, 0.9};
  double target_radius = 0.04;
  double drag = 0.995;
  double impulse = 0.2;
  std::size_t sub_steps = 20;
  double goal_reward = 10000.0;
  double step_reward = 0.0;
  std::size_t step_cap = 10000;
  /// Distance covered in one step at unit speed, in arena widths.
  double max_step_distance = 0.05;

  /// Distance from `p` to the nearest obstacle edge or arena wall.
  double clearance(Vec2 p) const {
    double d = std::min({p.x, p.y, 1.0 - p.x, 1.0 - p.y});
    for (const auto& poly : obstacles) d = std::min(d, point_polygon_distance(p, poly));
    return d;
  }

  bool inside_obstacle(Vec2 p) const {
    return std::any_of(obstacles.begin(), obstacles.end(), [&](const Polygon& poly) { return point_in_polygon(p, poly); });
  }

  bool is_free(Vec2 p) const { return arena_point_is_free(obstacles, ball_radius, p); }

  void validate() const {
    if (!(ball_radius > 0.0 && ball_radius < 0.5)) throw ConfigError("pinball: ball_radius out of range");
    if (!(target_radius > 0.0)) throw ConfigError("pinball: target radius must be positive");
    if (!(drag > 0.0 && drag <= 1.0)) throw ConfigError("pinball: drag must lie in (0, 1]");
    if (!(impulse >= 0.0 && impulse <= 1.0)) throw ConfigError("pinball: impulse must lie in [0, 1]");
    if (sub_steps < 1) throw ConfigError("pinball: sub_steps must be positive");
    if (step_cap < 1) throw ConfigError("pinball: step cap must be positive");
    if (!(max_step_distance > 0.0)) throw ConfigError("pinball: max_step_distance must be positive");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const auto& poly = obstacles[i];
      if (poly.vertices.size() < 3) throw ConfigError("pinball: obstacle " + std::to_string(i) + " has < 3 vertices");
      if (!is_simple(poly)) throw ConfigError("pinball: obstacle " + std::to_string(i) + " is self-intersecting");
    }
    if (!is_free(start)) throw ConfigError("pinball: start position is not in free space");
    if (!is_free(target_center)) throw ConfigError("pinball: target center is not in free space");
  }

  /// Arena walls followed by every obstacle edge, in declaration order.
  std::vector<Segment> segments() const {
    std::vector<Segment> out{{{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}, {{0, 1}, {0, 0}}};
    for (const auto& poly : obstacles)
      for (std::size_t i = 0; i < poly.edge_count(); ++i) out.push_back(poly.edge(i));
    return out;
  }

  /// Shipped arena: a central block leaves a ring-shaped corridor, so there
  /// are two routes from the start (lower left) to the target (upper right).
  /// Each side of the ring has a baffle leaving a gap barely wider than the
  /// ball, and the small impulse keeps undirected play slow.
  static PinballConfig default_arena() {
    PinballConfig c;
    c.obstacles = {
        Polygon{{{0.15, 0.15}, {0.85, 0.15}, {0.85, 0.85}, {0.15, 0.85}}},
        Polygon{{{0.48, 0.00}, {0.52, 0.00}, {0.52, 0.10}, {0.48, 0.10}}},
        Polygon{{{0.90, 0.48}, {1.00, 0.48}, {1.00, 0.52}, {0.90, 0.52}}},
        Polygon{{{0.00, 0.48}, {0.10, 0.48}, {0.10, 0.52}, {0.00, 0.52}}},
        Polygon{{{0.48, 0.90}, {0.52, 0.90}, {0.52, 1.00}, {0.48, 1.00}}},
    };
    c.start = {0.1, 0.1};
    c.target_center = {0.9, 0.9};
    c.impulse = 0.02;
    return c;
  }

  static PinballConfig load(const std::string& path);
};

inline void to_json(nlohmann::json& j, const PinballConfig& c) {
  auto point = [](Vec2 p) { return nlohmann::json::array({p.x, p.y}); };
  nlohmann::json obstacles = nlohmann::json::array();
  for (const auto& poly : c.obstacles) {
    nlohmann::json verts = nlohmann::json::array();
    for (Vec2 v : poly.vertices) verts.push_back(point(v));
    obstacles.push_back(verts);
  }
  j = nlohmann::json{{"obstacles", obstacles},
                     {"ball_radius", c.ball_radius},
                     {"start", point(c.start)},
                     {"target", {{"center", point(c.target_center)}, {"radius", c.target_radius}}},
                     {"drag", c.drag},
                     {"impulse", c.impulse},
                     {"sub_steps", c.sub_steps},
                     {"step_cap", c.step_cap},
                     {"max_step_distance", c.max_step_distance},
                     {"rewards", {{"goal", c.goal_reward}, {"step", c.step_reward}}}};
}

inline void from_json(const nlohmann::json& j, PinballConfig& c) {
  auto point = [](const nlohmann::json& p) {
    if (!p.is_array() || p.size() != 2) throw ConfigError("pinball: points are [x, y] pairs");
    return Vec2{p[0].get<double>(), p[1].get<double>()};
  };
  try {
    c = PinballConfig{};
    for (const auto& poly : j.at("obstacles")) {
      Polygon p;
      for (const auto& v : poly) p.vertices.push_back(point(v));
      c.obstacles.push_back(std::move(p));
    }
    c.ball_radius = j.value("ball_radius", c.ball_radius);
    if (j.contains("start")) c.start = point(j.at("start"));
    if (j.contains("target")) {
      c.target_center = point(j.at("target").at("center"));
      c.target_radius = j.at("target").value("radius", c.target_radius);
    }
    c.drag = j.value("drag", c.drag);
    c.impulse = j.value("impulse", c.impulse);
    c.sub_steps = j.value("sub_steps", c.sub_steps);
    c.step_cap = j.value("step_cap", c.step_cap);
    c.max_step_distance = j.value("max_step_distance", c.max_step_distance);
    if (j.contains("rewards")) {
      c.goal_reward = j.at("rewards").value("goal", c.goal_reward);
      c.step_reward = j.at("rewards").value("step", c.step_reward);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pinball: malformed config: ") + e.what());
  }
}

inline PinballConfig PinballConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("pinball: cannot open arena file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pinball: arena file is not JSON: ") + e.what());
  }
  PinballConfig c = j.get<PinballConfig>();
  c.validate();
  return c;
}

struct PinballStep {
  BallState ball;
  double reward = 0.0;
  bool terminal = false;
};

/// Ball dynamics over a fixed arena. One step:
///   1. impulse on the chosen axis, then clamp both velocity components to [-1, 1];
///   2. sub_steps equal position increments of v * max_step_distance / sub_steps,
///      each swept against the arena walls and obstacle edges; on contact the
///      velocity is reflected about the contact normal and the rest of the
///      increment continues with the reflected velocity;
///   3. v *= drag, then clamp to [-1, 1] again (an oblique bounce can rotate
///      speed into one axis);
///   4. goal reward and termination iff the center lies within target_radius.
class PinballDynamics {
 public:
  explicit PinballDynamics(PinballConfig cfg) : cfg_(std::move(cfg)), segments_(cfg_.segments()) { cfg_.validate(); }

  const PinballConfig& config() const noexcept { return cfg_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  PinballStep step(BallState ball, PinballAction action) const {
    switch (action) {
      case PinballAction::PushRight: ball.vx += cfg_.impulse; break;
      case PinballAction::PushLeft: ball.vx -= cfg_.impulse; break;
      case PinballAction::PushUp: ball.vy += cfg_.impulse; break;
      case PinballAction::PushDown: ball.vy -= cfg_.impulse; break;
      case PinballAction::None: break;
    }
    ball.vx = std::clamp(ball.vx, -1.0, 1.0);
    ball.vy = std::clamp(ball.vy, -1.0, 1.0);

    const double dt = cfg_.max_step_distance / static_cast<double>(cfg_.sub_steps);
    Vec2 p{ball.x, ball.y};
    Vec2 v{ball.vx, ball.vy};
    for (std::size_t k = 0; k < cfg_.sub_steps; ++k) advance(p, v, dt);

    v = v * cfg_.drag;
    ball = {p.x, p.y, std::clamp(v.x, -1.0, 1.0), std::clamp(v.y, -1.0, 1.0)};

    const bool at_target = norm(p - cfg_.target_center) <= cfg_.target_radius;
    return {ball, at_target ? cfg_.goal_reward : cfg_.step_reward, at_target};
  }

  /// Moves `p` by `v * dt`, bouncing elastically. Simultaneous contacts (a
  /// concave corner) reflect about each normal in the order the edges were
  /// encountered along the ray.
  void advance(Vec2& p, Vec2& v, double dt) const {
    double remaining = 1.0;
    for (int bounce = 0; bounce < kMaxBounces && remaining > 0.0; ++bounce) {
      const Vec2 d = v * (dt * remaining);
      double t_hit = INFINITY;
      std::array<Vec2, kMaxTies> normals;
      std::size_t hits = 0;
      for (const auto& seg : segments_) {
        auto c = sweep_disc_segment(p, d, cfg_.ball_radius, seg);
        if (!c) continue;
        if (c->t < t_hit - kTieTolerance) {
          t_hit = c->t;
          normals[0] = c->normal;
          hits = 1;
        } else if (c->t <= t_hit + kTieTolerance && hits < kMaxTies) {
          normals[hits++] = c->normal;
        }
      }
      if (hits == 0) {
        p = p + d;
        return;
      }
      p = p + d * t_hit;
      for (std::size_t i = 0; i < hits; ++i)
        if (dot(v, normals[i]) < 0.0) v = reflect(v, normals[i]);
      remaining *= (1.0 - t_hit);
    }
  }

 private:
  static constexpr int kMaxBounces = 16;
  static constexpr std::size_t kMaxTies = 4;
  static constexpr double kTieTolerance = 1e-12;

  PinballConfig cfg_;
  std::vector<Segment> segments_;
};

inline PinballStep pinball_step(const PinballDynamics& dynamics, const BallState& ball, PinballAction action) {
  return dynamics.step(ball, action);
}

/// Episodic pinball environment; state is (x, y, vx, vy).
class Pinball {
 public:
  explicit Pinball(PinballConfig cfg = PinballConfig::default_arena()) : dynamics_(std::move(cfg)) { reset(); }

  const PinballConfig& config() const noexcept { return dynamics_.config(); }
  const PinballDynamics& dynamics() const noexcept { return dynamics_; }
  std::size_t action_count() const noexcept { return kPinballActionCount; }
  std::size_t step_cap() const noexcept { return config().step_cap; }
  const BallState& ball() const noexcept { return ball_; }

  static std::vector<Bounds> state_bounds() { return {{0.0, 1.0}, {0.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}}; }

  static StateVec state_of(const BallState& b) { return StateVec::continuous({b.x, b.y, b.vx, b.vy}, state_bounds()); }

  StateVec reset() {
    ball_ = {config().start.x, config().start.y, 0.0, 0.0};
    return state_of(ball_);
  }

  template <UniformSource Rng>
  StepResult step(std::size_t action, Rng& /*deterministic*/) {
    if (action >= kPinballActionCount) throw ConfigError("pinball: action index out of range");
    const PinballStep s = dynamics_.step(ball_, static_cast<PinballAction>(action));
    ball_ = s.ball;
    return {state_of(ball_), s.reward, s.terminal};
  }

 private:
  PinballDynamics dynamics_;
  BallState ball_;
};

}  // namespace sgrs

#endif  // SGRS_PINBALL_HPP
