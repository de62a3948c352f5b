#ifndef SGRS_SHAPING_HPP
#define SGRS_SHAPING_HPP

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "sgrs/error.hpp"
#include "sgrs/map.hpp"
#include "sgrs/rng.hpp"
#include "sgrs/state.hpp"
#include "sgrs/subgoal.hpp"

namespace sgrs {

/// Running state of the subgoal-history potential within one episode.
///
/// For a totally ordered series the potential depends on the visited-state
/// history only through the number of subgoals achieved in order, so the
/// context keeps that count instead of the history itself.
struct ShapingContext {
  std::shared_ptr<const SubgoalSeries> series;
  std::size_t achieved = 0;
  double eta = 0.0;
  double gamma = 1.0;

  ShapingContext() = default;
  ShapingContext(std::shared_ptr<const SubgoalSeries> s, double eta_, double gamma_)
      : series(std::move(s)), eta(eta_), gamma(gamma_) {
    if (!series || series->empty()) throw ConfigError("shaping: subgoal series must not be empty");
    if (!(eta > 0.0)) throw ConfigError("shaping: eta must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("shaping: gamma must lie in (0, 1]");
  }

  bool saturated() const noexcept { return achieved >= series->size(); }
};

/// Only the next subgoal in order can fire; each fires at most once.
inline ShapingContext advance(ShapingContext ctx, const StateVec& next_state) {
  if (!ctx.saturated() && matches((*ctx.series)[ctx.achieved], next_state)) ++ctx.achieved;
  return ctx;
}

inline double potential(const ShapingContext& ctx) { return ctx.eta * static_cast<double>(ctx.achieved); }

inline double shaping_reward(double phi_prev, double phi_next, double gamma) { return gamma * phi_next - phi_prev; }

/// Memoryless potential: eta on any subgoal state, zero elsewhere.
inline double naive_potential(const StateVec& state, const SubgoalSeries& series, double eta) {
  for (const auto& m : series.subgoals)
    if (matches(m, state)) return eta;
  return 0.0;
}

/// Per-episode shaping reward source used by the episode loop.
class Shaper {
 public:
  virtual ~Shaper() = default;
  /// Starts a new episode at `start`; the history is empty afterwards.
  virtual void reset(const StateVec& start) = 0;
  /// Appends `next_state` to the history and returns F(h, h').
  virtual double step(const StateVec& next_state) = 0;
  virtual double potential() const = 0;
  virtual std::size_t subgoals_achieved() const = 0;
  virtual double gamma() const = 0;
};

/// History-extended potential eta * c(h) over an ordered series.
class SubgoalShaper final : public Shaper {
 public:
  SubgoalShaper(std::shared_ptr<const SubgoalSeries> series, double eta, double gamma)
      : initial_(std::move(series), eta, gamma), ctx_(initial_) {}

  void reset(const StateVec&) override { ctx_ = initial_; }

  double step(const StateVec& next_state) override {
    const double before = sgrs::potential(ctx_);
    ctx_ = advance(std::move(ctx_), next_state);
    return shaping_reward(before, sgrs::potential(ctx_), ctx_.gamma);
  }

  double potential() const override { return sgrs::potential(ctx_); }
  std::size_t subgoals_achieved() const override { return ctx_.achieved; }
  double gamma() const override { return ctx_.gamma; }
  const ShapingContext& context() const noexcept { return ctx_; }

 private:
  ShapingContext initial_;
  ShapingContext ctx_;
};

/// State-based shaping with the memoryless subgoal potential. The reported
/// achievement count is the number of distinct series entries visited.
class NaiveShaper final : public Shaper {
 public:
  NaiveShaper(std::shared_ptr<const SubgoalSeries> series, double eta, double gamma)
      : series_(std::move(series)), eta_(eta), gamma_(gamma) {
    if (!series_ || series_->empty()) throw ConfigError("shaping: subgoal series must not be empty");
    if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw ConfigError("shaping: gamma must lie in (0, 1]");
    visited_.assign(series_->size(), 0);
  }

  void reset(const StateVec& start) override {
    phi_ = naive_potential(start, *series_, eta_);
    std::fill(visited_.begin(), visited_.end(), 0);
  }

  double step(const StateVec& next_state) override {
    const double next = naive_potential(next_state, *series_, eta_);
    for (std::size_t i = 0; i < series_->size(); ++i)
      if (matches((*series_)[i], next_state)) visited_[i] = 1;
    const double f = shaping_reward(phi_, next, gamma_);
    phi_ = next;
    return f;
  }

  double potential() const override { return phi_; }
  std::size_t subgoals_achieved() const override {
    return static_cast<std::size_t>(std::accumulate(visited_.begin(), visited_.end(), 0));
  }
  double gamma() const override { return gamma_; }

 private:
  std::shared_ptr<const SubgoalSeries> series_;
  double eta_;
  double gamma_;
  double phi_ = 0.0;
  std::vector<int> visited_;
};

/// Uniformly drawn series for the random-subgoal baseline. Grid maps: `count`
/// distinct free cells other than start and goal (partial Fisher-Yates over
/// the row-major free-cell list). Arena maps: `count` disc centers drawn by
/// rejection over free space, radius equal to the target radius, rejecting
/// discs that would contain the start. Order is draw order.
inline SubgoalSeries random_series(const MapDescriptor& map, std::size_t count, SeededRng& rng) {
  if (count < 1) throw ConfigError("random_series: count must be at least 1");
  SubgoalSeries out;
  out.source = SubgoalSource::Random;
  if (const auto* g = map.grid()) {
    std::vector<GridCell> cells;
    for (int r = 0; r < g->rows; ++r)
      for (int c = 0; c < g->cols; ++c) {
        const GridCell cell{r, c};
        if (g->is_free(cell) && cell != g->start && cell != g->goal) cells.push_back(cell);
      }
    if (cells.size() < count) throw ConfigError("random_series: fewer free cells than requested subgoals");
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + rng.uniform_index(cells.size() - i);
      std::swap(cells[i], cells[j]);
      out.subgoals.push_back(CellMatcher{cells[i]});
    }
  } else {
    const auto& a = *map.arena();
    constexpr std::size_t kMaxAttempts = 100000;
    std::size_t attempts = 0;
    while (out.size() < count) {
      if (++attempts > kMaxAttempts) throw ConfigError("random_series: could not place discs in free space");
      const Vec2 p{rng.uniform01(), rng.uniform01()};
      if (!a.is_free(p) || norm(p - a.start) <= a.target_radius) continue;
      out.subgoals.push_back(DiscMatcher{p, a.target_radius});
    }
  }
  return out;
}

}  // namespace sgrs

#endif  // SGRS_SHAPING_HPP
