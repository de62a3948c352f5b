#ifndef SGRS_EXPERIMENT_HPP
#define SGRS_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/actor_critic.hpp"
#include "sgrs/episode.hpp"
#include "sgrs/four_rooms.hpp"
#include "sgrs/map.hpp"
#include "sgrs/pinball.hpp"
#include "sgrs/sarsa.hpp"
#include "sgrs/shaping.hpp"

namespace sgrs {

/// FNV-1a over a byte string; used for config digests and content ids.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Everything that determines a batch of learning runs, apart from the seed.
struct ExperimentConfig {
  std::string env = "four_rooms";
  Method method = Method::Baseline;
  std::optional<SubgoalSeries> subgoals;
  double eta = 0.01;
  std::size_t episodes = 1000;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::optional<std::size_t> step_cap;  // overrides the environment's cap
  std::size_t random_subgoal_count = 2;

  FourRoomsConfig four_rooms = FourRoomsConfig::canonical();
  PinballConfig pinball = PinballConfig::default_arena();
  SarsaParams sarsa{0.01, 0.99, kGridTemperature, 0.0};
  ActorCriticParams actor_critic{0.01, 0.01, 0.99, kArenaTemperature};
  std::size_t fourier_order = 3;

  /// Softmax temperature for the tabular learner; see README for the sweep.
  static constexpr double kGridTemperature = 1e-5;
  /// Softmax temperature for the actor; goal reward 10000 makes tau=1 collapse.
  static constexpr double kArenaTemperature = 300.0;

  std::size_t effective_step_cap() const {
    if (step_cap) return *step_cap;
    return env == "pinball" ? pinball.step_cap : four_rooms.step_cap;
  }

  MapDescriptor map() const {
    if (env == "four_rooms") return env_map(four_rooms);
    if (env == "pinball") return env_map(pinball);
    throw ConfigError("unknown environment '" + env + "'");
  }

  /// Domain defaults: four-rooms eta 0.01, pinball eta 100.
  static ExperimentConfig defaults(const std::string& env) {
    ExperimentConfig c;
    c.env = env;
    if (env == "pinball") {
      c.eta = 100.0;
      c.episodes = 150;
    } else if (env != "four_rooms") {
      throw ConfigError("unknown environment '" + env + "'");
    }
    return c;
  }

  void validate() const {
    map();
    if (episodes < 1) throw ConfigError("episodes must be positive");
    if (runs < 1) throw ConfigError("runs must be positive");
    if (effective_step_cap() < 1) throw ConfigError("step cap must be positive");
    if (method == Method::Hsrs || method == Method::Nrs) {
      if (!subgoals || subgoals->empty()) throw ConfigError(to_string(method) + " requires a subgoal series");
    }
    if (method == Method::Baseline && subgoals) throw ConfigError("baseline runs take no subgoal series");
    if (method != Method::Baseline && !(eta > 0.0)) throw ConfigError("eta must be positive");
    if (subgoals) validate_series(SubgoalFile{env, *subgoals}, map());
  }
};

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j{{"env", c.env},
                   {"method", to_string(c.method)},
                   {"eta", c.eta},
                   {"episodes", c.episodes},
                   {"step_cap", c.effective_step_cap()},
                   {"random_subgoal_count", c.random_subgoal_count}};
  j["subgoals"] = c.subgoals ? nlohmann::json(c.subgoals->subgoals) : nlohmann::json(nullptr);
  if (c.env == "four_rooms") {
    j["map"] = c.four_rooms.ascii_map;
    j["slip_probability"] = c.four_rooms.slip_probability;
    j["goal_reward"] = c.four_rooms.goal_reward;
    j["learner"] = {{"kind", "sarsa"},
                    {"alpha", c.sarsa.alpha},
                    {"gamma", c.sarsa.gamma},
                    {"tau", c.sarsa.tau},
                    {"initial_q", c.sarsa.initial_q}};
  } else {
    j["arena"] = c.pinball;
    j["learner"] = {{"kind", "actor_critic"},
                    {"alpha_actor", c.actor_critic.alpha_actor},
                    {"alpha_critic", c.actor_critic.alpha_critic},
                    {"gamma", c.actor_critic.gamma},
                    {"tau", c.actor_critic.tau},
                    {"fourier_order", c.fourier_order}};
  }
  return j;
}

inline std::string config_digest(const ExperimentConfig& c) { return hex64(fnv1a64(config_json(c).dump())); }

/// Shaper for a method, or null for the baseline. Random-subgoal runs without
/// a given series draw their own from `rng`.
inline std::unique_ptr<Shaper> make_shaper(const ExperimentConfig& c, double gamma, SeededRng& rng) {
  switch (c.method) {
    case Method::Baseline: return nullptr;
    case Method::Hsrs:
      return std::make_unique<SubgoalShaper>(std::make_shared<const SubgoalSeries>(*c.subgoals), c.eta, gamma);
    case Method::Rsrs: {
      auto series = c.subgoals ? *c.subgoals : random_series(c.map(), c.random_subgoal_count, rng);
      return std::make_unique<SubgoalShaper>(std::make_shared<const SubgoalSeries>(std::move(series)), c.eta, gamma);
    }
    case Method::Nrs:
      return std::make_unique<NaiveShaper>(std::make_shared<const SubgoalSeries>(*c.subgoals), c.eta, gamma);
  }
  return nullptr;
}

using EpisodeProgress = std::function<void(std::size_t run_index, std::size_t episode, const EpisodeRecord&)>;

/// Run `run_index` of an experiment; its seed is config.seed + run_index.
inline RunRecord run_single(const ExperimentConfig& c, std::size_t run_index, const EpisodeProgress& progress = {}) {
  const std::uint64_t seed = c.seed + run_index;
  const std::string digest = config_digest(c);
  auto on_episode = [&](std::size_t e, const EpisodeRecord& r) {
    if (progress) progress(run_index, e, r);
  };
  if (c.env == "four_rooms") {
    return run_learning(
        [&](SeededRng&) { return FourRooms(c.four_rooms); },
        [&](SeededRng&) {
          FourRooms probe(c.four_rooms);
          return SarsaLearner(probe.state_count(), probe.action_count(), c.sarsa);
        },
        [&](SeededRng& rng) { return make_shaper(c, c.sarsa.gamma, rng); }, c.episodes, seed, c.effective_step_cap(),
        c.method, digest, on_episode);
  }
  if (c.env == "pinball") {
    return run_learning(
        [&](SeededRng&) { return Pinball(c.pinball); },
        [&](SeededRng&) {
          return FourierActorCritic(FourierBasis(c.fourier_order, 4), Pinball::state_bounds(), kPinballActionCount,
                                    c.actor_critic);
        },
        [&](SeededRng& rng) { return make_shaper(c, c.actor_critic.gamma, rng); }, c.episodes, seed,
        c.effective_step_cap(), c.method, digest, on_episode);
  }
  throw ConfigError("unknown environment '" + c.env + "'");
}

inline std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// All runs of an experiment, fanned out over `workers` threads. Results are
/// ordered by run index and do not depend on the worker count.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& c, std::size_t workers = default_workers(),
                                             const EpisodeProgress& progress = {}) {
  c.validate();
  std::vector<RunRecord> out(c.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < c.runs; i = next++) {
      try {
        out[i] = run_single(c, i, progress);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, c.runs);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace sgrs

#endif  // SGRS_EXPERIMENT_HPP
