#ifndef SGRS_EPISODE_HPP
#define SGRS_EPISODE_HPP

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"
#include "sgrs/rng.hpp"
#include "sgrs/shaping.hpp"
#include "sgrs/state.hpp"

namespace sgrs {

template <typename E>
concept Environment = requires(E& env, const E& cenv, std::size_t action, SeededRng& rng) {
  { env.reset() } -> std::same_as<StateVec>;
  { env.step(action, rng) } -> std::same_as<StepResult>;
  { cenv.action_count() } -> std::convertible_to<std::size_t>;
};

template <typename L>
concept Learner = requires(L& learner, const L& clearner, const StateVec& s, const Transition& t, double f,
                           SeededRng& rng) {
  { clearner.action_count() } -> std::convertible_to<std::size_t>;
  { learner.begin_episode(s, rng) } -> std::convertible_to<std::size_t>;
  { learner.observe(t, f, rng) } -> std::convertible_to<std::size_t>;
};

/// Per-step view handed to an episode observer.
struct StepEvent {
  std::size_t t = 0;  // 0-based step index
  const Transition& transition;
  double shaping = 0.0;
  double potential = 0.0;  // potential after the step
};

struct NoObserver {
  void operator()(const StepEvent&) const noexcept {}
};

/// One episode of the agent-environment-shaper loop:
///
///   s <- reset(); h <- []; a ~ pi(s)
///   repeat: (s', r) <- step(a); h' <- h + [s']; F <- gamma * Phi(h') - Phi(h)
///           learner update with r + F and choice of a'; s <- s'
///   until terminal or step_cap steps.
///
/// The final transition keeps F = gamma * Phi(h_T) - Phi(h_{T-1}); the terminal
/// potential is not reset to zero. RNG draws per step: the environment's
/// draws, then the learner's policy draw for a'.
template <Environment Env, Learner L, typename Observer = NoObserver>
EpisodeRecord run_episode(Env& env, L& learner, Shaper* shaper, std::size_t step_cap, SeededRng& rng,
                          Observer&& observer = {}) {
  if (step_cap < 1) throw ConfigError("run_episode: step cap must be at least 1");
  if (env.action_count() != learner.action_count())
    throw ConfigError("run_episode: environment has " + std::to_string(env.action_count()) +
                      " actions, learner expects " + std::to_string(learner.action_count()));

  EpisodeRecord rec;
  StateVec s = env.reset();
  if (shaper) shaper->reset(s);
  std::size_t a = learner.begin_episode(s, rng);

  for (std::size_t t = 0; t < step_cap; ++t) {
    StepResult res = env.step(a, rng);
    const double f = shaper ? shaper->step(res.next_state) : 0.0;
    Transition tr{std::move(s), a, res.reward, res.next_state, res.terminal};
    a = learner.observe(tr, f, rng);

    ++rec.steps;
    rec.env_return += res.reward;
    rec.shaped_return += res.reward + f;
    observer(StepEvent{t, tr, f, shaper ? shaper->potential() : 0.0});

    s = std::move(res.next_state);
    if (res.terminal) break;
  }
  rec.subgoals_achieved = shaper ? shaper->subgoals_achieved() : 0;
  // Set whenever the cap was used up, including a goal reached on the last allowed step.
  rec.truncated = rec.steps == step_cap;
  return rec;
}

/// A learning run: one fresh learner reused across `episode_count` episodes,
/// shaper reset at each episode start. Each factory gets its own RNG stream,
/// so construction-time randomness (random subgoals, say) never shifts the
/// episode draw sequence. Streams of SeededRng(seed): 0 feeds the
/// episode loop, 1 the environment factory, 2 the learner factory, 3 the
/// shaper factory.
template <typename EnvFactory, typename LearnerFactory, typename ShaperFactory, typename EpisodeCallback>
RunRecord run_learning(EnvFactory&& make_env, LearnerFactory&& make_learner, ShaperFactory&& make_shaper,
                       std::size_t episode_count, std::uint64_t seed, std::size_t step_cap, Method method,
                       std::string config_digest, EpisodeCallback&& on_episode) {
  if (episode_count < 1) throw ConfigError("run_learning: episode count must be positive");
  const SeededRng root(seed);
  SeededRng env_rng = root.stream(1), learner_rng = root.stream(2), shaper_rng = root.stream(3);
  auto env = make_env(env_rng);
  auto learner = make_learner(learner_rng);
  std::unique_ptr<Shaper> shaper = make_shaper(shaper_rng);
  SeededRng rng = root.stream(0);

  RunRecord run;
  run.seed = seed;
  run.method = method;
  run.config_digest = std::move(config_digest);
  run.episodes.reserve(episode_count);
  for (std::size_t e = 0; e < episode_count; ++e) {
    run.episodes.push_back(run_episode(env, learner, shaper.get(), step_cap, rng));
    on_episode(e, run.episodes.back());
  }
  return run;
}

template <typename EnvFactory, typename LearnerFactory, typename ShaperFactory>
RunRecord run_learning(EnvFactory&& make_env, LearnerFactory&& make_learner, ShaperFactory&& make_shaper,
                       std::size_t episode_count, std::uint64_t seed, std::size_t step_cap,
                       Method method = Method::Baseline, std::string config_digest = {}) {
  return run_learning(make_env, make_learner, make_shaper, episode_count, seed, step_cap, method,
                      std::move(config_digest), [](std::size_t, const EpisodeRecord&) {});
}

inline void to_json(nlohmann::json& j, const EpisodeRecord& e) {
  j = {{"steps", e.steps},
       {"env_return", e.env_return},
       {"shaped_return", e.shaped_return},
       {"subgoals_achieved", e.subgoals_achieved},
       {"truncated", e.truncated}};
}

inline void from_json(const nlohmann::json& j, EpisodeRecord& e) {
  e.steps = j.at("steps").get<std::size_t>();
  e.env_return = j.at("env_return").get<double>();
  e.shaped_return = j.at("shaped_return").get<double>();
  e.subgoals_achieved = j.at("subgoals_achieved").get<std::size_t>();
  e.truncated = j.at("truncated").get<bool>();
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = {{"seed", r.seed}, {"method", to_string(r.method)}, {"config_digest", r.config_digest}, {"episodes", r.episodes}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  try {
    r.seed = j.at("seed").get<std::uint64_t>();
    r.method = method_from_string(j.at("method").get<std::string>());
    r.config_digest = j.at("config_digest").get<std::string>();
    r.episodes = j.at("episodes").get<std::vector<EpisodeRecord>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  }
}

}  // namespace sgrs

#endif  // SGRS_EPISODE_HPP
