#ifndef SGRS_SARSA_HPP
#define SGRS_SARSA_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"
#include "sgrs/rng.hpp"
#include "sgrs/softmax.hpp"
#include "sgrs/state.hpp"

namespace sgrs {

/// Dense action-value table indexed by (state id, action).
class QTable {
 public:
  QTable(std::size_t states, std::size_t actions, double initial = 0.0)
      : states_(states), actions_(actions), initial_(initial), values_(states * actions, initial) {
    if (states == 0 || actions == 0) throw ConfigError("QTable: dimensions must be positive");
  }

  std::size_t state_count() const noexcept { return states_; }
  std::size_t action_count() const noexcept { return actions_; }
  double initial_value() const noexcept { return initial_; }

  double& at(std::size_t s, std::size_t a) {
    check(s, a);
    return values_[s * actions_ + a];
  }
  double at(std::size_t s, std::size_t a) const {
    check(s, a);
    return values_[s * actions_ + a];
  }

  std::span<const double> row(std::size_t s) const {
    check(s, 0);
    return {values_.data() + s * actions_, actions_};
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  void check(std::size_t s, std::size_t a) const {
    if (s >= states_ || a >= actions_)
      throw DomainError("QTable: index (" + std::to_string(s) + ", " + std::to_string(a) + ") out of range");
  }

  std::size_t states_;
  std::size_t actions_;
  double initial_;
  std::vector<double> values_;
};

/// On-policy TD update on the shaped reward r + F:
///   delta = r + F + gamma * Q(s', a') * [not terminal] - Q(s, a);  Q(s, a) += alpha * delta.
/// Returns delta.
inline double sarsa_update(QTable& q, const Transition& t, std::size_t next_action, double shaping, double alpha,
                           double gamma) {
  const std::size_t s = t.state.as_discrete().id;
  const double bootstrap = t.terminal ? 0.0 : q.at(t.next_state.as_discrete().id, next_action);
  double& entry = q.at(s, t.action);
  const double delta = (t.reward + shaping) + gamma * bootstrap - entry;
  entry += alpha * delta;
  return delta;
}

struct SarsaParams {
  double alpha = 0.01;
  double gamma = 0.99;
  double tau = 1.0;
  double initial_q = 0.0;
};

/// Tabular SARSA with a softmax policy over Q(s, .).
class SarsaLearner {
 public:
  SarsaLearner(std::size_t states, std::size_t actions, SarsaParams params = {})
      : params_(params), q_(states, actions, params.initial_q) {
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw ConfigError("sarsa: alpha must lie in (0, 1)");
    if (!(params.gamma > 0.0 && params.gamma <= 1.0)) throw ConfigError("sarsa: gamma must lie in (0, 1]");
    if (!(params.tau > 0.0)) throw ConfigError("sarsa: tau must be positive");
  }

  std::size_t action_count() const noexcept { return q_.action_count(); }
  const QTable& q() const noexcept { return q_; }
  QTable& q() noexcept { return q_; }
  const SarsaParams& params() const noexcept { return params_; }

  std::vector<double> action_probs(const StateVec& s) const { return softmax_probs(q_.row(s.as_discrete().id), params_.tau); }

  template <UniformSource Rng>
  std::size_t select_action(const StateVec& s, Rng& rng) const {
    return sample_softmax(q_.row(s.as_discrete().id), params_.tau, rng);
  }

  template <UniformSource Rng>
  std::size_t begin_episode(const StateVec& s, Rng& rng) {
    return select_action(s, rng);
  }

  /// Picks a' in s' (one draw, skipped at terminal), then updates Q(s, a).
  template <UniformSource Rng>
  std::size_t observe(const Transition& t, double shaping, Rng& rng) {
    const std::size_t next = t.terminal ? 0 : select_action(t.next_state, rng);
    sarsa_update(q_, t, next, shaping, params_.alpha, params_.gamma);
    return next;
  }

 private:
  SarsaParams params_;
  QTable q_;
};

inline void to_json(nlohmann::json& j, const QTable& q) {
  j = {{"kind", "q_table"},
       {"states", q.state_count()},
       {"actions", q.action_count()},
       {"initial", q.initial_value()},
       {"values", std::vector<double>(q.values().begin(), q.values().end())}};
}

inline QTable q_table_from_json(const nlohmann::json& j) {
  QTable q(j.at("states").get<std::size_t>(), j.at("actions").get<std::size_t>(), j.at("initial").get<double>());
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != q.values().size()) throw ConfigError("QTable: checkpoint size mismatch");
  std::copy(values.begin(), values.end(), q.values().begin());
  return q;
}

}  // namespace sgrs

#endif  // SGRS_SARSA_HPP
