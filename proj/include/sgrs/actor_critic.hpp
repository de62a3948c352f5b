#ifndef SGRS_ACTOR_CRITIC_HPP
#define SGRS_ACTOR_CRITIC_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"
#include "sgrs/fourier.hpp"
#include "sgrs/rng.hpp"
#include "sgrs/softmax.hpp"
#include "sgrs/state.hpp"

namespace sgrs {

struct ActorCriticParams {
  double alpha_actor = 0.01;
  double alpha_critic = 0.01;
  double gamma = 0.99;
  double tau = 1.0;
};

/// Linear critic V(s) = w . phi(s) and softmax actor over preferences
/// theta_a . phi(s), sharing one feature vector.
class ActorCritic {
 public:
  ActorCritic(std::size_t features, std::size_t actions, ActorCriticParams params = {})
      : params_(params), actions_(actions), features_(features), w_(features, 0.0), theta_(actions * features, 0.0) {
    if (features == 0 || actions == 0) throw ConfigError("actor-critic: dimensions must be positive");
    if (!(params.alpha_actor > 0.0) || !(params.alpha_critic > 0.0))
      throw ConfigError("actor-critic: learning rates must be positive");
    if (!(params.gamma > 0.0 && params.gamma <= 1.0)) throw ConfigError("actor-critic: gamma must lie in (0, 1]");
    if (!(params.tau > 0.0)) throw ConfigError("actor-critic: tau must be positive");
  }

  const ActorCriticParams& params() const noexcept { return params_; }
  std::size_t action_count() const noexcept { return actions_; }
  std::size_t feature_count() const noexcept { return features_; }

  std::span<const double> critic_weights() const noexcept { return w_; }
  std::span<double> critic_weights() noexcept { return w_; }
  std::span<const double> actor_weights() const noexcept { return theta_; }
  std::span<double> actor_weights() noexcept { return theta_; }

  double value(std::span<const double> phi) const {
    check(phi);
    double v = 0.0;
    for (std::size_t i = 0; i < features_; ++i) v += w_[i] * phi[i];
    return v;
  }

  std::vector<double> preferences(std::span<const double> phi) const {
    check(phi);
    std::vector<double> pref(actions_, 0.0);
    for (std::size_t a = 0; a < actions_; ++a) {
      const double* row = theta_.data() + a * features_;
      double s = 0.0;
      for (std::size_t i = 0; i < features_; ++i) s += row[i] * phi[i];
      pref[a] = s;
    }
    return pref;
  }

  std::vector<double> policy(std::span<const double> phi) const { return softmax_probs(preferences(phi), params_.tau); }

  /// d log pi(action | s) / d theta, laid out like theta (action-major):
  /// entry (b, i) = ([b == action] - pi_b) * phi_i / tau.
  std::vector<double> log_policy_gradient(std::span<const double> phi, std::size_t action) const {
    if (action >= actions_) throw DomainError("actor-critic: action out of range");
    const auto pi = policy(phi);
    std::vector<double> g(theta_.size());
    for (std::size_t b = 0; b < actions_; ++b) {
      const double coef = ((b == action ? 1.0 : 0.0) - pi[b]) / params_.tau;
      for (std::size_t i = 0; i < features_; ++i) g[b * features_ + i] = coef * phi[i];
    }
    return g;
  }

  /// log pi(action | s) for the current actor weights.
  double log_policy(std::span<const double> phi, std::size_t action) const {
    const auto pi = policy(phi);
    return std::log(pi.at(action));
  }

 private:
  void check(std::span<const double> phi) const {
    if (phi.size() != features_) throw DomainError("actor-critic: feature vector has wrong size");
  }

  ActorCriticParams params_;
  std::size_t actions_;
  std::size_t features_;
  std::vector<double> w_;
  std::vector<double> theta_;
};

/// One-step TD actor-critic on the shaped reward r + F:
///   delta = r + F + gamma * V(s') * [not terminal] - V(s)
///   w     += alpha_critic * delta * phi(s)
///   theta += alpha_actor * delta * grad log pi(a | s)
/// The policy gradient uses the actor weights from before the update. Returns delta.
inline double actor_critic_update(ActorCritic& ac, const Transition& t, double shaping, std::span<const double> phi,
                                  std::span<const double> phi_next) {
  const auto& p = ac.params();
  const double bootstrap = t.terminal ? 0.0 : ac.value(phi_next);
  const double delta = (t.reward + shaping) + p.gamma * bootstrap - ac.value(phi);
  if (delta == 0.0) return delta;
  const auto grad = ac.log_policy_gradient(phi, t.action);
  auto w = ac.critic_weights();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += p.alpha_critic * delta * phi[i];
  auto theta = ac.actor_weights();
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += p.alpha_actor * delta * grad[i];
  return delta;
}

/// Actor-critic over Fourier features of a bounded continuous state.
class FourierActorCritic {
 public:
  FourierActorCritic(FourierBasis basis, std::vector<Bounds> bounds, std::size_t actions, ActorCriticParams params = {})
      : basis_(std::move(basis)), bounds_(std::move(bounds)), ac_(basis_.size(), actions, params) {
    if (bounds_.size() != basis_.dim()) throw ConfigError("actor-critic: bounds do not match basis dimension");
  }

  std::size_t action_count() const noexcept { return ac_.action_count(); }
  const ActorCritic& model() const noexcept { return ac_; }
  ActorCritic& model() noexcept { return ac_; }
  const FourierBasis& basis() const noexcept { return basis_; }

  std::vector<double> features(const StateVec& s) const {
    return basis_.evaluate(normalize(s.as_continuous().values, bounds_));
  }

  template <UniformSource Rng>
  std::size_t begin_episode(const StateVec& s, Rng& rng) {
    phi_ = features(s);
    return sample_softmax(ac_.preferences(phi_), ac_.params().tau, rng);
  }

  /// Updates on (s, a, r + F, s'), then draws a' from the updated actor
  /// (no draw at terminal).
  template <UniformSource Rng>
  std::size_t observe(const Transition& t, double shaping, Rng& rng) {
    auto phi_next = features(t.next_state);
    actor_critic_update(ac_, t, shaping, phi_, phi_next);
    phi_ = std::move(phi_next);
    if (t.terminal) return 0;
    return sample_softmax(ac_.preferences(phi_), ac_.params().tau, rng);
  }

 private:
  FourierBasis basis_;
  std::vector<Bounds> bounds_;
  ActorCritic ac_;
  std::vector<double> phi_;
};

inline void to_json(nlohmann::json& j, const FourierActorCritic& l) {
  const auto& m = l.model();
  j = {{"kind", "fourier_actor_critic"},
       {"order", l.basis().order()},
       {"dim", l.basis().dim()},
       {"actions", m.action_count()},
       {"critic", std::vector<double>(m.critic_weights().begin(), m.critic_weights().end())},
       {"actor", std::vector<double>(m.actor_weights().begin(), m.actor_weights().end())}};
}

}  // namespace sgrs

#endif  // SGRS_ACTOR_CRITIC_HPP
