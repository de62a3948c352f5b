#ifndef SGRS_VERIFY_HPP
#define SGRS_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgrs/error.hpp"
#include "sgrs/four_rooms.hpp"
#include "sgrs/rng.hpp"
#include "sgrs/sarsa.hpp"
#include "sgrs/state.hpp"

// Brute-force checks of the shaping theory on small, fully enumerable problems.
// Everything here recomputes potentials from complete state histories rather
// than reusing ShapingContext, so the checks are independent of the fast path.

namespace sgrs {

struct Outcome {
  std::size_t next = 0;
  double prob = 0.0;
  double reward = 0.0;
};

/// Finite MDP with explicit outcome lists per (state, action).
struct FiniteMdp {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::size_t start = 0;
  double gamma = 1.0;
  std::vector<bool> terminal;             // per state
  std::vector<std::vector<Outcome>> out;  // index s * actions + a

  const std::vector<Outcome>& outcomes(std::size_t s, std::size_t a) const { return out.at(s * actions + a); }

  void validate() const {
    if (states == 0 || actions == 0) throw ConfigError("mdp: dimensions must be positive");
    if (start >= states) throw ConfigError("mdp: start out of range");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("mdp: gamma must lie in (0, 1]");
    if (terminal.size() != states || out.size() != states * actions) throw ConfigError("mdp: table sizes do not match");
    for (std::size_t s = 0; s < states; ++s) {
      if (terminal[s]) continue;
      for (std::size_t a = 0; a < actions; ++a) {
        double total = 0.0;
        for (const auto& o : outcomes(s, a)) {
          if (o.next >= states || !(o.prob > 0.0)) throw ConfigError("mdp: bad outcome");
          total += o.prob;
        }
        if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mdp: outcome probabilities must sum to 1");
      }
    }
  }
};

/// pi(a | s) laid out as s * actions + a.
using TabularPolicy = std::vector<double>;

enum class PotentialKind { SubgoalHistory, NaiveState, Table };

/// A potential over complete histories. `history` follows the episode loop:
/// the states entered after s0, so it is empty at the start.
struct HistoryPotential {
  PotentialKind kind = PotentialKind::Table;
  std::vector<std::size_t> subgoals;  // ordered, for SubgoalHistory / NaiveState
  std::vector<double> table;          // per state, for Table
  double eta = 1.0;

  double operator()(std::size_t start, std::span<const std::size_t> history) const {
    const std::size_t current = history.empty() ? start : history.back();
    switch (kind) {
      case PotentialKind::SubgoalHistory: {
        std::size_t c = 0;
        for (std::size_t s : history)
          if (c < subgoals.size() && s == subgoals[c]) ++c;
        return eta * static_cast<double>(c);
      }
      case PotentialKind::NaiveState:
        return std::find(subgoals.begin(), subgoals.end(), current) != subgoals.end() ? eta : 0.0;
      case PotentialKind::Table:
        return table.at(current);
    }
    return 0.0;
  }
};

/// Number of complete trajectories of length <= horizon under `policy`
/// (one per action-with-positive-probability and outcome branch).
inline double trajectory_count(const FiniteMdp& mdp, const TabularPolicy& policy, std::size_t horizon) {
  std::vector<double> leaves(mdp.states, 1.0), next(mdp.states);
  for (std::size_t k = 0; k < horizon; ++k) {
    for (std::size_t s = 0; s < mdp.states; ++s) {
      if (mdp.terminal[s]) {
        next[s] = 1.0;
        continue;
      }
      double n = 0.0;
      for (std::size_t a = 0; a < mdp.actions; ++a) {
        if (!(policy[s * mdp.actions + a] > 0.0)) continue;
        for (const auto& o : mdp.outcomes(s, a)) n += leaves[o.next];
      }
      next[s] = n;
    }
    leaves.swap(next);
  }
  return leaves[mdp.start];
}

inline constexpr double kMaxTrajectories = 1e4;

namespace detail {

struct DecompositionWalk {
  const FiniteMdp& mdp;
  const TabularPolicy& policy;
  const HistoryPotential& phi;
  std::size_t horizon;
  std::vector<std::vector<double>> unshaped;  // [remaining][state]
  std::vector<std::size_t> history;
  double max_error = 0.0;

  bool at_end(std::size_t s, std::size_t depth) const { return mdp.terminal[s] || depth == horizon; }

  // Potential with the absorbing-end convention: zero once the episode is over.
  double effective_phi(std::size_t s, std::size_t depth) const {
    return at_end(s, depth) ? 0.0 : phi(mdp.start, history);
  }

  // Expected shaped return from the current history, accumulated edge by edge.
  double shaped(std::size_t s, std::size_t depth) {
    if (at_end(s, depth)) return 0.0;
    const double phi_here = effective_phi(s, depth);
    double value = 0.0;
    for (std::size_t a = 0; a < mdp.actions; ++a) {
      const double pa = policy[s * mdp.actions + a];
      if (!(pa > 0.0)) continue;
      for (const auto& o : mdp.outcomes(s, a)) {
        history.push_back(o.next);
        const double phi_next = effective_phi(o.next, depth + 1);
        const double f = mdp.gamma * phi_next - phi_here;
        const double rest = shaped(o.next, depth + 1);
        history.pop_back();
        value += pa * o.prob * (o.reward + f + mdp.gamma * rest);
      }
    }
    const double expected = unshaped[horizon - depth][s] - phi_here;
    max_error = std::max(max_error, std::abs(value - expected));
    return value;
  }
};

// Unshaped finite-horizon policy values by backward induction: v[k][s] with k steps left.
inline std::vector<std::vector<double>> policy_values(const FiniteMdp& mdp, const TabularPolicy& policy,
                                                      std::size_t horizon) {
  std::vector<std::vector<double>> v(horizon + 1, std::vector<double>(mdp.states, 0.0));
  for (std::size_t k = 1; k <= horizon; ++k)
    for (std::size_t s = 0; s < mdp.states; ++s) {
      if (mdp.terminal[s]) continue;
      double total = 0.0;
      for (std::size_t a = 0; a < mdp.actions; ++a) {
        const double pa = policy[s * mdp.actions + a];
        if (!(pa > 0.0)) continue;
        for (const auto& o : mdp.outcomes(s, a)) total += pa * o.prob * (o.reward + mdp.gamma * v[k - 1][o.next]);
      }
      v[k][s] = total;
    }
  return v;
}

}  // namespace detail

/// Enumerates every trajectory of `policy` from the start state up to
/// `horizon` steps and checks, at every reachable non-final history h with
/// current state s and k steps left, that
///   shaped value(h) = unshaped value(s, k) - Phi(h).
/// The shaped side sums r + gamma * Phi(h') - Phi(h) along each branch; the
/// potential is taken as zero once the episode has ended (goal or horizon),
/// which is what makes the telescoping sum exact for finite episodes.
/// Returns the largest absolute discrepancy.
inline double verify_return_decomposition(const FiniteMdp& mdp, const TabularPolicy& policy,
                                          const HistoryPotential& phi, std::size_t horizon) {
  mdp.validate();
  if (policy.size() != mdp.states * mdp.actions) throw ConfigError("verify: policy has wrong size");
  if (trajectory_count(mdp, policy, horizon) > kMaxTrajectories)
    throw ResourceError("verify: more than 1e4 trajectories; reduce the horizon");
  detail::DecompositionWalk walk{mdp, policy, phi, horizon, detail::policy_values(mdp, policy, horizon), {}, 0.0};
  walk.shaped(mdp.start, 0);
  return walk.max_error;
}

/// Result of comparing optimal greedy actions with and without shaping.
struct ArgmaxCheck {
  std::size_t histories = 0;         // decision points compared
  std::size_t mismatches = 0;        // histories whose greedy sets differ
  double max_value_error = 0.0;      // max |Q_phi(h, a) - (Q(s, a) - Phi(h))|
};

namespace detail {

struct ArgmaxWalk {
  const FiniteMdp& mdp;
  const HistoryPotential& phi;
  std::size_t horizon;
  double tie_tolerance;
  std::vector<std::vector<double>> q;  // unshaped optimal [remaining][s * A + a]
  std::vector<std::size_t> history;
  ArgmaxCheck result;

  bool at_end(std::size_t s, std::size_t depth) const { return mdp.terminal[s] || depth == horizon; }
  double effective_phi(std::size_t s, std::size_t depth) const {
    return at_end(s, depth) ? 0.0 : phi(mdp.start, history);
  }

  std::vector<std::size_t> greedy(std::span<const double> values) const {
    const double best = *std::max_element(values.begin(), values.end());
    std::vector<std::size_t> set;
    for (std::size_t a = 0; a < values.size(); ++a)
      if (values[a] >= best - tie_tolerance) set.push_back(a);
    return set;
  }

  // Optimal shaped value of the current history.
  double value(std::size_t s, std::size_t depth) {
    if (at_end(s, depth)) return 0.0;
    const double phi_here = effective_phi(s, depth);
    std::vector<double> qs(mdp.actions, 0.0);
    for (std::size_t a = 0; a < mdp.actions; ++a)
      for (const auto& o : mdp.outcomes(s, a)) {
        history.push_back(o.next);
        const double f = mdp.gamma * effective_phi(o.next, depth + 1) - phi_here;
        const double rest = value(o.next, depth + 1);
        history.pop_back();
        qs[a] += o.prob * (o.reward + f + mdp.gamma * rest);
      }
    const std::span<const double> plain(q[horizon - depth].data() + s * mdp.actions, mdp.actions);
    for (std::size_t a = 0; a < mdp.actions; ++a)
      result.max_value_error = std::max(result.max_value_error, std::abs(qs[a] - (plain[a] - phi_here)));
    ++result.histories;
    if (greedy(qs) != greedy(plain)) ++result.mismatches;
    return *std::max_element(qs.begin(), qs.end());
  }
};

}  // namespace detail

/// Exact finite-horizon optimal control over histories, with the shaped
/// reward, compared against the unshaped optimal Q over (state, steps left).
/// Greedy sets are compared with a small tie tolerance.
inline ArgmaxCheck verify_argmax_invariance(const FiniteMdp& mdp, const HistoryPotential& phi, std::size_t horizon,
                                            double tie_tolerance = 1e-9) {
  mdp.validate();
  const TabularPolicy all(mdp.states * mdp.actions, 1.0);
  if (trajectory_count(mdp, all, horizon) > kMaxTrajectories)
    throw ResourceError("verify: more than 1e4 trajectories; reduce the horizon");
  const std::size_t A = mdp.actions;
  std::vector<std::vector<double>> q(horizon + 1, std::vector<double>(mdp.states * A, 0.0));
  std::vector<double> v(mdp.states, 0.0);
  for (std::size_t k = 1; k <= horizon; ++k) {
    for (std::size_t s = 0; s < mdp.states; ++s) {
      if (mdp.terminal[s]) continue;
      for (std::size_t a = 0; a < A; ++a) {
        double total = 0.0;
        for (const auto& o : mdp.outcomes(s, a)) total += o.prob * (o.reward + mdp.gamma * v[o.next]);
        q[k][s * A + a] = total;
      }
    }
    for (std::size_t s = 0; s < mdp.states; ++s)
      v[s] = mdp.terminal[s] ? 0.0 : *std::max_element(q[k].begin() + s * A, q[k].begin() + (s + 1) * A);
  }
  detail::ArgmaxWalk walk{mdp, phi, horizon, tie_tolerance, std::move(q), {}, {}};
  walk.value(mdp.start, 0);
  return walk.result;
}

/// A random verification problem: MDP, stochastic policy, potential and a
/// horizon small enough for exhaustive enumeration.
struct VerificationCase {
  FiniteMdp mdp;
  TabularPolicy policy;
  HistoryPotential phi;
  std::size_t horizon = 0;
};

/// Draws a case with 2-6 states, 1-3 actions, 1-2 successors per
/// (state, action), one terminal state with probability 1/2 and a subgoal
/// history potential over two non-start states. The horizon starts at 8 and
/// shrinks until both the policy tree and the full action tree stay within
/// 1e4 trajectories.
inline VerificationCase random_verification_case(SeededRng& rng, PotentialKind kind = PotentialKind::SubgoalHistory) {
  VerificationCase vc;
  FiniteMdp& m = vc.mdp;
  m.states = 2 + rng.uniform_index(5);
  m.actions = 1 + rng.uniform_index(3);
  m.start = 0;
  m.gamma = 0.5 + 0.5 * rng.uniform01();
  m.terminal.assign(m.states, false);
  if (rng.uniform01() < 0.5) m.terminal[1 + rng.uniform_index(m.states - 1)] = true;
  m.out.resize(m.states * m.actions);
  for (std::size_t s = 0; s < m.states; ++s)
    for (std::size_t a = 0; a < m.actions; ++a) {
      if (m.terminal[s]) continue;
      const std::size_t branches = 1 + rng.uniform_index(2);
      auto& list = m.out[s * m.actions + a];
      double left = 1.0;
      for (std::size_t b = 0; b < branches; ++b) {
        const double p = b + 1 == branches ? left : 0.2 + 0.6 * rng.uniform01();
        left -= b + 1 == branches ? 0.0 : p;
        list.push_back({rng.uniform_index(m.states), p, rng.uniform01() * 2.0 - 1.0});
      }
    }
  vc.policy.assign(m.states * m.actions, 0.0);
  for (std::size_t s = 0; s < m.states; ++s) {
    double total = 0.0;
    for (std::size_t a = 0; a < m.actions; ++a) total += vc.policy[s * m.actions + a] = 0.1 + rng.uniform01();
    for (std::size_t a = 0; a < m.actions; ++a) vc.policy[s * m.actions + a] /= total;
  }
  vc.phi.kind = kind;
  vc.phi.eta = 0.1 + rng.uniform01();
  const std::size_t candidates = m.states - 1;
  const std::size_t count = std::min<std::size_t>(2, candidates);
  for (std::size_t i = 0; i < count; ++i) vc.phi.subgoals.push_back(1 + rng.uniform_index(candidates));
  vc.phi.table.resize(m.states);
  for (auto& x : vc.phi.table) x = rng.uniform01() * 2.0 - 1.0;

  const TabularPolicy all(m.states * m.actions, 1.0);
  vc.horizon = 8;
  while (vc.horizon > 1 && trajectory_count(m, all, vc.horizon) > kMaxTrajectories) --vc.horizon;
  return vc;
}

/// One SARSA experience tuple, as replayed by the equivalence check.
struct Experience {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  std::size_t next_action = 0;
  bool terminal = false;
};

/// Replays one experience stream through two SARSA learners: L starts at
/// `q0` and learns from r + gamma * Phi(s') - Phi(s), L' starts at
/// q0 + Phi(s) and learns from r alone. Returns the largest difference
/// between their accumulated updates Q - Q_init over all entries after every
/// step. Phi of a terminal successor is taken as zero on the shaped side,
/// matching L', which never bootstraps from a terminal state.
inline double verify_wiewiora_equivalence(std::size_t states, std::size_t actions,
                                          std::span<const Experience> experience, std::span<const double> phi,
                                          double alpha, double gamma, double q0 = 0.0) {
  if (phi.size() != states) throw ConfigError("verify: potential table has wrong size");
  QTable shaped(states, actions, q0), shifted(states, actions, q0);
  for (std::size_t s = 0; s < states; ++s)
    for (std::size_t a = 0; a < actions; ++a) shifted.at(s, a) += phi[s];
  const QTable shaped0 = shaped, shifted0 = shifted;

  double worst = 0.0;
  for (const auto& e : experience) {
    const double phi_next = e.terminal ? 0.0 : phi[e.next_state];
    const double f = gamma * phi_next - phi[e.state];
    const Transition t{StateVec::discrete(e.state), e.action, e.reward, StateVec::discrete(e.next_state),
                       e.terminal};
    sarsa_update(shaped, t, e.next_action, f, alpha, gamma);
    sarsa_update(shifted, t, e.next_action, 0.0, alpha, gamma);
    const auto a = shaped.values(), b = shifted.values();
    const auto a0 = shaped0.values(), b0 = shifted0.values();
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs((a[i] - a0[i]) - (b[i] - b0[i])));
  }
  return worst;
}

/// Random-walk experience on a grid world: uniform random actions, restarts
/// at the start cell after reaching the goal.
inline std::vector<Experience> grid_experience(const FourRoomsConfig& cfg, std::size_t steps, SeededRng& rng) {
  FourRooms env(cfg);
  std::vector<Experience> out;
  out.reserve(steps);
  StateVec s = env.reset();
  std::size_t a = rng.uniform_index(env.action_count());
  for (std::size_t t = 0; t < steps; ++t) {
    const StepResult r = env.step(a, rng);
    const std::size_t next_a = rng.uniform_index(env.action_count());
    out.push_back({s.as_discrete().id, a, r.reward, r.next_state.as_discrete().id, next_a, r.terminal});
    if (r.terminal) {
      s = env.reset();
      a = rng.uniform_index(env.action_count());
    } else {
      s = r.next_state;
      a = next_a;
    }
  }
  return out;
}

}  // namespace sgrs

#endif  // SGRS_VERIFY_HPP
