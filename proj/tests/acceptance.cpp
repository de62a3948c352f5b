// Acceptance checks 1-9. Prints one PASS/FAIL line per check and exits
// nonzero when any fails. `--only 4,5` restricts the run to some checks.

#include <chrono>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sgrs/actor_critic.hpp"
#include "sgrs/analysis.hpp"
#include "sgrs/experiment.hpp"
#include "sgrs/fourier.hpp"
#include "sgrs/softmax.hpp"
#include "sgrs/stats.hpp"
#include "sgrs/subgoal.hpp"
#include "sgrs/verify.hpp"

using namespace sgrs;

namespace {

// Pinned tolerances and budgets.
constexpr double kWiewioraTol = 1e-9;
constexpr std::size_t kWiewioraSteps = 10000;
constexpr double kDecompositionTol = 1e-9;
constexpr std::size_t kRandomMdps = 50;
constexpr std::uint64_t kMdpSeed = 20240501;
constexpr std::size_t kGridRuns = 100;
constexpr std::size_t kGridEpisodes = 1000;
constexpr std::uint64_t kGridSeed = 1000;
constexpr double kGridThreshold = 50.0;
constexpr double kAlpha = 0.05;
constexpr double kMinImprovement = 0.15;
constexpr double kAsymptoteSlack = 0.30;
constexpr std::size_t kOracleEpisodes = 20000;
constexpr std::size_t kPinballRuns = 40;
constexpr std::size_t kPinballEpisodes = 150;
constexpr std::size_t kPinballCap = 5000;
constexpr std::uint64_t kPinballSeed = 5000;
constexpr double kPinballThreshold = 3000.0;
constexpr std::size_t kPinballWindow = 10;
constexpr std::size_t kEtaRuns = 20;
constexpr std::uint64_t kEtaSeed = 7000;
constexpr double kSoftmaxTol = 1e-12;
constexpr double kGradientRelTol = 1e-5;
constexpr std::size_t kGradientProbes = 100;
constexpr double kOracleTol = 1e-6;

struct CheckResult {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string data_file(const std::string& name) { return std::string(SGRS_DATA_DIR) + "/" + name; }

CheckResult wiewiora() {
  const auto grid = FourRoomsConfig::parse("#####\n#S..#\n#...#\n#..G#\n#####\n");
  SeededRng rng(11);
  const auto exp = grid_experience(grid, kWiewioraSteps, rng);
  std::vector<double> phi(25);
  for (auto& p : phi) p = rng.uniform01() * 2.0 - 1.0;
  const double err = verify_wiewiora_equivalence(25, 4, exp, phi, 0.1, 0.99);
  return {err <= kWiewioraTol, fmt("max |dQ - dQ'| = %.3g over %zu steps (tol %.0e)", err, exp.size(), kWiewioraTol)};
}

CheckResult decomposition() {
  SeededRng rng(kMdpSeed);
  double worst = 0.0;
  std::size_t max_states = 0, max_actions = 0, max_h = 0;
  for (std::size_t i = 0; i < kRandomMdps; ++i) {
    const auto vc = random_verification_case(rng, PotentialKind::SubgoalHistory);
    worst = std::max(worst, verify_return_decomposition(vc.mdp, vc.policy, vc.phi, vc.horizon));
    max_states = std::max(max_states, vc.mdp.states);
    max_actions = std::max(max_actions, vc.mdp.actions);
    max_h = std::max(max_h, vc.horizon);
  }
  const bool sized = max_states <= 6 && max_actions <= 3 && max_h <= 8;
  return {sized && worst <= kDecompositionTol,
          fmt("%zu MDPs (<=%zu states, <=%zu actions, horizon <=%zu), max error %.3g (tol %.0e)", kRandomMdps,
              max_states, max_actions, max_h, worst, kDecompositionTol)};
}

CheckResult argmax() {
  SeededRng rng(kMdpSeed);
  std::size_t histories = 0, mismatches = 0;
  for (std::size_t i = 0; i < kRandomMdps; ++i) {
    const auto vc = random_verification_case(rng, PotentialKind::SubgoalHistory);
    const auto c = verify_argmax_invariance(vc.mdp, vc.phi, vc.horizon);
    histories += c.histories;
    mismatches += c.mismatches;
  }
  return {mismatches == 0, fmt("%zu decision histories, %zu greedy-set mismatches", histories, mismatches)};
}

// Four-rooms runs shared by checks 4 and 5.
struct GridRuns {
  std::vector<RunRecord> hsrs, sarsa, nrs;
};

ExperimentConfig grid_config(Method m, std::size_t runs, std::uint64_t seed) {
  auto c = ExperimentConfig::defaults("four_rooms");
  c.method = m;
  c.eta = 0.01;
  c.episodes = kGridEpisodes;
  c.runs = runs;
  c.seed = seed;
  if (m != Method::Baseline) c.subgoals = load_subgoal_file(data_file("four_rooms_hallways.json")).series;
  return c;
}

const GridRuns& grid_runs() {
  static const GridRuns runs = [] {
    GridRuns r;
    r.hsrs = run_experiment(grid_config(Method::Hsrs, kGridRuns, kGridSeed));
    r.sarsa = run_experiment(grid_config(Method::Baseline, kGridRuns, kGridSeed));
    r.nrs = run_experiment(grid_config(Method::Nrs, kGridRuns, kGridSeed));
    return r;
  }();
  return runs;
}

CheckResult four_rooms_ordering() {
  const auto& r = grid_runs();
  const auto h = threshold_sample(r.hsrs, kGridThreshold), s = threshold_sample(r.sarsa, kGridThreshold),
             n = threshold_sample(r.nrs, kGridThreshold);
  const double mh = mean(h), ms = mean(s), mn = mean(n);
  const auto t = welch_t(h, s);
  const bool pass = mh < ms && t.p < kAlpha && mh <= (1.0 - kMinImprovement) * ms && mn > ms;
  return {pass, fmt("episodes to %g steps: HSRS %.1f (%.1f), SARSA %.1f (%.1f), NRS %.1f (%.1f); Welch p=%.3g; "
                    "HSRS/SARSA=%.2f (need <=%.2f)",
                    kGridThreshold, mh, sample_sd(h), ms, sample_sd(s), mn, sample_sd(n), t.p, mh / ms,
                    1.0 - kMinImprovement)};
}

// Mean episode length of the shortest-path policy under the environment's
// slip: BFS distances to the goal, then always step to a neighbour one step
// closer (first in Up, Down, Left, Right order).
double shortest_path_oracle(const FourRoomsConfig& cfg, int* bfs_length) {
  std::vector<int> dist(static_cast<std::size_t>(cfg.rows() * cfg.cols()), -1);
  std::deque<GridCell> q{cfg.goal_cell};
  dist[cfg.index(cfg.goal_cell)] = 0;
  while (!q.empty()) {
    const auto c = q.front();
    q.pop_front();
    for (std::size_t a = 0; a < kGridActionCount; ++a) {
      const auto n = move_cell(c, static_cast<GridAction>(a));
      if (cfg.is_free(n) && dist[cfg.index(n)] < 0) {
        dist[cfg.index(n)] = dist[cfg.index(c)] + 1;
        q.push_back(n);
      }
    }
  }
  *bfs_length = dist[cfg.index(cfg.start_cell)];
  FourRooms env(cfg);
  SeededRng rng(99);
  double total = 0.0;
  for (std::size_t e = 0; e < kOracleEpisodes; ++e) {
    env.reset();
    for (std::size_t t = 1; t <= cfg.step_cap; ++t) {
      const auto c = env.cell();
      std::size_t best = 0;
      for (std::size_t a = 0; a < kGridActionCount; ++a) {
        const auto n = move_cell(c, static_cast<GridAction>(a));
        if (cfg.is_free(n) && dist[cfg.index(n)] == dist[cfg.index(c)] - 1) {
          best = a;
          break;
        }
      }
      if (env.step(best, rng).terminal || t == cfg.step_cap) {
        total += static_cast<double>(t);
        break;
      }
    }
  }
  return total / static_cast<double>(kOracleEpisodes);
}

CheckResult four_rooms_asymptote() {
  const auto& r = grid_runs();
  const double ah = mean(asymptotic_sample(r.hsrs)), as = mean(asymptotic_sample(r.sarsa));
  int bfs = 0;
  const double oracle = shortest_path_oracle(FourRoomsConfig::canonical(), &bfs);
  const bool pass = ah <= as && ah <= (1.0 + kAsymptoteSlack) * oracle;
  return {pass, fmt("last-5%% steps: HSRS %.1f, SARSA %.1f; oracle %.1f (BFS %d, slip measured), limit %.1f", ah, as,
                    oracle, bfs, (1.0 + kAsymptoteSlack) * oracle)};
}

CheckResult pinball_ordering() {
  auto c = ExperimentConfig::defaults("pinball");
  c.pinball = PinballConfig::load(data_file("pinball_default.json"));
  c.episodes = kPinballEpisodes;
  c.runs = kPinballRuns;
  c.seed = kPinballSeed;
  c.step_cap = kPinballCap;
  c.eta = 100.0;
  auto hsrs = c;
  hsrs.method = Method::Hsrs;
  hsrs.subgoals = load_subgoal_file(data_file("pinball_branches.json")).series;
  const auto h = threshold_sample(run_experiment(hsrs), kPinballThreshold, kPinballWindow);
  const auto a = threshold_sample(run_experiment(c), kPinballThreshold, kPinballWindow);
  const auto t = welch_t(h, a);
  const bool pass = mean(h) < mean(a) && t.p < kAlpha;
  return {pass, fmt("episodes to smoothed %g steps (%zu runs): HSRS %.1f (%.1f), AC %.1f (%.1f); Welch p=%.3g",
                    kPinballThreshold, kPinballRuns, mean(h), sample_sd(h), mean(a), sample_sd(a), t.p)};
}

CheckResult eta_sensitivity() {
  const std::vector<double> grid{0.01, 0.1, 1, 10, 100};
  const auto base = grid_config(Method::Hsrs, kEtaRuns, kEtaSeed);
  const auto result = grid_search_eta(base, grid);
  const auto criterion = default_grid_criterion("four_rooms");
  const double baseline = criterion(run_experiment(grid_config(Method::Baseline, kEtaRuns, kEtaSeed)));
  double at_one = 0.0;
  std::ostringstream table;
  for (const auto& p : result.table) {
    table << fmt(" %g:%.1f", p.eta, p.score);
    if (p.eta == 1.0) at_one = p.score;
  }
  const bool pass = result.best_eta == 0.01 && at_one > baseline;
  return {pass, fmt("best eta %g (need 0.01); eta=1 %.1f vs baseline %.1f (need worse); table%s", result.best_eta,
                    at_one, baseline, table.str().c_str())};
}

CheckResult kernels() {
  SeededRng rng(314);
  double sum_err = 0.0, shift_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> pref(1 + rng.uniform_index(8));
    for (auto& x : pref) x = (rng.uniform01() - 0.5) * 100.0;
    const double tau = 0.01 + 10.0 * rng.uniform01();
    const auto p = softmax_probs(pref, tau);
    sum_err = std::max(sum_err, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    const double shift = (rng.uniform01() - 0.5) * 1e4;
    auto moved = pref;
    for (auto& x : moved) x += shift;
    const auto q = softmax_probs(moved, tau);
    for (std::size_t k = 0; k < p.size(); ++k) shift_err = std::max(shift_err, std::abs(p[k] - q[k]));
  }

  bool fourier_ok = true;
  for (std::size_t n : {1u, 3u, 5u})
    for (std::size_t d : {1u, 2u, 4u}) {
      const FourierBasis b(n, d);
      std::size_t expected = 1;
      for (std::size_t k = 0; k < d; ++k) expected *= n + 1;
      fourier_ok &= b.size() == expected;
      std::vector<double> x(d);
      for (int rep = 0; rep < 50; ++rep) {
        for (auto& v : x) v = rng.uniform01();
        for (double f : b.evaluate(x)) fourier_ok &= f >= -1.0 && f <= 1.0;
      }
    }

  double worst_rel = 0.0;
  for (std::size_t probe = 0; probe < kGradientProbes; ++probe) {
    const std::size_t features = 4 + rng.uniform_index(12), actions = 2 + rng.uniform_index(4);
    ActorCritic ac(features, actions, ActorCriticParams{0.01, 0.01, 0.99, 0.5 + 2.0 * rng.uniform01()});
    for (auto& w : ac.actor_weights()) w = rng.uniform01() - 0.5;
    std::vector<double> phi(features);
    for (auto& v : phi) v = 2.0 * rng.uniform01() - 1.0;
    const std::size_t a = rng.uniform_index(actions);
    const auto g = ac.log_policy_gradient(phi, a);
    const double h = 1e-6;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto theta = ac.actor_weights();
      const double keep = theta[i];
      theta[i] = keep + h;
      const double up = ac.log_policy(phi, a);
      theta[i] = keep - h;
      const double down = ac.log_policy(phi, a);
      theta[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      worst_rel = std::max(worst_rel, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
    }
  }
  const bool pass = sum_err <= kSoftmaxTol && shift_err <= kSoftmaxTol && fourier_ok && worst_rel <= kGradientRelTol;
  return {pass, fmt("softmax sum err %.2g, shift err %.2g; Fourier count/range %s; gradient rel err %.2g (tol %.0e)",
                    sum_err, shift_err, fourier_ok ? "ok" : "BAD", worst_rel, kGradientRelTol)};
}

CheckResult statistics_oracle() {
  // Reference values from scipy.stats / statsmodels, computed before the build.
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const auto w1 = welch_t(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 3, 4, 5, 6});
  check(w1.t, -1.0);
  check(w1.p, 0.346593507087);
  const auto w2 = welch_t(std::vector<double>{12.1, 9.8, 11.4, 10.2, 13.5, 8.9},
                          std::vector<double>{15.2, 21.7, 9.3, 30.1, 18.4});
  check(w2.t, -2.2560076294);
  check(w2.dof, 4.31518687656);
  check(w2.p, 0.0821809454655);
  const auto w3 = welch_t(std::vector<double>{1000, 1000, 512, 640, 1000, 877, 990},
                          std::vector<double>{120, 95, 210, 160, 101, 88});
  check(w3.t, 9.26755531017);
  check(w3.p, 4.37639219692e-05);

  const auto r3 = anova_holm({{4.2, 5.1, 3.9, 6.0, 5.5}, {6.8, 7.2, 5.9, 8.1}, {5.0, 4.4, 6.3, 5.8, 4.9, 5.2}});
  check(r3.anova.f, 8.10490807893);
  check(r3.anova.p, 0.00592496707021);
  const double adj3[] = {0.0379976910643, 0.517776913211, 0.0431224690054};
  for (std::size_t k = 0; k < 3; ++k) check(r3.pairs[k].adjusted_p, adj3[k]);

  const auto r4 = anova_holm(
      {{35, 41, 29, 50, 38, 33}, {54, 61, 47, 70, 58}, {376, 120, 910, 44, 610, 250}, {36, 40, 31, 47, 39}});
  check(r4.anova.f, 5.73017873935);
  check(r4.anova.p, 0.0061990571004);
  const double t4[] = {-4.20240173606, -2.60990797939, -0.235020437774, -2.45673306641, 4.19760052736, 2.60304552488};
  const double adj4[] = {0.0178817598498, 0.190515002353, 0.819454830797,
                         0.190515002353,  0.0196541239042, 0.190515002353};
  for (std::size_t k = 0; k < 6; ++k) {
    check(r4.pairs[k].test.t, t4[k]);
    check(r4.pairs[k].adjusted_p, adj4[k]);
  }
  return {worst <= kOracleTol, fmt("max deviation from reference table %.2g (tol %.0e)", worst, kOracleTol)};
}

struct Check {
  int id;
  const char* name;
  double budget_s;  // runtime the check is expected to stay within
  std::function<CheckResult()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--only") {
      std::stringstream ss(argv[i + 1]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    }

  const std::vector<Check> checks{
      {1, "wiewiora-equivalence", 1.0, wiewiora},
      {2, "return-decomposition", 10.0, decomposition},
      {3, "argmax-invariance", 10.0, argmax},
      {4, "four-rooms-ordering", 3600.0, four_rooms_ordering},
      {5, "four-rooms-asymptote", 3600.0, four_rooms_asymptote},
      {6, "pinball-ordering", 3600.0, pinball_ordering},
      {7, "eta-sensitivity", 3600.0, eta_sensitivity},
      {8, "numerical-kernels", 5.0, kernels},
      {9, "statistics-oracle", 1.0, statistics_oracle},
  };

  int failures = 0;
  for (const auto& c : checks) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Checks 4 and 5 share runs, so the time lands on whichever runs first.
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("[%s] %d %s: %s; %.2fs%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_time ? "" : fmt(" (over %.0fs budget)", c.budget_s).c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
