#ifndef SGRS_ANALYSIS_HPP
#define SGRS_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"
#include "sgrs/experiment.hpp"
#include "sgrs/state.hpp"
#include "sgrs/stats.hpp"

namespace sgrs {

/// Trailing mean with a partial window at the start:
/// out[i] = mean(curve[max(0, i - window + 1) ..= i]).
inline std::vector<double> moving_average(std::span<const double> curve, std::size_t window) {
  if (curve.empty()) throw DomainError("moving_average: empty curve");
  if (window < 1) throw DomainError("moving_average: window must be positive");
  std::vector<double> out(curve.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    sum += curve[i];
    if (i >= window) sum -= curve[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

struct ThresholdResult {
  double threshold = 0.0;
  std::size_t episode_index = 0;
  bool censored = false;
};

/// First index whose value is at or below `threshold`; censored at the curve
/// length when the curve never gets there.
inline ThresholdResult time_to_threshold(std::span<const double> curve, double threshold) {
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve[i] <= threshold) return {threshold, i, false};
  return {threshold, curve.size(), true};
}

/// Mean of the final ceil(tail_fraction * length) entries.
inline double asymptotic_performance(std::span<const double> curve, double tail_fraction = 0.05) {
  if (curve.empty()) throw DomainError("asymptotic_performance: empty curve");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw DomainError("asymptotic_performance: tail fraction must lie in (0, 1]");
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(curve.size()) - 1e-9));
  const std::size_t n = std::clamp<std::size_t>(tail, 1, curve.size());
  double s = 0.0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) s += curve[i];
  return s / static_cast<double>(n);
}

/// Default thresholds and smoothing per environment.
struct ThresholdPlan {
  std::vector<double> thresholds;
  std::size_t smooth_window = 1;  // 1 means raw curves
};

inline ThresholdPlan default_threshold_plan(const std::string& env) {
  if (env == "four_rooms") return {{500, 300, 100, 50}, 1};
  if (env == "pinball") return {{3000, 2000, 1000, 500}, 10};
  throw ConfigError("unknown environment '" + env + "'");
}

inline std::vector<double> curve_of(const RunRecord& run, std::size_t smooth_window = 1) {
  const auto raw = run.step_curve();
  return smooth_window > 1 ? moving_average(raw, smooth_window) : raw;
}

/// Episodes-to-threshold of each run; censored runs count at the run length.
inline std::vector<double> threshold_sample(std::span<const RunRecord> runs, double threshold,
                                            std::size_t smooth_window = 1) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs)
    out.push_back(static_cast<double>(time_to_threshold(curve_of(r, smooth_window), threshold).episode_index));
  return out;
}

inline std::vector<double> asymptotic_sample(std::span<const RunRecord> runs, double tail_fraction = 0.05) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(asymptotic_performance(r.step_curve(), tail_fraction));
  return out;
}

/// Per-episode mean across runs (all runs must have equal length).
inline std::vector<double> mean_curve(std::span<const RunRecord> runs, std::size_t smooth_window = 1) {
  if (runs.empty()) throw DomainError("mean_curve: no runs");
  std::vector<double> acc;
  for (const auto& r : runs) {
    const auto c = curve_of(r, smooth_window);
    if (acc.empty()) acc.assign(c.size(), 0.0);
    if (c.size() != acc.size()) throw DomainError("mean_curve: runs differ in length");
    for (std::size_t i = 0; i < c.size(); ++i) acc[i] += c[i];
  }
  for (auto& v : acc) v /= static_cast<double>(runs.size());
  return acc;
}

/// Groups compared at one threshold. With two groups the report holds a single
/// Welch pair and no ANOVA; with more it is the full ANOVA plus Holm table.
inline StatsReport compare_groups(const std::vector<std::vector<double>>& samples, std::vector<std::string> names) {
  if (samples.size() == 2) {
    StatsReport rep;
    for (std::size_t i = 0; i < 2; ++i)
      rep.groups.push_back({names.at(i), samples[i].size(), mean(samples[i]), sample_sd(samples[i])});
    PairComparison pc;
    pc.first = 0;
    pc.second = 1;
    pc.test = welch_t(samples[0], samples[1]);
    pc.adjusted_p = pc.test.p;
    pc.significant = pc.adjusted_p < rep.alpha;
    rep.pairs.push_back(pc);
    return rep;
  }
  return anova_holm(samples, std::move(names));
}

/// Criterion used to rank grid points; smaller is better.
using GridCriterion = std::function<double(std::span<const RunRecord>)>;

struct GridPoint {
  double eta = 0.0;
  double score = 0.0;
  std::vector<double> mean_curve;
};

struct GridSearchResult {
  double best_eta = 0.0;
  std::vector<GridPoint> table;
};

/// Mean time-to-threshold at the environment's tightest default threshold.
inline GridCriterion default_grid_criterion(const std::string& env) {
  const auto plan = default_threshold_plan(env);
  const double tightest = *std::min_element(plan.thresholds.begin(), plan.thresholds.end());
  return [tightest, window = plan.smooth_window](std::span<const RunRecord> runs) {
    return mean(threshold_sample(runs, tightest, window));
  };
}

/// Runs `base` once per grid value (base.runs runs each) and ranks the
/// points by the criterion; ties go to the smaller eta.
inline GridSearchResult grid_search_eta(ExperimentConfig base, std::span<const double> grid,
                                        GridCriterion criterion = {}, std::size_t workers = default_workers()) {
  if (grid.empty()) throw ConfigError("grid_search_eta: empty grid");
  if (!criterion) criterion = default_grid_criterion(base.env);
  GridSearchResult out;
  for (double eta : grid) {
    base.eta = eta;
    const auto runs = run_experiment(base, workers);
    out.table.push_back({eta, criterion(runs), mean_curve(runs)});
  }
  const auto best = std::min_element(out.table.begin(), out.table.end(), [](const GridPoint& a, const GridPoint& b) {
    return a.score < b.score || (a.score == b.score && a.eta < b.eta);
  });
  out.best_eta = best->eta;
  return out;
}

inline void to_json(nlohmann::json& j, const GridSearchResult& g) {
  j = {{"best_eta", g.best_eta}, {"table", nlohmann::json::array()}};
  for (const auto& p : g.table) j["table"].push_back({{"eta", p.eta}, {"score", p.score}, {"mean_curve", p.mean_curve}});
}

}  // namespace sgrs

#endif  // SGRS_ANALYSIS_HPP
