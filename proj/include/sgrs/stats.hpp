#ifndef SGRS_STATS_HPP
#define SGRS_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"

namespace sgrs {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Unbiased sample variance (n - 1 denominator).
inline double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two observations");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

inline double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

struct TTest {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;  // two-sided
};

/// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of freedom.
inline TTest welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("welch_t: each sample needs at least two observations");
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  if (va + vb == 0.0) {
    if (mean(a) == mean(b)) return {0.0, static_cast<double>(a.size() + b.size() - 2), 1.0};
    throw DomainError("welch_t: both samples are constant and differ");
  }
  TTest r;
  r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  r.dof = (va + vb) * (va + vb) /
          (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  if (r.t == 0.0) {
    r.p = 1.0;
  } else {
    const boost::math::students_t dist(r.dof);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  }
  return r;
}

struct AnovaResult {
  double f = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  double p = 1.0;
};

/// One-way ANOVA over independent groups.
inline AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DomainError("anova: needs at least two groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DomainError("anova: each group needs at least two observations");
    n += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  grand /= static_cast<double>(n);
  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ss_within += (v - m) * (v - m);
  }
  AnovaResult r;
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(n - groups.size());
  const double ms_between = ss_between / r.df_between;
  const double ms_within = ss_within / r.df_within;
  if (ms_within == 0.0) {
    if (ms_between == 0.0) return {0.0, r.df_between, r.df_within, 1.0};
    throw DomainError("anova: zero within-group variance with distinct means");
  }
  r.f = ms_between / ms_within;
  const boost::math::fisher_f dist(r.df_between, r.df_within);
  r.p = r.f == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, r.f));
  return r;
}

/// Holm step-down adjustment; results are in the input order.
inline std::vector<double> holm_adjust(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double scaled = std::min(1.0, static_cast<double>(m - rank) * p[order[rank]]);
    running = std::max(running, scaled);
    adjusted[order[rank]] = running;
  }
  return adjusted;
}

struct GroupSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct PairComparison {
  std::size_t first = 0;
  std::size_t second = 0;
  TTest test;
  double adjusted_p = 1.0;
  bool significant = false;
};

struct StatsReport {
  std::vector<GroupSummary> groups;
  AnovaResult anova;  // left default when only a single pair was compared
  bool has_anova = false;
  std::vector<PairComparison> pairs;
  double alpha = 0.05;
};

/// ANOVA across all groups, then every pairwise Welch test with Holm
/// adjustment. Pairs are listed as (0,1), (0,2), ..., (1,2), ...
inline StatsReport anova_holm(const std::vector<std::vector<double>>& groups, std::vector<std::string> names = {},
                              double alpha = 0.05) {
  if (groups.size() < 2) throw DomainError("anova_holm: needs at least two groups");
  if (!names.empty() && names.size() != groups.size()) throw DomainError("anova_holm: one name per group");
  StatsReport rep;
  rep.alpha = alpha;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].size() < 2) throw DomainError("anova_holm: each group needs at least two observations");
    rep.groups.push_back(
        {names.empty() ? "group" + std::to_string(i) : names[i], groups[i].size(), mean(groups[i]), sample_sd(groups[i])});
  }
  rep.anova = one_way_anova(groups);
  rep.has_anova = true;
  std::vector<double> raw;
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairComparison pc;
      pc.first = i;
      pc.second = j;
      pc.test = welch_t(groups[i], groups[j]);
      raw.push_back(pc.test.p);
      rep.pairs.push_back(pc);
    }
  const auto adj = holm_adjust(raw);
  for (std::size_t k = 0; k < rep.pairs.size(); ++k) {
    rep.pairs[k].adjusted_p = adj[k];
    rep.pairs[k].significant = adj[k] < alpha;
  }
  return rep;
}

inline void to_json(nlohmann::json& j, const StatsReport& r) {
  j = nlohmann::json::object();
  j["alpha"] = r.alpha;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : r.groups) j["groups"].push_back({{"name", g.name}, {"n", g.n}, {"mean", g.mean}, {"sd", g.sd}});
  if (r.has_anova)
    j["anova"] = {{"f", r.anova.f}, {"df_between", r.anova.df_between}, {"df_within", r.anova.df_within}, {"p", r.anova.p}};
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : r.pairs)
    j["pairs"].push_back({{"a", r.groups[p.first].name},
                          {"b", r.groups[p.second].name},
                          {"t", p.test.t},
                          {"dof", p.test.dof},
                          {"p", p.test.p},
                          {"adjusted_p", p.adjusted_p},
                          {"significant", p.significant}});
}

}  // namespace sgrs

#endif  // SGRS_STATS_HPP
