#ifndef SGRS_REQUEST_HPP
#define SGRS_REQUEST_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgrs/error.hpp"
#include "sgrs/experiment.hpp"
#include "sgrs/subgoal.hpp"

namespace sgrs {

inline const std::vector<std::string>& known_envs() {
  static const std::vector<std::string> envs{"four_rooms", "pinball"};
  return envs;
}

/// Thrown for requests that parse but cannot be honoured (HTTP 422).
class UnprocessableError : public Error {
 public:
  UnprocessableError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Parsed body of POST /api/runs.
struct RunRequest {
  ExperimentConfig config;
  std::optional<SubgoalFile> subgoals;
};

/// Budget limits for runs launched over HTTP.
struct RunBudget {
  std::size_t max_runs = 20;
  std::size_t max_episodes = 1000;
};

/// Builds a run request from JSON. Structural problems (bad JSON types,
/// unknown env or method) raise ConfigError; semantic ones raise
/// UnprocessableError. `subgoals` is either a subgoal file object or a bare
/// array of matchers.
/// `subgoal_lookup`, when given, resolves a "subgoal_id" field against stored files.
inline RunRequest parse_run_request(
    const nlohmann::json& j, const RunBudget& budget,
    const std::function<std::optional<SubgoalFile>(const std::string&)>& subgoal_lookup = {}) {
  if (!j.is_object()) throw ConfigError("run request must be a JSON object");
  RunRequest req;
  try {
    const std::string env = j.at("env").get<std::string>();
    if (std::find(known_envs().begin(), known_envs().end(), env) == known_envs().end())
      throw ConfigError("unknown environment '" + env + "'");
    req.config = ExperimentConfig::defaults(env);
    req.config.method = method_from_string(j.at("method").get<std::string>());
    if (j.contains("eta")) req.config.eta = j.at("eta").get<double>();
    req.config.episodes = j.value("episodes", std::size_t{100});
    req.config.runs = j.value("runs", std::size_t{1});
    req.config.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("subgoal_id")) {
      if (!subgoal_lookup) throw ConfigError("subgoal_id is not supported here");
      const auto stored = subgoal_lookup(j.at("subgoal_id").get<std::string>());
      if (!stored) throw UnprocessableError("subgoal_id", "unknown subgoal id");
      if (stored->env != env) throw UnprocessableError("subgoal_id", "subgoal file belongs to '" + stored->env + "'");
      req.subgoals = stored;
    } else if (j.contains("subgoals") && !j.at("subgoals").is_null()) {
      const auto& sg = j.at("subgoals");
      nlohmann::json file = sg.is_array() ? nlohmann::json{{"env", env}, {"subgoals", sg}} : sg;
      if (!file.contains("env")) file["env"] = env;
      try {
        req.subgoals = file.get<SubgoalFile>();
      } catch (const ValidationError& e) {
        throw UnprocessableError(e.field(), e.message());
      }
    }
    if (req.subgoals && req.subgoals->env != env)
      throw UnprocessableError("subgoals", "series belongs to '" + req.subgoals->env + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run request: ") + e.what());
  }

  auto& c = req.config;
  if (c.episodes < 1 || c.episodes > budget.max_episodes)
    throw UnprocessableError("episodes", "must lie in [1, " + std::to_string(budget.max_episodes) + "]");
  if (c.runs < 1 || c.runs > budget.max_runs)
    throw UnprocessableError("runs", "must lie in [1, " + std::to_string(budget.max_runs) + "]");
  if (c.method != Method::Baseline && !(c.eta > 0.0)) throw UnprocessableError("eta", "must be positive");
  if ((c.method == Method::Hsrs || c.method == Method::Nrs) && !req.subgoals)
    throw UnprocessableError("subgoals", to_string(c.method) + " requires a subgoal series");
  if (c.method == Method::Baseline && req.subgoals)
    throw UnprocessableError("subgoals", "baseline runs take no subgoal series");
  if (req.subgoals) {
    try {
      validate_series(*req.subgoals, c.map());
    } catch (const ValidationError& e) {
      throw UnprocessableError(e.field(), e.message());
    }
    c.subgoals = req.subgoals->series;
  }
  return req;
}

inline nlohmann::json run_request_json(const RunRequest& r) {
  nlohmann::json j = config_json(r.config);
  j["runs"] = r.config.runs;
  j["seed"] = r.config.seed;
  return j;
}

}  // namespace sgrs

#endif  // SGRS_REQUEST_HPP
