#ifndef SGRS_SERVICE_HPP
#define SGRS_SERVICE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sgrs/analysis.hpp"
#include "sgrs/error.hpp"
#include "sgrs/experiment.hpp"
#include "sgrs/request.hpp"
#include "sgrs/subgoal.hpp"

namespace sgrs {

enum class JobState { Queued, Running, Done, Failed };

inline std::string to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "QUEUED";
    case JobState::Running: return "RUNNING";
    case JobState::Done: return "DONE";
    case JobState::Failed: return "FAILED";
  }
  return "FAILED";
}

struct ServiceOptions {
  std::filesystem::path data_dir = "data/service";
  std::size_t workers = 1;
  RunBudget budget;
  std::optional<std::filesystem::path> static_dir;
};

/// Flat-file store plus in-process job queue behind the HTTP API.
///
/// Layout under data_dir: subgoals/<id>.json (canonical JSON as posted) and
/// runs/<id>/{request.json, status.json, run_NNN.json}. Ids are the first 16
/// hex digits of the FNV-1a hash of the canonical JSON, so posting the same
/// content twice yields the same id.
class AnnotationService {
 public:
  explicit AnnotationService(ServiceOptions options) : opt_(std::move(options)) {
    std::filesystem::create_directories(opt_.data_dir / "subgoals");
    std::filesystem::create_directories(opt_.data_dir / "runs");
    const std::size_t n = std::max<std::size_t>(1, opt_.workers);
    for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this] { work(); });
  }

  ~AnnotationService() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  const ServiceOptions& options() const noexcept { return opt_; }

  void mount(httplib::Server& server) {
    server.Get("/api/envs", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, known_envs()); });

    server.Get(R"(/api/envs/([^/]+)/map)", [](const httplib::Request& req, httplib::Response& res) {
      const std::string env = req.matches[1];
      if (std::find(known_envs().begin(), known_envs().end(), env) == known_envs().end())
        return reply_error(res, 404, "unknown environment '" + env + "'");
      reply(res, 200, ExperimentConfig::defaults(env).map());
    });

    server.Post("/api/subgoals", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req.body);
        SubgoalFile file;
        try {
          file = body.get<SubgoalFile>();
        } catch (const ValidationError& e) {
          throw UnprocessableError(e.field(), e.message());
        }
        if (std::find(known_envs().begin(), known_envs().end(), file.env) == known_envs().end())
          throw UnprocessableError("env", "unknown environment '" + file.env + "'");
        try {
          validate_series(file, ExperimentConfig::defaults(file.env).map());
        } catch (const ValidationError& e) {
          throw UnprocessableError(e.field(), e.message());
        }
        reply(res, 200, {{"id", store_subgoals(body)}});
      });
    });

    server.Get(R"(/api/subgoals/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto text = read_file(opt_.data_dir / "subgoals" / (std::string(req.matches[1]) + ".json"));
      if (!text) return reply_error(res, 404, "unknown subgoal id");
      res.set_content(*text, "application/json");
    });

    server.Post("/api/runs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto r = parse_run_request(parse_body(req.body), opt_.budget,
                                         [this](const std::string& id) { return stored_subgoals(id); });
        const std::string id = submit(r);
        reply(res, 202, status_json(id));
      });
    });

    server.Get(R"(/api/runs/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!known_run(id)) return reply_error(res, 404, "unknown run id");
      reply(res, 200, status_json(id));
    });

    server.Get(R"(/api/runs/([0-9a-f]+)/curves)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        if (!known_run(id)) return reply_error(res, 404, "unknown run id");
        const std::size_t window = query_size(req, "smooth", 1);
        reply(res, 200, curves_json(id, window));
      });
    });

    server.Get("/api/compare", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("runs")) throw ConfigError("missing 'runs' parameter");
        std::vector<std::string> ids;
        std::stringstream ss(req.get_param_value("runs"));
        for (std::string id; std::getline(ss, id, ',');)
          if (!id.empty()) ids.push_back(id);
        if (ids.size() < 2) throw ConfigError("compare needs at least two run ids");
        for (const auto& id : ids)
          if (!known_run(id)) return reply_error(res, 404, "unknown run id '" + id + "'");
        const std::size_t window = query_size(req, "smooth", 0);
        const std::optional<double> threshold =
            req.has_param("threshold") ? std::optional(std::stod(req.get_param_value("threshold"))) : std::nullopt;
        reply(res, 200, compare_json(ids, threshold, window));
      });
    });

    if (opt_.static_dir) server.set_mount_point("/", opt_.static_dir->string());
  }

  /// Queues a run request (or returns the id of an identical earlier one).
  std::string submit(const RunRequest& r) {
    const nlohmann::json canonical = run_request_json(r);
    const std::string id = content_id(canonical.dump());
    std::lock_guard lock(mutex_);
    if (jobs_.count(id) || std::filesystem::exists(run_dir(id) / "request.json")) {
      if (!jobs_.count(id)) load_job(id);
      return id;
    }
    std::filesystem::create_directories(run_dir(id));
    write_file(run_dir(id) / "request.json", canonical.dump(2));
    auto job = std::make_shared<Job>();
    job->config = r.config;
    job->total = r.config.runs;
    jobs_[id] = job;
    write_status(id, *job);
    queue_.push_back(id);
    cv_.notify_one();
    return id;
  }

  nlohmann::json status_json(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (!jobs_.count(id)) load_job(id);
    const auto& job = *jobs_.at(id);
    return status_locked(id, job);
  }

  /// Blocks until the job leaves the queue (tests and CLI use this).
  JobState wait(const std::string& id) {
    std::unique_lock lock(mutex_);
    if (!jobs_.count(id)) load_job(id);
    auto job = jobs_.at(id);
    done_cv_.wait(lock, [&] { return job->state == JobState::Done || job->state == JobState::Failed; });
    return job->state;
  }

  /// Finished run records of a job. With `partial` the runs completed so far
  /// are returned (possibly none); otherwise an unfinished job is an error.
  std::vector<RunRecord> records(const std::string& id, bool partial = false) {
    std::vector<RunRecord> out;
    std::size_t available = 0;
    {
      std::lock_guard lock(mutex_);
      if (!jobs_.count(id)) load_job(id);
      const auto& job = *jobs_.at(id);
      if (!partial && job.state != JobState::Done) throw InvalidStateError("run " + id + " has not finished");
      available = job.completed;
    }
    for (std::size_t i = 0; i < available; ++i) {
      const auto text = read_file(run_file(id, i));
      if (!text) throw ResourceError("missing result file for run " + id);
      out.push_back(nlohmann::json::parse(*text).get<RunRecord>());
    }
    return out;
  }

  std::optional<SubgoalFile> stored_subgoals(const std::string& id) const {
    if (id.find_first_not_of("0123456789abcdef") != std::string::npos) return std::nullopt;
    const auto text = read_file(opt_.data_dir / "subgoals" / (id + ".json"));
    if (!text) return std::nullopt;
    return nlohmann::json::parse(*text).get<SubgoalFile>();
  }

  std::string store_subgoals(const nlohmann::json& body) {
    const std::string text = body.dump();
    const std::string id = content_id(text);
    write_file(opt_.data_dir / "subgoals" / (id + ".json"), text);
    return id;
  }

 private:
  struct Cancelled {};

  struct Job {
    ExperimentConfig config;
    JobState state = JobState::Queued;
    std::size_t completed = 0;
    std::atomic<std::size_t> episodes_in_run{0};  // of the run currently executing
    std::size_t total = 0;
    std::string error;
  };

  static std::string content_id(const std::string& canonical) { return hex64(fnv1a64(canonical)); }

  std::filesystem::path run_dir(const std::string& id) const { return opt_.data_dir / "runs" / id; }
  std::filesystem::path run_file(const std::string& id, std::size_t i) const {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu.json", i);
    return run_dir(id) / name;
  }

  static std::optional<std::string> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void write_file(const std::filesystem::path& p, const std::string& text) {
    const auto tmp = p.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ResourceError("cannot write " + tmp);
      out << text;
    }
    std::filesystem::rename(tmp, p);
  }

  bool known_run(const std::string& id) {
    std::lock_guard lock(mutex_);
    return jobs_.count(id) || std::filesystem::exists(run_dir(id) / "status.json");
  }

  // Restores a finished or interrupted job from disk; caller holds the lock.
  void load_job(const std::string& id) {
    const auto text = read_file(run_dir(id) / "status.json");
    if (!text) throw InvalidStateError("unknown run id " + id);
    const auto s = nlohmann::json::parse(*text);
    auto job = std::make_shared<Job>();
    job->total = s.at("progress").at("total").get<std::size_t>();
    job->completed = s.at("progress").at("completed").get<std::size_t>();
    const std::string state = s.at("state").get<std::string>();
    job->state = state == "DONE" ? JobState::Done : JobState::Failed;
    job->error = state == "DONE" ? "" : s.value("error", std::string("interrupted before completion"));
    jobs_[id] = job;
  }

  nlohmann::json status_locked(const std::string& id, const Job& job) const {
    nlohmann::json j{{"id", id},
                     {"state", to_string(job.state)},
                     {"progress",
                      {{"completed", job.completed}, {"total", job.total}, {"fraction", fraction(job)}}},
                     {"links", {{"curves", "/api/runs/" + id + "/curves"}, {"status", "/api/runs/" + id}}}};
    if (!job.error.empty()) j["error"] = job.error;
    return j;
  }

  // Completed runs plus the share of the current run, so long runs still move the bar.
  static double fraction(const Job& job) {
    if (job.total == 0) return 0.0;
    if (job.state == JobState::Done) return 1.0;
    double f = static_cast<double>(job.completed);
    if (job.state == JobState::Running && job.config.episodes > 0)
      f += static_cast<double>(job.episodes_in_run.load()) / static_cast<double>(job.config.episodes);
    return std::min(1.0, f / static_cast<double>(job.total));
  }

  void write_status(const std::string& id, const Job& job) {
    write_file(run_dir(id) / "status.json", status_locked(id, job).dump(2));
  }

  void work() {
    for (;;) {
      std::string id;
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        id = queue_.front();
        queue_.pop_front();
        job = jobs_.at(id);
        job->state = JobState::Running;
        write_status(id, *job);
      }
      try {
        job->config.validate();
        for (std::size_t i = 0; i < job->total; ++i) {
          job->episodes_in_run = 0;
          const RunRecord rec = run_single(job->config, i, [&](std::size_t, std::size_t, const EpisodeRecord&) {
            if (stopping_.load()) throw Cancelled();
            ++job->episodes_in_run;
          });
          write_file(run_file(id, i), nlohmann::json(rec).dump());
          std::lock_guard lock(mutex_);
          ++job->completed;
          job->episodes_in_run = 0;
          write_status(id, *job);
        }
        std::lock_guard lock(mutex_);
        job->state = JobState::Done;
        write_status(id, *job);
      } catch (const Cancelled&) {
        std::lock_guard lock(mutex_);
        job->state = JobState::Failed;
        job->error = "interrupted before completion";
        write_status(id, *job);
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex_);
        job->state = JobState::Failed;
        job->error = e.what();
        write_status(id, *job);
      }
      done_cv_.notify_all();
    }
  }

  nlohmann::json curves_json(const std::string& id, std::size_t window) {
    const auto recs = records(id, true);
    if (recs.empty())
      return {{"id", id}, {"smooth_window", std::max<std::size_t>(1, window)}, {"runs", nlohmann::json::array()},
              {"mean", nlohmann::json::array()}, {"sd", nlohmann::json::array()}};
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : recs) runs.push_back(curve_of(r, std::max<std::size_t>(1, window)));
    const auto m = mean_curve(recs, std::max<std::size_t>(1, window));
    std::vector<double> sd(m.size(), 0.0);
    if (recs.size() > 1) {
      for (const auto& r : recs) {
        const auto c = curve_of(r, std::max<std::size_t>(1, window));
        for (std::size_t i = 0; i < c.size(); ++i) sd[i] += (c[i] - m[i]) * (c[i] - m[i]);
      }
      for (auto& v : sd) v = std::sqrt(v / static_cast<double>(recs.size() - 1));
    }
    return {{"id", id}, {"smooth_window", std::max<std::size_t>(1, window)}, {"runs", runs}, {"mean", m}, {"sd", sd}};
  }

  // Aligned mean curves and threshold statistics for several finished runs.
  // Defaults (threshold, smoothing) follow the environment of the first run.
  nlohmann::json compare_json(const std::vector<std::string>& ids, std::optional<double> threshold,
                              std::size_t window) {
    std::vector<std::vector<RunRecord>> groups;
    std::string env;
    for (const auto& id : ids) {
      groups.push_back(records(id));
      const auto req = nlohmann::json::parse(*read_file(run_dir(id) / "request.json"));
      const std::string e = req.at("env").get<std::string>();
      if (!env.empty() && e != env) throw UnprocessableError("runs", "runs belong to different environments");
      env = e;
    }
    const auto plan = default_threshold_plan(env);
    const double thr = threshold.value_or(*std::min_element(plan.thresholds.begin(), plan.thresholds.end()));
    const std::size_t w = window ? window : plan.smooth_window;
    std::size_t length = SIZE_MAX;
    for (const auto& g : groups) length = std::min(length, g.front().episodes.size());

    nlohmann::json curves = nlohmann::json::object();
    std::vector<std::vector<double>> samples;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto m = mean_curve(groups[k], w);
      m.resize(length);
      curves[ids[k]] = m;
      samples.push_back(threshold_sample(groups[k], thr, w));
    }
    nlohmann::json out{{"threshold", thr}, {"smooth_window", w}, {"episodes", length}, {"curves", curves}};
    for (const auto& s : samples)
      if (s.size() < 2) {
        out["report"] = nullptr;
        out["note"] = "statistics need at least two runs per group";
        return out;
      }
    out["report"] = compare_groups(samples, ids);
    return out;
  }

  static std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    try {
      const long v = std::stol(req.get_param_value(key));
      if (v < 0) throw ConfigError(std::string("'") + key + "' must be non-negative");
      return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("'") + key + "' must be an integer");
    }
  }

  static nlohmann::json parse_body(const std::string& body) {
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("body is not valid JSON: ") + e.what());
    }
  }

  static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void reply_error(httplib::Response& res, int status, const std::string& message,
                          const std::string& field = {}) {
    nlohmann::json body{{"error", message}};
    if (!field.empty()) body["field"] = field;
    reply(res, status, body);
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const UnprocessableError& e) {
      reply_error(res, 422, e.what(), e.field());
    } catch (const ConfigError& e) {
      reply_error(res, 400, e.what());
    } catch (const InvalidStateError& e) {
      reply_error(res, 409, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  }

  ServiceOptions opt_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::deque<std::string> queue_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::vector<std::thread> workers_;
  std::atomic<bool> stopping_{false};
};

}  // namespace sgrs

#endif  // SGRS_SERVICE_HPP
