// Command-line front end: learning runs, eta grid search, analysis tables,
// curve export and the annotation HTTP service.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgrs/analysis.hpp"
#include "sgrs/experiment.hpp"
#include "sgrs/request.hpp"
#include "sgrs/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOptions {
  std::string env = "four_rooms";
  std::string method = "baseline";
  std::string subgoals;
  std::optional<double> eta;
  std::size_t episodes = 0;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::size_t step_cap = 0;
  std::string map_file;
  std::string arena_file;
  std::size_t workers = sgrs::default_workers();
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--env", o.env, "four_rooms or pinball")->capture_default_str();
  cmd->add_option("--method", o.method, "baseline, hsrs, rsrs or nrs")->capture_default_str();
  cmd->add_option("--subgoals", o.subgoals, "subgoal file (JSON)");
  cmd->add_option("--eta", o.eta, "shaping scale (environment default when omitted)");
  cmd->add_option("--episodes", o.episodes, "episodes per run (environment default when omitted)");
  cmd->add_option("--runs", o.runs, "independent runs")->capture_default_str();
  cmd->add_option("--seed", o.seed, "base seed; run i uses seed + i")->capture_default_str();
  cmd->add_option("--step-cap", o.step_cap, "per-episode step cap override");
  cmd->add_option("--map", o.map_file, "four-rooms ASCII map file");
  cmd->add_option("--arena", o.arena_file, "pinball arena JSON file");
  cmd->add_option("--workers", o.workers, "worker threads")->capture_default_str();
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw sgrs::ConfigError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw sgrs::ConfigError(p.string() + " is not JSON: " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw sgrs::ResourceError("cannot write " + p.string());
  out << text;
}

// Same request path as POST /api/runs, minus the web budget, so a CLI run and
// an API run with equal settings produce identical records.
sgrs::ExperimentConfig build_config(const RunOptions& o) {
  json req{{"env", o.env}, {"method", o.method}, {"runs", o.runs}, {"seed", o.seed}};
  req["episodes"] = o.episodes ? o.episodes : sgrs::ExperimentConfig::defaults(o.env).episodes;
  if (o.eta) req["eta"] = *o.eta;
  if (!o.subgoals.empty()) req["subgoals"] = read_json(o.subgoals);
  const sgrs::RunBudget unlimited{std::numeric_limits<std::size_t>::max(), std::numeric_limits<std::size_t>::max()};
  sgrs::ExperimentConfig c;
  try {
    c = sgrs::parse_run_request(req, unlimited).config;
  } catch (const sgrs::UnprocessableError& e) {
    throw sgrs::ConfigError(e.what());
  }
  if (!o.map_file.empty()) c.four_rooms = sgrs::FourRoomsConfig::load(o.map_file);
  if (!o.arena_file.empty()) c.pinball = sgrs::PinballConfig::load(o.arena_file);
  if (o.step_cap) c.step_cap = o.step_cap;
  c.validate();
  return c;
}

std::string run_file_name(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "run_%03zu.json", i);
  return name;
}

void save_runs(const fs::path& dir, const sgrs::ExperimentConfig& c, const std::vector<sgrs::RunRecord>& runs) {
  fs::create_directories(dir);
  json req = sgrs::config_json(c);
  req["runs"] = c.runs;
  req["seed"] = c.seed;
  write_text(dir / "request.json", req.dump(2));
  for (std::size_t i = 0; i < runs.size(); ++i) write_text(dir / run_file_name(i), json(runs[i]).dump());
}

std::vector<sgrs::RunRecord> load_runs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw sgrs::ConfigError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) throw sgrs::ConfigError("no run_*.json files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<sgrs::RunRecord> out;
  for (const auto& f : files) out.push_back(read_json(f).get<sgrs::RunRecord>());
  return out;
}

std::optional<std::string> env_of(const fs::path& dir) {
  if (!fs::exists(dir / "request.json")) return std::nullopt;
  return read_json(dir / "request.json").value("env", std::string());
}

int cmd_run(const RunOptions& o, const std::string& out) {
  const auto c = build_config(o);
  std::fprintf(stderr, "running %zu x %zu episodes (%s, %s)\n", c.runs, c.episodes, c.env.c_str(),
               sgrs::to_string(c.method).c_str());
  const auto runs = sgrs::run_experiment(c, o.workers);
  if (!out.empty()) save_runs(out, c, runs);
  const auto plan = sgrs::default_threshold_plan(c.env);
  json summary{{"config_digest", sgrs::config_digest(c)}, {"runs", c.runs}};
  const auto asym = sgrs::asymptotic_sample(runs);
  summary["asymptotic_mean"] = sgrs::mean(asym);
  for (double thr : plan.thresholds)
    summary["time_to_threshold"][std::to_string(static_cast<long>(thr))] =
        sgrs::mean(sgrs::threshold_sample(runs, thr, plan.smooth_window));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_grid(const RunOptions& o, const std::vector<double>& grid, const std::string& out) {
  auto c = build_config(o);
  const auto result = sgrs::grid_search_eta(c, grid, {}, o.workers);
  json j = result;
  j["env"] = c.env;
  j["method"] = sgrs::to_string(c.method);
  j["runs_per_point"] = c.runs;
  if (o.method != "baseline") {
    auto base = c;
    base.method = sgrs::Method::Baseline;
    base.subgoals.reset();
    const auto runs = sgrs::run_experiment(base, o.workers);
    j["baseline_score"] = sgrs::default_grid_criterion(c.env)(runs);
  }
  if (!out.empty()) write_text(out, j.dump(2));
  json brief = j;
  for (auto& row : brief["table"]) row.erase("mean_curve");
  std::cout << brief.dump(2) << "\n";
  return 0;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

int cmd_analyze(const std::vector<std::string>& group_args, std::vector<double> thresholds,
                std::optional<std::size_t> window, double tail, std::string env, const std::string& out) {
  std::vector<std::string> names;
  std::vector<std::vector<sgrs::RunRecord>> groups;
  for (const auto& arg : group_args) {
    const auto eq = arg.find('=');
    const fs::path dir = eq == std::string::npos ? fs::path(arg) : fs::path(arg.substr(eq + 1));
    names.push_back(eq == std::string::npos ? dir.filename().string() : arg.substr(0, eq));
    groups.push_back(load_runs(dir));
    if (env.empty()) env = env_of(dir).value_or("");
  }
  if (groups.size() < 2) throw sgrs::ConfigError("analyze needs at least two groups");
  if (env.empty() && (thresholds.empty() || !window)) throw sgrs::ConfigError("cannot infer environment; pass --env");
  if (!env.empty()) {
    const auto plan = sgrs::default_threshold_plan(env);
    if (thresholds.empty()) thresholds = plan.thresholds;
    if (!window) window = plan.smooth_window;
  }

  json report{{"note", "each seeded run is one observation; censored runs count at the episode budget"},
               {"smooth_window", *window},
               {"tail_fraction", tail},
               {"thresholds", json::array()}};
  std::ostringstream thr_csv, asym_csv;
  thr_csv << "threshold,group,n,mean,sd,adjusted_p_vs_first\n";
  for (double thr : thresholds) {
    std::vector<std::vector<double>> samples;
    for (const auto& g : groups) samples.push_back(sgrs::threshold_sample(g, thr, *window));
    const auto rep = sgrs::compare_groups(samples, names);
    report["thresholds"].push_back({{"threshold", thr}, {"report", rep}});
    for (std::size_t k = 0; k < rep.groups.size(); ++k) {
      std::string p;
      for (const auto& pc : rep.pairs)
        if (pc.first == 0 && pc.second == k) p = fmt(pc.adjusted_p);
      thr_csv << fmt(thr) << ',' << rep.groups[k].name << ',' << rep.groups[k].n << ',' << fmt(rep.groups[k].mean)
              << ',' << fmt(rep.groups[k].sd) << ',' << p << '\n';
    }
  }
  std::vector<std::vector<double>> asym;
  for (const auto& g : groups) asym.push_back(sgrs::asymptotic_sample(g, tail));
  const auto arep = sgrs::compare_groups(asym, names);
  report["asymptotic"] = arep;
  asym_csv << "group,n,mean,sd,adjusted_p_vs_first\n";
  for (std::size_t k = 0; k < arep.groups.size(); ++k) {
    std::string p;
    for (const auto& pc : arep.pairs)
      if (pc.first == 0 && pc.second == k) p = fmt(pc.adjusted_p);
    asym_csv << arep.groups[k].name << ',' << arep.groups[k].n << ',' << fmt(arep.groups[k].mean) << ','
             << fmt(arep.groups[k].sd) << ',' << p << '\n';
  }
  if (!out.empty()) {
    write_text(fs::path(out) / "stats.json", report.dump(2));
    write_text(fs::path(out) / "thresholds.csv", thr_csv.str());
    write_text(fs::path(out) / "asymptotic.csv", asym_csv.str());
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_curve(const std::string& in, std::size_t window, const std::string& out) {
  const auto runs = load_runs(in);
  const auto m = sgrs::mean_curve(runs, window);
  std::vector<std::vector<double>> curves;
  for (const auto& r : runs) curves.push_back(sgrs::curve_of(r, window));
  std::ostringstream csv;
  csv << "episode,mean,sd";
  for (std::size_t i = 0; i < runs.size(); ++i) csv << ",run_" << i;
  csv << '\n';
  for (std::size_t e = 0; e < m.size(); ++e) {
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[e] - m[e]) * (c[e] - m[e]);
    const double sd = curves.size() > 1 ? std::sqrt(ss / static_cast<double>(curves.size() - 1)) : 0.0;
    csv << e << ',' << fmt(m[e]) << ',' << fmt(sd);
    for (const auto& c : curves) csv << ',' << fmt(c[e]);
    csv << '\n';
  }
  if (out.empty())
    std::cout << csv.str();
  else
    write_text(out, csv.str());
  return 0;
}

int cmd_serve(const std::string& listen, const std::string& data_dir, std::size_t workers,
              const std::string& static_dir) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw sgrs::ConfigError("--listen expects host:port");
  const std::string host = listen.substr(0, colon);
  const int port = std::stoi(listen.substr(colon + 1));
  sgrs::ServiceOptions opt;
  opt.data_dir = data_dir;
  opt.workers = workers;
  if (!static_dir.empty()) opt.static_dir = static_dir;
  sgrs::AnnotationService service(opt);
  httplib::Server server;
  service.mount(server);
  std::fprintf(stderr, "listening on %s:%d (data in %s)\n", host.c_str(), port, data_dir.c_str());
  if (!server.listen(host, port)) throw sgrs::ResourceError("cannot listen on " + listen);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subgoal-based reward shaping experiments"};
  app.require_subcommand(1);

  RunOptions run_opt;
  std::string run_out;
  auto* run = app.add_subcommand("run", "run seeded learning runs");
  add_run_options(run, run_opt);
  run->add_option("--out", run_out, "directory for run_*.json records");

  RunOptions grid_opt;
  grid_opt.method = "hsrs";
  std::vector<double> grid{0.01, 0.1, 1, 10, 100};
  std::string grid_out;
  auto* gs = app.add_subcommand("grid-search", "rank shaping scales by time to the tightest threshold");
  add_run_options(gs, grid_opt);
  gs->add_option("--grid", grid, "eta values")->capture_default_str();
  gs->add_option("--out", grid_out, "write the full table (with mean curves) to this JSON file");

  std::vector<std::string> groups;
  std::vector<double> thresholds;
  std::optional<std::size_t> window;
  double tail = 0.05;
  std::string an_env, an_out;
  auto* an = app.add_subcommand("analyze", "threshold and asymptote statistics across run directories");
  an->add_option("--group", groups, "NAME=DIR of run records (repeatable)")->required();
  an->add_option("--thresholds", thresholds, "step thresholds (environment defaults when omitted)");
  an->add_option("--smooth-window", window, "moving-average window before thresholding");
  an->add_option("--tail-fraction", tail, "fraction of episodes used for the asymptote")->capture_default_str();
  an->add_option("--env", an_env, "environment used for defaults when request.json is absent");
  an->add_option("--out", an_out, "directory for stats.json and CSV tables");

  std::string curve_in, curve_out;
  std::size_t curve_window = 1;
  auto* cv = app.add_subcommand("curve", "per-episode CSV of a run directory");
  cv->add_option("--in", curve_in, "directory of run records")->required();
  cv->add_option("--smooth-window", curve_window, "moving-average window")->capture_default_str();
  cv->add_option("--out", curve_out, "CSV path (stdout when omitted)");

  std::string listen = "127.0.0.1:8080", data_dir = "data/service", static_dir;
  std::size_t serve_workers = 1;
  auto* sv = app.add_subcommand("serve", "start the annotation HTTP service");
  sv->add_option("--listen", listen, "host:port")->envname("SGRS_LISTEN")->capture_default_str();
  sv->add_option("--data-dir", data_dir, "flat-file store")->envname("SGRS_DATA_DIR")->capture_default_str();
  sv->add_option("--workers", serve_workers, "job worker threads")->envname("SGRS_WORKERS")->capture_default_str();
  sv->add_option("--static", static_dir, "directory of built web assets")->envname("SGRS_STATIC_DIR");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opt, run_out);
    if (*gs) return cmd_grid(grid_opt, grid, grid_out);
    if (*an) return cmd_analyze(groups, thresholds, window, tail, an_env, an_out);
    if (*cv) return cmd_curve(curve_in, curve_window, curve_out);
    if (*sv) return cmd_serve(listen, data_dir, serve_workers, static_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
