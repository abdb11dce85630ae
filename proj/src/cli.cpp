#include "scif/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "scif/io.hpp"

namespace scif::cli {

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index writes only
// its own slot, so results do not depend on scheduling. The first failure by
// index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::optional<ErrorReport> try_summarize(const ErrorSeries& errors, double threshold) {
  for (const auto& e : errors) {
    if (e) return summarize(errors, threshold);
  }
  return std::nullopt;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string("n/a");
}

std::string file_stem(Method m) {
  std::string s(method_name(m));
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

io::Json counters_json(const FusionCounters& c) {
  return io::Json{{"accepted", c.accepted},         {"soft_accepted", c.soft_accepted},
                  {"discarded", c.discarded},       {"partial_fused", c.partial_fused},
                  {"ignored", c.ignored},           {"unknown_tag", c.unknown_tag},
                  {"stale", c.stale},               {"singular", c.singular},
                  {"reinitializations", c.reinitializations}};
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
      return kExitParse;
    default:
      return kExitInvalidInput;
  }
}

sim::Scenario load_run_scenario(const RunConfig& cfg) {
  if (cfg.scenario.empty()) throw Error(ErrorCode::kParse, "--scenario is required");
  sim::Scenario s = io::load_scenario(cfg.scenario, cfg.overrides);
  if (cfg.seed) s.seed = *cfg.seed;
  return s;
}

std::vector<Method> resolve_methods(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<Method> out;
  for (const std::string& n : names) {
    const auto m = parse_method(n);
    if (!m) {
      throw Error(ErrorCode::kParse,
                  "unknown method '" + n + "'; valid methods: " + valid_method_names());
    }
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  return out;
}

void cmd_simulate(const RunConfig& cfg) {
  const sim::Scenario s = load_run_scenario(cfg);
  const sim::Truth truth = sim::generate_truth(s);
  const sim::Stream stream = sim::synthesize_stream(s, truth);
  io::write_stream(cfg.out, stream);
  if (cfg.write_session) {
    const MappingSession session =
        sim::synthesize_mapping_session(s, truth, s.mapping, s.seed);
    io::write_text(cfg.out / "mapping_session.json", io::session_to_json(session).dump(2) + "\n");
  }
}

LocalizeResult cmd_localize(const RunConfig& cfg) {
  const std::vector<Method> methods = resolve_methods(cfg.methods);
  const sim::Scenario s = load_run_scenario(cfg);
  const TagMap map = cfg.map.empty() ? s.tag_layout : io::parse_tag_map(io::load_json(cfg.map));
  const sim::Stream stream = cfg.streams.empty()
                                 ? sim::synthesize_stream(s, sim::generate_truth(s))
                                 : io::read_stream(cfg.streams);

  LocalizeResult res;
  res.results.resize(methods.size());
  parallel_for(methods.size(), cfg.jobs, [&](std::size_t i) {
    MethodResult& r = res.results[i];
    r.method = methods[i];
    r.record = sim::run_method(methods[i], stream, s.localizer, map);
    r.report = try_summarize(position_errors(r.record.epochs, stream.truth.poses),
                             cfg.success_threshold);
  });

  const bool has_tagslam =
      std::find(methods.begin(), methods.end(), Method::kTagSlam) != methods.end();
  res.baseline = has_tagslam ? Method::kTagSlam : methods.front();
  const MethodResult* base = nullptr;
  for (const MethodResult& r : res.results) {
    if (r.method == res.baseline) base = &r;
  }

  std::string summary =
      "method,rmse_m,mean_m,std_m,success_rate,success_threshold_m,present_epochs,epochs\n";
  std::string reduction =
      "method,baseline,rmse_reduction_pct,mean_reduction_pct,std_reduction_pct\n";
  io::Json methods_json = io::Json::array();
  for (const MethodResult& r : res.results) {
    const std::string name(method_name(r.method));
    const ErrorSeries errors = position_errors(r.record.epochs, stream.truth.poses);
    io::write_text(cfg.out / ("trajectory_" + file_stem(r.method) + ".csv"),
                   io::trajectory_csv(r.record.epochs, errors));
    io::Json mj{{"method", name}, {"counters", counters_json(r.record.counters)}};
    if (r.report) {
      const ErrorReport& e = *r.report;
      summary += name + ',' + io::format_double(e.rmse) + ',' + io::format_double(e.mean) + ',' +
                 io::format_double(e.std) + ',' + io::format_double(e.success_rate) + ',' +
                 io::format_double(e.success_threshold) + ',' + std::to_string(e.present) + ',' +
                 std::to_string(e.epochs) + '\n';
      mj["rmse_m"] = e.rmse;
      mj["mean_m"] = e.mean;
      mj["std_m"] = e.std;
      mj["success_rate"] = e.success_rate;
      mj["present_epochs"] = e.present;
      mj["epochs"] = e.epochs;
    } else {
      summary += name + ",n/a,n/a,n/a,0," + io::format_double(cfg.success_threshold) + ",0," +
                 std::to_string(r.record.epochs.size()) + '\n';
    }
    if (r.method != res.baseline) {
      Reduction red;
      if (base != nullptr && base->report && r.report) {
        red = proportional_reduction(*base->report, *r.report);
      }
      reduction += name + ',' + std::string(method_name(res.baseline)) + ',' + fmt_opt(red.rmse) +
                   ',' + fmt_opt(red.mean) + ',' + fmt_opt(red.std) + '\n';
      mj["reduction_vs_baseline_pct"] = {{"rmse", fmt_opt(red.rmse)},
                                         {"mean", fmt_opt(red.mean)},
                                         {"std", fmt_opt(red.std)}};
    }
    methods_json.push_back(std::move(mj));
  }
  io::write_text(cfg.out / "summary.csv", summary);
  io::write_text(cfg.out / "reduction.csv", reduction);
  const io::Json sj{{"scenario", s.name},
                    {"seed", s.seed},
                    {"epochs", stream.truth.poses.size()},
                    {"success_threshold_m", cfg.success_threshold},
                    {"baseline", std::string(method_name(res.baseline))},
                    {"methods", methods_json}};
  io::write_text(cfg.out / "summary.json", sj.dump(2) + "\n");
  return res;
}

OptimizeResult cmd_build_map(const RunConfig& cfg) {
  if (cfg.session.empty()) throw Error(ErrorCode::kParse, "--session is required");
  const MappingSession session = io::parse_session(io::load_json(cfg.session));
  const PoseGraph graph = build_graph(session);
  OptimizeResult res = optimize(graph, cfg.max_iterations);
  res.map.source.session_id = session.session_id;
  io::write_text(cfg.out / "tag_map.json", io::tag_map_to_json(res.map).dump(2) + "\n");
  for (int id : graph.skipped_tags) {
    std::cerr << "warning: expected tag " << id << " was never observed\n";
  }
  return res;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& cfg) {
  if (cfg.seeds < 1) throw Error(ErrorCode::kParse, "--seeds must be >= 1");
  const std::vector<Method> methods = resolve_methods(cfg.methods);
  const sim::Scenario base = load_run_scenario(cfg);
  const TagMap map = cfg.map.empty() ? base.tag_layout : io::parse_tag_map(io::load_json(cfg.map));
  const sim::Truth truth = sim::generate_truth(base);
  const auto n_seeds = static_cast<std::size_t>(cfg.seeds);

  std::vector<sim::Stream> streams(n_seeds);
  parallel_for(n_seeds, cfg.jobs, [&](std::size_t i) {
    sim::Scenario s = base;
    s.seed = base.seed + i;
    streams[i] = sim::synthesize_stream(s, truth);
  });

  std::vector<SweepRow> rows(n_seeds * methods.size());
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t j) {
    const std::size_t i = j / methods.size();
    SweepRow& row = rows[j];
    row.seed = base.seed + i;
    row.method = methods[j % methods.size()];
    const sim::RunRecord rec = sim::run_method(row.method, streams[i], base.localizer, map);
    row.report = try_summarize(position_errors(rec.epochs, streams[i].truth.poses),
                               cfg.success_threshold);
  });

  std::string runs = "seed,method,rmse_m,mean_m,std_m,success_rate\n";
  for (const SweepRow& r : rows) {
    runs += std::to_string(r.seed) + ',' + std::string(method_name(r.method)) + ',';
    if (r.report) {
      runs += io::format_double(r.report->rmse) + ',' + io::format_double(r.report->mean) + ',' +
              io::format_double(r.report->std) + ',' + io::format_double(r.report->success_rate);
    } else {
      runs += "n/a,n/a,n/a,0";
    }
    runs += '\n';
  }
  std::string summary =
      "method,runs,median_rmse_m,mean_rmse_m,min_rmse_m,max_rmse_m,mean_success_rate\n";
  for (Method m : methods) {
    std::vector<double> rmse;
    double success = 0.0;
    for (const SweepRow& r : rows) {
      if (r.method != m || !r.report) continue;
      rmse.push_back(r.report->rmse);
      success += r.report->success_rate;
    }
    summary += std::string(method_name(m)) + ',' + std::to_string(rmse.size()) + ',';
    if (rmse.empty()) {
      summary += "n/a,n/a,n/a,n/a,0\n";
      continue;
    }
    double sum = 0.0;
    for (double v : rmse) sum += v;
    const auto n = static_cast<double>(rmse.size());
    summary += io::format_double(median(rmse)) + ',' + io::format_double(sum / n) + ',' +
               io::format_double(*std::min_element(rmse.begin(), rmse.end())) + ',' +
               io::format_double(*std::max_element(rmse.begin(), rmse.end())) + ',' +
               io::format_double(success / static_cast<double>(n_seeds)) + '\n';
  }
  io::write_text(cfg.out / "sweep_runs.csv", runs);
  io::write_text(cfg.out / "sweep_summary.csv", summary);
  return rows;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Split covariance intersection localization: simulation, fusion and mapping"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out = "out";
  std::uint64_t seed = 0;
  std::string scenario, streams, map, session;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario, "Scenario file (JSON)")->required();
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--set", cfg.overrides, "Scenario override key.path=value (repeatable)");
    sub->add_option("--out", out, "Output directory")->capture_default_str();
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Write truth, odometry and measurement streams");
  add_common(simulate);
  simulate->add_flag("--session", cfg.write_session, "Also write a mapping session");

  CLI::App* localize = app.add_subcommand("localize", "Run localization methods and tabulate errors");
  add_common(localize);
  localize->add_option("--methods", cfg.methods, "Methods (default: all)")->delimiter(',');
  localize->add_option("--streams", streams, "Stream directory from simulate (default: synthesize)");
  localize->add_option("--map", map, "Tag map file (default: scenario layout)");
  localize->add_option("--jobs", cfg.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
  localize->add_option("--success-threshold", cfg.success_threshold, "Success threshold [m]")
      ->check(CLI::PositiveNumber);

  CLI::App* build = app.add_subcommand("build-map", "Optimize a tag map from a mapping session");
  build->add_option("--session", session, "Mapping session file (JSON)")->required();
  build->add_option("--out", out, "Output directory")->capture_default_str();
  build->add_option("--max-iterations", cfg.max_iterations, "Optimizer iteration limit")
      ->check(CLI::PositiveNumber);

  CLI::App* sweep = app.add_subcommand("sweep", "Monte-Carlo over consecutive seeds");
  add_common(sweep);
  sweep->add_option("--methods", cfg.methods, "Methods (default: all)")->delimiter(',');
  sweep->add_option("--map", map, "Tag map file (default: scenario layout)");
  sweep->add_option("--seeds", cfg.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", cfg.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
  sweep->add_option("--success-threshold", cfg.success_threshold, "Success threshold [m]")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  cfg.out = out;
  cfg.scenario = scenario;
  cfg.streams = streams;
  cfg.map = map;
  cfg.session = session;
  for (CLI::App* sub : {simulate, localize, sweep}) {
    if (sub->parsed() && sub->count("--seed") > 0) cfg.seed = seed;
  }

  try {
    if (simulate->parsed()) {
      cmd_simulate(cfg);
      std::cout << "wrote streams to " << cfg.out.string() << "\n";
    } else if (localize->parsed()) {
      const LocalizeResult r = cmd_localize(cfg);
      for (const MethodResult& m : r.results) {
        std::cout << method_name(m.method) << ": ";
        if (m.report) {
          std::cout << "rmse " << m.report->rmse << " m, mean " << m.report->mean << " m, std "
                    << m.report->std << " m, success " << m.report->success_rate << "\n";
        } else {
          std::cout << "no estimate\n";
        }
      }
    } else if (build->parsed()) {
      const OptimizeResult r = cmd_build_map(cfg);
      std::cout << "tag map: " << r.map.entries.size() << " tags, " << r.iterations
                << " iterations, final cost " << r.final_cost << ", rms residual "
                << r.map.source.rms_residual << (r.converged ? "" : " (NOT converged)") << "\n";
      if (!r.converged) return kExitNonConvergence;
    } else if (sweep->parsed()) {
      const std::vector<SweepRow> rows = cmd_sweep(cfg);
      std::cout << "wrote " << rows.size() << " runs to " << cfg.out.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}

}  // namespace scif::cli
