// Experiment front end: `run` executes Algorithm sweeps and writes traces plus
// a summary CSV, `conclab` drives the statistical verification checks, and
// `report` aggregates summary CSVs into markdown tables and plot-ready CSVs.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bandit2p/bandit2p.hpp"

namespace fs = std::filesystem;
using namespace bandit2p;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFeasibility = 3;
constexpr int kExitInsufficientData = 4;

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const unsigned count = std::min<unsigned>(jobs, static_cast<unsigned>(n));
  workers.reserve(count);
  for (unsigned w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

fs::path resolve_out_dir(const io::ExperimentSpec& spec, const std::string& out_flag) {
  std::string dir = out_flag.empty() ? spec.output_dir : out_flag;
  if (dir.empty()) throw ParameterError("no output directory (set --out or spec output_dir)");
  fs::create_directories(dir);
  return dir;
}

int cmd_run(const std::string& spec_path, const std::string& out_flag, unsigned jobs,
            std::optional<std::uint64_t> seed_flag, bool force) {
  io::ExperimentSpec spec = io::load_spec(spec_path);
  if (seed_flag) spec.base.seed = *seed_flag;
  spec.base.validate();
  const fs::path out_dir = resolve_out_dir(spec, out_flag);

  std::cout << "resolved config: " << io::config_to_json(spec.base).dump() << "\n";

  const std::vector<io::SweepPoint> points = io::expand_sweeps(spec);
  for (const io::SweepPoint& pt : points) pt.config.validate();

  struct Job {
    int point = 0;
    int run = 0;
    RunConfig config;
    double delta = 0.0;
  };
  std::vector<Job> jobs_list;
  for (const io::SweepPoint& pt : points) {
    for (int r = 0; r < spec.n_runs; ++r) {
      RunConfig cfg = pt.config;
      cfg.stream_id = static_cast<std::uint64_t>(r);  // stream_id = run_index
      jobs_list.push_back({pt.index, r, std::move(cfg), pt.delta});
    }
  }

  // Pre-check output collisions before any expensive work.
  const fs::path summary_path = out_dir / (spec.name + "_summary.csv");
  io::guard_overwrite(summary_path, force);
  if (spec.save_traces) {
    for (const Job& job : jobs_list) {
      const std::string stem =
          "trace_p" + std::to_string(job.point) + "_r" + std::to_string(job.run);
      io::guard_overwrite(out_dir / (stem + ".csv"), force);
      io::guard_overwrite(out_dir / (stem + ".json"), force);
    }
  }

  std::vector<io::SummaryRow> rows(jobs_list.size());
  std::vector<std::string> trace_csvs(spec.save_traces ? jobs_list.size() : 0);
  std::vector<std::string> trace_sidecars(spec.save_traces ? jobs_list.size() : 0);
  std::atomic<bool> feasibility_failed{false};
  std::string feasibility_msg;
  std::mutex msg_mutex;

  parallel_for(jobs_list.size(), jobs, [&](std::size_t i) {
    if (feasibility_failed.load()) return;
    const Job& job = jobs_list[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Trace trace = run(job.config);
      const RegretBreakdown rb = regret(trace, comparator(trace));
      const auto t1 = std::chrono::steady_clock::now();
      io::SummaryRow& row = rows[i];
      row.name = spec.name;
      row.d = job.config.dim;
      row.T = job.config.horizon;
      row.delta = job.delta;
      row.mu = job.config.mu();
      row.G = trace.declared_G;
      row.alpha = job.config.alpha();
      row.xi = job.config.xi();
      row.schedule = to_string(job.config.schedule);
      row.adversary = job.config.adversary.kind_name();
      row.seed = job.config.seed;
      row.stream_id = job.config.stream_id;
      row.regret = rb.regret;
      row.gsum_weighted = rb.gsum_weighted;
      row.gmax = rb.gmax;
      row.wall_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
      if (spec.save_traces) {
        std::ostringstream csv;
        io::write_trace_csv(csv, trace);
        trace_csvs[i] = csv.str();
        trace_sidecars[i] = io::trace_sidecar(trace).dump(2);
      }
    } catch (const FeasibilityError& e) {
      std::lock_guard<std::mutex> lock(msg_mutex);
      feasibility_failed = true;
      feasibility_msg = std::string(e.what()) + " [config: " +
                        io::config_to_json(job.config).dump() + "]";
    }
  });
  if (feasibility_failed) throw FeasibilityError(feasibility_msg);

  for (std::size_t i = 0; i < jobs_list.size(); ++i) {
    if (!spec.save_traces) break;
    const Job& job = jobs_list[i];
    const std::string stem =
        "trace_p" + std::to_string(job.point) + "_r" + std::to_string(job.run);
    io::write_text_file(out_dir / (stem + ".csv"), trace_csvs[i], force);
    io::write_text_file(out_dir / (stem + ".json"), trace_sidecars[i], force);
  }

  std::ostringstream summary;
  io::write_summary_csv(summary, io::config_to_json(spec.base), rows);
  io::write_text_file(summary_path, summary.str(), force);
  std::cout << "wrote " << summary_path.string() << " (" << rows.size() << " runs)\n";
  return 0;
}

std::vector<double> lambda_list(const json& params, double b) {
  if (params.contains("lambda")) return {params.at("lambda").get<double>()};
  std::vector<double> fracs = {0.1, 0.5, 0.9};
  if (params.contains("lambda_fracs")) fracs = params.at("lambda_fracs").get<std::vector<double>>();
  std::vector<double> out;
  for (double f : fracs) out.push_back(f * 3.0 / b);
  return out;
}

int cmd_conclab(const std::string& spec_path, const std::string& check,
                const std::string& out_flag, bool force) {
  static const std::set<std::string> valid = {"supermartingale", "zsum", "gsum", "regret",
                                              "sphere"};
  if (!valid.count(check)) {
    std::string names;
    for (const auto& v : valid) names += (names.empty() ? "" : ", ") + v;
    throw ParameterError("unknown check '" + check + "'; valid checks: " + names);
  }
  io::ExperimentSpec spec = io::load_spec(spec_path);
  const fs::path out_dir = resolve_out_dir(spec, out_flag);
  const json& params = spec.check_params;

  json report;
  bool pass = true;
  std::string stat_line;

  if (check == "supermartingale") {
    const std::string model_name = params.value("model", std::string("two_point"));
    conclab::DifferenceModel model;
    const RunConfig* cfg = nullptr;
    double b = params.value("b", 1.0);
    if (model_name == "uniform") {
      model = conclab::DifferenceModel::CenteredUniform;
    } else if (model_name == "two_point") {
      model = conclab::DifferenceModel::CenteredTwoPoint;
    } else if (model_name == "trace") {
      model = conclab::DifferenceModel::TraceZ;
      cfg = &spec.base;
      const double d = static_cast<double>(spec.base.dim);
      b = 2.0 * (d + 1.0) * make_adversary(spec.base).declared_G() *
          spec.base.body.outer_radius();
    } else {
      throw ParameterError("supermartingale: unknown model '" + model_name + "'");
    }
    const int T = params.value("T", 100);
    const auto n_paths = params.value("n_paths", std::size_t{100000});
    report = json::array();
    std::ostringstream stat;
    for (double lambda : lambda_list(params, b)) {
      RandomSource src(spec.base.seed, 0xcafe);
      auto rep = conclab::check_supermartingale(b, lambda, n_paths, T, model, spec.delta,
                                                src, cfg);
      pass = pass && rep.pass;
      stat << " lambda=" << lambda << " mean(M_T)=" << rep.mean_mt << "+-" << rep.stderr_mt;
      report.push_back(io::report_to_json(rep));
    }
    stat_line = stat.str();
  } else if (check == "zsum") {
    std::vector<Trace> traces;
    traces.reserve(static_cast<std::size_t>(spec.n_runs));
    for (int i = 0; i < spec.n_runs; ++i) {
      RunConfig cfg = spec.base;
      cfg.stream_id = static_cast<std::uint64_t>(i);
      traces.push_back(run(cfg));
    }
    auto rep = conclab::check_z_sum(traces, spec.delta);
    pass = rep.pass;
    stat_line = " violation_rate=" + std::to_string(rep.violation_rate) + "+-" +
                std::to_string(3.0 * rep.violation_stderr) + " (delta=" +
                std::to_string(spec.delta) + ")";
    report = io::report_to_json(rep);
  } else if (check == "gsum" || check == "regret") {
    std::vector<RunConfig> sweep;
    for (const io::SweepPoint& pt : io::expand_sweeps(spec)) sweep.push_back(pt.config);
    auto rep = check == "gsum"
                   ? conclab::check_gsum(sweep, spec.n_runs, spec.delta)
                   : conclab::check_regret_highprob(sweep, spec.n_runs, spec.delta);
    pass = rep.pass;
    std::ostringstream stat;
    if (rep.fit_quantile_vs_logT)
      stat << " R2(logT)=" << rep.fit_quantile_vs_logT->r2;
    if (rep.fit_logq_vs_logd)
      stat << " slope(d)=" << rep.fit_logq_vs_logd->slope << "+-"
           << rep.fit_logq_vs_logd->slope_stderr;
    stat << " K_hat=" << rep.max_envelope_constant;
    stat_line = stat.str();
    report = io::report_to_json(rep, check);
  } else {  // sphere
    std::vector<std::size_t> d_sweep = {4, 16, 64};
    if (params.contains("d_sweep")) d_sweep = params.at("d_sweep").get<std::vector<std::size_t>>();
    const double L = params.value("L", 1.0);
    const auto n_samples = params.value("n_samples", std::size_t{1000000});
    RandomSource src(spec.base.seed, 0x5e7e);
    auto rep = conclab::check_sphere_concentration(d_sweep, L, n_samples, src);
    pass = rep.pass;
    stat_line = " c1_hat=" + std::to_string(rep.c1_hat);
    report = io::report_to_json(rep);
  }

  const fs::path report_path = out_dir / (spec.name + "_" + check + ".json");
  io::write_text_file(report_path, report.dump(2), force);
  std::cout << (pass ? "PASS" : "FAIL") << " " << check << ":" << stat_line << " -> "
            << report_path.string() << "\n";
  return pass ? 0 : 1;
}

struct ParsedSummary {
  int format_version = -1;
  std::vector<io::SummaryRow> rows;
};

ParsedSummary parse_summary_csv(const fs::path& path) {
  std::ifstream in(path);
  ParsedSummary out;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# format_version=", 0) == 0) {
      out.format_version = std::stoi(line.substr(17));
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != io::kSummaryHeader)
        throw ParameterError("unexpected summary header in " + path.string());
      saw_header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 16) throw ParameterError("bad summary row in " + path.string());
    io::SummaryRow r;
    r.name = f[0];
    r.d = std::stoull(f[1]);
    r.T = std::stoi(f[2]);
    r.delta = std::stod(f[3]);
    r.mu = std::stod(f[4]);
    r.G = std::stod(f[5]);
    r.alpha = std::stod(f[6]);
    r.xi = std::stod(f[7]);
    r.schedule = f[8];
    r.adversary = f[9];
    r.seed = std::stoull(f[10]);
    r.stream_id = std::stoull(f[11]);
    r.regret = std::stod(f[12]);
    r.gsum_weighted = std::stod(f[13]);
    r.gmax = std::stod(f[14]);
    r.wall_ms = std::stoll(f[15]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

int cmd_report(const std::string& dir, bool force) {
  std::vector<fs::path> files;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".csv" &&
          e.path().filename().string().find("_summary") != std::string::npos)
        files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw InsufficientDataError("no summary CSV files found in " + dir);

  std::set<int> versions;
  std::vector<io::SummaryRow> rows;
  for (const fs::path& f : files) {
    ParsedSummary parsed = parse_summary_csv(f);
    versions.insert(parsed.format_version);
    rows.insert(rows.end(), parsed.rows.begin(), parsed.rows.end());
  }
  if (versions.size() > 1) {
    std::string v;
    for (int x : versions) v += (v.empty() ? "" : ", ") + std::to_string(x);
    throw ParameterError("mixed format_version values in " + dir + ": " + v);
  }

  // group medians / 0.95-quantiles by T (per most common d) and by d (per most common T)
  auto quantiles_by = [&](auto key) {
    std::map<decltype(key(rows[0])), std::vector<double>> groups;
    for (const io::SummaryRow& r : rows) groups[key(r)].push_back(r.regret);
    return groups;
  };
  auto by_T = quantiles_by([](const io::SummaryRow& r) { return r.T; });
  auto by_d = quantiles_by([](const io::SummaryRow& r) { return r.d; });

  std::ostringstream md;
  md << "# Experiment report\n\n";
  md << "runs: " << rows.size() << ", format_version: " << *versions.begin() << "\n\n";

  std::ostringstream csv_T, csv_d;
  csv_T << "# T, median_regret, q95_regret, n\n";
  md << "## Regret vs T\n\n| T | median regret | 0.95-quantile | n |\n|---|---|---|---|\n";
  std::vector<double> xs_T, ys_T;
  for (auto& [T, vals] : by_T) {
    const double med = nearest_rank_quantile(vals, 0.5);
    const double q95 = nearest_rank_quantile(vals, 0.95);
    md << "| " << T << " | " << med << " | " << q95 << " | " << vals.size() << " |\n";
    csv_T << T << "," << io::fmt_double(med) << "," << io::fmt_double(q95) << ","
          << vals.size() << "\n";
    xs_T.push_back(std::log(static_cast<double>(T)));
    ys_T.push_back(q95);
  }
  csv_d << "# d, median_regret, q95_regret, n\n";
  md << "\n## Regret vs d\n\n| d | median regret | 0.95-quantile | n |\n|---|---|---|---|\n";
  std::vector<double> xs_d, ys_d;
  for (auto& [d, vals] : by_d) {
    const double med = nearest_rank_quantile(vals, 0.5);
    const double q95 = nearest_rank_quantile(vals, 0.95);
    md << "| " << d << " | " << med << " | " << q95 << " | " << vals.size() << " |\n";
    csv_d << d << "," << io::fmt_double(med) << "," << io::fmt_double(q95) << ","
          << vals.size() << "\n";
    xs_d.push_back(std::log(static_cast<double>(d)));
    ys_d.push_back(std::log(std::max(q95, 1e-300)));
  }

  md << "\n## Fitted slopes\n\n";
  if (xs_T.size() >= 2) {
    const LinearFit f = ols_fit(xs_T, ys_T);
    md << "- slope vs log T: " << f.slope << " (stderr " << f.slope_stderr
       << ", R2 " << f.r2 << ")\n";
  }
  if (xs_d.size() >= 2) {
    const LinearFit f = ols_fit(xs_d, ys_d);
    md << "- slope vs d (log-log): " << f.slope << " (stderr " << f.slope_stderr
       << ", R2 " << f.r2 << ")\n";
  }

  const fs::path base(dir);
  io::write_text_file(base / "report.md", md.str(), force);
  io::write_text_file(base / "regret_vs_T.csv", csv_T.str(), force);
  io::write_text_file(base / "regret_vs_d.csv", csv_d.str(), force);
  std::cout << "wrote " << (base / "report.md").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-point bandit-feedback online gradient descent experiment lab"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, check_name, report_dir;
  unsigned jobs = 1;
  bool force = false;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "execute a sweep of engine runs");
  run_cmd->add_option("--spec", spec_path, "experiment spec JSON")->required();
  run_cmd->add_option("--out", out_dir, "output directory (defaults to spec output_dir)");
  run_cmd->add_option("--jobs", jobs, "worker pool size");
  run_cmd->add_option("--seed", seed, "override the spec seed");
  run_cmd->add_flag("--force", force, "overwrite existing output files");

  auto* conclab_cmd = app.add_subcommand("conclab", "run a concentration check");
  conclab_cmd->add_option("--spec", spec_path, "experiment spec JSON")->required();
  conclab_cmd->add_option("--check", check_name,
                          "one of: supermartingale, zsum, gsum, regret, sphere")
      ->required();
  conclab_cmd->add_option("--out", out_dir, "output directory");
  conclab_cmd->add_flag("--force", force, "overwrite existing output files");

  auto* report_cmd = app.add_subcommand("report", "aggregate summary CSVs");
  report_cmd->add_option("--dir", report_dir, "directory of summary CSVs")->required();
  report_cmd->add_flag("--force", force, "overwrite existing report files");

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed()) return cmd_run(spec_path, out_dir, jobs, seed, force);
    if (conclab_cmd->parsed()) return cmd_conclab(spec_path, check_name, out_dir, force);
    if (report_cmd->parsed()) return cmd_report(report_dir, force);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const FeasibilityError& e) {
    std::cerr << "feasibility error: " << e.what() << "\n";
    return kExitFeasibility;
  } catch (const InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
