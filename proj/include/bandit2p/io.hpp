#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandit2p/conclab.hpp"
#include "bandit2p/engine.hpp"
#include "bandit2p/errors.hpp"

namespace bandit2p::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

// Shortest round-trip decimal formatting, so identical runs serialize to
// identical bytes.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON <-> config

inline json body_to_json(const ConvexBody& b) {
  if (b.kind() == ConvexBody::Kind::Ball)
    return json{{"kind", "ball"}, {"radius", b.ball_radius()}};
  return json{{"kind", "box"}, {"half_widths", b.half_widths()}};
}

inline ConvexBody body_from_json(const json& j, std::size_t dim) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ball") return ConvexBody::ball(dim, j.at("radius").get<double>());
  if (kind == "box") {
    Vec hw = j.at("half_widths").get<Vec>();
    if (hw.size() == 1 && dim > 1) hw.assign(dim, hw[0]);
    if (hw.size() != dim)
      throw ParameterError("body: half_widths length must be 1 or match dim");
    return ConvexBody::box(std::move(hw));
  }
  throw ParameterError("body: unknown kind '" + kind + "'");
}

inline json adversary_to_json(const AdversarySpec& a) {
  json j{{"kind", a.kind_name()}, {"curvature", a.curvature}};
  if (a.kind == AdversarySequence::Kind::Fixed) {
    j["center"] = a.center;
    if (!a.slope.empty()) j["slope"] = a.slope;
  } else {
    j["rho"] = a.rho;
  }
  return j;
}

inline Vec fit_dim(Vec v, std::size_t dim) {
  v.resize(dim, 0.0);  // pad with zeros / truncate when sweeping d
  return v;
}

inline AdversarySpec adversary_from_json(const json& j, std::size_t dim) {
  AdversarySpec a;
  const std::string kind = j.at("kind").get<std::string>();
  a.curvature = j.value("curvature", 1.0);
  if (kind == "fixed") {
    a.kind = AdversarySequence::Kind::Fixed;
    a.center = fit_dim(j.at("center").get<Vec>(), dim);
    if (j.contains("slope")) a.slope = fit_dim(j.at("slope").get<Vec>(), dim);
  } else if (kind == "shifting") {
    a.kind = AdversarySequence::Kind::ShiftingCenters;
    a.rho = j.value("rho", 0.5);
  } else if (kind == "adaptive") {
    a.kind = AdversarySequence::Kind::Adaptive;
    a.rho = j.value("rho", 0.5);
  } else {
    throw ParameterError("adversary: unknown kind '" + kind + "'");
  }
  return a;
}

inline StepSchedule schedule_from_string(const std::string& s) {
  if (s == "two_over_mu_t") return StepSchedule::TwoOverMuT;
  if (s == "one_over_mu_t") return StepSchedule::OneOverMuT;
  throw ParameterError("schedule: unknown value '" + s + "'");
}

// The resolved config (all defaults applied) is what gets embedded in outputs.
inline json config_to_json(const RunConfig& c) {
  return json{{"dim", c.dim},
              {"horizon", c.horizon},
              {"body", body_to_json(c.body)},
              {"adversary", adversary_to_json(c.adversary)},
              {"seed", c.seed},
              {"stream_id", c.stream_id},
              {"alpha", c.alpha()},
              {"xi", c.xi()},
              {"mu", c.mu()},
              {"schedule", to_string(c.schedule)}};
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.dim = j.at("dim").get<std::size_t>();
  c.horizon = j.at("horizon").get<int>();
  c.body = body_from_json(j.at("body"), c.dim);
  c.adversary = adversary_from_json(j.at("adversary"), c.dim);
  c.seed = j.value("seed", std::uint64_t{0});
  c.stream_id = j.value("stream_id", std::uint64_t{0});
  if (j.contains("alpha")) c.alpha_override = j.at("alpha").get<double>();
  if (j.contains("xi")) c.xi_override = j.at("xi").get<double>();
  if (j.contains("mu")) c.mu_override = j.at("mu").get<double>();
  c.schedule = schedule_from_string(j.value("schedule", std::string("two_over_mu_t")));
  return c;
}

// ---------------------------------------------------------------------------
// Experiment specs and sweep expansion

struct ExperimentSpec {
  std::string name;
  int format_version = kFormatVersion;
  RunConfig base;
  std::map<std::string, std::vector<json>> sweeps;  // key order fixed by map
  int n_runs = 1;
  double delta = 0.05;
  std::string output_dir;
  bool save_traces = true;
  json check_params;  // conclab-specific knobs, passed through
};

inline const std::vector<std::string>& known_sweep_keys() {
  static const std::vector<std::string> keys = {"d",  "T",             "delta",
                                                "mu", "step_schedule", "adversary.kind"};
  return keys;
}

inline ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec s;
  s.name = j.at("name").get<std::string>();
  s.format_version = j.value("format_version", kFormatVersion);
  s.base = config_from_json(j.at("config"));
  s.n_runs = j.value("n_runs", 1);
  if (s.n_runs < 1) throw ParameterError("spec: n_runs must be >= 1");
  s.delta = j.value("delta", 0.05);
  s.output_dir = j.value("output_dir", std::string{});
  s.save_traces = j.value("save_traces", true);
  s.check_params = j.value("check_params", json::object());
  if (j.contains("sweeps")) {
    for (const auto& [key, vals] : j.at("sweeps").items()) {
      const auto& known = known_sweep_keys();
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        std::string msg = "spec: unknown sweep key '" + key + "'; recognized keys:";
        for (const auto& k : known) msg += " " + k;
        throw ParameterError(msg);
      }
      if (!vals.is_array() || vals.empty())
        throw ParameterError("spec: sweep '" + key + "' must be a non-empty array");
      s.sweeps[key] = std::vector<json>(vals.begin(), vals.end());
    }
  }
  return s;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open spec file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("spec parse error in ") + path + ": " + e.what());
  }
  try {
    return spec_from_json(j);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("spec validation error in ") + path + ": " + e.what());
  }
}

struct SweepPoint {
  int index = 0;
  RunConfig config;
  double delta = 0.0;
  std::map<std::string, json> values;  // the swept assignments
};

inline void apply_sweep_value(RunConfig& c, double& delta, const std::string& key,
                              const json& v) {
  if (key == "d") {
    const auto d = v.get<std::size_t>();
    c.dim = d;
    c.body = body_from_json(body_to_json(c.body), d);
    c.adversary = adversary_from_json(adversary_to_json(c.adversary), d);
  } else if (key == "T") {
    c.horizon = v.get<int>();
  } else if (key == "delta") {
    delta = v.get<double>();
  } else if (key == "mu") {
    c.mu_override = v.get<double>();
  } else if (key == "step_schedule") {
    c.schedule = schedule_from_string(v.get<std::string>());
  } else if (key == "adversary.kind") {
    json adv = adversary_to_json(c.adversary);
    adv["kind"] = v.get<std::string>();
    if (v.get<std::string>() == "fixed" && !adv.contains("center"))
      adv["center"] = zeros(c.dim);
    c.adversary = adversary_from_json(adv, c.dim);
  } else {
    throw ParameterError("unknown sweep key '" + key + "'");
  }
}

// Cartesian product over the sweep lists, keys in sorted order, point index
// in row-major order.
inline std::vector<SweepPoint> expand_sweeps(const ExperimentSpec& spec) {
  std::vector<SweepPoint> points;
  SweepPoint seedpt;
  seedpt.config = spec.base;
  seedpt.delta = spec.delta;
  points.push_back(seedpt);
  for (const auto& [key, vals] : spec.sweeps) {
    std::vector<SweepPoint> next;
    for (const SweepPoint& pt : points) {
      for (const json& v : vals) {
        SweepPoint p = pt;
        apply_sweep_value(p.config, p.delta, key, v);
        p.values[key] = v;
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  for (std::size_t i = 0; i < points.size(); ++i) points[i].index = static_cast<int>(i);
  return points;
}

// ---------------------------------------------------------------------------
// Trace serialization: CSV rows + JSON sidecar

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  const std::size_t d = trace.config.dim;
  out << "t";
  for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
  for (std::size_t i = 0; i < d; ++i) out << ",u" << i;
  out << ",value_plus,value_minus,g_norm_sq,eta_t\n";
  for (const RoundRecord& rec : trace.rounds) {
    out << rec.t;
    for (double v : rec.x) out << "," << fmt_double(v);
    for (double v : rec.u) out << "," << fmt_double(v);
    out << "," << fmt_double(rec.value_plus) << "," << fmt_double(rec.value_minus) << ","
        << fmt_double(rec.g_norm_sq) << "," << fmt_double(rec.eta_t) << "\n";
  }
}

inline json trace_sidecar(const Trace& trace) {
  json j{{"format_version", kFormatVersion},
         {"config", config_to_json(trace.config)},
         {"declared_G", trace.declared_G},
         {"declared_mu", trace.declared_mu}};
  if (trace.config.adversary.kind != AdversarySequence::Kind::Fixed) {
    json centers = json::array();
    for (const LossFunction& l : trace.losses) centers.push_back(l.center());
    j["loss_centers"] = std::move(centers);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Summary CSV (one row per run; stable column order)

struct SummaryRow {
  std::string name;
  std::size_t d = 0;
  int T = 0;
  double delta = 0.0;
  double mu = 0.0;
  double G = 0.0;
  double alpha = 0.0;
  double xi = 0.0;
  std::string schedule;
  std::string adversary;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  double regret = 0.0;
  double gsum_weighted = 0.0;
  double gmax = 0.0;
  long long wall_ms = 0;
};

inline const char* kSummaryHeader =
    "name,d,T,delta,mu,G,alpha,xi,schedule,adversary,seed,stream_id,regret,gsum_weighted,"
    "gmax,wall_ms";

inline void write_summary_csv(std::ostream& out, const json& resolved_config,
                              const std::vector<SummaryRow>& rows) {
  out << "# format_version=" << kFormatVersion << "\n";
  out << "# config=" << resolved_config.dump() << "\n";
  out << kSummaryHeader << "\n";
  for (const SummaryRow& r : rows) {
    out << r.name << "," << r.d << "," << r.T << "," << fmt_double(r.delta) << ","
        << fmt_double(r.mu) << "," << fmt_double(r.G) << "," << fmt_double(r.alpha) << ","
        << fmt_double(r.xi) << "," << r.schedule << "," << r.adversary << "," << r.seed << ","
        << r.stream_id << "," << fmt_double(r.regret) << "," << fmt_double(r.gsum_weighted)
        << "," << fmt_double(r.gmax) << "," << r.wall_ms << "\n";
  }
}

// ---------------------------------------------------------------------------
// Report serialization (raw per-run statistics retained)

inline json fit_to_json(const LinearFit& f) {
  return json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"slope_stderr", f.slope_stderr},
              {"r2", f.r2},
              {"n", f.n}};
}

inline json report_to_json(const conclab::SupermartingaleReport& r) {
  const char* model = r.model == conclab::DifferenceModel::CenteredUniform ? "uniform"
                      : r.model == conclab::DifferenceModel::CenteredTwoPoint ? "two_point"
                                                                              : "trace";
  return json{{"check", "supermartingale"}, {"format_version", kFormatVersion},
              {"model", model},             {"b", r.b},
              {"lambda", r.lambda},         {"delta", r.delta},
              {"n_paths", r.n_paths},       {"horizon", r.horizon},
              {"mean_mt", r.mean_mt},       {"stderr_mt", r.stderr_mt},
              {"exceed_rate", r.exceed_rate}, {"pass", r.pass},
              {"raw_mt", r.raw_mt},         {"raw_zsum", r.raw_zsum}};
}

inline json report_to_json(const conclab::ZSumReport& r) {
  return json{{"check", "zsum"},
              {"format_version", kFormatVersion},
              {"n_runs", r.n_runs},
              {"delta", r.delta},
              {"violation_rate", r.violation_rate},
              {"violation_stderr", r.violation_stderr},
              {"empirical_quantile", r.empirical_quantile},
              {"max_abs_z", r.max_abs_z},
              {"b", r.b},
              {"zmean_within_4se_fraction", r.zmean_within_4se_fraction},
              {"pass", r.pass},
              {"raw_zsum", r.raw_zsum},
              {"raw_bound", r.raw_bound}};
}

inline json report_to_json(const conclab::StudyReport& r, const std::string& check) {
  json points = json::array();
  for (const auto& pt : r.points) {
    points.push_back(json{{"config", config_to_json(pt.config)},
                          {"G", pt.declared_G},
                          {"quantile", pt.quantile},
                          {"envelope_constant", pt.envelope_constant},
                          {"raw_values", pt.values}});
  }
  json j{{"check", check},
         {"format_version", kFormatVersion},
         {"delta", r.delta},
         {"n_runs", r.n_runs},
         {"max_envelope_constant", r.max_envelope_constant},
         {"pass", r.pass},
         {"points", std::move(points)}};
  if (r.fit_quantile_vs_logT) j["fit_quantile_vs_logT"] = fit_to_json(*r.fit_quantile_vs_logT);
  if (r.fit_logq_vs_logd) j["fit_logq_vs_logd"] = fit_to_json(*r.fit_logq_vs_logd);
  return j;
}

inline json report_to_json(const conclab::SphereConcentrationReport& r) {
  json per_d = json::array();
  for (const auto& pd : r.per_dim) {
    per_d.push_back(json{{"d", pd.d},
                         {"variance", pd.variance},
                         {"expected_variance", pd.expected_variance},
                         {"taus", pd.taus},
                         {"tail_freqs", pd.tail_freqs}});
  }
  return json{{"check", "sphere"},
              {"format_version", kFormatVersion},
              {"L", r.lipschitz_L},
              {"n_samples", r.n_samples},
              {"c1_hat", r.c1_hat},
              {"pass", r.pass},
              {"per_dim", std::move(per_d)}};
}

// ---------------------------------------------------------------------------
// Output files

// Monte-Carlo results are expensive; never overwrite without --force.
inline void guard_overwrite(const std::filesystem::path& p, bool force) {
  if (!force && std::filesystem::exists(p))
    throw ParameterError("refusing to overwrite existing file " + p.string() +
                         " (use --force)");
}

inline void write_text_file(const std::filesystem::path& p, const std::string& content,
                            bool force) {
  guard_overwrite(p, force);
  std::ofstream out(p);
  if (!out) throw ParameterError("cannot write " + p.string());
  out << content;
}

}  // namespace bandit2p::io
