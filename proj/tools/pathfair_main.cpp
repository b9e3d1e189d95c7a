// pathfair: command-line front end for simulating, training, sweeping, and
// auditing pathway-fair classifiers.
//
// Commands: simulate, fit-propensity, train, eval, sweep, report.
// Exit codes: 0 success, 2 configuration/validation error, 3 runtime
// numeric failure.
//
// Every output is byte-stable for identical flags and seed; wall-clock
// information is confined to the meta/<command>.json sidecar. The seed and
// the output directory follow the precedence flag > environment
// (PATHFAIR_SEED, PATHFAIR_OUT) > config file > built-in default.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pathfair/data.hpp"
#include "pathfair/errors.hpp"
#include "pathfair/experiment.hpp"
#include "pathfair/metrics.hpp"
#include "pathfair/model.hpp"
#include "pathfair/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pathfair;

namespace {

// ---------------------------------------------------------------------------
// Small helpers

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) { return fmt("%.10g", v); }

std::string lambda_repr(double v) { return fmt("%g", v); }

void write_text_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << content;
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

std::string iso_utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::uint64_t> parse_u64(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return static_cast<std::uint64_t>(v);
  } catch (...) {
    return std::nullopt;
  }
}

// Seed precedence: --seed flag > PATHFAIR_SEED > config value (already in
// `spec`) > default already in `spec`.
void apply_seed(ExperimentSpec& spec, const std::optional<std::uint64_t>& flag) {
  if (flag) {
    spec.seed = *flag;
    return;
  }
  if (const char* env = std::getenv("PATHFAIR_SEED")) {
    auto v = parse_u64(env);
    if (!v) throw ConfigError("PATHFAIR_SEED must be an unsigned integer");
    spec.seed = *v;
  }
}

std::uint64_t resolve_plain_seed(const std::optional<std::uint64_t>& flag,
                                 std::uint64_t fallback) {
  ExperimentSpec tmp;
  tmp.seed = fallback;
  apply_seed(tmp, flag);
  return tmp.seed;
}

fs::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PATHFAIR_OUT")) {
    if (*env) return env;
  }
  return "out";
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// Sidecar metadata (the only file that may differ between identical runs)

struct MetaScope {
  fs::path out_root;
  std::string command;
  json extra = json::object();
  std::vector<std::string> warnings;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::string started = iso_utc_now();

  void write() const {
    json j;
    j["command"] = command;
    j["started_at"] = started;
    j["finished_at"] = iso_utc_now();
    j["wall_ms"] = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    j["warnings"] = warnings;
    for (const auto& item : extra.items()) j[item.key()] = item.value();
    write_text_file(out_root / "meta" / (command + ".json"), j.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------------------
// Evaluation serialisation

json eval_to_json(const ExperimentSpec& spec, const RunArtifacts& run) {
  json j;
  j["classifier"] = run.train.model.model->kind();
  j["penalty"] = to_string(spec.train.penalty);
  j["lambda"] = spec.train.lambda;
  j["accuracy"] = run.stats.accuracy;
  j["p0"] = run.stats.p0;
  j["p1"] = run.stats.p1;
  j["p0_raw"] = run.stats.p0_raw;
  j["p1_raw"] = run.stats.p1_raw;
  j["effect"] = run.stats.effect;
  j["abs_effect"] = std::abs(run.stats.effect);
  j["disagreement_bound"] = run.stats.disagreement_bound;
  const FeasibleRange fr = feasible_range(run.stats.p0, run.stats.p1);
  j["feasible_lower"] = fr.lower;
  j["feasible_upper"] = fr.upper;
  j["constraint"] = run.constraint;
  j["zero_by_mask"] = run.zero_by_mask;
  if (run.stats.has_oracle) {
    j["oracle"] = {{"p0", run.stats.oracle_p0},
                   {"p1", run.stats.oracle_p1},
                   {"flip_rate", run.stats.oracle_flip},
                   {"subgroup_std", run.stats.oracle_subgroup_std}};
  } else {
    j["oracle"] = "unavailable";
  }
  if (run.has_latent) {
    j["identification"] = {{"l0", run.latent.l0}, {"u0", run.latent.u0},
                           {"l1", run.latent.l1}, {"u1", run.latent.u1},
                           {"penalty", run.latent_penalty},
                           {"bound", 2.0 * run.latent_penalty}};
  }
  if (!run.train.trace.empty()) j["aborted"] = run.train.aborted;
  return j;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "epoch,loss,penalty,p0,p1\n";
  for (const TraceRow& r : trace) {
    out << r.epoch << ',' << num(r.loss) << ',' << num(r.penalty) << ','
        << num(r.p0) << ',' << num(r.p1) << '\n';
  }
  return out.str();
}

// Writes checkpoint + trace + eval under `dir` for one training run.
void write_run_artifacts(const fs::path& dir, const ExperimentSpec& spec,
                         const RunArtifacts& run) {
  fs::create_directories(dir / "checkpoints");
  save_model(run.train.model, (dir / "checkpoints" / "model.json").string());
  if (!run.train.trace.empty()) {
    write_text_file(dir / "traces" / "trace.csv", trace_to_csv(run.train.trace));
  }
  write_text_file(dir / "reports" / "eval.json",
                  eval_to_json(spec, run).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Report rendering

std::string stat_or(const std::string& unavailable, bool have, double v,
                    const char* f = "%.4f") {
  return have ? fmt(f, v) : unavailable;
}

std::string render_report_text(const ExperimentContext& ctx,
                               const RunArtifacts& run) {
  const FittedModel& fm = run.train.model;
  const long n_test = ctx.data.test_count();
  const int k = static_cast<int>(
      std::llround((1.0 - run.stats.accuracy) * static_cast<double>(n_test)));
  const TestSetBound tb = test_set_bound(k, static_cast<int>(n_test));
  const bool oracle = run.stats.has_oracle;

  std::ostringstream out;
  out << "fairness report\n";
  out << "===============\n\n";
  out << "classifier         : " << fm.model->kind() << " ("
      << fm.model->input_dim() << " features)\n";
  if (const auto* mc = dynamic_cast<const MaskedClassifier*>(fm.model.get())) {
    out << "masked features    :";
    for (int c : mc->masked_columns())
      out << ' ' << ctx.recipe.feature_names[c];
    out << "\n";
  }
  out << "test rows          : " << n_test << "\n";
  out << "accuracy           : " << fmt("%.4f", run.stats.accuracy) << "  ("
      << k << " errors)\n";
  out << "error-rate bound   : [" << fmt("%.1f", 100.0 * tb.lower) << "%, "
      << fmt("%.1f", 100.0 * tb.upper)
      << "%]  (exact binomial, delta = 0.05 per side)\n\n";

  out << "estimated pathway statistics (inverse-probability weighted)\n";
  if (run.zero_by_mask) {
    out << "  masked inputs cover the attribute and every on-path mediator;\n"
        << "  the two worlds see identical inputs, so all pathway statistics\n"
        << "  are exactly zero.\n";
  }
  out << "  baseline-world mean score  p0 : " << fmt("%.4f", run.stats.p0)
      << "  (raw " << fmt("%.4f", run.stats.p0_raw) << ")\n";
  out << "  pathway-world mean score   p1 : " << fmt("%.4f", run.stats.p1)
      << "  (raw " << fmt("%.4f", run.stats.p1_raw) << ")\n";
  out << "  (a) |pathway effect|          : "
      << fmt("%.4f", std::abs(run.stats.effect)) << "\n";
  out << "  (c) disagreement upper bound  : "
      << fmt("%.4f", run.stats.disagreement_bound) << "\n";
  const FeasibleRange fr = feasible_range(run.stats.p0, run.stats.p1);
  out << "  feasible disagreement range   : [" << fmt("%.4f", fr.lower) << ", "
      << fmt("%.4f", fr.upper) << "]\n\n";

  out << "oracle statistics";
  if (oracle) {
    out << " (simulated matched potential-outcome pairs)\n";
    out << "  world mean scores             : "
        << fmt("%.4f", run.stats.oracle_p0) << " vs "
        << fmt("%.4f", run.stats.oracle_p1) << "\n";
    out << "  (b) decision flip probability : "
        << fmt("%.4f", run.stats.oracle_flip) << "\n";
    out << "  (d) subgroup flip-rate spread : "
        << fmt("%.4f", run.stats.oracle_subgroup_std) << "\n";
  } else {
    out << "                : unavailable (no generative model supplied;\n"
        << "  pass --oracle-sem to compute the simulation-based statistics)\n";
  }

  if (run.has_latent) {
    out << "\nidentification intervals (latent confounding)\n";
    out << "  baseline-world mean score in  [" << fmt("%.4f", run.latent.l0)
        << ", " << fmt("%.4f", run.latent.u0) << "]\n";
    out << "  pathway-world mean score in   [" << fmt("%.4f", run.latent.l1)
        << ", " << fmt("%.4f", run.latent.u1) << "]\n";
    out << "  worst-case disagreement bound : "
        << fmt("%.4f", 2.0 * run.latent_penalty) << "\n";
  }
  return out.str();
}

std::string render_report_csv(const RunArtifacts& run) {
  const bool oracle = run.stats.has_oracle;
  std::ostringstream out;
  out << "statistic,value\n";
  out << "accuracy," << num(run.stats.accuracy) << "\n";
  out << "p0," << num(run.stats.p0) << "\n";
  out << "p1," << num(run.stats.p1) << "\n";
  out << "stat_a_abs_effect," << num(std::abs(run.stats.effect)) << "\n";
  out << "stat_b_oracle_flip,"
      << stat_or("unavailable", oracle, run.stats.oracle_flip, "%.10g") << "\n";
  out << "stat_c_disagreement_bound," << num(run.stats.disagreement_bound)
      << "\n";
  out << "stat_d_oracle_subgroup_std,"
      << stat_or("unavailable", oracle, run.stats.oracle_subgroup_std, "%.10g")
      << "\n";
  if (run.has_latent) {
    out << "latent_l0," << num(run.latent.l0) << "\n";
    out << "latent_u0," << num(run.latent.u0) << "\n";
    out << "latent_l1," << num(run.latent.l1) << "\n";
    out << "latent_u1," << num(run.latent.u1) << "\n";
    out << "latent_bound," << num(2.0 * run.latent_penalty) << "\n";
  }
  return out.str();
}

std::string render_report_svg(const RunArtifacts& run) {
  std::vector<std::string> labels = {"(a) effect", "(c) bound"};
  std::vector<double> values = {std::abs(run.stats.effect),
                                run.stats.disagreement_bound};
  if (run.stats.has_oracle) {
    labels.insert(labels.begin() + 1, "(b) flip");
    values.insert(values.begin() + 1, run.stats.oracle_flip);
    labels.push_back("(d) spread");
    values.push_back(run.stats.oracle_subgroup_std);
  }
  return svgplot::bar_chart("pathway fairness statistics", labels, values,
                            "statistic value");
}

// ---------------------------------------------------------------------------
// Sweep serialisation

std::string sweep_summary_csv(const SweepResult& res) {
  std::ostringstream out;
  out << "lambda,accuracy,p0,p1,abs_effect,disagreement_bound,constraint,"
         "oracle_flip,oracle_subgroup_std,latent_bound,selected\n";
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const SweepPoint& p = res.points[i];
    const EvalStats& s = p.run.stats;
    out << lambda_repr(p.lambda) << ',' << num(s.accuracy) << ',' << num(s.p0)
        << ',' << num(s.p1) << ',' << num(std::abs(s.effect)) << ','
        << num(s.disagreement_bound) << ',' << num(p.run.constraint) << ',';
    if (s.has_oracle) out << num(s.oracle_flip);
    out << ',';
    if (s.has_oracle) out << num(s.oracle_subgroup_std);
    out << ',';
    if (p.run.has_latent) out << num(2.0 * p.run.latent_penalty);
    out << ',' << (i == res.selected ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string sweep_svg(const SweepResult& res) {
  std::vector<double> xs, acc, stat_a, stat_c;
  for (const SweepPoint& p : res.points) {
    xs.push_back(p.lambda);
    acc.push_back(p.run.stats.accuracy);
    stat_a.push_back(std::abs(p.run.stats.effect));
    stat_c.push_back(p.run.stats.disagreement_bound);
  }
  const std::string top = svgplot::line_chart(
      "test accuracy vs penalty strength", "lambda", "accuracy",
      {{"accuracy", xs, acc, "#1f77b4"}});
  const std::string bottom = svgplot::line_chart(
      "pathway statistics vs penalty strength", "lambda", "statistic value",
      {{"(a) |effect|", xs, stat_a, "#d62728"},
       {"(c) disagreement bound", xs, stat_c, "#2ca02c"}});
  return svgplot::stack_vertical({top, bottom});
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> grid;
  auto parse_one = [](const std::string& t) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos])))
        ++pos;
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (...) {
      throw ConfigError("cannot parse lambda grid value '" + t + "'");
    }
  };
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) {
      throw ConfigError("range grids use lo:hi:step, e.g. 0:2:0.05");
    }
    const double lo = parse_one(parts[0]);
    const double hi = parse_one(parts[1]);
    const double step = parse_one(parts[2]);
    if (!(step > 0) || hi < lo) {
      throw ConfigError("range grid needs hi >= lo and step > 0");
    }
    for (int k = 0;; ++k) {
      const double v = lo + k * step;
      if (v > hi + 1e-9 * std::max(1.0, std::abs(hi))) break;
      grid.push_back(v);
    }
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) grid.push_back(parse_one(item));
    }
  }
  if (grid.empty()) throw ConfigError("lambda grid is empty");
  for (double v : grid) {
    if (!(v >= 0)) throw ConfigError("lambda grid values must be >= 0");
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Commands

struct CommonFlags {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long long> oracle_samples;
};

ExperimentSpec load_spec_with_overrides(const std::string& config,
                                        const CommonFlags& cf) {
  ExperimentSpec spec = load_experiment_spec(config);
  apply_seed(spec, cf.seed);
  if (cf.oracle_samples) spec.oracle_samples = *cf.oracle_samples;
  return spec;
}

int cmd_simulate(const std::string& preset, long n, const CommonFlags& cf) {
  const std::uint64_t seed = resolve_plain_seed(cf.seed, 1);
  const fs::path out = resolve_out(cf.out);
  MetaScope meta{out, "simulate"};

  PresetBundle b = make_preset(preset, n, seed);
  const fs::path dir = out / "data";
  fs::create_directories(dir);
  const fs::path csv = dir / (preset + ".csv");
  const fs::path semf = dir / (preset + ".sem.json");
  const CausalGraph& g = b.sem.graph();
  write_dataset_csv(b.data, csv.string(), g.name(g.outcome()));
  save_sem(b.sem, b.pathways, semf.string());

  meta.extra["preset"] = preset;
  meta.extra["n"] = n;
  meta.extra["seed"] = seed;
  meta.extra["train_count"] = b.data.train_count;
  meta.write();
  std::cout << "wrote " << csv.string() << " (" << b.data.rows() << " rows, "
            << b.data.train_count << " train)\n";
  std::cout << "wrote " << semf.string() << "\n";
  return 0;
}

int cmd_fit_propensity(const std::string& config, const CommonFlags& cf) {
  const fs::path out = resolve_out(cf.out);
  MetaScope meta{out, "fit-propensity"};
  ExperimentSpec spec = load_spec_with_overrides(config, cf);
  spec.propensity_path.clear();  // always fit fresh here
  spec.oracle_samples = 0;       // no oracle needed to fit nuisances
  ExperimentContext ctx = resolve_experiment(spec);
  print_warnings(ctx.data.warnings);
  meta.warnings = ctx.data.warnings;

  const fs::path file = out / "checkpoints" / "propensities.json";
  fs::create_directories(file.parent_path());
  save_propensities(ctx.propensities, file.string());
  meta.extra["config"] = config;
  meta.extra["seed"] = spec.seed;
  meta.write();
  std::cout << "wrote " << file.string() << "\n";
  return 0;
}

int cmd_train(const std::string& config, const CommonFlags& cf) {
  const fs::path out = resolve_out(cf.out);
  MetaScope meta{out, "train"};
  ExperimentSpec spec = load_spec_with_overrides(config, cf);
  ExperimentContext ctx = resolve_experiment(spec);
  print_warnings(ctx.data.warnings);

  RunArtifacts run = run_training(ctx, spec);
  print_warnings(run.train.warnings);
  write_run_artifacts(out, spec, run);
  if (spec.propensity_path.empty()) {
    save_propensities(ctx.propensities,
                      (out / "checkpoints" / "propensities.json").string());
  }
  meta.warnings = ctx.data.warnings;
  meta.warnings.insert(meta.warnings.end(), run.train.warnings.begin(),
                       run.train.warnings.end());
  meta.extra["config"] = config;
  meta.extra["seed"] = spec.seed;
  meta.extra["epochs"] = spec.train.epochs;
  meta.write();

  const TraceRow& last = run.train.trace.back();
  std::cout << "trained " << spec.train.classifier << " for "
            << spec.train.epochs << " epochs (penalty "
            << to_string(spec.train.penalty) << ", lambda "
            << lambda_repr(spec.train.lambda) << ")\n";
  std::cout << "final loss " << fmt("%.4f", last.loss) << ", penalty "
            << fmt("%.4f", last.penalty) << ", test accuracy "
            << fmt("%.4f", run.stats.accuracy) << ", disagreement bound "
            << fmt("%.4f", run.stats.disagreement_bound) << "\n";
  std::cout << "wrote " << (out / "checkpoints" / "model.json").string()
            << "\n";
  std::cout << "wrote " << (out / "traces" / "trace.csv").string() << "\n";
  std::cout << "wrote " << (out / "reports" / "eval.json").string() << "\n";
  if (run.train.aborted) {
    throw RuntimeFailure(
        "training aborted on a non-finite objective; the checkpoint holds "
        "the last finite state (see trace for the failing epoch)");
  }
  return 0;
}

int cmd_eval(const std::string& config, const std::string& checkpoint,
             const CommonFlags& cf) {
  const fs::path out = resolve_out(cf.out);
  MetaScope meta{out, "eval"};
  ExperimentSpec spec = load_spec_with_overrides(config, cf);
  ExperimentContext ctx = resolve_experiment(spec);
  print_warnings(ctx.data.warnings);
  meta.warnings = ctx.data.warnings;

  FittedModel fm = load_model(checkpoint);
  RunArtifacts run = evaluate_in_context(ctx, spec, fm);
  const json j = eval_to_json(spec, run);
  write_text_file(out / "reports" / "eval.json", j.dump(2) + "\n");
  meta.extra["config"] = config;
  meta.extra["checkpoint"] = checkpoint;
  meta.extra["seed"] = spec.seed;
  meta.write();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& grid_spec,
              const CommonFlags& cf) {
  const fs::path out = resolve_out(cf.out);
  MetaScope meta{out, "sweep"};
  ExperimentSpec spec = load_spec_with_overrides(config, cf);
  const std::vector<double> grid = parse_grid(grid_spec);
  ExperimentContext ctx = resolve_experiment(spec);
  print_warnings(ctx.data.warnings);
  meta.warnings = ctx.data.warnings;

  const fs::path sweep_dir = out / "sweep";
  SweepResult res = run_sweep(ctx, spec, grid, [&](const SweepPoint& p) {
    ExperimentSpec ps = spec;
    ps.train.lambda = p.lambda;
    write_run_artifacts(sweep_dir / ("lambda_" + lambda_repr(p.lambda)), ps,
                        p.run);
    std::cout << "lambda " << lambda_repr(p.lambda) << ": accuracy "
              << fmt("%.4f", p.run.stats.accuracy) << ", constraint "
              << fmt("%.4f", p.run.constraint) << "\n";
  });

  write_text_file(out / "reports" / "sweep_summary.csv",
                  sweep_summary_csv(res));
  write_text_file(out / "plots" / "sweep.svg", sweep_svg(res));
  json sel;
  sel["index"] = res.selected;
  sel["lambda"] = res.points[res.selected].lambda;
  sel["accuracy"] = res.points[res.selected].run.stats.accuracy;
  sel["constraint"] = res.points[res.selected].run.constraint;
  sel["ceiling"] = spec.ceiling;
  write_text_file(out / "reports" / "sweep_selected.json", sel.dump(2) + "\n");

  meta.extra["config"] = config;
  meta.extra["seed"] = spec.seed;
  meta.extra["grid"] = grid;
  meta.write();
  std::cout << "selected lambda = "
            << lambda_repr(res.points[res.selected].lambda) << " (constraint "
            << fmt("%.4f", res.points[res.selected].run.constraint)
            << ", ceiling " << fmt("%.4f", spec.ceiling) << ")\n";
  std::cout << "wrote " << (out / "reports" / "sweep_summary.csv").string()
            << "\n";
  std::cout << "wrote " << (out / "plots" / "sweep.svg").string() << "\n";
  return 0;
}

int cmd_report(const std::string& checkpoint, const std::string& data,
               const std::string& oracle_sem, long train_count,
               const CommonFlags& cf) {
  const fs::path out = resolve_out(cf.out);
  MetaScope meta{out, "report"};

  ExperimentSpec spec;
  const bool is_csv =
      data.size() >= 4 && data.compare(data.size() - 4, 4, ".csv") == 0;
  if (is_csv) {
    if (oracle_sem.empty()) {
      throw ConfigError(
          "a raw CSV needs --oracle-sem to define column roles; tabular "
          "datasets pass their JSON config as --data instead");
    }
    spec.csv_path = data;
    spec.sem_path = oracle_sem;
    spec.train_count = train_count;
  } else {
    if (!oracle_sem.empty()) {
      throw ConfigError(
          "--oracle-sem applies to simulated CSV datasets; tabular configs "
          "have no generative model");
    }
    spec.dataset_config = data;
  }
  apply_seed(spec, cf.seed);
  if (cf.oracle_samples) spec.oracle_samples = *cf.oracle_samples;

  ExperimentContext ctx = resolve_experiment(spec);
  print_warnings(ctx.data.warnings);
  meta.warnings = ctx.data.warnings;

  FittedModel fm = load_model(checkpoint);
  RunArtifacts run = evaluate_in_context(ctx, spec, fm);

  const std::string text = render_report_text(ctx, run);
  write_text_file(out / "reports" / "report.txt", text);
  write_text_file(out / "reports" / "report.csv", render_report_csv(run));
  write_text_file(out / "plots" / "report.svg", render_report_svg(run));
  meta.extra["checkpoint"] = checkpoint;
  meta.extra["data"] = data;
  if (!oracle_sem.empty()) meta.extra["oracle_sem"] = oracle_sem;
  meta.extra["seed"] = spec.seed;
  meta.write();

  std::cout << text;
  std::cout << "\nwrote " << (out / "reports" / "report.txt").string() << "\n";
  std::cout << "wrote " << (out / "reports" / "report.csv").string() << "\n";
  std::cout << "wrote " << (out / "plots" / "report.svg").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pathfair: train and audit binary classifiers whose decisions are "
      "insensitive to selected causal pathways"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pathfair 0.1.0");

  // Shared flag storage (CLI11 writes into these per subcommand).
  std::string preset = "synth", config, checkpoint, data, oracle_sem, grid;
  long n = 6000;
  long train_count = 0;
  CommonFlags cf;
  std::uint64_t seed_value = 0;
  long long oracle_samples_value = 0;

  auto add_common = [&](CLI::App* sub, bool with_oracle) {
    sub->add_option("--out", cf.out,
                    "output directory (default: $PATHFAIR_OUT or ./out)");
    sub->add_option("--seed", seed_value,
                    "RNG seed (default: $PATHFAIR_SEED, then config, then 1)")
        ->check(CLI::NonNegativeNumber);
    if (with_oracle) {
      sub->add_option("--oracle-samples", oracle_samples_value,
                      "Monte Carlo rows for oracle statistics (0 disables)");
    }
  };

  CLI::App* sim = app.add_subcommand(
      "simulate", "draw a dataset from a built-in generative preset");
  sim->add_option("--preset", preset,
                  "synth | synth-additive | synth-latent | fig1b-illustrative")
      ->required();
  sim->add_option("--n", n, "number of rows (last sixth becomes the test set)");
  add_common(sim, false);

  CLI::App* fitp = app.add_subcommand(
      "fit-propensity", "fit the attribute-model stages used by the weights");
  fitp->add_option("--config", config, "experiment config JSON")->required();
  add_common(fitp, false);

  CLI::App* train = app.add_subcommand(
      "train", "train one classifier per the experiment config");
  train->add_option("--config", config, "experiment config JSON")->required();
  add_common(train, true);

  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate a checkpoint on the config's dataset");
  eval->add_option("--config", config, "experiment config JSON")->required();
  eval->add_option("--checkpoint", checkpoint, "model checkpoint JSON")
      ->required();
  add_common(eval, true);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "train across a strength grid and select by the ceiling rule");
  sweep->add_option("--config", config, "experiment config JSON")->required();
  sweep
      ->add_option("--lambda-grid", grid,
                   "comma list (0,0.5,1) or range lo:hi:step (0:2:0.05)")
      ->required();
  add_common(sweep, true);

  CLI::App* report = app.add_subcommand(
      "report", "full fairness report for a checkpoint on a dataset");
  report->add_option("--checkpoint", checkpoint, "model checkpoint JSON")
      ->required();
  report
      ->add_option("--data", data,
                   "dataset: tabular config JSON, or simulated CSV")
      ->required();
  report->add_option("--oracle-sem", oracle_sem,
                     "generative model JSON (simulated CSV only)");
  report->add_option("--train-count", train_count,
                     "train rows in the CSV (default: all but the last sixth)");
  add_common(report, true);

  try {
    app.parse(argc, argv);
    if (sim->count("--seed") || fitp->count("--seed") ||
        train->count("--seed") || eval->count("--seed") ||
        sweep->count("--seed") || report->count("--seed")) {
      cf.seed = seed_value;
    }
    for (CLI::App* sub : {train, eval, sweep, report}) {
      if (sub->count("--oracle-samples")) cf.oracle_samples = oracle_samples_value;
    }

    if (sim->parsed()) return cmd_simulate(preset, n, cf);
    if (fitp->parsed()) return cmd_fit_propensity(config, cf);
    if (train->parsed()) return cmd_train(config, cf);
    if (eval->parsed()) return cmd_eval(config, checkpoint, cf);
    if (sweep->parsed()) return cmd_sweep(config, grid, cf);
    if (report->parsed())
      return cmd_report(checkpoint, data, oracle_sem, train_count, cf);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeFailure& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  }
}
