#include "pathfair/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "pathfair/errors.hpp"
#include "pathfair/rng.hpp"

namespace pathfair {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

ExperimentSpec parse_spec(const json& j) {
  ExperimentSpec spec;
  check_keys(j,
             {"dataset", "classifier", "penalty", "lambda", "epochs",
              "batch_size", "learning_rate", "momentum", "trace_every",
              "remove", "remove_columns", "propensities", "ceiling",
              "oracle_samples", "seed"},
             "experiment config");

  if (!j.contains("dataset") || !j.at("dataset").is_object()) {
    throw ConfigError("experiment config needs a 'dataset' object");
  }
  const json& d = j.at("dataset");
  check_keys(d, {"preset", "n", "config", "csv", "sem", "train_count"},
             "dataset block");
  spec.preset = d.value("preset", std::string());
  spec.n = d.value("n", spec.n);
  spec.dataset_config = d.value("config", std::string());
  spec.sem_path = d.value("sem", std::string());
  if (!spec.dataset_config.empty()) {
    spec.dataset_csv = d.value("csv", std::string());
  } else {
    spec.csv_path = d.value("csv", std::string());
  }
  spec.train_count = d.value("train_count", spec.train_count);

  spec.train.classifier = j.value("classifier", spec.train.classifier);
  spec.train.penalty =
      penalty_kind_from_string(j.value("penalty", std::string("none")));
  spec.train.lambda = j.value("lambda", spec.train.lambda);
  spec.train.epochs = j.value("epochs", spec.train.epochs);
  spec.train.batch_size = j.value("batch_size", spec.train.batch_size);
  spec.train.learning_rate = j.value("learning_rate", spec.train.learning_rate);
  spec.train.momentum = j.value("momentum", spec.train.momentum);
  spec.train.trace_every = j.value("trace_every", spec.train.trace_every);

  spec.remove = j.value("remove", false);
  if (j.contains("remove_columns")) {
    for (const json& c : j.at("remove_columns")) {
      spec.remove_columns.push_back(c.get<std::string>());
    }
  }
  spec.propensity_path = j.value("propensities", std::string());
  spec.ceiling = j.value("ceiling", spec.ceiling);
  spec.oracle_samples = j.value("oracle_samples", spec.oracle_samples);
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

// The regime's headline bound at a trained model: what the ceiling rule
// compares against.
double regime_constraint(PenaltyKind kind, const RunArtifacts& run) {
  switch (kind) {
    case PenaltyKind::Fio:
      return std::abs(run.stats.effect);
    case PenaltyKind::PiuUbLatent:
      return 2.0 * run.latent_penalty;
    case PenaltyKind::PiuUb:
    case PenaltyKind::None:
      return run.stats.disagreement_bound;
  }
  return run.stats.disagreement_bound;
}

void finish_run(const ExperimentContext& ctx, const ExperimentSpec& spec,
                const FittedModel& fm, RunArtifacts& out) {
  if (ctx.tables) {
    out.has_latent = true;
    out.latent = partial_id_bounds(fm, *ctx.tables);
    out.latent_penalty = penalty_latent_value(out.latent);
  }
  if (ctx.sem && ctx.pathways && spec.oracle_samples > 0) {
    OracleOptions opt;
    opt.samples = spec.oracle_samples;
    opt.seed = derive_seed(spec.seed, "oracle");
    OracleStats os = oracle_statistics(*ctx.sem, *ctx.pathways, fm, opt);
    out.stats.has_oracle = true;
    out.stats.oracle_p0 = os.p0_mean;
    out.stats.oracle_p1 = os.p1_mean;
    out.stats.oracle_flip = os.flip_rate;
    out.stats.oracle_subgroup_std = os.subgroup_std;
  }
  out.constraint = regime_constraint(spec.train.penalty, out);
}

}  // namespace

ExperimentSpec parse_experiment_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config is not valid JSON: ") +
                      e.what());
  }
  try {
    return parse_spec(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_json(buf.str());
}

std::vector<int> resolve_mask(const ExperimentSpec& spec, const Recipe& r) {
  if (!spec.remove_columns.empty()) {
    std::vector<int> mask;
    for (const std::string& name : spec.remove_columns) {
      auto it =
          std::find(r.feature_names.begin(), r.feature_names.end(), name);
      if (it == r.feature_names.end()) {
        throw ConfigError("remove_columns names unknown feature '" + name +
                          "'");
      }
      mask.push_back(static_cast<int>(it - r.feature_names.begin()));
    }
    std::sort(mask.begin(), mask.end());
    mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
    return mask;
  }
  if (spec.remove) return default_remove_mask(r);
  return {};
}

ExperimentContext resolve_experiment(const ExperimentSpec& spec) {
  ExperimentContext ctx;
  const int forms = (!spec.preset.empty() ? 1 : 0) +
                    (!spec.dataset_config.empty() ? 1 : 0) +
                    (!spec.csv_path.empty() ? 1 : 0);
  if (forms != 1) {
    throw ConfigError(
        "dataset block must use exactly one form: {preset, n}, "
        "{config[, csv]}, or {csv, sem[, train_count]}");
  }

  if (!spec.preset.empty()) {
    PresetBundle b = make_preset(spec.preset, spec.n, spec.seed);
    ctx.data = std::move(b.data);
    ctx.recipe = std::move(b.recipe);
    ctx.sem.emplace(std::move(b.sem));
    ctx.pathways.emplace(std::move(b.pathways));
  } else if (!spec.dataset_config.empty()) {
    TabularLoad t = load_tabular_dataset(spec.dataset_config, spec.dataset_csv);
    ctx.data = std::move(t.data);
    ctx.recipe = std::move(t.recipe);
  } else {
    if (spec.sem_path.empty()) {
      throw ConfigError(
          "the csv dataset form needs 'sem': the generative model file "
          "written beside the dataset");
    }
    auto loaded = load_sem(spec.sem_path);
    Sem& sem = loaded.first;
    PathwaySet& pi = loaded.second;
    const CausalGraph& g = sem.graph();
    // The reader insists on an explicit split; when the caller gave none,
    // read with a placeholder and apply the preset rule (5/6 train).
    Dataset d = read_numeric_csv(spec.csv_path, g.name(g.outcome()),
                                 g.name(g.attribute()),
                                 spec.train_count > 0 ? spec.train_count : 1);
    if (spec.train_count <= 0) d.train_count = d.rows() - d.rows() / 6;
    const std::vector<int> fn = feature_nodes(g);
    bool layout_ok = d.feature_names.size() == fn.size();
    for (std::size_t i = 0; layout_ok && i < fn.size(); ++i) {
      layout_ok = d.feature_names[i] == g.name(fn[i]);
    }
    if (!layout_ok) {
      throw ConfigError(
          "CSV feature columns do not match the generative model's feature "
          "layout (same names, same order, attribute included)");
    }
    ctx.recipe = derive_recipe(g, pi);
    ctx.data = std::move(d);
    ctx.sem.emplace(std::move(sem));
    ctx.pathways.emplace(std::move(pi));
  }

  if (ctx.data.train_count <= 0 || ctx.data.test_count() <= 0) {
    throw ConfigError("dataset split leaves an empty train or test set");
  }

  if (!spec.propensity_path.empty()) {
    ctx.propensities = load_propensities(spec.propensity_path);
    const int dim = static_cast<int>(ctx.data.X.cols());
    for (const PropensityStage* st :
         {&ctx.propensities.base, &ctx.propensities.mid,
          &ctx.propensities.full}) {
      for (int c : st->columns) {
        if (c < 0 || c >= dim) {
          throw ConfigError(
              "loaded propensity stages reference feature columns outside "
              "this dataset");
        }
      }
    }
  } else {
    ctx.propensities = fit_propensities(
        ctx.data.X_train(), ctx.data.attr_train(), ctx.recipe.c_cols,
        ctx.recipe.mpi_cols, ctx.recipe.mbar_cols, ctx.recipe.feature_names);
  }
  ctx.weights_train = compute_ipw_weights(ctx.propensities, ctx.data.X_train(),
                                          ctx.data.attr_train());
  ctx.weights_test = compute_ipw_weights(ctx.propensities, ctx.data.X_test(),
                                         ctx.data.attr_test());

  // Identification tables exist only for the (attribute, proxy, mediator)
  // family: three features, no baseline block, no on-path mediator, and the
  // off-path block ordered proxy-then-mediator.
  const Recipe& r = ctx.recipe;
  if (ctx.data.X.cols() == 3 && r.c_cols.empty() && r.mpi_cols.empty() &&
      r.mbar_cols.size() == 2) {
    ctx.tables = build_partial_id_tables(
        ctx.data.X_train(), ctx.data.attr_train(), r.attribute_col,
        r.mbar_cols[0], r.mbar_cols[1]);
  }
  if (spec.train.penalty == PenaltyKind::PiuUbLatent && !ctx.tables) {
    throw ConfigError(
        "the partial-identification penalty needs the (attribute, proxy, "
        "mediator) feature family: exactly three features with both "
        "non-attribute columns in the off-path block");
  }
  return ctx;
}

RunArtifacts run_training(const ExperimentContext& ctx,
                          const ExperimentSpec& spec) {
  TrainConfig cfg = spec.train;
  cfg.seed = spec.seed;
  cfg.remove_mask = resolve_mask(spec, ctx.recipe);

  const PartialIdTables* tables = ctx.tables ? &*ctx.tables : nullptr;
  RunArtifacts out;
  out.train = train_classifier(ctx.data.X_train(), ctx.data.y_train(),
                               ctx.data.attr_train(), cfg, &ctx.weights_train,
                               tables);
  out.zero_by_mask = !cfg.remove_mask.empty() &&
                     mask_hides_pathway_inputs(ctx.recipe, cfg.remove_mask);
  out.stats = evaluate_model(out.train.model, ctx.data.X_test(),
                             ctx.data.y_test(), ctx.weights_test,
                             out.zero_by_mask);
  finish_run(ctx, spec, out.train.model, out);
  return out;
}

RunArtifacts evaluate_in_context(const ExperimentContext& ctx,
                                 const ExperimentSpec& spec,
                                 const FittedModel& fm) {
  if (fm.model->input_dim() != ctx.data.X.cols()) {
    throw ConfigError("model expects " + std::to_string(fm.model->input_dim()) +
                      " features but the dataset has " +
                      std::to_string(ctx.data.X.cols()));
  }
  RunArtifacts out;
  out.train.model = fm.clone();
  const auto* masked = dynamic_cast<const MaskedClassifier*>(fm.model.get());
  out.zero_by_mask =
      masked && mask_hides_pathway_inputs(ctx.recipe, masked->masked_columns());
  out.stats = evaluate_model(fm, ctx.data.X_test(), ctx.data.y_test(),
                             ctx.weights_test, out.zero_by_mask);
  finish_run(ctx, spec, fm, out);
  return out;
}

SweepResult run_sweep(const ExperimentContext& ctx, const ExperimentSpec& spec,
                      const std::vector<double>& grid,
                      const std::function<void(const SweepPoint&)>& on_point) {
  if (grid.empty()) throw ConfigError("sweep needs a non-empty lambda grid");
  if (spec.train.penalty == PenaltyKind::None) {
    throw ConfigError("sweep needs a penalty regime (got 'none')");
  }
  SweepResult out;
  std::vector<LambdaPoint> pts;
  for (double lam : grid) {
    ExperimentSpec point_spec = spec;
    point_spec.train.lambda = lam;
    SweepPoint p;
    p.lambda = lam;
    p.run = run_training(ctx, point_spec);
    pts.push_back({lam, p.run.stats.accuracy, p.run.constraint});
    if (on_point) on_point(p);
    out.points.push_back(std::move(p));
  }
  out.selected = select_lambda(pts, spec.ceiling);
  return out;
}

std::vector<double> lambda_grid(double hi, double step) {
  if (!(step > 0) || !(hi >= 0)) {
    throw ConfigError("lambda grid needs hi >= 0 and step > 0");
  }
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double v = k * step;
    if (v > hi + 1e-9 * std::max(1.0, hi)) break;
    grid.push_back(v);
  }
  return grid;
}

}  // namespace pathfair
