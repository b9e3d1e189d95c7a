#include "pathfair/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "pathfair/errors.hpp"
#include "pathfair/rng.hpp"

namespace pathfair {

PenaltyKind penalty_kind_from_string(const std::string& s) {
  if (s == "none") return PenaltyKind::None;
  if (s == "piu-ub") return PenaltyKind::PiuUb;
  if (s == "fio") return PenaltyKind::Fio;
  if (s == "piu-ub-latent") return PenaltyKind::PiuUbLatent;
  throw ConfigError("unknown penalty kind: " + s);
}

std::string to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::PiuUb: return "piu-ub";
    case PenaltyKind::Fio: return "fio";
    case PenaltyKind::PiuUbLatent: return "piu-ub-latent";
  }
  return "none";
}

PenaltyValue penalty_piu_ub(double p0, double p1) {
  PenaltyValue v;
  v.value = p1 * (1.0 - p0) + (1.0 - p1) * p0;
  v.dp0 = 1.0 - 2.0 * p1;
  v.dp1 = 1.0 - 2.0 * p0;
  return v;
}

PenaltyValue penalty_fio(double p0, double p1) {
  PenaltyValue v;
  v.value = std::abs(p1 - p0);
  if (p1 > p0) {
    v.dp0 = -1.0;
    v.dp1 = 1.0;
  } else if (p1 < p0) {
    v.dp0 = 1.0;
    v.dp1 = -1.0;
  }
  return v;
}

double penalty_latent_value(const PartialIdBounds& b) {
  return b.u1 * (1.0 - b.l0) + (1.0 - b.l1) * b.u0;
}

double cross_entropy(const Eigen::VectorXd& scores, const Eigen::VectorXd& y) {
  const double eps = 1e-9;
  double total = 0.0;
  for (long i = 0; i < scores.size(); ++i) {
    const double c = std::clamp(scores(i), eps, 1.0 - eps);
    total += y(i) == 1.0 ? -std::log(c) : -std::log(1.0 - c);
  }
  return total / static_cast<double>(scores.size());
}

double full_data_penalty(const FittedModel& fm, const Eigen::MatrixXd& X_raw,
                         PenaltyKind kind, const IpwWeights* weights,
                         const PartialIdTables* tables) {
  switch (kind) {
    case PenaltyKind::None:
      return 0.0;
    case PenaltyKind::PiuUb:
    case PenaltyKind::Fio: {
      if (!weights) throw ConfigError("penalty needs inverse-probability weights");
      const Eigen::VectorXd c = fm.score(X_raw);
      const double n = static_cast<double>(X_raw.rows());
      const double p0 = weights->w0.dot(c) / n;
      const double p1 = weights->w1.dot(c) / n;
      return kind == PenaltyKind::PiuUb ? penalty_piu_ub(p0, p1).value
                                        : penalty_fio(p0, p1).value;
    }
    case PenaltyKind::PiuUbLatent: {
      if (!tables) throw ConfigError("penalty needs partial-identification tables");
      return penalty_latent_value(partial_id_bounds(fm, *tables));
    }
  }
  return 0.0;
}

namespace {

std::unique_ptr<Classifier> make_classifier(const TrainConfig& cfg, int dim) {
  std::unique_ptr<Classifier> m;
  if (cfg.classifier == "logreg") {
    m = std::make_unique<LogisticClassifier>(dim);
  } else if (cfg.classifier == "mlp") {
    m = std::make_unique<MlpClassifier>(dim, derive_seed(cfg.seed, "init"));
  } else {
    throw ConfigError("unknown classifier kind: " + cfg.classifier);
  }
  if (!cfg.remove_mask.empty())
    m = std::make_unique<MaskedClassifier>(std::move(m), cfg.remove_mask);
  return m;
}

}  // namespace

TrainResult train_classifier(const Eigen::MatrixXd& X_raw,
                             const Eigen::VectorXd& y,
                             const Eigen::VectorXd& attribute,
                             const TrainConfig& cfg,
                             const IpwWeights* weights,
                             const PartialIdTables* tables) {
  const long n = X_raw.rows();
  if (y.size() != n || attribute.size() != n)
    throw ConfigError("labels/attribute length does not match data");
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw ConfigError("epochs and batch size must be positive");
  if (!cfg.remove_mask.empty() && cfg.penalty != PenaltyKind::None)
    throw ConfigError(
        "feature removal and penalised training cannot be combined");
  const bool marginal_penalty =
      cfg.penalty == PenaltyKind::PiuUb || cfg.penalty == PenaltyKind::Fio;
  if (marginal_penalty && !weights)
    throw ConfigError("penalty needs inverse-probability weights");
  if (cfg.penalty == PenaltyKind::PiuUbLatent && !tables)
    throw ConfigError("penalty needs partial-identification tables");

  TrainResult result;
  result.model.scaler = Scaler::fit(X_raw);
  result.model.model = make_classifier(cfg, static_cast<int>(X_raw.cols()));

  const Eigen::MatrixXd X = result.model.scaler.apply(X_raw);
  Classifier& model = *result.model.model;

  // Fixed evaluation grids for the partial-identification penalty; their
  // contribution to the gradient does not depend on the batch.
  Eigen::MatrixXd G0, G1;
  if (cfg.penalty == PenaltyKind::PiuUbLatent) {
    G0 = result.model.scaler.apply(tables->grid(0.0));
    G1 = result.model.scaler.apply(tables->grid(1.0));
  }

  Eigen::VectorXd theta = model.parameters();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd last_good = theta;

  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);

  const auto t_start = std::chrono::steady_clock::now();
  bool warned_skip = false;

  for (int epoch = 0; epoch < cfg.epochs && !result.aborted; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double epoch_loss = 0.0;
    long batches = 0;

    for (long start = 0; start < n; start += cfg.batch_size) {
      const long b = std::min<long>(cfg.batch_size, n - start);
      Eigen::MatrixXd Xb(b, X.cols());
      Eigen::VectorXd yb(b), w0b(b), w1b(b);
      bool has0 = false, has1 = false;
      for (long i = 0; i < b; ++i) {
        const long r = order[start + i];
        Xb.row(i) = X.row(r);
        yb(i) = y(r);
        if (attribute(r) == 0.0)
          has0 = true;
        else
          has1 = true;
        if (weights) {
          w0b(i) = weights->w0(r);
          w1b(i) = weights->w1(r);
        }
      }
      if (marginal_penalty && (!has0 || !has1)) {
        if (!warned_skip) {
          result.warnings.push_back(
              "skipped batch missing one attribute stratum");
          warned_skip = true;
        }
        continue;
      }

      const Eigen::VectorXd c = model.forward(Xb);
      const double ce = cross_entropy(c, yb);
      epoch_loss += ce;
      ++batches;

      // d(mean CE)/dc, with the same clipping the backward pass applies.
      Eigen::VectorXd g(b);
      const double eps = 1e-9;
      for (long i = 0; i < b; ++i) {
        const double ci = std::clamp(c(i), eps, 1.0 - eps);
        g(i) = (ci - yb(i)) / (ci * (1.0 - ci)) / static_cast<double>(b);
      }

      double pen_value = 0.0;
      if (marginal_penalty) {
        const double p0 = w0b.dot(c) / static_cast<double>(b);
        const double p1 = w1b.dot(c) / static_cast<double>(b);
        const PenaltyValue pv = cfg.penalty == PenaltyKind::PiuUb
                                    ? penalty_piu_ub(p0, p1)
                                    : penalty_fio(p0, p1);
        pen_value = pv.value;
        g += (cfg.lambda / static_cast<double>(b)) *
             (pv.dp0 * w0b + pv.dp1 * w1b);
      }

      Eigen::VectorXd grad = model.backward(Xb, g);

      if (cfg.penalty == PenaltyKind::PiuUbLatent) {
        const Eigen::VectorXd c0 = model.forward(G0);
        const Eigen::VectorXd c1 = model.forward(G1);
        const PartialIdDerivs d = partial_id_from_scores(c0, c1, *tables);
        pen_value = penalty_latent_value(d.bounds);
        // pen = u1 (1 - l0) + (1 - l1) u0
        const Eigen::VectorXd g0 = cfg.lambda * ((1.0 - d.bounds.l1) * d.du0 -
                                                 d.bounds.u1 * d.dl0);
        const Eigen::VectorXd g1 = cfg.lambda * ((1.0 - d.bounds.l0) * d.du1 -
                                                 d.bounds.u0 * d.dl1);
        grad += model.backward(G0, g0);
        grad += model.backward(G1, g1);
      }

      const double objective = ce + cfg.lambda * pen_value;
      if (!std::isfinite(objective) || !grad.allFinite()) {
        result.warnings.push_back(
            "non-finite objective at epoch " + std::to_string(epoch) +
            "; restoring last good parameters");
        result.aborted = true;
        theta = last_good;
        model.set_parameters(theta);
        break;
      }

      velocity = cfg.momentum * velocity + grad;
      theta -= cfg.learning_rate * velocity;
      model.set_parameters(theta);
    }

    if (!result.aborted && theta.allFinite()) last_good = theta;

    const bool record = (epoch % cfg.trace_every == 0) ||
                        epoch + 1 == cfg.epochs || result.aborted;
    if (record) {
      TraceRow row;
      row.epoch = epoch;
      row.loss = batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0;
      const Eigen::VectorXd c_full = model.forward(X);
      if (weights) {
        row.p0 = weights->w0.dot(c_full) / static_cast<double>(n);
        row.p1 = weights->w1.dot(c_full) / static_cast<double>(n);
      }
      switch (cfg.penalty) {
        case PenaltyKind::None:
          row.penalty = 0.0;
          break;
        case PenaltyKind::PiuUb:
          row.penalty = cfg.lambda * penalty_piu_ub(row.p0, row.p1).value;
          break;
        case PenaltyKind::Fio:
          row.penalty = cfg.lambda * penalty_fio(row.p0, row.p1).value;
          break;
        case PenaltyKind::PiuUbLatent: {
          const Eigen::VectorXd c0 = model.forward(G0);
          const Eigen::VectorXd c1 = model.forward(G1);
          row.penalty = cfg.lambda * penalty_latent_value(
                            partial_id_from_scores(c0, c1, *tables).bounds);
          break;
        }
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
      result.trace.push_back(row);
    }
  }

  model.set_parameters(result.aborted ? last_good : theta);
  return result;
}

std::size_t select_lambda(const std::vector<LambdaPoint>& points,
                          double ceiling) {
  if (points.empty()) throw ConfigError("no candidate strengths to select from");
  std::size_t best = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].constraint > ceiling) continue;
    if (best == points.size() ||
        points[i].test_accuracy > points[best].test_accuracy ||
        (points[i].test_accuracy == points[best].test_accuracy &&
         points[i].lambda < points[best].lambda))
      best = i;
  }
  if (best != points.size()) return best;
  // Nothing meets the ceiling: take the smallest constraint value.
  best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].constraint < points[best].constraint ||
        (points[i].constraint == points[best].constraint &&
         (points[i].test_accuracy > points[best].test_accuracy ||
          (points[i].test_accuracy == points[best].test_accuracy &&
           points[i].lambda < points[best].lambda))))
      best = i;
  }
  return best;
}

}  // namespace pathfair
