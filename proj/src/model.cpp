#include "pathfair/model.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pathfair/errors.hpp"
#include "pathfair/rng.hpp"

namespace pathfair {

namespace {

using nlohmann::json;

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) {
  // Branch on sign for numerical stability at large |z|.
  return (z >= 0.0).select(1.0 / (1.0 + (-z).exp()),
                           z.exp() / (1.0 + z.exp()));
}

// Scores are clipped away from {0, 1} before the chain rule so that
// objective terms like log(c) and divisions by c(1-c) stay finite.
constexpr double kScoreClip = 1e-9;

inline Eigen::ArrayXd clip_scores(const Eigen::ArrayXd& c) {
  return c.max(kScoreClip).min(1.0 - kScoreClip);
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                           static_cast<long>(vals.size()));
}

}  // namespace

// ---------------------------------------------------------------------------
// LogisticClassifier

LogisticClassifier::LogisticClassifier(int input_dim)
    : w_(Eigen::VectorXd::Zero(input_dim)) {
  if (input_dim <= 0) throw ConfigError("classifier needs at least one input");
}

Eigen::VectorXd LogisticClassifier::forward(const Eigen::MatrixXd& X) const {
  Eigen::ArrayXd z = (X * w_).array() + b_;
  return sigmoid(z).matrix();
}

Eigen::VectorXd LogisticClassifier::backward(const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& g) const {
  // d c / d z = c (1 - c); grad = X^T (g .* c(1-c)) and its sum for b.
  Eigen::ArrayXd c = clip_scores(sigmoid((X * w_).array() + b_));
  Eigen::VectorXd gz = (g.array() * c * (1.0 - c)).matrix();
  Eigen::VectorXd grad(w_.size() + 1);
  grad.head(w_.size()) = X.transpose() * gz;
  grad(w_.size()) = gz.sum();
  return grad;
}

Eigen::VectorXd LogisticClassifier::parameters() const {
  Eigen::VectorXd theta(w_.size() + 1);
  theta.head(w_.size()) = w_;
  theta(w_.size()) = b_;
  return theta;
}

void LogisticClassifier::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != w_.size() + 1)
    throw ConfigError("parameter vector has wrong length");
  w_ = theta.head(w_.size());
  b_ = theta(w_.size());
}

std::unique_ptr<Classifier> LogisticClassifier::clone() const {
  auto copy = std::make_unique<LogisticClassifier>(input_dim());
  copy->w_ = w_;
  copy->b_ = b_;
  return copy;
}

// ---------------------------------------------------------------------------
// MlpClassifier

MlpClassifier::MlpClassifier(int input_dim, std::uint64_t init_seed,
                             int hidden1, int hidden2) {
  if (input_dim <= 0) throw ConfigError("classifier needs at least one input");
  Rng rng(init_seed);
  auto init = [&rng](Eigen::MatrixXd& W, Eigen::VectorXd& b, int rows,
                     int cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    W.resize(rows, cols);
    b.resize(rows);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) W(r, c) = rng.uniform(-bound, bound);
    }
    for (int r = 0; r < rows; ++r) b(r) = rng.uniform(-bound, bound);
  };
  init(W1_, b1_, hidden1, input_dim);
  init(W2_, b2_, hidden2, hidden1);
  init(W3_, b3_, 2, hidden2);
}

Eigen::VectorXd MlpClassifier::forward(const Eigen::MatrixXd& X) const {
  // Row-major batches: H1 = sigmoid(X W1^T + b1), etc.
  Eigen::MatrixXd h1 =
      ((X * W1_.transpose()).rowwise() + b1_.transpose()).unaryExpr([](double z) {
        return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                        : std::exp(z) / (1.0 + std::exp(z));
      });
  Eigen::MatrixXd h2 =
      ((h1 * W2_.transpose()).rowwise() + b2_.transpose()).unaryExpr([](double z) {
        return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                        : std::exp(z) / (1.0 + std::exp(z));
      });
  Eigen::MatrixXd logits = (h2 * W3_.transpose()).rowwise() + b3_.transpose();
  // Class-1 softmax probability = sigmoid(u1 - u0).
  Eigen::ArrayXd diff = logits.col(1).array() - logits.col(0).array();
  return sigmoid(diff).matrix();
}

Eigen::VectorXd MlpClassifier::backward(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& g) const {
  auto sig = [](double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                    : std::exp(z) / (1.0 + std::exp(z));
  };
  Eigen::MatrixXd h1 =
      ((X * W1_.transpose()).rowwise() + b1_.transpose()).unaryExpr(sig);
  Eigen::MatrixXd h2 =
      ((h1 * W2_.transpose()).rowwise() + b2_.transpose()).unaryExpr(sig);
  Eigen::MatrixXd logits = (h2 * W3_.transpose()).rowwise() + b3_.transpose();
  Eigen::ArrayXd c =
      clip_scores(sigmoid(logits.col(1).array() - logits.col(0).array()));

  // dc/du1 = c(1-c), dc/du0 = -c(1-c).
  Eigen::ArrayXd gd = g.array() * c * (1.0 - c);
  Eigen::MatrixXd dlogits(X.rows(), 2);
  dlogits.col(0) = (-gd).matrix();
  dlogits.col(1) = gd.matrix();

  Eigen::MatrixXd dW3 = dlogits.transpose() * h2;
  Eigen::VectorXd db3 = dlogits.colwise().sum().transpose();
  Eigen::MatrixXd dh2 = dlogits * W3_;
  dh2.array() *= h2.array() * (1.0 - h2.array());
  Eigen::MatrixXd dW2 = dh2.transpose() * h1;
  Eigen::VectorXd db2 = dh2.colwise().sum().transpose();
  Eigen::MatrixXd dh1 = dh2 * W2_;
  dh1.array() *= h1.array() * (1.0 - h1.array());
  Eigen::MatrixXd dW1 = dh1.transpose() * X;
  Eigen::VectorXd db1 = dh1.colwise().sum().transpose();

  Eigen::VectorXd grad(parameter_count());
  long off = 0;
  auto put_mat = [&grad, &off](const Eigen::MatrixXd& M) {
    Eigen::Map<Eigen::VectorXd>(grad.data() + off, M.size()) =
        Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
    off += M.size();
  };
  auto put_vec = [&grad, &off](const Eigen::VectorXd& v) {
    grad.segment(off, v.size()) = v;
    off += v.size();
  };
  put_mat(dW1);
  put_vec(db1);
  put_mat(dW2);
  put_vec(db2);
  put_mat(dW3);
  put_vec(db3);
  return grad;
}

Eigen::VectorXd MlpClassifier::parameters() const {
  Eigen::VectorXd theta(W1_.size() + b1_.size() + W2_.size() + b2_.size() +
                        W3_.size() + b3_.size());
  long off = 0;
  auto put_mat = [&theta, &off](const Eigen::MatrixXd& M) {
    Eigen::Map<Eigen::VectorXd>(theta.data() + off, M.size()) =
        Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
    off += M.size();
  };
  auto put_vec = [&theta, &off](const Eigen::VectorXd& v) {
    theta.segment(off, v.size()) = v;
    off += v.size();
  };
  put_mat(W1_);
  put_vec(b1_);
  put_mat(W2_);
  put_vec(b2_);
  put_mat(W3_);
  put_vec(b3_);
  return theta;
}

void MlpClassifier::set_parameters(const Eigen::VectorXd& theta) {
  const long expected = W1_.size() + b1_.size() + W2_.size() + b2_.size() +
                        W3_.size() + b3_.size();
  if (theta.size() != expected)
    throw ConfigError("parameter vector has wrong length");
  long off = 0;
  auto take_mat = [&theta, &off](Eigen::MatrixXd& M) {
    Eigen::Map<Eigen::VectorXd>(M.data(), M.size()) =
        theta.segment(off, M.size());
    off += M.size();
  };
  auto take_vec = [&theta, &off](Eigen::VectorXd& v) {
    v = theta.segment(off, v.size());
    off += v.size();
  };
  take_mat(W1_);
  take_vec(b1_);
  take_mat(W2_);
  take_vec(b2_);
  take_mat(W3_);
  take_vec(b3_);
}

std::unique_ptr<Classifier> MlpClassifier::clone() const {
  auto copy = std::make_unique<MlpClassifier>(input_dim(), 0, hidden1(),
                                              hidden2());
  copy->W1_ = W1_;
  copy->b1_ = b1_;
  copy->W2_ = W2_;
  copy->b2_ = b2_;
  copy->W3_ = W3_;
  copy->b3_ = b3_;
  return copy;
}

// ---------------------------------------------------------------------------
// MaskedClassifier

MaskedClassifier::MaskedClassifier(std::unique_ptr<Classifier> inner,
                                   std::vector<int> masked_columns)
    : inner_(std::move(inner)), masked_(std::move(masked_columns)) {
  for (int c : masked_) {
    if (c < 0 || c >= inner_->input_dim())
      throw ConfigError("masked column index out of range");
  }
}

Eigen::MatrixXd MaskedClassifier::apply_mask(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd Xm = X;
  for (int c : masked_) Xm.col(c).setZero();
  return Xm;
}

Eigen::VectorXd MaskedClassifier::forward(const Eigen::MatrixXd& X) const {
  return inner_->forward(apply_mask(X));
}

Eigen::VectorXd MaskedClassifier::backward(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& g) const {
  return inner_->backward(apply_mask(X), g);
}

std::unique_ptr<Classifier> MaskedClassifier::clone() const {
  return std::make_unique<MaskedClassifier>(inner_->clone(), masked_);
}

// ---------------------------------------------------------------------------
// Scaler

Scaler Scaler::fit(const Eigen::MatrixXd& X) {
  Scaler s;
  s.mean = X.colwise().mean();
  Eigen::VectorXd var =
      (X.rowwise() - s.mean.transpose()).array().square().colwise().mean();
  s.scale = var.array().sqrt();
  for (long j = 0; j < s.scale.size(); ++j)
    if (s.scale(j) < 1e-12) s.scale(j) = 1.0;
  return s;
}

Scaler Scaler::identity(int dim) {
  Scaler s;
  s.mean = Eigen::VectorXd::Zero(dim);
  s.scale = Eigen::VectorXd::Ones(dim);
  return s;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size())
    throw ConfigError("scaler dimension does not match data");
  return (X.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json classifier_to_json(const Classifier& m) {
  json j;
  if (const auto* masked = dynamic_cast<const MaskedClassifier*>(&m)) {
    j["kind"] = "masked";
    j["masked_columns"] = masked->masked_columns();
    j["inner"] = classifier_to_json(masked->inner());
    return j;
  }
  if (const auto* mlp = dynamic_cast<const MlpClassifier*>(&m)) {
    j["kind"] = "mlp";
    j["input_dim"] = mlp->input_dim();
    j["hidden1"] = mlp->hidden1();
    j["hidden2"] = mlp->hidden2();
  } else {
    j["kind"] = "logreg";
    j["input_dim"] = m.input_dim();
  }
  j["parameters"] = vector_to_json(m.parameters());
  return j;
}

std::unique_ptr<Classifier> classifier_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "masked") {
    auto inner = classifier_from_json(j.at("inner"));
    return std::make_unique<MaskedClassifier>(
        std::move(inner), j.at("masked_columns").get<std::vector<int>>());
  }
  std::unique_ptr<Classifier> m;
  if (kind == "mlp") {
    m = std::make_unique<MlpClassifier>(j.at("input_dim").get<int>(), 0,
                                        j.at("hidden1").get<int>(),
                                        j.at("hidden2").get<int>());
  } else if (kind == "logreg") {
    m = std::make_unique<LogisticClassifier>(j.at("input_dim").get<int>());
  } else {
    throw ConfigError("unknown classifier kind: " + kind);
  }
  m->set_parameters(vector_from_json(j.at("parameters")));
  return m;
}

}  // namespace

std::string serialize_model(const FittedModel& fm) {
  json j;
  j["scaler"]["mean"] = vector_to_json(fm.scaler.mean);
  j["scaler"]["scale"] = vector_to_json(fm.scaler.scale);
  j["model"] = classifier_to_json(*fm.model);
  return j.dump(2);
}

FittedModel deserialize_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid model file: ") + e.what());
  }
  FittedModel fm;
  fm.scaler.mean = vector_from_json(j.at("scaler").at("mean"));
  fm.scaler.scale = vector_from_json(j.at("scaler").at("scale"));
  fm.model = classifier_from_json(j.at("model"));
  return fm;
}

void save_model(const FittedModel& fm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write model file: " + path);
  out << serialize_model(fm) << "\n";
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return deserialize_model(text);
}

}  // namespace pathfair
