#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace pathfair {

// Binary probabilistic classifiers over real feature vectors. `forward`
// returns scores c(x) in (0, 1); `backward` returns the gradient, with
// respect to the flattened parameter vector, of sum_i g_i * c(x_i), which
// lets any training objective supply its own per-row score sensitivities.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual int input_dim() const = 0;
  virtual std::string kind() const = 0;

  // X: rows are samples. Returns one score per row.
  virtual Eigen::VectorXd forward(const Eigen::MatrixXd& X) const = 0;

  virtual Eigen::VectorXd backward(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& g) const = 0;

  virtual Eigen::VectorXd parameters() const = 0;
  virtual void set_parameters(const Eigen::VectorXd& theta) = 0;
  int parameter_count() const { return static_cast<int>(parameters().size()); }

  virtual std::unique_ptr<Classifier> clone() const = 0;
};

// Logistic regression: c(x) = sigmoid(w . x + b). Parameters start at zero.
class LogisticClassifier : public Classifier {
 public:
  explicit LogisticClassifier(int input_dim);

  int input_dim() const override { return static_cast<int>(w_.size()); }
  std::string kind() const override { return "logreg"; }
  Eigen::VectorXd forward(const Eigen::MatrixXd& X) const override;
  Eigen::VectorXd backward(const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& g) const override;
  Eigen::VectorXd parameters() const override;
  void set_parameters(const Eigen::VectorXd& theta) override;
  std::unique_ptr<Classifier> clone() const override;

 private:
  Eigen::VectorXd w_;
  double b_ = 0.0;
};

// Two-hidden-layer perceptron: input -> 100 (sigmoid) -> 50 (sigmoid) ->
// 2 linear logits -> log-softmax; the score is the class-1 softmax
// probability, i.e. sigmoid(u1 - u0). Weights and biases are initialised
// uniformly in (-1/sqrt(fan_in), +1/sqrt(fan_in)) from the given seed.
class MlpClassifier : public Classifier {
 public:
  MlpClassifier(int input_dim, std::uint64_t init_seed,
                int hidden1 = 100, int hidden2 = 50);

  int input_dim() const override { return static_cast<int>(W1_.cols()); }
  std::string kind() const override { return "mlp"; }
  Eigen::VectorXd forward(const Eigen::MatrixXd& X) const override;
  Eigen::VectorXd backward(const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& g) const override;
  Eigen::VectorXd parameters() const override;
  void set_parameters(const Eigen::VectorXd& theta) override;
  std::unique_ptr<Classifier> clone() const override;

  int hidden1() const { return static_cast<int>(W1_.rows()); }
  int hidden2() const { return static_cast<int>(W2_.rows()); }

 private:
  // Layer weights act on column vectors: h1 = sigmoid(W1 x + b1), etc.
  Eigen::MatrixXd W1_, W2_, W3_;
  Eigen::VectorXd b1_, b2_, b3_;
};

// Wraps another classifier and projects a fixed set of feature columns to
// zero before the inner forward pass; used to train and evaluate models
// that are denied access to particular features. Parameters are the inner
// model's, so the wrapped model trains normally.
class MaskedClassifier : public Classifier {
 public:
  MaskedClassifier(std::unique_ptr<Classifier> inner,
                   std::vector<int> masked_columns);

  int input_dim() const override { return inner_->input_dim(); }
  std::string kind() const override { return "masked+" + inner_->kind(); }
  Eigen::VectorXd forward(const Eigen::MatrixXd& X) const override;
  Eigen::VectorXd backward(const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& g) const override;
  Eigen::VectorXd parameters() const override { return inner_->parameters(); }
  void set_parameters(const Eigen::VectorXd& theta) override {
    inner_->set_parameters(theta);
  }
  std::unique_ptr<Classifier> clone() const override;

  const std::vector<int>& masked_columns() const { return masked_; }
  const Classifier& inner() const { return *inner_; }

 private:
  Eigen::MatrixXd apply_mask(const Eigen::MatrixXd& X) const;
  std::unique_ptr<Classifier> inner_;
  std::vector<int> masked_;
};

// Column-wise standardisation fitted on training data and replayed
// everywhere the model is evaluated. Columns with zero variance keep
// scale 1 so they pass through unchanged (after centring).
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Scaler fit(const Eigen::MatrixXd& X);
  static Scaler identity(int dim);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

// A trained model bundled with the scaler it was trained under; this is
// the unit that checkpoints serialise and oracles evaluate.
struct FittedModel {
  Scaler scaler;
  std::unique_ptr<Classifier> model;

  Eigen::VectorXd score(const Eigen::MatrixXd& X_raw) const {
    return model->forward(scaler.apply(X_raw));
  }
  FittedModel clone() const { return {scaler, model->clone()}; }
};

// JSON round-trip for checkpoints (scaler + architecture + parameters).
std::string serialize_model(const FittedModel& fm);
FittedModel deserialize_model(const std::string& json_text);
void save_model(const FittedModel& fm, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace pathfair
