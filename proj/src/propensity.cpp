#include "pathfair/propensity.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pathfair/errors.hpp"

namespace pathfair {

namespace {

using nlohmann::json;

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
  Z.leftCols(X.cols()) = X;
  Z.col(X.cols()).setOnes();
  return Z;
}

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X,
                               const std::vector<int>& cols) {
  Eigen::MatrixXd S(X.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= X.cols())
      throw ConfigError("propensity conditioning column out of range");
    S.col(j) = X.col(cols[j]);
  }
  return S;
}

}  // namespace

LogisticPropensity LogisticPropensity::fit(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& target,
                                           double ridge, int max_iter,
                                           double tol) {
  if (X.rows() != target.size())
    throw ConfigError("propensity target length does not match data");
  for (long i = 0; i < target.size(); ++i) {
    if (target(i) != 0.0 && target(i) != 1.0)
      throw ConfigError("propensity target must be binary 0/1");
  }
  const Eigen::MatrixXd Z = with_intercept(X);
  const long d = Z.cols();
  // Ridge on weights only; a tiny floor on the intercept diagonal keeps the
  // Newton system well-posed under perfect separation.
  Eigen::VectorXd reg = Eigen::VectorXd::Constant(d, ridge);
  reg(d - 1) = 1e-12;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::ArrayXd p = (Z * beta).array().unaryExpr([](double z) {
      return sigmoid(z);
    });
    Eigen::VectorXd grad =
        Z.transpose() * (target.array() - p).matrix() - reg.asDiagonal() * beta;
    Eigen::ArrayXd w = (p * (1.0 - p)).max(1e-12);
    Eigen::MatrixXd H = Z.transpose() * w.matrix().asDiagonal() * Z;
    H += Eigen::MatrixXd(reg.asDiagonal());
    Eigen::VectorXd step = H.ldlt().solve(grad);
    beta += step;
    if (step.lpNorm<Eigen::Infinity>() < tol) break;
  }
  if (!beta.allFinite())
    throw RuntimeFailure("propensity fit produced non-finite coefficients");
  LogisticPropensity out;
  out.beta_ = beta;
  return out;
}

Eigen::VectorXd LogisticPropensity::probability(const Eigen::MatrixXd& X,
                                                double clip) const {
  if (X.cols() + 1 != beta_.size())
    throw ConfigError("propensity input has wrong width");
  Eigen::ArrayXd p = (with_intercept(X) * beta_).array().unaryExpr(
      [](double z) { return sigmoid(z); });
  return p.max(clip).min(1.0 - clip).matrix();
}

Eigen::VectorXd PropensityStage::probability(const Eigen::MatrixXd& X_raw,
                                             double clip) const {
  return model.probability(select_columns(X_raw, columns), clip);
}

PropensitySet fit_propensities(const Eigen::MatrixXd& X_raw,
                               const Eigen::VectorXd& attribute,
                               const std::vector<int>& c_cols,
                               const std::vector<int>& mpi_cols,
                               const std::vector<int>& mbar_cols,
                               const std::vector<std::string>& feature_names,
                               double ridge) {
  auto names_for = [&feature_names](const std::vector<int>& cols) {
    std::vector<std::string> names;
    names.reserve(cols.size());
    for (int c : cols) {
      if (c < 0 || c >= static_cast<int>(feature_names.size()))
        throw ConfigError("conditioning column out of range");
      names.push_back(feature_names[c]);
    }
    return names;
  };
  auto make_stage = [&](std::vector<int> cols) {
    PropensityStage st;
    st.columns = std::move(cols);
    st.column_names = names_for(st.columns);
    st.model = LogisticPropensity::fit(select_columns(X_raw, st.columns),
                                       attribute, ridge);
    return st;
  };

  std::vector<int> mid_cols = c_cols;
  mid_cols.insert(mid_cols.end(), mpi_cols.begin(), mpi_cols.end());
  std::vector<int> full_cols = mid_cols;
  full_cols.insert(full_cols.end(), mbar_cols.begin(), mbar_cols.end());

  PropensitySet ps;
  ps.base = make_stage(c_cols);
  ps.mid = make_stage(std::move(mid_cols));
  ps.full = make_stage(std::move(full_cols));
  return ps;
}

namespace {

json stage_to_json(const PropensityStage& st) {
  const Eigen::VectorXd& b = st.model.coefficients();
  json j;
  j["columns"] = st.columns;
  j["column_names"] = st.column_names;
  j["coefficients"] = std::vector<double>(b.data(), b.data() + b.size());
  return j;
}

PropensityStage stage_from_json(const json& j) {
  PropensityStage st;
  st.columns = j.at("columns").get<std::vector<int>>();
  st.column_names = j.at("column_names").get<std::vector<std::string>>();
  const auto coef = j.at("coefficients").get<std::vector<double>>();
  if (coef.size() != st.columns.size() + 1)
    throw ConfigError("propensity file: coefficient count mismatch");
  st.model.set_coefficients(Eigen::Map<const Eigen::VectorXd>(
      coef.data(), static_cast<long>(coef.size())));
  return st;
}

}  // namespace

std::string serialize_propensities(const PropensitySet& ps) {
  json j;
  j["base"] = stage_to_json(ps.base);
  j["mid"] = stage_to_json(ps.mid);
  j["full"] = stage_to_json(ps.full);
  return j.dump(2);
}

PropensitySet deserialize_propensities(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid propensity file: ") + e.what());
  }
  PropensitySet ps;
  ps.base = stage_from_json(j.at("base"));
  ps.mid = stage_from_json(j.at("mid"));
  ps.full = stage_from_json(j.at("full"));
  return ps;
}

void save_propensities(const PropensitySet& ps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write propensity file: " + path);
  out << serialize_propensities(ps) << "\n";
}

PropensitySet load_propensities(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read propensity file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return deserialize_propensities(text);
}

}  // namespace pathfair
