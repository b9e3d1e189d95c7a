#include "pathfair/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "pathfair/errors.hpp"
#include "pathfair/rng.hpp"

namespace pathfair {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t\r");
    const auto e = c.find_last_not_of(" \t\r");
    c = b == std::string::npos ? "" : c.substr(b, e - b + 1);
  }
  return cells;
}

std::vector<std::vector<std::string>> read_csv_cells(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read CSV file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw ConfigError("CSV file has no header row: " + path);
  return rows;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse numeric value '" + s + "' in " + where);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Numeric CSV round trip

void write_dataset_csv(const Dataset& ds, const std::string& path,
                       const std::string& label_name) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write CSV file: " + path);
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j)
    out << ds.feature_names[j] << ",";
  out << label_name << "\n";
  for (long i = 0; i < ds.rows(); ++i) {
    for (long j = 0; j < ds.X.cols(); ++j) out << format_double(ds.X(i, j)) << ",";
    out << format_double(ds.y(i)) << "\n";
  }
}

Dataset read_numeric_csv(const std::string& path, const std::string& label,
                         const std::string& attribute, long train_count) {
  const auto rows = read_csv_cells(path);
  const auto& header = rows[0];
  int label_col = -1, attr_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label) label_col = static_cast<int>(j);
    if (header[j] == attribute) attr_col = static_cast<int>(j);
  }
  if (label_col < 0) throw ConfigError("missing label column '" + label + "'");
  if (attr_col < 0)
    throw ConfigError("missing attribute column '" + attribute + "'");

  Dataset ds;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) == label_col) continue;
    if (static_cast<int>(j) == attr_col)
      ds.attribute_col = static_cast<int>(ds.feature_names.size());
    ds.feature_names.push_back(header[j]);
  }
  const long n = static_cast<long>(rows.size()) - 1;
  ds.X.resize(n, static_cast<long>(ds.feature_names.size()));
  ds.y.resize(n);
  for (long i = 0; i < n; ++i) {
    const auto& r = rows[i + 1];
    if (r.size() != header.size())
      throw ConfigError("CSV row " + std::to_string(i + 2) +
                        " has wrong cell count");
    long col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      const double v = parse_number(r[j], "row " + std::to_string(i + 2));
      if (static_cast<int>(j) == label_col)
        ds.y(i) = v;
      else
        ds.X(i, col++) = v;
    }
  }
  if (train_count <= 0 || train_count >= n)
    throw ConfigError("train split must leave both train and test rows");
  ds.train_count = train_count;
  return ds;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

std::pair<Sem, PathwaySet> build_synth_family(const std::string& variant) {
  CausalGraph g({"A", "Q", "D", "M", "Y"},
                {{"A", "D"}, {"A", "M"}, {"A", "Y"}, {"Q", "D"}, {"Q", "M"},
                 {"Q", "Y"}, {"D", "Y"}, {"M", "Y"}},
                "A", "Y");
  const int A = g.index_of("A"), Q = g.index_of("Q"), D = g.index_of("D"),
            M = g.index_of("M"), Y = g.index_of("Y");
  using namespace expr;
  std::vector<ExprPtr> eq(5);
  std::vector<NoiseSpec> noise(5);
  eq[A] = expr::noise();

  if (variant == "synth") {
    noise[A] = NoiseSpec::bernoulli(0.6);
    noise[Q] = NoiseSpec::gaussian(2.5, 0.3);
    noise[D] = NoiseSpec::truncated_gaussian(1.5, 1.0, 0.1, 3.0);
    noise[M] = NoiseSpec::truncated_gaussian(2.0, 5.0, -50.0, 50.0);
    eq[Q] = floor(expr::noise());
    eq[D] = sum({var(A), floor(prod({constant(0.5), var(Q), expr::noise()}))});
    eq[M] = sum({prod({constant(3.0), var(A)}),
                 prod({constant(0.4), var(Q), expr::noise()})});
    eq[Y] = bernoulli_draw(
        sigmoid(linear(-10.0, {A, Q, D, M}, {5.0, 1.0, 1.0, 1.0})));
  } else if (variant == "synth-additive") {
    noise[A] = NoiseSpec::bernoulli(0.6);
    noise[Q] = NoiseSpec::gaussian(2.5, 5.0);
    noise[D] = NoiseSpec::gaussian(1.0, 0.5);
    noise[M] = NoiseSpec::gaussian(1.0, 0.5);
    eq[Q] = floor(expr::noise());
    eq[D] = sum({var(A), floor(prod({constant(0.1), var(Q)})),
                 floor(expr::noise())});
    eq[M] = sum({prod({constant(3.0), var(A)}),
                 floor(prod({constant(0.4), var(Q)})), floor(expr::noise())});
    eq[Y] = bernoulli_draw(
        sigmoid(linear(-10.0, {A, Q, D, M}, {5.0, 1.0, 1.0, 1.0})));
  } else {  // fig1b-illustrative
    noise[A] = NoiseSpec::bernoulli(0.5);
    noise[Q] = NoiseSpec::gaussian(2.0, 1.0);
    noise[D] = NoiseSpec::truncated_gaussian(1.0, 1.0, 0.1, 2.0);
    noise[M] = NoiseSpec::gaussian(0.0, 1.0);
    eq[Q] = expr::noise();
    eq[D] = sum({var(A), prod({expr::noise(), var(Q)})});
    eq[M] = sum({prod({constant(3.0), var(A)}),
                 prod({constant(0.5), var(Q)}), expr::noise()});
    eq[Y] = bernoulli_draw(
        sigmoid(linear(-6.0, {A, Q, D, M}, {2.0, 1.0, 1.0, 1.0})));
  }
  noise[Y] = NoiseSpec::uniform01();

  PathwaySet pi = PathwaySet::from_names(g, {{"A", "Y"}, {"A", "D", "Y"}});
  return {Sem(std::move(g), std::move(eq), std::move(noise)), std::move(pi)};
}

std::pair<Sem, PathwaySet> build_synth_latent() {
  CausalGraph g({"A", "H", "R", "M", "Y"},
                {{"A", "R"}, {"A", "M"}, {"A", "Y"}, {"H", "R"}, {"H", "Y"},
                 {"R", "M"}, {"R", "Y"}, {"M", "Y"}},
                "A", "Y", {"H"});
  const int A = g.index_of("A"), H = g.index_of("H"), R = g.index_of("R"),
            M = g.index_of("M"), Y = g.index_of("Y");
  using namespace expr;
  std::vector<ExprPtr> eq(5);
  std::vector<NoiseSpec> noise(5);
  noise[A] = NoiseSpec::bernoulli(0.6);
  noise[H] = NoiseSpec::gaussian(0.0, 1.0);
  noise[R] = NoiseSpec::gaussian(0.5, 1.0);
  noise[M] = NoiseSpec::uniform01();
  noise[Y] = NoiseSpec::uniform01();
  eq[A] = expr::noise();
  eq[H] = expr::noise();
  eq[R] = sum({prod({constant(3.0), var(A)}),
               floor(prod({constant(3.0), var(H)})), floor(expr::noise())});
  eq[M] = bernoulli_draw(sigmoid(
      sum({var(A), prod({constant(0.4), var(R)}), constant(-1.2)})));
  eq[Y] = bernoulli_draw(
      sigmoid(linear(-10.8, {A, R, M, H}, {7.5, 3.0, 3.0, 4.5})));

  PathwaySet pi = PathwaySet::from_names(g, {{"A", "Y"}});
  return {Sem(std::move(g), std::move(eq), std::move(noise)), std::move(pi)};
}

}  // namespace

std::pair<Sem, PathwaySet> preset_model(const std::string& name) {
  if (name == "synth" || name == "synth-additive" ||
      name == "fig1b-illustrative")
    return build_synth_family(name);
  if (name == "synth-latent") return build_synth_latent();
  throw ConfigError("unknown preset: " + name);
}

PresetBundle make_preset(const std::string& name, long n, std::uint64_t seed) {
  if (n < 12) throw ConfigError("preset needs at least 12 rows");
  auto [sem, pi] = preset_model(name);
  PresetBundle b{name, std::move(sem), std::move(pi), Recipe{}, Dataset{}};
  b.recipe = derive_recipe(b.sem.graph(), b.pathways);

  const Eigen::MatrixXd U =
      b.sem.sample_noise(static_cast<int>(n), derive_seed(seed, "data"));
  const Eigen::MatrixXd V = b.sem.evaluate(U);
  const auto cols = feature_nodes(b.sem.graph());
  b.data.feature_names = b.recipe.feature_names;
  b.data.attribute_col = b.recipe.attribute_col;
  b.data.X.resize(n, static_cast<long>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    b.data.X.col(j) = V.col(cols[j]);
  b.data.y = V.col(b.sem.graph().outcome());
  b.data.train_count = n - n / 6;
  return b;
}

std::vector<int> default_remove_mask(const Recipe& r) {
  std::vector<int> mask{r.attribute_col};
  mask.insert(mask.end(), r.mpi_cols.begin(), r.mpi_cols.end());
  std::sort(mask.begin(), mask.end());
  return mask;
}

bool mask_hides_pathway_inputs(const Recipe& r, const std::vector<int>& mask) {
  const std::set<int> m(mask.begin(), mask.end());
  if (!m.count(r.attribute_col)) return false;
  for (int c : r.mpi_cols)
    if (!m.count(c)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// SEM (de)serialisation

namespace {

json expr_to_json(const ExprPtr& e, const CausalGraph& g) {
  json j;
  switch (e->op) {
    case Expr::Op::Const:
      j["op"] = "const";
      j["value"] = e->value;
      break;
    case Expr::Op::Var:
      j["op"] = "var";
      j["node"] = g.name(e->var);
      break;
    case Expr::Op::Noise:
      j["op"] = "noise";
      break;
    case Expr::Op::Sum:
    case Expr::Op::Prod: {
      j["op"] = e->op == Expr::Op::Sum ? "sum" : "prod";
      json args = json::array();
      for (const auto& c : e->children) args.push_back(expr_to_json(c, g));
      j["args"] = args;
      break;
    }
    case Expr::Op::Floor:
    case Expr::Op::Sigmoid:
    case Expr::Op::BernoulliDraw:
      j["op"] = e->op == Expr::Op::Floor     ? "floor"
                : e->op == Expr::Op::Sigmoid ? "sigmoid"
                                             : "bernoulli-draw";
      j["arg"] = expr_to_json(e->children[0], g);
      break;
  }
  return j;
}

ExprPtr expr_from_json(const json& j, const CausalGraph& g) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "const") return expr::constant(j.at("value").get<double>());
  if (op == "var")
    return expr::var(g.index_of(j.at("node").get<std::string>()));
  if (op == "noise") return expr::noise();
  if (op == "sum" || op == "prod") {
    std::vector<ExprPtr> args;
    for (const auto& a : j.at("args")) args.push_back(expr_from_json(a, g));
    return op == "sum" ? expr::sum(std::move(args))
                       : expr::prod(std::move(args));
  }
  if (op == "floor") return expr::floor(expr_from_json(j.at("arg"), g));
  if (op == "sigmoid") return expr::sigmoid(expr_from_json(j.at("arg"), g));
  if (op == "bernoulli-draw")
    return expr::bernoulli_draw(expr_from_json(j.at("arg"), g));
  throw ConfigError("unknown expression op: " + op);
}

json noise_to_json(const NoiseSpec& s) {
  json j;
  switch (s.kind) {
    case NoiseSpec::Kind::Bernoulli:
      j["kind"] = "bernoulli";
      j["p"] = s.a;
      break;
    case NoiseSpec::Kind::Gaussian:
      j["kind"] = "gaussian";
      j["mean"] = s.a;
      j["std"] = s.b;
      break;
    case NoiseSpec::Kind::TruncatedGaussian:
      j["kind"] = "truncated-gaussian";
      j["mean"] = s.a;
      j["std"] = s.b;
      j["lo"] = s.lo;
      j["hi"] = s.hi;
      break;
    case NoiseSpec::Kind::Uniform:
      j["kind"] = "uniform";
      break;
  }
  return j;
}

NoiseSpec noise_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bernoulli") return NoiseSpec::bernoulli(j.at("p").get<double>());
  if (kind == "gaussian")
    return NoiseSpec::gaussian(j.at("mean").get<double>(),
                               j.at("std").get<double>());
  if (kind == "truncated-gaussian")
    return NoiseSpec::truncated_gaussian(
        j.at("mean").get<double>(), j.at("std").get<double>(),
        j.at("lo").get<double>(), j.at("hi").get<double>());
  if (kind == "uniform") return NoiseSpec::uniform01();
  throw ConfigError("unknown noise kind: " + kind);
}

}  // namespace

std::string serialize_sem(const Sem& sem, const PathwaySet& pi) {
  const CausalGraph& g = sem.graph();
  json j;
  j["nodes"] = g.names();
  j["attribute"] = g.name(g.attribute());
  j["outcome"] = g.name(g.outcome());
  json latent = json::array();
  for (int v = 0; v < g.node_count(); ++v)
    if (g.is_latent(v)) latent.push_back(g.name(v));
  j["latent"] = latent;
  json edges = json::array();
  for (int v = 0; v < g.node_count(); ++v)
    for (int c : g.children(v))
      edges.push_back(json::array({g.name(v), g.name(c)}));
  j["edges"] = edges;
  json noise = json::object();
  json eqs = json::object();
  for (int v = 0; v < g.node_count(); ++v) {
    noise[g.name(v)] = noise_to_json(sem.noise_spec(v));
    eqs[g.name(v)] = expr_to_json(sem.equation(v), g);
  }
  j["noise"] = noise;
  j["equations"] = eqs;
  j["pathways"] = json::array();
  for (const auto& p : pi.paths()) {
    json path = json::array();
    for (int v : p) path.push_back(g.name(v));
    j["pathways"].push_back(path);
  }
  return j.dump(2);
}

std::pair<Sem, PathwaySet> deserialize_sem(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid SEM file: ") + e.what());
  }
  auto nodes = j.at("nodes").get<std::vector<std::string>>();
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  CausalGraph g(nodes, edges, j.at("attribute").get<std::string>(),
                j.at("outcome").get<std::string>(),
                j.value("latent", std::vector<std::string>{}));
  std::vector<ExprPtr> eqs(g.node_count());
  std::vector<NoiseSpec> noise(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) {
    noise[v] = noise_from_json(j.at("noise").at(g.name(v)));
    eqs[v] = expr_from_json(j.at("equations").at(g.name(v)), g);
  }
  std::vector<std::vector<std::string>> paths;
  for (const auto& p : j.at("pathways"))
    paths.push_back(p.get<std::vector<std::string>>());
  Sem sem(g, std::move(eqs), std::move(noise));
  PathwaySet pi = PathwaySet::from_names(sem.graph(), paths);
  return {std::move(sem), std::move(pi)};
}

void save_sem(const Sem& sem, const PathwaySet& pi, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write SEM file: " + path);
  out << serialize_sem(sem, pi) << "\n";
}

std::pair<Sem, PathwaySet> load_sem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read SEM file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return deserialize_sem(text);
}

// ---------------------------------------------------------------------------
// Tabular datasets

TabularLoad load_tabular_dataset(const std::string& config_path,
                                 const std::string& csv_override) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot read dataset config: " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid dataset config: ") + e.what());
  }

  const std::string csv_path =
      !csv_override.empty() ? csv_override : cfg.at("csv").get<std::string>();
  const std::string label = cfg.at("label").get<std::string>();
  const std::string attribute = cfg.at("attribute").get<std::string>();
  const std::string positive_label = cfg.value("positive_label", "");
  const std::string attribute_positive = cfg.value("attribute_positive", "");
  const auto categorical =
      cfg.value("categorical", std::vector<std::string>{});
  const auto dropped = cfg.value("drop", std::vector<std::string>{});
  const long train_count = cfg.at("train_count").get<long>();

  const auto rows = read_csv_cells(csv_path);
  const auto& header = rows[0];
  const long n = static_cast<long>(rows.size()) - 1;
  if (n < 2) throw ConfigError("dataset has too few rows");
  if (train_count <= 0 || train_count >= n)
    throw ConfigError("train split must leave both train and test rows");

  auto col_index = [&header](const std::string& name) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    throw ConfigError("missing column '" + name + "' in CSV header");
  };
  const int label_col = col_index(label);
  const int attr_col_raw = col_index(attribute);
  std::set<int> drop_set{label_col};
  for (const auto& d : dropped) drop_set.insert(col_index(d));
  const std::set<std::string> cat_set(categorical.begin(), categorical.end());

  for (const auto& r : rows)
    if (r.size() != header.size())
      throw ConfigError("CSV has rows with inconsistent cell counts");

  Dataset ds;
  ds.train_count = train_count;
  ds.y.resize(n);
  for (long i = 0; i < n; ++i) {
    const std::string& cell = rows[i + 1][label_col];
    if (!positive_label.empty())
      ds.y(i) = cell == positive_label ? 1.0 : 0.0;
    else {
      const double v = parse_number(cell, "label row " + std::to_string(i + 2));
      if (v != 0.0 && v != 1.0)
        throw ConfigError("numeric labels must be 0/1");
      ds.y(i) = v;
    }
  }

  // Encode columns; track which encoded columns each original produced.
  std::vector<Eigen::VectorXd> columns;
  std::map<std::string, std::vector<std::string>> expansion;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const int jc = static_cast<int>(j);
    if (drop_set.count(jc)) continue;
    const std::string& name = header[j];
    if (jc == attr_col_raw) {
      Eigen::VectorXd col(n);
      for (long i = 0; i < n; ++i) {
        const std::string& cell = rows[i + 1][jc];
        if (!attribute_positive.empty())
          col(i) = cell == attribute_positive ? 1.0 : 0.0;
        else {
          const double v =
              parse_number(cell, "attribute row " + std::to_string(i + 2));
          if (v != 0.0 && v != 1.0)
            throw ConfigError("numeric attribute must be 0/1");
          col(i) = v;
        }
      }
      ds.attribute_col = static_cast<int>(columns.size());
      ds.feature_names.push_back(name);
      columns.push_back(std::move(col));
      expansion[name] = {name};
      continue;
    }
    if (cat_set.count(name)) {
      // Categories discovered on the training split only.
      std::set<std::string> cats;
      for (long i = 0; i < train_count; ++i) cats.insert(rows[i + 1][jc]);
      bool warned = false;
      std::vector<std::string> produced;
      std::map<std::string, int> cat_pos;
      const std::size_t base = columns.size();
      for (const auto& c : cats) {
        cat_pos[c] = static_cast<int>(columns.size());
        columns.push_back(Eigen::VectorXd::Zero(n));
        const std::string enc = name + "=" + c;
        ds.feature_names.push_back(enc);
        produced.push_back(enc);
      }
      for (long i = 0; i < n; ++i) {
        const auto it = cat_pos.find(rows[i + 1][jc]);
        if (it == cat_pos.end()) {
          if (!warned) {
            ds.warnings.push_back("column '" + name +
                                  "': unseen category in test rows encoded "
                                  "as all-zeros");
            warned = true;
          }
          continue;
        }
        columns[it->second](i) = 1.0;
      }
      (void)base;
      expansion[name] = std::move(produced);
      continue;
    }
    Eigen::VectorXd col(n);
    for (long i = 0; i < n; ++i)
      col(i) = parse_number(rows[i + 1][jc],
                            "column '" + name + "' row " + std::to_string(i + 2));
    ds.feature_names.push_back(name);
    columns.push_back(std::move(col));
    expansion[name] = {name};
  }

  ds.X.resize(n, static_cast<long>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) ds.X.col(j) = columns[j];

  auto expand_roles = [&expansion](const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (const auto& name : names) {
      const auto it = expansion.find(name);
      if (it == expansion.end())
        throw ConfigError("role references unknown column '" + name + "'");
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  };
  const auto& roles = cfg.at("roles");
  TabularLoad out;
  out.recipe = recipe_from_roles(
      ds.feature_names, attribute,
      expand_roles(roles.value("c", std::vector<std::string>{})),
      expand_roles(roles.value("mpi", std::vector<std::string>{})),
      expand_roles(roles.value("mbar", std::vector<std::string>{})));
  out.data = std::move(ds);
  return out;
}

}  // namespace pathfair
