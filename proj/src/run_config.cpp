#include "pclqr/run_config.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>

#include <nlohmann/json.hpp>

#include "pclqr/presets.hpp"

namespace pclqr {

namespace {

using nlohmann::json;

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(field, "expected a non-empty nested list of rows");
  }
  const auto rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    throw ConfigError(field, "rows must be non-empty lists");
  }
  const auto cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(field, "row " + std::to_string(r) + " has " +
                                   std::to_string(j[r].size()) +
                                   " entries, expected " +
                                   std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = number_at(j[r][c],
                          field + "[" + std::to_string(r) + "][" +
                              std::to_string(c) + "]");
    }
  }
  if (!m.allFinite()) throw ConfigError(field, "matrix has non-finite entries");
  return m;
}

// Entries are ascending coefficient lists in xi; bare numbers are constants.
PolynomialMatrix parse_polynomial_matrix(const json& j,
                                         const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw ConfigError(field, "expected a nested list of polynomial entries");
  }
  const auto rows = j.size();
  const auto cols = j[0].size();
  std::size_t max_len = 1;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(field, "row " + std::to_string(r) +
                                   " is ragged; all rows need " +
                                   std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const json& entry = j[r][c];
      if (entry.is_array()) {
        max_len = std::max(max_len, std::max<std::size_t>(entry.size(), 1));
      } else if (!entry.is_number()) {
        throw ConfigError(field, "entry (" + std::to_string(r) + "," +
                                     std::to_string(c) +
                                     ") must be a number or a coefficient "
                                     "list");
      }
    }
  }

  PolynomialMatrix poly;
  poly.coeffs.assign(max_len, Eigen::MatrixXd::Zero(rows, cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const json& entry = j[r][c];
      const std::string where = field + "(" + std::to_string(r) + "," +
                                std::to_string(c) + ")";
      if (entry.is_number()) {
        poly.coeffs[0](r, c) = entry.get<double>();
      } else {
        for (std::size_t k = 0; k < entry.size(); ++k) {
          poly.coeffs[k](r, c) = number_at(entry[k], where);
        }
      }
    }
  }
  for (const auto& c : poly.coeffs) {
    if (!c.allFinite()) {
      throw ConfigError(field, "polynomial coefficients must be finite reals");
    }
  }
  // Drop trailing all-zero coefficients so the declared degree is tight.
  while (poly.coeffs.size() > 1 && poly.coeffs.back().norm() == 0.0) {
    poly.coeffs.pop_back();
  }
  return poly;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json polynomial_to_json(const PolynomialMatrix& p) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      json coeffs = json::array();
      for (const auto& mat : p.coeffs) coeffs.push_back(mat(r, c));
      row.push_back(coeffs);
    }
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd parse_weight(const json& j, const std::string& field,
                             int dim) {
  Eigen::MatrixXd m;
  if (j.is_string()) {
    if (j.get<std::string>() != "identity") {
      throw ConfigError(field, "only \"identity\" or a nested list is allowed");
    }
    m = Eigen::MatrixXd::Identity(dim, dim);
  } else {
    m = parse_matrix(j, field);
  }
  if (m.rows() != dim || m.cols() != dim) {
    throw ConfigError(field, "expected a " + std::to_string(dim) + " x " +
                                 std::to_string(dim) + " matrix");
  }
  if ((m - m.transpose()).norm() > 1e-12 * (1.0 + m.norm())) {
    throw ConfigError(field, "matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-12) {
    throw ConfigError(field, "matrix must be positive definite "
                             "(eigenvalues > 1e-12)");
  }
  return m;
}

std::pair<double, double> parse_interval(const json& j,
                                         const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw ConfigError(field,
                      "expected [lo, hi]; only a scalar parameter is "
                      "supported (no multivariate xi)");
  }
  const double lo = j[0].get<double>(), hi = j[1].get<double>();
  if (!(lo < hi)) throw ConfigError(field, "lower bound must be < upper");
  return {lo, hi};
}

void parse_optimizer(const json& j, OptimizerConfig& opt,
                     const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  if (j.contains("step")) opt.step = number_at(j["step"], field + ".step");
  if (j.contains("grad_tol")) {
    opt.grad_tol = number_at(j["grad_tol"], field + ".grad_tol");
  }
  if (j.contains("max_iters")) {
    if (!j["max_iters"].is_number_integer()) {
      throw ConfigError(field + ".max_iters", "expected an integer");
    }
    opt.max_iters = j["max_iters"].get<int>();
  }
  if (j.contains("record_every")) {
    if (!j["record_every"].is_number_integer()) {
      throw ConfigError(field + ".record_every", "expected an integer");
    }
    opt.record_every = j["record_every"].get<int>();
  }
  if (j.contains("mode")) {
    const std::string mode = j["mode"].get<std::string>();
    if (mode == "fixed") {
      opt.line_search = LineSearch::kFixed;
    } else if (mode == "armijo") {
      opt.line_search = LineSearch::kArmijo;
    } else {
      throw ConfigError(field + ".mode", "expected \"fixed\" or \"armijo\"");
    }
  }
  if (j.contains("armijo_c")) {
    opt.armijo_c = number_at(j["armijo_c"], field + ".armijo_c");
  }
  if (j.contains("armijo_shrink")) {
    opt.armijo_shrink = number_at(j["armijo_shrink"], field + ".armijo_shrink");
  }
  try {
    opt.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

ParametricSystem RunConfig::system() const {
  return make_polynomial_system(A_poly, B_poly, interval);
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  RunConfig cfg;

  if (!j.contains("system")) throw ConfigError("system", "missing section");
  const json& sys = j["system"];
  if (!sys.is_object()) throw ConfigError("system", "expected an object");

  if (sys.contains("preset")) {
    if (!sys["preset"].is_string()) {
      throw ConfigError("system.preset", "expected a string");
    }
    cfg.preset = sys["preset"].get<std::string>();
    const auto preset = find_preset(cfg.preset);
    if (!preset) {
      throw ConfigError("system.preset", "unknown preset \"" + cfg.preset +
                                             "\" (available: illustrative, "
                                             "mass-spring)");
    }
    cfg.A_poly = preset->A_poly;
    cfg.B_poly = preset->B_poly;
    cfg.interval = preset->interval;
    cfg.Q = preset->Q;
    cfg.R = preset->R;
    cfg.pce_order = preset->pce_order;
    cfg.optimizer = preset->optimizer;
  } else {
    if (!sys.contains("A") || !sys.contains("B") || !sys.contains("interval")) {
      throw ConfigError("system",
                        "inline definition needs \"A\", \"B\", and "
                        "\"interval\" (or use \"preset\")");
    }
    cfg.A_poly = parse_polynomial_matrix(sys["A"], "system.A");
    cfg.B_poly = parse_polynomial_matrix(sys["B"], "system.B");
    cfg.interval = parse_interval(sys["interval"], "system.interval");
  }
  cfg.n_x = static_cast<int>(cfg.A_poly.rows());
  cfg.n_u = static_cast<int>(cfg.B_poly.cols());
  if (sys.contains("n_x") && sys["n_x"].get<int>() != cfg.n_x) {
    throw ConfigError("system.n_x", "does not match the shape of A");
  }
  if (sys.contains("n_u") && sys["n_u"].get<int>() != cfg.n_u) {
    throw ConfigError("system.n_u", "does not match the shape of B");
  }
  try {
    cfg.system();  // full shape validation
  } catch (const std::invalid_argument& e) {
    throw ConfigError("system", e.what());
  }

  if (j.contains("pce_order")) {
    if (!j["pce_order"].is_number_integer() || j["pce_order"].get<int>() < 0) {
      throw ConfigError("pce_order", "expected a nonnegative integer");
    }
    cfg.pce_order = j["pce_order"].get<int>();
  }
  if (j.contains("quadrature_order")) {
    if (!j["quadrature_order"].is_number_integer() ||
        j["quadrature_order"].get<int>() < 0) {
      throw ConfigError("quadrature_order",
                        "expected a nonnegative integer (0 = automatic)");
    }
    cfg.quadrature_order = j["quadrature_order"].get<int>();
  }

  if (cfg.preset.empty() || j.contains("Q")) {
    if (!j.contains("Q")) throw ConfigError("Q", "missing cost weight");
    cfg.Q = parse_weight(j["Q"], "Q", cfg.n_x);
  }
  if (cfg.preset.empty() || j.contains("R")) {
    if (!j.contains("R")) throw ConfigError("R", "missing cost weight");
    cfg.R = parse_weight(j["R"], "R", cfg.n_u);
  }

  if (j.contains("optimizer")) {
    parse_optimizer(j["optimizer"], cfg.optimizer, "optimizer");
  }

  if (j.contains("initial_gain")) {
    const json& g = j["initial_gain"];
    if (g.is_string()) {
      if (g.get<std::string>() != "auto") {
        throw ConfigError("initial_gain",
                          "expected \"auto\" or a nested list");
      }
    } else {
      const Eigen::MatrixXd K0 = parse_matrix(g, "initial_gain");
      if (K0.rows() != cfg.n_u || K0.cols() != cfg.n_x) {
        throw ConfigError("initial_gain",
                          "expected a " + std::to_string(cfg.n_u) + " x " +
                              std::to_string(cfg.n_x) + " matrix");
      }
      cfg.initial_gain = K0;
    }
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) {
      throw ConfigError("output_dir", "expected a string");
    }
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("outputs")) {
    const json& out = j["outputs"];
    if (!out.is_object()) throw ConfigError("outputs", "expected an object");
    if (out.contains("directory")) {
      if (!out["directory"].is_string()) {
        throw ConfigError("outputs.directory", "expected a string");
      }
      cfg.output_dir = out["directory"].get<std::string>();
    }
    if (out.contains("formats")) {
      if (!out["formats"].is_array()) {
        throw ConfigError("outputs.formats", "expected a list");
      }
      cfg.write_json = false;
      cfg.write_csv = false;
      for (const json& f : out["formats"]) {
        const std::string fmt = f.is_string() ? f.get<std::string>() : "";
        if (fmt == "json") {
          cfg.write_json = true;
        } else if (fmt == "csv") {
          cfg.write_csv = true;
        } else {
          throw ConfigError("outputs.formats",
                            "supported formats are \"json\" and \"csv\"");
        }
      }
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) {
      throw ConfigError("seed", "expected an integer");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  return cfg;
}

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("JSON parse error: ") + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
  json j;
  json sys;
  if (!cfg.preset.empty()) sys["preset"] = cfg.preset;
  sys["A"] = polynomial_to_json(cfg.A_poly);
  sys["B"] = polynomial_to_json(cfg.B_poly);
  sys["interval"] = {cfg.interval.first, cfg.interval.second};
  sys["n_x"] = cfg.n_x;
  sys["n_u"] = cfg.n_u;
  j["system"] = sys;
  j["pce_order"] = cfg.pce_order;
  j["quadrature_order"] = cfg.quadrature_order;
  j["Q"] = matrix_to_json(cfg.Q);
  j["R"] = matrix_to_json(cfg.R);
  j["optimizer"] = {
      {"step", cfg.optimizer.step},
      {"grad_tol", cfg.optimizer.grad_tol},
      {"max_iters", cfg.optimizer.max_iters},
      {"mode",
       cfg.optimizer.line_search == LineSearch::kFixed ? "fixed" : "armijo"},
      {"armijo_c", cfg.optimizer.armijo_c},
      {"armijo_shrink", cfg.optimizer.armijo_shrink},
      {"record_every", cfg.optimizer.record_every},
  };
  if (cfg.initial_gain) {
    j["initial_gain"] = matrix_to_json(*cfg.initial_gain);
  } else {
    j["initial_gain"] = "auto";
  }
  json formats = json::array();
  if (cfg.write_json) formats.push_back("json");
  if (cfg.write_csv) formats.push_back("csv");
  j["outputs"] = {{"directory", cfg.output_dir}, {"formats", formats}};
  j["seed"] = cfg.seed;
  return j;
}

Eigen::MatrixXd parse_gain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<gain>", "cannot open gain file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<gain>", std::string("JSON parse error: ") + e.what());
  }
  if (j.is_object()) {
    if (!j.contains("final_gain")) {
      throw ConfigError("<gain>",
                        "object gain file must contain \"final_gain\"");
    }
    return parse_matrix(j["final_gain"], "final_gain");
  }
  return parse_matrix(j, "<gain>");
}

}  // namespace pclqr
