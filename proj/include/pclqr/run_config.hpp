#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "pclqr/optimizer.hpp"
#include "pclqr/system.hpp"

namespace pclqr {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Fully resolved run description, parsed from a JSON config file. Matrices
/// are row-major nested lists; entries of A and B are ascending polynomial
/// coefficient lists in xi ("identity" is accepted for Q and R).
struct RunConfig {
  std::string preset;  // empty when the system is given inline
  PolynomialMatrix A_poly;
  PolynomialMatrix B_poly;
  std::pair<double, double> interval{-1.0, 1.0};
  int n_x = 0;
  int n_u = 0;
  int pce_order = 5;
  int quadrature_order = 0;  // 0 = automatic
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  OptimizerConfig optimizer;
  std::optional<Eigen::MatrixXd> initial_gain;  // nullopt = auto
  std::string output_dir = "out";
  bool write_json = true;  // outputs.formats filter
  bool write_csv = true;
  std::uint64_t seed = 42;

  ParametricSystem system() const;
};

RunConfig parse_run_config_file(const std::string& path);
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

/// Parses a JSON gain file: either a plain nested list or an object with a
/// "final_gain" field (i.e. a report.json).
Eigen::MatrixXd parse_gain_file(const std::string& path);

}  // namespace pclqr
