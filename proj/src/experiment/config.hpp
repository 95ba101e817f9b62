#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "liegroup.hpp"

namespace nak::experiment {

// Values of the TOML subset accepted in experiment files: numbers, strings,
// booleans and (nested) arrays, grouped into [sections].
struct Value {
  using Array = std::vector<Value>;
  std::variant<double, std::int64_t, bool, std::string, Array> data;
  int line = 0;
};

class Table {
 public:
  explicit Table(std::string name = {}) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, Value v, int line);

  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::optional<Eigen::VectorXd> get_vector(const std::string& key) const;
  std::optional<Eigen::MatrixXd> get_matrix(const std::string& key) const;
  std::optional<std::vector<std::string>> get_string_list(const std::string& key) const;
  std::optional<std::vector<std::vector<std::vector<double>>>> get_nested3(const std::string& key) const;

  // Throws config-error naming the first key outside `allowed`.
  void reject_unknown(const std::set<std::string>& allowed) const;

 private:
  const Value& at(const std::string& key) const;
  [[noreturn]] void type_error(const std::string& key, const char* expected) const;

  std::string name_;
  std::map<std::string, Value> values_;
};

struct Document {
  Table root;
  std::map<std::string, Table> sections;

  const Table& section(const std::string& name) const;
};

Document parse_document(std::string_view text);

struct GroupSpec {
  std::string preset = "heisenberg";
  int n = 1;
  Eigen::VectorXd xi1, xi2;
  Eigen::MatrixXd xi, theta;
  std::vector<Eigen::MatrixXd> ad;
  std::optional<Eigen::VectorXd> h0;
};

struct BudgetSpec {
  std::size_t n_sigma = 256;
  std::size_t n_eta = 64;
  std::size_t n_steps = 50;  // per unit time
  double horizon = 8.0;
};

struct DufresneSpec {
  std::vector<double> mu{1.0, 2.0, 4.0};
  std::size_t n_samples = 20000;
  int steps_per_unit = 200;
  double tol = 1e-4;
  double safety = 10.0;
  double ks_max = 0.03;
  bool lperp = true;
  Eigen::VectorXd lperp_form;   // default (1, 0)
  Eigen::VectorXd lperp_alpha;  // default (1, 1)
};

struct ReflectionSpec {
  std::size_t n_paths = 100000;
  std::size_t n_steps = 4000;
  double tolerance = 0.02;
  double margin = 0.005;
  std::vector<std::vector<double>> hit_queries;   // (a, x, t)
  std::vector<std::vector<double>> sup_queries;   // (a, x, y, t)
  std::vector<std::vector<double>> tail_queries;  // (x, y, t)
  std::vector<std::vector<double>> density_queries;  // (a, n, t)
  double density_width = 0.05;
  std::size_t continuity_points = 100;
};

struct KernelSpec {
  double t = 1.0;
  std::string sigma = "zero";  // zero | sampled
  std::size_t n_steps = 200;   // per unit time
  std::size_t n_eta = 256;
  double grid_min = -8.0;
  double grid_max = 8.0;
  double spacing = 0.5;
  double normalization_tol = 0.05;
  double marginal_tol = 1e-3;
  bool abelian_check = true;
  std::size_t det_samples = 1000;
  double det_slack = 1e-10;
};

struct BoundsSpec {
  std::size_t n_fit = 500;
  std::size_t n_holdout = 500;
  double t = 1.0;
  double box = 3.0;
  std::size_t n_eta = 64;
  std::size_t n_steps = 100;  // per unit time
  double max_violation_rate = 0.01;
  double slack = 3.0;
  std::vector<std::string> bounds{"ubpsigma", "preest"};
};

struct PoissonSpec {
  std::vector<std::vector<double>> points_m;
  std::vector<std::vector<double>> points_v;
  bool decay = true;
  Eigen::VectorXd direction_m;
  Eigen::VectorXd direction_v;
  std::vector<double> radii{2.0, 4.0, 8.0, 16.0};
  std::string region = "v_large";
  double slope_tolerance = 0.5;
  bool scaling_check = false;
  double scaling_s = -0.6931471805599453;
};

struct ExponentsSpec {
  std::vector<double> q{2.0};
};

struct ExperimentConfig {
  std::string text;
  std::uint64_t seed = 0;
  std::string out = "results";
  Eigen::VectorXd alpha;
  Eigen::VectorXd rho;
  GroupSpec group;
  BudgetSpec budget;
  DufresneSpec dufresne;
  ReflectionSpec reflection;
  KernelSpec kernel;
  BoundsSpec bounds;
  PoissonSpec poisson;
  ExponentsSpec exponents;
};

// Parses and validates; the group is constructed once to check it.
ExperimentConfig parse_config(std::string_view text);

MetaAbelianGroup build_group(const ExperimentConfig& cfg,
                             MetaAbelianGroup::Options opts = {});

// FNV-1a 64 of the config text, as 16 hex digits.
std::string config_hash(std::string_view text);

}  // namespace nak::experiment
