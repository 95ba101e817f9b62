#include "experiment/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "error.hpp"

namespace nak::experiment {

namespace {

[[noreturn]] void config_fail(int line, const std::string& what) {
  fail(ErrorCode::ConfigError, "config line " + std::to_string(line) + ": " + what);
}

class Parser {
 public:
  Parser(std::string_view text) : text_(text) {}

  Document run() {
    Document doc;
    Table* current = &doc.root;
    while (!eof()) {
      skip_blank();
      if (eof()) break;
      const char c = peek();
      if (c == '\n') {
        advance();
        continue;
      }
      if (c == '[') {
        advance();
        skip_inline_space();
        const std::string name = bare_key();
        skip_inline_space();
        expect(']');
        if (doc.sections.count(name)) config_fail(line_, "duplicate section [" + name + "]");
        current = &doc.sections.emplace(name, Table(name)).first->second;
      } else {
        const int key_line = line_;
        const std::string key = bare_key();
        skip_inline_space();
        expect('=');
        skip_blank();
        Value v = value();
        current->set(key, std::move(v), key_line);
      }
      end_of_line();
    }
    return doc;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void expect(char c) {
    if (eof() || peek() != c) config_fail(line_, std::string("expected '") + c + "'");
    advance();
  }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  // Spaces, comments and newlines.
  void skip_blank() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline_space();
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') advance();
    if (eof()) return;
    if (peek() != '\n') config_fail(line_, "unexpected trailing characters");
    advance();
  }

  std::string bare_key() {
    std::string k;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
      k.push_back(peek());
      advance();
    }
    if (k.empty()) config_fail(line_, "expected a key");
    return k;
  }

  Value value() {
    Value v;
    v.line = line_;
    if (eof()) config_fail(line_, "missing value");
    const char c = peek();
    if (c == '"') {
      v.data = string_value();
    } else if (c == '[') {
      advance();
      Value::Array arr;
      skip_blank();
      while (!eof() && peek() != ']') {
        arr.push_back(value());
        skip_blank();
        if (!eof() && peek() == ',') {
          advance();
          skip_blank();
        } else {
          break;
        }
      }
      skip_blank();
      expect(']');
      v.data = std::move(arr);
    } else {
      std::string tok;
      while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' &&
             peek() != ']' && peek() != '#') {
        tok.push_back(peek());
        advance();
      }
      if (tok == "true") {
        v.data = true;
      } else if (tok == "false") {
        v.data = false;
      } else {
        v.data = number(tok);
      }
    }
    return v;
  }

  std::variant<double, std::int64_t, bool, std::string, Value::Array> number(const std::string& tok) {
    if (tok.empty()) config_fail(line_, "missing value");
    const char* b = tok.data();
    const char* e = b + tok.size();
    if (*b == '+') ++b;
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "nan";
    if (!is_float) {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(b, e, i);
      if (ec == std::errc() && p == e) return i;
    } else {
      double d = 0.0;
      auto [p, ec] = std::from_chars(b, e, d);
      if (ec == std::errc() && p == e && std::isfinite(d)) return d;
    }
    config_fail(line_, "cannot parse value '" + tok + "'");
  }

  std::string string_value() {
    expect('"');
    std::string s;
    while (true) {
      if (eof() || peek() == '\n') config_fail(line_, "unterminated string");
      const char c = peek();
      advance();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) config_fail(line_, "unterminated string");
        const char e = peek();
        advance();
        switch (e) {
          case '"': s.push_back('"'); break;
          case '\\': s.push_back('\\'); break;
          case 'n': s.push_back('\n'); break;
          case 't': s.push_back('\t'); break;
          default: config_fail(line_, std::string("unknown escape \\") + e);
        }
      } else {
        s.push_back(c);
      }
    }
    return s;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

bool as_number(const Value& v, double& out) {
  if (const auto* d = std::get_if<double>(&v.data)) {
    out = *d;
    return true;
  }
  if (const auto* i = std::get_if<std::int64_t>(&v.data)) {
    out = static_cast<double>(*i);
    return true;
  }
  return false;
}

std::vector<double> number_list(const Table& t, const std::string& key, std::vector<double> fallback) {
  const auto v = t.get_vector(key);
  if (!v) return fallback;
  return std::vector<double>(v->data(), v->data() + v->size());
}

std::vector<std::vector<double>> rows_of(const Table& t, const std::string& key,
                                         std::vector<std::vector<double>> fallback,
                                         Eigen::Index width = -1) {
  const auto m = t.get_matrix(key);
  if (!m) return fallback;
  if (width >= 0 && m->cols() != width && m->rows() > 0)
    fail(ErrorCode::ConfigError, "[" + t.name() + "] " + key + ": rows must have " +
                                     std::to_string(width) + " entries");
  std::vector<std::vector<double>> out;
  for (Eigen::Index r = 0; r < m->rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m->cols()));
    for (Eigen::Index c = 0; c < m->cols(); ++c) row[static_cast<std::size_t>(c)] = (*m)(r, c);
    out.push_back(std::move(row));
  }
  return out;
}

std::size_t get_size(const Table& t, const std::string& key, std::size_t fallback) {
  const std::int64_t v = t.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) fail(ErrorCode::ConfigError, "[" + t.name() + "] " + key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

void Table::set(const std::string& key, Value v, int line) {
  if (values_.count(key)) config_fail(line, "duplicate key '" + key + "'");
  v.line = line;
  values_.emplace(key, std::move(v));
}

const Value& Table::at(const std::string& key) const { return values_.at(key); }

void Table::type_error(const std::string& key, const char* expected) const {
  const std::string where = name_.empty() ? key : "[" + name_ + "] " + key;
  config_fail(at(key).line, where + " must be " + expected);
}

double Table::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  double d = 0.0;
  if (!as_number(at(key), d)) type_error(key, "a number");
  return d;
}

std::int64_t Table::get_int(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(&at(key).data)) return *i;
  type_error(key, "an integer");
}

std::uint64_t Table::get_uint(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const auto* i = std::get_if<std::int64_t>(&at(key).data);
  if (!i || *i < 0) type_error(key, "a non-negative integer");
  return static_cast<std::uint64_t>(*i);
}

bool Table::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  if (const auto* b = std::get_if<bool>(&at(key).data)) return *b;
  type_error(key, "true or false");
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  if (const auto* s = std::get_if<std::string>(&at(key).data)) return *s;
  type_error(key, "a string");
}

std::optional<Eigen::VectorXd> Table::get_vector(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  const auto* arr = std::get_if<Value::Array>(&at(key).data);
  if (!arr) type_error(key, "an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr->size()));
  for (std::size_t i = 0; i < arr->size(); ++i)
    if (!as_number((*arr)[i], v(static_cast<Eigen::Index>(i)))) type_error(key, "an array of numbers");
  return v;
}

std::optional<Eigen::MatrixXd> Table::get_matrix(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  const auto* arr = std::get_if<Value::Array>(&at(key).data);
  if (!arr) type_error(key, "an array of equal-length number arrays");
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < arr->size(); ++r) {
    const auto* row = std::get_if<Value::Array>(&(*arr)[r].data);
    if (!row) type_error(key, "an array of equal-length number arrays");
    if (r == 0) m.resize(static_cast<Eigen::Index>(arr->size()), static_cast<Eigen::Index>(row->size()));
    if (static_cast<Eigen::Index>(row->size()) != m.cols())
      type_error(key, "an array of equal-length number arrays");
    for (std::size_t c = 0; c < row->size(); ++c)
      if (!as_number((*row)[c], m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))))
        type_error(key, "an array of equal-length number arrays");
  }
  return m;
}

std::optional<std::vector<std::vector<std::vector<double>>>> Table::get_nested3(
    const std::string& key) const {
  if (!has(key)) return std::nullopt;
  const auto* outer = std::get_if<Value::Array>(&at(key).data);
  if (!outer) type_error(key, "a list of triplet lists");
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& mid : *outer) {
    const auto* ma = std::get_if<Value::Array>(&mid.data);
    if (!ma) type_error(key, "a list of triplet lists");
    std::vector<std::vector<double>> block;
    for (const auto& inner : *ma) {
      const auto* ia = std::get_if<Value::Array>(&inner.data);
      if (!ia) type_error(key, "a list of triplet lists");
      std::vector<double> row;
      for (const auto& x : *ia) {
        double d = 0.0;
        if (!as_number(x, d)) type_error(key, "a list of triplet lists");
        row.push_back(d);
      }
      block.push_back(std::move(row));
    }
    out.push_back(std::move(block));
  }
  return out;
}

std::optional<std::vector<std::string>> Table::get_string_list(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  const auto* arr = std::get_if<Value::Array>(&at(key).data);
  if (!arr) type_error(key, "an array of strings");
  std::vector<std::string> out;
  for (const auto& v : *arr) {
    const auto* s = std::get_if<std::string>(&v.data);
    if (!s) type_error(key, "an array of strings");
    out.push_back(*s);
  }
  return out;
}

void Table::reject_unknown(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : values_)
    if (!allowed.count(k))
      config_fail(v.line, "unknown key '" + k + "'" + (name_.empty() ? "" : " in [" + name_ + "]"));
}

const Table& Document::section(const std::string& name) const {
  static const Table empty;
  auto it = sections.find(name);
  return it == sections.end() ? empty : it->second;
}

Document parse_document(std::string_view text) { return Parser(text).run(); }

ExperimentConfig parse_config(std::string_view text) {
  const Document doc = parse_document(text);
  ExperimentConfig cfg;
  cfg.text = std::string(text);

  const Table& root = doc.root;
  root.reject_unknown({"seed", "out", "alpha", "rho"});
  for (const auto& [name, t] : doc.sections) {
    static const std::set<std::string> known{"group", "budget", "dufresne", "reflection",
                                             "kernel", "bounds", "poisson", "exponents"};
    if (!known.count(name)) fail(ErrorCode::ConfigError, "unknown section [" + name + "]");
  }
  cfg.seed = root.get_uint("seed", 0);
  cfg.out = root.get_string("out", "results");
  cfg.alpha = root.get_vector("alpha").value_or(vec2(1.0, 1.0));
  cfg.rho = root.get_vector("rho").value_or(vec2(1.0, 2.0));

  const Table& g = doc.section("group");
  g.reject_unknown({"preset", "n", "xi1", "xi2", "h0", "xi", "theta", "ad"});
  cfg.group.preset = g.get_string("preset", g.has("xi") ? "custom" : "heisenberg");
  cfg.group.h0 = g.get_vector("h0");
  if (cfg.group.preset == "heisenberg") {
    for (const char* k : {"xi", "theta", "ad"})
      if (g.has(k)) fail(ErrorCode::ConfigError, std::string("[group] ") + k + " is not used by the heisenberg preset");
    const std::int64_t n = g.get_int("n", 1);
    if (n < 1) fail(ErrorCode::ConfigError, "[group] n must be positive");
    cfg.group.n = static_cast<int>(n);
    cfg.group.xi1 = g.get_vector("xi1").value_or(vec2(1.0, 0.0));
    cfg.group.xi2 = g.get_vector("xi2").value_or(vec2(0.0, 1.0));
  } else if (cfg.group.preset == "custom") {
    for (const char* k : {"n", "xi1", "xi2"})
      if (g.has(k)) fail(ErrorCode::ConfigError, std::string("[group] ") + k + " is only used by the heisenberg preset");
    if (!g.has("xi") || !g.has("theta") || !g.has("ad") || !g.has("h0"))
      fail(ErrorCode::ConfigError, "[group] custom groups need xi, theta, ad and h0");
    cfg.group.xi = *g.get_matrix("xi");
    cfg.group.theta = *g.get_matrix("theta");
    const auto ad = *g.get_nested3("ad");
    const Eigen::Index m = cfg.group.xi.rows();
    for (const auto& block : ad) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
      for (const auto& trip : block) {
        if (trip.size() != 3) fail(ErrorCode::ConfigError, "[group] ad entries are (row, col, value) triplets");
        const double r = trip[0], c = trip[1];
        if (r != std::floor(r) || c != std::floor(c) || r < 0 || c < 0 || r >= m || c >= m)
          fail(ErrorCode::ConfigError, "[group] ad triplet index out of range");
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = trip[2];
      }
      cfg.group.ad.push_back(std::move(a));
    }
  } else {
    fail(ErrorCode::ConfigError, "[group] unknown preset '" + cfg.group.preset + "'");
  }

  const Table& b = doc.section("budget");
  b.reject_unknown({"n_sigma", "n_eta", "n_steps", "horizon"});
  cfg.budget.n_sigma = get_size(b, "n_sigma", cfg.budget.n_sigma);
  cfg.budget.n_eta = get_size(b, "n_eta", cfg.budget.n_eta);
  cfg.budget.n_steps = get_size(b, "n_steps", cfg.budget.n_steps);
  cfg.budget.horizon = b.get_double("horizon", cfg.budget.horizon);

  const Table& d = doc.section("dufresne");
  d.reject_unknown({"mu", "n_samples", "steps_per_unit", "tol", "safety", "ks_max", "lperp",
                    "lperp_form", "lperp_alpha"});
  auto& du = cfg.dufresne;
  du.mu = number_list(d, "mu", du.mu);
  du.n_samples = get_size(d, "n_samples", du.n_samples);
  du.steps_per_unit = static_cast<int>(d.get_int("steps_per_unit", du.steps_per_unit));
  du.tol = d.get_double("tol", du.tol);
  du.safety = d.get_double("safety", du.safety);
  du.ks_max = d.get_double("ks_max", du.ks_max);
  du.lperp = d.get_bool("lperp", du.lperp);
  du.lperp_form = d.get_vector("lperp_form").value_or(vec2(1.0, 0.0));
  du.lperp_alpha = d.get_vector("lperp_alpha").value_or(vec2(1.0, 1.0));

  const Table& r = doc.section("reflection");
  r.reject_unknown({"n_paths", "n_steps", "tolerance", "margin", "hit_queries", "sup_queries",
                    "tail_queries", "density_queries", "density_width", "continuity_points"});
  auto& re = cfg.reflection;
  re.n_paths = get_size(r, "n_paths", re.n_paths);
  re.n_steps = get_size(r, "n_steps", re.n_steps);
  re.tolerance = r.get_double("tolerance", re.tolerance);
  re.margin = r.get_double("margin", re.margin);
  re.hit_queries = rows_of(r, "hit_queries",
                           {{1, 1, 1}, {1, 0.5, 1}, {1, 2, 1}, {0.5, -1, 2}, {2, 1, 4}}, 3);
  re.sup_queries = rows_of(r, "sup_queries",
                           {{2, -1, 1, 1}, {1, -3, -1.5, 1}, {1, 1.5, 3, 1}, {1, 0.5, 1.5, 1},
                            {0.5, -0.25, 0.25, 1}, {1, -2, 0.5, 1}},
                           4);
  re.tail_queries = rows_of(r, "tail_queries", {{0, 2, 1}, {0, 1, 1}, {0.5, 2, 1}}, 3);
  re.density_queries = rows_of(r, "density_queries",
                               {{0, 0, 1}, {3, 1, 1}, {1, 1, 1}, {1, 0.5, 1}, {0.5, 2, 1}}, 3);
  re.density_width = r.get_double("density_width", re.density_width);
  if (!(re.density_width > 0.0)) fail(ErrorCode::ConfigError, "[reflection] density_width must be positive");
  re.continuity_points = get_size(r, "continuity_points", re.continuity_points);

  const Table& k = doc.section("kernel");
  k.reject_unknown({"t", "sigma", "n_steps", "n_eta", "grid_min", "grid_max", "spacing",
                    "normalization_tol", "marginal_tol", "abelian_check", "det_samples",
                    "det_slack"});
  auto& ke = cfg.kernel;
  ke.t = k.get_double("t", ke.t);
  ke.sigma = k.get_string("sigma", ke.sigma);
  if (ke.sigma != "zero" && ke.sigma != "sampled")
    fail(ErrorCode::ConfigError, "[kernel] sigma must be \"zero\" or \"sampled\"");
  ke.n_steps = get_size(k, "n_steps", ke.n_steps);
  ke.n_eta = get_size(k, "n_eta", ke.n_eta);
  ke.grid_min = k.get_double("grid_min", ke.grid_min);
  ke.grid_max = k.get_double("grid_max", ke.grid_max);
  ke.spacing = k.get_double("spacing", ke.spacing);
  ke.normalization_tol = k.get_double("normalization_tol", ke.normalization_tol);
  ke.marginal_tol = k.get_double("marginal_tol", ke.marginal_tol);
  ke.abelian_check = k.get_bool("abelian_check", ke.abelian_check);
  ke.det_samples = get_size(k, "det_samples", ke.det_samples);
  ke.det_slack = k.get_double("det_slack", ke.det_slack);
  if (!(ke.spacing > 0.0) || !(ke.grid_max > ke.grid_min))
    fail(ErrorCode::ConfigError, "[kernel] need spacing > 0 and grid_max > grid_min");

  const Table& bo = doc.section("bounds");
  bo.reject_unknown({"n_fit", "n_holdout", "t", "box", "n_eta", "n_steps", "max_violation_rate",
                     "slack", "bounds"});
  auto& bs = cfg.bounds;
  bs.n_fit = get_size(bo, "n_fit", bs.n_fit);
  bs.n_holdout = get_size(bo, "n_holdout", bs.n_holdout);
  bs.t = bo.get_double("t", bs.t);
  bs.box = bo.get_double("box", bs.box);
  bs.n_eta = get_size(bo, "n_eta", bs.n_eta);
  bs.n_steps = get_size(bo, "n_steps", bs.n_steps);
  bs.max_violation_rate = bo.get_double("max_violation_rate", bs.max_violation_rate);
  bs.slack = bo.get_double("slack", bs.slack);
  if (auto names = bo.get_string_list("bounds")) bs.bounds = *names;
  for (const auto& name : bs.bounds)
    if (name != "ubpsigma" && name != "preest")
      fail(ErrorCode::ConfigError, "[bounds] unknown bound '" + name + "'");

  const Table& p = doc.section("poisson");
  p.reject_unknown({"points_m", "points_v", "decay", "direction_m", "direction_v", "radii",
                    "region", "slope_tolerance", "scaling_check", "scaling_s"});
  auto& po = cfg.poisson;
  po.points_m = rows_of(p, "points_m", {});
  po.points_v = rows_of(p, "points_v", {});
  if (po.points_m.size() != po.points_v.size())
    fail(ErrorCode::ConfigError, "[poisson] points_m and points_v must have the same length");
  po.decay = p.get_bool("decay", po.decay);
  if (auto dm = p.get_vector("direction_m")) po.direction_m = *dm;
  if (auto dv = p.get_vector("direction_v")) po.direction_v = *dv;
  po.radii = number_list(p, "radii", po.radii);
  po.region = p.get_string("region", po.region);
  po.slope_tolerance = p.get_double("slope_tolerance", po.slope_tolerance);
  po.scaling_check = p.get_bool("scaling_check", po.scaling_check);
  po.scaling_s = p.get_double("scaling_s", po.scaling_s);

  const Table& e = doc.section("exponents");
  e.reject_unknown({"q"});
  cfg.exponents.q = number_list(e, "q", cfg.exponents.q);

  const MetaAbelianGroup group = build_group(cfg);
  if (po.direction_m.size() == 0) po.direction_m = Eigen::VectorXd::Zero(group.m());
  if (po.direction_v.size() == 0) {
    po.direction_v = Eigen::VectorXd::Zero(group.n());
    po.direction_v(0) = 1.0;
  }
  if (po.direction_m.size() != group.m() || po.direction_v.size() != group.n())
    fail(ErrorCode::ConfigError, "[poisson] direction has wrong dimension");
  for (std::size_t i = 0; i < po.points_m.size(); ++i)
    if (static_cast<Eigen::Index>(po.points_m[i].size()) != group.m() ||
        static_cast<Eigen::Index>(po.points_v[i].size()) != group.n())
      fail(ErrorCode::ConfigError, "[poisson] point " + std::to_string(i) + " has wrong dimension");
  if (cfg.rho.size() != group.roots().rank())
    fail(ErrorCode::ConfigError, "rho must have one entry per rank direction");
  return cfg;
}

MetaAbelianGroup build_group(const ExperimentConfig& cfg, MetaAbelianGroup::Options opts) {
  try {
    const auto& g = cfg.group;
    if (g.preset == "heisenberg") return heisenberg_instance(g.n, g.xi1, g.xi2, cfg.alpha, g.h0, opts);
    RootSystem roots(g.xi, g.theta, cfg.alpha, *g.h0);
    std::vector<Eigen::MatrixXd> ad = g.ad;
    if (opts.allow_abelian)
      for (auto& a : ad) a.setZero();
    return MetaAbelianGroup(std::move(roots), std::move(ad), opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::ConfigError, std::string("[group] ") + e.what());
    throw;
  }
}

std::string config_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nak::experiment
