#include "nakernel/nakernel.h"

#include <chrono>
#include <memory>
#include <new>
#include <string>

#include "bounds.hpp"
#include "error.hpp"
#include "experiment/commands.hpp"
#include "experiment/config.hpp"
#include "experiment/record.hpp"
#include "expfun.hpp"
#include "liegroup.hpp"
#include "poisson.hpp"
#include "randpath.hpp"

struct nak_group {
  nak::MetaAbelianGroup group;
};

struct nak_result {
  int exit_code = 0;
  std::string csv;
  std::string json;
  std::string out_dir;
};

namespace {

thread_local std::string last_error;

nak_status status_of(nak::ErrorCode c) {
  return static_cast<nak_status>(static_cast<int>(c));
}

template <class F>
nak_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return NAK_OK;
  } catch (const nak::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NAK_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NAK_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown failure";
    return NAK_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* what) {
  nak::require(p != nullptr, std::string(what) + " must not be null");
}

Eigen::VectorXd vec(const double* p, Eigen::Index n) {
  return Eigen::Map<const Eigen::VectorXd>(p, n);
}

void store(const Eigen::VectorXd& v, double* out) {
  Eigen::Map<Eigen::VectorXd>(out, v.size()) = v;
}

nak::GroupElement element(const nak::MetaAbelianGroup& g, const double* m, const double* v) {
  need(m, "m");
  need(v, "v");
  return {vec(m, g.m()), vec(v, g.n())};
}

}  // namespace

extern "C" {

const char* nak_version(void) { return nak::experiment::version(); }

const char* nak_last_error(void) { return last_error.c_str(); }

const char* nak_status_name(nak_status status) {
  if (status == NAK_OK) return "ok";
  if (status == NAK_INTERNAL_ERROR) return "internal-error";
  if (status >= NAK_INVALID_ARGUMENT && status <= NAK_IO_ERROR)
    return nak::to_string(static_cast<nak::ErrorCode>(status));
  return "unknown";
}

nak_status nak_heisenberg_create(int n, size_t rank, const double* xi1, const double* xi2,
                                 const double* alpha, nak_group** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(xi1, "xi1");
    need(xi2, "xi2");
    need(alpha, "alpha");
    nak::require(rank >= 1, "rank must be positive");
    const auto k = static_cast<Eigen::Index>(rank);
    *out = new nak_group{nak::heisenberg_instance(n, vec(xi1, k), vec(xi2, k), vec(alpha, k))};
  });
}

void nak_group_free(nak_group* group) { delete group; }

nak_status nak_group_dims(const nak_group* group, size_t* m, size_t* n, size_t* rank, int* k_o) {
  return guarded([&] {
    need(group, "group");
    if (m) *m = static_cast<size_t>(group->group.m());
    if (n) *n = static_cast<size_t>(group->group.n());
    if (rank) *rank = static_cast<size_t>(group->group.roots().rank());
    if (k_o) *k_o = group->group.k_o();
  });
}

nak_status nak_group_multiply(const nak_group* group, const double* m1, const double* v1,
                              const double* m2, const double* v2, double* m_out, double* v_out) {
  return guarded([&] {
    need(group, "group");
    need(m_out, "m_out");
    need(v_out, "v_out");
    const auto& g = group->group;
    const nak::GroupElement r = g.multiply(element(g, m1, v1), element(g, m2, v2));
    store(r.m, m_out);
    store(r.v, v_out);
  });
}

nak_status nak_group_inverse(const nak_group* group, const double* m, const double* v,
                             double* m_out, double* v_out) {
  return guarded([&] {
    need(group, "group");
    need(m_out, "m_out");
    need(v_out, "v_out");
    const auto& g = group->group;
    const nak::GroupElement r = g.inverse(element(g, m, v));
    store(r.m, m_out);
    store(r.v, v_out);
  });
}

nak_status nak_exponent_thcm(const nak_group* group, const double* rho, double* gamma_alpha,
                             double* rho0_rho) {
  return guarded([&] {
    need(group, "group");
    need(rho, "rho");
    const auto& roots = group->group.roots();
    const nak::ThCMExponent e = nak::exponent_thcm(roots, vec(rho, roots.rank()));
    if (gamma_alpha) *gamma_alpha = e.gamma_alpha;
    if (rho0_rho) *rho0_rho = e.rho0_rho;
  });
}

nak_status nak_exponent_thpota(const nak_group* group, double q, double* out) {
  return guarded([&] {
    need(group, "group");
    need(out, "out");
    *out = nak::exponent_thpota(group->group.roots(), q);
  });
}

nak_status nak_exponent_newupper(const nak_group* group, const double* rho, const char* region,
                                 double* out) {
  return guarded([&] {
    need(group, "group");
    need(rho, "rho");
    need(region, "region");
    need(out, "out");
    const auto& roots = group->group.roots();
    *out = nak::exponent_newupper(roots, vec(rho, roots.rank()), nak::parse_exponent_region(region));
  });
}

double nak_phi_cdf(double x) { return nak::phi_cdf(x); }

nak_status nak_perpetuity_law(double d, size_t rank, const double* form, const double* alpha,
                              double* shape, double* scale) {
  return guarded([&] {
    need(form, "form");
    need(alpha, "alpha");
    const auto k = static_cast<Eigen::Index>(rank);
    const nak::InverseGammaLaw law = nak::perpetuity_law(d, vec(form, k), vec(alpha, k));
    if (shape) *shape = law.shape;
    if (scale) *scale = law.scale;
  });
}

nak_status nak_estimate_nu(const nak_group* group, const double* m, const double* v,
                           const nak_poisson_args* args, nak_estimate* out) {
  return guarded([&] {
    need(group, "group");
    need(args, "args");
    need(out, "out");
    nak::PoissonArgs a;
    a.horizon = args->horizon;
    a.n_sigma = args->n_sigma;
    a.n_eta = args->n_eta;
    a.steps_per_unit = args->steps_per_unit;
    a.seed = args->seed;
    a.workers = args->workers == 0 ? 1 : args->workers;
    const auto& g = group->group;
    const nak::PoissonEstimate e = nak::estimate_nu(g, element(g, m, v), a);
    *out = nak_estimate{e.value.mean, e.value.std_error, e.value.median_of_means,
                        e.value.mom_std_error, e.value.count, e.converged ? 1 : 0};
  });
}

const char* nak_command_name(size_t index) {
  const auto& names = nak::experiment::command_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

nak_status nak_run(const char* command, const char* config_text, const nak_run_options* options,
                   nak_result** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(command, "command");
    need(config_text, "config_text");
    const auto start = std::chrono::steady_clock::now();
    std::string text = config_text;
    std::optional<std::uint64_t> seed;
    if (auto replay = nak::experiment::parse_record(text)) {
      text = std::move(replay->config_text);
      seed = replay->seed;
    }
    nak::experiment::ExperimentConfig cfg = nak::experiment::parse_config(text);
    if (seed) cfg.seed = *seed;
    if (options && options->has_seed) cfg.seed = options->seed;
    const unsigned workers = options && options->workers > 0 ? options->workers : 1;

    const nak::experiment::CommandResult r = nak::experiment::run_command(command, cfg, workers);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto res = std::make_unique<nak_result>();
    res->exit_code = r.passed ? 0 : 1;
    res->csv = nak::experiment::to_csv(r);
    res->json = nak::experiment::to_record(r, cfg, workers, wall).dump(2) + "\n";
    res->out_dir = cfg.out;
    *out = res.release();
  });
}

int nak_result_exit_code(const nak_result* result) { return result ? result->exit_code : 2; }

const char* nak_result_csv(const nak_result* result) { return result ? result->csv.c_str() : ""; }

const char* nak_result_json(const nak_result* result) { return result ? result->json.c_str() : ""; }

const char* nak_result_out_dir(const nak_result* result) {
  return result ? result->out_dir.c_str() : "";
}

void nak_result_free(nak_result* result) { delete result; }

}  // extern "C"
