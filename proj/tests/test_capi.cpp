#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "nakernel/nakernel.h"

namespace {

struct GroupDeleter {
  void operator()(nak_group* g) const { nak_group_free(g); }
};
struct ResultDeleter {
  void operator()(nak_result* r) const { nak_result_free(r); }
};
using GroupPtr = std::unique_ptr<nak_group, GroupDeleter>;
using ResultPtr = std::unique_ptr<nak_result, ResultDeleter>;

GroupPtr heisenberg(double a1 = 1.0, double a2 = 1.0, int n = 1) {
  const double xi1[] = {1.0, 0.0}, xi2[] = {0.0, 1.0}, alpha[] = {a1, a2};
  nak_group* g = nullptr;
  EXPECT_EQ(nak_heisenberg_create(n, 2, xi1, xi2, alpha, &g), NAK_OK);
  return GroupPtr(g);
}

std::string quick_config() {
  std::ifstream in(std::string(NAKERNEL_CONFIG_DIR) + "/quick.toml");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ResultPtr run(const char* command, const std::string& text, unsigned workers = 1) {
  nak_run_options opts{0, 0, workers};
  nak_result* r = nullptr;
  EXPECT_EQ(nak_run(command, text.c_str(), &opts, &r), NAK_OK) << nak_last_error();
  return ResultPtr(r);
}

}  // namespace

TEST(CApi, VersionAndNames) {
  EXPECT_GT(std::string(nak_version()).size(), 0u);
  EXPECT_STREQ(nak_status_name(NAK_OK), "ok");
  EXPECT_STREQ(nak_status_name(NAK_DIVERGENT_DRIFT), "divergent-drift");
  EXPECT_STREQ(nak_status_name(static_cast<nak_status>(42)), "unknown");
  std::size_t i = 0;
  while (nak_command_name(i)) ++i;
  EXPECT_EQ(i, 6u);
  EXPECT_STREQ(nak_command_name(0), "verify-dufresne");
}

TEST(CApi, GroupDimsAndProduct) {
  auto g = heisenberg();
  size_t m = 0, n = 0, rank = 0;
  int k = 0;
  ASSERT_EQ(nak_group_dims(g.get(), &m, &n, &rank, &k), NAK_OK);
  EXPECT_EQ(m, 2u);
  EXPECT_EQ(n, 1u);
  EXPECT_EQ(rank, 2u);
  EXPECT_EQ(k, 1);
  // (x, y, z) = (2, 3, 1) times (5, 7, 11): z = 1 + 11 + 2 * 7
  const double m1[] = {3.0, 1.0}, v1[] = {2.0}, m2[] = {7.0, 11.0}, v2[] = {5.0};
  double mo[2], vo[1];
  ASSERT_EQ(nak_group_multiply(g.get(), m1, v1, m2, v2, mo, vo), NAK_OK);
  EXPECT_DOUBLE_EQ(mo[0], 10.0);
  EXPECT_DOUBLE_EQ(mo[1], 26.0);
  EXPECT_DOUBLE_EQ(vo[0], 7.0);
  double mi[2], vi[1];
  ASSERT_EQ(nak_group_inverse(g.get(), m1, v1, mi, vi), NAK_OK);
  ASSERT_EQ(nak_group_multiply(g.get(), m1, v1, mi, vi, mo, vo), NAK_OK);
  EXPECT_DOUBLE_EQ(mo[0], 0.0);
  EXPECT_DOUBLE_EQ(mo[1], 0.0);
  EXPECT_DOUBLE_EQ(vo[0], 0.0);
}

TEST(CApi, NullPointersAndStatus) {
  const double xi1[] = {1.0, 0.0};
  nak_group* g = reinterpret_cast<nak_group*>(0x1);
  EXPECT_EQ(nak_heisenberg_create(1, 2, xi1, nullptr, xi1, &g), NAK_INVALID_ARGUMENT);
  EXPECT_EQ(g, nullptr);
  EXPECT_NE(std::string(nak_last_error()).find("xi2"), std::string::npos);
  EXPECT_EQ(nak_group_dims(nullptr, nullptr, nullptr, nullptr, nullptr), NAK_INVALID_ARGUMENT);
  nak_group_free(nullptr);
  nak_result_free(nullptr);
  EXPECT_EQ(nak_result_exit_code(nullptr), 2);
  auto h = heisenberg();
  size_t m = 0;
  EXPECT_EQ(nak_group_dims(h.get(), &m, nullptr, nullptr, nullptr), NAK_OK);
  EXPECT_STREQ(nak_last_error(), "");
}

TEST(CApi, ExponentsAndClosedForms) {
  auto g = heisenberg(2.0, 0.5);
  const double rho[] = {1.0, 2.0};
  double gamma = 0, rho0 = 0, out = 0;
  ASSERT_EQ(nak_exponent_thcm(g.get(), rho, &gamma, &rho0), NAK_OK);
  EXPECT_DOUBLE_EQ(gamma, 1.0);
  EXPECT_DOUBLE_EQ(rho0, 6.0);
  ASSERT_EQ(nak_exponent_thpota(g.get(), 2.0, &out), NAK_OK);
  EXPECT_DOUBLE_EQ(out, 0.25);
  ASSERT_EQ(nak_exponent_newupper(g.get(), rho, "v_large", &out), NAK_OK);
  EXPECT_DOUBLE_EQ(out, 2.0);
  EXPECT_EQ(nak_exponent_newupper(g.get(), rho, "sideways", &out), NAK_INVALID_ARGUMENT);
  EXPECT_NEAR(nak_phi_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(nak_phi_cdf(2.0), 0.5 * std::erfc(-2.0 / 2.0), 1e-15);
  const double f[] = {1.0}, a[] = {0.5};
  double shape = 0, scale = 0;
  ASSERT_EQ(nak_perpetuity_law(2.0, 1, f, a, &shape, &scale), NAK_OK);
  EXPECT_DOUBLE_EQ(shape, 0.5);
  EXPECT_DOUBLE_EQ(scale, 0.25);
  const double neg[] = {-0.5};
  EXPECT_EQ(nak_perpetuity_law(2.0, 1, f, neg, &shape, &scale), NAK_DIVERGENT_FUNCTIONAL);
}

TEST(CApi, EstimateNuAndDivergentDrift) {
  auto g = heisenberg();
  const double m[] = {0.0, 0.0}, v[] = {0.5};
  nak_poisson_args args{4.0, 32, 8, 20, 3, 2};
  nak_estimate e{};
  ASSERT_EQ(nak_estimate_nu(g.get(), m, v, &args, &e), NAK_OK) << nak_last_error();
  EXPECT_GT(e.mean, 0.0);
  EXPECT_EQ(e.count, 32u);
  auto bad = heisenberg(1.0, -2.0);
  EXPECT_EQ(nak_estimate_nu(bad.get(), m, v, &args, &e), NAK_DIVERGENT_DRIFT);
  EXPECT_NE(std::string(nak_last_error()).find("root"), std::string::npos);
}

TEST(CApi, RunAndReplay) {
  const std::string cfg = quick_config();
  ASSERT_FALSE(cfg.empty());
  auto first = run("verify-bounds", cfg);
  EXPECT_EQ(nak_result_exit_code(first.get()), 0);
  EXPECT_STREQ(nak_result_out_dir(first.get()), "results-quick");
  const std::string csv = nak_result_csv(first.get());
  EXPECT_EQ(csv.rfind("bound,rule,", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  auto replay = run("verify-bounds", nak_result_json(first.get()), 3);
  EXPECT_EQ(csv, nak_result_csv(replay.get()));
}

TEST(CApi, RunErrors) {
  nak_result* r = reinterpret_cast<nak_result*>(0x1);
  EXPECT_EQ(nak_run("exponents", "bogus = 1\n", nullptr, &r), NAK_CONFIG_ERROR);
  EXPECT_EQ(r, nullptr);
  EXPECT_EQ(nak_run("nope", "", nullptr, &r), NAK_INVALID_ARGUMENT);
  EXPECT_EQ(nak_run(nullptr, "", nullptr, &r), NAK_INVALID_ARGUMENT);
  EXPECT_EQ(nak_run("poisson", "alpha = [1.0, -2.0]\n", nullptr, &r), NAK_DIVERGENT_DRIFT);
}

TEST(CApi, SeedOverride) {
  nak_run_options opts{1, 1234, 1};
  nak_result* r = nullptr;
  ASSERT_EQ(nak_run("exponents", "", &opts, &r), NAK_OK);
  ResultPtr hold(r);
  EXPECT_NE(std::string(nak_result_json(r)).find("\"seed\": 1234"), std::string::npos);
}
