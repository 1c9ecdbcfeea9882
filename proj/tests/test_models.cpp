#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spdeftle/models.hpp"
#include "spdeftle/stats.hpp"

using namespace spdeftle;

namespace {
const double kCf = -3.0 / (2.0 * std::numbers::pi);

std::vector<ModelSpec> catalog() { return {allen_cahn(), swift_hohenberg(1), swift_hohenberg(2), surface_growth()}; }
}  // namespace

TEST(Models, FOfZero) {
  for (auto m : catalog()) {
    SpectralSpace s(m, 12);
    EXPECT_EQ(evaluate_F(s, s.zero()).coeffs.norm(), 0.0);
  }
}

TEST(Models, CubicHomogeneity) {
  for (auto m : catalog()) {
    SpectralSpace s(m, 16);
    auto u = random_field(s, 3, 0);
    auto f1 = evaluate_F(s, u).coeffs;
    auto f2 = evaluate_F(s, SpectralField(s.id(), 2.0 * u.coeffs)).coeffs;
    EXPECT_LT((f2 - 8.0 * f1).norm(), 1e-10 * std::max(1.0, f1.norm())) << m.name;
  }
}

TEST(Models, AllenCahnKernelCoefficient) {
  SpectralSpace s(allen_cahn(), 16);
  for (double xi : {0.5, 1.0, 2.0}) {
    auto f = evaluate_F(s, SpectralField(s.id(), xi * s.kernel_unit().coeffs));
    EXPECT_NEAR(f.coeffs[0], kCf * xi * xi * xi, 1e-13 * xi * xi * xi);
  }
}

TEST(Models, CubicCoefficients) {
  EXPECT_NEAR(cubic_coefficient(SpectralSpace(allen_cahn(), 16)), kCf, 1e-14);
  EXPECT_NEAR(cubic_coefficient(SpectralSpace(swift_hohenberg(1), 16)), kCf, 1e-14);
  EXPECT_NEAR(cubic_coefficient(SpectralSpace(surface_growth(), 16)), kCf, 1e-14);
  // rescaled domains: same integral scaled by 1/L
  EXPECT_NEAR(cubic_coefficient(SpectralSpace(swift_hohenberg(2), 16)), kCf / 2.0, 1e-14);
  for (auto m : catalog()) EXPECT_LT(cubic_coefficient(SpectralSpace(m, 8)), 0.0);
}

TEST(Models, DerivativeZeroDirection) {
  for (auto m : catalog()) {
    SpectralSpace s(m, 12);
    EXPECT_EQ(evaluate_DF(s, random_field(s, 1, 0), s.zero()).coeffs.norm(), 0.0);
  }
}

TEST(Models, DerivativeFiniteDifference) {
  for (auto m : catalog()) {
    SpectralSpace s(m, 16);
    auto u = random_field(s, 11, 0), h = random_field(s, 11, 1);
    Eigen::VectorXd dfh = evaluate_DF(s, u, h).coeffs;
    std::vector<double> hs{1e-2, 1e-3, 1e-4}, err;
    for (double e : hs) {
      Eigen::VectorXd fd = (cubic_term(s, u.coeffs + e * h.coeffs) - cubic_term(s, u.coeffs)) / e;
      err.push_back((fd - dfh).norm());
    }
    EXPECT_GE(loglog_slope(hs, err), 0.95) << m.name;
  }
}

TEST(Models, TangentMatrixColumns) {
  for (auto m : catalog()) {
    SpectralSpace s(m, 10);
    auto u = random_field(s, 2, 0);
    Eigen::MatrixXd J = tangent_matrix(s, u.coeffs);
    for (std::size_t l = 0; l < 10; ++l) {
      Eigen::VectorXd col = cubic_derivative(s, u.coeffs, s.unit(l).coeffs);
      EXPECT_LT((J.col(Eigen::Index(l)) - col).norm(), 1e-12) << m.name;
    }
    EXPECT_LT((J - J.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Models, DerivativeSign) {
  for (auto m : catalog()) {
    SpectralSpace s(m, 16);
    double worst = -1e300;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      auto u = random_field(s, 21, 2 * i), h = random_field(s, 21, 2 * i + 1);
      worst = std::max(worst, inner_product(evaluate_DF(s, u, h), h));
    }
    EXPECT_LE(worst, 1e-10) << m.name;
  }
}

TEST(Models, DissipativityIdentity) {
  SpectralSpace s(allen_cahn(), 16);
  auto u = random_field(s, 5, 0);
  // v = 0: <-u^3, u> = -||u||_4^4
  EXPECT_NEAR(inner_product(evaluate_F(s, u), u), -std::pow(norm_x(s, u), 4), 1e-12);
  EXPECT_NEAR(inner_product(evaluate_F(s, u), s.zero()), 0.0, 0.0);
}

TEST(Models, Dissipativity) {
  for (auto m : catalog()) {
    SpectralSpace s(m, 16);
    auto rep = check_dissipativity(s, 1000);
    EXPECT_EQ(rep.trials, 1000u);
    EXPECT_TRUE(rep.passed) << m.name;
    EXPECT_LE(rep.max_inner, 0.0) << m.name;
    EXPECT_GT(rep.c_est, 0.0) << m.name;
    EXPECT_LE(rep.max_residual, 1e-12) << m.name;
  }
  // pointwise (a^3 - b^3)(a - b) >= (a - b)^4 / 4, so c >= 1/4 for Allen-Cahn
  auto rep = check_dissipativity(SpectralSpace(allen_cahn(), 16), 1000);
  EXPECT_GE(rep.c_est, 0.25);
}
