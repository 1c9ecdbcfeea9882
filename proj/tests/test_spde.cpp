#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "spdeftle/models.hpp"
#include "spdeftle/rng.hpp"
#include "spdeftle/spde.hpp"
#include "spdeftle/stats.hpp"

using namespace spdeftle;

namespace {

std::shared_ptr<const SpectralSpace> space(ModelSpec m = allen_cahn(), std::size_t n = 16) {
  return std::make_shared<const SpectralSpace>(std::move(m), n);
}

SpdeParams params(std::shared_ptr<const SpectralSpace> s, double nu, double sigma, double dt, double T,
                  bool nonlinear = true) {
  SpdeParams p;
  p.space = std::move(s);
  p.nu = nu;
  p.sigma = sigma;
  p.dt = dt;
  p.horizon = T;
  p.nonlinear = nonlinear;
  return p;
}

WienerPath path_for(const SpdeParams& p, std::uint64_t sample, std::uint64_t seed = 1) {
  return WienerPath(PathKey{seed, sample}, p.dt, p.n_steps(), p.space->noise_spectrum());
}

}  // namespace

TEST(SpdeParams, Validation) {
  auto s = space();
  EXPECT_THROW(params(s, 0.0, -0.1, 0.01, 1.0).validate(), std::invalid_argument);
  EXPECT_THROW(params(s, 0.0, 0.1, 0.01, 1.005).validate(), std::invalid_argument);
  EXPECT_EQ(params(s, 0.0, 0.1, 0.01, 1.0).n_steps(), 100u);
  EXPECT_EQ(steps_for(50.0 / 0.1, 0.01), 50000u);
}

TEST(Spde, LinearKernelModeIsExact) {
  auto p = params(space(), -0.5, 0.0, 0.01, 2.0, false);
  auto tr = integrate_spde(p, p.space->kernel_unit(), path_for(p, 0));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    Eigen::VectorXd expect = std::exp(-0.5 * 0.01 * double(i)) * p.space->kernel_unit().coeffs;
    ASSERT_LT((tr.states.col(Eigen::Index(i)) - expect).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Spde, StoreEvery) {
  auto p = params(space(), -0.5, 0.1, 0.01, 1.0);
  auto path = path_for(p, 3);
  auto all = integrate_spde(p, random_field(*p.space, 1, 0), path);
  auto some = integrate_spde(p, random_field(*p.space, 1, 0), path, 10);
  ASSERT_EQ(some.size(), 11u);
  for (std::size_t i = 0; i < some.size(); ++i) EXPECT_EQ(some.states.col(Eigen::Index(i)), all.states.col(Eigen::Index(10 * i)));
}

TEST(Spde, DeterministicDecay) {
  for (auto m : {allen_cahn(), swift_hohenberg(1), surface_growth()}) {
    const double nu = -0.5, dt = 1e-3;
    auto p = params(space(m), nu, 0.0, dt, 2.0);
    auto u0 = random_field(*p.space, 2, 0);
    auto tr = integrate_spde(p, u0, path_for(p, 0));
    double n0 = norm_h(u0);
    for (std::size_t i = 1; i < tr.size(); ++i) {
      double ni = tr.states.col(Eigen::Index(i)).norm();
      ASSERT_LE(ni, tr.states.col(Eigen::Index(i - 1)).norm()) << m.name;
      ASSERT_LE(ni, n0 * std::exp(nu * dt * double(i)) * (1.0 + 10.0 * dt)) << m.name;
    }
  }
}

TEST(Spde, BlowUpGuard) {
  // growing linear mode at huge nu
  auto p = params(space(allen_cahn(), 4), 60.0, 0.0, 0.01, 10.0, false);
  EXPECT_THROW(integrate_spde(p, p.space->kernel_unit(), path_for(p, 0)), std::runtime_error);
}

TEST(Spde, StrongSelfConvergence) {
  auto s = space(allen_cahn(), 8);
  const double T = 0.5, dt_ref = 0.01 / 16;
  std::vector<double> steps{0.01, 0.005, 0.0025}, err(3, 0.0);
  const auto n_ref = std::size_t(std::llround(T / dt_ref));
  const int samples = 20;
  for (int smp = 0; smp < samples; ++smp) {
    Eigen::MatrixXd z(n_ref, 8);
    NormalKey key{3, std::uint64_t(smp), Stream::Test};
    for (std::size_t i = 0; i < n_ref; ++i)
      for (std::size_t k = 0; k < 8; ++k) z(Eigen::Index(i), Eigen::Index(k)) = normal_at(key, i, k);
    auto u0 = random_field(*s, 5, std::uint64_t(smp));
    auto pref = params(s, 0.3, 0.5, dt_ref, T);
    Eigen::VectorXd ref = integrate_spde(pref, u0, WienerPath::from_normals(z, dt_ref, s->noise_spectrum())).states.rightCols(1);
    for (std::size_t g = 0; g < 3; ++g) {
      auto K = Eigen::Index(std::llround(steps[g] / dt_ref));
      Eigen::MatrixXd zc = Eigen::MatrixXd::Zero(Eigen::Index(n_ref) / K, 8);
      for (Eigen::Index i = 0; i < Eigen::Index(n_ref); ++i) zc.row(i / K) += z.row(i);
      zc /= std::sqrt(double(K));
      auto pc = params(s, 0.3, 0.5, steps[g], T);
      Eigen::VectorXd uc = integrate_spde(pc, u0, WienerPath::from_normals(zc, steps[g], s->noise_spectrum())).states.rightCols(1);
      err[g] += (uc - ref).norm() / samples;
    }
  }
  EXPECT_GE(loglog_slope(steps, err), 0.9) << err[0] << " " << err[1] << " " << err[2];
}

TEST(Variation, ZeroDirection) {
  auto p = params(space(), -0.5, 0.1, 0.01, 1.0);
  auto tr = integrate_spde(p, random_field(*p.space, 1, 0), path_for(p, 0));
  EXPECT_EQ(norm_h(integrate_variation(p, tr, p.space->zero())), 0.0);
}

TEST(Variation, AroundZeroIsSemigroup) {
  auto p = params(space(), 0.2, 0.0, 0.01, 1.0);
  auto tr = integrate_spde(p, p.space->zero(), path_for(p, 0));
  auto v0 = random_field(*p.space, 3, 0);
  auto v = integrate_variation(p, tr, v0);
  EXPECT_LT((v.coeffs - apply_semigroup(*p.space, v0, 1.0, 0.2).coeffs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Variation, GrowthBoundedByNu) {
  for (auto m : {allen_cahn(), swift_hohenberg(1), surface_growth()}) {
    const double dt = 1e-3;
    for (double nu : {-0.5, 0.1}) {
      auto s = space(m);
      auto p = params(s, nu, 0.1, dt, 1.0);
      auto tr = integrate_spde(p, random_field(*s, 4, 0), path_for(p, 1));
      for (std::uint64_t i = 0; i < 5; ++i) {
        auto v0 = random_field(*s, 6, i);
        for (double T : {0.25, 1.0}) {
          auto q = p;
          q.horizon = T;
          EXPECT_LE(norm_h(integrate_variation(q, tr, v0)), norm_h(v0) * std::exp(nu * T) * (1.0 + 10.0 * dt)) << m.name;
        }
      }
    }
  }
}

TEST(Variation, RequiresFullTrajectory) {
  auto p = params(space(), -0.5, 0.1, 0.01, 1.0);
  auto tr = integrate_spde(p, p.space->zero(), path_for(p, 0), 2);
  EXPECT_THROW(integrate_variation(p, tr, p.space->kernel_unit()), std::invalid_argument);
}

TEST(Monodromy, LinearIsDiagonal) {
  auto p = params(space(), 0.3, 0.1, 0.01, 1.0, false);
  auto tr = integrate_spde(p, p.space->zero(), path_for(p, 0));
  Eigen::MatrixXd U = monodromy(p, tr);
  Eigen::VectorXd d = (1.0 * (p.space->eigenvalues().array() + 0.3)).exp();
  EXPECT_LT((U - Eigen::MatrixXd(d.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(top_singular_value(U).value, std::exp(0.3), 1e-12);
}

TEST(Monodromy, Superposition) {
  auto p = params(space(), -0.2, 0.1, 0.01, 1.0);
  auto tr = integrate_spde(p, random_field(*p.space, 1, 0), path_for(p, 0));
  Eigen::MatrixXd U = monodromy(p, tr);
  auto a = random_field(*p.space, 7, 0), b = random_field(*p.space, 7, 1);
  auto va = integrate_variation(p, tr, a).coeffs, vb = integrate_variation(p, tr, b).coeffs;
  auto vab = integrate_variation(p, tr, SpectralField(a.model, a.coeffs + b.coeffs)).coeffs;
  EXPECT_LT((vab - va - vb).norm(), 1e-10);
  EXPECT_LT((U * a.coeffs - va).norm(), 1e-10);
}

TEST(SingularValue, PowerIterationMatchesSvd) {
  for (std::uint64_t c = 0; c < 10; ++c) {
    Eigen::MatrixXd m(64, 64);
    NormalKey key{99, c, Stream::Test};
    for (Eigen::Index i = 0; i < 64; ++i)
      for (Eigen::Index j = 0; j < 64; ++j) m(i, j) = normal_at(key, std::uint64_t(i), std::uint64_t(j)) / 8.0;
    auto full = top_singular_value(m, SvdChoice::FullSvd);
    auto pow = top_singular_value(m, SvdChoice::PowerIteration);
    EXPECT_EQ(full.method, NormMethod::FullSvd);
    EXPECT_EQ(pow.method, NormMethod::PowerIteration);
    EXPECT_NEAR(pow.value, full.value, 1e-6);
  }
  EXPECT_EQ(top_singular_value(Eigen::MatrixXd::Identity(200, 200)).method, NormMethod::PowerIteration);
  EXPECT_EQ(top_singular_value(Eigen::MatrixXd::Identity(64, 64)).method, NormMethod::FullSvd);
}

TEST(SingularValue, PowerIterationResolvesNearlyEqualTopPair) {
  // orthogonal Q from a random matrix, singular values 2 and 2(1 - 1e-5) on top
  Eigen::MatrixXd g(64, 64);
  NormalKey key{7, 0, Stream::Test};
  for (Eigen::Index i = 0; i < 64; ++i)
    for (Eigen::Index j = 0; j < 64; ++j) g(i, j) = normal_at(key, std::uint64_t(i), std::uint64_t(j));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(64, 0.1, 1.0);
  s(0) = 2.0;
  s(1) = 2.0 * (1.0 - 1e-5);
  Eigen::MatrixXd m = q * s.asDiagonal() * q.transpose();
  auto pow = top_singular_value(m, SvdChoice::PowerIteration);
  EXPECT_NEAR(pow.value, 2.0, 1e-6);
}

TEST(Ftle, TrivialSolutionGivesNu) {
  for (auto m : {allen_cahn(), swift_hohenberg(1), surface_growth()}) {
    for (double nu : {-0.5, 0.0, 0.3}) {
      auto p = params(space(m, 32), nu, 0.0, 1e-3, 10.0);
      auto est = spde_ftle(p, p.space->zero(), path_for(p, 0), 10.0);
      EXPECT_NEAR(est.lambda, nu, 1e-8) << m.name;
      EXPECT_EQ(est.storage, "fused");
    }
  }
}

TEST(Ftle, FusedMatchesStored) {
  auto p = params(space(), 0.1, 0.1, 0.01, 3.0);
  auto path = path_for(p, 5);
  auto u0 = random_field(*p.space, 8, 0);
  auto fused = spde_ftle(p, u0, path, 3.0);
  auto stored = spde_ftle_stored(p, integrate_spde(p, u0, path), 3.0);
  EXPECT_NEAR(fused.lambda, stored.lambda, 1e-12);
  EXPECT_EQ(stored.storage, "stored");
}

TEST(Ftle, NegativeRegimeBound) {
  auto p = params(space(allen_cahn(), 32), -0.5, 0.1, 1e-3, 10.0);
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto est = spde_ftle(p, random_field(*p.space, 12, i), path_for(p, i), 10.0);
    EXPECT_LE(est.lambda, -0.5 + 0.02);
  }
}

TEST(Approximation, TrivialZero) {
  auto s = space();
  for (double eps : {0.2, 0.1}) {
    auto p = params(s, eps * eps, 0.0, 0.01, 1.0 / (eps * eps));
    p.epsilon = eps;
    auto r = approximation_error(p, 0.0, path_for(p, 0));
    EXPECT_EQ(r.error_sup, 0.0);
    EXPECT_EQ(r.tilde_x4_integral, 0.0);
  }
}

TEST(Approximation, LinearNoiselessConstant) {
  auto s = space();
  for (double eps : {0.2, 0.1, 0.05}) {
    auto p = params(s, 0.0, 0.0, 0.01, 1.0 / (eps * eps), false);
    p.epsilon = eps;
    auto r = approximation_error(p, 0.7, path_for(p, 0));
    EXPECT_LT(r.error_sup, 1e-15);
    EXPECT_NEAR(r.amplitude_sup, 0.7, 1e-15);
  }
}

TEST(Linearization, LinearKernelExact) {
  auto s = space();
  const double eps = 0.1;
  auto p = params(s, eps * eps, 0.0, 0.01, 1.0 / (eps * eps), false);
  p.epsilon = eps;
  auto r = linearization_error(p, 0.0, path_for(p, 0));
  EXPECT_LT(r.error_sup, 1e-12);
  EXPECT_EQ(r.stable_sup, 0.0);
  EXPECT_NEAR(r.phi_final, std::exp(1.0), 1e-10);
}
