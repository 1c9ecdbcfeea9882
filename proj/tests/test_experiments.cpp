#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "spdeftle/experiments.hpp"
#include "spdeftle/report_io.hpp"
#include "spdeftle/stats.hpp"

using namespace spdeftle;

TEST(Stats, Wilson) {
  auto w = wilson_interval(5, 10);
  EXPECT_NEAR(w.low, 0.236593, 1e-6);
  EXPECT_NEAR(w.high, 0.763407, 1e-6);
  auto z = wilson_interval(0, 400);
  EXPECT_EQ(z.low, 0.0);
  EXPECT_GT(z.high, 0.0);
  EXPECT_EQ(wilson_interval(100, 100).high, 1.0);
  EXPECT_THROW(wilson_interval(3, 2), std::invalid_argument);
}

TEST(Stats, MedianAndSlopes) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  std::vector<double> x{1, 2, 3}, y{2, 4, 6};
  EXPECT_NEAR(ls_slope(x, y), 2.0, 1e-15);
  std::vector<double> e{0.2, 0.1, 0.05}, e2{0.04, 0.01, 0.0025};
  EXPECT_NEAR(loglog_slope(e, e2), 2.0, 1e-12);
}

TEST(Stats, KolmogorovSmirnov) {
  auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_NEAR(ks_distance({0.5}, uniform), 0.5, 1e-15);
  EXPECT_NEAR(ks_distance({0.25, 0.75}, uniform), 0.25, 1e-15);
}

TEST(Campaign, RegimeNames) {
  for (auto r : {Regime::I, Regime::II, Regime::III, Regime::IVCritical, Regime::IVSmallNu, Regime::ApproxOrder,
                 Regime::Linearization, Regime::Density, Regime::Birkhoff})
    EXPECT_EQ(parse_regime(regime_name(r)), r);
  EXPECT_FALSE(parse_regime("V").has_value());
}

TEST(Campaign, Defaults) {
  Campaign c;
  c.regime = Regime::II;
  c.epsilon = 0.1;
  c.sigma = 0.01;
  EXPECT_TRUE(resolve_campaign(c).empty());
  EXPECT_NEAR(c.nu, 0.01, 1e-15);
  EXPECT_EQ(c.slow_horizon, 1.0);

  Campaign iv;
  iv.regime = Regime::IVCritical;
  iv.epsilon = 0.1;
  iv.dt = 0.01;
  EXPECT_TRUE(resolve_campaign(iv).empty());
  EXPECT_EQ(iv.nu, 0.0);
  EXPECT_NEAR(iv.sigma, 0.01, 1e-15);
  EXPECT_EQ(iv.slow_horizon, 50.0);
}

TEST(Campaign, GatesReportEveryViolation) {
  Campaign c;
  c.regime = Regime::II;
  c.epsilon = 0.1;
  c.sigma = -0.1;
  c.samples = 0;
  auto v = resolve_campaign(c);
  EXPECT_GE(v.size(), 3u);
  EXPECT_THROW(run_campaign(c), std::invalid_argument);

  Campaign iii;
  iii.regime = Regime::III;
  iii.epsilon = 0.1;
  iii.sigma = 0.01;
  auto w = resolve_campaign(iii);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("σ ≤ ν/10"), std::string::npos);

  Campaign small;
  small.regime = Regime::IVSmallNu;
  small.epsilon = 0.1;
  small.nu = 0.01;
  small.dt = 0.01;
  auto s = resolve_campaign(small);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NE(s[0].find("0 < ν ≤ σ/10"), std::string::npos);
}

TEST(Summary, RegimeIPredicate) {
  RegimeReport rep;
  rep.campaign.regime = Regime::I;
  rep.campaign.nu = -0.5;
  for (std::size_t i = 0; i < 4; ++i) {
    SampleRecord r;
    r.sample_index = i;
    r.lambda = -0.55 + 0.01 * double(i);
    rep.samples.push_back(r);
  }
  summarize(rep);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.find("all_lambda_leq_nu")->value, 1.0);
  rep.samples[2].lambda = -0.47;
  summarize(rep);
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.find("all_lambda_leq_nu")->value, 0.75);
  EXPECT_FALSE(rep.find("max_lambda")->pass.has_value());
}

TEST(Summary, RegimeIIExcludedSamples) {
  RegimeReport rep;
  rep.campaign.regime = Regime::II;
  rep.campaign.nu = 0.01;
  rep.campaign.omega0_horizon = 0.01;
  for (std::size_t i = 0; i < 10; ++i) {
    SampleRecord r;
    r.sample_index = i;
    r.lambda = i < 5 ? 0.005 : -0.01;
    r.event_omega0 = false;
    rep.samples.push_back(r);
  }
  rep.samples[9].excluded = true;
  rep.samples[9].lambda.reset();
  summarize(rep);
  EXPECT_NEAR(rep.find("fraction_lambda_gt_nu_over_8")->value, 5.0 / 9.0, 1e-15);
  EXPECT_FALSE(*rep.find("excluded_fraction")->pass);
  EXPECT_FALSE(*rep.find("omega0_conditional_fraction_lambda_gt_nu_over_8")->pass);
  EXPECT_FALSE(rep.passed);
}

namespace {
Campaign small_regime_I() {
  Campaign c;
  c.regime = Regime::I;
  c.nu = -0.5;
  c.sigma = 0.1;
  c.n_modes = 16;
  c.dt = 1e-2;
  c.slow_horizon = 2.0;
  c.samples = 12;
  c.seed = 5;
  return c;
}

std::string csv(const RegimeReport& r) {
  std::ostringstream o;
  write_samples_csv(o, r);
  write_summary_csv(o, r);
  return o.str();
}
}  // namespace

TEST(Campaign, ReportsAreDeterministic) {
  auto c = small_regime_I();
  c.threads = 1;
  auto a = run_campaign(c);
  c.threads = 3;
  auto b = run_campaign(c);
  EXPECT_EQ(csv(a), csv(b));
  c.seed = 6;
  EXPECT_NE(csv(a), csv(run_campaign(c)));
}

TEST(Campaign, RegimeIAllBelowNu) {
  auto rep = run_campaign(small_regime_I());
  EXPECT_TRUE(rep.passed);
  for (const auto& s : rep.samples) EXPECT_LE(*s.lambda, -0.48);
}

TEST(Campaign, RegimeIIINoiselessIsDeterministic) {
  Campaign c;
  c.regime = Regime::III;
  c.epsilon = 0.1;
  c.sigma = 0.0;
  c.n_modes = 16;
  c.dt = 0.01;
  c.samples = 3;
  auto rep = run_campaign(c);
  for (const auto& s : rep.samples) EXPECT_NEAR(*s.lambda, 0.01, 1e-8);
  EXPECT_TRUE(rep.passed);
}

TEST(Campaign, RegimeIIIPositiveAtHalfAndFullHorizon) {
  for (double T : {0.5, 1.0}) {
    Campaign c;
    c.regime = Regime::III;
    c.epsilon = 0.1;
    c.sigma = 1e-4;
    c.n_modes = 16;
    c.dt = 0.01;
    c.slow_horizon = T;
    c.samples = 20;
    auto rep = run_campaign(c);
    for (const auto& s : rep.samples) EXPECT_GT(*s.lambda, 0.0) << "T = " << T;
  }
}

TEST(Campaign, RegimeIIPositiveFractionAcrossNoiseRatios) {
  for (double ratio : {1.0, 2.0}) {
    Campaign c;
    c.regime = Regime::II;
    c.epsilon = 0.1;
    c.sigma = 0.01 * ratio;
    c.n_modes = 16;
    c.dt = 0.01;
    c.samples = 100;
    c.omega0_events = 1;
    c.omega0_scan_limit = 2000;
    auto rep = run_campaign(c);
    const auto* row = rep.find("fraction_lambda_gt_nu_over_8");
    ASSERT_NE(row, nullptr);
    EXPECT_GT(*row->ci_low, 0.0) << "sigma/nu = " << ratio;
  }
}

TEST(Campaign, RegimeIVNegative) {
  for (Regime r : {Regime::IVCritical, Regime::IVSmallNu}) {
    Campaign c;
    c.regime = r;
    c.epsilon = 0.1;
    if (r == Regime::IVSmallNu) c.nu = 0.0005;
    c.n_modes = 16;
    c.dt = 0.01;
    c.slow_horizon = 10.0;
    c.samples = 20;
    auto rep = run_campaign(c);
    EXPECT_GE(rep.find("fraction_lambda_negative")->value, 0.9);
    double ratio = rep.find("median_over_reference")->value;
    EXPECT_GT(ratio, 0.5);
    EXPECT_LT(ratio, 2.0);
  }
}

TEST(Campaign, DensityAndBirkhoffSmall) {
  Campaign d;
  d.regime = Regime::Density;
  d.samples = 200;
  auto rd = run_campaign(d);
  EXPECT_EQ(rd.samples.size(), 200u);
  EXPECT_NEAR(rd.find("exact_a_squared")->value, 0.477989, 1e-6);

  Campaign b;
  b.regime = Regime::Birkhoff;
  b.samples = 50;
  b.slow_horizon = 20.0;
  auto rb = run_campaign(b);
  EXPECT_GE(rb.find("fraction_birkhoff_geq_quarter_Ea2")->value, 0.9);
}

TEST(Campaign, GridSampleIndicesAreDisjoint) {
  Campaign c;
  c.regime = Regime::Linearization;
  c.epsilon_grid = {0.4, 0.2, 0.1};
  c.samples = 4;
  c.n_modes = 8;
  c.dt = 0.01;
  auto rep = run_campaign(c);
  ASSERT_EQ(rep.samples.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(rep.samples[i].sample_index, i);
  EXPECT_EQ(*rep.samples[5].epsilon, 0.2);
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hit[i]++; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 2, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }), std::runtime_error);
}
