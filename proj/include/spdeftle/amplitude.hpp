#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spdeftle/ftle.hpp"
#include "spdeftle/noise.hpp"

namespace spdeftle {

enum class AmplitudeVariant { A1, A2, A3, EAE };

std::string_view variant_name(AmplitudeVariant v);

/// db = (alpha b + c_F b^3) dT + noise_amp dbeta.
struct AmplitudeSpec {
  double linear = 0.0;
  double cubic = -1.0;
  double noise_amp = 0.0;
  AmplitudeVariant variant = AmplitudeVariant::EAE;

  /// Throws std::invalid_argument unless cubic < 0 and noise_amp >= 0.
  void validate() const;
};

/// alpha = 1, noise = sigma/nu.
AmplitudeSpec variant_a1(double nu, double sigma, double cubic);
/// alpha = 0, noise = 1.
AmplitudeSpec variant_a2(double cubic);
/// alpha = nu/sigma, noise = 1.
AmplitudeSpec variant_a3(double nu, double sigma, double cubic);
/// alpha = nu/eps^2, noise = sigma/eps^2.
AmplitudeSpec variant_eae(double nu, double sigma, double epsilon, double cubic);

/// Euler-Maruyama on the given increments: returns increments.size() + 1 values.
/// Throws std::runtime_error if |b| exceeds 1e6.
std::vector<double> integrate_sde(const AmplitudeSpec& spec, double b0, std::span<const double> increments, double dT);
/// Integrates over [0, T]; T must be a whole number of slow steps within the path horizon.
std::vector<double> integrate_sde(const AmplitudeSpec& spec, double b0, const SlowPath& path, double T);

struct AttractorSample {
  double value = 0.0;
  double pullback_horizon = 0.0;
  double residual = 0.0;
  bool converged = false;
};

struct PullbackOptions {
  double bracket = 10.0;
  double tolerance = 1e-8;
  double initial_horizon = 8.0;
  double max_horizon = 1024.0;
};

/// Pullback to slow time origin_step*dT from brackets -R, +R started S earlier,
/// doubling S until the gap is below tolerance or S exceeds max_horizon.
AttractorSample pullback_attractor(const AmplitudeSpec& spec, const TwoSidedSlowPath& path,
                                   std::int64_t origin_step = 0, const PullbackOptions& opt = {});

/// Stationary density of the amplitude SDE, normalized by quadrature.
class InvariantDensity {
 public:
  explicit InvariantDensity(const AmplitudeSpec& spec);

  double unnormalized(double x) const;
  double operator()(double x) const { return unnormalized(x) / norm_; }
  double normalizer() const { return norm_; }
  double cutoff() const { return cutoff_; }
  double moment(int p) const;
  double cdf(double x) const;

 private:
  double a_ = 0.0, c_ = 0.0;  // exponent a x^2 + c x^4
  double norm_ = 1.0;
  double cutoff_ = 6.0;
  std::vector<double> cdf_table_;
  double cdf_h_ = 0.0;
};

/// Normalized stationary density at x.
double invariant_density(const AmplitudeSpec& spec, double x);

/// (1/T) int_0^T a^2 by the trapezoid rule with T = (size-1) dT.
double birkhoff_average(std::span<const double> trajectory, double dT);

/// lambda_T = alpha + (1/T) int_0^T 3 c_F a^2.
FtleEstimate sde_ftle(const AmplitudeSpec& spec, std::span<const double> trajectory, double dT);

/// eta = delta / (2 (1 + noise_amp)).
double omega0_eta(const AmplitudeSpec& spec, double delta = 0.5);
/// |a0| < eta and sup_{t <= T} |beta(t)| <= eta/2, beta the running sum of the slow
/// increments.  Variant a1 only.
bool event_omega0(const AmplitudeSpec& spec, double a0, const SlowPath& path, double T, double delta = 0.5);

}  // namespace spdeftle
