#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>

#include "spdeftle/amplitude.hpp"
#include "spdeftle/ftle.hpp"
#include "spdeftle/noise.hpp"
#include "spdeftle/spectral.hpp"

namespace spdeftle {

/// du = [A u + nu u + F(u)] dt + sigma dW on the truncated space.
struct SpdeParams {
  std::shared_ptr<const SpectralSpace> space;
  double nu = 0.0;
  double sigma = 0.0;
  double epsilon = 1.0;
  double dt = 1e-3;
  double horizon = 0.0;  // fast time
  bool nonlinear = true;

  void validate() const;
  /// horizon / dt; throws unless it is a whole number.
  std::size_t n_steps() const;
  /// dt * max |lambda_k| (bookkeeping only: the linear part is integrated exactly).
  double stiffness() const;
};

/// Number of steps of size dt in t; throws unless t is a whole number of steps.
std::size_t steps_for(double t, double dt);

/// One Lawson exponential-Euler step:
///   u <- E (u + dt F(u)) + sigma xi,   E = exp(dt (lambda + nu w)),
/// with xi the exact OU increment driven by the step's normals.
class SpdeStepper {
 public:
  explicit SpdeStepper(const SpdeParams& p);

  void step(Eigen::VectorXd& u, const Eigen::VectorXd& normals) const;
  /// v <- E (v + dt DF(u) v), u the state at the start of the step.
  void tangent_step(const Eigen::VectorXd& u, Eigen::VectorXd& v) const;
  void tangent_step(const Eigen::VectorXd& u, Eigen::MatrixXd& V) const;

  const Eigen::VectorXd& propagator() const { return ou_.decay; }
  const Eigen::VectorXd& noise_scale() const { return ou_.scale; }
  const SpectralSpace& space() const { return *space_; }

 private:
  std::shared_ptr<const SpectralSpace> space_;
  double sigma_, dt_;
  bool nonlinear_;
  OuStep ou_;
  mutable Eigen::MatrixXd work_;
};

/// Trajectory with a snapshot every store_every steps (including t = 0).
/// Throws std::runtime_error if ||u|| exceeds 1e6.
FieldTrajectory integrate_spde(const SpdeParams& params, const SpectralField& u0, const WienerPath& path,
                               std::size_t store_every = 1);

/// Tangent at the horizon; u_trajectory must hold every step.
SpectralField integrate_variation(const SpdeParams& params, const FieldTrajectory& u_trajectory,
                                  const SpectralField& v0);

/// Solution operator of the first-variation equation over the horizon (no renormalization).
Eigen::MatrixXd monodromy(const SpdeParams& params, const FieldTrajectory& u_trajectory);

enum class SvdChoice { Auto, FullSvd, PowerIteration };

struct SingularValue {
  double value = 0.0;
  NormMethod method = NormMethod::FullSvd;
  double condition = 0.0;
  int iterations = 0;
};

/// Largest singular value: full SVD for N <= 128 under Auto, otherwise block power
/// iteration (8 vectors, Rayleigh-Ritz) on M^T M until the top Ritz residual is
/// below 1e-8 relative, at most 500 iterations.
SingularValue top_singular_value(const Eigen::MatrixXd& m, SvdChoice choice = SvdChoice::Auto);

/// FTLE over fast time t, co-propagating u and the monodromy with periodic
/// renormalization so no trajectory is stored.
FtleEstimate spde_ftle(const SpdeParams& params, const SpectralField& u0, const WienerPath& path, double t);

/// FTLE from a stored trajectory via monodromy().
FtleEstimate spde_ftle_stored(const SpdeParams& params, const FieldTrajectory& u_trajectory, double t);

struct ApproximationResult {
  double error_sup = 0.0;          // sup_t ||u - eps b||
  double stable_sup = 0.0;         // sup_t ||P_s u||
  double kernel_sup = 0.0;         // sup_t |u_c - eps b|
  double tilde_x4_integral = 0.0;  // int_0^T ||u - sigma Z||_X^4 dt
  double amplitude_sup = 0.0;      // sup_T |b|
};

/// SPDE from u0 = eps b0 e against the amplitude equation from b0 on the same
/// noise (one fast step per slow step), sup over the step grid.
ApproximationResult approximation_error(const SpdeParams& params, double b0, const WienerPath& path);
ApproximationResult approximation_error(const SpdeParams& params, const SpectralField& u0, double b0,
                                        const WienerPath& path);

struct LinearizationResult {
  double error_sup = 0.0;         // sup_T ||V - phi e||
  double stable_sup = 0.0;        // sup_T ||P_s V||
  double stable_l2_half = 0.0;    // (int_0^T0 ||P_s V||_{1/2}^2 dT)^{1/2}
  double kernel_sup = 0.0;        // sup_T |V_c - phi|
  double phi_final = 0.0;
};

/// Tangent V with V(0) = e along u from u0 = eps a0 e, against phi' = (alpha + 3 c_F b^2) phi,
/// phi(0) = 1, along the amplitude solution b from a0.  amplitude_noise = false drops the
/// noise from the amplitude equation (u0 = 0 linearization around the origin).
LinearizationResult linearization_error(const SpdeParams& params, double a0, const WienerPath& path,
                                        bool amplitude_noise = true);

}  // namespace spdeftle
