#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "spdeftle/spectral.hpp"

namespace spdeftle {

// Coefficient-level kernels used by the integrators; the SpectralField
// overloads below validate and forward to these.

/// Galerkin coefficients of F(u): -u^3 (values models) or d/dx (u_x^3) in weak form.
Eigen::VectorXd cubic_term(const SpectralSpace& space, const Eigen::VectorXd& u);
/// DF(u) h, linear in h.
Eigen::VectorXd cubic_derivative(const SpectralSpace& space, const Eigen::VectorXd& u, const Eigen::VectorXd& h);
/// Matrix of DF(u) on the truncated space; column l equals cubic_derivative(u, e_l).
Eigen::MatrixXd tangent_matrix(const SpectralSpace& space, const Eigen::VectorXd& u);

SpectralField evaluate_F(const SpectralSpace& space, const SpectralField& u);
SpectralField evaluate_DF(const SpectralSpace& space, const SpectralField& u, const SpectralField& h);

/// c_F = <F(e), e> for the kernel mode e.  Throws std::domain_error if c_F >= 0.
double cubic_coefficient(const SpectralSpace& space);

struct DissipativityReport {
  std::size_t trials = 0;
  double max_inner = 0.0;      // max <F(u)-F(v), u-v>
  double c_est = 0.0;          // largest c with <F(u)-F(v),u-v> <= -c ||u-v||_X^4 on all trials
  double max_residual = 0.0;   // max <F(u)-F(v),u-v> + c_est ||u-v||_X^4
  bool passed = false;
};

/// Random pairs drawn with random_field from the given seed.
DissipativityReport check_dissipativity(const SpectralSpace& space, std::size_t trials, std::uint64_t seed = 1);

/// I.i.d. normal coefficients scaled by 1/m (m the wavenumber label, m = 0 treated as 1).
SpectralField random_field(const SpectralSpace& space, std::uint64_t seed, std::uint64_t index);

}  // namespace spdeftle
