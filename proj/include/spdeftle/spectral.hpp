#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>

#include "spdeftle/model_spec.hpp"

namespace spdeftle {

/// Uniform nodes x_j = j*L/M, j = 0..M, with trapezoid weights.
///
/// On [0, L] the trapezoid sum integrates cos(r*pi*x/L) exactly for 0 < r < 2M,
/// which covers every quartic product of retained modes when M > 2*m_max.
struct QuadratureGrid {
  double length = 0.0;
  std::size_t intervals = 0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  QuadratureGrid(double length, std::size_t intervals);
  std::size_t size() const { return intervals + 1; }
};

struct SpectralField {
  ModelId model = ModelId::AllenCahn;
  Eigen::VectorXd coeffs;

  SpectralField() = default;
  /// Throws std::domain_error on non-finite coefficients.
  SpectralField(ModelId model, Eigen::VectorXd coeffs);

  std::size_t n_modes() const { return static_cast<std::size_t>(coeffs.size()); }
};

/// Field snapshots as columns, every `stride` steps of size dt.
struct FieldTrajectory {
  ModelId model = ModelId::AllenCahn;
  double dt = 0.0;
  std::size_t stride = 1;
  Eigen::MatrixXd states;

  std::size_t size() const { return static_cast<std::size_t>(states.cols()); }
  SpectralField at(std::size_t i) const { return SpectralField(model, states.col(Eigen::Index(i))); }
};

struct PhysicalField {
  std::shared_ptr<const QuadratureGrid> grid;
  Eigen::VectorXd values;
};

/// Model discretized with N modes: eigenvalue tables, basis samples on the grid,
/// and the cosine table used for fast Galerkin matrices.
///
/// Array index k corresponds to wavenumber m = first_wavenumber + k.
class SpectralSpace {
 public:
  /// grid_intervals = 0 selects M = 3N.
  SpectralSpace(ModelSpec model, std::size_t n_modes, std::size_t grid_intervals = 0);

  const ModelSpec& model() const { return model_; }
  ModelId id() const { return model_.id; }
  std::size_t n_modes() const { return n_; }
  std::size_t kernel_index() const { return kernel_; }
  int wavenumber_of(std::size_t k) const { return model_.first_wavenumber + static_cast<int>(k); }
  double spectral_gap() const { return gap_; }

  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  const Eigen::VectorXd& noise_spectrum() const { return q_; }
  const Eigen::VectorXd& drift_weights() const { return drift_w_; }
  /// q_m for each array index
  const Eigen::VectorXd& wavenumbers() const { return wavenumbers_; }

  const std::shared_ptr<const QuadratureGrid>& grid() const { return grid_; }
  /// (M+1) x N, entry (j,k) = e_k(x_j)
  const Eigen::MatrixXd& basis() const { return phi_; }
  /// (M+1) x N, entry (j,k) = e_k'(x_j)
  const Eigen::MatrixXd& basis_derivative() const { return dphi_; }
  /// N x (M+1), quadrature-weighted transpose of basis()
  const Eigen::MatrixXd& analysis() const { return phi_w_t_; }
  const Eigen::MatrixXd& analysis_derivative() const { return dphi_w_t_; }

  /// G_kl = integral of W e_k e_l (derivative_pairing: W e_k' e_l') for W given on the nodes.
  Eigen::MatrixXd galerkin_matrix(const Eigen::VectorXd& weight_on_nodes, bool derivative_pairing) const;

  SpectralField zero() const;
  SpectralField unit(std::size_t k) const;
  SpectralField kernel_unit() const { return unit(kernel_); }

  /// Throws std::invalid_argument when f does not belong to this space.
  void check(const SpectralField& f) const;

 private:
  ModelSpec model_;
  std::size_t n_ = 0;
  std::size_t kernel_ = 0;
  double gap_ = 0.0;
  Eigen::VectorXd lambda_, q_, drift_w_, wavenumbers_, norm_c_;
  std::shared_ptr<const QuadratureGrid> grid_;
  Eigen::MatrixXd phi_, dphi_, phi_w_t_, dphi_w_t_;
  Eigen::MatrixXd cos_w_;  // (P+1) x (M+1), w_j cos(p pi x_j / L)
};

PhysicalField to_physical(const SpectralSpace& space, const SpectralField& f);
/// Derivative field sum_k c_k e_k'(x_j).
PhysicalField to_physical_derivative(const SpectralSpace& space, const SpectralField& f);
SpectralField to_spectral(const SpectralSpace& space, const PhysicalField& g);

double project_kernel(const SpectralSpace& space, const SpectralField& f);
SpectralField stable_part(const SpectralSpace& space, const SpectralField& f);

double norm_h(const SpectralField& f);
/// L4 norm of values, or for W14 models the L4 norm of the derivative (seminorm).
double norm_x(const SpectralSpace& space, const SpectralField& f);
/// Full W^{1,4} norm (||h||_4^4 + ||h_x||_4^4)^{1/4}; for L4 models equals norm_x.
double norm_x_full(const SpectralSpace& space, const SpectralField& f);
/// ||(1 - A)^alpha f||, alpha in [-1, 1].
double norm_halpha(const SpectralSpace& space, const SpectralField& f, double alpha);

/// Multiplies coefficient k by exp(t (lambda_k + nu w_k)).
SpectralField apply_semigroup(const SpectralSpace& space, const SpectralField& f, double t, double nu);

double inner_product(const SpectralField& a, const SpectralField& b);

}  // namespace spdeftle
