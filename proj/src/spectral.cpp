#include "spdeftle/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spdeftle {

QuadratureGrid::QuadratureGrid(double len, std::size_t m) : length(len), intervals(m) {
  if (m < 1) throw std::invalid_argument("quadrature grid needs at least one interval");
  nodes.resize(Eigen::Index(m + 1));
  weights.setConstant(Eigen::Index(m + 1), len / double(m));
  for (std::size_t j = 0; j <= m; ++j) nodes[Eigen::Index(j)] = len * double(j) / double(m);
  weights[0] *= 0.5;
  weights[Eigen::Index(m)] *= 0.5;
}

SpectralField::SpectralField(ModelId m, Eigen::VectorXd c) : model(m), coeffs(std::move(c)) {
  if (!coeffs.allFinite()) throw std::domain_error("spectral field has non-finite coefficients");
}

SpectralSpace::SpectralSpace(ModelSpec model, std::size_t n_modes, std::size_t grid_intervals)
    : model_(std::move(model)), n_(n_modes) {
  if (n_ < 1) throw std::invalid_argument("n_modes must be >= 1");
  int m0 = model_.first_wavenumber;
  int mk = model_.kernel_wavenumber;
  if (mk < m0 || mk > m0 + int(n_) - 1)
    throw std::invalid_argument("kernel mode not retained with n_modes = " + std::to_string(n_));
  kernel_ = std::size_t(mk - m0);

  std::size_t m_grid = grid_intervals == 0 ? 3 * n_ : grid_intervals;
  if (2 * m_grid < 3 * n_)
    throw std::invalid_argument("grid too coarse: need M >= ceil(3N/2)");
  grid_ = std::make_shared<const QuadratureGrid>(model_.domain_length, m_grid);

  const auto n = Eigen::Index(n_);
  lambda_.resize(n);
  q_.resize(n);
  drift_w_.resize(n);
  wavenumbers_.resize(n);
  norm_c_.resize(n);
  const double len = model_.domain_length;
  for (Eigen::Index k = 0; k < n; ++k) {
    int m = m0 + int(k);
    lambda_[k] = model_.eigenvalue(m);
    q_[k] = model_.noise_amplitude(m);
    drift_w_[k] = model_.drift_weight(m);
    wavenumbers_[k] = model_.wavenumber(m);
    norm_c_[k] = (m == 0) ? std::sqrt(1.0 / len) : std::sqrt(2.0 / len);
  }
  lambda_[Eigen::Index(kernel_)] = 0.0;  // exact zero regardless of rounding in the formula
  gap_ = model_.spectral_gap();

  const auto& x = grid_->nodes;
  const Eigen::Index nx = x.size();
  phi_.resize(nx, n);
  dphi_.resize(nx, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double qk = wavenumbers_[k];
    double c = norm_c_[k];
    for (Eigen::Index j = 0; j < nx; ++j) {
      double a = qk * x[j];
      if (model_.basis == BasisKind::Sine) {
        phi_(j, k) = c * std::sin(a);
        dphi_(j, k) = c * qk * std::cos(a);
      } else {
        phi_(j, k) = c * std::cos(a);
        dphi_(j, k) = -c * qk * std::sin(a);
      }
    }
  }
  phi_w_t_ = phi_.transpose() * grid_->weights.asDiagonal();
  dphi_w_t_ = dphi_.transpose() * grid_->weights.asDiagonal();

  const Eigen::Index p_max = 2 * (m0 + n - 1);
  cos_w_.resize(p_max + 1, nx);
  for (Eigen::Index p = 0; p <= p_max; ++p)
    for (Eigen::Index j = 0; j < nx; ++j)
      cos_w_(p, j) = grid_->weights[j] * std::cos(double(p) * std::numbers::pi * x[j] / len);
}

Eigen::MatrixXd SpectralSpace::galerkin_matrix(const Eigen::VectorXd& w, bool derivative_pairing) const {
  if (w.size() != grid_->nodes.size()) throw std::invalid_argument("galerkin_matrix: weight size mismatch");
  // product-to-sum: e_k e_l (or e_k' e_l') is a combination of cos((m_k -+ m_l) pi x / L)
  const Eigen::VectorXd g = cos_w_ * w;
  const auto n = Eigen::Index(n_);
  const int m0 = model_.first_wavenumber;
  // sign of the cos(m_k + m_l) term: sin*sin -> -, cos*cos -> +
  const bool sine_values = (model_.basis == BasisKind::Sine) != derivative_pairing;
  const double s = sine_values ? -1.0 : 1.0;
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    int ml = m0 + int(l);
    double fl = norm_c_[l] * (derivative_pairing ? wavenumbers_[l] : 1.0);
    for (Eigen::Index k = l; k < n; ++k) {
      int mk = m0 + int(k);
      double fk = norm_c_[k] * (derivative_pairing ? wavenumbers_[k] : 1.0);
      double v = 0.5 * fk * fl * (g[std::abs(mk - ml)] + s * g[mk + ml]);
      out(k, l) = v;
      out(l, k) = v;
    }
  }
  return out;
}

SpectralField SpectralSpace::zero() const {
  return SpectralField(model_.id, Eigen::VectorXd::Zero(Eigen::Index(n_)));
}

SpectralField SpectralSpace::unit(std::size_t k) const {
  if (k >= n_) throw std::out_of_range("mode index out of range");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(Eigen::Index(n_));
  c[Eigen::Index(k)] = 1.0;
  return SpectralField(model_.id, std::move(c));
}

void SpectralSpace::check(const SpectralField& f) const {
  if (f.model != model_.id)
    throw std::invalid_argument("field belongs to model " + std::string(model_name(f.model)) + ", expected " +
                                model_.name);
  if (f.n_modes() != n_)
    throw std::invalid_argument("field has " + std::to_string(f.n_modes()) + " modes, basis has " +
                                std::to_string(n_));
}

PhysicalField to_physical(const SpectralSpace& space, const SpectralField& f) {
  space.check(f);
  return PhysicalField{space.grid(), space.basis() * f.coeffs};
}

PhysicalField to_physical_derivative(const SpectralSpace& space, const SpectralField& f) {
  space.check(f);
  return PhysicalField{space.grid(), space.basis_derivative() * f.coeffs};
}

SpectralField to_spectral(const SpectralSpace& space, const PhysicalField& g) {
  const auto& grid = space.grid();
  if (!g.grid || (g.grid != grid && (g.grid->intervals != grid->intervals || g.grid->length != grid->length)))
    throw std::invalid_argument("physical field is not on the model's quadrature grid");
  if (g.values.size() != grid->nodes.size()) throw std::invalid_argument("physical field size mismatch");
  return SpectralField(space.id(), space.analysis() * g.values);
}

double project_kernel(const SpectralSpace& space, const SpectralField& f) {
  space.check(f);
  return f.coeffs[Eigen::Index(space.kernel_index())];
}

SpectralField stable_part(const SpectralSpace& space, const SpectralField& f) {
  space.check(f);
  SpectralField out = f;
  out.coeffs[Eigen::Index(space.kernel_index())] = 0.0;
  return out;
}

double norm_h(const SpectralField& f) { return f.coeffs.norm(); }

namespace {
double l4(const QuadratureGrid& grid, const Eigen::VectorXd& v) {
  double s = grid.weights.dot(v.array().square().square().matrix());
  return std::pow(s, 0.25);
}
}  // namespace

double norm_x(const SpectralSpace& space, const SpectralField& f) {
  space.check(f);
  if (space.model().x_space == XSpace::W14) return l4(*space.grid(), space.basis_derivative() * f.coeffs);
  return l4(*space.grid(), space.basis() * f.coeffs);
}

double norm_x_full(const SpectralSpace& space, const SpectralField& f) {
  space.check(f);
  double v = std::pow(l4(*space.grid(), space.basis() * f.coeffs), 4);
  if (space.model().x_space == XSpace::W14) v += std::pow(l4(*space.grid(), space.basis_derivative() * f.coeffs), 4);
  return std::pow(v, 0.25);
}

double norm_halpha(const SpectralSpace& space, const SpectralField& f, double alpha) {
  space.check(f);
  if (!(alpha >= -1.0 && alpha <= 1.0)) throw std::invalid_argument("norm_halpha: alpha must lie in [-1, 1]");
  Eigen::ArrayXd scale = (1.0 - space.eigenvalues().array()).pow(alpha);
  return (f.coeffs.array() * scale).matrix().norm();
}

SpectralField apply_semigroup(const SpectralSpace& space, const SpectralField& f, double t, double nu) {
  space.check(f);
  if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: t must be >= 0");
  Eigen::ArrayXd rate = space.eigenvalues().array() + nu * space.drift_weights().array();
  return SpectralField(f.model, (f.coeffs.array() * (t * rate).exp()).matrix());
}

double inner_product(const SpectralField& a, const SpectralField& b) {
  if (a.model != b.model || a.n_modes() != b.n_modes()) throw std::invalid_argument("inner_product: field mismatch");
  return a.coeffs.dot(b.coeffs);
}

}  // namespace spdeftle
