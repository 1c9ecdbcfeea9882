#include "spdeftle/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spdeftle/rng.hpp"

namespace spdeftle {

namespace {

bool derivative_model(const SpectralSpace& s) { return s.model().x_space == XSpace::W14; }

void check_size(const SpectralSpace& s, const Eigen::VectorXd& v) {
  if (v.size() != Eigen::Index(s.n_modes())) throw std::invalid_argument("coefficient vector size mismatch");
}

}  // namespace

Eigen::VectorXd cubic_term(const SpectralSpace& space, const Eigen::VectorXd& u) {
  check_size(space, u);
  if (derivative_model(space)) {
    // <d/dx(h_x^3), e_k> = -<h_x^3, e_k'>; boundary terms vanish since e_k' = 0 at both ends
    Eigen::VectorXd hx = space.basis_derivative() * u;
    return -(space.analysis_derivative() * hx.array().cube().matrix());
  }
  Eigen::VectorXd v = space.basis() * u;
  return -(space.analysis() * v.array().cube().matrix());
}

Eigen::VectorXd cubic_derivative(const SpectralSpace& space, const Eigen::VectorXd& u, const Eigen::VectorXd& h) {
  check_size(space, u);
  check_size(space, h);
  if (derivative_model(space)) {
    Eigen::VectorXd ux = space.basis_derivative() * u;
    Eigen::VectorXd hx = space.basis_derivative() * h;
    return -(space.analysis_derivative() * (3.0 * ux.array().square() * hx.array()).matrix());
  }
  Eigen::VectorXd uv = space.basis() * u;
  Eigen::VectorXd hv = space.basis() * h;
  return -(space.analysis() * (3.0 * uv.array().square() * hv.array()).matrix());
}

Eigen::MatrixXd tangent_matrix(const SpectralSpace& space, const Eigen::VectorXd& u) {
  check_size(space, u);
  const bool deriv = derivative_model(space);
  Eigen::VectorXd g = (deriv ? space.basis_derivative() : space.basis()) * u;
  Eigen::VectorXd w = -3.0 * g.array().square();
  return space.galerkin_matrix(w, deriv);
}

SpectralField evaluate_F(const SpectralSpace& space, const SpectralField& u) {
  space.check(u);
  return SpectralField(u.model, cubic_term(space, u.coeffs));
}

SpectralField evaluate_DF(const SpectralSpace& space, const SpectralField& u, const SpectralField& h) {
  space.check(u);
  space.check(h);
  return SpectralField(u.model, cubic_derivative(space, u.coeffs, h.coeffs));
}

double cubic_coefficient(const SpectralSpace& space) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(Eigen::Index(space.n_modes()));
  e[Eigen::Index(space.kernel_index())] = 1.0;
  double c = cubic_term(space, e).dot(e);
  if (!(c < 0.0)) throw std::domain_error("cubic coefficient is not negative; nonlinearity is not a stable cubic");
  return c;
}

SpectralField random_field(const SpectralSpace& space, std::uint64_t seed, std::uint64_t index) {
  NormalKey key{seed, index, Stream::Test};
  const auto n = Eigen::Index(space.n_modes());
  Eigen::VectorXd c(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    int m = std::max(1, space.wavenumber_of(std::size_t(k)));
    c[k] = normal_at(key, 0, std::uint64_t(k)) / double(m);
  }
  return SpectralField(space.id(), std::move(c));
}

DissipativityReport check_dissipativity(const SpectralSpace& space, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_dissipativity: trials must be >= 1");
  DissipativityReport rep;
  rep.trials = trials;
  rep.max_inner = -std::numeric_limits<double>::infinity();
  std::vector<double> inner(trials), x4(trials);
  double c_est = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trials; ++i) {
    Eigen::VectorXd u = random_field(space, seed, 2 * i).coeffs;
    Eigen::VectorXd v = random_field(space, seed, 2 * i + 1).coeffs;
    Eigen::VectorXd d = u - v;
    inner[i] = (cubic_term(space, u) - cubic_term(space, v)).dot(d);
    x4[i] = std::pow(norm_x(space, SpectralField(space.id(), d)), 4);
    rep.max_inner = std::max(rep.max_inner, inner[i]);
    if (x4[i] > 0.0) c_est = std::min(c_est, -inner[i] / x4[i]);
  }
  rep.c_est = std::isfinite(c_est) ? c_est : 0.0;
  rep.max_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trials; ++i) rep.max_residual = std::max(rep.max_residual, inner[i] + rep.c_est * x4[i]);
  rep.passed = rep.max_inner <= 0.0 && rep.c_est > 0.0;
  return rep;
}

}  // namespace spdeftle
