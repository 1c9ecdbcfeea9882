#include "spdeftle/spde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spdeftle/models.hpp"

namespace spdeftle {

namespace {

constexpr double kBlowUpSq = 1e12;  // ||u|| > 1e6
constexpr std::size_t kRenormEvery = 32;

void guard(const Eigen::VectorXd& u, std::size_t step) {
  if (!(u.squaredNorm() <= kBlowUpSq))
    throw std::runtime_error("spde: ||u|| exceeded 1e6 at step " + std::to_string(step));
}

std::size_t checked_horizon(const SpdeParams& p, const WienerPath& path, double t) {
  std::size_t n = steps_for(t, p.dt);
  if (n > path.n_steps()) throw std::out_of_range("spde: horizon beyond the noise path");
  if (path.n_modes() != p.space->n_modes()) throw std::invalid_argument("spde: noise path has the wrong mode count");
  if (std::abs(path.dt() - p.dt) > 1e-15 * p.dt) throw std::invalid_argument("spde: noise path dt differs from dt");
  return n;
}

}  // namespace

std::size_t steps_for(double t, double dt) {
  if (!(t >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("horizon must be >= 0 and dt > 0");
  double r = t / dt;
  double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw std::invalid_argument("horizon " + std::to_string(t) + " is not a whole number of steps of " +
                                std::to_string(dt));
  return std::size_t(n);
}

void SpdeParams::validate() const {
  if (!space) throw std::invalid_argument("spde params: no model space");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!std::isfinite(nu)) throw std::invalid_argument("nu must be finite");
  steps_for(horizon, dt);
}

std::size_t SpdeParams::n_steps() const { return steps_for(horizon, dt); }

double SpdeParams::stiffness() const { return dt * space->eigenvalues().cwiseAbs().maxCoeff(); }

SpdeStepper::SpdeStepper(const SpdeParams& p)
    : space_(p.space), sigma_(p.sigma), dt_(p.dt), nonlinear_(p.nonlinear) {
  p.validate();
  Eigen::VectorXd rates = space_->eigenvalues() + p.nu * space_->drift_weights();
  ou_ = ou_step(rates, space_->noise_spectrum(), dt_);
}

void SpdeStepper::step(Eigen::VectorXd& u, const Eigen::VectorXd& z) const {
  if (nonlinear_) u += dt_ * cubic_term(*space_, u);
  u.array() *= ou_.decay.array();
  if (sigma_ != 0.0) u.array() += sigma_ * ou_.scale.array() * z.array();
}

void SpdeStepper::tangent_step(const Eigen::VectorXd& u, Eigen::VectorXd& v) const {
  if (nonlinear_) v += dt_ * cubic_derivative(*space_, u, v);
  v.array() *= ou_.decay.array();
}

void SpdeStepper::tangent_step(const Eigen::VectorXd& u, Eigen::MatrixXd& V) const {
  if (nonlinear_) {
    Eigen::MatrixXd jv = tangent_matrix(*space_, u) * V;
    V += dt_ * jv;
  }
  V.array().colwise() *= ou_.decay.array();
}

FieldTrajectory integrate_spde(const SpdeParams& p, const SpectralField& u0, const WienerPath& path,
                               std::size_t store_every) {
  p.validate();
  p.space->check(u0);
  if (store_every < 1) throw std::invalid_argument("integrate_spde: store_every must be >= 1");
  const std::size_t n = checked_horizon(p, path, p.horizon);
  SpdeStepper st(p);
  FieldTrajectory tr;
  tr.model = u0.model;
  tr.dt = p.dt;
  tr.stride = store_every;
  tr.states.resize(Eigen::Index(p.space->n_modes()), Eigen::Index(n / store_every + 1));
  Eigen::VectorXd u = u0.coeffs;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(u.size());
  tr.states.col(0) = u;
  for (std::size_t i = 0; i < n; ++i) {
    if (p.sigma != 0.0) path.normals(i, z);
    st.step(u, z);
    guard(u, i + 1);
    if ((i + 1) % store_every == 0) tr.states.col(Eigen::Index((i + 1) / store_every)) = u;
  }
  return tr;
}

namespace {
std::size_t trajectory_steps(const SpdeParams& p, const FieldTrajectory& tr) {
  if (tr.stride != 1) throw std::invalid_argument("first-variation needs the trajectory at every step");
  if (tr.states.rows() != Eigen::Index(p.space->n_modes())) throw std::invalid_argument("trajectory size mismatch");
  std::size_t n = p.n_steps();
  if (tr.size() < n + 1) throw std::out_of_range("trajectory shorter than the horizon");
  return n;
}
}  // namespace

SpectralField integrate_variation(const SpdeParams& p, const FieldTrajectory& tr, const SpectralField& v0) {
  p.validate();
  p.space->check(v0);
  const std::size_t n = trajectory_steps(p, tr);
  SpdeStepper st(p);
  Eigen::VectorXd v = v0.coeffs;
  for (std::size_t i = 0; i < n; ++i) st.tangent_step(tr.states.col(Eigen::Index(i)), v);
  return SpectralField(v0.model, std::move(v));
}

Eigen::MatrixXd monodromy(const SpdeParams& p, const FieldTrajectory& tr) {
  p.validate();
  const std::size_t n = trajectory_steps(p, tr);
  if (p.space->n_modes() > 256) throw std::invalid_argument("monodromy: full assembly limited to N <= 256");
  SpdeStepper st(p);
  const auto N = Eigen::Index(p.space->n_modes());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(N, N);
  for (std::size_t i = 0; i < n; ++i) st.tangent_step(tr.states.col(Eigen::Index(i)), V);
  return V;
}

SingularValue top_singular_value(const Eigen::MatrixXd& m, SvdChoice choice) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("top_singular_value: empty matrix");
  if (!m.allFinite()) throw std::domain_error("top_singular_value: non-finite matrix entries");
  SingularValue out;
  bool full = choice == SvdChoice::FullSvd || (choice == SvdChoice::Auto && m.cols() <= 128);
  if (full) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    out.value = s[0];
    out.method = NormMethod::FullSvd;
    double smin = s[s.size() - 1];
    out.condition = smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
    return out;
  }
  out.method = NormMethod::PowerIteration;
  // block power iteration on M^T M with Rayleigh-Ritz: a single vector stalls when the top
  // two singular values nearly coincide, a block of b converges at rate (s_{b+1}/s_1)^2
  const Eigen::Index n = m.cols();
  const Eigen::Index b = std::min<Eigen::Index>(n, 8);
  Eigen::MatrixXd X(n, b);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < b; ++j) X(i, j) = std::sin(1.0 + double(i) * (1.0 + double(j)) + double(j));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  X = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
  for (int it = 1; it <= 500; ++it) {
    out.iterations = it;
    Eigen::MatrixXd Y = m * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Y.transpose() * Y);
    const double theta = std::max(0.0, ritz.eigenvalues()[b - 1]);
    out.value = std::sqrt(theta);
    if (theta == 0.0) break;
    X = X * ritz.eigenvectors();  // ascending Ritz order, top vector last
    Y = Y * ritz.eigenvectors();
    Eigen::MatrixXd W = m.transpose() * Y;
    double residual = (W.col(b - 1) - theta * X.col(b - 1)).norm();
    if (residual <= 1e-8 * theta) break;
    qr.compute(W);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
  }
  return out;
}

namespace {
FtleEstimate finish(const Eigen::MatrixXd& V, double log_scale, double t, const char* storage) {
  SingularValue sv = top_singular_value(V);
  FtleEstimate est;
  est.horizon = t;
  est.log_norm = std::log(sv.value) + log_scale;
  est.lambda = est.log_norm / t;
  est.monodromy_norm = std::exp(est.log_norm);
  est.method = sv.method;
  est.condition = sv.condition;
  est.storage = storage;
  return est;
}
}  // namespace

FtleEstimate spde_ftle(const SpdeParams& p, const SpectralField& u0, const WienerPath& path, double t) {
  p.validate();
  p.space->check(u0);
  if (!(t > 0.0)) throw std::invalid_argument("spde_ftle: t must be > 0");
  const std::size_t n = checked_horizon(p, path, t);
  SpdeStepper st(p);
  const auto N = Eigen::Index(p.space->n_modes());
  Eigen::VectorXd u = u0.coeffs;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(N);
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(N, N);
  double log_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    st.tangent_step(u, V);
    if (p.sigma != 0.0) path.normals(i, z);
    st.step(u, z);
    guard(u, i + 1);
    if ((i + 1) % kRenormEvery == 0) {
      double s = V.norm();
      if (s > 0.0 && std::isfinite(s)) {
        V /= s;
        log_scale += std::log(s);
      }
    }
  }
  return finish(V, log_scale, t, "fused");
}

FtleEstimate spde_ftle_stored(const SpdeParams& p, const FieldTrajectory& tr, double t) {
  SpdeParams q = p;
  q.horizon = t;
  return finish(monodromy(q, tr), 0.0, t, "stored");
}

ApproximationResult approximation_error(const SpdeParams& p, double b0, const WienerPath& path) {
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(Eigen::Index(p.space->n_modes()));
  u0[Eigen::Index(p.space->kernel_index())] = p.epsilon * b0;
  return approximation_error(p, SpectralField(p.space->id(), u0), b0, path);
}

namespace {
AmplitudeSpec coupled_amplitude(const SpdeParams& p, bool noise) {
  double e2 = p.epsilon * p.epsilon;
  AmplitudeSpec ae;
  ae.linear = p.nu / e2;
  ae.cubic = p.nonlinear ? cubic_coefficient(*p.space) : 0.0;
  ae.noise_amp = noise ? p.sigma / e2 : 0.0;
  ae.variant = AmplitudeVariant::EAE;
  return ae;
}
}  // namespace

ApproximationResult approximation_error(const SpdeParams& p, const SpectralField& u0, double b0,
                                        const WienerPath& path) {
  p.validate();
  p.space->check(u0);
  const std::size_t n = checked_horizon(p, path, p.horizon);
  const SpectralSpace& sp = *p.space;
  const auto kc = Eigen::Index(sp.kernel_index());
  const AmplitudeSpec ae = coupled_amplitude(p, true);
  SlowPath slow = slow_rescale(path, p.epsilon, sp.kernel_index());
  std::vector<double> b = integrate_sde(ae, b0, std::span<const double>(slow.increments.data(), n), slow.dT);

  SpdeStepper st(p);
  OuStep zou = ou_step(sp.eigenvalues(), path.noise_spectrum(), p.dt);
  Eigen::VectorXd u = u0.coeffs;
  Eigen::VectorXd Z = Eigen::VectorXd::Zero(u.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(u.size());
  ApproximationResult r;
  for (std::size_t i = 0;; ++i) {
    double uc = u[kc];
    double stable2 = u.squaredNorm() - uc * uc;
    double kerr = uc - p.epsilon * b[i];
    r.error_sup = std::max(r.error_sup, std::sqrt(std::max(0.0, stable2) + kerr * kerr));
    r.stable_sup = std::max(r.stable_sup, std::sqrt(std::max(0.0, stable2)));
    r.kernel_sup = std::max(r.kernel_sup, std::abs(kerr));
    r.amplitude_sup = std::max(r.amplitude_sup, std::abs(b[i]));
    double x = norm_x(sp, SpectralField(sp.id(), u - p.sigma * Z));
    double x4 = x * x * x * x;
    r.tilde_x4_integral += ((i == 0 || i == n) ? 0.5 : 1.0) * p.dt * x4;
    if (i == n) break;
    if (p.sigma != 0.0) path.normals(i, z);
    st.step(u, z);
    guard(u, i + 1);
    Z = (zou.decay.array() * Z.array() + zou.scale.array() * z.array()).matrix();
  }
  return r;
}

LinearizationResult linearization_error(const SpdeParams& p, double a0, const WienerPath& path, bool amplitude_noise) {
  p.validate();
  const std::size_t n = checked_horizon(p, path, p.horizon);
  const SpectralSpace& sp = *p.space;
  const auto kc = Eigen::Index(sp.kernel_index());
  const AmplitudeSpec ae = coupled_amplitude(p, amplitude_noise);
  SlowPath slow = slow_rescale(path, p.epsilon, sp.kernel_index());
  std::vector<double> b = integrate_sde(ae, a0, std::span<const double>(slow.increments.data(), n), slow.dT);
  const double dT = slow.dT;

  SpdeStepper st(p);
  // kernel factor of the tangent propagator, shared with phi so the F-free case matches exactly
  const double ec = st.propagator()[kc];
  const Eigen::ArrayXd half = (1.0 - sp.eigenvalues().array()).sqrt();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(Eigen::Index(sp.n_modes()));
  u[kc] = p.epsilon * a0;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(u.size());
  v[kc] = 1.0;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(u.size());
  double phi = 1.0;
  double l2 = 0.0;
  LinearizationResult r;
  for (std::size_t i = 0;; ++i) {
    double vc = v[kc];
    double s2 = std::max(0.0, v.squaredNorm() - vc * vc);
    double h2 = std::max(0.0, (v.array() * half).matrix().squaredNorm() - vc * vc * half[kc] * half[kc]);
    r.error_sup = std::max(r.error_sup, std::sqrt(s2 + (vc - phi) * (vc - phi)));
    r.stable_sup = std::max(r.stable_sup, std::sqrt(s2));
    r.kernel_sup = std::max(r.kernel_sup, std::abs(vc - phi));
    l2 += ((i == 0 || i == n) ? 0.5 : 1.0) * dT * h2;
    if (i == n) break;
    st.tangent_step(u, v);
    if (p.sigma != 0.0) path.normals(i, z);
    st.step(u, z);
    guard(u, i + 1);
    phi = ec * (phi + dT * 3.0 * ae.cubic * b[i] * b[i] * phi);
  }
  r.stable_l2_half = std::sqrt(l2);
  r.phi_final = phi;
  return r;
}

}  // namespace spdeftle
