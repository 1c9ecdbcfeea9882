#include "spdeftle/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spdeftle {

WienerPath::WienerPath(PathKey key, double dt, std::size_t n_steps, Eigen::VectorXd noise_spectrum)
    : key_(key), dt_(dt), n_steps_(n_steps), q_(std::move(noise_spectrum)) {
  if (!(dt > 0.0)) throw std::invalid_argument("wiener path: dt must be > 0");
  if (n_steps < 1) throw std::invalid_argument("wiener path: n_steps must be >= 1");
  if (q_.size() < 1 || (q_.array() < 0.0).any()) throw std::invalid_argument("wiener path: invalid noise spectrum");
  checked_u32(n_steps - 1, "step");
  checked_u32((std::uint64_t(q_.size()) - 1) / 2, "mode");
  checked_u32(key.sample_index, "sample index");
  sqrt_q_dt_ = (q_ * dt).cwiseSqrt();
}

WienerPath WienerPath::from_normals(Eigen::MatrixXd normals, double dt, Eigen::VectorXd noise_spectrum) {
  if (normals.cols() != noise_spectrum.size()) throw std::invalid_argument("from_normals: mode count mismatch");
  if (normals.rows() < 1 || !(dt > 0.0)) throw std::invalid_argument("from_normals: empty path or dt <= 0");
  WienerPath p;
  p.dt_ = dt;
  p.n_steps_ = std::size_t(normals.rows());
  p.q_ = std::move(noise_spectrum);
  p.sqrt_q_dt_ = (p.q_ * dt).cwiseSqrt();
  p.explicit_ = std::move(normals);
  return p;
}

void WienerPath::check_step(std::size_t step) const {
  if (step >= n_steps_)
    throw std::out_of_range("wiener path: step " + std::to_string(step) + " beyond horizon " +
                            std::to_string(n_steps_));
}

double WienerPath::normal(std::size_t step, std::size_t mode) const {
  check_step(step);
  if (mode >= n_modes()) throw std::out_of_range("wiener path: mode out of range");
  if (explicit_) return (*explicit_)(Eigen::Index(step), Eigen::Index(mode));
  return normal_at(NormalKey{key_.master_seed, key_.sample_index, Stream::Forward}, step, mode);
}

void WienerPath::normals(std::size_t step, Eigen::Ref<Eigen::VectorXd> out) const {
  check_step(step);
  const auto n = q_.size();
  if (out.size() != n) throw std::invalid_argument("wiener path: output size mismatch");
  if (explicit_) {
    out = explicit_->row(Eigen::Index(step)).transpose();
    return;
  }
  NormalKey key{key_.master_seed, key_.sample_index, Stream::Forward};
  for (Eigen::Index p = 0; 2 * p < n; ++p) {
    auto z = normal_pair(key, step, std::uint64_t(p));
    out[2 * p] = z[0];
    if (2 * p + 1 < n) out[2 * p + 1] = z[1];
  }
}

double WienerPath::increment(std::size_t step, std::size_t mode) const {
  return sqrt_q_dt_[Eigen::Index(mode)] * normal(step, mode);
}

Eigen::MatrixXd WienerPath::increments() const {
  Eigen::MatrixXd out(Eigen::Index(n_steps_), q_.size());
  Eigen::VectorXd z(q_.size());
  for (std::size_t i = 0; i < n_steps_; ++i) {
    normals(i, z);
    out.row(Eigen::Index(i)) = (sqrt_q_dt_.array() * z.array()).matrix().transpose();
  }
  return out;
}

WienerPath generate(std::uint64_t master_seed, std::uint64_t sample_index, double dt, std::size_t n_steps,
                    const SpectralSpace& space) {
  return WienerPath(PathKey{master_seed, sample_index}, dt, n_steps, space.noise_spectrum());
}

SlowPath slow_rescale(const WienerPath& path, double epsilon, std::size_t kernel_index, double slow_dt) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("slow_rescale: epsilon must be > 0");
  if (kernel_index >= path.n_modes()) throw std::out_of_range("slow_rescale: kernel index out of range");
  const double fast_per_slow = slow_dt / (path.dt() * epsilon * epsilon);
  const double k_round = std::round(fast_per_slow);
  if (k_round < 1.0 || std::abs(fast_per_slow - k_round) > 1e-9 * k_round)
    throw std::invalid_argument("slow_rescale: slow step is not an integer multiple of dt*eps^2 (ratio " +
                                std::to_string(fast_per_slow) + ")");
  const auto k = std::size_t(k_round);
  SlowPath out;
  out.epsilon = epsilon;
  out.dT = slow_dt;
  const std::size_t n_slow = path.n_steps() / k;
  out.increments.resize(n_slow);
  for (std::size_t j = 0; j < n_slow; ++j) {
    double s = 0.0;
    for (std::size_t i = j * k; i < (j + 1) * k; ++i) s += path.increment(i, kernel_index);
    out.increments[j] = epsilon * s;
  }
  return out;
}

SlowPath slow_rescale(const WienerPath& path, double epsilon, std::size_t kernel_index) {
  return slow_rescale(path, epsilon, kernel_index, path.dt() * epsilon * epsilon);
}

TwoSidedSlowPath::TwoSidedSlowPath(SlowPath forward, PathKey key, double past_variance)
    : forward_(std::move(forward)), past_key_{key.master_seed, key.sample_index, Stream::Past} {
  if (!(forward_.dT > 0.0)) throw std::invalid_argument("two-sided path: dT must be > 0");
  if (!(past_variance >= 0.0)) throw std::invalid_argument("two-sided path: variance must be >= 0");
  past_scale_ = std::sqrt(past_variance * forward_.dT);
}

double TwoSidedSlowPath::increment(std::int64_t j) const {
  if (j >= 0) {
    if (std::size_t(j) >= forward_.increments.size()) throw std::out_of_range("two-sided path: beyond forward horizon");
    return forward_.increments[std::size_t(j)];
  }
  auto i = std::uint64_t(-(j + 1));
  return past_scale_ * normal_pair(past_key_, i / 2, 0)[i % 2];
}

std::vector<double> TwoSidedSlowPath::window(std::int64_t begin, std::int64_t end) const {
  if (end < begin) throw std::invalid_argument("two-sided path: empty window");
  if (end > std::int64_t(forward_.increments.size())) throw std::out_of_range("two-sided path: beyond forward horizon");
  std::vector<double> out(std::size_t(end - begin));
  std::int64_t j = begin;
  // past increments come in Box-Muller pairs: i = -(j+1), pair i/2
  while (j < std::min<std::int64_t>(end, 0)) {
    auto i = std::uint64_t(-(j + 1));
    auto z = normal_pair(past_key_, i / 2, 0);
    out[std::size_t(j - begin)] = past_scale_ * z[i % 2];
    if (i % 2 == 1 && j + 1 < std::min<std::int64_t>(end, 0)) {
      out[std::size_t(j + 1 - begin)] = past_scale_ * z[0];
      ++j;
    }
    ++j;
  }
  for (; j < end; ++j) out[std::size_t(j - begin)] = forward_.increments[std::size_t(j)];
  return out;
}

OuStep ou_step(const Eigen::VectorXd& rates, const Eigen::VectorXd& q, double dt) {
  if (rates.size() != q.size()) throw std::invalid_argument("ou_step: size mismatch");
  OuStep s;
  s.decay.resize(rates.size());
  s.scale.resize(rates.size());
  for (Eigen::Index k = 0; k < rates.size(); ++k) {
    double r = rates[k];
    s.decay[k] = std::exp(r * dt);
    s.scale[k] = (r == 0.0) ? std::sqrt(q[k] * dt) : std::sqrt(q[k] * std::expm1(2.0 * r * dt) / (2.0 * r));
  }
  return s;
}

FieldTrajectory stochastic_convolution(const WienerPath& path, const SpectralSpace& space, std::size_t n_steps) {
  if (path.n_modes() != space.n_modes()) throw std::invalid_argument("stochastic_convolution: mode count mismatch");
  if (n_steps > path.n_steps()) throw std::out_of_range("stochastic_convolution: n_steps beyond path horizon");
  OuStep ou = ou_step(space.eigenvalues(), path.noise_spectrum(), path.dt());
  FieldTrajectory tr;
  tr.model = space.id();
  tr.dt = path.dt();
  tr.states.setZero(Eigen::Index(space.n_modes()), Eigen::Index(n_steps + 1));
  Eigen::VectorXd z(Eigen::Index(space.n_modes()));
  for (std::size_t n = 0; n < n_steps; ++n) {
    path.normals(n, z);
    tr.states.col(Eigen::Index(n + 1)) =
        (ou.decay.array() * tr.states.col(Eigen::Index(n)).array() + ou.scale.array() * z.array()).matrix();
  }
  return tr;
}

}  // namespace spdeftle
