#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "spdeftle/rng.hpp"
#include "spdeftle/spectral.hpp"

namespace spdeftle {

struct PathKey {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
};

/// Per-mode Brownian increments dW_k = sqrt(q_k dt) z_{n,k}.
///
/// Keyed paths compute z lazily from Philox, so nothing is stored and any
/// (step, mode) can be read in any order.  Explicit paths wrap a given matrix
/// of normals (used to build coarsened paths in convergence studies).
class WienerPath {
 public:
  WienerPath(PathKey key, double dt, std::size_t n_steps, Eigen::VectorXd noise_spectrum);
  /// normals: n_steps x n_modes standard normals.
  static WienerPath from_normals(Eigen::MatrixXd normals, double dt, Eigen::VectorXd noise_spectrum);

  const PathKey& key() const { return key_; }
  double dt() const { return dt_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_modes() const { return std::size_t(q_.size()); }
  const Eigen::VectorXd& noise_spectrum() const { return q_; }

  double normal(std::size_t step, std::size_t mode) const;
  /// All modes of one step; out must have n_modes entries.
  void normals(std::size_t step, Eigen::Ref<Eigen::VectorXd> out) const;
  double increment(std::size_t step, std::size_t mode) const;
  /// n_steps x n_modes matrix of increments.
  Eigen::MatrixXd increments() const;

 private:
  WienerPath() = default;
  void check_step(std::size_t step) const;

  PathKey key_;
  double dt_ = 0.0;
  std::size_t n_steps_ = 0;
  Eigen::VectorXd q_;
  Eigen::VectorXd sqrt_q_dt_;
  std::optional<Eigen::MatrixXd> explicit_;
};

WienerPath generate(std::uint64_t master_seed, std::uint64_t sample_index, double dt, std::size_t n_steps,
                    const SpectralSpace& space);

/// Kernel-mode path on the slow scale T = eps^2 t, already multiplied by eps.
struct SlowPath {
  double epsilon = 1.0;
  double dT = 0.0;
  std::vector<double> increments;  // increment j covers [j dT, (j+1) dT]

  std::size_t n_steps() const { return increments.size(); }
  double horizon() const { return dT * double(increments.size()); }
};

/// slow_dt must be an integer multiple of dt*eps^2; throws otherwise.
SlowPath slow_rescale(const WienerPath& path, double epsilon, std::size_t kernel_index, double slow_dt);
/// One fast step per slow step.
SlowPath slow_rescale(const WienerPath& path, double epsilon, std::size_t kernel_index);

/// Slow path extended to negative times by an independent "past" stream of the
/// same sample.  Increment j < 0 covers [j dT, (j+1) dT].  The Wiener shift by
/// m slow steps is the index offset j -> j + m.
class TwoSidedSlowPath {
 public:
  /// past_variance: variance of one past increment per unit slow time (q_{k*}).
  TwoSidedSlowPath(SlowPath forward, PathKey key, double past_variance = 1.0);

  double dT() const { return forward_.dT; }
  const SlowPath& forward() const { return forward_; }
  double increment(std::int64_t j) const;
  /// Increments for j in [begin, end).
  std::vector<double> window(std::int64_t begin, std::int64_t end) const;

 private:
  SlowPath forward_;
  NormalKey past_key_;
  double past_scale_ = 0.0;
};

/// Exact OU update factors for rates r_k over one step dt:
/// decay_k = exp(r_k dt), scale_k = sqrt(q_k (exp(2 r_k dt) - 1) / (2 r_k)) (sqrt(q_k dt) at r_k = 0).
struct OuStep {
  Eigen::VectorXd decay;
  Eigen::VectorXd scale;
};
OuStep ou_step(const Eigen::VectorXd& rates, const Eigen::VectorXd& q, double dt);

/// Z(t) = int_0^t e^{A(t-s)} dW_s on the step grid, Z_0 = 0; n_steps + 1 columns.
FieldTrajectory stochastic_convolution(const WienerPath& path, const SpectralSpace& space, std::size_t n_steps);

}  // namespace spdeftle
