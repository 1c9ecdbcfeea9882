#include "spdeftle/amplitude.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spdeftle {

std::string_view variant_name(AmplitudeVariant v) {
  switch (v) {
    case AmplitudeVariant::A1: return "a1";
    case AmplitudeVariant::A2: return "a2";
    case AmplitudeVariant::A3: return "a3";
    case AmplitudeVariant::EAE: return "eAE";
  }
  return "?";
}

std::string_view method_name(NormMethod m) {
  switch (m) {
    case NormMethod::ClosedForm: return "closed-form";
    case NormMethod::FullSvd: return "full-svd";
    case NormMethod::PowerIteration: return "power-iteration";
  }
  return "?";
}

void AmplitudeSpec::validate() const {
  if (!(cubic < 0.0)) throw std::invalid_argument("amplitude equation: cubic coefficient must be < 0");
  if (!(noise_amp >= 0.0)) throw std::invalid_argument("amplitude equation: noise amplitude must be >= 0");
  if (!std::isfinite(linear)) throw std::invalid_argument("amplitude equation: linear coefficient must be finite");
}

AmplitudeSpec variant_a1(double nu, double sigma, double cubic) {
  if (!(nu > 0.0)) throw std::invalid_argument("variant a1 needs nu > 0");
  AmplitudeSpec s{1.0, cubic, sigma / nu, AmplitudeVariant::A1};
  s.validate();
  return s;
}

AmplitudeSpec variant_a2(double cubic) {
  AmplitudeSpec s{0.0, cubic, 1.0, AmplitudeVariant::A2};
  s.validate();
  return s;
}

AmplitudeSpec variant_a3(double nu, double sigma, double cubic) {
  if (!(sigma > 0.0)) throw std::invalid_argument("variant a3 needs sigma > 0");
  AmplitudeSpec s{nu / sigma, cubic, 1.0, AmplitudeVariant::A3};
  s.validate();
  return s;
}

AmplitudeSpec variant_eae(double nu, double sigma, double epsilon, double cubic) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("amplitude equation needs epsilon > 0");
  double e2 = epsilon * epsilon;
  AmplitudeSpec s{nu / e2, cubic, sigma / e2, AmplitudeVariant::EAE};
  s.validate();
  return s;
}

namespace {

constexpr double kBlowUp = 1e6;

inline double em_step(const AmplitudeSpec& s, double b, double inc, double dT) {
  return b + dT * (s.linear * b + s.cubic * b * b * b) + s.noise_amp * inc;
}

}  // namespace

std::vector<double> integrate_sde(const AmplitudeSpec& spec, double b0, std::span<const double> increments, double dT) {
  if (!(dT > 0.0)) throw std::invalid_argument("integrate_sde: dT must be > 0");
  std::vector<double> b(increments.size() + 1);
  b[0] = b0;
  for (std::size_t j = 0; j < increments.size(); ++j) {
    b[j + 1] = em_step(spec, b[j], increments[j], dT);
    if (!(std::abs(b[j + 1]) <= kBlowUp))
      throw std::runtime_error("integrate_sde: |b| exceeded 1e6 at step " + std::to_string(j + 1) +
                               " (dT too large for the cubic drift?)");
  }
  return b;
}

std::vector<double> integrate_sde(const AmplitudeSpec& spec, double b0, const SlowPath& path, double T) {
  if (!(T >= 0.0)) throw std::invalid_argument("integrate_sde: T must be >= 0");
  double steps = T / path.dT;
  auto n = std::size_t(std::llround(steps));
  if (std::abs(steps - double(n)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("integrate_sde: T is not a whole number of slow steps");
  if (n > path.n_steps()) throw std::out_of_range("integrate_sde: T beyond path horizon");
  return integrate_sde(spec, b0, std::span<const double>(path.increments.data(), n), path.dT);
}

AttractorSample pullback_attractor(const AmplitudeSpec& spec, const TwoSidedSlowPath& path, std::int64_t origin_step,
                                   const PullbackOptions& opt) {
  if (!(opt.initial_horizon > 0.0)) throw std::invalid_argument("pullback_attractor: S must be > 0");
  const double dT = path.dT();
  // the EM map is monotone (and the bracket argument valid) while 1 + dT f'(b) > 0 on [-R, R]
  if (dT * (3.0 * std::abs(spec.cubic) * opt.bracket * opt.bracket - spec.linear) >= 1.0)
    throw std::invalid_argument("pullback_attractor: slow step too large for the bracket");
  AttractorSample out;
  for (double S = opt.initial_horizon;; S *= 2.0) {
    auto n = std::int64_t(std::llround(S / dT));
    double lo = -opt.bracket, hi = opt.bracket;
    constexpr std::int64_t chunk = 1 << 16;  // bounded memory for long pullbacks
    for (std::int64_t b = origin_step - n; b < origin_step; b += chunk) {
      for (double w : path.window(b, std::min(b + chunk, origin_step))) {
        lo = em_step(spec, lo, w, dT);
        hi = em_step(spec, hi, w, dT);
      }
    }
    out.value = 0.5 * (lo + hi);
    out.residual = std::abs(hi - lo);
    out.pullback_horizon = S;
    out.converged = out.residual < opt.tolerance;
    if (out.converged || 2.0 * S > opt.max_horizon) break;
  }
  return out;
}

InvariantDensity::InvariantDensity(const AmplitudeSpec& spec) {
  if (!(spec.noise_amp > 0.0)) throw std::invalid_argument("invariant density needs noise_amp > 0");
  if (!(spec.cubic < 0.0)) throw std::invalid_argument("invariant density needs a negative cubic coefficient");
  double s2 = spec.noise_amp * spec.noise_amp;
  a_ = spec.linear / s2;
  c_ = spec.cubic / (2.0 * s2);
  // widen the window until the density at the edge is negligible against its peak
  double peak = std::max(0.0, a_ > 0.0 ? -a_ * a_ / (4.0 * c_) : 0.0);
  while (a_ * cutoff_ * cutoff_ + c_ * std::pow(cutoff_, 4) - peak > -40.0) cutoff_ *= 1.5;

  using boost::math::quadrature::gauss_kronrod;
  auto f = [this](double x) { return unnormalized(x); };
  norm_ = gauss_kronrod<double, 61>::integrate(f, -cutoff_, cutoff_, 15, 1e-14);

  const std::size_t n = 20000;
  cdf_h_ = 2.0 * cutoff_ / double(n);
  cdf_table_.assign(n + 1, 0.0);
  double prev = (*this)(-cutoff_);
  for (std::size_t i = 1; i <= n; ++i) {
    double cur = (*this)(-cutoff_ + cdf_h_ * double(i));
    cdf_table_[i] = cdf_table_[i - 1] + 0.5 * cdf_h_ * (prev + cur);
    prev = cur;
  }
  double total = cdf_table_.back();
  for (double& v : cdf_table_) v /= total;
}

double InvariantDensity::unnormalized(double x) const {
  double x2 = x * x;
  return std::exp(a_ * x2 + c_ * x2 * x2);
}

double InvariantDensity::moment(int p) const {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [this, p](double x) { return std::pow(x, p) * unnormalized(x); };
  return gauss_kronrod<double, 61>::integrate(f, -cutoff_, cutoff_, 15, 1e-14) / norm_;
}

double InvariantDensity::cdf(double x) const {
  if (x <= -cutoff_) return 0.0;
  if (x >= cutoff_) return 1.0;
  double pos = (x + cutoff_) / cdf_h_;
  auto i = std::size_t(pos);
  if (i >= cdf_table_.size() - 1) return 1.0;
  double t = pos - double(i);
  return cdf_table_[i] + t * (cdf_table_[i + 1] - cdf_table_[i]);
}

double invariant_density(const AmplitudeSpec& spec, double x) { return InvariantDensity(spec)(x); }

double birkhoff_average(std::span<const double> a, double dT) {
  if (a.size() < 2) throw std::invalid_argument("birkhoff_average: trajectory needs at least two points");
  double s = 0.5 * (a.front() * a.front() + a.back() * a.back());
  for (std::size_t i = 1; i + 1 < a.size(); ++i) s += a[i] * a[i];
  return s * dT / (dT * double(a.size() - 1));
}

FtleEstimate sde_ftle(const AmplitudeSpec& spec, std::span<const double> a, double dT) {
  FtleEstimate est;
  est.horizon = dT * double(a.size() - 1);
  est.lambda = spec.linear + 3.0 * spec.cubic * birkhoff_average(a, dT);
  est.log_norm = est.lambda * est.horizon;
  est.monodromy_norm = std::exp(est.log_norm);
  est.method = NormMethod::ClosedForm;
  est.condition = 1.0;
  est.storage = "scalar";
  return est;
}

double omega0_eta(const AmplitudeSpec& spec, double delta) { return delta / (2.0 * (1.0 + spec.noise_amp)); }

bool event_omega0(const AmplitudeSpec& spec, double a0, const SlowPath& path, double T, double delta) {
  if (spec.variant != AmplitudeVariant::A1) throw std::invalid_argument("event_omega0 is defined for variant a1");
  double steps = T / path.dT;
  auto n = std::size_t(std::llround(steps));
  if (n > path.n_steps()) throw std::out_of_range("event_omega0: T beyond path horizon");
  const double eta = omega0_eta(spec, delta);
  if (!(std::abs(a0) < eta)) return false;
  double beta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    beta += path.increments[j];
    if (std::abs(beta) > 0.5 * eta) return false;
  }
  return true;
}

}  // namespace spdeftle
