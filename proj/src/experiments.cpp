#include "spdeftle/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spdeftle/models.hpp"
#include "spdeftle/stats.hpp"

namespace spdeftle {

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
    case Regime::IVCritical: return "IV-critical";
    case Regime::IVSmallNu: return "IV-small-nu";
    case Regime::ApproxOrder: return "approx-order";
    case Regime::Linearization: return "linearization";
    case Regime::Density: return "density";
    case Regime::Birkhoff: return "birkhoff";
  }
  return "?";
}

std::optional<Regime> parse_regime(std::string_view s) {
  for (Regime r : {Regime::I, Regime::II, Regime::III, Regime::IVCritical, Regime::IVSmallNu, Regime::ApproxOrder,
                   Regime::Linearization, Regime::Density, Regime::Birkhoff})
    if (regime_name(r) == s) return r;
  return std::nullopt;
}

const SummaryRow* RegimeReport::find(std::string_view metric) const {
  for (const auto& r : summary)
    if (r.metric == metric) return &r;
  return nullptr;
}

// ---------------------------------------------------------------- gates

namespace {

bool set(double v) { return !std::isnan(v); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

bool is_spde_regime(Regime r) { return r != Regime::Density && r != Regime::Birkhoff; }

void require(std::vector<std::string>& v, bool ok, std::string msg) {
  if (!ok) v.push_back(std::move(msg));
}

void check_steps(std::vector<std::string>& v, double t, double dt, const std::string& what) {
  if (!(t > 0.0) || !(dt > 0.0) || !std::isfinite(t)) return;
  double r = t / dt;
  if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r))
    v.push_back(what + " = " + num(t) + " is not a whole number of steps dt = " + num(dt));
  else if (r > 4e9)
    v.push_back(what + " needs more than 2^32 steps");
}

}  // namespace

std::vector<std::string> resolve_campaign(Campaign& c) {
  std::vector<std::string> v;
  const Regime r = c.regime;

  // defaults that depend on other parameters
  if (!set(c.slow_horizon)) {
    switch (r) {
      case Regime::I: c.slow_horizon = 10.0; break;
      case Regime::IVCritical:
      case Regime::IVSmallNu:
      case Regime::Birkhoff: c.slow_horizon = 50.0; break;
      default: c.slow_horizon = 1.0; break;
    }
  }
  if ((r == Regime::II || r == Regime::III) && !set(c.nu) && set(c.epsilon)) c.nu = c.epsilon * c.epsilon;
  if (r == Regime::IVCritical) {
    if (!set(c.nu)) c.nu = 0.0;
    if (!set(c.sigma) && set(c.epsilon)) c.sigma = c.epsilon * c.epsilon;
  }
  if (r == Regime::IVSmallNu && !set(c.sigma) && set(c.epsilon)) c.sigma = c.epsilon * c.epsilon;

  // required keys
  auto need = [&](double x, const char* name) { require(v, set(x), std::string("missing required key '") + name + "' for regime " + std::string(regime_name(r))); };
  switch (r) {
    case Regime::I: need(c.nu, "nu"); need(c.sigma, "sigma"); break;
    case Regime::II:
    case Regime::III: need(c.epsilon, "epsilon"); need(c.sigma, "sigma"); break;
    case Regime::IVCritical: need(c.epsilon, "epsilon"); break;
    case Regime::IVSmallNu: need(c.epsilon, "epsilon"); need(c.nu, "nu"); break;
    case Regime::ApproxOrder:
    case Regime::Linearization:
      require(v, c.epsilon_grid.size() >= 3, "epsilon_grid needs at least 3 values");
      require(v, !set(c.nu) && !set(c.sigma), "nu and sigma are derived from epsilon_grid (nu = sigma = eps^2); remove them");
      require(v, !set(c.epsilon), "epsilon is not used by grid campaigns; use epsilon_grid");
      break;
    case Regime::Density:
    case Regime::Birkhoff:
      if (c.variant == AmplitudeVariant::A1) { need(c.nu, "nu"); need(c.sigma, "sigma"); }
      require(v, c.variant == AmplitudeVariant::A1 || c.variant == AmplitudeVariant::A2,
              "variant must be a1 or a2 for density/birkhoff campaigns");
      break;
  }

  // ranges
  if (set(c.sigma)) require(v, c.sigma >= 0.0, "sigma must be ≥ 0");
  if (set(c.epsilon)) require(v, c.epsilon > 0.0, "epsilon must be > 0");
  for (double e : c.epsilon_grid) require(v, e > 0.0, "epsilon_grid values must be > 0");
  require(v, c.samples >= 1, "samples must be ≥ 1");
  require(v, c.dt > 0.0, "dt must be > 0");
  require(v, c.slow_horizon > 0.0, "slow_horizon must be > 0");
  if (is_spde_regime(r)) {
    require(v, c.n_modes >= 2 && c.n_modes <= 256, "n_modes must lie in [2, 256]");
    try {
      SpectralSpace(model_by_name(c.model), std::max<std::size_t>(c.n_modes, 1));
    } catch (const std::exception& e) {
      v.push_back(std::string("model: ") + e.what());
    }
  }
  if (r == Regime::Density || r == Regime::Birkhoff) require(v, c.cubic < 0.0, "cubic_coeff must be < 0");

  // regime gates
  const double nu = c.nu, sigma = c.sigma, eps = c.epsilon;
  switch (r) {
    case Regime::I:
      if (set(nu)) require(v, nu < 0.0, "regime I requires ν < 0 (nu = " + num(nu) + ")");
      check_steps(v, c.slow_horizon, c.dt, "horizon");
      break;
    case Regime::II:
      if (set(nu) && set(eps)) {
        require(v, nu > 0.0, "regime II requires ν > 0");
        require(v, close(nu, eps * eps), "regime II requires ν = ε² (nu = " + num(nu) + ", eps^2 = " + num(eps * eps) + ")");
        if (set(sigma) && nu > 0.0)
          require(v, sigma / nu >= 0.5 && sigma / nu <= 2.0, "gate σ/ν ∈ [1/2,2] violated (σ/ν = " + num(sigma / nu) + ")");
        if (nu > 0.0) {
          check_steps(v, c.slow_horizon / nu, c.dt, "fast horizon T/ν");
          check_steps(v, c.omega0_horizon / nu, c.dt, "fast Ω₀ horizon");
        }
      }
      require(v, c.omega0_horizon > 0.0 && c.omega0_horizon <= c.slow_horizon, "omega0_horizon must lie in (0, slow_horizon]");
      require(v, c.omega0_events >= 1, "omega0_events must be ≥ 1");
      break;
    case Regime::III:
      if (set(nu) && set(eps)) {
        require(v, nu > 0.0, "regime III requires ν > 0");
        require(v, close(nu, eps * eps), "regime III requires ν = ε² (nu = " + num(nu) + ")");
        if (set(sigma)) require(v, sigma <= nu / 10.0, "gate σ ≤ ν/10 violated (σ/ν = " + num(sigma / nu) + ")");
        if (nu > 0.0) check_steps(v, c.slow_horizon / nu, c.dt, "fast horizon T/ν");
      }
      break;
    case Regime::IVCritical:
      if (set(nu)) require(v, nu == 0.0, "regime IV-critical requires ν = 0");
      if (set(sigma) && set(eps)) require(v, close(sigma, eps * eps), "regime IV-critical requires σ = ε²");
      if (set(sigma) && sigma > 0.0) check_steps(v, c.slow_horizon / std::sqrt(sigma), c.dt, "fast horizon T/√σ");
      require(v, !set(sigma) || sigma > 0.0, "regime IV-critical requires σ > 0");
      break;
    case Regime::IVSmallNu:
      if (set(sigma) && set(eps)) require(v, close(sigma, eps * eps), "regime IV-small-nu requires σ = ε²");
      if (set(nu) && set(sigma))
        require(v, nu > 0.0 && nu <= sigma / 10.0, "gate 0 < ν ≤ σ/10 violated (ν/σ = " + num(nu / sigma) + ")");
      if (set(sigma) && sigma > 0.0) check_steps(v, c.slow_horizon / std::sqrt(sigma), c.dt, "fast horizon T/√σ");
      break;
    case Regime::ApproxOrder:
    case Regime::Linearization:
      for (double e : c.epsilon_grid)
        if (e > 0.0) check_steps(v, c.slow_horizon / (e * e), c.dt, "fast horizon T0/ε² at ε = " + num(e));
      break;
    case Regime::Density:
      break;
    case Regime::Birkhoff:
      check_steps(v, c.slow_horizon, c.dt, "horizon");
      break;
  }
  if (c.variant == AmplitudeVariant::A1 && (r == Regime::Density || r == Regime::Birkhoff) && set(nu))
    require(v, nu > 0.0, "variant a1 requires ν > 0");
  return v;
}

// ---------------------------------------------------------------- parallelism

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPDEFTLE_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n > 0) return unsigned(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned nt = std::max(1u, std::min<unsigned>(resolve_threads(threads), unsigned(std::max<std::size_t>(count, 1))));
  if (nt == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------- helpers

namespace {

std::shared_ptr<const SpectralSpace> make_space(const Campaign& c) {
  return std::make_shared<const SpectralSpace>(model_by_name(c.model), c.n_modes);
}

/// Random direction with 1/m decay, radius uniform in (0, 1).
SpectralField random_initial(const SpectralSpace& sp, PathKey key) {
  NormalKey nk{key.master_seed, key.sample_index, Stream::Initial};
  const auto n = Eigen::Index(sp.n_modes());
  Eigen::VectorXd c(n);
  for (Eigen::Index k = 0; k < n; ++k)
    c[k] = normal_at(nk, 0, std::uint64_t(k)) / double(std::max(1, sp.wavenumber_of(std::size_t(k))));
  double radius = 0.5 * std::erfc(-normal_at(nk, 1, 0) / std::sqrt(2.0));
  double norm = c.norm();
  if (norm > 0.0) c *= radius / norm;
  return SpectralField(sp.id(), c);
}

PullbackOptions pullback_options() { return PullbackOptions{}; }

/// Attractor of the amplitude equation at slow time 0, on the past extension of the sample's slow path.
AttractorSample attractor_for(const AmplitudeSpec& spec, const SlowPath& slow, PathKey key, double q_kernel) {
  TwoSidedSlowPath two(slow, key, q_kernel);
  return pullback_attractor(spec, two, 0, pullback_options());
}

SpectralField kernel_field(const SpectralSpace& sp, double value) {
  SpectralField f = sp.zero();
  f.coeffs[Eigen::Index(sp.kernel_index())] = value;
  return f;
}

SummaryRow info(std::string metric, double value) { return SummaryRow{std::move(metric), value, {}, {}, {}}; }

SummaryRow fraction_row(std::string metric, std::size_t k, std::size_t n, bool pass) {
  Interval ci = wilson_interval(k, n);
  double frac = n > 0 ? double(k) / double(n) : 0.0;
  return SummaryRow{std::move(metric), frac, ci.low, ci.high, pass};
}

SummaryRow predicate(std::string metric, double value, bool pass) {
  return SummaryRow{std::move(metric), value, {}, {}, pass};
}

std::vector<const SampleRecord*> main_included(const RegimeReport& rep) {
  std::vector<const SampleRecord*> out;
  for (const auto& s : rep.samples)
    if (s.subset == "main" && !s.excluded) out.push_back(&s);
  return out;
}

void exclusion_rows(RegimeReport& rep) {
  std::size_t n = 0, ex = 0;
  for (const auto& s : rep.samples) {
    if (s.subset != "main") continue;
    ++n;
    if (s.excluded) ++ex;
  }
  double frac = n ? double(ex) / double(n) : 0.0;
  rep.summary.push_back(predicate("excluded_fraction", frac, frac <= 0.01));
}

std::vector<double> lambdas(const std::vector<const SampleRecord*>& rs) {
  std::vector<double> out;
  for (auto* r : rs)
    if (r->lambda) out.push_back(*r->lambda);
  return out;
}

double cubic_for(const Campaign& c) {
  SpectralSpace sp(model_by_name(c.model), c.n_modes);
  return cubic_coefficient(sp);
}

AmplitudeSpec density_spec(const Campaign& c) {
  return c.variant == AmplitudeVariant::A1 ? variant_a1(c.nu, c.sigma, c.cubic) : variant_a2(c.cubic);
}

// per-epsilon sample groups of the grid campaigns
std::map<double, std::vector<const SampleRecord*>> by_epsilon(const RegimeReport& rep) {
  std::map<double, std::vector<const SampleRecord*>> g;
  for (const auto& s : rep.samples)
    if (s.subset == "main" && !s.excluded && s.epsilon) g[*s.epsilon].push_back(&s);
  return g;
}

template <class Get>
std::pair<std::vector<double>, std::vector<double>> median_series(
    const std::map<double, std::vector<const SampleRecord*>>& groups, Get get) {
  std::vector<double> eps, med;
  for (const auto& [e, rs] : groups) {
    std::vector<double> vals;
    for (auto* r : rs)
      if (auto v = get(*r)) vals.push_back(*v);
    if (vals.empty()) continue;
    eps.push_back(e);
    med.push_back(median(vals));
  }
  return {eps, med};
}

void slope_rows(RegimeReport& rep, const std::string& name,
                const std::pair<std::vector<double>, std::vector<double>>& series, double lo, double hi) {
  const auto& [eps, med] = series;
  for (std::size_t i = 0; i < eps.size(); ++i) rep.summary.push_back(info("median_" + name + "@eps=" + num(eps[i]), med[i]));
  bool positive = std::all_of(med.begin(), med.end(), [](double m) { return m > 0.0; });
  if (eps.size() >= 2 && positive) {
    double s = loglog_slope(eps, med);
    rep.summary.push_back(predicate("slope_" + name, s, s >= lo && s <= hi));
  } else {
    rep.summary.push_back(predicate("slope_" + name, std::nan(""), false));
  }
}

}  // namespace

// ---------------------------------------------------------------- summaries

void summarize(RegimeReport& rep) {
  rep.summary.clear();
  const Campaign& c = rep.campaign;
  auto inc = main_included(rep);
  switch (c.regime) {
    case Regime::I: {
      auto ls = lambdas(inc);
      std::size_t ok = std::count_if(ls.begin(), ls.end(), [&](double l) { return l <= c.nu + 0.02; });
      rep.summary.push_back(fraction_row("all_lambda_leq_nu", ok, ls.size(), !ls.empty() && ok == ls.size()));
      if (!ls.empty()) {
        rep.summary.push_back(info("max_lambda", *std::max_element(ls.begin(), ls.end())));
        rep.summary.push_back(info("median_lambda", median(ls)));
      }
      break;
    }
    case Regime::II: {
      auto ls = lambdas(inc);
      std::size_t pos = std::count_if(ls.begin(), ls.end(), [&](double l) { return l > c.nu / 8.0; });
      Interval ci = wilson_interval(pos, ls.size());
      rep.summary.push_back(fraction_row("fraction_lambda_gt_nu_over_8", pos, ls.size(), !ls.empty() && ci.low > 0.0));
      std::size_t ev_main = 0;
      for (auto* r : inc) ev_main += (r->event_omega0 && *r->event_omega0) ? 1 : 0;
      rep.summary.push_back(info("omega0_events_at_slow_horizon", double(ev_main)));
      if (!ls.empty()) rep.summary.push_back(info("median_lambda", median(ls)));

      std::size_t scanned = 0, events = 0, cond_pos = 0;
      for (const auto& s : rep.samples) {
        if (s.subset != "omega0-scan") continue;
        ++scanned;
        if (s.event_omega0 && *s.event_omega0) {
          ++events;
          if (s.lambda && *s.lambda > c.nu / 8.0) ++cond_pos;
        }
      }
      rep.summary.push_back(info("omega0_horizon", c.omega0_horizon));
      rep.summary.push_back(fraction_row("omega0_probability", events, scanned, true));
      rep.summary.back().pass.reset();
      double cond = events ? double(cond_pos) / double(events) : 0.0;
      rep.summary.push_back(fraction_row("omega0_conditional_fraction_lambda_gt_nu_over_8", cond_pos, events,
                                         events > 0 && cond >= 0.8));
      exclusion_rows(rep);
      break;
    }
    case Regime::III: {
      auto ls = lambdas(inc);
      std::size_t pos = std::count_if(ls.begin(), ls.end(), [&](double l) { return l > c.nu / 2.0; });
      double frac = ls.empty() ? 0.0 : double(pos) / double(ls.size());
      rep.summary.push_back(fraction_row("fraction_lambda_gt_nu_over_2", pos, ls.size(), !ls.empty() && frac >= 0.9));
      if (!ls.empty()) rep.summary.push_back(info("median_lambda", median(ls)));
      break;
    }
    case Regime::IVCritical:
    case Regime::IVSmallNu: {
      auto ls = lambdas(inc);
      std::size_t neg = std::count_if(ls.begin(), ls.end(), [](double l) { return l < 0.0; });
      double frac = ls.empty() ? 0.0 : double(neg) / double(ls.size());
      rep.summary.push_back(fraction_row("fraction_lambda_negative", neg, ls.size(), !ls.empty() && frac >= 0.9));
      if (!ls.empty()) {
        double cf = cubic_for(c);
        AmplitudeSpec amp = c.regime == Regime::IVCritical ? variant_a2(cf) : variant_a3(c.nu, c.sigma, cf);
        double ea2 = InvariantDensity(amp).moment(2);
        // lambda ~ sigma (alpha + 3 c_F <a^2>) on the fast scale
        double ref = c.sigma * (amp.linear + 3.0 * cf * ea2);
        double med = median(ls);
        rep.summary.push_back(info("median_lambda", med));
        rep.summary.push_back(info("median_lambda_reference", ref));
        rep.summary.push_back(info("median_over_reference", med / ref));
      }
      exclusion_rows(rep);
      break;
    }
    case Regime::ApproxOrder: {
      auto g = by_epsilon(rep);
      slope_rows(rep, "error_sup", median_series(g, [](const SampleRecord& r) { return r.error_sup; }), 1.7, 2.3);
      slope_rows(rep, "stable_sup", median_series(g, [](const SampleRecord& r) { return r.stable_sup; }), 1.7,
                 std::numeric_limits<double>::infinity());
      slope_rows(rep, "tilde_x4_integral",
                 median_series(g, [](const SampleRecord& r) { return r.tilde_x4_integral; }), 1.7,
                 std::numeric_limits<double>::infinity());
      slope_rows(rep, "amplitude_sup", median_series(g, [](const SampleRecord& r) { return r.amplitude_sup; }), -0.2,
                 0.2);
      exclusion_rows(rep);
      break;
    }
    case Regime::Linearization: {
      auto g = by_epsilon(rep);
      const double inf = std::numeric_limits<double>::infinity();
      slope_rows(rep, "linearization_error_sup", median_series(g, [](const SampleRecord& r) { return r.error_sup; }),
                 0.8, inf);
      slope_rows(rep, "tangent_stable_sup", median_series(g, [](const SampleRecord& r) { return r.stable_sup; }), 0.8,
                 inf);
      slope_rows(rep, "tangent_stable_l2_half",
                 median_series(g, [](const SampleRecord& r) { return r.stable_l2_half; }), 1.7, inf);
      exclusion_rows(rep);
      break;
    }
    case Regime::Density: {
      std::vector<double> a;
      for (auto* r : inc)
        if (r->attractor_value) a.push_back(*r->attractor_value);
      InvariantDensity dens(density_spec(c));
      double exact = dens.moment(2);
      if (!a.empty()) {
        double ks = ks_distance(a, [&](double x) { return dens.cdf(x); });
        rep.summary.push_back(predicate("ks_distance", ks, ks < 0.05));
        double m = 0.0, m2 = 0.0;
        for (double x : a) {
          m += x * x;
          m2 += x * x * x * x;
        }
        m /= double(a.size());
        m2 /= double(a.size());
        double se = std::sqrt(std::max(0.0, m2 - m * m) / double(a.size()));
        rep.summary.push_back(
            SummaryRow{"mean_a_squared", m, m - 1.959963984540054 * se, m + 1.959963984540054 * se, std::abs(m - exact) <= 0.02});
      }
      rep.summary.push_back(info("exact_a_squared", exact));
      exclusion_rows(rep);
      break;
    }
    case Regime::Birkhoff: {
      InvariantDensity dens(density_spec(c));
      double threshold = 0.25 * dens.moment(2);
      std::size_t n = 0, ok = 0;
      std::vector<double> avgs;
      for (auto* r : inc)
        if (r->birkhoff_average) {
          ++n;
          avgs.push_back(*r->birkhoff_average);
          if (*r->birkhoff_average >= threshold) ++ok;
        }
      double frac = n ? double(ok) / double(n) : 0.0;
      rep.summary.push_back(fraction_row("fraction_birkhoff_geq_quarter_Ea2", ok, n, n > 0 && frac >= 0.95));
      rep.summary.push_back(info("threshold", threshold));
      if (!avgs.empty()) rep.summary.push_back(info("median_birkhoff_average", median(avgs)));
      auto ls = lambdas(inc);
      if (!ls.empty()) rep.summary.push_back(info("median_lambda", median(ls)));
      exclusion_rows(rep);
      break;
    }
  }
  rep.passed = !rep.summary.empty() && std::all_of(rep.summary.begin(), rep.summary.end(),
                                                   [](const SummaryRow& r) { return !r.pass || *r.pass; });
}

// ---------------------------------------------------------------- runners

namespace {

RegimeReport start(const Campaign& c, Regime expected1, std::optional<Regime> expected2 = std::nullopt) {
  if (c.regime != expected1 && (!expected2 || c.regime != *expected2))
    throw std::invalid_argument("campaign regime does not match the runner");
  RegimeReport rep;
  rep.campaign = c;
  auto violations = resolve_campaign(rep.campaign);
  if (!violations.empty()) {
    std::string msg = "invalid campaign:";
    for (auto& v : violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }
  return rep;
}

SampleRecord base_record(const Campaign& c, std::size_t index) {
  SampleRecord r;
  r.sample_index = index;
  r.seed = c.seed;
  return r;
}

}  // namespace

RegimeReport run_regime_I(const Campaign& in) {
  RegimeReport rep = start(in, Regime::I);
  const Campaign& c = rep.campaign;
  auto space = make_space(c);
  SpdeParams p{space, c.nu, c.sigma, 1.0, c.dt, c.slow_horizon, true};
  const std::size_t n = p.n_steps();
  rep.samples.resize(c.samples);
  parallel_for(c.samples, c.threads, [&](std::size_t i) {
    PathKey key{c.seed, i};
    WienerPath path(key, c.dt, n, space->noise_spectrum());
    SampleRecord r = base_record(c, i);
    r.lambda = spde_ftle(p, random_initial(*space, key), path, c.slow_horizon).lambda;
    rep.samples[i] = r;
  });
  summarize(rep);
  return rep;
}

RegimeReport run_regime_II(const Campaign& in) {
  RegimeReport rep = start(in, Regime::II);
  const Campaign& c = rep.campaign;
  auto space = make_space(c);
  const double cf = cubic_coefficient(*space);
  const AmplitudeSpec amp = variant_a1(c.nu, c.sigma, cf);
  const double eps = std::sqrt(c.nu);
  const double qk = space->noise_spectrum()[Eigen::Index(space->kernel_index())];
  const double t_fast = c.slow_horizon / c.nu;
  SpdeParams p{space, c.nu, c.sigma, eps, c.dt, t_fast, true};
  const std::size_t n = p.n_steps();

  std::vector<SampleRecord> main(c.samples);
  parallel_for(c.samples, c.threads, [&](std::size_t i) {
    PathKey key{c.seed, i};
    WienerPath path(key, c.dt, n, space->noise_spectrum());
    SlowPath slow = slow_rescale(path, eps, space->kernel_index());
    SampleRecord r = base_record(c, i);
    AttractorSample a = attractor_for(amp, slow, key, qk);
    r.attractor_value = a.value;
    if (!a.converged) {
      r.excluded = true;
    } else {
      r.lambda = spde_ftle(p, kernel_field(*space, eps * a.value), path, t_fast).lambda;
      r.event_omega0 = event_omega0(amp, a.value, slow, c.slow_horizon);
    }
    main[i] = r;
  });

  // Omega_0 scan at the short horizon: cheap noise condition first, then the attractor
  SpdeParams pw = p;
  pw.horizon = c.omega0_horizon / c.nu;
  const std::size_t nw = pw.n_steps();
  const double eta = omega0_eta(amp);
  std::vector<SampleRecord> scan;
  std::size_t events = 0;
  const std::size_t batch = 256;
  for (std::size_t begin = 0; begin < c.omega0_scan_limit && events < c.omega0_events; begin += batch) {
    std::size_t count = std::min(batch, c.omega0_scan_limit - begin);
    std::vector<SampleRecord> part(count);
    parallel_for(count, c.threads, [&](std::size_t j) {
      std::size_t idx = begin + j;
      PathKey key{c.seed, idx};
      WienerPath path(key, c.dt, nw, space->noise_spectrum());
      SlowPath slow = slow_rescale(path, eps, space->kernel_index());
      SampleRecord r = base_record(c, idx);
      r.subset = "omega0-scan";
      double beta = 0.0, sup = 0.0;
      for (double w : slow.increments) {
        beta += w;
        sup = std::max(sup, std::abs(beta));
      }
      if (sup > 0.5 * eta) {
        r.event_omega0 = false;
      } else {
        AttractorSample a = attractor_for(amp, slow, key, qk);
        r.attractor_value = a.value;
        if (!a.converged) {
          r.excluded = true;
        } else {
          r.event_omega0 = event_omega0(amp, a.value, slow, c.omega0_horizon);
          if (*r.event_omega0) r.lambda = spde_ftle(pw, kernel_field(*space, eps * a.value), path, pw.horizon).lambda;
        }
      }
      part[j] = r;
    });
    for (auto& r : part) {
      if (events >= c.omega0_events) break;
      if (r.event_omega0 && *r.event_omega0) ++events;
      scan.push_back(std::move(r));
    }
  }
  rep.samples = std::move(main);
  rep.samples.insert(rep.samples.end(), scan.begin(), scan.end());
  summarize(rep);
  return rep;
}

RegimeReport run_regime_III(const Campaign& in) {
  RegimeReport rep = start(in, Regime::III);
  const Campaign& c = rep.campaign;
  auto space = make_space(c);
  const double t_fast = c.slow_horizon / c.nu;
  SpdeParams p{space, c.nu, c.sigma, std::sqrt(c.nu), c.dt, t_fast, true};
  const std::size_t n = p.n_steps();
  rep.samples.resize(c.samples);
  parallel_for(c.samples, c.threads, [&](std::size_t i) {
    WienerPath path(PathKey{c.seed, i}, c.dt, n, space->noise_spectrum());
    SampleRecord r = base_record(c, i);
    r.lambda = spde_ftle(p, space->zero(), path, t_fast).lambda;
    rep.samples[i] = r;
  });
  summarize(rep);
  return rep;
}

RegimeReport run_regime_IV(const Campaign& in) {
  RegimeReport rep = start(in, Regime::IVCritical, Regime::IVSmallNu);
  const Campaign& c = rep.campaign;
  auto space = make_space(c);
  const double cf = cubic_coefficient(*space);
  const AmplitudeSpec amp = c.regime == Regime::IVCritical ? variant_a2(cf) : variant_a3(c.nu, c.sigma, cf);
  const double eps = std::sqrt(c.sigma);
  const double qk = space->noise_spectrum()[Eigen::Index(space->kernel_index())];
  const double t_fast = c.slow_horizon / eps;
  SpdeParams p{space, c.nu, c.sigma, eps, c.dt, t_fast, true};
  const std::size_t n = p.n_steps();
  rep.samples.resize(c.samples);
  parallel_for(c.samples, c.threads, [&](std::size_t i) {
    PathKey key{c.seed, i};
    WienerPath path(key, c.dt, n, space->noise_spectrum());
    SlowPath slow = slow_rescale(path, eps, space->kernel_index());
    SampleRecord r = base_record(c, i);
    AttractorSample a = attractor_for(amp, slow, key, qk);
    r.attractor_value = a.value;
    if (!a.converged)
      r.excluded = true;
    else
      r.lambda = spde_ftle(p, kernel_field(*space, eps * a.value), path, t_fast).lambda;
    rep.samples[i] = r;
  });
  summarize(rep);
  return rep;
}

namespace {

template <class PerSample>
RegimeReport run_grid(const Campaign& in, Regime regime, PerSample per_sample) {
  RegimeReport rep = start(in, regime);
  const Campaign& c = rep.campaign;
  auto space = make_space(c);
  const double cf = cubic_coefficient(*space);
  const double qk = space->noise_spectrum()[Eigen::Index(space->kernel_index())];
  const std::size_t groups = c.epsilon_grid.size();
  rep.samples.resize(groups * c.samples);
  for (std::size_t g = 0; g < groups; ++g) {
    const double eps = c.epsilon_grid[g];
    const double e2 = eps * eps;
    SpdeParams p{space, e2, e2, eps, c.dt, c.slow_horizon / e2, true};
    const std::size_t n = p.n_steps();
    // coupled amplitude equation: alpha = nu/eps^2 = 1, noise sigma/eps^2 = 1
    const AmplitudeSpec amp = variant_eae(e2, e2, eps, cf);
    parallel_for(c.samples, c.threads, [&](std::size_t i) {
      std::size_t idx = g * c.samples + i;
      PathKey key{c.seed, idx};
      WienerPath path(key, c.dt, n, space->noise_spectrum());
      SampleRecord r = base_record(c, idx);
      r.epsilon = eps;
      AttractorSample a = attractor_for(amp, slow_rescale(path, eps, space->kernel_index()), key, qk);
      r.attractor_value = a.value;
      if (!a.converged)
        r.excluded = true;
      else
        per_sample(p, a.value, path, r);
      rep.samples[idx] = r;
    });
  }
  summarize(rep);
  return rep;
}

}  // namespace

RegimeReport run_approx_order(const Campaign& c) {
  return run_grid(c, Regime::ApproxOrder, [](const SpdeParams& p, double a, const WienerPath& path, SampleRecord& r) {
    ApproximationResult res = approximation_error(p, a, path);
    r.error_sup = res.error_sup;
    r.stable_sup = res.stable_sup;
    r.tilde_x4_integral = res.tilde_x4_integral;
    r.amplitude_sup = res.amplitude_sup;
  });
}

RegimeReport run_linearization(const Campaign& c) {
  return run_grid(c, Regime::Linearization,
                  [](const SpdeParams& p, double a, const WienerPath& path, SampleRecord& r) {
                    LinearizationResult res = linearization_error(p, a, path, true);
                    r.error_sup = res.error_sup;
                    r.stable_sup = res.stable_sup;
                    r.stable_l2_half = res.stable_l2_half;
                  });
}

RegimeReport run_density_birkhoff(const Campaign& in) {
  RegimeReport rep = start(in, Regime::Density, Regime::Birkhoff);
  const Campaign& c = rep.campaign;
  const AmplitudeSpec amp = density_spec(c);
  const bool birkhoff = c.regime == Regime::Birkhoff;
  const double dT = c.dt;
  const std::size_t n = birkhoff ? steps_for(c.slow_horizon, dT) : 1;
  const Eigen::VectorXd unit_q = Eigen::VectorXd::Ones(1);
  rep.samples.resize(c.samples);
  parallel_for(c.samples, c.threads, [&](std::size_t i) {
    PathKey key{c.seed, i};
    WienerPath path(key, dT, n, unit_q);
    SlowPath slow = slow_rescale(path, 1.0, 0);
    SampleRecord r = base_record(c, i);
    AttractorSample a = attractor_for(amp, slow, key, 1.0);
    r.attractor_value = a.value;
    if (!a.converged) {
      r.excluded = true;
    } else if (birkhoff) {
      auto traj = integrate_sde(amp, a.value, slow, c.slow_horizon);
      r.birkhoff_average = birkhoff_average(traj, dT);
      r.lambda = sde_ftle(amp, traj, dT).lambda;
    }
    rep.samples[i] = r;
  });
  summarize(rep);
  return rep;
}

RegimeReport run_campaign(Campaign c) {
  switch (c.regime) {
    case Regime::I: return run_regime_I(c);
    case Regime::II: return run_regime_II(c);
    case Regime::III: return run_regime_III(c);
    case Regime::IVCritical:
    case Regime::IVSmallNu: return run_regime_IV(c);
    case Regime::ApproxOrder: return run_approx_order(c);
    case Regime::Linearization: return run_linearization(c);
    case Regime::Density:
    case Regime::Birkhoff: return run_density_birkhoff(c);
  }
  throw std::invalid_argument("unknown regime");
}

}  // namespace spdeftle
