#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdeftle/amplitude.hpp"
#include "spdeftle/spde.hpp"

namespace spdeftle {

enum class Regime { I, II, III, IVCritical, IVSmallNu, ApproxOrder, Linearization, Density, Birkhoff };

std::string_view regime_name(Regime r);
std::optional<Regime> parse_regime(std::string_view name);

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

/// One Monte Carlo campaign.  Unset (NaN) parameters are filled with regime
/// defaults by resolve_campaign().
struct Campaign {
  Regime regime = Regime::I;
  std::string model = "allen-cahn";
  double nu = kUnset;
  double sigma = kUnset;
  double epsilon = kUnset;
  std::vector<double> epsilon_grid;
  std::size_t n_modes = 32;
  /// Fast time step; for density/birkhoff the slow step of the amplitude equation.
  double dt = 1e-3;
  /// Regime I: horizon in time units.  II/III: slow T (fast T/nu).  IV: slow T
  /// (fast T/sqrt(sigma)).  approx-order/linearization: T0 (fast T0/eps^2).
  /// birkhoff: averaging window.
  double slow_horizon = kUnset;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  std::string output_path = "spdeftle";

  // density / birkhoff
  AmplitudeVariant variant = AmplitudeVariant::A2;
  double cubic = -1.0;

  // regime II: the Omega_0 event is evaluated at this slow horizon by scanning
  // sample indices until omega0_events events are found or the scan limit is hit
  double omega0_horizon = 0.01;
  std::size_t omega0_events = 50;
  std::size_t omega0_scan_limit = 50000;

  /// 0: SPDEFTLE_THREADS from the environment, else hardware concurrency.
  unsigned threads = 0;
};

/// Fills regime defaults and returns every violated gate or range (empty if valid).
std::vector<std::string> resolve_campaign(Campaign& c);

struct SampleRecord {
  std::string subset = "main";
  std::size_t sample_index = 0;
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  std::optional<bool> event_omega0;
  std::optional<double> attractor_value;
  std::optional<double> error_sup;
  bool excluded = false;
  std::optional<double> epsilon;
  std::optional<double> stable_sup;
  std::optional<double> tilde_x4_integral;
  std::optional<double> amplitude_sup;
  std::optional<double> stable_l2_half;
  std::optional<double> birkhoff_average;
};

struct SummaryRow {
  std::string metric;
  double value = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<bool> pass;  // unset for informational rows
};

struct RegimeReport {
  Campaign campaign;
  std::vector<SampleRecord> samples;
  std::vector<SummaryRow> summary;
  bool passed = false;

  const SummaryRow* find(std::string_view metric) const;
};

RegimeReport run_regime_I(const Campaign& c);
RegimeReport run_regime_II(const Campaign& c);
RegimeReport run_regime_III(const Campaign& c);
RegimeReport run_regime_IV(const Campaign& c);
RegimeReport run_approx_order(const Campaign& c);
RegimeReport run_linearization(const Campaign& c);
RegimeReport run_density_birkhoff(const Campaign& c);

/// Resolves, checks gates (throws std::invalid_argument listing all violations) and dispatches.
RegimeReport run_campaign(Campaign c);

/// Recomputes the summary rows and verdict from the per-sample records.
void summarize(RegimeReport& report);

/// Runs fn(i) for i in [0, count) on worker threads; results in index order.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

unsigned resolve_threads(unsigned requested);

}  // namespace spdeftle
