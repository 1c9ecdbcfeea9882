#pragma once

#include <string>
#include <string_view>

namespace spdeftle {

enum class ModelId { AllenCahn, SwiftHohenberg, SurfaceGrowth };

enum class BasisKind { Sine, Cosine };

/// Which quantity the X-norm integrates: field values (L4) or first derivatives (W14 seminorm).
enum class XSpace { L4, W14 };

/// Catalog entry for one of the three example equations.
///
/// Modes are labelled by an integer wavenumber m >= first_wavenumber with
/// wavenumber q_m = m*pi/domain_length.  Everything here is independent of the
/// truncation size; see SpectralSpace for the discretized tables.
struct ModelSpec {
  ModelId id = ModelId::AllenCahn;
  std::string name;
  double domain_length = 0.0;
  BasisKind basis = BasisKind::Sine;
  int first_wavenumber = 1;
  int kernel_wavenumber = 1;
  XSpace x_space = XSpace::L4;
  int sh_k = 1;  // Swift-Hohenberg domain multiple; unused otherwise
  bool shifted_laplacian_drift = false;  // surface growth: nu*u becomes -nu*u_xx

  double wavenumber(int m) const;
  double eigenvalue(int m) const;
  double noise_amplitude(int m) const;
  /// Multiplier of nu in the linear drift of mode m (1 unless shifted_laplacian_drift).
  double drift_weight(int m) const;
  /// Smallest |lambda_m| over non-kernel modes.
  double spectral_gap() const;
};

ModelSpec allen_cahn();
ModelSpec swift_hohenberg(int k = 1);
ModelSpec surface_growth(double length = 3.14159265358979323846, bool shifted_laplacian_drift = false);

/// Accepts "allen-cahn", "swift-hohenberg", "surface-growth".
ModelSpec model_by_name(std::string_view name);

std::string_view model_name(ModelId id);

}  // namespace spdeftle
