#pragma once

#include <cstdint>

#include "pepmc/attenuation.hpp"
#include "pepmc/geometry.hpp"
#include "pepmc/rng.hpp"

namespace pepmc::transport {

/// Fate of one simulated photon.
struct PhotonOutcome {
  enum class Tag { AbsorbedInCopper, HitPanel, Escaped };

  Tag tag = Tag::Escaped;
  int panel = -1;  // valid when tag == HitPanel
  Vec3 impact;     // valid when tag == HitPanel
};

/// Follows one photon from `origin` inside the copper shell: draws an
/// isotropic direction, tests absorption against the Beer-Lambert
/// survival over the full copper path along the ray (including the far
/// wall when the photon crosses the hollow core), then propagates in a
/// straight line to the panel ring.
PhotonOutcome transport_photon(const Vec3& origin, double energy_keV,
                               const DetectorGeometry& geometry,
                               const AttenuationTable& table, rng::Stream& stream);

struct GeometricFactorEstimate {
  double survival_times_acceptance = 0.0;
  double statistical_error = 0.0;
  double ccd_efficiency_applied = 1.0;
  double total_factor = 0.0;
  std::uint64_t sample_count = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo estimate of the geometric factor at a given energy.
///
/// survival_times_acceptance is the fraction of emitted photons that reach
/// a live panel; total_factor folds in the CCD detection efficiency.
/// Deterministic for fixed (geometry, energy, efficiency, sample_count,
/// seed): every photon owns a counter-indexed substream, so the result is
/// bit-identical at any worker count. `threads` <= 0 picks the hardware
/// concurrency.
GeometricFactorEstimate estimate_geometric_factor(const DetectorGeometry& geometry,
                                                  double energy_keV,
                                                  const AttenuationTable& table,
                                                  double ccd_efficiency,
                                                  std::uint64_t sample_count,
                                                  std::uint64_t seed, int threads = 0);

}  // namespace pepmc::transport
