#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pepmc/attenuation.hpp"
#include "pepmc/ccd.hpp"
#include "pepmc/geometry.hpp"
#include "pepmc/physics.hpp"
#include "pepmc/spectrum.hpp"

namespace pepmc::config {

/// Background expectation per CCD frame. The shape table, when present,
/// is a piecewise-linear relative intensity over energy; empty means flat.
struct BackgroundModel {
  double rate_per_keV_per_frame = 0.40724;
  std::vector<double> shape_energy_keV;
  std::vector<double> shape_intensity;

  bool is_flat() const { return shape_energy_keV.empty(); }
};

/// How the total detection factor (acceptance x survival x efficiency)
/// entering the signal coefficient is obtained.
struct GeometricFactorSetting {
  enum class Mode { Unset, Auto, Fixed };
  Mode mode = Mode::Unset;
  double value = 0.0;  // Fixed only
};

struct FramesSpec {
  int width = 256;
  int height = 256;
  int frame_count = 10;
  double hits_per_frame = 40.0;
  double noise_sigma_adc = 10.0;
  double track_rate_per_frame = 3.0;
  double gain_ev_per_adc = 3.65;
  double offset_ev = 0.0;
  double seed_threshold_sigma = 5.0;
  double neighbor_threshold_sigma = 3.0;
  enum class Format { Binary, Csv };
  Format format = Format::Binary;
};

/// Everything a pipeline run needs. Defaults reproduce the published
/// campaign; only the master seed has no default.
struct RunConfig {
  transport::DetectorGeometry geometry;
  physics::ConductorSpec conductor;
  physics::RunSummary run = physics::RunSummary::from_constant_current(40.0, 14510.0);
  BackgroundModel background;
  double beta2_over_2 = 0.0;
  ccd::ResolutionModel resolution;
  double bin_lo_keV = 6.064;
  double bin_width_keV = 0.010;
  std::size_t bin_count = 300;
  analysis::RegionOfInterest roi;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "out";
  std::filesystem::path attenuation_path;  // empty when not configured
  std::optional<transport::AttenuationTable> attenuation;
  GeometricFactorSetting geometric_factor;
  double ccd_efficiency = 0.48;
  long long mc_samples = 1000000;
  FramesSpec frames;

  double binning_hi_keV() const {
    return bin_lo_keV + static_cast<double>(bin_count) * bin_width_keV;
  }

  void validate() const;  // throws ConfigError(Validation)
};

/// Parses and fully validates an INI-style config file. Relative paths in
/// the file resolve against the file's own directory. Unknown keys and
/// duplicate keys are rejected.
RunConfig parse_config(const std::filesystem::path& path);

}  // namespace pepmc::config
