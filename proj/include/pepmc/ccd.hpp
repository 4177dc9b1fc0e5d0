#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pepmc/rng.hpp"

namespace pepmc::ccd {

/// Detector energy resolution, parametrized by the FWHM at a reference
/// energy. SqrtEnergy scales the FWHM with sqrt(E / E_ref).
struct ResolutionModel {
  enum class Scaling { Constant, SqrtEnergy };

  double fwhm_at_ref_keV = 0.320;
  double ref_energy_keV = 8.0;
  Scaling scaling = Scaling::Constant;

  double fwhm_at(double energy_keV) const;
  double sigma_at(double energy_keV) const;
};

/// Gaussian energy smearing. Negative draws are redrawn, which keeps the
/// shape above zero instead of piling mass at the clamp.
double smear_energy(double true_energy_keV, const ResolutionModel& model,
                    rng::Stream& stream);

struct EnergyCalibration {
  double gain_ev_per_adc = 1.0;
  double offset_ev = 0.0;
};

/// One CCD readout: a rectangular grid of non-negative ADC values.
struct Frame {
  int width = 256;
  int height = 256;
  int panel_id = 0;
  double exposure_min = 10.0;
  std::vector<std::uint16_t> adc;  // row-major, size width * height

  static Frame zeros(int width, int height, int panel_id = 0, double exposure_min = 10.0);

  std::uint16_t value(int x, int y) const { return adc[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

struct PixelHit {
  int x = 0;
  int y = 0;
  double energy_keV = 0.0;
};

/// Builds a synthetic frame: X-ray hits deposited into one pixel (85%) or
/// split across two neighbours (15%), Gaussian pixel noise, and a
/// Poisson-distributed number of straight charged-particle track segments
/// of at least 4 pixels.
Frame synthesize_frame(int width, int height, std::span<const PixelHit> hits,
                       double noise_sigma_adc, double track_rate_per_frame,
                       const EnergyCalibration& calibration, rng::Stream& stream,
                       int panel_id = 0, double exposure_min = 10.0);

enum class ClusterClass { AcceptedXRay, RejectedTrack, RejectedNoise };

struct ClusterPixel {
  int x = 0;
  int y = 0;
  std::uint16_t adc = 0;
};

struct Cluster {
  std::vector<ClusterPixel> pixels;
  double summed_adc = 0.0;
  ClusterClass classification = ClusterClass::RejectedNoise;

  int pixel_count() const { return static_cast<int>(pixels.size()); }
};

/// Connected-component clustering: pixels above the seed threshold grown
/// 4-connected over pixels above the neighbour threshold. Thresholds are
/// given in units of the pixel noise sigma.
std::vector<Cluster> find_clusters(const Frame& frame, double seed_threshold_sigma,
                                   double neighbor_threshold_sigma,
                                   double noise_sigma_adc);

/// Shape-based event selection: 1-2 pixels is an X-ray, 4+ pixels or a
/// collinear triple is a track, anything else is noise.
ClusterClass classify_cluster(const Cluster& cluster);

/// Cluster energy in keV: (gain * summed_adc + offset) / 1000.
double calibrate(const Cluster& cluster, const EnergyCalibration& calibration);

/// Flat binary frame dump: 16-byte little-endian header (u32 width,
/// u32 height, u32 panel_id, f32 exposure_min) followed by row-major u16
/// ADC values.
void write_frame_binary(const Frame& frame, const std::filesystem::path& path);
Frame read_frame_binary(const std::filesystem::path& path);

/// Plain-text grid: one CSV row of ADC values per pixel row.
void write_frame_csv(const Frame& frame, const std::filesystem::path& path);

}  // namespace pepmc::ccd
