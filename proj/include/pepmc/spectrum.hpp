#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pepmc::analysis {

enum class SpectrumLabel { CurrentOn, CurrentOff, Difference };

std::string to_string(SpectrumLabel label);
SpectrumLabel spectrum_label_from_string(const std::string& text);

/// Uniformly binned energy histogram. Raw spectra carry sqrt(N) errors;
/// difference spectra carry propagated errors and may go negative.
struct Spectrum {
  double bin_lo_keV = 0.0;
  double bin_width_keV = 0.0;
  std::vector<double> counts;
  std::vector<double> errors;
  double live_time_min = 0.0;
  SpectrumLabel label = SpectrumLabel::CurrentOn;

  std::size_t bin_count() const { return counts.size(); }
  double bin_edge(std::size_t i) const { return bin_lo_keV + static_cast<double>(i) * bin_width_keV; }
  double bin_center(std::size_t i) const { return bin_edge(i) + 0.5 * bin_width_keV; }
  double span_hi_keV() const { return bin_edge(bin_count()); }

  void validate() const;
};

struct Histogrammed {
  Spectrum spectrum;
  std::size_t underflow = 0;
  std::size_t overflow = 0;
};

/// Half-open binning [lo + i*w, lo + (i+1)*w); out-of-range energies are
/// counted in the under/overflow tallies, never silently dropped.
Histogrammed build_spectrum(std::span<const double> energies_keV, double bin_lo_keV,
                            double bin_width_keV, std::size_t bin_count,
                            double live_time_min, SpectrumLabel label);

/// on - norm*off with norm = on.live_time/off.live_time and errors added in
/// quadrature.
Spectrum subtract_spectra(const Spectrum& on, const Spectrum& off);

struct RegionOfInterest {
  double lo_keV = 7.564;
  double hi_keV = 7.894;

  void validate() const;
};

struct RoiCounts {
  double counts = 0.0;
  double error = 0.0;
};

/// Sums the bins whose centers fall in [roi.lo, roi.hi); errors combine in
/// quadrature.
RoiCounts roi_counts(const Spectrum& spectrum, const RegionOfInterest& roi);

void write_spectrum_csv(const Spectrum& spectrum, const std::filesystem::path& path);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace pepmc::analysis
