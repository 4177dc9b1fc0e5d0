#include "pepmc/spectrum.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pepmc/errors.hpp"

namespace pepmc::analysis {

std::string to_string(SpectrumLabel label) {
  switch (label) {
    case SpectrumLabel::CurrentOn: return "CurrentOn";
    case SpectrumLabel::CurrentOff: return "CurrentOff";
    case SpectrumLabel::Difference: return "Difference";
  }
  throw std::domain_error("unknown spectrum label");
}

SpectrumLabel spectrum_label_from_string(const std::string& text) {
  if (text == "CurrentOn") return SpectrumLabel::CurrentOn;
  if (text == "CurrentOff") return SpectrumLabel::CurrentOff;
  if (text == "Difference") return SpectrumLabel::Difference;
  throw std::domain_error("unknown spectrum label: " + text);
}

void Spectrum::validate() const {
  if (counts.empty()) throw std::domain_error("spectrum must have at least one bin");
  if (errors.size() != counts.size())
    throw std::domain_error("spectrum error array must match the bin count");
  if (!(bin_width_keV > 0.0)) throw std::domain_error("spectrum bin width must be > 0");
  if (!(live_time_min > 0.0)) throw std::domain_error("spectrum live time must be > 0");
  if (label != SpectrumLabel::Difference) {
    for (double c : counts)
      if (c < 0.0) throw std::domain_error("raw spectrum counts must be >= 0");
  }
}

void RegionOfInterest::validate() const {
  if (!(lo_keV < hi_keV)) throw std::domain_error("ROI bounds must satisfy lo < hi");
}

Histogrammed build_spectrum(std::span<const double> energies_keV, double bin_lo_keV,
                            double bin_width_keV, std::size_t bin_count,
                            double live_time_min, SpectrumLabel label) {
  if (!(bin_width_keV > 0.0)) throw std::domain_error("bin width must be > 0");
  if (bin_count < 1) throw std::domain_error("bin count must be >= 1");
  if (!(live_time_min > 0.0)) throw std::domain_error("live time must be > 0");

  Histogrammed result;
  result.spectrum.bin_lo_keV = bin_lo_keV;
  result.spectrum.bin_width_keV = bin_width_keV;
  result.spectrum.live_time_min = live_time_min;
  result.spectrum.label = label;
  result.spectrum.counts.assign(bin_count, 0.0);
  result.spectrum.errors.assign(bin_count, 0.0);

  for (double energy : energies_keV) {
    const double offset = (energy - bin_lo_keV) / bin_width_keV;
    if (offset < 0.0) {
      ++result.underflow;
      continue;
    }
    const auto bin = static_cast<std::size_t>(offset);
    if (bin >= bin_count) {
      ++result.overflow;
      continue;
    }
    result.spectrum.counts[bin] += 1.0;
  }
  for (std::size_t i = 0; i < bin_count; ++i)
    result.spectrum.errors[i] = std::sqrt(result.spectrum.counts[i]);
  return result;
}

Spectrum subtract_spectra(const Spectrum& on, const Spectrum& off) {
  on.validate();
  off.validate();
  if (on.bin_count() != off.bin_count() || on.bin_lo_keV != off.bin_lo_keV ||
      on.bin_width_keV != off.bin_width_keV)
    throw std::domain_error("subtract_spectra: binning mismatch");

  const double norm = on.live_time_min / off.live_time_min;
  Spectrum diff;
  diff.bin_lo_keV = on.bin_lo_keV;
  diff.bin_width_keV = on.bin_width_keV;
  diff.live_time_min = on.live_time_min;
  diff.label = SpectrumLabel::Difference;
  diff.counts.resize(on.bin_count());
  diff.errors.resize(on.bin_count());
  for (std::size_t i = 0; i < on.bin_count(); ++i) {
    diff.counts[i] = on.counts[i] - norm * off.counts[i];
    diff.errors[i] = std::hypot(on.errors[i], norm * off.errors[i]);
  }
  return diff;
}

RoiCounts roi_counts(const Spectrum& spectrum, const RegionOfInterest& roi) {
  spectrum.validate();
  roi.validate();
  if (roi.lo_keV < spectrum.bin_lo_keV || roi.hi_keV > spectrum.span_hi_keV())
    throw std::domain_error("ROI extends outside the spectrum span");

  RoiCounts result;
  double variance = 0.0;
  for (std::size_t i = 0; i < spectrum.bin_count(); ++i) {
    const double center = spectrum.bin_center(i);
    if (center < roi.lo_keV || center >= roi.hi_keV) continue;
    result.counts += spectrum.counts[i];
    variance += spectrum.errors[i] * spectrum.errors[i];
  }
  result.error = std::sqrt(variance);
  return result;
}

void write_spectrum_csv(const Spectrum& spectrum, const std::filesystem::path& path) {
  spectrum.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open spectrum file for writing: " + path.string());
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "# live_time_min=%.17g label=%s\n",
                spectrum.live_time_min, to_string(spectrum.label).c_str());
  out << buffer;
  out << "bin_lo_keV,bin_hi_keV,counts,error\n";
  for (std::size_t i = 0; i < spectrum.bin_count(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g,%.17g,%.17g\n", spectrum.bin_edge(i),
                  spectrum.bin_edge(i + 1), spectrum.counts[i], spectrum.errors[i]);
    out << buffer;
  }
  if (!out) throw IoError("failed writing spectrum file: " + path.string());
}

namespace {

[[noreturn]] void parse_fail_at(const std::filesystem::path& path, int line_no,
                                long long byte_offset, const std::string& what) {
  throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + what +
                " (byte offset " + std::to_string(byte_offset) + ")");
}

}  // namespace

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectrum file: " + path.string());

  Spectrum spectrum;
  bool saw_metadata = false;
  bool saw_header = false;
  std::vector<double> lows;
  std::vector<double> highs;
  std::string line;
  int line_no = 0;
  long long offset = 0;
  long long line_start = 0;
  const auto parse_fail = [&](const std::filesystem::path& p, int ln, const std::string& what) {
    parse_fail_at(p, ln, line_start, what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line_start = offset;
    offset += static_cast<long long>(line.size()) + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "live_time_min") {
          try {
            spectrum.live_time_min = std::stod(value);
          } catch (const std::exception&) {
            parse_fail(path, line_no, "bad live_time_min value '" + value + "'");
          }
          saw_metadata = true;
        } else if (key == "label") {
          try {
            spectrum.label = spectrum_label_from_string(value);
          } catch (const std::domain_error& err) {
            parse_fail(path, line_no, err.what());
          }
        }
      }
      continue;
    }
    if (!saw_header) {
      if (line != "bin_lo_keV,bin_hi_keV,counts,error")
        parse_fail(path, line_no, "expected header 'bin_lo_keV,bin_hi_keV,counts,error'");
      saw_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    double values[4] = {0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(row, field, ','))
        parse_fail(path, line_no, "expected 4 comma-separated fields");
      try {
        values[i] = std::stod(field);
      } catch (const std::exception&) {
        parse_fail(path, line_no, "bad numeric field '" + field + "'");
      }
    }
    if (std::getline(row, field, ',')) parse_fail(path, line_no, "expected 4 fields, found more");
    lows.push_back(values[0]);
    highs.push_back(values[1]);
    spectrum.counts.push_back(values[2]);
    spectrum.errors.push_back(values[3]);
  }

  if (!saw_header) throw IoError(path.string() + ": missing column header");
  if (!saw_metadata) throw IoError(path.string() + ": missing '# live_time_min=...' metadata");
  if (lows.empty()) throw IoError(path.string() + ": no bins");

  spectrum.bin_lo_keV = lows.front();
  spectrum.bin_width_keV = highs.front() - lows.front();
  if (!(spectrum.bin_width_keV > 0.0)) throw IoError(path.string() + ": non-positive bin width");
  const double tolerance = 1e-9 * spectrum.bin_width_keV;
  for (std::size_t i = 0; i < lows.size(); ++i) {
    if (std::abs(lows[i] - spectrum.bin_edge(i)) > tolerance ||
        std::abs(highs[i] - spectrum.bin_edge(i + 1)) > tolerance)
      throw IoError(path.string() + ": bins are not uniform and contiguous");
  }
  spectrum.validate();
  return spectrum;
}

}  // namespace pepmc::analysis
