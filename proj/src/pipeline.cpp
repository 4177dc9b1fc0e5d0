#include "pepmc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pepmc/ccd.hpp"
#include "pepmc/errors.hpp"
#include "pepmc/physics.hpp"
#include "pepmc/rng.hpp"
#include "pepmc/version.hpp"

namespace pepmc::pipeline {

namespace {

namespace fs = std::filesystem;

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory: " + dir.string());
}

double frames_per_run(const config::RunConfig& cfg) {
  return cfg.run.live_time_min / cfg.run.readout_cadence_min * cfg.run.ccd_live_count;
}

// Draws energies from the piecewise-linear shape table, restricted to the
// binning span.
class ShapeSampler {
 public:
  ShapeSampler(const config::BackgroundModel& background, double lo, double hi) {
    const auto& xs = background.shape_energy_keV;
    const auto& ys = background.shape_intensity;
    auto value_at = [&](double x) {
      const auto it = std::upper_bound(xs.begin(), xs.end(), x);
      const std::size_t hi_idx = std::min<std::size_t>(
          std::max<std::size_t>(1, static_cast<std::size_t>(it - xs.begin())), xs.size() - 1);
      const std::size_t lo_idx = hi_idx - 1;
      const double t = (x - xs[lo_idx]) / (xs[hi_idx] - xs[lo_idx]);
      return ys[lo_idx] + t * (ys[hi_idx] - ys[lo_idx]);
    };
    x_.push_back(lo);
    y_.push_back(value_at(lo));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] > lo && xs[i] < hi) {
        x_.push_back(xs[i]);
        y_.push_back(ys[i]);
      }
    }
    x_.push_back(hi);
    y_.push_back(value_at(hi));
    cumulative_.assign(x_.size(), 0.0);
    for (std::size_t i = 1; i < x_.size(); ++i)
      cumulative_[i] =
          cumulative_[i - 1] + 0.5 * (y_[i] + y_[i - 1]) * (x_[i] - x_[i - 1]);
    if (!(cumulative_.back() > 0.0))
      throw std::domain_error("background shape has zero mass over the binning span");
  }

  double sample(rng::Stream& stream) const {
    const double target = stream.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const std::size_t seg = std::min<std::size_t>(
        std::max<std::size_t>(1, static_cast<std::size_t>(it - cumulative_.begin())),
        cumulative_.size() - 1);
    const double w = x_[seg] - x_[seg - 1];
    const double y0 = y_[seg - 1];
    const double dy = y_[seg] - y0;
    const double tau = (target - cumulative_[seg - 1]) / w;
    double t;
    if (std::abs(dy) < 1e-12 * std::max(1.0, std::abs(y0))) {
      t = y0 > 0.0 ? tau / y0 : 0.5;
    } else {
      t = (-y0 + std::sqrt(y0 * y0 + 2.0 * dy * tau)) / dy;
    }
    t = std::clamp(t, 0.0, 1.0);
    return x_[seg - 1] + t * w;
  }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> cumulative_;
};

std::string hex_u64(std::uint64_t value) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "0x%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

const std::string& require_key(const std::map<std::string, std::string>& report,
                               const std::string& key, const fs::path& path) {
  const auto it = report.find(key);
  if (it == report.end()) throw IoError(path.string() + ": missing key '" + key + "'");
  return it->second;
}

double require_number(const std::map<std::string, std::string>& report, const std::string& key,
                      const fs::path& path) {
  const std::string& text = require_key(report, key, path);
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": key '" + key + "' has a non-numeric value '" + text + "'");
  }
}

}  // namespace

std::string format_g17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::uint64_t file_fnv1a64(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for hashing: " + path.string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return rng::fnv1a64(bytes.str());
}

void write_kv_report(const fs::path& path, const std::string& report_type,
                     const std::vector<std::pair<std::string, std::string>>& fields) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report for writing: " + path.string());
  out << "# pepmc report\n";
  out << "report_type = " << report_type << "\n";
  out << "format_version = " << kReportFormatVersion << "\n";
  for (const auto& [key, value] : fields) out << key << " = " << value << "\n";
  if (!out) throw IoError("failed writing report: " + path.string());
}

std::map<std::string, std::string> read_kv_report(const fs::path& path,
                                                  const std::string& expected_type) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path.string());
  std::map<std::string, std::string> report;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    auto trim = [](std::string text) {
      const auto b = text.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = text.find_last_not_of(" \t");
      return text.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    if (!report.emplace(key, value).second)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                    "'");
  }
  const auto type = report.find("report_type");
  if (type == report.end() || type->second != expected_type)
    throw IoError(path.string() + ": not a '" + expected_type + "' report");
  return report;
}

GeometricFactorResolution resolve_geometric_factor(const config::RunConfig& cfg, int threads) {
  using Mode = config::GeometricFactorSetting::Mode;
  GeometricFactorResolution resolution;
  switch (cfg.geometric_factor.mode) {
    case Mode::Fixed:
      resolution.total_factor = cfg.geometric_factor.value;
      resolution.source = "config";
      return resolution;
    case Mode::Auto: {
      if (!cfg.attenuation)
        throw ConfigError(ConfigError::Kind::Validation,
                          "geometric_factor = auto needs transport.attenuation_table");
      const auto estimate = transport::estimate_geometric_factor(
          cfg.geometry, physics::line(physics::LineId::PepViolatingKAlpha).energy_keV,
          *cfg.attenuation, cfg.ccd_efficiency,
          static_cast<std::uint64_t>(cfg.mc_samples), cfg.master_seed, threads);
      resolution.total_factor = estimate.total_factor;
      resolution.survival_times_acceptance = estimate.survival_times_acceptance;
      resolution.statistical_error = estimate.statistical_error;
      resolution.source = "monte_carlo";
      return resolution;
    }
    case Mode::Unset:
      break;
  }
  throw ConfigError(
      ConfigError::Kind::Validation,
      "transport.geometric_factor is not set; either run the geom-factor subcommand (needs "
      "transport.attenuation_table) and copy its total_factor into the config, set "
      "transport.geometric_factor = auto, or supply the reproduced campaign's value "
      "0.021 x 0.48 = 0.01008 directly");
}

SimulatedPair simulate_spectra(const config::RunConfig& cfg, int threads) {
  cfg.validate();
  SimulatedPair pair;

  const double lo = cfg.bin_lo_keV;
  const double hi = cfg.binning_hi_keV();
  const double span = hi - lo;
  const double background_mean =
      cfg.background.rate_per_keV_per_frame * span * frames_per_run(cfg);

  std::unique_ptr<ShapeSampler> shape;
  if (!cfg.background.is_flat())
    shape = std::make_unique<ShapeSampler>(cfg.background, lo, hi);

  double expected_signal = 0.0;
  if (cfg.beta2_over_2 > 0.0) {
    const auto resolution = resolve_geometric_factor(cfg, threads);
    pair.geometric_factor_used = resolution.total_factor;
    const double coefficient =
        physics::signal_coefficient(cfg.run, cfg.conductor, resolution.total_factor);
    expected_signal = physics::expected_signal_counts(cfg.beta2_over_2, coefficient);
  }
  pair.expected_signal_counts = expected_signal;

  auto draw_background = [&](const char* stage, std::uint64_t& event_count) {
    rng::Stream stream(cfg.master_seed, stage, 0);
    event_count = stream.poisson(background_mean);
    std::vector<double> energies;
    energies.reserve(event_count);
    for (std::uint64_t i = 0; i < event_count; ++i)
      energies.push_back(shape ? shape->sample(stream) : stream.uniform(lo, hi));
    return energies;
  };

  std::vector<double> on_energies = draw_background("bg-on", pair.on_background_events);
  const std::vector<double> off_energies = draw_background("bg-off", pair.off_background_events);

  if (expected_signal > 0.0) {
    rng::Stream stream(cfg.master_seed, "signal", 0);
    pair.signal_events = stream.poisson(expected_signal);
    const double line_keV = physics::line(physics::LineId::PepViolatingKAlpha).energy_keV;
    for (std::uint64_t i = 0; i < pair.signal_events; ++i)
      on_energies.push_back(ccd::smear_energy(line_keV, cfg.resolution, stream));
  }

  pair.on = analysis::build_spectrum(on_energies, lo, cfg.bin_width_keV, cfg.bin_count,
                                     cfg.run.live_time_min, analysis::SpectrumLabel::CurrentOn);
  pair.off = analysis::build_spectrum(off_energies, lo, cfg.bin_width_keV, cfg.bin_count,
                                      cfg.run.live_time_min, analysis::SpectrumLabel::CurrentOff);
  return pair;
}

SimulateOutput run_simulate(const config::RunConfig& cfg, const fs::path& out_dir,
                            const fs::path& config_path, int threads) {
  ensure_directory(out_dir);
  const SimulatedPair pair = simulate_spectra(cfg, threads);

  SimulateOutput output;
  output.on_path = out_dir / "spectrum_on.csv";
  output.off_path = out_dir / "spectrum_off.csv";
  output.provenance_path = out_dir / "provenance.txt";
  analysis::write_spectrum_csv(pair.on.spectrum, output.on_path);
  analysis::write_spectrum_csv(pair.off.spectrum, output.off_path);

  std::vector<std::pair<std::string, std::string>> fields;
  fields.emplace_back("tool_version", kVersion);
  fields.emplace_back("config_path", config_path.string());
  fields.emplace_back("config_fnv1a64", hex_u64(file_fnv1a64(config_path)));
  fields.emplace_back("master_seed", std::to_string(cfg.master_seed));
  fields.emplace_back("live_time_min", format_g17(cfg.run.live_time_min));
  fields.emplace_back("frames_per_run", format_g17(frames_per_run(cfg)));
  fields.emplace_back("background_rate_per_keV_per_frame",
                      format_g17(cfg.background.rate_per_keV_per_frame));
  fields.emplace_back("background_shape", cfg.background.is_flat() ? "flat" : "table");
  fields.emplace_back("beta2_over_2", format_g17(cfg.beta2_over_2));
  if (cfg.beta2_over_2 > 0.0) {
    fields.emplace_back("geometric_factor_used", format_g17(pair.geometric_factor_used));
    fields.emplace_back("expected_signal_counts", format_g17(pair.expected_signal_counts));
  }
  fields.emplace_back("on_background_events", std::to_string(pair.on_background_events));
  fields.emplace_back("off_background_events", std::to_string(pair.off_background_events));
  fields.emplace_back("signal_events", std::to_string(pair.signal_events));
  fields.emplace_back("on_underflow", std::to_string(pair.on.underflow));
  fields.emplace_back("on_overflow", std::to_string(pair.on.overflow));
  fields.emplace_back("off_underflow", std::to_string(pair.off.underflow));
  fields.emplace_back("off_overflow", std::to_string(pair.off.overflow));
  write_kv_report(output.provenance_path, "provenance", fields);
  return output;
}

AnalyzeOutput run_analyze(const fs::path& on_file, const fs::path& off_file,
                          const config::RunConfig& cfg, const fs::path& out_dir) {
  ensure_directory(out_dir);
  const analysis::Spectrum on = analysis::read_spectrum_csv(on_file);
  const analysis::Spectrum off = analysis::read_spectrum_csv(off_file);
  const analysis::Spectrum diff = analysis::subtract_spectra(on, off);

  AnalyzeOutput output;
  output.normalization = on.live_time_min / off.live_time_min;
  output.on = analysis::roi_counts(on, cfg.roi);
  output.off = analysis::roi_counts(off, cfg.roi);
  const analysis::RoiCounts delta = analysis::roi_counts(diff, cfg.roi);
  output.delta_counts = delta.counts;
  output.delta_error = delta.error;

  output.diff_path = out_dir / "spectrum_diff.csv";
  analysis::write_spectrum_csv(diff, output.diff_path);

  output.report_path = out_dir / "analysis_report.txt";
  write_kv_report(output.report_path, "analysis",
                  {{"roi_lo_keV", format_g17(cfg.roi.lo_keV)},
                   {"roi_hi_keV", format_g17(cfg.roi.hi_keV)},
                   {"live_time_on_min", format_g17(on.live_time_min)},
                   {"live_time_off_min", format_g17(off.live_time_min)},
                   {"normalization", format_g17(output.normalization)},
                   {"n_on", format_g17(output.on.counts)},
                   {"n_on_error", format_g17(output.on.error)},
                   {"n_off", format_g17(output.off.counts)},
                   {"n_off_error", format_g17(output.off.error)},
                   {"delta_counts", format_g17(output.delta_counts)},
                   {"delta_error", format_g17(output.delta_error)}});
  return output;
}

LimitOutput run_limit(const fs::path& analysis_report, const config::RunConfig& cfg,
                      const fs::path& out_dir, double n_sigma, int threads) {
  ensure_directory(out_dir);
  const auto report = read_kv_report(analysis_report, "analysis");
  const double delta_counts = require_number(report, "delta_counts", analysis_report);
  const double delta_error = require_number(report, "delta_error", analysis_report);

  LimitOutput output;
  output.geometric_factor = resolve_geometric_factor(cfg, threads);
  const double coefficient =
      physics::signal_coefficient(cfg.run, cfg.conductor, output.geometric_factor.total_factor);
  output.result = analysis::compute_limit(delta_error, coefficient, n_sigma, delta_counts);

  char rounded[32];
  std::snprintf(rounded, sizeof(rounded), "%.2g", output.result.beta2_over_2_limit);

  std::vector<std::pair<std::string, std::string>> fields;
  fields.emplace_back("delta_counts", format_g17(output.result.delta_counts));
  fields.emplace_back("delta_error", format_g17(output.result.delta_error));
  fields.emplace_back("n_sigma", format_g17(output.result.n_sigma));
  fields.emplace_back("integrated_charge_C", format_g17(cfg.run.integrated_charge_C));
  fields.emplace_back("new_electron_count",
                      format_g17(physics::new_electron_count(cfg.run.integrated_charge_C)));
  fields.emplace_back("internal_scatter_count",
                      format_g17(physics::internal_scatter_count(cfg.conductor)));
  fields.emplace_back("capture_to_scatter_floor",
                      format_g17(cfg.conductor.capture_to_scatter_floor));
  fields.emplace_back("geometric_factor", format_g17(output.geometric_factor.total_factor));
  fields.emplace_back("geometric_factor_source", output.geometric_factor.source);
  if (output.geometric_factor.source == "monte_carlo") {
    fields.emplace_back("survival_times_acceptance",
                        format_g17(output.geometric_factor.survival_times_acceptance));
    fields.emplace_back("survival_times_acceptance_error",
                        format_g17(output.geometric_factor.statistical_error));
    fields.emplace_back("ccd_efficiency", format_g17(cfg.ccd_efficiency));
  }
  fields.emplace_back("coefficient_K", format_g17(output.result.coefficient_K));
  fields.emplace_back("beta2_over_2_limit", format_g17(output.result.beta2_over_2_limit));
  fields.emplace_back("beta2_over_2_limit_2sig", rounded);
  fields.emplace_back("quon_half_1_plus_q", format_g17(output.result.quon_half_1_plus_q));
  fields.emplace_back("quon_q", format_g17(2.0 * output.result.quon_half_1_plus_q - 1.0));
  fields.emplace_back("confidence_label", output.result.confidence_label);

  output.report_path = out_dir / "limit_report.txt";
  write_kv_report(output.report_path, "limit", fields);
  return output;
}

ProjectOutput run_project(const fs::path& limit_report, const config::RunConfig&,
                          const fs::path& out_dir, double background_scale,
                          double live_time_scale, double current_scale) {
  ensure_directory(out_dir);
  const auto report = read_kv_report(limit_report, "limit");

  ProjectOutput output;
  output.base_limit = require_number(report, "beta2_over_2_limit", limit_report);
  analysis::LimitResult base;
  base.beta2_over_2_limit = output.base_limit;
  output.projected_limit =
      analysis::project_sensitivity(base, background_scale, live_time_scale, current_scale);

  output.report_path = out_dir / "projection_report.txt";
  write_kv_report(
      output.report_path, "projection",
      {{"base_beta2_over_2_limit", format_g17(output.base_limit)},
       {"background_scale", format_g17(background_scale)},
       {"live_time_scale", format_g17(live_time_scale)},
       {"current_scale", format_g17(current_scale)},
       {"scaling_model",
        "projected = base x sqrt(background_scale x live_time_scale) / (current_scale x "
        "live_time_scale)"},
       {"projected_beta2_over_2_limit", format_g17(output.projected_limit)}});
  return output;
}

GeomFactorOutput run_geom_factor(const config::RunConfig& cfg, const fs::path& out_dir,
                                 int threads) {
  ensure_directory(out_dir);
  if (!cfg.attenuation)
    throw ConfigError(ConfigError::Kind::Validation,
                      "geom-factor needs transport.attenuation_table in the config");

  GeomFactorOutput output;
  const double energy = physics::line(physics::LineId::PepViolatingKAlpha).energy_keV;
  output.estimate = transport::estimate_geometric_factor(
      cfg.geometry, energy, *cfg.attenuation, cfg.ccd_efficiency,
      static_cast<std::uint64_t>(cfg.mc_samples), cfg.master_seed, threads);

  const double relative =
      output.estimate.survival_times_acceptance > 0.0
          ? output.estimate.statistical_error / output.estimate.survival_times_acceptance
          : 0.0;
  output.report_path = out_dir / "geom_factor_report.txt";
  write_kv_report(output.report_path, "geometric_factor",
                  {{"energy_keV", format_g17(energy)},
                   {"sample_count", std::to_string(output.estimate.sample_count)},
                   {"master_seed", std::to_string(output.estimate.seed)},
                   {"survival_times_acceptance",
                    format_g17(output.estimate.survival_times_acceptance)},
                   {"statistical_error", format_g17(output.estimate.statistical_error)},
                   {"relative_statistical_error", format_g17(relative)},
                   {"ccd_efficiency", format_g17(output.estimate.ccd_efficiency_applied)},
                   {"total_factor", format_g17(output.estimate.total_factor)}});
  return output;
}

FramesOutput run_frames(const config::RunConfig& cfg, const fs::path& out_dir) {
  ensure_directory(out_dir);
  const config::FramesSpec& spec = cfg.frames;
  const ccd::EnergyCalibration calibration{spec.gain_ev_per_adc, spec.offset_ev};
  const double line_keV = physics::line(physics::LineId::NormalKAlpha).energy_keV;

  FramesOutput output;
  output.clusters_path = out_dir / "clusters.csv";
  std::ofstream clusters_out(output.clusters_path);
  if (!clusters_out) throw IoError("cannot open for writing: " + output.clusters_path.string());
  clusters_out << "frame,cluster,seed_x,seed_y,pixel_count,summed_adc,energy_keV,classification\n";

  for (int i = 0; i < spec.frame_count; ++i) {
    rng::Stream stream(cfg.master_seed, "frame", static_cast<std::uint64_t>(i));
    const std::uint64_t hit_count = stream.poisson(spec.hits_per_frame);
    std::vector<ccd::PixelHit> hits;
    hits.reserve(hit_count);
    for (std::uint64_t h = 0; h < hit_count; ++h) {
      ccd::PixelHit hit;
      hit.x = std::min(spec.width - 1, static_cast<int>(stream.uniform() * spec.width));
      hit.y = std::min(spec.height - 1, static_cast<int>(stream.uniform() * spec.height));
      hit.energy_keV = ccd::smear_energy(line_keV, cfg.resolution, stream);
      hits.push_back(hit);
    }
    output.hits_injected += hit_count;

    const ccd::Frame frame = ccd::synthesize_frame(
        spec.width, spec.height, hits, spec.noise_sigma_adc, spec.track_rate_per_frame,
        calibration, stream, i % cfg.geometry.ccd_panel_count, cfg.run.readout_cadence_min);

    char name[32];
    const bool binary = spec.format == config::FramesSpec::Format::Binary;
    std::snprintf(name, sizeof(name), "frame_%04d.%s", i, binary ? "bin" : "csv");
    if (binary) {
      ccd::write_frame_binary(frame, out_dir / name);
    } else {
      ccd::write_frame_csv(frame, out_dir / name);
    }
    ++output.frames_written;

    const auto clusters = ccd::find_clusters(frame, spec.seed_threshold_sigma,
                                             spec.neighbor_threshold_sigma, spec.noise_sigma_adc);
    int cluster_index = 0;
    for (const auto& cluster : clusters) {
      switch (cluster.classification) {
        case ccd::ClusterClass::AcceptedXRay: ++output.accepted_xray; break;
        case ccd::ClusterClass::RejectedTrack: ++output.rejected_track; break;
        case ccd::ClusterClass::RejectedNoise: ++output.rejected_noise; break;
      }
      const auto seed_pixel = std::max_element(
          cluster.pixels.begin(), cluster.pixels.end(),
          [](const ccd::ClusterPixel& a, const ccd::ClusterPixel& b) { return a.adc < b.adc; });
      const char* label = cluster.classification == ccd::ClusterClass::AcceptedXRay
                              ? "accepted_xray"
                              : cluster.classification == ccd::ClusterClass::RejectedTrack
                                    ? "rejected_track"
                                    : "rejected_noise";
      clusters_out << i << ',' << cluster_index++ << ',' << seed_pixel->x << ',' << seed_pixel->y
                   << ',' << cluster.pixel_count() << ',' << format_g17(cluster.summed_adc) << ','
                   << format_g17(ccd::calibrate(cluster, calibration)) << ',' << label << '\n';
    }
  }
  if (!clusters_out) throw IoError("failed writing: " + output.clusters_path.string());
  clusters_out.close();

  output.report_path = out_dir / "frames_report.txt";
  write_kv_report(
      output.report_path, "frames",
      {{"frame_count", std::to_string(output.frames_written)},
       {"frame_format",
        cfg.frames.format == config::FramesSpec::Format::Binary ? "binary" : "csv"},
       {"file_pattern", cfg.frames.format == config::FramesSpec::Format::Binary
                            ? "frame_%04d.bin"
                            : "frame_%04d.csv"},
       {"hits_injected", std::to_string(output.hits_injected)},
       {"clusters_total", std::to_string(output.accepted_xray + output.rejected_track +
                                         output.rejected_noise)},
       {"accepted_xray", std::to_string(output.accepted_xray)},
       {"rejected_track", std::to_string(output.rejected_track)},
       {"rejected_noise", std::to_string(output.rejected_noise)}});
  return output;
}

}  // namespace pepmc::pipeline
