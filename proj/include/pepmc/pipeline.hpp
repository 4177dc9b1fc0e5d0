#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pepmc/config.hpp"
#include "pepmc/limit.hpp"
#include "pepmc/spectrum.hpp"
#include "pepmc/transport.hpp"

namespace pepmc::pipeline {

/// In-memory result of one simulated campaign pair.
struct SimulatedPair {
  analysis::Histogrammed on;
  analysis::Histogrammed off;
  std::uint64_t on_background_events = 0;
  std::uint64_t off_background_events = 0;
  std::uint64_t signal_events = 0;
  double expected_signal_counts = 0.0;
  double geometric_factor_used = 0.0;  // 0 when no signal was injected
};

/// Current-on and current-off campaigns from the configured background and
/// signal models. Pure function of the config (master seed included).
SimulatedPair simulate_spectra(const config::RunConfig& cfg, int threads = 0);

struct SimulateOutput {
  std::filesystem::path on_path;
  std::filesystem::path off_path;
  std::filesystem::path provenance_path;
};

SimulateOutput run_simulate(const config::RunConfig& cfg, const std::filesystem::path& out_dir,
                            const std::filesystem::path& config_path, int threads = 0);

struct AnalyzeOutput {
  std::filesystem::path diff_path;
  std::filesystem::path report_path;
  analysis::RoiCounts on;
  analysis::RoiCounts off;
  double normalization = 1.0;
  double delta_counts = 0.0;
  double delta_error = 0.0;
};

AnalyzeOutput run_analyze(const std::filesystem::path& on_file,
                          const std::filesystem::path& off_file, const config::RunConfig& cfg,
                          const std::filesystem::path& out_dir);

struct GeometricFactorResolution {
  double total_factor = 0.0;
  double survival_times_acceptance = 0.0;  // 0 when taken verbatim from config
  double statistical_error = 0.0;
  std::string source;  // "config" or "monte_carlo"
};

/// Total detection factor for the signal coefficient. Fixed config values
/// are used verbatim; `auto` runs the transport Monte Carlo at the
/// anomalous line energy. An unset factor raises a validation error that
/// names both remedies.
GeometricFactorResolution resolve_geometric_factor(const config::RunConfig& cfg,
                                                   int threads = 0);

struct LimitOutput {
  std::filesystem::path report_path;
  analysis::LimitResult result;
  GeometricFactorResolution geometric_factor;
};

LimitOutput run_limit(const std::filesystem::path& analysis_report,
                      const config::RunConfig& cfg, const std::filesystem::path& out_dir,
                      double n_sigma = 3.0, int threads = 0);

struct ProjectOutput {
  std::filesystem::path report_path;
  double base_limit = 0.0;
  double projected_limit = 0.0;
};

ProjectOutput run_project(const std::filesystem::path& limit_report,
                          const config::RunConfig& cfg, const std::filesystem::path& out_dir,
                          double background_scale, double live_time_scale, double current_scale);

struct GeomFactorOutput {
  std::filesystem::path report_path;
  transport::GeometricFactorEstimate estimate;
};

GeomFactorOutput run_geom_factor(const config::RunConfig& cfg,
                                 const std::filesystem::path& out_dir, int threads = 0);

struct FramesOutput {
  std::filesystem::path report_path;
  std::filesystem::path clusters_path;
  int frames_written = 0;
  std::uint64_t hits_injected = 0;
  std::uint64_t accepted_xray = 0;
  std::uint64_t rejected_track = 0;
  std::uint64_t rejected_noise = 0;
};

FramesOutput run_frames(const config::RunConfig& cfg, const std::filesystem::path& out_dir);

/// Key = value report files. Lines starting with '#' are ignored; keys are
/// unique; values keep embedded spaces.
void write_kv_report(const std::filesystem::path& path, const std::string& report_type,
                     const std::vector<std::pair<std::string, std::string>>& fields);
std::map<std::string, std::string> read_kv_report(const std::filesystem::path& path,
                                                  const std::string& expected_type);

std::string format_g17(double value);
std::uint64_t file_fnv1a64(const std::filesystem::path& path);

}  // namespace pepmc::pipeline
