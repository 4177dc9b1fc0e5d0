#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "pepmc/config.hpp"
#include "pepmc/errors.hpp"
#include "pepmc/pipeline.hpp"
#include "pepmc/version.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config_path, "Run configuration file")
      ->required()
      ->type_name("PATH");
  cmd->add_option("--seed", options.seed, "Master seed override")->type_name("U64");
  cmd->add_option("--out", options.out_dir, "Output directory override")->type_name("DIR");
  cmd->add_option("--threads", options.threads, "Worker threads, 0 = hardware")->type_name("N");
}

struct Loaded {
  pepmc::config::RunConfig cfg;
  fs::path out_dir;
  fs::path config_path;
};

// Output directory priority: --out flag, then PEPMC_OUT_DIR, then the
// config's output.directory.
Loaded load(const CommonOptions& options) {
  Loaded loaded;
  loaded.config_path = options.config_path;
  loaded.cfg = pepmc::config::parse_config(loaded.config_path);
  if (options.seed) loaded.cfg.master_seed = *options.seed;
  if (!options.out_dir.empty()) {
    loaded.out_dir = options.out_dir;
  } else if (const char* env = std::getenv("PEPMC_OUT_DIR"); env && *env) {
    loaded.out_dir = env;
  } else {
    loaded.out_dir = loaded.cfg.output_dir;
  }
  return loaded;
}

int exit_code_of(pepmc::ExitCode code) { return static_cast<int>(code); }

template <typename Work>
int guarded(Work&& work) {
  try {
    work();
    return exit_code_of(pepmc::ExitCode::Ok);
  } catch (const pepmc::ConfigError& err) {
    std::cerr << "pepmc: " << err.what() << "\n";
    return exit_code_of(err.exit_code());
  } catch (const pepmc::IoError& err) {
    std::cerr << "pepmc: " << err.what() << "\n";
    return exit_code_of(pepmc::ExitCode::Io);
  } catch (const std::exception& err) {
    std::cerr << "pepmc: " << err.what() << "\n";
    return exit_code_of(pepmc::ExitCode::Domain);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo search for forbidden X-ray transitions in a conducting target"};
  app.set_version_flag("--version", pepmc::kVersion);
  app.require_subcommand(1);

  CommonOptions simulate_opts;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate current-on and current-off spectra from the configured model");
  add_common(simulate, simulate_opts);

  CommonOptions analyze_opts;
  std::string on_file;
  std::string off_file;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Subtract the paired spectra and count the ROI");
  add_common(analyze, analyze_opts);
  analyze->add_option("--on", on_file, "Current-on spectrum CSV (default <out>/spectrum_on.csv)")
      ->type_name("PATH");
  analyze
      ->add_option("--off", off_file, "Current-off spectrum CSV (default <out>/spectrum_off.csv)")
      ->type_name("PATH");

  CommonOptions limit_opts;
  std::string analysis_report;
  double n_sigma = 3.0;
  CLI::App* limit =
      app.add_subcommand("limit", "Turn an analysis report into a beta^2/2 upper limit");
  add_common(limit, limit_opts);
  limit
      ->add_option("--report", analysis_report,
                   "Analysis report (default <out>/analysis_report.txt)")
      ->type_name("PATH");
  limit->add_option("--n-sigma", n_sigma, "Confidence multiplier, default 3");

  CommonOptions project_opts;
  std::string limit_report;
  double background_scale = 1.0;
  double live_time_scale = 1.0;
  double current_scale = 1.0;
  CLI::App* project =
      app.add_subcommand("project", "Scale an existing limit to a hypothetical campaign");
  add_common(project, project_opts);
  project
      ->add_option("--report", limit_report, "Limit report (default <out>/limit_report.txt)")
      ->type_name("PATH");
  project->add_option("--background-scale", background_scale, "Background rate factor");
  project->add_option("--live-time-scale", live_time_scale, "Live time factor");
  project->add_option("--current-scale", current_scale, "Current factor");

  CommonOptions geom_opts;
  long long samples_override = 0;
  CLI::App* geom = app.add_subcommand(
      "geom-factor", "Monte Carlo estimate of the geometric detection factor");
  add_common(geom, geom_opts);
  geom->add_option("--samples", samples_override, "Sample count override")->type_name("N");

  CommonOptions frames_opts;
  CLI::App* frames =
      app.add_subcommand("frames", "Generate a synthetic CCD frame corpus and cluster it");
  add_common(frames, frames_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "pepmc: " << err.what() << "\n";
    return exit_code_of(pepmc::ExitCode::Usage);
  }

  if (simulate->parsed()) {
    return guarded([&] {
      const Loaded loaded = load(simulate_opts);
      const auto output =
          pepmc::pipeline::run_simulate(loaded.cfg, loaded.out_dir, loaded.config_path,
                                        simulate_opts.threads);
      std::cout << "wrote " << output.on_path.string() << "\n"
                << "wrote " << output.off_path.string() << "\n"
                << "wrote " << output.provenance_path.string() << "\n";
    });
  }
  if (analyze->parsed()) {
    return guarded([&] {
      const Loaded loaded = load(analyze_opts);
      const fs::path on = on_file.empty() ? loaded.out_dir / "spectrum_on.csv" : fs::path(on_file);
      const fs::path off =
          off_file.empty() ? loaded.out_dir / "spectrum_off.csv" : fs::path(off_file);
      const auto output = pepmc::pipeline::run_analyze(on, off, loaded.cfg, loaded.out_dir);
      std::cout << "wrote " << output.diff_path.string() << "\n"
                << "wrote " << output.report_path.string() << "\n"
                << "delta_counts = " << pepmc::pipeline::format_g17(output.delta_counts)
                << " +- " << pepmc::pipeline::format_g17(output.delta_error) << "\n";
    });
  }
  if (limit->parsed()) {
    return guarded([&] {
      const Loaded loaded = load(limit_opts);
      const fs::path report =
          analysis_report.empty() ? loaded.out_dir / "analysis_report.txt"
                                  : fs::path(analysis_report);
      const auto output = pepmc::pipeline::run_limit(report, loaded.cfg, loaded.out_dir, n_sigma,
                                                     limit_opts.threads);
      std::cout << "wrote " << output.report_path.string() << "\n"
                << "beta2_over_2 <= "
                << pepmc::pipeline::format_g17(output.result.beta2_over_2_limit) << " at "
                << output.result.confidence_label << "\n";
    });
  }
  if (project->parsed()) {
    return guarded([&] {
      const Loaded loaded = load(project_opts);
      const fs::path report =
          limit_report.empty() ? loaded.out_dir / "limit_report.txt" : fs::path(limit_report);
      const auto output =
          pepmc::pipeline::run_project(report, loaded.cfg, loaded.out_dir, background_scale,
                                       live_time_scale, current_scale);
      std::cout << "wrote " << output.report_path.string() << "\n"
                << "projected beta2_over_2 <= "
                << pepmc::pipeline::format_g17(output.projected_limit) << "\n";
    });
  }
  if (geom->parsed()) {
    return guarded([&] {
      Loaded loaded = load(geom_opts);
      if (samples_override > 0) loaded.cfg.mc_samples = samples_override;
      const auto output =
          pepmc::pipeline::run_geom_factor(loaded.cfg, loaded.out_dir, geom_opts.threads);
      std::cout << "wrote " << output.report_path.string() << "\n"
                << "survival_times_acceptance = "
                << pepmc::pipeline::format_g17(output.estimate.survival_times_acceptance)
                << " +- " << pepmc::pipeline::format_g17(output.estimate.statistical_error)
                << "\n"
                << "total_factor = "
                << pepmc::pipeline::format_g17(output.estimate.total_factor) << "\n";
    });
  }
  if (frames->parsed()) {
    return guarded([&] {
      const Loaded loaded = load(frames_opts);
      const auto output = pepmc::pipeline::run_frames(loaded.cfg, loaded.out_dir);
      std::cout << "wrote " << output.frames_written << " frames to "
                << loaded.out_dir.string() << "\n"
                << "wrote " << output.clusters_path.string() << "\n"
                << "wrote " << output.report_path.string() << "\n";
    });
  }
  std::cerr << "pepmc: no subcommand selected\n";
  return exit_code_of(pepmc::ExitCode::Usage);
}
