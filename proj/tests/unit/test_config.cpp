#include <fstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "pepmc/config.hpp"
#include "pepmc/errors.hpp"

using namespace pepmc;
using config::GeometricFactorSetting;
using config::RunConfig;

namespace {

const std::filesystem::path kPaperConfig =
    std::filesystem::path(PEPMC_SOURCE_DIR) / "configs" / "paper.cfg";

// minimal valid config; sections can be replaced or appended per test
std::string base_config() {
  return "[run]\n"
         "master_seed = 1\n";
}

std::filesystem::path write_config(const testsupport::TempDir& dir, const std::string& text,
                                   const std::string& name = "test.cfg") {
  const auto path = dir.path() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

ConfigError::Kind parse_kind(const std::filesystem::path& path) {
  try {
    config::parse_config(path);
  } catch (const ConfigError& err) {
    return err.kind();
  }
  FAIL("expected a ConfigError");
  return ConfigError::Kind::Validation;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("the shipped campaign config parses") {
  const RunConfig cfg = config::parse_config(kPaperConfig);
  CHECK(cfg.master_seed == 271828);
  CHECK(cfg.run.current_A == 40.0);
  CHECK(cfg.run.live_time_min == 14510.0);
  CHECK(cfg.run.readout_cadence_min == 10.0);
  CHECK(cfg.run.ccd_live_count == 14);
  CHECK(cfg.run.integrated_charge_C == doctest::Approx(34824000.0).epsilon(1e-12));

  CHECK(cfg.geometry.cylinder_radius_cm == 4.5);
  CHECK(cfg.geometry.cylinder_thickness_cm == 0.005);
  CHECK(cfg.geometry.ccd_panel_count == 16);
  CHECK(cfg.geometry.live_panel_count() == 14);
  CHECK_FALSE(cfg.geometry.live_panel_mask[14]);
  CHECK_FALSE(cfg.geometry.live_panel_mask[15]);

  CHECK(cfg.conductor.length_cm == 8.8);
  CHECK(cfg.conductor.mean_free_path_cm == 3.9e-6);
  CHECK(cfg.conductor.capture_to_scatter_floor == 0.1);

  CHECK(cfg.background.rate_per_keV_per_frame == 0.40724);
  CHECK(cfg.background.is_flat());
  CHECK(cfg.beta2_over_2 == 0.0);

  CHECK(cfg.resolution.fwhm_at_ref_keV == 0.320);
  CHECK(cfg.resolution.scaling == ccd::ResolutionModel::Scaling::Constant);

  CHECK(cfg.bin_lo_keV == 6.064);
  CHECK(cfg.bin_width_keV == 0.010);
  CHECK(cfg.bin_count == 300);
  CHECK(cfg.binning_hi_keV() == doctest::Approx(9.064).epsilon(1e-12));
  CHECK(cfg.roi.lo_keV == 7.564);
  CHECK(cfg.roi.hi_keV == 7.894);

  CHECK(cfg.geometric_factor.mode == GeometricFactorSetting::Mode::Auto);
  CHECK(cfg.ccd_efficiency == 0.48);
  CHECK(cfg.mc_samples == 1000000);
  REQUIRE(cfg.attenuation.has_value());
  CHECK(cfg.attenuation->nodes().size() == 13);

  CHECK(cfg.frames.width == 256);
  CHECK(cfg.frames.frame_count == 10);
  CHECK(cfg.frames.seed_threshold_sigma == 5.0);
  CHECK(cfg.frames.neighbor_threshold_sigma == 3.0);
  CHECK(cfg.frames.format == config::FramesSpec::Format::Binary);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("missing file") {
  testsupport::TempDir dir("pepmc-cfg-");
  try {
    config::parse_config(dir.path() / "absent.cfg");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.kind() == ConfigError::Kind::MissingFile);
    CHECK(err.exit_code() == ExitCode::ConfigMissing);
  }
}

TEST_CASE("master seed is required") {
  testsupport::TempDir dir("pepmc-cfg-");
  const auto path = write_config(dir, "[run]\ncurrent_A = 40\n");
  try {
    config::parse_config(path);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.kind() == ConfigError::Kind::Validation);
    CHECK(std::string(err.what()).find("master_seed") != std::string::npos);
  }
}

TEST_CASE("defaults reproduce the campaign") {
  testsupport::TempDir dir("pepmc-cfg-");
  const RunConfig cfg = config::parse_config(write_config(dir, base_config()));
  CHECK(cfg.run.current_A == 40.0);
  CHECK(cfg.run.live_time_min == 14510.0);
  CHECK(cfg.background.rate_per_keV_per_frame == 0.40724);
  CHECK(cfg.bin_lo_keV == 6.064);
  CHECK(cfg.roi.lo_keV == 7.564);
  CHECK(cfg.ccd_efficiency == 0.48);
  CHECK(cfg.geometric_factor.mode == GeometricFactorSetting::Mode::Unset);
  CHECK_FALSE(cfg.attenuation.has_value());
  CHECK(cfg.geometry.live_panel_count() == 14);
}

TEST_CASE("syntax errors carry the line number") {
  testsupport::TempDir dir("pepmc-cfg-");

  SUBCASE("value without key") {
    const auto path = write_config(dir, "[run]\nmaster_seed = 1\nnot a key value line\n");
    try {
      config::parse_config(path);
      FAIL("expected a ConfigError");
    } catch (const ConfigError& err) {
      CHECK(err.kind() == ConfigError::Kind::Syntax);
      CHECK(err.line() == 3);
      CHECK(err.exit_code() == ExitCode::ConfigSyntax);
    }
  }

  SUBCASE("broken section header") {
    CHECK(parse_kind(write_config(dir, "[run\nmaster_seed = 1\n")) ==
          ConfigError::Kind::Syntax);
  }

  SUBCASE("key outside a section") {
    CHECK(parse_kind(write_config(dir, "master_seed = 1\n")) == ConfigError::Kind::Syntax);
  }
}

TEST_CASE("duplicate keys name both lines") {
  testsupport::TempDir dir("pepmc-cfg-");
  const auto path =
      write_config(dir, "[run]\nmaster_seed = 1\ncurrent_A = 40\ncurrent_A = 50\n");
  try {
    config::parse_config(path);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.kind() == ConfigError::Kind::Validation);
    const std::string what = err.what();
    CHECK(what.find("run.current_A") != std::string::npos);
    CHECK(what.find("3") != std::string::npos);
    CHECK(what.find("4") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected") {
  testsupport::TempDir dir("pepmc-cfg-");
  const auto path = write_config(dir, base_config() + "[geometry]\ncylinder_radius = 4.5\n");
  try {
    config::parse_config(path);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.kind() == ConfigError::Kind::Validation);
    CHECK(std::string(err.what()).find("geometry.cylinder_radius") != std::string::npos);
  }
}

TEST_CASE("typed values are strict") {
  testsupport::TempDir dir("pepmc-cfg-");
  CHECK(parse_kind(write_config(dir, "[run]\nmaster_seed = seven\n")) ==
        ConfigError::Kind::Validation);
  CHECK(parse_kind(write_config(dir, "[run]\nmaster_seed = 1\ncurrent_A = 4O\n")) ==
        ConfigError::Kind::Validation);
  CHECK(parse_kind(write_config(dir, base_config() + "[binning]\ncount = 10.5\n")) ==
        ConfigError::Kind::Validation);
}

TEST_CASE("validation failures") {
  testsupport::TempDir dir("pepmc-cfg-");

  SUBCASE("negative current") {
    CHECK(parse_kind(write_config(dir, "[run]\nmaster_seed = 1\ncurrent_A = -40\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("roi outside the binning span") {
    CHECK(parse_kind(write_config(dir, base_config() + "[roi]\nlo_keV = 5.0\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("inverted roi") {
    CHECK(parse_kind(write_config(
              dir, base_config() + "[roi]\nlo_keV = 7.9\nhi_keV = 7.5\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("fixed geometric factor out of range") {
    CHECK(parse_kind(write_config(
              dir, base_config() + "[transport]\ngeometric_factor = 1.5\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("auto without a table") {
    CHECK(parse_kind(write_config(
              dir, base_config() + "[transport]\ngeometric_factor = auto\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("bad efficiency") {
    CHECK(parse_kind(write_config(
              dir, base_config() + "[transport]\nccd_efficiency = 0\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("too few mc samples") {
    CHECK(parse_kind(write_config(
              dir, base_config() + "[transport]\nmc_samples = 10\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("beta out of range") {
    CHECK(parse_kind(write_config(dir, base_config() + "[signal]\nbeta2_over_2 = 1.5\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("dead panel index out of range") {
    CHECK(parse_kind(write_config(dir, base_config() + "[geometry]\ndead_panels = 16\n")) ==
          ConfigError::Kind::Validation);
  }
}

TEST_CASE("geometric factor forms") {
  testsupport::TempDir dir("pepmc-cfg-");

  SUBCASE("fixed value") {
    const RunConfig cfg = config::parse_config(
        write_config(dir, base_config() + "[transport]\ngeometric_factor = 0.01008\n"));
    CHECK(cfg.geometric_factor.mode == GeometricFactorSetting::Mode::Fixed);
    CHECK(cfg.geometric_factor.value == 0.01008);
  }

  SUBCASE("not a number") {
    CHECK(parse_kind(write_config(
              dir, base_config() + "[transport]\ngeometric_factor = roughly2%\n")) ==
          ConfigError::Kind::Validation);
  }
}

TEST_CASE("dead panel list forms") {
  testsupport::TempDir dir("pepmc-cfg-");

  SUBCASE("none keeps every panel live") {
    const RunConfig cfg = config::parse_config(
        write_config(dir, base_config() + "[geometry]\ndead_panels = none\n"));
    CHECK(cfg.geometry.live_panel_count() == 16);
  }

  SUBCASE("explicit list") {
    const RunConfig cfg = config::parse_config(
        write_config(dir, base_config() + "[geometry]\ndead_panels = 0, 3 ,7\n"));
    CHECK(cfg.geometry.live_panel_count() == 13);
    CHECK_FALSE(cfg.geometry.live_panel_mask[0]);
    CHECK_FALSE(cfg.geometry.live_panel_mask[3]);
    CHECK_FALSE(cfg.geometry.live_panel_mask[7]);
  }

  SUBCASE("resizes with the panel count") {
    const RunConfig cfg = config::parse_config(write_config(
        dir, base_config() + "[geometry]\nccd_panel_count = 4\ndead_panels = 3\n"));
    CHECK(cfg.geometry.live_panel_count() == 3);
  }
}

TEST_CASE("relative paths resolve against the config directory") {
  testsupport::TempDir dir("pepmc-cfg-");
  std::filesystem::create_directory(dir.path() / "sub");
  {
    std::ofstream out(dir.path() / "sub" / "table.csv");
    out << "energy_keV,attenuation_length_cm\n1,1e-5\n20,3e-3\n";
  }
  const auto path = write_config(
      dir, base_config() + "[transport]\nattenuation_table = sub/table.csv\n");
  const RunConfig cfg = config::parse_config(path);
  REQUIRE(cfg.attenuation.has_value());
  CHECK(cfg.attenuation->nodes().size() == 2);
  CHECK(cfg.attenuation_path == dir.path() / "sub" / "table.csv");
}

TEST_CASE("broken attenuation table is a validation error") {
  testsupport::TempDir dir("pepmc-cfg-");
  {
    std::ofstream out(dir.path() / "bad.csv");
    out << "not,a,table\n";
  }
  CHECK(parse_kind(write_config(
            dir, base_config() + "[transport]\nattenuation_table = bad.csv\n")) ==
        ConfigError::Kind::Validation);
}

TEST_CASE("comments and spacing are tolerated") {
  testsupport::TempDir dir("pepmc-cfg-");
  const auto path = write_config(dir,
                                 "# leading comment\n"
                                 "\n"
                                 "[run]   # trailing comment\n"
                                 "  master_seed   =   99   # another\n"
                                 "\n"
                                 "[background]\n"
                                 "rate_per_keV_per_frame = 0.5\n");
  const RunConfig cfg = config::parse_config(path);
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.background.rate_per_keV_per_frame == 0.5);
}

TEST_CASE("background shape table") {
  testsupport::TempDir dir("pepmc-cfg-");
  {
    std::ofstream out(dir.path() / "shape.csv");
    out << "energy_keV,relative_intensity\n5.0,1.0\n9.5,2.0\n";
  }

  SUBCASE("table shape loads") {
    const RunConfig cfg = config::parse_config(write_config(
        dir, base_config() + "[background]\nshape = table\nshape_table = shape.csv\n"));
    CHECK_FALSE(cfg.background.is_flat());
    CHECK(cfg.background.shape_energy_keV.size() == 2);
  }

  SUBCASE("table shape needs a path") {
    CHECK(parse_kind(write_config(dir, base_config() + "[background]\nshape = table\n")) ==
          ConfigError::Kind::Validation);
  }

  SUBCASE("shape table must cover the binning span") {
    std::ofstream out(dir.path() / "narrow.csv");
    out << "energy_keV,relative_intensity\n7.0,1.0\n8.0,1.0\n";
    out.close();
    CHECK(parse_kind(write_config(
              dir, base_config() + "[background]\nshape = table\nshape_table = narrow.csv\n")) ==
          ConfigError::Kind::Validation);
  }
}

TEST_CASE("output directory stays as written") {
  testsupport::TempDir dir("pepmc-cfg-");
  const RunConfig cfg = config::parse_config(
      write_config(dir, base_config() + "[output]\ndirectory = results/run1\n"));
  // unlike input tables, the output directory resolves against the caller's
  // working directory, so the parser keeps it verbatim
  CHECK(cfg.output_dir == std::filesystem::path("results/run1"));
}

}  // TEST_SUITE
