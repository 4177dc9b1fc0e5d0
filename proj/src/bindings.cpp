#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "pepmc/attenuation.hpp"
#include "pepmc/ccd.hpp"
#include "pepmc/config.hpp"
#include "pepmc/geometry.hpp"
#include "pepmc/limit.hpp"
#include "pepmc/physics.hpp"
#include "pepmc/pipeline.hpp"
#include "pepmc/rng.hpp"
#include "pepmc/spectrum.hpp"
#include "pepmc/transport.hpp"
#include "pepmc/version.hpp"

namespace py = pybind11;
using namespace pepmc;

PYBIND11_MODULE(_pepmc, m) {
  m.doc() = "Monte Carlo photon transport and counting-limit toolkit";
  m.attr("__version__") = kVersion;

  py::class_<rng::Stream>(m, "Stream")
      .def(py::init([](std::uint64_t seed, const std::string& stage, std::uint64_t index) {
             return rng::Stream(seed, stage, index);
           }),
           py::arg("master_seed"), py::arg("stage"), py::arg("index") = 0)
      .def("uniform", py::overload_cast<>(&rng::Stream::uniform))
      .def("uniform_in", py::overload_cast<double, double>(&rng::Stream::uniform),
           py::arg("lo"), py::arg("hi"))
      .def("normal", py::overload_cast<>(&rng::Stream::normal))
      .def("poisson", &rng::Stream::poisson, py::arg("mean"));

  py::class_<physics::ConductorSpec>(m, "ConductorSpec")
      .def(py::init<>())
      .def_readwrite("length_cm", &physics::ConductorSpec::length_cm)
      .def_readwrite("mean_free_path_cm", &physics::ConductorSpec::mean_free_path_cm)
      .def_readwrite("capture_to_scatter_floor",
                     &physics::ConductorSpec::capture_to_scatter_floor);

  py::class_<physics::RunSummary>(m, "RunSummary")
      .def(py::init<>())
      .def_static("from_constant_current", &physics::RunSummary::from_constant_current,
                  py::arg("current_A"), py::arg("live_time_min"),
                  py::arg("readout_cadence_min") = 10.0, py::arg("ccd_live_count") = 14)
      .def_readwrite("integrated_charge_C", &physics::RunSummary::integrated_charge_C)
      .def_readwrite("current_A", &physics::RunSummary::current_A)
      .def_readwrite("live_time_min", &physics::RunSummary::live_time_min)
      .def_readwrite("readout_cadence_min", &physics::RunSummary::readout_cadence_min)
      .def_readwrite("ccd_live_count", &physics::RunSummary::ccd_live_count);

  m.def("new_electron_count", &physics::new_electron_count, py::arg("charge_C"));
  m.def("internal_scatter_count", &physics::internal_scatter_count, py::arg("conductor"));
  m.def("signal_coefficient", &physics::signal_coefficient, py::arg("run"),
        py::arg("conductor"), py::arg("geometric_factor"));
  m.def("expected_signal_counts", &physics::expected_signal_counts, py::arg("beta2_over_2"),
        py::arg("coefficient"));

  py::class_<transport::DetectorGeometry>(m, "DetectorGeometry")
      .def(py::init<>())
      .def_readwrite("cylinder_radius_cm", &transport::DetectorGeometry::cylinder_radius_cm)
      .def_readwrite("cylinder_thickness_cm",
                     &transport::DetectorGeometry::cylinder_thickness_cm)
      .def_readwrite("cylinder_height_cm", &transport::DetectorGeometry::cylinder_height_cm)
      .def_readwrite("ccd_standoff_cm", &transport::DetectorGeometry::ccd_standoff_cm)
      .def_readwrite("ccd_panel_count", &transport::DetectorGeometry::ccd_panel_count)
      .def_readwrite("ccd_chip_width_cm", &transport::DetectorGeometry::ccd_chip_width_cm)
      .def_readwrite("ccd_chip_height_cm", &transport::DetectorGeometry::ccd_chip_height_cm)
      .def_readwrite("chips_per_panel", &transport::DetectorGeometry::chips_per_panel)
      .def_readwrite("live_panel_mask", &transport::DetectorGeometry::live_panel_mask)
      .def("validate", &transport::DetectorGeometry::validate);

  py::class_<transport::AttenuationTable>(m, "AttenuationTable")
      .def_static("load_csv", &transport::AttenuationTable::load_csv, py::arg("path"))
      .def("attenuation_length_cm", &transport::AttenuationTable::attenuation_length_cm,
           py::arg("energy_keV"))
      .def_property_readonly("min_energy_keV", &transport::AttenuationTable::min_energy_keV)
      .def_property_readonly("max_energy_keV", &transport::AttenuationTable::max_energy_keV);

  py::class_<transport::GeometricFactorEstimate>(m, "GeometricFactorEstimate")
      .def_readonly("survival_times_acceptance",
                    &transport::GeometricFactorEstimate::survival_times_acceptance)
      .def_readonly("statistical_error",
                    &transport::GeometricFactorEstimate::statistical_error)
      .def_readonly("ccd_efficiency_applied",
                    &transport::GeometricFactorEstimate::ccd_efficiency_applied)
      .def_readonly("total_factor", &transport::GeometricFactorEstimate::total_factor)
      .def_readonly("sample_count", &transport::GeometricFactorEstimate::sample_count)
      .def_readonly("seed", &transport::GeometricFactorEstimate::seed);

  m.def("estimate_geometric_factor", &transport::estimate_geometric_factor,
        py::arg("geometry"), py::arg("energy_keV"), py::arg("table"),
        py::arg("ccd_efficiency"), py::arg("sample_count"), py::arg("seed"),
        py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::enum_<analysis::SpectrumLabel>(m, "SpectrumLabel")
      .value("CurrentOn", analysis::SpectrumLabel::CurrentOn)
      .value("CurrentOff", analysis::SpectrumLabel::CurrentOff)
      .value("Difference", analysis::SpectrumLabel::Difference);

  py::class_<analysis::Spectrum>(m, "Spectrum")
      .def(py::init<>())
      .def_readwrite("bin_lo_keV", &analysis::Spectrum::bin_lo_keV)
      .def_readwrite("bin_width_keV", &analysis::Spectrum::bin_width_keV)
      .def_readwrite("counts", &analysis::Spectrum::counts)
      .def_readwrite("errors", &analysis::Spectrum::errors)
      .def_readwrite("live_time_min", &analysis::Spectrum::live_time_min)
      .def_readwrite("label", &analysis::Spectrum::label)
      .def("bin_center", &analysis::Spectrum::bin_center, py::arg("i"));

  py::class_<analysis::Histogrammed>(m, "Histogrammed")
      .def_readonly("spectrum", &analysis::Histogrammed::spectrum)
      .def_readonly("underflow", &analysis::Histogrammed::underflow)
      .def_readonly("overflow", &analysis::Histogrammed::overflow);

  py::class_<analysis::RegionOfInterest>(m, "RegionOfInterest")
      .def(py::init<>())
      .def(py::init([](double lo, double hi) {
             return analysis::RegionOfInterest{lo, hi};
           }),
           py::arg("lo_keV"), py::arg("hi_keV"))
      .def_readwrite("lo_keV", &analysis::RegionOfInterest::lo_keV)
      .def_readwrite("hi_keV", &analysis::RegionOfInterest::hi_keV);

  m.def(
      "build_spectrum",
      [](const std::vector<double>& energies, double bin_lo, double bin_width,
         std::size_t bin_count, double live_time, analysis::SpectrumLabel label) {
        return analysis::build_spectrum(energies, bin_lo, bin_width, bin_count, live_time,
                                        label);
      },
      py::arg("energies_keV"), py::arg("bin_lo_keV"), py::arg("bin_width_keV"),
      py::arg("bin_count"), py::arg("live_time_min"),
      py::arg("label") = analysis::SpectrumLabel::CurrentOn);
  m.def("subtract_spectra", &analysis::subtract_spectra, py::arg("on"), py::arg("off"));
  m.def(
      "roi_counts",
      [](const analysis::Spectrum& spectrum, const analysis::RegionOfInterest& roi) {
        const auto result = analysis::roi_counts(spectrum, roi);
        return py::make_tuple(result.counts, result.error);
      },
      py::arg("spectrum"), py::arg("roi"));
  m.def("read_spectrum_csv", &analysis::read_spectrum_csv, py::arg("path"));
  m.def("write_spectrum_csv", &analysis::write_spectrum_csv, py::arg("spectrum"),
        py::arg("path"));

  py::class_<analysis::LimitResult>(m, "LimitResult")
      .def_readonly("delta_counts", &analysis::LimitResult::delta_counts)
      .def_readonly("delta_error", &analysis::LimitResult::delta_error)
      .def_readonly("n_sigma", &analysis::LimitResult::n_sigma)
      .def_readonly("coefficient_K", &analysis::LimitResult::coefficient_K)
      .def_readonly("beta2_over_2_limit", &analysis::LimitResult::beta2_over_2_limit)
      .def_readonly("quon_half_1_plus_q", &analysis::LimitResult::quon_half_1_plus_q)
      .def_readonly("confidence_label", &analysis::LimitResult::confidence_label);

  m.def("compute_limit", &analysis::compute_limit, py::arg("delta_error"),
        py::arg("coefficient_K"), py::arg("n_sigma") = 3.0, py::arg("delta_counts") = 0.0);
  m.def("project_sensitivity", &analysis::project_sensitivity, py::arg("base"),
        py::arg("background_scale"), py::arg("live_time_scale"), py::arg("current_scale"));

  py::class_<ccd::ResolutionModel>(m, "ResolutionModel")
      .def(py::init<>())
      .def_readwrite("fwhm_at_ref_keV", &ccd::ResolutionModel::fwhm_at_ref_keV)
      .def_readwrite("ref_energy_keV", &ccd::ResolutionModel::ref_energy_keV)
      .def("sigma_at", &ccd::ResolutionModel::sigma_at, py::arg("energy_keV"));

  m.def("smear_energy", &ccd::smear_energy, py::arg("true_energy_keV"), py::arg("model"),
        py::arg("stream"));

  py::class_<config::RunConfig>(m, "RunConfig")
      .def_readwrite("master_seed", &config::RunConfig::master_seed)
      .def_readwrite("beta2_over_2", &config::RunConfig::beta2_over_2)
      .def_readwrite("mc_samples", &config::RunConfig::mc_samples)
      .def_readonly("geometry", &config::RunConfig::geometry)
      .def_readonly("conductor", &config::RunConfig::conductor)
      .def_readonly("run", &config::RunConfig::run)
      .def_readonly("roi", &config::RunConfig::roi)
      .def_readonly("bin_lo_keV", &config::RunConfig::bin_lo_keV)
      .def_readonly("bin_width_keV", &config::RunConfig::bin_width_keV)
      .def_readonly("bin_count", &config::RunConfig::bin_count)
      .def_readonly("ccd_efficiency", &config::RunConfig::ccd_efficiency)
      .def_property_readonly("output_dir", [](const config::RunConfig& cfg) {
        return cfg.output_dir.string();
      });

  m.def("parse_config", &config::parse_config, py::arg("path"));

  py::class_<pipeline::SimulatedPair>(m, "SimulatedPair")
      .def_readonly("on", &pipeline::SimulatedPair::on)
      .def_readonly("off", &pipeline::SimulatedPair::off)
      .def_readonly("on_background_events", &pipeline::SimulatedPair::on_background_events)
      .def_readonly("off_background_events", &pipeline::SimulatedPair::off_background_events)
      .def_readonly("signal_events", &pipeline::SimulatedPair::signal_events)
      .def_readonly("expected_signal_counts",
                    &pipeline::SimulatedPair::expected_signal_counts);

  m.def("simulate_spectra", &pipeline::simulate_spectra, py::arg("config"),
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_simulate",
      [](const config::RunConfig& cfg, const std::filesystem::path& out_dir,
         const std::filesystem::path& config_path, int threads) {
        const auto output = pipeline::run_simulate(cfg, out_dir, config_path, threads);
        return py::make_tuple(output.on_path, output.off_path, output.provenance_path);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("config_path"), py::arg("threads") = 0);
  m.def(
      "run_analyze",
      [](const std::filesystem::path& on, const std::filesystem::path& off,
         const config::RunConfig& cfg, const std::filesystem::path& out_dir) {
        const auto output = pipeline::run_analyze(on, off, cfg, out_dir);
        return py::make_tuple(output.diff_path, output.report_path, output.delta_counts,
                              output.delta_error);
      },
      py::arg("on_file"), py::arg("off_file"), py::arg("config"), py::arg("out_dir"));
  m.def(
      "run_limit",
      [](const std::filesystem::path& report, const config::RunConfig& cfg,
         const std::filesystem::path& out_dir, double n_sigma, int threads) {
        const auto output = pipeline::run_limit(report, cfg, out_dir, n_sigma, threads);
        return py::make_tuple(output.report_path, output.result);
      },
      py::arg("analysis_report"), py::arg("config"), py::arg("out_dir"),
      py::arg("n_sigma") = 3.0, py::arg("threads") = 0);
}
