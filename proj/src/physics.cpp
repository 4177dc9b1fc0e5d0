#include "pepmc/physics.hpp"

#include <cmath>
#include <stdexcept>

namespace pepmc::physics {

namespace {
constexpr TransitionLine kNormal{LineId::NormalKAlpha, 8.040, 0.0};
constexpr TransitionLine kViolating{LineId::PepViolatingKAlpha, 7.729, 0.010};
}  // namespace

const TransitionLine& line(LineId id) {
  return id == LineId::NormalKAlpha ? kNormal : kViolating;
}

double line_shift_keV() {
  return kNormal.energy_keV - kViolating.energy_keV;
}

void ConductorSpec::validate() const {
  if (!(length_cm > 0.0)) throw std::domain_error("conductor: length must be > 0");
  if (!(mean_free_path_cm > 0.0))
    throw std::domain_error("conductor: mean free path must be > 0");
  if (!(capture_to_scatter_floor > 0.0) || capture_to_scatter_floor > 1.0)
    throw std::domain_error("conductor: capture floor must be in (0, 1]");
}

RunSummary RunSummary::from_constant_current(double current_A, double live_time_min,
                                             double readout_cadence_min,
                                             int ccd_live_count) {
  RunSummary run;
  run.current_A = current_A;
  run.live_time_min = live_time_min;
  run.readout_cadence_min = readout_cadence_min;
  run.ccd_live_count = ccd_live_count;
  run.integrated_charge_C = current_A * live_time_min * 60.0;
  return run;
}

void RunSummary::validate() const {
  if (integrated_charge_C < 0.0) throw std::domain_error("run: charge must be >= 0");
  if (live_time_min < 0.0) throw std::domain_error("run: live time must be >= 0");
  if (ccd_live_count < 0 || ccd_live_count > 16)
    throw std::domain_error("run: live CCD count must be in [0, 16]");
}

double new_electron_count(double charge_C) {
  if (charge_C < 0.0) throw std::domain_error("new_electron_count: charge must be >= 0");
  return charge_C / kElectronChargeC;
}

double internal_scatter_count(const ConductorSpec& conductor) {
  conductor.validate();
  return conductor.length_cm / conductor.mean_free_path_cm;
}

double signal_coefficient(const RunSummary& run, const ConductorSpec& conductor,
                          double geometric_factor) {
  if (!(geometric_factor > 0.0) || !(geometric_factor < 1.0))
    throw std::domain_error("signal_coefficient: geometric factor must be in (0, 1)");
  run.validate();
  return new_electron_count(run.integrated_charge_C) * internal_scatter_count(conductor) *
         conductor.capture_to_scatter_floor * geometric_factor;
}

double expected_signal_counts(double beta2_over_2, double coefficient) {
  if (!(beta2_over_2 >= 0.0) || beta2_over_2 > 1.0)
    throw std::domain_error("expected_signal_counts: beta^2/2 must be in [0, 1]");
  return coefficient * beta2_over_2;
}

}  // namespace pepmc::physics
