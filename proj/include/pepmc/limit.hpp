#pragma once

#include <string>

namespace pepmc::analysis {

struct LimitResult {
  double delta_counts = 0.0;
  double delta_error = 0.0;
  double n_sigma = 3.0;
  double coefficient_K = 0.0;
  double beta2_over_2_limit = 0.0;
  double quon_half_1_plus_q = 0.0;
  std::string confidence_label;
};

/// Two-sided Gaussian coverage for an n-sigma interval, e.g. "99.7% CL"
/// for n = 3.
std::string confidence_label_for(double n_sigma);

/// Upper limit on beta^2/2: n_sigma * delta_error / K. The measured central
/// value is carried through for reporting but does not enter the bound.
LimitResult compute_limit(double delta_error, double coefficient_K, double n_sigma = 3.0,
                          double delta_counts = 0.0);

/// Scales a limit to a hypothetical campaign: the statistical error grows as
/// sqrt(background * live_time) while the signal coefficient grows as
/// current * live_time.
double project_sensitivity(const LimitResult& base, double background_scale,
                           double live_time_scale, double current_scale);

}  // namespace pepmc::analysis
