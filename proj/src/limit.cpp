#include "pepmc/limit.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pepmc::analysis {

std::string confidence_label_for(double n_sigma) {
  if (!(n_sigma > 0.0)) throw std::domain_error("n_sigma must be > 0");
  const double coverage = 100.0 * std::erf(n_sigma / std::sqrt(2.0));
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f%% CL", coverage);
  return buffer;
}

LimitResult compute_limit(double delta_error, double coefficient_K, double n_sigma,
                          double delta_counts) {
  if (!(delta_error > 0.0)) throw std::domain_error("compute_limit: delta_error must be > 0");
  if (!(coefficient_K > 0.0)) throw std::domain_error("compute_limit: coefficient K must be > 0");
  if (!(n_sigma > 0.0)) throw std::domain_error("compute_limit: n_sigma must be > 0");

  LimitResult result;
  result.delta_counts = delta_counts;
  result.delta_error = delta_error;
  result.n_sigma = n_sigma;
  result.coefficient_K = coefficient_K;
  result.beta2_over_2_limit = n_sigma * delta_error / coefficient_K;
  result.quon_half_1_plus_q = result.beta2_over_2_limit;
  result.confidence_label = confidence_label_for(n_sigma);
  return result;
}

double project_sensitivity(const LimitResult& base, double background_scale,
                           double live_time_scale, double current_scale) {
  if (!(base.beta2_over_2_limit > 0.0))
    throw std::domain_error("project_sensitivity: base limit must be > 0");
  if (!(background_scale > 0.0) || !(live_time_scale > 0.0) || !(current_scale > 0.0))
    throw std::domain_error("project_sensitivity: scales must be > 0");
  return base.beta2_over_2_limit * std::sqrt(background_scale * live_time_scale) /
         (current_scale * live_time_scale);
}

}  // namespace pepmc::analysis
