#include "pepmc/transport.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace pepmc::transport {

PhotonOutcome transport_photon(const Vec3& origin, double energy_keV,
                               const DetectorGeometry& geometry,
                               const AttenuationTable& table, rng::Stream& stream) {
  const Vec3 direction = sample_isotropic_direction(stream);
  const double copper_cm = copper_path_total(origin, direction, geometry);
  const double survival = attenuation_survival(copper_cm, energy_keV, table);
  if (stream.uniform() >= survival) return {PhotonOutcome::Tag::AbsorbedInCopper, -1, {}};

  const auto hit = intersect_panel(origin, direction, geometry);
  if (hit && geometry.live_panel_mask[hit->panel])
    return {PhotonOutcome::Tag::HitPanel, hit->panel, hit->impact};
  return {PhotonOutcome::Tag::Escaped, -1, {}};
}

GeometricFactorEstimate estimate_geometric_factor(const DetectorGeometry& geometry,
                                                  double energy_keV,
                                                  const AttenuationTable& table,
                                                  double ccd_efficiency,
                                                  std::uint64_t sample_count,
                                                  std::uint64_t seed, int threads) {
  geometry.validate();
  if (!(ccd_efficiency > 0.0) || ccd_efficiency > 1.0)
    throw std::domain_error("ccd efficiency must be in (0, 1]");
  if (sample_count < 1000)
    throw std::domain_error("geometric factor estimate needs at least 1000 samples");

  int worker_count = threads > 0 ? threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  if (worker_count < 1) worker_count = 1;
  if (static_cast<std::uint64_t>(worker_count) > sample_count)
    worker_count = static_cast<int>(sample_count);

  // photon i draws only from its own (seed, "transport", i) substream;
  // workers just partition the index range and count hits
  std::vector<std::uint64_t> hits(worker_count, 0);
  auto worker = [&](int w) {
    const std::uint64_t begin = sample_count * w / worker_count;
    const std::uint64_t end = sample_count * (w + 1) / worker_count;
    std::uint64_t local_hits = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      rng::Stream stream(seed, "transport", i);
      const Vec3 origin = sample_emission_point(geometry, stream);
      const PhotonOutcome outcome =
          transport_photon(origin, energy_keV, geometry, table, stream);
      if (outcome.tag == PhotonOutcome::Tag::HitPanel) ++local_hits;
    }
    hits[w] = local_hits;
  };

  if (worker_count == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  std::uint64_t hit_count = 0;
  for (std::uint64_t h : hits) hit_count += h;

  GeometricFactorEstimate estimate;
  estimate.sample_count = sample_count;
  estimate.seed = seed;
  estimate.ccd_efficiency_applied = ccd_efficiency;
  const double p = static_cast<double>(hit_count) / static_cast<double>(sample_count);
  estimate.survival_times_acceptance = p;
  estimate.statistical_error = std::sqrt(p * (1.0 - p) / static_cast<double>(sample_count));
  estimate.total_factor = p * ccd_efficiency;
  return estimate;
}

}  // namespace pepmc::transport
