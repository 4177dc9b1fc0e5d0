#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pepmc/transport.hpp"

using namespace pepmc;
using transport::AttenuationTable;
using transport::DetectorGeometry;
using transport::PhotonOutcome;
using transport::Vec3;

namespace {

const std::filesystem::path kTablePath =
    std::filesystem::path(PEPMC_SOURCE_DIR) / "data" / "cu_attenuation.csv";

AttenuationTable transparent_table() {
  return AttenuationTable({{1.0, 1e9}, {20.0, 1e9}});
}

AttenuationTable opaque_table() {
  return AttenuationTable({{1.0, 1e-12}, {20.0, 1e-12}});
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("estimate is reproducible") {
  DetectorGeometry geometry;
  const auto table = AttenuationTable::load_csv(kTablePath);
  const auto a = transport::estimate_geometric_factor(geometry, 7.729, table, 0.48, 20000, 7, 1);
  const auto b = transport::estimate_geometric_factor(geometry, 7.729, table, 0.48, 20000, 7, 1);
  CHECK(a.survival_times_acceptance == b.survival_times_acceptance);
  CHECK(a.total_factor == b.total_factor);
  CHECK(a.sample_count == 20000);
  CHECK(a.seed == 7);
}

TEST_CASE("estimate is invariant under the worker count") {
  DetectorGeometry geometry;
  const auto table = AttenuationTable::load_csv(kTablePath);
  const auto one = transport::estimate_geometric_factor(geometry, 7.729, table, 0.48, 20000, 7, 1);
  const auto three =
      transport::estimate_geometric_factor(geometry, 7.729, table, 0.48, 20000, 7, 3);
  CHECK(one.survival_times_acceptance == three.survival_times_acceptance);
  CHECK(one.statistical_error == three.statistical_error);
  CHECK(one.total_factor == three.total_factor);
}

// the estimator must agree exactly with a plain serial loop over the same
// per-photon substreams
TEST_CASE("estimate equals the direct per-photon loop") {
  DetectorGeometry geometry;
  const auto table = AttenuationTable::load_csv(kTablePath);
  const std::uint64_t samples = 5000;
  const std::uint64_t seed = 99;

  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    rng::Stream stream(seed, "transport", i);
    const Vec3 origin = transport::sample_emission_point(geometry, stream);
    const auto outcome = transport::transport_photon(origin, 7.729, geometry, table, stream);
    if (outcome.tag == PhotonOutcome::Tag::HitPanel) ++hits;
  }

  const auto estimate =
      transport::estimate_geometric_factor(geometry, 7.729, table, 1.0, samples, seed, 2);
  CHECK(estimate.survival_times_acceptance ==
        static_cast<double>(hits) / static_cast<double>(samples));
}

TEST_CASE("efficiency scales the total factor only") {
  DetectorGeometry geometry;
  const auto table = AttenuationTable::load_csv(kTablePath);
  const auto full = transport::estimate_geometric_factor(geometry, 7.729, table, 1.0, 20000, 7, 1);
  const auto half = transport::estimate_geometric_factor(geometry, 7.729, table, 0.5, 20000, 7, 1);
  CHECK(full.survival_times_acceptance == half.survival_times_acceptance);
  CHECK(half.total_factor == doctest::Approx(0.5 * full.total_factor).epsilon(1e-15));
}

TEST_CASE("opaque copper absorbs everything") {
  DetectorGeometry geometry;
  const auto estimate =
      transport::estimate_geometric_factor(geometry, 7.729, opaque_table(), 1.0, 5000, 3, 1);
  CHECK(estimate.survival_times_acceptance == 0.0);
  CHECK(estimate.statistical_error == 0.0);
}

TEST_CASE("dead panels never count as hits") {
  DetectorGeometry geometry;
  geometry.live_panel_mask.assign(16, false);
  const auto estimate =
      transport::estimate_geometric_factor(geometry, 7.729, transparent_table(), 1.0, 5000, 3, 1);
  CHECK(estimate.survival_times_acceptance == 0.0);
}

// with common random numbers and identical geometry, halving the
// attenuation length can only demote photons from hit to absorbed: every
// photon sees the same origin, direction and uniform draws, only the
// survival threshold drops
TEST_CASE("shorter attenuation length strictly shrinks the hit set") {
  DetectorGeometry geometry;
  const AttenuationTable clear({{1.0, 0.004}, {20.0, 0.004}});
  const AttenuationTable murky({{1.0, 0.002}, {20.0, 0.002}});

  const std::uint64_t samples = 20000;
  std::uint64_t clear_hits = 0;
  std::uint64_t murky_hits = 0;
  std::uint64_t both = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    bool hit_clear = false;
    {
      rng::Stream stream(11, "transport", i);
      const Vec3 origin = transport::sample_emission_point(geometry, stream);
      hit_clear = transport::transport_photon(origin, 7.729, geometry, clear, stream).tag ==
                  PhotonOutcome::Tag::HitPanel;
    }
    bool hit_murky = false;
    {
      rng::Stream stream(11, "transport", i);
      const Vec3 origin = transport::sample_emission_point(geometry, stream);
      hit_murky = transport::transport_photon(origin, 7.729, geometry, murky, stream).tag ==
                  PhotonOutcome::Tag::HitPanel;
    }
    clear_hits += hit_clear;
    murky_hits += hit_murky;
    both += hit_clear && hit_murky;
  }
  CHECK(murky_hits < clear_hits);
  CHECK(both == murky_hits);  // exact subset
}

TEST_CASE("hit fraction with real copper is near two percent") {
  DetectorGeometry geometry;
  const auto table = AttenuationTable::load_csv(kTablePath);
  const auto estimate =
      transport::estimate_geometric_factor(geometry, 7.729, table, 1.0, 200000, 2718, 0);
  CHECK(estimate.survival_times_acceptance > 0.015);
  CHECK(estimate.survival_times_acceptance < 0.035);
  CHECK(estimate.statistical_error > 0.0);
}

TEST_CASE("argument validation") {
  DetectorGeometry geometry;
  const auto table = transparent_table();
  CHECK_THROWS_AS(transport::estimate_geometric_factor(geometry, 7.729, table, 0.0, 5000, 1, 1),
                  std::domain_error);
  CHECK_THROWS_AS(transport::estimate_geometric_factor(geometry, 7.729, table, 1.5, 5000, 1, 1),
                  std::domain_error);
  CHECK_THROWS_AS(transport::estimate_geometric_factor(geometry, 7.729, table, 0.5, 999, 1, 1),
                  std::domain_error);
}

}  // TEST_SUITE
