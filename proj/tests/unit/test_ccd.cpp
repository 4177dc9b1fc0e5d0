#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pepmc/ccd.hpp"
#include "pepmc/errors.hpp"
#include "pepmc/physics.hpp"

using namespace pepmc;
using ccd::Cluster;
using ccd::ClusterClass;
using ccd::EnergyCalibration;
using ccd::Frame;
using ccd::PixelHit;
using ccd::ResolutionModel;

namespace {

Frame blank(int w, int h) { return Frame::zeros(w, h); }

void set(Frame& frame, int x, int y, std::uint16_t value) {
  frame.adc[static_cast<std::size_t>(y) * frame.width + x] = value;
}

int count_nonzero(const Frame& frame) {
  int n = 0;
  for (auto v : frame.adc) n += v != 0;
  return n;
}

long long sum_adc(const Frame& frame) {
  return std::accumulate(frame.adc.begin(), frame.adc.end(), 0LL);
}

}  // namespace

TEST_SUITE("ccd") {

TEST_CASE("resolution model") {
  ResolutionModel model;
  CHECK(model.fwhm_at(8.0) == doctest::Approx(0.320).epsilon(1e-12));
  CHECK(model.fwhm_at(2.0) == doctest::Approx(0.320).epsilon(1e-12));
  CHECK(model.sigma_at(8.0) == doctest::Approx(0.320 / 2.35482).epsilon(1e-12));

  ResolutionModel scaled = model;
  scaled.scaling = ResolutionModel::Scaling::SqrtEnergy;
  CHECK(scaled.fwhm_at(8.0) == doctest::Approx(0.320).epsilon(1e-12));
  CHECK(scaled.fwhm_at(2.0) == doctest::Approx(0.160).epsilon(1e-12));

  ResolutionModel bad = model;
  bad.fwhm_at_ref_keV = 0.0;
  CHECK_THROWS_AS(bad.fwhm_at(8.0), std::domain_error);
}

TEST_CASE("smearing is a plain gaussian draw when positive") {
  ResolutionModel model;
  rng::Stream a(42, "smear", 0);
  rng::Stream b(42, "smear", 0);
  for (int i = 0; i < 200; ++i) {
    const double expected = 8.040 + model.sigma_at(8.040) * b.normal();
    REQUIRE(expected > 0.0);
    CHECK(ccd::smear_energy(8.040, model, a) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("smearing statistics reproduce the line width") {
  ResolutionModel model;
  rng::Stream stream(205, "smear", 1);
  const int draws = 40000;
  std::vector<double> centers;
  std::vector<double> counts;
  const double lo = 7.0, width = 0.010;
  const int bins = 200;
  counts.assign(bins, 0.0);
  for (int i = 0; i < bins; ++i) centers.push_back(lo + (i + 0.5) * width);
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double e = ccd::smear_energy(8.040, model, stream);
    sum += e;
    const int bin = static_cast<int>((e - lo) / width);
    if (bin >= 0 && bin < bins) counts[bin] += 1.0;
  }
  CHECK(sum / draws == doctest::Approx(8.040).epsilon(2e-4));

  const auto fit = testsupport::fit_gaussian_histogram(centers, counts);
  CHECK(fit.mean == doctest::Approx(8.040).epsilon(5e-4));
  CHECK(fit.sigma * physics::kFwhmPerSigma == doctest::Approx(0.320).epsilon(0.05));
}

TEST_CASE("smearing never returns non-positive energies") {
  ResolutionModel wide;
  wide.fwhm_at_ref_keV = 10.0;  // sigma far above the line energy
  rng::Stream stream(3, "smear", 2);
  for (int i = 0; i < 5000; ++i) CHECK(ccd::smear_energy(0.5, wide, stream) > 0.0);
  CHECK_THROWS_AS(ccd::smear_energy(0.0, wide, stream), std::domain_error);
}

TEST_CASE("frame zeros") {
  const Frame frame = Frame::zeros(16, 8, 3, 2.5);
  CHECK(frame.width == 16);
  CHECK(frame.height == 8);
  CHECK(frame.panel_id == 3);
  CHECK(frame.exposure_min == 2.5);
  CHECK(frame.adc.size() == 128);
  CHECK(sum_adc(frame) == 0);
  CHECK_THROWS_AS(Frame::zeros(0, 8), std::domain_error);
}

TEST_CASE("synthesis is deterministic in the stream") {
  const std::vector<PixelHit> hits{{10, 12, 8.04}, {60, 50, 7.7}};
  rng::Stream a(77, "frame", 0);
  rng::Stream b(77, "frame", 0);
  const Frame fa = ccd::synthesize_frame(64, 64, hits, 10.0, 3.0, {}, a);
  const Frame fb = ccd::synthesize_frame(64, 64, hits, 10.0, 3.0, {}, b);
  CHECK(fa.adc == fb.adc);
}

TEST_CASE("single hit conserves its charge") {
  const EnergyCalibration calibration{3.65, 0.0};
  // 7.3 keV / 3.65 eV per ADC = 2000 counts exactly
  const std::vector<PixelHit> hits{{20, 20, 7.3}};
  for (std::uint64_t i = 0; i < 50; ++i) {
    rng::Stream stream(123, "frame", i);
    const Frame frame = ccd::synthesize_frame(64, 64, hits, 0.0, 0.0, calibration, stream);
    CHECK(sum_adc(frame) == 2000);
    const int nz = count_nonzero(frame);
    CHECK(nz >= 1);
    CHECK(nz <= 2);
  }
}

TEST_CASE("split fraction matches the 85/15 sharing model") {
  const EnergyCalibration calibration{3.65, 0.0};
  const std::vector<PixelHit> hits{{20, 20, 7.3}};
  int split = 0;
  const int frames = 2000;
  for (std::uint64_t i = 0; i < frames; ++i) {
    rng::Stream stream(321, "frame", i);
    const Frame frame = ccd::synthesize_frame(64, 64, hits, 0.0, 0.0, calibration, stream);
    if (count_nonzero(frame) == 2) ++split;
  }
  const double fraction = static_cast<double>(split) / frames;
  // binomial 4-sigma band around 0.15 at n = 2000 is about +-0.032
  CHECK(fraction > 0.117);
  CHECK(fraction < 0.183);
}

TEST_CASE("split deposits keep both pixels between 30 and 70 percent") {
  const EnergyCalibration calibration{3.65, 0.0};
  const std::vector<PixelHit> hits{{20, 20, 7.3}};
  for (std::uint64_t i = 0; i < 2000; ++i) {
    rng::Stream stream(321, "frame", i);
    const Frame frame = ccd::synthesize_frame(64, 64, hits, 0.0, 0.0, calibration, stream);
    if (count_nonzero(frame) != 2) continue;
    for (auto v : frame.adc) {
      if (v == 0) continue;
      CHECK(v >= 2000 * 0.3 - 1);
      CHECK(v <= 2000 * 0.7 + 1);
    }
  }
}

TEST_CASE("hits accumulate and clamp at the ADC ceiling") {
  const EnergyCalibration calibration{1.0, 0.0};
  const std::vector<PixelHit> pile(40, PixelHit{5, 5, 7.0});  // 40 x 7000 ADC
  rng::Stream stream(9, "frame", 0);
  const Frame frame = ccd::synthesize_frame(16, 16, pile, 0.0, 0.0, calibration, stream);
  int maxed = 0;
  for (auto v : frame.adc) maxed += v == 65535;
  CHECK(maxed >= 1);
  CHECK_THROWS_AS(
      ccd::synthesize_frame(16, 16, std::vector<PixelHit>{{16, 0, 1.0}}, 0.0, 0.0, calibration,
                            stream),
      std::domain_error);
}

TEST_CASE("track count follows the configured rate") {
  int clusters_total = 0;
  const int frames = 300;
  for (std::uint64_t i = 0; i < frames; ++i) {
    rng::Stream stream(555, "frame", i);
    const Frame frame = ccd::synthesize_frame(256, 256, {}, 0.0, 3.0, {}, stream);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    for (const auto& cluster : clusters) {
      // overlapping tracks can merge, so only the lower bound holds
      CHECK(cluster.pixel_count() >= 4);
      CHECK(cluster.classification == ClusterClass::RejectedTrack);
      for (const auto& px : cluster.pixels) CHECK(px.adc >= 2000);
    }
    clusters_total += static_cast<int>(clusters.size());
  }
  const double mean = static_cast<double>(clusters_total) / frames;
  // Poisson(3): 4 sigma on the mean of 300 frames is 0.4
  CHECK(mean > 2.6);
  CHECK(mean < 3.4);
}

TEST_CASE("no tracks at rate zero") {
  rng::Stream stream(555, "frame", 0);
  const Frame frame = ccd::synthesize_frame(128, 128, {}, 0.0, 0.0, {}, stream);
  CHECK(sum_adc(frame) == 0);
}

TEST_CASE("noise statistics") {
  rng::Stream stream(777, "frame", 0);
  const Frame frame = ccd::synthesize_frame(128, 128, {}, 10.0, 0.0, {}, stream);
  // negative draws clamp to zero, so roughly half the pixels stay dark and
  // the bright tail follows the half-normal
  const int n = 128 * 128;
  int dark = 0;
  int above_5sigma = 0;
  for (auto v : frame.adc) {
    dark += v == 0;
    above_5sigma += v > 50;
  }
  CHECK(std::abs(dark / static_cast<double>(n) - 0.5) < 0.03);
  CHECK(above_5sigma <= 3);
}

TEST_CASE("clustering on hand-built frames") {
  SUBCASE("empty frame yields nothing") {
    CHECK(ccd::find_clusters(blank(32, 32), 5.0, 3.0, 10.0).empty());
  }

  SUBCASE("single bright pixel is an accepted x-ray") {
    Frame frame = blank(32, 32);
    set(frame, 3, 4, 100);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].pixel_count() == 1);
    CHECK(clusters[0].summed_adc == 100.0);
    CHECK(clusters[0].classification == ClusterClass::AcceptedXRay);
    CHECK(clusters[0].pixels[0].x == 3);
    CHECK(clusters[0].pixels[0].y == 4);
  }

  SUBCASE("thresholds are strict inequalities") {
    Frame frame = blank(32, 32);
    set(frame, 3, 4, 50);  // exactly 5 sigma: not a seed
    CHECK(ccd::find_clusters(frame, 5.0, 3.0, 10.0).empty());

    Frame pair = blank(32, 32);
    set(pair, 3, 4, 100);
    set(pair, 4, 4, 30);  // exactly 3 sigma: not a neighbour
    const auto clusters = ccd::find_clusters(pair, 5.0, 3.0, 10.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].pixel_count() == 1);
  }

  SUBCASE("two-pixel split hit is accepted") {
    Frame frame = blank(32, 32);
    set(frame, 10, 10, 1400);
    set(frame, 10, 11, 600);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].pixel_count() == 2);
    CHECK(clusters[0].summed_adc == 2000.0);
    CHECK(clusters[0].classification == ClusterClass::AcceptedXRay);
  }

  SUBCASE("collinear triple is a track") {
    Frame frame = blank(32, 32);
    set(frame, 10, 10, 100);
    set(frame, 11, 10, 90);
    set(frame, 12, 10, 80);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].pixel_count() == 3);
    CHECK(clusters[0].classification == ClusterClass::RejectedTrack);
  }

  SUBCASE("bent triple is noise") {
    Frame frame = blank(32, 32);
    set(frame, 10, 10, 100);
    set(frame, 11, 10, 90);
    set(frame, 11, 11, 80);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].classification == ClusterClass::RejectedNoise);
  }

  SUBCASE("four connected pixels are a track") {
    Frame frame = blank(32, 32);
    set(frame, 10, 10, 100);
    set(frame, 11, 10, 100);
    set(frame, 10, 11, 100);
    set(frame, 11, 11, 100);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].pixel_count() == 4);
    CHECK(clusters[0].classification == ClusterClass::RejectedTrack);
  }

  SUBCASE("diagonal pixels are separate clusters") {
    Frame frame = blank(32, 32);
    set(frame, 10, 10, 100);
    set(frame, 11, 11, 100);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    CHECK(clusters.size() == 2);
  }

  SUBCASE("neighbour pixels below seed but above neighbour join the cluster") {
    Frame frame = blank(32, 32);
    set(frame, 10, 10, 100);
    set(frame, 11, 10, 35);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 10.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].pixel_count() == 2);
    CHECK(clusters[0].summed_adc == 135.0);
  }

  SUBCASE("zero noise sigma accepts any positive pixel") {
    Frame frame = blank(8, 8);
    set(frame, 1, 1, 1);
    const auto clusters = ccd::find_clusters(frame, 5.0, 3.0, 0.0);
    REQUIRE(clusters.size() == 1);
  }

  SUBCASE("threshold validation") {
    CHECK_THROWS_AS(ccd::find_clusters(blank(8, 8), 0.0, 3.0, 10.0), std::domain_error);
    CHECK_THROWS_AS(ccd::find_clusters(blank(8, 8), 5.0, -1.0, 10.0), std::domain_error);
  }
}

TEST_CASE("classification handles arbitrary triples") {
  auto triple = [](int x0, int y0, int x1, int y1, int x2, int y2) {
    Cluster cluster;
    cluster.pixels = {{x0, y0, 100}, {x1, y1, 100}, {x2, y2, 100}};
    return ccd::classify_cluster(cluster);
  };
  CHECK(triple(0, 0, 1, 1, 2, 2) == ClusterClass::RejectedTrack);   // diagonal line
  CHECK(triple(0, 0, 1, 0, 2, 0) == ClusterClass::RejectedTrack);   // horizontal line
  CHECK(triple(5, 1, 5, 2, 5, 3) == ClusterClass::RejectedTrack);   // vertical line
  CHECK(triple(0, 0, 1, 0, 1, 1) == ClusterClass::RejectedNoise);   // corner
}

TEST_CASE("x-ray acceptance beats 95 percent at the default thresholds") {
  const EnergyCalibration calibration{3.65, 0.0};
  const ResolutionModel model;
  std::uint64_t injected = 0;
  std::uint64_t accepted = 0;
  for (std::uint64_t i = 0; i < 400; ++i) {
    rng::Stream stream(4242, "frame", i);
    std::vector<PixelHit> hits;
    for (int h = 0; h < 8; ++h) {
      PixelHit hit;
      hit.x = 8 + static_cast<int>(stream.uniform() * 240);
      hit.y = 8 + static_cast<int>(stream.uniform() * 240);
      hit.energy_keV = ccd::smear_energy(8.040, model, stream);
      hits.push_back(hit);
    }
    injected += hits.size();
    const Frame frame =
        ccd::synthesize_frame(256, 256, hits, 10.0, 0.0, calibration, stream);
    for (const auto& cluster : ccd::find_clusters(frame, 5.0, 3.0, 10.0))
      accepted += cluster.classification == ClusterClass::AcceptedXRay;
  }
  CHECK(static_cast<double>(accepted) / static_cast<double>(injected) >= 0.95);
}

TEST_CASE("injected tracks are rejected") {
  std::uint64_t track_clusters = 0;
  std::uint64_t accepted_with_track_charge = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    rng::Stream stream(8686, "frame", i);
    const Frame frame = ccd::synthesize_frame(256, 256, {}, 10.0, 3.0, {}, stream);
    for (const auto& cluster : ccd::find_clusters(frame, 5.0, 3.0, 10.0)) {
      if (cluster.classification == ClusterClass::RejectedTrack) ++track_clusters;
      // a track pixel carries at least 2000 ADC; noise clusters stay small
      if (cluster.classification == ClusterClass::AcceptedXRay && cluster.summed_adc > 1000.0)
        ++accepted_with_track_charge;
    }
  }
  CHECK(track_clusters > 400);
  CHECK(accepted_with_track_charge == 0);
}

TEST_CASE("calibration maps summed adc to keV") {
  Cluster cluster;
  cluster.summed_adc = 2000.0;
  CHECK(ccd::calibrate(cluster, {3.65, 0.0}) == doctest::Approx(7.3).epsilon(1e-12));
  CHECK(ccd::calibrate(cluster, {3.65, 100.0}) == doctest::Approx(7.4).epsilon(1e-12));
  CHECK_THROWS_AS(ccd::calibrate(cluster, {0.0, 0.0}), std::domain_error);
}

TEST_CASE("binary frame round trip") {
  testsupport::TempDir dir("pepmc-frame-");
  rng::Stream stream(13, "frame", 0);
  const Frame frame =
      ccd::synthesize_frame(48, 32, std::vector<PixelHit>{{5, 6, 8.0}}, 10.0, 1.0, {3.65, 0.0},
                            stream, 9, 10.0);
  const auto path = dir.path() / "frame.bin";
  ccd::write_frame_binary(frame, path);
  CHECK(std::filesystem::file_size(path) == 16 + 2u * 48 * 32);

  const Frame back = ccd::read_frame_binary(path);
  CHECK(back.width == frame.width);
  CHECK(back.height == frame.height);
  CHECK(back.panel_id == 9);
  CHECK(back.exposure_min == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(back.adc == frame.adc);
}

TEST_CASE("binary reader rejects damaged files") {
  testsupport::TempDir dir("pepmc-frame-");

  SUBCASE("missing file") {
    CHECK_THROWS_AS(ccd::read_frame_binary(dir.path() / "none.bin"), IoError);
  }

  SUBCASE("truncated payload") {
    const Frame frame = Frame::zeros(8, 8);
    const auto path = dir.path() / "trunc.bin";
    ccd::write_frame_binary(frame, path);
    std::filesystem::resize_file(path, 16 + 20);
    CHECK_THROWS_AS(ccd::read_frame_binary(path), IoError);
  }

  SUBCASE("header only") {
    const auto path = dir.path() / "short.bin";
    std::ofstream out(path, std::ios::binary);
    out << "abc";
    out.close();
    CHECK_THROWS_AS(ccd::read_frame_binary(path), IoError);
  }
}

TEST_CASE("csv frame dump") {
  testsupport::TempDir dir("pepmc-frame-");
  Frame frame = Frame::zeros(3, 2);
  set(frame, 0, 0, 1);
  set(frame, 2, 0, 7);
  set(frame, 1, 1, 42);
  const auto path = dir.path() / "frame.csv";
  ccd::write_frame_csv(frame, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "1,0,7");
  std::getline(in, line);
  CHECK(line == "0,42,0");
}

}  // TEST_SUITE
