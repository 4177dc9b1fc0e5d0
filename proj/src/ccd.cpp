#include "pepmc/ccd.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pepmc/errors.hpp"
#include "pepmc/physics.hpp"

namespace pepmc::ccd {

double ResolutionModel::fwhm_at(double energy_keV) const {
  if (!(fwhm_at_ref_keV > 0.0)) throw std::domain_error("resolution: FWHM must be > 0");
  if (!(ref_energy_keV > 0.0)) throw std::domain_error("resolution: reference energy must be > 0");
  if (scaling == Scaling::Constant) return fwhm_at_ref_keV;
  if (!(energy_keV > 0.0)) throw std::domain_error("resolution: energy must be > 0");
  return fwhm_at_ref_keV * std::sqrt(energy_keV / ref_energy_keV);
}

double ResolutionModel::sigma_at(double energy_keV) const {
  return fwhm_at(energy_keV) / physics::kFwhmPerSigma;
}

double smear_energy(double true_energy_keV, const ResolutionModel& model,
                    rng::Stream& stream) {
  if (!(true_energy_keV > 0.0)) throw std::domain_error("smear_energy: energy must be > 0");
  const double sigma = model.sigma_at(true_energy_keV);
  for (;;) {
    const double smeared = stream.normal(true_energy_keV, sigma);
    if (smeared > 0.0) return smeared;
  }
}

Frame Frame::zeros(int width, int height, int panel_id, double exposure_min) {
  if (width <= 0 || height <= 0) throw std::domain_error("frame dimensions must be > 0");
  Frame frame;
  frame.width = width;
  frame.height = height;
  frame.panel_id = panel_id;
  frame.exposure_min = exposure_min;
  frame.adc.assign(static_cast<std::size_t>(width) * height, 0);
  return frame;
}

namespace {

constexpr double kSplitProbability = 0.15;
constexpr double kSplitFractionLo = 0.3;
constexpr double kSplitFractionHi = 0.7;
constexpr double kTrackAdcLo = 2000.0;
constexpr double kTrackAdcHi = 10000.0;
constexpr int kTrackMinPixels = 4;
constexpr int kTrackMaxPixels = 16;
constexpr int kTrackAttempts = 64;

constexpr std::array<std::array<int, 2>, 4> kNeighborSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

long long adc_for_energy(double energy_keV, const EnergyCalibration& calibration) {
  const double adc = (energy_keV * 1000.0 - calibration.offset_ev) / calibration.gain_ev_per_adc;
  return std::max(0LL, std::llround(adc));
}

// Straight track rasterized as a 4-connected staircase (axis-aligned unit
// steps apportioned to match the angle), so the cluster finder sees one
// connected component. Redrawn until at least 4 pixels land in bounds.
std::vector<std::array<int, 2>> draw_track_pixels(int width, int height,
                                                  rng::Stream& stream) {
  for (int attempt = 0; attempt < kTrackAttempts; ++attempt) {
    const double x0 = stream.uniform(0.0, width);
    const double y0 = stream.uniform(0.0, height);
    const double angle = stream.uniform(0.0, 2.0 * std::numbers::pi);
    const int target = kTrackMinPixels +
                       static_cast<int>(stream.uniform() * (kTrackMaxPixels - kTrackMinPixels + 1));
    const double weight_x = std::abs(std::cos(angle));
    const double weight_y = std::abs(std::sin(angle));
    const int step_x = std::cos(angle) >= 0.0 ? 1 : -1;
    const int step_y = std::sin(angle) >= 0.0 ? 1 : -1;

    std::vector<std::array<int, 2>> pixels;
    int px = static_cast<int>(std::floor(x0));
    int py = static_cast<int>(std::floor(y0));
    double acc_x = 0.0;
    double acc_y = 0.0;
    for (int k = 0; k < target; ++k) {
      if (px >= 0 && px < width && py >= 0 && py < height) pixels.push_back({px, py});
      acc_x += weight_x;
      acc_y += weight_y;
      if (acc_x >= acc_y) {
        px += step_x;
        acc_x -= 1.0;
      } else {
        py += step_y;
        acc_y -= 1.0;
      }
    }
    if (static_cast<int>(pixels.size()) >= kTrackMinPixels) return pixels;
  }
  return {};
}

}  // namespace

Frame synthesize_frame(int width, int height, std::span<const PixelHit> hits,
                       double noise_sigma_adc, double track_rate_per_frame,
                       const EnergyCalibration& calibration, rng::Stream& stream,
                       int panel_id, double exposure_min) {
  if (width <= 0 || height <= 0) throw std::domain_error("frame dimensions must be > 0");
  if (!(calibration.gain_ev_per_adc > 0.0)) throw std::domain_error("calibration gain must be > 0");
  if (!(noise_sigma_adc >= 0.0)) throw std::domain_error("noise sigma must be >= 0");
  if (!(track_rate_per_frame >= 0.0)) throw std::domain_error("track rate must be >= 0");

  std::vector<long long> charge(static_cast<std::size_t>(width) * height, 0);
  auto at = [&](int x, int y) -> long long& {
    return charge[static_cast<std::size_t>(y) * width + x];
  };

  for (const PixelHit& hit : hits) {
    if (hit.x < 0 || hit.x >= width || hit.y < 0 || hit.y >= height)
      throw std::domain_error("pixel hit outside the frame");
    const long long total = adc_for_energy(hit.energy_keV, calibration);
    if (stream.uniform() < kSplitProbability) {
      const auto step = kNeighborSteps[std::min<std::size_t>(
          3, static_cast<std::size_t>(stream.uniform() * 4.0))];
      const double fraction = stream.uniform(kSplitFractionLo, kSplitFractionHi);
      const long long shared = std::llround(fraction * total);
      const int nx = hit.x + step[0];
      const int ny = hit.y + step[1];
      if (nx >= 0 && nx < width && ny >= 0 && ny < height) {
        at(nx, ny) += shared;
        at(hit.x, hit.y) += total - shared;
      } else {
        at(hit.x, hit.y) += total;  // split partner off the chip
      }
    } else {
      at(hit.x, hit.y) += total;
    }
  }

  const std::uint64_t track_count = stream.poisson(track_rate_per_frame);
  for (std::uint64_t t = 0; t < track_count; ++t) {
    for (const auto& [px, py] : draw_track_pixels(width, height, stream)) {
      at(px, py) += std::llround(stream.uniform(kTrackAdcLo, kTrackAdcHi));
    }
  }

  if (noise_sigma_adc > 0.0) {
    for (long long& value : charge) value += std::llround(stream.normal(0.0, noise_sigma_adc));
  }

  Frame frame = Frame::zeros(width, height, panel_id, exposure_min);
  for (std::size_t i = 0; i < charge.size(); ++i)
    frame.adc[i] = static_cast<std::uint16_t>(std::clamp(charge[i], 0LL, 65535LL));
  return frame;
}

std::vector<Cluster> find_clusters(const Frame& frame, double seed_threshold_sigma,
                                   double neighbor_threshold_sigma,
                                   double noise_sigma_adc) {
  if (!(seed_threshold_sigma > 0.0) || !(neighbor_threshold_sigma > 0.0))
    throw std::domain_error("cluster thresholds must be > 0");
  if (!(noise_sigma_adc >= 0.0)) throw std::domain_error("noise sigma must be >= 0");
  if (frame.adc.size() != static_cast<std::size_t>(frame.width) * frame.height)
    throw std::domain_error("frame pixel buffer does not match its dimensions");

  const double seed_adc = seed_threshold_sigma * noise_sigma_adc;
  const double neighbor_adc = neighbor_threshold_sigma * noise_sigma_adc;

  std::vector<char> visited(frame.adc.size(), 0);
  std::vector<Cluster> clusters;
  std::vector<std::array<int, 2>> queue;

  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * frame.width + x;
      if (visited[idx] || !(frame.adc[idx] > neighbor_adc)) continue;

      Cluster cluster;
      bool has_seed = false;
      queue.clear();
      queue.push_back({x, y});
      visited[idx] = 1;
      while (!queue.empty()) {
        const auto [cx, cy] = queue.back();
        queue.pop_back();
        const std::uint16_t adc = frame.value(cx, cy);
        cluster.pixels.push_back({cx, cy, adc});
        cluster.summed_adc += adc;
        has_seed = has_seed || adc > seed_adc;
        for (const auto& step : kNeighborSteps) {
          const int nx = cx + step[0];
          const int ny = cy + step[1];
          if (!frame.in_bounds(nx, ny)) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * frame.width + nx;
          if (visited[nidx] || !(frame.adc[nidx] > neighbor_adc)) continue;
          visited[nidx] = 1;
          queue.push_back({nx, ny});
        }
      }
      if (!has_seed) continue;
      cluster.classification = classify_cluster(cluster);
      clusters.push_back(std::move(cluster));
    }
  }
  return clusters;
}

ClusterClass classify_cluster(const Cluster& cluster) {
  const int n = cluster.pixel_count();
  if (n <= 2) return ClusterClass::AcceptedXRay;
  if (n >= 4) return ClusterClass::RejectedTrack;
  const auto& p = cluster.pixels;
  const long long cross = static_cast<long long>(p[1].x - p[0].x) * (p[2].y - p[0].y) -
                          static_cast<long long>(p[1].y - p[0].y) * (p[2].x - p[0].x);
  return cross == 0 ? ClusterClass::RejectedTrack : ClusterClass::RejectedNoise;
}

double calibrate(const Cluster& cluster, const EnergyCalibration& calibration) {
  if (!(calibration.gain_ev_per_adc > 0.0)) throw std::domain_error("calibration gain must be > 0");
  return (calibration.gain_ev_per_adc * cluster.summed_adc + calibration.offset_ev) / 1000.0;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t value) {
  const std::array<char, 4> bytes{
      static_cast<char>(value & 0xFF), static_cast<char>((value >> 8) & 0xFF),
      static_cast<char>((value >> 16) & 0xFF), static_cast<char>((value >> 24) & 0xFF)};
  out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_frame_binary(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open frame file for writing: " + path.string());
  put_u32(out, static_cast<std::uint32_t>(frame.width));
  put_u32(out, static_cast<std::uint32_t>(frame.height));
  put_u32(out, static_cast<std::uint32_t>(frame.panel_id));
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(frame.exposure_min)));
  for (std::uint16_t value : frame.adc) {
    const std::array<char, 2> bytes{static_cast<char>(value & 0xFF),
                                    static_cast<char>((value >> 8) & 0xFF)};
    out.write(bytes.data(), bytes.size());
  }
  if (!out) throw IoError("failed writing frame file: " + path.string());
}

Frame read_frame_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frame file: " + path.string());
  std::array<unsigned char, 16> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (!in) throw IoError("frame file too short: " + path.string());

  Frame frame;
  frame.width = static_cast<int>(get_u32(header.data()));
  frame.height = static_cast<int>(get_u32(header.data() + 4));
  frame.panel_id = static_cast<int>(get_u32(header.data() + 8));
  frame.exposure_min = std::bit_cast<float>(get_u32(header.data() + 12));
  if (frame.width <= 0 || frame.height <= 0 || frame.width > 65536 || frame.height > 65536)
    throw IoError("frame file has invalid dimensions: " + path.string());

  const std::size_t count = static_cast<std::size_t>(frame.width) * frame.height;
  std::vector<unsigned char> raw(count * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError("frame file truncated: " + path.string());
  frame.adc.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    frame.adc[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
  return frame;
}

void write_frame_csv(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open frame file for writing: " + path.string());
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (x) out << ',';
      out << frame.value(x, y);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing frame file: " + path.string());
}

}  // namespace pepmc::ccd
