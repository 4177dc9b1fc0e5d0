#include "pepmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pepmc::transport {

namespace {

constexpr double kInsideTolerance = 1e-9;  // cm
constexpr double kHuge = std::numeric_limits<double>::infinity();

struct Interval {
  double lo;
  double hi;
};

/// Roots of |p_xy + t d_xy|^2 = r^2, numerically stable form.
/// Returns false when the ray's horizontal track misses the circle.
bool radial_roots(const Vec3& p, const Vec3& d, double r, double& t0, double& t1) {
  const double a = d.x * d.x + d.y * d.y;
  if (a < 1e-30) return false;
  const double b = 2.0 * (p.x * d.x + p.y * d.y);
  const double c = p.x * p.x + p.y * p.y - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return false;
  const double sqrt_disc = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sqrt_disc : -sqrt_disc));
  if (q == 0.0) {  // b == 0 and disc == 0: tangent at t = 0
    t0 = t1 = 0.0;
    return true;
  }
  t0 = q / a;
  t1 = c / q;
  if (t0 > t1) std::swap(t0, t1);
  return true;
}

/// Up to two t >= 0 intervals where the ray runs inside the copper shell.
/// The shell is (inner <= rho <= outer) x (0 <= z <= H).
int copper_intervals(const Vec3& p, const Vec3& d, const DetectorGeometry& g,
                     Interval out[2]) {
  const double horizontal = d.x * d.x + d.y * d.y;

  // z slab
  Interval slab{0.0, kHuge};
  if (std::abs(d.z) >= 1e-30) {
    double ta = (0.0 - p.z) / d.z;
    double tb = (g.cylinder_height_cm - p.z) / d.z;
    if (ta > tb) std::swap(ta, tb);
    slab = {ta, tb};
  } else if (p.z < 0.0 || p.z > g.cylinder_height_cm) {
    return 0;
  }

  if (horizontal < 1e-30) {
    // vertical ray: constant radius, either always in the annulus or never
    const double rho = std::hypot(p.x, p.y);
    if (rho < g.inner_radius_cm() || rho > g.cylinder_radius_cm) return 0;
    const Interval seg{std::max(slab.lo, 0.0), slab.hi};
    if (seg.hi <= seg.lo) return 0;
    out[0] = seg;
    return 1;
  }

  double t0, t1;
  if (!radial_roots(p, d, g.cylinder_radius_cm, t0, t1)) return 0;
  const Interval outer{t0, t1};

  Interval base{std::max({outer.lo, slab.lo, 0.0}), std::min(outer.hi, slab.hi)};
  if (base.hi <= base.lo) return 0;

  // carve out the hollow core
  double i0, i1;
  const bool crosses_core = radial_roots(p, d, g.inner_radius_cm(), i0, i1) && i1 > i0;
  if (!crosses_core) {
    out[0] = base;
    return 1;
  }

  int count = 0;
  if (i0 > base.lo) {
    const Interval seg{base.lo, std::min(base.hi, i0)};
    if (seg.hi > seg.lo) out[count++] = seg;
  }
  if (i1 < base.hi) {
    const Interval seg{std::max(base.lo, i1), base.hi};
    if (seg.hi > seg.lo) out[count++] = seg;
  }
  return count;
}

void require_inside_shell(const Vec3& p, const DetectorGeometry& g) {
  const double rho = std::hypot(p.x, p.y);
  if (rho < g.inner_radius_cm() - kInsideTolerance ||
      rho > g.cylinder_radius_cm + kInsideTolerance || p.z < -kInsideTolerance ||
      p.z > g.cylinder_height_cm + kInsideTolerance)
    throw std::domain_error("ray origin is outside the copper shell");
}

void require_unit(const Vec3& d) {
  if (std::abs(norm(d) - 1.0) > 1e-12)
    throw std::domain_error("direction must be a unit vector");
}

}  // namespace

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

std::vector<bool> DetectorGeometry::default_live_mask() {
  std::vector<bool> mask(16, true);
  mask[14] = mask[15] = false;
  return mask;
}

double DetectorGeometry::panel_azimuth(int panel) const {
  return 2.0 * std::numbers::pi * panel / ccd_panel_count;
}

int DetectorGeometry::live_panel_count() const {
  return static_cast<int>(std::count(live_panel_mask.begin(), live_panel_mask.end(), true));
}

void DetectorGeometry::validate() const {
  if (!(cylinder_radius_cm > 0.0) || !(cylinder_thickness_cm > 0.0) ||
      !(cylinder_height_cm > 0.0) || !(ccd_standoff_cm > 0.0) ||
      !(ccd_chip_width_cm > 0.0) || !(ccd_chip_height_cm > 0.0))
    throw std::domain_error("geometry: all dimensions must be > 0");
  if (cylinder_thickness_cm >= cylinder_radius_cm)
    throw std::domain_error("geometry: shell thickness must be below the radius");
  if (ccd_panel_count < 1 || chips_per_panel < 1)
    throw std::domain_error("geometry: panel and chip counts must be >= 1");
  if (live_panel_mask.size() != static_cast<std::size_t>(ccd_panel_count))
    throw std::domain_error("geometry: live panel mask size must equal the panel count");
}

Vec3 sample_emission_point(const DetectorGeometry& geometry, rng::Stream& stream) {
  const double azimuth = stream.uniform(0.0, 2.0 * std::numbers::pi);
  const double height = stream.uniform(0.0, geometry.cylinder_height_cm);
  const double depth = stream.uniform(0.0, geometry.cylinder_thickness_cm);
  const double rho = geometry.cylinder_radius_cm - depth;
  return {rho * std::cos(azimuth), rho * std::sin(azimuth), height};
}

Vec3 sample_isotropic_direction(rng::Stream& stream) {
  const double cos_theta = 1.0 - 2.0 * stream.uniform();
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const double azimuth = stream.uniform(0.0, 2.0 * std::numbers::pi);
  return {sin_theta * std::cos(azimuth), sin_theta * std::sin(azimuth), cos_theta};
}

double path_length_in_copper(const Vec3& point, const Vec3& dir,
                             const DetectorGeometry& geometry) {
  require_inside_shell(point, geometry);
  require_unit(dir);
  Interval segments[2];
  const int count = copper_intervals(point, dir, geometry, segments);
  // the origin sits in the first segment; its upper end is the first exit
  if (count == 0 || segments[0].lo > kInsideTolerance) return 0.0;
  return segments[0].hi;
}

double copper_path_total(const Vec3& point, const Vec3& dir,
                         const DetectorGeometry& geometry) {
  require_unit(dir);
  Interval segments[2];
  const int count = copper_intervals(point, dir, geometry, segments);
  double total = 0.0;
  for (int i = 0; i < count; ++i) total += segments[i].hi - segments[i].lo;
  return total;
}

std::optional<PanelHit> intersect_panel(const Vec3& point, const Vec3& dir,
                                        const DetectorGeometry& geometry) {
  const double apothem = geometry.panel_apothem_cm();
  const double half_width = 0.5 * geometry.ccd_chip_width_cm;
  const double half_height = 0.5 * geometry.panel_height_cm();
  const double z_center = 0.5 * geometry.cylinder_height_cm;

  // outward normals depend only on the panel count; cache them so the
  // per-photon loop skips the trig
  thread_local std::vector<Vec3> normals;
  thread_local int cached_count = -1;
  if (cached_count != geometry.ccd_panel_count) {
    normals.clear();
    for (int panel = 0; panel < geometry.ccd_panel_count; ++panel) {
      const double azimuth = geometry.panel_azimuth(panel);
      normals.push_back({std::cos(azimuth), std::sin(azimuth), 0.0});
    }
    cached_count = geometry.ccd_panel_count;
  }

  std::optional<PanelHit> best;
  double best_t = kHuge;
  for (int panel = 0; panel < geometry.ccd_panel_count; ++panel) {
    const Vec3& normal = normals[panel];
    const double toward = dot(dir, normal);
    if (toward <= 1e-15) continue;
    const double t = (apothem - dot(point, normal)) / toward;
    if (t <= 0.0 || t >= best_t) continue;
    const Vec3 impact = point + t * dir;
    const double lateral = -impact.x * normal.y + impact.y * normal.x;
    if (std::abs(lateral) > half_width) continue;
    if (std::abs(impact.z - z_center) > half_height) continue;
    best_t = t;
    best = PanelHit{panel, impact};
  }
  return best;
}

}  // namespace pepmc::transport
