#pragma once

#include <optional>
#include <vector>

#include "pepmc/rng.hpp"

namespace pepmc::transport {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(const Vec3& v);

/// Copper target cylinder plus the ring of CCD panels around it.
///
/// The cylinder axis is z, the shell occupies radius [R - thickness, R] and
/// height [0, H]. Panels are flat rectangles tangent to the circle of
/// radius R + standoff, equally spaced in azimuth and centered on the
/// cylinder mid-height; each panel stacks chips_per_panel chips vertically.
struct DetectorGeometry {
  double cylinder_radius_cm = 4.5;  // outer radius
  double cylinder_thickness_cm = 50e-4;
  double cylinder_height_cm = 8.8;
  double ccd_standoff_cm = 2.3;
  int ccd_panel_count = 16;
  double ccd_chip_width_cm = 2.7;
  double ccd_chip_height_cm = 1.35;
  int chips_per_panel = 2;
  std::vector<bool> live_panel_mask = default_live_mask();

  /// 14 of the 16 panels live; the last two read out too noisily.
  static std::vector<bool> default_live_mask();

  double inner_radius_cm() const { return cylinder_radius_cm - cylinder_thickness_cm; }
  double panel_apothem_cm() const { return cylinder_radius_cm + ccd_standoff_cm; }
  double panel_height_cm() const { return ccd_chip_height_cm * chips_per_panel; }
  double panel_azimuth(int panel) const;
  int live_panel_count() const;

  void validate() const;  // throws std::domain_error
};

/// Uniform point inside the copper shell: azimuth and height uniform,
/// depth uniform across the thickness.
Vec3 sample_emission_point(const DetectorGeometry& geometry, rng::Stream& stream);

/// Isotropic unit direction.
Vec3 sample_isotropic_direction(rng::Stream& stream);

/// Copper traversed from `point` along `dir` until the ray first leaves the
/// shell through either cylindrical surface or an open end.
/// Requires `point` inside the shell and |dir| = 1 within 1e-12.
double path_length_in_copper(const Vec3& point, const Vec3& dir,
                             const DetectorGeometry& geometry);

/// Total copper thickness crossed along the entire ray, including any
/// re-entry through the far side of the shell.
double copper_path_total(const Vec3& point, const Vec3& dir,
                         const DetectorGeometry& geometry);

struct PanelHit {
  int panel = -1;
  Vec3 impact;
};

/// Nearest panel rectangle the ray strikes, live or dead; nullopt if the
/// ray misses the panel ring entirely.
std::optional<PanelHit> intersect_panel(const Vec3& point, const Vec3& dir,
                                        const DetectorGeometry& geometry);

}  // namespace pepmc::transport
