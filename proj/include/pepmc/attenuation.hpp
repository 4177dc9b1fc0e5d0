#pragma once

#include <filesystem>
#include <vector>

namespace pepmc::transport {

/// Photon attenuation lengths in copper, tabulated against energy.
/// Lookups between nodes interpolate log-log, which tracks the power-law
/// behaviour of the photoelectric cross-section between edges.
class AttenuationTable {
 public:
  struct Node {
    double energy_keV;
    double attenuation_length_cm;
  };

  AttenuationTable(std::vector<Node> nodes, double material_density_g_cm3 = 8.96);

  /// Reads the CSV table: header `energy_keV,attenuation_length_cm`, rows
  /// sorted ascending. An optional `# density_g_cm3=<v>` comment line may
  /// precede the header.
  static AttenuationTable load_csv(const std::filesystem::path& path);

  double attenuation_length_cm(double energy_keV) const;

  double min_energy_keV() const { return nodes_.front().energy_keV; }
  double max_energy_keV() const { return nodes_.back().energy_keV; }
  double material_density_g_cm3() const { return density_; }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
  double density_;
};

/// Beer-Lambert survival probability exp(-path / attenuation_length).
double attenuation_survival(double path_cm, double energy_keV,
                            const AttenuationTable& table);

}  // namespace pepmc::transport
