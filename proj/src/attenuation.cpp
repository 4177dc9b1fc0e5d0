#include "pepmc/attenuation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pepmc/errors.hpp"

namespace pepmc::transport {

AttenuationTable::AttenuationTable(std::vector<Node> nodes, double material_density_g_cm3)
    : nodes_(std::move(nodes)), density_(material_density_g_cm3) {
  if (nodes_.size() < 2)
    throw std::domain_error("attenuation table needs at least two nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!(nodes_[i].attenuation_length_cm > 0.0))
      throw std::domain_error("attenuation lengths must be > 0");
    if (i > 0 && !(nodes_[i].energy_keV > nodes_[i - 1].energy_keV))
      throw std::domain_error("attenuation table energies must be strictly increasing");
  }
  if (!(density_ > 0.0)) throw std::domain_error("material density must be > 0");
}

AttenuationTable AttenuationTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open attenuation table: " + path.string());

  std::vector<Node> nodes;
  double density = 8.96;
  std::string line;
  bool saw_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (line.find("density_g_cm3") != std::string::npos && eq != std::string::npos)
        density = std::stod(line.substr(eq + 1));
      continue;
    }
    if (!saw_header) {
      if (line.rfind("energy_keV,attenuation_length_cm", 0) != 0)
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": expected header energy_keV,attenuation_length_cm");
      saw_header = true;
      continue;
    }
    std::istringstream row(line);
    Node node{};
    char comma = 0;
    if (!(row >> node.energy_keV >> comma >> node.attenuation_length_cm) || comma != ',')
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    nodes.push_back(node);
  }
  return AttenuationTable(std::move(nodes), density);
}

double AttenuationTable::attenuation_length_cm(double energy_keV) const {
  if (energy_keV < min_energy_keV() || energy_keV > max_energy_keV())
    throw std::domain_error("energy outside the attenuation table span");
  const auto upper = std::lower_bound(
      nodes_.begin(), nodes_.end(), energy_keV,
      [](const Node& node, double e) { return node.energy_keV < e; });
  if (upper == nodes_.begin()) return upper->attenuation_length_cm;
  if (upper == nodes_.end()) return nodes_.back().attenuation_length_cm;
  const Node& hi = *upper;
  const Node& lo = *(upper - 1);
  const double f = (std::log(energy_keV) - std::log(lo.energy_keV)) /
                   (std::log(hi.energy_keV) - std::log(lo.energy_keV));
  return std::exp(std::log(lo.attenuation_length_cm) +
                  f * (std::log(hi.attenuation_length_cm) - std::log(lo.attenuation_length_cm)));
}

double attenuation_survival(double path_cm, double energy_keV,
                            const AttenuationTable& table) {
  if (path_cm < 0.0) throw std::domain_error("path length must be >= 0");
  return std::exp(-path_cm / table.attenuation_length_cm(energy_keV));
}

}  // namespace pepmc::transport
