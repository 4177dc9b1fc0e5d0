#include "pepmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pepmc/errors.hpp"

namespace pepmc::config {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return {};
  const auto end = text.find_last_not_of(" \t");
  return text.substr(begin, end - begin + 1);
}

// '#' opens a comment at the start of the line or after whitespace, so
// values like file#1.csv stay intact.
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t'))
      return line.substr(0, i);
  }
  return line;
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError(ConfigError::Kind::MissingFile,
                        "config file not found or unreadable: " + path.string());
    }
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      const std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3)
          fail_syntax(line_no, "malformed section header '" + line + "'");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail_syntax(line_no, "empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        fail_syntax(line_no, "expected 'key = value', got '" + line + "'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail_syntax(line_no, "missing key before '='");
      if (section.empty()) fail_syntax(line_no, "key '" + key + "' outside any [section]");
      const std::string full = section + "." + key;
      if (auto it = entries_.find(full); it != entries_.end()) {
        fail_invalid(line_no, "duplicate key '" + full + "' (lines " +
                                  std::to_string(it->second.line) + " and " +
                                  std::to_string(line_no) + ")");
      }
      entries_.emplace(full, Entry{value, line_no});
    }
  }

  std::optional<Entry> take(const std::string& full_key) {
    auto it = entries_.find(full_key);
    if (it == entries_.end()) return std::nullopt;
    Entry entry = it->second;
    entries_.erase(it);
    return entry;
  }

  void take_double(const std::string& key, double& out) {
    if (auto entry = take(key)) out = to_double(key, *entry);
  }

  void take_int(const std::string& key, int& out) {
    if (auto entry = take(key)) out = static_cast<int>(to_integer(key, *entry, -2147483648.0, 2147483647.0));
  }

  void take_longlong(const std::string& key, long long& out) {
    if (auto entry = take(key)) out = to_integer(key, *entry, -9.0e18, 9.0e18);
  }

  void take_size(const std::string& key, std::size_t& out) {
    if (auto entry = take(key)) out = static_cast<std::size_t>(to_integer(key, *entry, 0.0, 9.0e18));
  }

  std::optional<std::uint64_t> take_u64(const std::string& key) {
    auto entry = take(key);
    if (!entry) return std::nullopt;
    std::uint64_t value = 0;
    const char* begin = entry->value.data();
    const char* end = begin + entry->value.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end)
      fail_invalid(entry->line, "key '" + key + "' needs an unsigned integer, got '" +
                                    entry->value + "'");
    return value;
  }

  std::optional<Entry> take_word(const std::string& key) { return take(key); }

  std::optional<std::filesystem::path> take_path(const std::string& key) {
    auto entry = take(key);
    if (!entry) return std::nullopt;
    if (entry->value.empty()) fail_invalid(entry->line, "key '" + key + "' needs a path");
    std::filesystem::path p(entry->value);
    if (p.is_relative()) p = path_.parent_path() / p;
    return p;
  }

  void take_panel_list(const std::string& key, int panel_count, std::vector<bool>& mask) {
    auto entry = take(key);
    if (!entry) return;
    mask.assign(static_cast<std::size_t>(panel_count), true);
    if (entry->value == "none") return;
    std::istringstream stream(entry->value);
    std::string token;
    while (std::getline(stream, token, ',')) {
      const std::string item = trim(token);
      int panel = 0;
      const char* begin = item.data();
      const char* end = begin + item.size();
      const auto result = std::from_chars(begin, end, panel);
      if (item.empty() || result.ec != std::errc() || result.ptr != end || panel < 0 ||
          panel >= panel_count) {
        fail_invalid(entry->line, "key '" + key + "': '" + item +
                                      "' is not a panel index in [0, " +
                                      std::to_string(panel_count) + ")");
      }
      mask[static_cast<std::size_t>(panel)] = false;
    }
  }

  // Every key must have been consumed by now.
  void finish() const {
    if (entries_.empty()) return;
    const auto it = std::min_element(
        entries_.begin(), entries_.end(),
        [](const auto& a, const auto& b) { return a.second.line < b.second.line; });
    fail_invalid(it->second.line, "unknown key '" + it->first + "'");
  }

  [[noreturn]] void fail_syntax(int line, const std::string& what) const {
    throw ConfigError(ConfigError::Kind::Syntax,
                      path_.string() + ":" + std::to_string(line) + ": " + what, line);
  }

  [[noreturn]] void fail_invalid(int line, const std::string& what) const {
    throw ConfigError(ConfigError::Kind::Validation,
                      path_.string() + ":" + std::to_string(line) + ": " + what, line);
  }

  [[noreturn]] void fail_invalid(const std::string& what) const {
    throw ConfigError(ConfigError::Kind::Validation, path_.string() + ": " + what);
  }

 private:
  double to_double(const std::string& key, const Entry& entry) const {
    double value = 0.0;
    const char* begin = entry.value.data();
    const char* end = begin + entry.value.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end)
      fail_invalid(entry.line, "key '" + key + "' needs a number, got '" + entry.value + "'");
    return value;
  }

  long long to_integer(const std::string& key, const Entry& entry, double lo, double hi) const {
    long long value = 0;
    const char* begin = entry.value.data();
    const char* end = begin + entry.value.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end || value < lo || value > hi)
      fail_invalid(entry.line, "key '" + key + "' needs an integer, got '" + entry.value + "'");
    return value;
  }

  std::filesystem::path path_;
  std::map<std::string, Entry> entries_;
};

void load_shape_table(const std::filesystem::path& path, BackgroundModel& background,
                      const ConfigReader& reader) {
  std::ifstream in(path);
  if (!in) reader.fail_invalid("background shape table not found: " + path.string());
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    if (!saw_header) {
      if (row != "energy_keV,relative_intensity")
        reader.fail_invalid(path.string() + ":" + std::to_string(line_no) +
                            ": expected header 'energy_keV,relative_intensity'");
      saw_header = true;
      continue;
    }
    std::istringstream fields(row);
    std::string a;
    std::string b;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ','))
      reader.fail_invalid(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    try {
      background.shape_energy_keV.push_back(std::stod(trim(a)));
      background.shape_intensity.push_back(std::stod(trim(b)));
    } catch (const std::exception&) {
      reader.fail_invalid(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  if (background.shape_energy_keV.size() < 2)
    reader.fail_invalid(path.string() + ": shape table needs at least two rows");
  for (std::size_t i = 0; i < background.shape_energy_keV.size(); ++i) {
    if (i > 0 && !(background.shape_energy_keV[i] > background.shape_energy_keV[i - 1]))
      reader.fail_invalid(path.string() + ": shape energies must be strictly increasing");
    if (background.shape_intensity[i] < 0.0)
      reader.fail_invalid(path.string() + ": shape intensities must be >= 0");
  }
}

}  // namespace

void RunConfig::validate() const {
  auto invalid = [](const std::string& what) {
    throw ConfigError(ConfigError::Kind::Validation, what);
  };
  try {
    geometry.validate();
    conductor.validate();
    run.validate();
  } catch (const std::domain_error& err) {
    invalid(err.what());
  }
  if (!(run.current_A > 0.0)) invalid("run.current_A must be > 0");
  if (!(run.live_time_min > 0.0)) invalid("run.live_time_min must be > 0");
  if (!(run.readout_cadence_min > 0.0)) invalid("run.readout_cadence_min must be > 0");
  if (run.ccd_live_count < 1) invalid("run.ccd_live_count must be >= 1");
  if (!(background.rate_per_keV_per_frame >= 0.0))
    invalid("background.rate_per_keV_per_frame must be >= 0");
  if (beta2_over_2 < 0.0 || beta2_over_2 > 1.0) invalid("signal.beta2_over_2 must be in [0, 1]");
  if (!(resolution.fwhm_at_ref_keV > 0.0)) invalid("resolution.fwhm_at_ref_keV must be > 0");
  if (!(resolution.ref_energy_keV > 0.0)) invalid("resolution.ref_energy_keV must be > 0");
  if (!(bin_width_keV > 0.0)) invalid("binning.width_keV must be > 0");
  if (bin_count < 1) invalid("binning.count must be >= 1");
  if (!(roi.lo_keV < roi.hi_keV)) invalid("roi bounds must satisfy lo < hi");
  if (roi.lo_keV < bin_lo_keV || roi.hi_keV > binning_hi_keV())
    invalid("roi must lie inside the binning span");
  if (!background.is_flat()) {
    if (background.shape_energy_keV.front() > bin_lo_keV ||
        background.shape_energy_keV.back() < binning_hi_keV())
      invalid("background shape table must cover the binning span");
    double integral = 0.0;
    for (std::size_t i = 1; i < background.shape_energy_keV.size(); ++i)
      integral += 0.5 * (background.shape_intensity[i] + background.shape_intensity[i - 1]) *
                  (background.shape_energy_keV[i] - background.shape_energy_keV[i - 1]);
    if (!(integral > 0.0)) invalid("background shape table integrates to zero");
  }
  if (geometric_factor.mode == GeometricFactorSetting::Mode::Fixed &&
      !(geometric_factor.value > 0.0 && geometric_factor.value < 1.0))
    invalid("transport.geometric_factor must be in (0, 1)");
  if (!(ccd_efficiency > 0.0 && ccd_efficiency <= 1.0))
    invalid("transport.ccd_efficiency must be in (0, 1]");
  if (mc_samples < 1000) invalid("transport.mc_samples must be >= 1000");
  if (geometric_factor.mode == GeometricFactorSetting::Mode::Auto && !attenuation)
    invalid("transport.attenuation_table is required when geometric_factor = auto");
  if (frames.width <= 0 || frames.height <= 0) invalid("ccd.frame dimensions must be > 0");
  if (frames.frame_count < 0) invalid("ccd.frame_count must be >= 0");
  if (!(frames.hits_per_frame >= 0.0)) invalid("ccd.hits_per_frame must be >= 0");
  if (!(frames.noise_sigma_adc >= 0.0)) invalid("ccd.noise_sigma_adc must be >= 0");
  if (!(frames.track_rate_per_frame >= 0.0)) invalid("ccd.track_rate_per_frame must be >= 0");
  if (!(frames.gain_ev_per_adc > 0.0)) invalid("ccd.gain_ev_per_adc must be > 0");
  if (!(frames.seed_threshold_sigma > 0.0) || !(frames.neighbor_threshold_sigma > 0.0))
    invalid("ccd cluster thresholds must be > 0");
  if (output_dir.empty()) invalid("output.directory must not be empty");
}

RunConfig parse_config(const std::filesystem::path& path) {
  ConfigReader reader(path);
  RunConfig cfg;

  reader.take_double("geometry.cylinder_radius_cm", cfg.geometry.cylinder_radius_cm);
  reader.take_double("geometry.cylinder_thickness_cm", cfg.geometry.cylinder_thickness_cm);
  reader.take_double("geometry.cylinder_height_cm", cfg.geometry.cylinder_height_cm);
  reader.take_double("geometry.ccd_standoff_cm", cfg.geometry.ccd_standoff_cm);
  reader.take_int("geometry.ccd_panel_count", cfg.geometry.ccd_panel_count);
  reader.take_double("geometry.ccd_chip_width_cm", cfg.geometry.ccd_chip_width_cm);
  reader.take_double("geometry.ccd_chip_height_cm", cfg.geometry.ccd_chip_height_cm);
  reader.take_int("geometry.chips_per_panel", cfg.geometry.chips_per_panel);
  if (static_cast<int>(cfg.geometry.live_panel_mask.size()) != cfg.geometry.ccd_panel_count)
    cfg.geometry.live_panel_mask.assign(
        static_cast<std::size_t>(std::max(cfg.geometry.ccd_panel_count, 0)), true);
  reader.take_panel_list("geometry.dead_panels", cfg.geometry.ccd_panel_count,
                         cfg.geometry.live_panel_mask);

  reader.take_double("conductor.length_cm", cfg.conductor.length_cm);
  reader.take_double("conductor.mean_free_path_cm", cfg.conductor.mean_free_path_cm);
  reader.take_double("conductor.capture_to_scatter_floor", cfg.conductor.capture_to_scatter_floor);

  double current_A = cfg.run.current_A;
  double live_time_min = cfg.run.live_time_min;
  double cadence_min = cfg.run.readout_cadence_min;
  int ccd_live_count = cfg.run.ccd_live_count;
  reader.take_double("run.current_A", current_A);
  reader.take_double("run.live_time_min", live_time_min);
  reader.take_double("run.readout_cadence_min", cadence_min);
  reader.take_int("run.ccd_live_count", ccd_live_count);
  cfg.run = physics::RunSummary::from_constant_current(current_A, live_time_min, cadence_min,
                                                       ccd_live_count);

  const auto seed = reader.take_u64("run.master_seed");
  if (!seed) {
    throw ConfigError(ConfigError::Kind::Validation,
                      path.string() + ": missing required key 'run.master_seed'");
  }
  cfg.master_seed = *seed;

  reader.take_double("background.rate_per_keV_per_frame",
                     cfg.background.rate_per_keV_per_frame);
  std::string shape = "flat";
  if (auto entry = reader.take_word("background.shape")) {
    if (entry->value != "flat" && entry->value != "table")
      reader.fail_invalid(entry->line, "background.shape must be 'flat' or 'table'");
    shape = entry->value;
  }
  const auto shape_table = reader.take_path("background.shape_table");
  if (shape == "table") {
    if (!shape_table)
      reader.fail_invalid("background.shape = table needs background.shape_table");
    load_shape_table(*shape_table, cfg.background, reader);
  } else if (shape_table) {
    reader.fail_invalid("background.shape_table given but background.shape is flat");
  }

  reader.take_double("signal.beta2_over_2", cfg.beta2_over_2);

  reader.take_double("resolution.fwhm_at_ref_keV", cfg.resolution.fwhm_at_ref_keV);
  reader.take_double("resolution.ref_energy_keV", cfg.resolution.ref_energy_keV);
  if (auto entry = reader.take_word("resolution.scaling")) {
    if (entry->value == "constant") {
      cfg.resolution.scaling = ccd::ResolutionModel::Scaling::Constant;
    } else if (entry->value == "sqrt_energy") {
      cfg.resolution.scaling = ccd::ResolutionModel::Scaling::SqrtEnergy;
    } else {
      reader.fail_invalid(entry->line, "resolution.scaling must be 'constant' or 'sqrt_energy'");
    }
  }

  reader.take_double("binning.lo_keV", cfg.bin_lo_keV);
  reader.take_double("binning.width_keV", cfg.bin_width_keV);
  reader.take_size("binning.count", cfg.bin_count);

  reader.take_double("roi.lo_keV", cfg.roi.lo_keV);
  reader.take_double("roi.hi_keV", cfg.roi.hi_keV);

  if (auto table_path = reader.take_path("transport.attenuation_table")) {
    cfg.attenuation_path = *table_path;
    try {
      cfg.attenuation = transport::AttenuationTable::load_csv(*table_path);
    } catch (const std::exception& err) {
      reader.fail_invalid(std::string("attenuation table: ") + err.what());
    }
  }
  if (auto entry = reader.take_word("transport.geometric_factor")) {
    if (entry->value == "auto") {
      cfg.geometric_factor.mode = GeometricFactorSetting::Mode::Auto;
    } else {
      double value = 0.0;
      const char* begin = entry->value.data();
      const char* end = begin + entry->value.size();
      const auto result = std::from_chars(begin, end, value);
      if (result.ec != std::errc() || result.ptr != end)
        reader.fail_invalid(entry->line,
                            "transport.geometric_factor must be 'auto' or a number in (0, 1)");
      cfg.geometric_factor.mode = GeometricFactorSetting::Mode::Fixed;
      cfg.geometric_factor.value = value;
    }
  }
  reader.take_double("transport.ccd_efficiency", cfg.ccd_efficiency);
  reader.take_longlong("transport.mc_samples", cfg.mc_samples);

  reader.take_int("ccd.frame_width", cfg.frames.width);
  reader.take_int("ccd.frame_height", cfg.frames.height);
  reader.take_int("ccd.frame_count", cfg.frames.frame_count);
  reader.take_double("ccd.hits_per_frame", cfg.frames.hits_per_frame);
  reader.take_double("ccd.noise_sigma_adc", cfg.frames.noise_sigma_adc);
  reader.take_double("ccd.track_rate_per_frame", cfg.frames.track_rate_per_frame);
  reader.take_double("ccd.gain_ev_per_adc", cfg.frames.gain_ev_per_adc);
  reader.take_double("ccd.offset_ev", cfg.frames.offset_ev);
  reader.take_double("ccd.seed_threshold_sigma", cfg.frames.seed_threshold_sigma);
  reader.take_double("ccd.neighbor_threshold_sigma", cfg.frames.neighbor_threshold_sigma);
  if (auto entry = reader.take_word("ccd.frame_format")) {
    if (entry->value == "binary") {
      cfg.frames.format = FramesSpec::Format::Binary;
    } else if (entry->value == "csv") {
      cfg.frames.format = FramesSpec::Format::Csv;
    } else {
      reader.fail_invalid(entry->line, "ccd.frame_format must be 'binary' or 'csv'");
    }
  }

  if (auto dir = reader.take_word("output.directory")) {
    if (dir->value.empty()) reader.fail_invalid(dir->line, "output.directory must not be empty");
    cfg.output_dir = dir->value;
  }

  reader.finish();

  try {
    cfg.validate();
  } catch (const ConfigError& err) {
    throw ConfigError(err.kind(), path.string() + ": " + err.what(), err.line());
  }
  return cfg;
}

}  // namespace pepmc::config
