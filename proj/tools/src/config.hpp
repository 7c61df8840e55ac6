#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "tailcluster/cluster.hpp"
#include "tailcluster/models.hpp"
#include "tailcluster/shift.hpp"

namespace tailcluster::cli {

/// Everything a config file can set: the model plus per-run geometry.
struct RunSettings {
  ModelSpec model;
  Coord window = 32;
  std::string lattice_text;  // empty: ambient grid
  ClusterMethod construction = ClusterMethod::ffd_theta;
  double b = 1.0;
  double tau = 0.0;
  AnchorKind anchor = AnchorKind::first_exceedance;
  ShiftKind shift = ShiftKind::uniform_window;
  double shift_ratio = 0.5;
  double shift_sigma = 4.0;
  Coord shift_radius = 16;

  Window make_window() const;
  LatticeSpec make_lattice() const;
  ClusterConstructionSpec make_construction() const;
  /// Shift law used to spread a field on `source` over `target`.
  ShiftDistribution make_shift(const Window& source, const Window& target) const;
};

struct LoadedConfig {
  RunSettings settings;
  /// Keys exactly as given, in key order, for the report echo.
  std::map<std::string, std::string> entries;
};

/// Flat `key = value` text with `#` comments. Unknown or duplicate keys and
/// out-of-domain values raise ConfigError naming the line.
LoadedConfig parse_config(std::string_view text, std::string_view origin = "<config>");
LoadedConfig load_config(const std::filesystem::path& path);

}  // namespace tailcluster::cli
