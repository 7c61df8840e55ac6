#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "tailcluster/errors.hpp"

namespace tailcluster::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view text) {
  const std::string s(trim(text));
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

Coord to_int(std::string_view text) {
  const std::string s(trim(text));
  Coord v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + s + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto end = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, end == std::string_view::npos ? end : end - pos)));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

/// "2, 1" (scalar entries) or "1,0; 0,1" (one vector per ';').
std::vector<std::vector<double>> to_vectors(std::string_view text, int value_dim) {
  std::vector<std::vector<double>> rows;
  if (text.find(';') != std::string_view::npos) {
    for (auto row : split(text, ';')) {
      std::vector<double> v;
      for (auto e : split(row, ',')) v.push_back(to_double(e));
      rows.push_back(std::move(v));
    }
  } else if (value_dim == 1) {
    for (auto e : split(text, ',')) rows.push_back({to_double(e)});
  } else {
    std::vector<double> v;
    for (auto e : split(text, ',')) v.push_back(to_double(e));
    rows.push_back(std::move(v));
  }
  return rows;
}

NormKind to_norm_kind(std::string_view s) {
  if (s == "absolute") return NormKind::absolute;
  if (s == "euclidean") return NormKind::euclidean;
  if (s == "max_component") return NormKind::max_component;
  if (s == "weighted_sum") return NormKind::weighted_sum;
  throw ConfigError("unknown norm '" + std::string(s) + "'");
}

VariogramKind to_variogram(std::string_view s) {
  if (s == "linear") return VariogramKind::linear;
  if (s == "power") return VariogramKind::power;
  throw ConfigError("unknown variogram '" + std::string(s) + "'");
}

using Setter = std::function<void(RunSettings&, std::string_view)>;

// Vector-valued keys are applied after `value_dim` is known.
const std::map<std::string, Setter, std::less<>>& scalar_setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"kind", [](RunSettings& r, std::string_view v) { r.model.kind = parse_model_kind(v); }},
      {"alpha",
       [](RunSettings& r, std::string_view v) {
         r.model.alpha = to_double(v);
         if (!(r.model.alpha > 0.0)) throw ConfigError("alpha must be positive");
       }},
      {"norm", [](RunSettings& r, std::string_view v) { r.model.norm.kind = to_norm_kind(v); }},
      {"dim",
       [](RunSettings& r, std::string_view v) {
         r.model.dim_l = static_cast<int>(to_int(v));
         if (r.model.dim_l < 1) throw ConfigError("dim must be at least 1");
       }},
      {"value_dim",
       [](RunSettings& r, std::string_view v) {
         r.model.dim_d = static_cast<int>(to_int(v));
         if (r.model.dim_d < 1) throw ConfigError("value_dim must be at least 1");
       }},
      {"delta",
       [](RunSettings& r, std::string_view v) {
         r.model.grid_spacing = to_double(v);
         if (!(r.model.grid_spacing > 0.0)) throw ConfigError("delta must be positive");
       }},
      {"phi",
       [](RunSettings& r, std::string_view v) {
         r.model.phi = to_double(v);
         if (!(r.model.phi > 0.0 && r.model.phi < 1.0)) throw ConfigError("phi must lie in (0, 1)");
       }},
      {"variogram", [](RunSettings& r, std::string_view v) { r.model.variogram = to_variogram(v); }},
      {"variogram_slope",
       [](RunSettings& r, std::string_view v) {
         r.model.variogram_slope = to_double(v);
         if (!(r.model.variogram_slope > 0.0)) throw ConfigError("variogram_slope must be positive");
       }},
      {"hurst",
       [](RunSettings& r, std::string_view v) {
         r.model.hurst = to_double(v);
         if (!(r.model.hurst > 0.0 && r.model.hurst <= 1.0)) throw ConfigError("hurst must lie in (0, 1]");
       }},
      {"q_offset", [](RunSettings& r, std::string_view v) { r.model.q_offset = to_int(v); }},
      {"decay_tail_mass", [](RunSettings& r, std::string_view v) { r.model.decay_tail_mass = to_double(v); }},
      {"window",
       [](RunSettings& r, std::string_view v) {
         r.window = to_int(v);
         if (r.window < 1) throw ConfigError("window half-width must be at least 1");
       }},
      {"lattice",
       [](RunSettings& r, std::string_view v) {
         r.lattice_text = std::string(v);
         (void)LatticeSpec::parse(v);
       }},
      {"construction", [](RunSettings& r, std::string_view v) { r.construction = parse_cluster_method(v); }},
      {"b",
       [](RunSettings& r, std::string_view v) {
         r.b = to_double(v);
         if (!(r.b >= 1.0)) throw ConfigError("b must be >= 1");
       }},
      {"tau",
       [](RunSettings& r, std::string_view v) {
         r.tau = to_double(v);
         if (!(r.tau >= 0.0)) throw ConfigError("tau must be nonnegative");
       }},
      {"anchor", [](RunSettings& r, std::string_view v) { r.anchor = parse_anchor(v); }},
      {"shift", [](RunSettings& r, std::string_view v) { r.shift = parse_shift_kind(v); }},
      {"shift_ratio",
       [](RunSettings& r, std::string_view v) {
         r.shift_ratio = to_double(v);
         if (!(r.shift_ratio > 0.0 && r.shift_ratio < 1.0)) throw ConfigError("shift_ratio must lie in (0, 1)");
       }},
      {"shift_sigma",
       [](RunSettings& r, std::string_view v) {
         r.shift_sigma = to_double(v);
         if (!(r.shift_sigma > 0.0)) throw ConfigError("shift_sigma must be positive");
       }},
      {"shift_radius",
       [](RunSettings& r, std::string_view v) {
         r.shift_radius = to_int(v);
         if (r.shift_radius < 0) throw ConfigError("shift_radius must be nonnegative");
       }},
  };
  return table;
}

const std::map<std::string, Setter, std::less<>>& vector_setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"coeffs", [](RunSettings& r, std::string_view v) { r.model.coeffs = to_vectors(v, r.model.dim_d); }},
      {"q_values", [](RunSettings& r, std::string_view v) { r.model.q_values = to_vectors(v, r.model.dim_d); }},
      {"norm_weights",
       [](RunSettings& r, std::string_view v) {
         r.model.norm.weights.clear();
         for (auto e : split(v, ',')) r.model.norm.weights.push_back(to_double(e));
       }},
  };
  return table;
}

[[noreturn]] void fail_at(std::string_view origin, std::size_t line, const std::string& what) {
  throw ConfigError(std::string(origin) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Window RunSettings::make_window() const { return Window::cube(model.dim_l, window); }

LatticeSpec RunSettings::make_lattice() const {
  if (lattice_text.empty()) return LatticeSpec::ambient(model.dim_l, model.grid_spacing);
  LatticeSpec l = LatticeSpec::parse(lattice_text, model.grid_spacing);
  if (l.dim() != model.dim_l) throw ConfigError("lattice dimension does not match the model");
  return l;
}

ClusterConstructionSpec RunSettings::make_construction() const {
  ClusterConstructionSpec c;
  c.method = construction;
  c.lattice = make_lattice();
  c.b = b;
  c.tau = tau;
  c.anchor = anchor;
  c.validate(model);
  return c;
}

ShiftDistribution RunSettings::make_shift(const Window& source, const Window& target) const {
  switch (shift) {
    case ShiftKind::symmetric_geometric_product:
      return ShiftDistribution::symmetric_geometric(model.dim_l, shift_ratio, model.grid_spacing);
    case ShiftKind::truncated_gaussian_grid:
      return ShiftDistribution::truncated_gaussian(model.dim_l, shift_sigma, shift_radius, model.grid_spacing);
    case ShiftKind::uniform_window:
      break;
  }
  return ShiftDistribution::covering(source, target, model.grid_spacing);
}

LoadedConfig parse_config(std::string_view text, std::string_view origin) {
  LoadedConfig out;
  std::map<std::string, std::size_t, std::less<>> line_of;
  std::vector<std::pair<std::string, std::size_t>> deferred;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_at(origin, line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail_at(origin, line_no, "missing key");
    if (value.empty()) fail_at(origin, line_no, "missing value for '" + key + "'");
    if (line_of.contains(key)) {
      fail_at(origin, line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(line_of[key]) + ")");
    }
    line_of[key] = line_no;
    out.entries[key] = value;
    if (auto it = scalar_setters().find(key); it != scalar_setters().end()) {
      try {
        it->second(out.settings, value);
      } catch (const ConfigError& e) {
        fail_at(origin, line_no, e.what());
      }
    } else if (vector_setters().contains(key)) {
      deferred.emplace_back(key, line_no);
    } else {
      fail_at(origin, line_no, "unknown key '" + key + "'");
    }
  }
  for (const auto& [key, line] : deferred) {
    try {
      vector_setters().find(key)->second(out.settings, out.entries[key]);
    } catch (const ConfigError& e) {
      fail_at(origin, line, e.what());
    }
  }
  if (!line_of.contains("kind")) throw ConfigError(std::string(origin) + ": missing required key 'kind'");
  try {
    out.settings.model.validate();
    out.settings.make_construction();
    (void)out.settings.make_lattice();
  } catch (const ConfigError& e) {
    // Point at the key the message names, else at `kind`.
    const std::string what = e.what();
    std::size_t line = line_of["kind"];
    std::size_t best = 0;
    for (const auto& [key, l] : line_of) {
      if (key.size() > best && what.find(key) != std::string::npos) {
        best = key.size();
        line = l;
      }
    }
    fail_at(origin, line, what);
  }
  return out;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace tailcluster::cli
