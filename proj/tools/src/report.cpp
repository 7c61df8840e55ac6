#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#ifndef TAILCLUSTER_BUILD_ID
#define TAILCLUSTER_BUILD_ID "unknown"
#endif

namespace tailcluster::cli {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

// Arrays expand to name0, name1, ...
nlohmann::ordered_json flatten(const nlohmann::ordered_json& row) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [k, v] : row.items()) {
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) out[k + std::to_string(i)] = v[i];
    } else {
      out[k] = v;
    }
  }
  return out;
}

void write_meta(std::ostream& out, const std::string& prefix, const nlohmann::ordered_json& j) {
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      write_meta(out, prefix + k + ".", v);
    } else {
      out << "# " << prefix << k << ": " << (v.is_string() ? v.get<std::string>() : csv_field(v)) << '\n';
    }
  }
}

}  // namespace

const char* build_id() { return TAILCLUSTER_BUILD_ID; }

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json to_json(const EstimateReport& r) {
  nlohmann::ordered_json j;
  j["representation"] = r.representation;
  j["value"] = number_or_null(r.value);
  j["std_error"] = number_or_null(r.std_error);
  j["n_samples"] = r.n_samples;
  j["n_effective"] = number_or_null(r.n_effective);
  j["sample_variance"] = number_or_null(r.sample_variance);
  j["diagnostics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.diagnostics) j["diagnostics"][k] = number_or_null(v);
  j["warnings"] = r.warnings;
  return j;
}

EstimateReport estimate_from_json(const nlohmann::ordered_json& j) {
  auto num = [](const nlohmann::ordered_json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  EstimateReport r;
  r.representation = j.at("representation").get<std::string>();
  r.value = num(j.at("value"));
  r.std_error = num(j.at("std_error"));
  r.n_samples = j.at("n_samples").get<std::size_t>();
  r.n_effective = num(j.at("n_effective"));
  r.sample_variance = num(j.at("sample_variance"));
  for (const auto& [k, v] : j.at("diagnostics").items()) r.diagnostics[k] = num(v);
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "tailcluster";
  j["build_id"] = build_id();
  j["command"] = r.command;
  j["config"] = r.config;
  j["estimates"] = nlohmann::ordered_json::array();
  for (const auto& e : r.estimates) j["estimates"].push_back(to_json(e));
  j["diagnostics"] = r.diagnostics;
  j["tables"] = r.tables;
  j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

void write_csv(const RunReport& r, std::ostream& out) {
  out << "# schema_version: " << kSchemaVersion << '\n';
  out << "# tool: tailcluster\n";
  out << "# build_id: " << build_id() << '\n';
  out << "# command: " << r.command << '\n';
  write_meta(out, "config.", r.config);
  write_meta(out, "diagnostics.", r.diagnostics);
  out << "# wall_time_seconds: " << format_double(r.wall_time_seconds) << '\n';
  out << "representation,value,stderr,n_eff\n";
  for (const auto& e : r.estimates) {
    out << csv_field(e.representation) << ',' << format_double(e.value) << ',' << format_double(e.std_error) << ','
        << format_double(e.n_effective) << '\n';
  }
  for (const auto& [name, rows] : r.tables.items()) {
    if (!rows.is_array() || rows.empty()) continue;
    out << "# table: " << name << '\n';
    nlohmann::ordered_json header = nlohmann::ordered_json::object();
    for (const auto& row : rows) {
      const auto flat = flatten(row);
      for (const auto& [k, v] : flat.items()) {
        if (!header.contains(k)) header[k] = nullptr;
      }
    }
    bool first = true;
    for (const auto& [k, v] : header.items()) {
      out << (first ? "" : ",") << k;
      first = false;
    }
    out << '\n';
    for (const auto& row : rows) {
      const auto flat = flatten(row);
      first = true;
      for (const auto& [k, v] : header.items()) {
        out << (first ? "" : ",") << (flat.contains(k) ? csv_field(flat[k]) : "");
        first = false;
      }
      out << '\n';
    }
  }
}

void write_report(const RunReport& r, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::csv) {
    write_csv(r, out);
  } else {
    out << to_json(r).dump(2) << '\n';
  }
}

}  // namespace tailcluster::cli
