#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "tailcluster/extremal.hpp"

namespace tailcluster::cli {

inline constexpr const char* kSchemaVersion = "1.0.0";

enum class OutputFormat { json, csv };

/// One CLI run. `tables` holds command-specific rows (arrays of flat objects).
struct RunReport {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<EstimateReport> estimates;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
  nlohmann::ordered_json tables = nlohmann::ordered_json::object();
  double wall_time_seconds = 0.0;
};

const char* build_id();

nlohmann::ordered_json to_json(const EstimateReport& r);
EstimateReport estimate_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const RunReport& r);

/// Metadata lines prefixed '#', then one row per estimate
/// (representation,value,stderr,n_eff), then each table as its own block.
void write_csv(const RunReport& r, std::ostream& out);
void write_report(const RunReport& r, OutputFormat format, std::ostream& out);

/// Non-finite doubles become null.
nlohmann::ordered_json number_or_null(double v);

}  // namespace tailcluster::cli
