#pragma once

#include <string>

#include "mabt/empirical.hpp"

namespace mabt {

constexpr int kSchemaVersion = 1;

// Shortest round-trip decimal rendering (what the JSON layer emits), shared
// by the CSV writers so both formats are byte-stable.
std::string format_double(double v);

std::string policy_string(const ResamplePolicy& policy);

std::string risk_report_json(const RiskReport& report);
std::string risk_report_csv(const RiskReport& report);

std::string coverage_report_json(const CoverageReport& report);
std::string coverage_report_csv(const CoverageReport& report);

std::string prediction_report_json(const PredictionReport& report);
std::string prediction_report_csv(const PredictionReport& report);

}  // namespace mabt
