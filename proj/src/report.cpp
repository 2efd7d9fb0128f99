#include "mabt/report.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace mabt {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  return ordered_json(v).dump();
}

std::string policy_string(const ResamplePolicy& policy) {
  switch (policy.kind) {
    case ResamplePolicy::Kind::Fixed:
      return std::to_string(policy.fixed_m);
    case ResamplePolicy::Kind::HalfN:
      return "half_n";
    case ResamplePolicy::Kind::Gcv: {
      if (policy.gcv_candidates.empty()) return "gcv:auto";
      std::string s = "gcv:";
      for (std::size_t i = 0; i < policy.gcv_candidates.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(policy.gcv_candidates[i]);
      }
      return s;
    }
  }
  return "?";
}

namespace {

ordered_json json_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string csv_cell(double v) { return std::isnan(v) ? "" : format_double(v); }

ordered_json hansen_config_json(const HansenConfig& c) {
  return ordered_json{{"n", c.n},
                      {"alpha", c.alpha},
                      {"r2", c.r2},
                      {"p", c.p},
                      {"reps", c.reps},
                      {"B", c.b_reps},
                      {"m", policy_string(c.m_policy)}};
}

ordered_json ci_config_json(const CICaseConfig& c) {
  return ordered_json{{"case", c.case_id}, {"n", c.n},       {"eta", c.eta},
                      {"rho", c.rho},      {"c", c.c},       {"reps", c.reps},
                      {"U", c.u_draws},    {"B", c.b_reps},  {"level", c.level},
                      {"m", policy_string(c.m_policy)}};
}

}  // namespace

std::string risk_report_json(const RiskReport& report) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = "risk-sim";
  j["config"] = hansen_config_json(report.config);
  j["seed"] = report.seed;
  ordered_json rows = ordered_json::array();
  for (const RiskRow& row : report.rows) {
    rows.push_back(ordered_json{{"method", method_name(row.method)},
                                {"risk", json_or_null(row.mean_risk)},
                                {"mc_se", json_or_null(row.mc_se)},
                                {"failures", row.failures}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string risk_report_csv(const RiskReport& report) {
  std::ostringstream out;
  out << "method,metric,value,mc_se,n,alpha,r2,p,reps,B,m,seed\n";
  const auto& c = report.config;
  const std::string tail = std::to_string(c.n) + "," + format_double(c.alpha) + "," +
                           format_double(c.r2) + "," + std::to_string(c.p) + "," +
                           std::to_string(c.reps) + "," + std::to_string(c.b_reps) + "," +
                           policy_string(c.m_policy) + "," + std::to_string(report.seed);
  for (const RiskRow& row : report.rows) {
    out << method_name(row.method) << ",risk," << csv_cell(row.mean_risk) << ","
        << csv_cell(row.mc_se) << "," << tail << "\n";
    out << method_name(row.method) << ",failures," << row.failures << ",," << tail << "\n";
  }
  return out.str();
}

std::string coverage_report_json(const CoverageReport& report) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = "coverage-sim";
  j["config"] = ci_config_json(report.config);
  j["seed"] = report.seed;
  ordered_json rows = ordered_json::array();
  for (const CoverageRow& row : report.rows) {
    rows.push_back(ordered_json{{"method", method_name(row.method)},
                                {"coef", "beta" + std::to_string(row.coef_index)},
                                {"cp", json_or_null(row.cp)},
                                {"cp_se", json_or_null(row.cp_se)},
                                {"length", json_or_null(row.mean_length)},
                                {"length_se", json_or_null(row.length_se)},
                                {"failures", row.failures}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string coverage_report_csv(const CoverageReport& report) {
  std::ostringstream out;
  out << "method,metric,value,mc_se,case,n,eta,rho,c,reps,U,B,level,m,seed\n";
  const auto& c = report.config;
  const std::string tail = std::to_string(c.case_id) + "," + std::to_string(c.n) + "," +
                           format_double(c.eta) + "," + format_double(c.rho) + "," +
                           format_double(c.c) + "," + std::to_string(c.reps) + "," +
                           std::to_string(c.u_draws) + "," + std::to_string(c.b_reps) + "," +
                           format_double(c.level) + "," + policy_string(c.m_policy) + "," +
                           std::to_string(report.seed);
  for (const CoverageRow& row : report.rows) {
    const std::string beta = "beta" + std::to_string(row.coef_index);
    out << method_name(row.method) << ",cp_" << beta << "," << csv_cell(row.cp) << ","
        << csv_cell(row.cp_se) << "," << tail << "\n";
    out << method_name(row.method) << ",len_" << beta << "," << csv_cell(row.mean_length) << ","
        << csv_cell(row.length_se) << "," << tail << "\n";
    out << method_name(row.method) << ",failures_" << beta << "," << row.failures << ",," << tail
        << "\n";
  }
  return out.str();
}

std::string prediction_report_json(const PredictionReport& report) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = "predict";
  j["config"] = ordered_json{{"train_n", report.config.train_n},
                             {"splits", report.config.splits},
                             {"B", report.config.b_reps},
                             {"m", policy_string(report.config.m_policy)},
                             {"total_n", report.total_n}};
  j["seed"] = report.seed;
  ordered_json rows = ordered_json::array();
  for (const PredictionRow& row : report.rows) {
    rows.push_back(ordered_json{{"method", method_name(row.method)},
                                {"mspe_mean", json_or_null(row.mspe_mean)},
                                {"mspe_variance", json_or_null(row.mspe_variance)},
                                {"failures", row.failures}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string prediction_report_csv(const PredictionReport& report) {
  std::ostringstream out;
  out << "method,metric,value,mc_se,train_n,splits,B,m,total_n,seed\n";
  const auto& c = report.config;
  const std::string tail = std::to_string(c.train_n) + "," + std::to_string(c.splits) + "," +
                           std::to_string(c.b_reps) + "," + policy_string(c.m_policy) + "," +
                           std::to_string(report.total_n) + "," + std::to_string(report.seed);
  for (const PredictionRow& row : report.rows) {
    const double se = row.mspe_variance >= 0.0 && c.splits > row.failures
                          ? std::sqrt(row.mspe_variance /
                                      static_cast<double>(c.splits - row.failures))
                          : std::nan("");
    out << method_name(row.method) << ",mspe_mean," << csv_cell(row.mspe_mean) << ","
        << csv_cell(se) << "," << tail << "\n";
    out << method_name(row.method) << ",mspe_variance," << csv_cell(row.mspe_variance) << ",,"
        << tail << "\n";
    out << method_name(row.method) << ",failures," << row.failures << ",," << tail << "\n";
  }
  return out.str();
}

}  // namespace mabt
