// Command-line front end: weight fitting, confidence intervals, and the
// simulation/prediction experiments, with JSON or tidy-CSV output.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mabt/empirical.hpp"
#include "mabt/report.hpp"

using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 1;
};

struct Validation {
  std::vector<std::string> problems;

  void require(bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  }
  void raise_if_any() {
    if (problems.empty()) return;
    std::string joined;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i) joined += "; ";
      joined += problems[i];
    }
    throw mabt::Error(mabt::errc::invalid_config, joined);
  }
};

mabt::ResamplePolicy parse_m_policy(const std::string& text, Validation& check) {
  using mabt::ResamplePolicy;
  if (text == "half_n") return ResamplePolicy::half_n();
  if (text.rfind("gcv", 0) == 0) {
    std::vector<std::size_t> candidates;
    if (text.size() > 4 && text[3] == ':') {
      std::string rest = text.substr(4);
      std::size_t pos = 0;
      while (pos < rest.size()) {
        const std::size_t comma = rest.find(',', pos);
        const std::string tok =
            rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        char* end = nullptr;
        const long v = std::strtol(tok.c_str(), &end, 10);
        if (end != tok.c_str() + tok.size() || v <= 0) {
          check.require(false, "--m: bad gcv candidate '" + tok + "'");
        } else {
          candidates.push_back(static_cast<std::size_t>(v));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } else {
      check.require(text == "gcv", "--m: expected N, half_n, or gcv:a,b,c (got '" + text + "')");
    }
    return ResamplePolicy::gcv(std::move(candidates));
  }
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || v <= 0) {
    check.require(false, "--m: expected N, half_n, or gcv:a,b,c (got '" + text + "')");
    return ResamplePolicy::half_n();
  }
  return ResamplePolicy::fixed(static_cast<std::size_t>(v));
}

std::vector<mabt::Method> parse_methods(const std::vector<std::string>& tokens,
                                        const std::vector<mabt::Method>& registry,
                                        const std::vector<mabt::Method>& fallback,
                                        Validation& check) {
  if (tokens.empty()) return fallback;
  std::vector<mabt::Method> out;
  for (const std::string& raw : tokens) {
    std::size_t pos = 0;
    while (pos <= raw.size()) {
      const std::size_t comma = raw.find(',', pos);
      const std::string tok =
          raw.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!tok.empty()) {
        const auto parsed = mabt::parse_method(tok);
        if (!parsed) {
          check.require(false, "--methods: unknown method '" + tok + "'");
        } else if (std::find(registry.begin(), registry.end(), *parsed) == registry.end()) {
          check.require(false, "--methods: method '" + tok + "' not available for this subcommand");
        } else if (std::find(out.begin(), out.end(), *parsed) == out.end()) {
          out.push_back(*parsed);
        }
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  check.require(!out.empty(), "--methods: no valid method named");
  return out;
}

void emit(const CommonOpts& common, const std::string& text) {
  if (common.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(common.out_path, std::ios::binary);
  if (!out)
    throw mabt::Error(mabt::errc::parse_error, "cannot open output file " + common.out_path);
  out << text;
}

// Shared dataset preparation for fit/ci: CSV load, optional standardization,
// Cp or file ordering, nested prefix candidates.
struct PreparedData {
  mabt::Dataset data;
  mabt::CandidateModelSet models;
};

PreparedData prepare(const std::string& input, const std::string& response,
                     const std::string& order, bool standardize_flag) {
  PreparedData prep;
  prep.data = mabt::load_csv(input, response);
  if (standardize_flag) prep.data = mabt::standardize(prep.data).data;

  std::vector<std::size_t> column_order = {0};
  if (order == "cp") {
    const auto cp_order = mabt::order_variables_cp(prep.data);
    column_order.insert(column_order.end(), cp_order.begin(), cp_order.end());
  } else {
    for (std::size_t j = 1; j < prep.data.p(); ++j) column_order.push_back(j);
  }
  const std::size_t max_k = std::min(prep.data.n() - 1, prep.data.p());
  column_order.resize(std::min(column_order.size(), max_k));
  std::vector<std::size_t> sizes;
  for (std::size_t k = 1; k <= column_order.size(); ++k) sizes.push_back(k);
  prep.models = mabt::CandidateModelSet::nested_prefixes(column_order, sizes);
  prep.models.validate(prep.data);
  return prep;
}

// Weights for any weight-producing method (selections give unit weights).
mabt::MethodWeights weights_for_method(mabt::Method method, const mabt::Dataset& data,
                                       const mabt::CandidateModelSet& models,
                                       const mabt::FitBundle& bundle,
                                       const mabt::ResamplePolicy& policy, std::size_t b_reps,
                                       const mabt::SeedSpec& seeds) {
  using mabt::Method;
  const std::size_t n = data.n();
  auto unit = [&](std::size_t q, const char* name, double objective) {
    mabt::MethodWeights w;
    w.weights.assign(models.count(), 0.0);
    w.weights[q] = 1.0;
    w.method = name;
    w.objective = objective;
    return w;
  };
  switch (method) {
    case Method::Btma: {
      const mabt::ResolvedM resolved =
          mabt::resolve_resample_size(policy, data, models, b_reps, seeds.derived({0}), 1000);
      if (resolved.gcv) return resolved.gcv->weights;
      return mabt::minimize_criterion(
          mabt::btma_criterion(data, models, resolved.m, b_reps, seeds.derived({1}), 1000));
    }
    case Method::Mma:
      return mabt::minimize_criterion(mabt::mma_criterion(bundle, n));
    case Method::Jma:
      return mabt::minimize_criterion(mabt::jma_criterion(bundle, data));
    case Method::Saic:
      return mabt::smoothed_ic_weights(bundle, n, mabt::ICKind::AIC);
    case Method::Sbic:
      return mabt::smoothed_ic_weights(bundle, n, mabt::ICKind::BIC);
    case Method::Sub1:
    case Method::Sub2: {
      const std::size_t m =
          method == Method::Sub1
              ? static_cast<std::size_t>(0.632 * static_cast<double>(n))
              : static_cast<std::size_t>(std::cbrt(static_cast<double>(n) *
                                                   static_cast<double>(n)));
      return mabt::minimize_criterion(
          mabt::subsampling_criterion(data, models, m, b_reps, seeds.derived({1}), 1000));
    }
    case Method::Bms: {
      const mabt::ResolvedM resolved =
          mabt::resolve_resample_size(policy, data, models, b_reps, seeds.derived({0}), 1000);
      const mabt::QuadraticCriterion crit =
          resolved.gcv ? resolved.gcv->criterion
                       : mabt::btma_criterion(data, models, resolved.m, b_reps,
                                              seeds.derived({1}), 1000);
      const std::size_t pick = mabt::bms_select(crit);
      return unit(pick, "bms", crit.a(pick, pick) + crit.b[pick]);
    }
    case Method::Aic:
    case Method::Bic: {
      const mabt::ICKind kind = method == Method::Aic ? mabt::ICKind::AIC : mabt::ICKind::BIC;
      std::size_t best = 0;
      double best_v = mabt::info_criterion(bundle.fits[0], n, kind);
      for (std::size_t q = 1; q < bundle.fits.size(); ++q) {
        const double v = mabt::info_criterion(bundle.fits[q], n, kind);
        if (v < best_v) {
          best = q;
          best_v = v;
        }
      }
      return unit(best, mabt::method_name(method), best_v);
    }
    case Method::Mallows: {
      std::size_t best = 0;
      double best_v = mabt::mallows_cp(bundle.fits[0], bundle.sigma2_full, n);
      for (std::size_t q = 1; q < bundle.fits.size(); ++q) {
        const double v = mabt::mallows_cp(bundle.fits[q], bundle.sigma2_full, n);
        if (v < best_v) {
          best = q;
          best_v = v;
        }
      }
      return unit(best, "mallows", best_v);
    }
    default:
      throw mabt::Error(mabt::errc::invalid_config,
                        std::string("no weight construction for method ") +
                            mabt::method_name(method));
  }
}

int run_fit(const std::string& input, const std::string& response,
            const std::vector<std::string>& method_tokens, const std::string& m_text,
            std::size_t b_reps, const std::string& order, bool standardize_flag,
            const CommonOpts& common) {
  Validation check;
  const mabt::ResamplePolicy policy = parse_m_policy(m_text, check);
  static const std::vector<mabt::Method> registry = {
      mabt::Method::Btma, mabt::Method::Mma,  mabt::Method::Jma,  mabt::Method::Saic,
      mabt::Method::Sbic, mabt::Method::Sub1, mabt::Method::Sub2, mabt::Method::Bms,
      mabt::Method::Aic,  mabt::Method::Bic,  mabt::Method::Mallows};
  const auto methods = parse_methods(method_tokens, registry, {mabt::Method::Btma}, check);
  check.require(b_reps >= 1, "--B must be >= 1");
  check.raise_if_any();

  const PreparedData prep = prepare(input, response, order, standardize_flag);
  const mabt::FitBundle bundle = mabt::fit_all(prep.data, prep.models);
  const mabt::SeedSpec seeds{common.seed};

  ordered_json j;
  j["schema_version"] = mabt::kSchemaVersion;
  j["subcommand"] = "fit";
  j["config"] = ordered_json{{"input", input},
                             {"response", response},
                             {"order", order},
                             {"standardize", standardize_flag},
                             {"m", mabt::policy_string(policy)},
                             {"B", b_reps},
                             {"seed", common.seed},
                             {"models", prep.models.count()}};
  ordered_json out_methods = ordered_json::array();
  std::ostringstream csv;
  csv << "method,item,index,name,value\n";
  for (mabt::Method method : methods) {
    const mabt::MethodWeights w =
        weights_for_method(method, prep.data, prep.models, bundle, policy, b_reps,
                           seeds.derived({static_cast<std::uint64_t>(method)}));
    const mabt::Vector beta =
        mabt::combine_coefficients(bundle, prep.models, w.weights, prep.data.p());
    const mabt::Vector mu = mabt::combine_mu(bundle, w.weights);

    ordered_json jm;
    jm["method"] = mabt::method_name(method);
    jm["weights"] = w.weights;
    if (std::isnan(w.objective))
      jm["objective"] = nullptr;
    else
      jm["objective"] = w.objective;
    ordered_json coef = ordered_json::array();
    for (std::size_t c = 0; c < beta.size(); ++c) {
      const std::string name =
          prep.data.column_names.empty() ? "x" + std::to_string(c + 1) : prep.data.column_names[c];
      coef.push_back(ordered_json{{"column", name}, {"value", beta[c]}});
      csv << mabt::method_name(method) << ",coefficient," << c + 1 << "," << name << ","
          << mabt::format_double(beta[c]) << "\n";
    }
    jm["coefficients"] = coef;
    jm["fitted"] = mu;
    out_methods.push_back(jm);
    for (std::size_t q = 0; q < w.weights.size(); ++q)
      csv << mabt::method_name(method) << ",weight," << q + 1 << ",model" << q + 1 << ","
          << mabt::format_double(w.weights[q]) << "\n";
    for (std::size_t i = 0; i < mu.size(); ++i)
      csv << mabt::method_name(method) << ",fitted," << i + 1 << ",row" << i + 1 << ","
          << mabt::format_double(mu[i]) << "\n";
  }
  j["methods"] = out_methods;

  emit(common, common.format == "csv" ? csv.str() : j.dump(2) + "\n");
  return 0;
}

int run_ci(const std::string& input, const std::string& response,
           const std::vector<std::string>& method_tokens, const std::vector<std::string>& coefs,
           double level, const std::string& m_text, std::size_t b_reps, std::size_t u_draws,
           const std::string& order, bool standardize_flag, const CommonOpts& common) {
  Validation check;
  const mabt::ResamplePolicy policy = parse_m_policy(m_text, check);
  static const std::vector<mabt::Method> registry = {
      mabt::Method::Btma, mabt::Method::Mma, mabt::Method::Jma, mabt::Method::Just,
      mabt::Method::Full, mabt::Method::Aic, mabt::Method::Bic, mabt::Method::Bms};
  const auto methods = parse_methods(method_tokens, registry, {mabt::Method::Btma}, check);
  check.require(level > 0.0 && level < 1.0, "--level must lie in (0,1)");
  check.require(!coefs.empty(), "--coef: at least one coefficient required");
  check.require(b_reps >= 1, "--B must be >= 1");
  check.require(u_draws >= 1, "--U must be >= 1");
  check.raise_if_any();

  const PreparedData prep = prepare(input, response, order, standardize_flag);
  const mabt::FitBundle bundle = mabt::fit_all(prep.data, prep.models);
  const mabt::SeedSpec seeds{common.seed};

  std::vector<std::size_t> targets;
  for (const std::string& tok : coefs) {
    std::size_t found = 0;
    for (std::size_t c = 0; c < prep.data.column_names.size(); ++c)
      if (prep.data.column_names[c] == tok) found = c + 1;
    if (found == 0) {
      char* end = nullptr;
      const long v = std::strtol(tok.c_str(), &end, 10);
      if (end == tok.c_str() + tok.size() && v >= 1 &&
          static_cast<std::size_t>(v) <= prep.data.p())
        found = static_cast<std::size_t>(v);
    }
    check.require(found != 0, "--coef: unknown coefficient '" + tok + "'");
    if (found != 0) targets.push_back(found);
  }
  check.raise_if_any();

  const mabt::ResolvedM resolved =
      mabt::resolve_resample_size(policy, prep.data, prep.models, b_reps, seeds.derived({1}), 1000);
  const mabt::AsymptoticInputs asym =
      mabt::estimate_asymptotics(prep.data, prep.models, resolved.m);

  ordered_json rows = ordered_json::array();
  std::ostringstream csv;
  csv << "method,coef,j,lower,upper,level\n";
  auto add = [&](const mabt::ConfidenceInterval& ci_out, const std::string& method) {
    const std::string name = prep.data.column_names.empty()
                                 ? "x" + std::to_string(ci_out.coef_index)
                                 : prep.data.column_names[ci_out.coef_index - 1];
    rows.push_back(ordered_json{{"method", method},
                                {"coef", name},
                                {"j", ci_out.coef_index},
                                {"lower", ci_out.lower},
                                {"upper", ci_out.upper},
                                {"level", ci_out.level}});
    csv << method << "," << name << "," << ci_out.coef_index << ","
        << mabt::format_double(ci_out.lower) << "," << mabt::format_double(ci_out.upper) << ","
        << mabt::format_double(ci_out.level) << "\n";
  };

  for (mabt::Method method : methods) {
    const std::string name = mabt::method_name(method);
    switch (method) {
      case mabt::Method::Just:
      case mabt::Method::Full: {
        const auto& model = method == mabt::Method::Just ? prep.models.models[asym.m0]
                                                         : prep.models.models.back();
        for (std::size_t j : targets) {
          try {
            add(mabt::ci_ols_z(prep.data, model, j, level), name);
          } catch (const mabt::Error& e) {
            if (e.code() != mabt::errc::coefficient_not_in_model) throw;
            // The just-fitted baseline is selection-derived here; outside
            // coefficients get the post-selection point 0.
            mabt::ConfidenceInterval ci_zero;
            ci_zero.method = name;
            ci_zero.coef_index = j;
            ci_zero.level = level;
            add(ci_zero, name);
          }
        }
        break;
      }
      case mabt::Method::Aic:
      case mabt::Method::Bic: {
        const mabt::ICKind kind =
            method == mabt::Method::Aic ? mabt::ICKind::AIC : mabt::ICKind::BIC;
        std::size_t best = 0;
        double best_v = mabt::info_criterion(bundle.fits[0], prep.data.n(), kind);
        for (std::size_t q = 1; q < bundle.fits.size(); ++q) {
          const double v = mabt::info_criterion(bundle.fits[q], prep.data.n(), kind);
          if (v < best_v) {
            best = q;
            best_v = v;
          }
        }
        for (std::size_t j : targets) {
          try {
            add(mabt::ci_ols_z(prep.data, prep.models.models[best], j, level), name);
          } catch (const mabt::Error& e) {
            if (e.code() != mabt::errc::coefficient_not_in_model) throw;
            // Unselected coefficient: the post-selection estimate is the
            // point 0.
            mabt::ConfidenceInterval ci_zero;
            ci_zero.method = name;
            ci_zero.coef_index = j;
            ci_zero.level = level;
            add(ci_zero, name);
          }
        }
        break;
      }
      case mabt::Method::Bms: {
        for (std::size_t j : targets)
          add(mabt::ci_bms_bootstrap(prep.data, prep.models, resolved.m, b_reps, j, level,
                                     seeds.derived({2})),
              name);
        break;
      }
      default: {
        mabt::LimitKind kind = mabt::LimitKind::BTMA;
        mabt::MethodWeights w;
        if (method == mabt::Method::Mma) {
          kind = mabt::LimitKind::MMA;
          w = mabt::minimize_criterion(mabt::mma_criterion(bundle, prep.data.n()));
        } else if (method == mabt::Method::Jma) {
          kind = mabt::LimitKind::JMA;
          w = mabt::minimize_criterion(mabt::jma_criterion(bundle, prep.data));
        } else {
          w = resolved.gcv ? resolved.gcv->weights
                           : mabt::minimize_criterion(
                                 mabt::btma_criterion(prep.data, prep.models, resolved.m, b_reps,
                                                      seeds.derived({3}), 1000));
        }
        const mabt::LimitDrawSet draws = mabt::simulate_limit_draws(
            asym, u_draws, kind, seeds.derived({4, static_cast<std::uint64_t>(kind)}));
        for (std::size_t j : targets)
          add(mabt::ci_averaging(prep.data, prep.models, w, draws, j, level), name);
        break;
      }
    }
  }

  ordered_json j;
  j["schema_version"] = mabt::kSchemaVersion;
  j["subcommand"] = "ci";
  j["config"] = ordered_json{{"input", input},
                             {"response", response},
                             {"order", order},
                             {"standardize", standardize_flag},
                             {"m", mabt::policy_string(policy)},
                             {"m_selected", resolved.m},
                             {"B", b_reps},
                             {"U", u_draws},
                             {"level", level},
                             {"M0", asym.m0},
                             {"seed", common.seed}};
  j["intervals"] = rows;
  emit(common, common.format == "csv" ? csv.str() : j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bootstrap-weighted model averaging for linear regression"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string input, response;
  std::vector<std::string> method_tokens, coef_tokens;
  std::string m_text = "half_n";
  std::string order = "file";
  bool standardize_flag = false;
  std::size_t b_reps = 500, u_draws = 500;
  double level = 0.95;

  auto* fit = app.add_subcommand("fit", "Averaging weights and combined fit from a CSV");
  fit->add_option("--input", input)->required();
  fit->add_option("--response", response)->required();
  fit->add_option("--methods", method_tokens, "Comma-separated method list (default btma)");
  fit->add_option("--m", m_text, "Resample size: N, half_n, or gcv:a,b,c");
  fit->add_option("--B", b_reps, "Bootstrap replications");
  fit->add_option("--order", order)->check(CLI::IsMember({"file", "cp"}));
  fit->add_flag("--standardize", standardize_flag);

  auto* ci = app.add_subcommand("ci", "Simulation-based confidence intervals (nested candidates)");
  ci->add_option("--input", input)->required();
  ci->add_option("--response", response)->required();
  ci->add_option("--coef", coef_tokens, "Coefficient names or 1-based indices")->required();
  ci->add_option("--methods", method_tokens, "Comma-separated method list (default btma)");
  ci->add_option("--m", m_text);
  ci->add_option("--B", b_reps);
  ci->add_option("--U", u_draws);
  ci->add_option("--level", level);
  ci->add_option("--order", order)->check(CLI::IsMember({"file", "cp"}));
  ci->add_flag("--standardize", standardize_flag);

  mabt::HansenConfig hansen;
  auto* risk = app.add_subcommand("risk-sim", "Monte Carlo risk study (Hansen-style design)");
  risk->add_option("--n", hansen.n);
  risk->add_option("--alpha", hansen.alpha);
  risk->add_option("--r2", hansen.r2);
  risk->add_option("--p", hansen.p);
  risk->add_option("--reps", hansen.reps);
  risk->add_option("--B", b_reps);
  risk->add_option("--m", m_text);
  risk->add_option("--methods", method_tokens);

  mabt::CICaseConfig cicase;
  std::string cov_m_text = "gcv";
  auto* cov = app.add_subcommand("coverage-sim", "Confidence interval coverage study");
  cov->add_option("--case", cicase.case_id);
  cov->add_option("--n", cicase.n);
  cov->add_option("--eta", cicase.eta);
  cov->add_option("--reps", cicase.reps);
  cov->add_option("--B", cicase.b_reps);
  cov->add_option("--U", cicase.u_draws);
  cov->add_option("--level", cicase.level);
  cov->add_option("--m", cov_m_text);
  cov->add_option("--methods", method_tokens);

  std::size_t train_n = 0, splits = 1000;
  auto* pred = app.add_subcommand("predict", "Repeated train/test MSPE study from a CSV");
  pred->add_option("--input", input)->required();
  pred->add_option("--response", response)->required();
  pred->add_option("--train-n", train_n)->required();
  pred->add_option("--splits", splits);
  pred->add_option("--B", b_reps);
  pred->add_option("--m", m_text);
  pred->add_option("--methods", method_tokens);

  for (auto* sub : {fit, ci, risk, cov, pred}) {
    sub->add_option("--seed", common.seed, "Master seed");
    sub->add_option("--out", common.out_path, "Output path (default stdout)");
    sub->add_option("--format", common.format)->check(CLI::IsMember({"json", "csv"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    ordered_json err{{"schema_version", mabt::kSchemaVersion},
                     {"error", ordered_json{{"code", "UnknownSubcommand"},
                                            {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    return 2;
  }

  try {
    if (fit->parsed())
      return run_fit(input, response, method_tokens, m_text, b_reps, order, standardize_flag,
                     common);
    if (ci->parsed())
      return run_ci(input, response, method_tokens, coef_tokens, level, m_text, b_reps, u_draws,
                    order, standardize_flag, common);
    if (risk->parsed()) {
      Validation check;
      hansen.m_policy = parse_m_policy(m_text, check);
      hansen.b_reps = b_reps;
      static const std::vector<mabt::Method> registry = {
          mabt::Method::Aic,  mabt::Method::Bic,  mabt::Method::Mallows, mabt::Method::Saic,
          mabt::Method::Sbic, mabt::Method::Mma,  mabt::Method::Jma,     mabt::Method::Bms,
          mabt::Method::Sub1, mabt::Method::Sub2, mabt::Method::Bag,     mabt::Method::Btma};
      const auto methods = parse_methods(method_tokens, registry, registry, check);
      check.raise_if_any();
      const mabt::RiskReport report =
          mabt::run_risk_experiment(hansen, methods, mabt::SeedSpec{common.seed});
      emit(common, common.format == "csv" ? mabt::risk_report_csv(report)
                                          : mabt::risk_report_json(report));
      return 0;
    }
    if (cov->parsed()) {
      Validation check;
      cicase.m_policy = parse_m_policy(cov_m_text, check);
      static const std::vector<mabt::Method> registry = {
          mabt::Method::Just, mabt::Method::Full, mabt::Method::Aic, mabt::Method::Bic,
          mabt::Method::Bms,  mabt::Method::Mma,  mabt::Method::Jma, mabt::Method::Btma};
      const auto methods = parse_methods(method_tokens, registry, registry, check);
      check.raise_if_any();
      const mabt::CoverageReport report =
          mabt::run_coverage_experiment(cicase, methods, mabt::SeedSpec{common.seed});
      emit(common, common.format == "csv" ? mabt::coverage_report_csv(report)
                                          : mabt::coverage_report_json(report));
      return 0;
    }
    if (pred->parsed()) {
      Validation check;
      mabt::PredictionConfig config;
      config.train_n = train_n;
      config.splits = splits;
      config.b_reps = b_reps;
      config.m_policy = parse_m_policy(m_text, check);
      static const std::vector<mabt::Method> registry = {
          mabt::Method::Mma,  mabt::Method::Jma, mabt::Method::Btma, mabt::Method::Saic,
          mabt::Method::Sbic, mabt::Method::Bms, mabt::Method::Sub1, mabt::Method::Sub2,
          mabt::Method::Bag,  mabt::Method::Aic, mabt::Method::Bic,  mabt::Method::Mallows};
      static const std::vector<mabt::Method> defaults = {
          mabt::Method::Mma,  mabt::Method::Jma, mabt::Method::Btma, mabt::Method::Saic,
          mabt::Method::Sbic, mabt::Method::Bms, mabt::Method::Sub1, mabt::Method::Bag};
      config.methods = parse_methods(method_tokens, registry, defaults, check);
      check.raise_if_any();
      const mabt::Dataset data = mabt::load_csv(input, response);
      const mabt::PredictionReport report =
          mabt::evaluate_splits(data, config, mabt::SeedSpec{common.seed});
      emit(common, common.format == "csv" ? mabt::prediction_report_csv(report)
                                          : mabt::prediction_report_json(report));
      return 0;
    }
  } catch (const mabt::Error& e) {
    ordered_json err{{"schema_version", mabt::kSchemaVersion},
                     {"error", ordered_json{{"code", e.code_name()}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    return e.code() == mabt::errc::invalid_config ? 2 : 1;
  } catch (const std::exception& e) {
    ordered_json err{{"schema_version", mabt::kSchemaVersion},
                     {"error", ordered_json{{"code", "Internal"}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    return 1;
  }
  return 2;
}
