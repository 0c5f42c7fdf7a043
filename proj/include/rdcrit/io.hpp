#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rdcrit/criticality.hpp"
#include "rdcrit/model.hpp"
#include "rdcrit/rd_solver.hpp"
#include "rdcrit/simulate.hpp"

namespace rdcrit {

using LoadedModel = std::variant<DiscreteModel, ContinuousModel>;

// Schema:
//   discrete:   {"source": {"labels": [...], "pmf": [...]},
//                "reproduction": {"labels": [...]},
//                "distortion": [[...], ...]}
//   continuous: {"interval": [a, b],
//                "density": {"name": "uniform" | "gaussian", "mean": .., "stddev": ..},
//                "reproduction": [x1, ...],
//                "distortion_family": "squared_error" | "absolute_error",
//                "grid_size": m}
// The distortion matrix is normalized on load; per-row offsets are recorded
// on the model.
inline LoadedModel load_model_json(const nlohmann::json& j) {
  try {
    if (j.contains("interval")) {
      const auto& density = j.at("density");
      DensitySpec spec;
      spec.name = density.at("name").get<std::string>();
      spec.mean = density.value("mean", 0.0);
      spec.stddev = density.value("stddev", 1.0);
      const std::string family_name = j.at("distortion_family").get<std::string>();
      DistortionFamily family;
      if (family_name == "squared_error")
        family = DistortionFamily::SquaredError;
      else if (family_name == "absolute_error")
        family = DistortionFamily::AbsoluteError;
      else
        throw InvalidModelError("unknown distortion_family: " + family_name);
      return ContinuousModel(j.at("interval").at(0).get<double>(),
                             j.at("interval").at(1).get<double>(), spec,
                             j.at("reproduction").get<std::vector<double>>(), family,
                             j.at("grid_size").get<std::size_t>());
    }
    return DiscreteModel(j.at("source").at("labels").get<std::vector<std::string>>(),
                         j.at("source").at("pmf").get<std::vector<double>>(),
                         j.at("reproduction").at("labels").get<std::vector<std::string>>(),
                         j.at("distortion").get<Matrix>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModelError(std::string("malformed model file: ") + e.what());
  }
}

inline LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModelError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModelError(std::string("model file is not valid JSON: ") + e.what());
  }
  return load_model_json(j);
}

inline nlohmann::json model_to_json(const DiscreteModel& model) {
  return {{"source", {{"labels", model.source_labels()}, {"pmf", model.pmf()}}},
          {"reproduction", {{"labels", model.repro_labels()}}},
          {"distortion", model.rho()},
          {"normalization_offsets", model.normalization_offsets()}};
}

inline nlohmann::json kkt_json(const KKTReport& kkt) {
  nlohmann::json cond_c = nlohmann::json::array();
  for (const auto& [j, value] : kkt.cond_c_values)
    cond_c.push_back({{"column", j}, {"value", value}});
  return {{"cond_a_residual", kkt.cond_a_residual},
          {"cond_b_residual", kkt.cond_b_residual},
          {"cond_c_values", cond_c},
          {"B", kkt.b_constants},
          {"tol", kkt.tol},
          {"passed", kkt.passed}};
}

inline nlohmann::json classification_json(const ClassifyResult& result) {
  const auto& sol = result.solution;
  const auto& rep = result.report;
  return {{"D", sol.distortion},
          {"R_bits", sol.rate_bits},
          {"lambda_star", sol.lambda_star},
          {"Q_star", sol.q_star},
          {"f", rep.f_bits},
          {"f_tilde", rep.f_tilde_bits},
          {"max_abs_f", rep.max_abs_f},
          {"sigma2", rep.sigma2_bits2},
          {"spread", rep.spread_bits},
          {"verdict", verdict_name(rep.verdict)},
          {"redundancy_order", redundancy_order(rep.verdict)},
          {"epsilon", rep.epsilon_used},
          {"dual_degenerate", sol.dual_degenerate},
          {"theorem1",
           {{"uniform", rep.theorem1.uniform},
            {"permutation", rep.theorem1.permutation},
            {"predicted_critical_all_D", rep.theorem1.critical_for_all_D},
            {"advisory_symmetric", rep.theorem1.advisory.symmetric},
            {"advisory_zero_diagonal", rep.theorem1.advisory.zero_diagonal_only}}},
          {"kkt", kkt_json(sol.kkt)}};
}

namespace detail {
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& rows) {
  os << "D,R_bits,lambda_star,sigma2,verdict\n";
  for (const auto& row : rows) {
    os << detail::csv_num(row.distortion) << ',';
    if (row.error.empty()) {
      os << detail::csv_num(row.rate_bits) << ',' << detail::csv_num(row.lambda_star) << ','
         << detail::csv_num(row.sigma2_bits2) << ',' << verdict_name(row.verdict) << '\n';
    } else {
      os << ",,,error: " << row.error << '\n';
    }
  }
}

// Two-column D R(D) file, gnuplot-ready; failed rows are skipped.
inline void write_curve_dat(std::ostream& os, const std::vector<CurvePoint>& rows) {
  for (const auto& row : rows)
    if (row.error.empty())
      os << detail::csv_num(row.distortion) << ' ' << detail::csv_num(row.rate_bits) << '\n';
}

inline void write_paths_csv(std::ostream& os, const SimulationResult& result) {
  os << "trial,n,S_n,lower,upper\n";
  for (std::size_t trial = 0; trial < result.trials; ++trial)
    for (std::size_t g = 0; g < result.n_grid.size(); ++g)
      os << trial << ',' << result.n_grid[g] << ','
         << detail::csv_num(result.s_paths[trial][g]) << ','
         << detail::csv_num(result.lower_envelope[trial][g]) << ','
         << detail::csv_num(result.upper_envelope[trial][g]) << '\n';
}

inline nlohmann::json simulation_summary_json(const SimulationResult& result) {
  nlohmann::json scaled = {{"mean_scaled", result.scaled_stats.mean_scaled}};
  if (result.scaled_stats.var_scaled)
    scaled["var_scaled"] = *result.scaled_stats.var_scaled;
  else
    scaled["var_scaled"] = nullptr;
  return {{"n_grid", result.n_grid},
          {"trials", result.trials},
          {"seed", result.seed},
          {"D", result.distortion},
          {"R_bits", result.rate_bits},
          {"sigma2", result.sigma2_bits2},
          {"verdict", verdict_name(result.verdict)},
          {"f_table", result.f_table_bits},
          {"lower_above_rate_count", result.lower_above_rate_count},
          {"upper_below_rate_count", result.upper_below_rate_count},
          {"scaled_stats", scaled}};
}

}  // namespace rdcrit
