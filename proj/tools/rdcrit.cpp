// Command line front end: model ingestion, criticality analysis, R(D)
// curves, redundancy simulation, and the continuous-model checkers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdcrit/rdcrit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidModel = 2;
constexpr int kExitRangeD = 3;
constexpr int kExitNoConvergence = 4;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

struct ModelArgs {
  std::string path;
  std::string example;
  double p = 0.5;
  std::string pmf_text;
  std::size_t grid_size = 0;  // 0 = example default
};

void add_model_flags(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("model", args.path, "model JSON file");
  cmd->add_option("--example", args.example,
                  "built-in model: binary | five | mse2 | l1three | lossless");
  cmd->add_option("--p", args.p, "success probability for --example binary");
  cmd->add_option("--pmf", args.pmf_text, "comma-separated pmf for --example lossless");
  cmd->add_option("--grid-size", args.grid_size,
                  "discretization cells for continuous models");
}

rdcrit::LoadedModel resolve_model(const ModelArgs& args) {
  if (!args.example.empty()) {
    if (args.example == "binary") return rdcrit::binary_hamming(args.p);
    if (args.example == "five") return rdcrit::five_model();
    if (args.example == "mse2")
      return rdcrit::mse2_model(args.grid_size ? args.grid_size : 400);
    if (args.example == "l1three")
      return rdcrit::l1three_model(args.grid_size ? args.grid_size : 600);
    if (args.example == "lossless") {
      if (args.pmf_text.empty()) return rdcrit::lossless_model();
      return rdcrit::lossless_model(parse_list(args.pmf_text));
    }
    throw rdcrit::InvalidModelError("unknown --example: " + args.example);
  }
  if (args.path.empty())
    throw rdcrit::InvalidModelError("provide a model file or --example");
  return rdcrit::load_model_file(args.path);
}

rdcrit::DiscreteModel as_discrete(const rdcrit::LoadedModel& loaded) {
  if (std::holds_alternative<rdcrit::DiscreteModel>(loaded))
    return std::get<rdcrit::DiscreteModel>(loaded);
  return rdcrit::discretize(std::get<rdcrit::ContinuousModel>(loaded));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << text;
}

double display_rate(double bits, const std::string& units) {
  return units == "nats" ? rdcrit::nats_from_bits(bits) : bits;
}

int cmd_analyze(const ModelArgs& margs, double distortion, double epsilon,
                const std::string& out_path, const std::string& units) {
  const rdcrit::DiscreteModel model = as_discrete(resolve_model(margs));
  if (distortion <= 0.0) {
    // Lossless regime: report f(x) = -log2 P(x) - H(P) directly.
    const auto f = rdcrit::lossless_f(model.pmf());
    double max_abs = 0.0;
    for (double v : f) max_abs = std::max(max_abs, std::abs(v));
    const double sigma2 = rdcrit::minimal_coding_variance(model, f);
    const bool critical = max_abs <= epsilon;
    nlohmann::json report = {{"D", 0.0},
                             {"H_bits", rdcrit::entropy_bits(model.pmf())},
                             {"f", f},
                             {"max_abs_f", max_abs},
                             {"sigma2", sigma2},
                             {"verdict", critical ? "Critical" : "Generic"},
                             {"epsilon", epsilon}};
    if (!out_path.empty()) write_text(out_path, report.dump(2) + "\n");
    std::cout << (critical ? "CRITICAL (O(log n))" : "GENERIC (O(sqrt n))")
              << "  D=0 (lossless) max|f|=" << max_abs << " sigma2=" << sigma2 << "\n";
    return kExitOk;
  }
  const auto result = rdcrit::classify(model, distortion, epsilon);
  if (!out_path.empty())
    write_text(out_path, rdcrit::classification_json(result).dump(2) + "\n");
  const char* label =
      result.report.verdict == rdcrit::Verdict::Critical ? "CRITICAL (O(log n))"
                                                         : "GENERIC (O(sqrt n))";
  std::cout << label << "  D=" << distortion
            << " R=" << display_rate(result.solution.rate_bits, units) << ' ' << units
            << " lambda*=" << result.solution.lambda_star
            << " sigma2=" << result.report.sigma2_bits2 << "\n";
  return kExitOk;
}

int cmd_curve(const ModelArgs& margs, double d_lo, double d_hi, std::size_t steps,
              const std::string& out_csv) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  const rdcrit::DiscreteModel model = as_discrete(resolve_model(margs));
  const double dmax = rdcrit::d_max(model).value;
  if (!(d_lo > 0.0 && d_hi < dmax && d_lo <= d_hi))
    throw rdcrit::DistortionRangeError("curve grid must lie strictly inside (0, D_max)", 0.0,
                                       dmax);
  std::vector<double> grid;
  for (std::size_t s = 0; s < steps; ++s)
    grid.push_back(steps == 1 ? d_lo
                              : d_lo + (d_hi - d_lo) * static_cast<double>(s) /
                                           static_cast<double>(steps - 1));
  const auto rows = rdcrit::rd_curve(model, grid);
  std::ostringstream csv, dat;
  rdcrit::write_curve_csv(csv, rows);
  rdcrit::write_curve_dat(dat, rows);
  write_text(out_csv, csv.str());
  std::string dat_path = out_csv;
  const auto dot = dat_path.find_last_of('.');
  dat_path = (dot == std::string::npos ? dat_path : dat_path.substr(0, dot)) + ".dat";
  write_text(dat_path, dat.str());
  std::cout << "wrote " << rows.size() << " points to " << out_csv << " and " << dat_path
            << "\n";
  return kExitOk;
}

int cmd_simulate(const ModelArgs& margs, double distortion, std::size_t n,
                 const std::string& n_grid_text, std::size_t trials, std::uint64_t seed,
                 const std::string& out_prefix) {
  const rdcrit::DiscreteModel model = as_discrete(resolve_model(margs));
  std::vector<std::size_t> n_grid;
  if (!n_grid_text.empty()) {
    for (double v : parse_list(n_grid_text)) n_grid.push_back(static_cast<std::size_t>(v));
  } else {
    n_grid.push_back(n);
  }
  const auto result = rdcrit::sample_redundancy_paths(model, distortion, n_grid, trials, seed);
  std::ostringstream csv;
  rdcrit::write_paths_csv(csv, result);
  write_text(out_prefix + "_paths.csv", csv.str());
  write_text(out_prefix + "_summary.json",
             rdcrit::simulation_summary_json(result).dump(2) + "\n");
  std::cout << "simulated " << trials << " trials to n=" << result.n_grid.back()
            << "; mean(S/sqrt n)=" << result.scaled_stats.mean_scaled;
  if (result.scaled_stats.var_scaled)
    std::cout << " var(S/sqrt n)=" << *result.scaled_stats.var_scaled
              << " (sigma2=" << result.sigma2_bits2 << ")";
  std::cout << "\n";
  return kExitOk;
}

int cmd_check_continuous(const ModelArgs& margs, const std::string& points_text,
                         const std::string& lambda_text, std::uint64_t seed,
                         const std::string& out_path) {
  const auto loaded = resolve_model(margs);
  if (!std::holds_alternative<rdcrit::ContinuousModel>(loaded))
    throw rdcrit::InvalidModelError("check-continuous needs a continuous model");
  const auto& model = std::get<rdcrit::ContinuousModel>(loaded);

  std::vector<double> lambda_grid = lambda_text.empty()
                                        ? std::vector<double>{-0.5, -1.0, -2.0, -4.0}
                                        : parse_list(lambda_text);
  nlohmann::json report;

  std::optional<std::vector<double>> witness;
  if (!points_text.empty()) {
    witness = parse_list(points_text);
    if (!rdcrit::check_thm3a(*witness, model)) {
      report["thm3a"] = false;
      witness.reset();
    }
  } else {
    // Coarse seeded search for a dominance witness.
    rdcrit::CounterRng rng(1000003 + seed, 0);
    const std::size_t k1 = model.repro_size() + 1;
    for (int attempt = 0; attempt < 1000 && !witness; ++attempt) {
      std::vector<double> pts(k1);
      for (auto& x : pts) x = rng.next_in(model.low(), model.high());
      try {
        if (rdcrit::check_thm3a(pts, model)) witness = pts;
      } catch (const std::invalid_argument&) {
      }
    }
  }
  if (witness) {
    report["witness"] = *witness;
    report["thm3a"] = true;
    const auto b = rdcrit::check_thm3b(*witness, model);
    report["thm3b"] = {{"holds", b.holds}, {"margin", b.margin}, {"exhaustive", b.exhaustive}};
  } else if (!report.contains("thm3a")) {
    report["witness"] = nullptr;
    report["thm3a"] = false;
  }

  const auto thm2 = rdcrit::check_thm2_independence(model, lambda_grid);
  nlohmann::json by_lambda = nlohmann::json::array();
  for (const auto& [lambda, sigma] : thm2.min_singular_value_by_lambda)
    by_lambda.push_back({{"lambda", lambda}, {"min_singular_value", sigma}});
  report["thm2"] = {{"independent", thm2.independent}, {"by_lambda", by_lambda}};

  if (!out_path.empty()) write_text(out_path, report.dump(2) + "\n");
  std::cout << "thm3a witness: ";
  if (witness) {
    std::cout << '(';
    for (std::size_t i = 0; i < witness->size(); ++i)
      std::cout << (i ? ", " : "") << (*witness)[i];
    std::cout << ')';
  } else {
    std::cout << "none";
  }
  std::cout << "; thm2 independence: " << (thm2.independent ? "true" : "false") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-distortion criticality analyzer"};
  app.require_subcommand(1);

  ModelArgs margs;
  double distortion = 0.0, epsilon = rdcrit::kDefaultEpsilonBits;
  double d_lo = 0.0, d_hi = 0.0;
  std::size_t steps = 0, n = 10000, trials = 200;
  std::uint64_t seed = 0;
  std::string units = "bits", n_grid_text, points_text, lambda_text;
  // One output variable per subcommand: a default on one must not leak into
  // another through a shared binding.
  std::string analyze_out, curve_out = "curve.csv", sim_out = "sim", check_out;

  auto* analyze = app.add_subcommand("analyze", "classify a source at one distortion level");
  add_model_flags(analyze, margs);
  analyze->add_option("-D,--distortion", distortion, "distortion level (0 = lossless)");
  analyze->add_option("--epsilon", epsilon, "criticality tolerance in bits");
  analyze->add_option("--out", analyze_out, "write the JSON report here");
  analyze->add_option("--units", units, "bits | nats (display only)")
      ->check(CLI::IsMember({"bits", "nats"}));

  auto* curve = app.add_subcommand("curve", "R(D) sweep over a distortion grid");
  add_model_flags(curve, margs);
  curve->add_option("--d-min", d_lo, "lowest distortion")->required();
  curve->add_option("--d-max", d_hi, "highest distortion")->required();
  curve->add_option("--steps", steps, "number of grid points")->required();
  curve->add_option("--out", curve_out, "CSV output path");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo of the redundancy sum");
  add_model_flags(simulate, margs);
  simulate->add_option("-D,--distortion", distortion)->required();
  simulate->add_option("-n", n, "largest sample size");
  simulate->add_option("--n-grid", n_grid_text, "comma-separated sample sizes");
  simulate->add_option("--trials", trials);
  simulate->add_option("--seed", seed);
  simulate->add_option("--out", sim_out, "output prefix");

  auto* checkc = app.add_subcommand("check-continuous",
                                    "dominance witness and linear-independence checks");
  add_model_flags(checkc, margs);
  checkc->add_option("--points", points_text, "comma-separated witness points");
  checkc->add_option("--lambda-grid", lambda_text, "comma-separated lambda values");
  checkc->add_option("--seed", seed);
  checkc->add_option("--out", check_out, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze))
      return cmd_analyze(margs, distortion, epsilon, analyze_out, units);
    if (app.got_subcommand(curve)) return cmd_curve(margs, d_lo, d_hi, steps, curve_out);
    if (app.got_subcommand(simulate))
      return cmd_simulate(margs, distortion, n, n_grid_text, trials, seed, sim_out);
    if (app.got_subcommand(checkc))
      return cmd_check_continuous(margs, points_text, lambda_text, seed, check_out);
  } catch (const rdcrit::DistortionRangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRangeD;
  } catch (const rdcrit::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNoConvergence;
  } catch (const rdcrit::InvalidModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidModel;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidModel;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
