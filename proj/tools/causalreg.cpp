// Command-line surface for two-environment causal regularization: simulation,
// fitting, model selection, bootstrap intervals, finite-sample bounds and the
// simulation-study experiment drivers.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "causalreg/bootstrap.hpp"
#include "causalreg/bounds.hpp"
#include "causalreg/config.hpp"
#include "causalreg/csv.hpp"
#include "causalreg/estimator.hpp"
#include "causalreg/experiments.hpp"
#include "causalreg/moments.hpp"
#include "causalreg/population.hpp"
#include "causalreg/selection.hpp"
#include "causalreg/sem.hpp"
#include "causalreg/svg.hpp"
#include "causalreg/table.hpp"

namespace {

using namespace causalreg;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

struct DataArgs {
  std::string data_path;
  std::string env_column = "env";
  std::vector<std::string> labels = {"obs", "shifted"};
  bool center = false;
  long simulate_n = 0;  // when > 0, use a simulated benchmark pair instead of a file
};

ExperimentConfig resolve_config(const GlobalArgs& g) {
  ExperimentConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out_dir = *g.out;
  if (g.threads) {
    if (*g.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.threads = *g.threads;
  }
  return cfg;
}

LambdaValue parse_lambda(const std::string& text) {
  if (text == "inf") return LambdaValue::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return LambdaValue::finite(v);
  } catch (const std::exception&) {
    throw ConfigError("lambda must be a nonnegative number or 'inf', got '" + text + "'");
  }
}

EnvPair resolve_pair(const DataArgs& d, const ExperimentConfig& cfg) {
  if (d.simulate_n > 0) {
    const SemStructure s = structure_from_config(cfg);
    return sample_env_pair(s, NoiseSpec::scaled_identity(s.p(), cfg.noise_scale),
                           ShiftSpec::scaled_identity(s.p(), cfg.shift_scale), d.simulate_n,
                           d.simulate_n, cfg.seed);
  }
  if (d.data_path.empty()) throw ConfigError("provide --data FILE or --simulate-n N");
  if (d.labels.size() != 2) throw ConfigError("--labels needs exactly two values");
  return ingest_csv_file(d.data_path, d.env_column, d.labels, d.center);
}

std::filesystem::path output_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

void write_table(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write '" + path.string() + "'");
  table.write_csv(os);
  std::cout << path.string() << '\n';
}

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--data", d.data_path, "two-environment CSV (columns x1..xp, y, env)");
  cmd->add_option("--env-column", d.env_column, "environment column name");
  cmd->add_option("--labels", d.labels, "environment labels, observational first")
      ->expected(2);
  cmd->add_flag("--center", d.center, "per-environment mean centering");
  cmd->add_option("--simulate-n", d.simulate_n,
                  "simulate a benchmark pair of this size instead of reading --data");
}

int run(int argc, char** argv) {
  CLI::App app{"causal regularization for two-environment linear SEMs"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads for experiments");

  // simulate
  auto* sim = app.add_subcommand("simulate", "sample a two-environment benchmark dataset");
  long sim_n = 100;
  sim->add_option("--n", sim_n, "rows per environment")->check(CLI::PositiveNumber);

  // fit / path
  auto* fit_cmd = app.add_subcommand("fit", "fit the estimator at one lambda");
  DataArgs fit_data;
  std::string fit_lambda = "1";
  add_data_options(fit_cmd, fit_data);
  fit_cmd->add_option("--lambda", fit_lambda, "regularization value or 'inf'");

  auto* path_cmd = app.add_subcommand("path", "fit the full regularization path");
  DataArgs path_data;
  std::vector<std::string> path_grid;
  add_data_options(path_cmd, path_data);
  path_cmd->add_option("--grid", path_grid, "lambda grid (numbers, 'inf'); default grid otherwise");

  // select
  auto* sel_cmd = app.add_subcommand("select", "cross-validated lambda selection");
  DataArgs sel_data;
  add_data_options(sel_cmd, sel_data);
  std::optional<int> sel_folds;
  std::optional<double> sel_fraction;
  sel_cmd->add_option("--folds", sel_folds, "V-fold cross-validation");
  sel_cmd->add_option("--split-fraction", sel_fraction, "single split with this test fraction");

  // bootstrap
  auto* boot_cmd = app.add_subcommand("bootstrap", "bootstrap CI for the selected model's risk gap");
  DataArgs boot_data;
  add_data_options(boot_cmd, boot_data);
  std::optional<int> boot_b;
  std::optional<double> boot_alpha;
  std::optional<std::string> boot_lambda;
  bool boot_use_selector = false;
  boot_cmd->add_option("--b", boot_b, "bootstrap replicates");
  boot_cmd->add_option("--alpha", boot_alpha, "1 - confidence level");
  boot_cmd->add_option("--lambda", boot_lambda, "fixed model (skip the selector)");
  boot_cmd->add_flag("--use-selector", boot_use_selector, "select lambda on the training half");

  // bound
  auto* bound_cmd = app.add_subcommand("bound", "finite-sample worst-risk bound components");
  DataArgs bound_data;
  std::string bound_lambda = "0.2";
  double bound_tau = 1.0, bound_q = 1.0;
  add_data_options(bound_cmd, bound_data);
  bound_cmd->add_option("--lambda", bound_lambda, "model to bound");
  bound_cmd->add_option("--tau", bound_tau, "shift-strength multiplier (1+tau)");
  bound_cmd->add_option("--q", bound_q, "tail parameter");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run a simulation study");
  std::string exp_name;
  exp_cmd->add_option("--name", exp_name, "convergence | coverage | compare")->required();

  CLI11_PARSE(app, argc, argv);
  ExperimentConfig cfg = resolve_config(g);
  const std::string seed_tag = std::to_string(cfg.seed);

  if (sim->parsed()) {
    const SemStructure s = structure_from_config(cfg);
    const EnvPair pair =
        sample_env_pair(s, NoiseSpec::scaled_identity(s.p(), cfg.noise_scale),
                        ShiftSpec::scaled_identity(s.p(), cfg.shift_scale), sim_n, sim_n,
                        cfg.seed);
    const auto path = output_path(cfg, "simulate_seed" + seed_tag + "_n" +
                                           std::to_string(sim_n) + ".csv");
    std::ofstream os(path);
    if (!os) throw DataError("cannot write '" + path.string() + "'");
    write_env_pair_csv(os, pair);
    std::cout << path.string() << '\n';
    return 0;
  }

  if (fit_cmd->parsed()) {
    const EnvPair pair = resolve_pair(fit_data, cfg);
    const LambdaValue lambda = parse_lambda(fit_lambda);
    const FitResult result = fit_on_datasets(pair, lambda);
    ResultTable table;
    const std::string run_id = "fit-" + seed_tag;
    const long n = pair.obs.n() + pair.shifted.n();
    for (int j = 0; j < result.beta.size(); ++j) {
      table.add({run_id, "fit", 0, n, lambda.as_double(), "coef_" + std::to_string(j + 1),
                 result.beta(j)});
    }
    table.add({run_id, "fit", 0, n, lambda.as_double(), "rank_deficient",
               result.rank_deficient ? 1.0 : 0.0});
    write_table(table, output_path(cfg, "fit_seed" + seed_tag + ".csv"));
    return 0;
  }

  if (path_cmd->parsed()) {
    const EnvPair pair = resolve_pair(path_data, cfg);
    std::vector<LambdaValue> grid = cfg.lambda_grid;
    if (!path_grid.empty()) {
      grid.clear();
      for (const auto& t : path_grid) grid.push_back(parse_lambda(t));
    }
    const RegularizationPath fitted = fit_path(compute_moments(pair), grid);
    ResultTable table;
    const std::string run_id = "path-" + seed_tag;
    const long n = pair.obs.n() + pair.shifted.n();
    for (std::size_t i = 0; i < fitted.lambdas.size(); ++i) {
      const double lam = fitted.lambdas[i].as_double();
      for (int j = 0; j < fitted.coefs[i].size(); ++j) {
        table.add({run_id, "path", 0, n, lam, "coef_" + std::to_string(j + 1),
                   fitted.coefs[i](j)});
      }
      table.add({run_id, "path", 0, n, lam, "rank_deficient",
                 fitted.rank_deficient[i] ? 1.0 : 0.0});
    }
    write_table(table, output_path(cfg, "path_seed" + seed_tag + ".csv"));
    return 0;
  }

  if (sel_cmd->parsed()) {
    const EnvPair pair = resolve_pair(sel_data, cfg);
    if (sel_folds) {
      cfg.selector_type = "vfold";
      cfg.folds = *sel_folds;
    } else if (sel_fraction) {
      cfg.selector_type = "split";
      cfg.split_fraction = *sel_fraction;
    }
    const ResamplingPlan plan =
        cfg.selector_type == "vfold"
            ? make_vfold(pair.shifted.n(), pair.obs.n(), cfg.folds, derive_seed(cfg.seed, 21))
            : make_split(pair.shifted.n(), pair.obs.n(), cfg.split_fraction,
                         derive_seed(cfg.seed, 21));
    const SelectorResult result = sample_selector(pair, cfg.lambda_grid, plan);
    ResultTable table;
    const std::string run_id = "select-" + seed_tag;
    const long n = pair.obs.n() + pair.shifted.n();
    for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
      table.add({run_id, "select", 0, n, cfg.lambda_grid[i].as_double(), "cv_loss",
                 result.loss_curve[i]});
    }
    table.add({run_id, "select", kAggregate, n, result.chosen_lambda.as_double(),
               "chosen_lambda", result.chosen_lambda.as_double()});
    write_table(table, output_path(cfg, "select_seed" + seed_tag + ".csv"));
    return 0;
  }

  if (boot_cmd->parsed()) {
    const EnvPair pair = resolve_pair(boot_data, cfg);
    if (boot_b) cfg.bootstrap_replicates = *boot_b;
    if (boot_alpha) cfg.alpha = *boot_alpha;
    if (boot_lambda) {
      cfg.bootstrap_use_selector = false;
      cfg.bootstrap_lambda = parse_lambda(*boot_lambda).as_double();
    }
    if (boot_use_selector) cfg.bootstrap_use_selector = true;

    const ResamplingPlan split = make_split(pair.shifted.n(), pair.obs.n(),
                                            cfg.split_fraction, derive_seed(cfg.seed, 11));
    std::optional<LambdaValue> fixed;
    ResamplingPlan selection_plan;
    if (cfg.bootstrap_use_selector) {
      const EnvPair train = train_pair(pair, split.assignments.front());
      selection_plan =
          make_vfold(train.shifted.n(), train.obs.n(), cfg.folds, derive_seed(cfg.seed, 12));
    } else {
      fixed = std::isinf(cfg.bootstrap_lambda) ? LambdaValue::infinity()
                                               : LambdaValue::finite(cfg.bootstrap_lambda);
    }
    const BootstrapResult result =
        bootstrap_worst_risk_ci(pair, split, cfg.lambda_grid, selection_plan,
                                cfg.bootstrap_replicates, cfg.alpha,
                                derive_seed(cfg.seed, 13), fixed);
    ResultTable table;
    const std::string run_id = "bootstrap-" + seed_tag;
    const long n = pair.obs.n() + pair.shifted.n();
    const double lam = result.chosen_lambda.as_double();
    for (std::size_t i = 0; i < result.draws.size(); ++i) {
      table.add({run_id, "bootstrap", static_cast<long>(i), n, lam, "draw", result.draws[i]});
    }
    table.add({run_id, "bootstrap", kAggregate, n, lam, "ci_lower", result.lower});
    table.add({run_id, "bootstrap", kAggregate, n, lam, "ci_upper", result.upper});
    table.add({run_id, "bootstrap", kAggregate, n, lam, "level", result.level});
    table.add({run_id, "bootstrap", kAggregate, n, lam, "chosen_lambda", lam});
    write_table(table, output_path(cfg, "bootstrap_seed" + seed_tag + ".csv"));
    return 0;
  }

  if (bound_cmd->parsed()) {
    const EnvPair pair = resolve_pair(bound_data, cfg);
    const LambdaValue lambda = parse_lambda(bound_lambda);
    const FitResult fitted = fit_on_datasets(pair, lambda);
    const BoundInputs in = bound_inputs_from_pair(pair, bound_q);
    const double r_pred = risk_sum_hat(pair, fitted.beta);
    const double r_diff = risk_diff_hat(pair, fitted.beta);
    ResultTable table;
    const std::string run_id = "bound-" + seed_tag;
    const long n = pair.obs.n() + pair.shifted.n();
    const double lam = lambda.as_double();
    table.add({run_id, "bound", 0, n, lam, "phi_shifted",
               phi(in.p, in.n_e, in.q, in.var_y_e, in.max_var_x_e)});
    table.add({run_id, "bound", 0, n, lam, "phi_obs",
               phi(in.p, in.n_o, in.q, in.var_y_o, in.max_var_x_o)});
    table.add({run_id, "bound", 0, n, lam, "phi_plus", phi_plus(in)});
    table.add({run_id, "bound", 0, n, lam, "r_pred_hat", r_pred});
    table.add({run_id, "bound", 0, n, lam, "r_diff_hat", r_diff});
    table.add({run_id, "bound", 0, n, lam, "bound_core", bound_core(r_pred, r_diff, bound_tau)});
    table.add({run_id, "bound", 0, n, lam, "worst_risk_bound",
               worst_risk_bound(in, fitted.beta, r_pred, r_diff, bound_tau)});
    table.add({run_id, "bound", 0, n, lam, "plug_in_variances", in.plug_in ? 1.0 : 0.0});
    write_table(table, output_path(cfg, "bound_seed" + seed_tag + ".csv"));
    return 0;
  }

  if (exp_cmd->parsed()) {
    ResultTable table;
    std::vector<Series> series;
    PlotSpec plot;
    if (exp_name == "convergence") {
      table = exp_convergence(cfg);
      series = aggregate_series(table, {"mean_abs_excess_risk", "mean_phi_prediction"});
      plot = {"normalized excess risk vs sample size", "n", "normalized excess risk",
              true, true};
    } else if (exp_name == "coverage") {
      table = exp_coverage(cfg);
      series = aggregate_series(table, {"coverage", "median_width"});
      plot = {"bootstrap interval coverage and width", "n", "value", true, false};
    } else if (exp_name == "compare") {
      table = exp_compare(cfg);
      std::vector<std::string> metrics;
      for (double scale : cfg.shift_scales) {
        metrics.push_back("median_norm_oos_risk_cv_" + format_short(scale));
        metrics.push_back("median_norm_oos_risk_dantzig_" + format_short(scale));
      }
      series = aggregate_series(table, metrics);
      plot = {"out-of-sample risk: regularization vs causal Dantzig", "n",
              "normalized out-of-sample risk", true, true};
    } else {
      throw ConfigError("unknown experiment '" + exp_name + "'");
    }
    write_table(table, output_path(cfg, exp_name + "_seed" + seed_tag + ".csv"));
    const auto svg_path = output_path(cfg, exp_name + "_seed" + seed_tag + ".svg");
    std::ofstream os(svg_path);
    if (!os) throw DataError("cannot write '" + svg_path.string() + "'");
    os << render_svg(series, plot);
    std::cout << svg_path.string() << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const auto report = [](const char* kind, const std::exception& e, int code) {
    nlohmann::json record{{"error", kind}, {"message", e.what()}};
    std::cerr << record.dump() << '\n';
    return code;
  };
  try {
    return run(argc, argv);
  } catch (const causalreg::ConfigError& e) {
    return report("config", e, 2);
  } catch (const causalreg::DataError& e) {
    return report("data", e, 3);
  } catch (const causalreg::NumericError& e) {
    return report("numeric", e, 4);
  } catch (const std::exception& e) {
    return report("internal", e, 1);
  }
}
