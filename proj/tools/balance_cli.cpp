// balance: command-line front end.
//
//   balance select   --pool-tensor P --ref-tensor R --config C --out batch.json
//   balance simulate --scenario NAME --config C --out-curve curve.csv [--timing]
//   balance oracle   --fixture F --op OP [--out report.json]
//   balance diagnose cv --pool-tensor P --ref-tensor R --repeats N --config C [--out cv.csv]
//
// Exit codes: 0 ok, 1 tolerance failure, 2 I/O or format error, 3 config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "balance/balance.hpp"
#include "balance/fixture.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTolerance = 1;
constexpr int kExitFormat = 2;
constexpr int kExitConfig = 3;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw balance::FormatError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw balance::FormatError("write to '" + path + "' failed");
}

balance::RunConfig config_or_default(const std::string& path) {
  return path.empty() ? balance::RunConfig{} : balance::load_run_config(path);
}

struct Inputs {
  balance::PredictionTensor pool;
  balance::LabelMatrix ref_labels;
};

Inputs load_inputs(const std::string& pool_path, const std::string& ref_path) {
  auto pool = balance::io::read_tensor(pool_path);
  const auto ref = balance::io::read_tensor(ref_path);
  if (ref.num_hypotheses() != pool.num_hypotheses()) {
    throw balance::FormatError("pool and reference tensors disagree on the number of hypotheses");
  }
  return {std::move(pool), balance::hard_labels(ref)};
}

void require_pairs(const balance::PredictionTensor& pool, std::size_t num_pairs) {
  if (2 * num_pairs > pool.num_hypotheses()) {
    throw balance::ConfigError("K = " + std::to_string(num_pairs) + " needs 2K <= S = " +
                               std::to_string(pool.num_hypotheses()) + " posterior samples");
  }
}

int run_select(const std::string& pool_path, const std::string& ref_path, const std::string& config_path,
               const std::string& out_path) {
  const auto config = config_or_default(config_path);
  const auto inputs = load_inputs(pool_path, ref_path);
  require_pairs(inputs.pool, config.selection.num_pairs);
  balance::Rng rng(config.selection.seed);
  const double tau = balance::anneal_tau(config.tau, config.epsilon);

  balance::AcquisitionRequest request;
  request.algorithm = config.algorithm;
  request.pool = &inputs.pool;
  request.ref_labels = &inputs.ref_labels;
  request.pairs = balance::with_edge_mask(
      balance::pair_hypotheses(inputs.pool.num_hypotheses(), config.selection.num_pairs, rng), inputs.ref_labels, tau);
  request.tau = tau;
  request.config = config.selection;
  request.candidates.resize(inputs.pool.num_points());
  for (std::size_t i = 0; i < request.candidates.size(); ++i) request.candidates[i] = i;

  const auto picked = balance::acquire(request, rng);
  write_text(out_path, balance::batch_to_json({picked.indices, picked.scores, tau, config.selection.seed}));
  return kExitOk;
}

int run_simulate(const std::string& scenario, const std::string& config_path, const std::string& out_path,
                 bool timing) {
  const auto parsed = balance::sim::parse_scenario(scenario);
  const auto config = config_or_default(config_path);
  write_text(out_path, balance::curve_to_csv(balance::sim::simulate(parsed, config, timing)));
  return kExitOk;
}

int run_oracle(const std::string& fixture_path, const std::string& op, const std::string& out_path) {
  const auto fixture = balance::oracle::load_fixture(fixture_path);
  const auto result = balance::oracle::run_comparison(op, fixture);
  write_text(out_path, balance::oracle::comparison_to_json(result));
  if (!result.passed()) {
    std::cerr << "balance oracle: " << op << " deviation " << result.max_abs_deviation << " exceeds tolerance "
              << result.tolerance << "\n";
    return kExitTolerance;
  }
  return kExitOk;
}

int run_diagnose_cv(const std::string& pool_path, const std::string& ref_path, std::size_t repeats,
                    const std::string& config_path, const std::string& out_path) {
  const auto config = config_or_default(config_path);
  if (repeats < 2) throw balance::ConfigError("--repeats must be >= 2");
  const auto inputs = load_inputs(pool_path, ref_path);
  require_pairs(inputs.pool, config.selection.num_pairs);
  balance::Rng rng(config.selection.seed);
  const double tau = balance::anneal_tau(config.tau, config.epsilon);
  const auto rows =
      balance::coefficient_of_variation(inputs.pool, inputs.ref_labels, config.selection.num_pairs, tau, repeats, rng);
  write_text(out_path, balance::variation_to_csv(rows));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch active learning by balanced entropy"};
  app.require_subcommand(1);

  std::string pool_path, ref_path, config_path, out_path, scenario, fixture_path, op;
  bool timing = false;
  std::size_t repeats = 0;

  auto* select = app.add_subcommand("select", "choose one batch from pool/reference tensors");
  select->add_option("--pool-tensor", pool_path, "S x N_pool x C tensor (BLNC v1 or JSON)")->required();
  select->add_option("--ref-tensor", ref_path, "S x N_ref x C tensor (BLNC v1 or JSON)")->required();
  select->add_option("--config", config_path, "JSON run configuration");
  select->add_option("--out", out_path, "batch JSON output (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "run an active-learning loop and write its learning curve");
  simulate->add_option("--scenario", scenario, "stylized-n64 | synthetic-dirichlet | imbalanced-synthetic")->required();
  simulate->add_option("--config", config_path, "JSON run configuration");
  simulate->add_option("--out-curve", out_path, "curve CSV output (default stdout)");
  simulate->add_flag("--timing", timing, "record wall-clock ms per round (output is then not reproducible)");

  auto* oracle = app.add_subcommand("oracle", "compare an implementation against its oracle on a fixture");
  oracle->add_option("--fixture", fixture_path, "fixture JSON")->required();
  oracle->add_option("--op", op, "balance-vs-bruteforce | recurrence-vs-naive | ec2-vs-eced")->required();
  oracle->add_option("--out", out_path, "report JSON output (default stdout)");

  auto* diagnose = app.add_subcommand("diagnose", "diagnostics");
  diagnose->require_subcommand(1);
  auto* cv = diagnose->add_subcommand("cv", "per-point coefficient of variation across re-pairings");
  cv->add_option("--pool-tensor", pool_path, "S x N_pool x C tensor")->required();
  cv->add_option("--ref-tensor", ref_path, "S x N_ref x C tensor")->required();
  cv->add_option("--repeats", repeats, "number of independent pairings R (>= 2)")->required();
  cv->add_option("--config", config_path, "JSON run configuration");
  cv->add_option("--out", out_path, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "balance: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*select) return run_select(pool_path, ref_path, config_path, out_path);
    if (*simulate) return run_simulate(scenario, config_path, out_path, timing);
    if (*oracle) return run_oracle(fixture_path, op, out_path);
    if (*cv) return run_diagnose_cv(pool_path, ref_path, repeats, config_path, out_path);
  } catch (const balance::ConfigError& e) {
    std::cerr << "balance: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const balance::CapacityError& e) {
    std::cerr << "balance: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const balance::FormatError& e) {
    std::cerr << "balance: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "balance: " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitConfig;
}
