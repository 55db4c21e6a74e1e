#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcs/bench.hpp"
#include "bcs/ensemble.hpp"
#include "bcs/optimal_recovery.hpp"
#include "bcs/textio.hpp"

namespace {

struct TrainArgs {
  bcs::TrainingConfig cfg;
  std::size_t components = 1;
  std::string matrix_path;
  std::string out_path;
  std::string log_path;
};

void add_train_options(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--n", a.cfg.n, "signal length")->capture_default_str();
  cmd->add_option("--m", a.cfg.m, "observation length")->capture_default_str();
  cmd->add_option("--k", a.cfg.k, "number of ones in the signal")
      ->capture_default_str();
  cmd->add_option("--alpha", a.cfg.alpha, "hidden units")
      ->capture_default_str();
  cmd->add_option("--batch", a.cfg.batch, "minibatch size")
      ->capture_default_str();
  cmd->add_option("--steps", a.cfg.steps, "training steps")
      ->capture_default_str();
  cmd->add_option("--lambda", a.cfg.lambda, "output L1 penalty weight")
      ->capture_default_str();
  cmd->add_option("--learning-rate", a.cfg.learning_rate,
                  "Adam learning rate")
      ->capture_default_str();
  cmd->add_option("--seed", a.cfg.seed, "master seed")->capture_default_str();
  cmd->add_option("--probe-every", a.cfg.probe_every,
                  "log recovery rate every this many steps (0 = off)")
      ->capture_default_str();
  cmd->add_option("--probe-trials", a.cfg.probe_trials,
                  "trials per recovery-rate probe")
      ->capture_default_str();
  cmd->add_option("--components", a.components,
                  "nets to train; >1 writes an ensemble file")
      ->capture_default_str();
  cmd->add_option("--matrix", a.matrix_path,
                  "sensing matrix text file (default: drawn from seed)");
  cmd->add_option("--out", a.out_path, "output model/ensemble file")
      ->required();
  cmd->add_option("--log", a.log_path, "training log CSV path");
}

bcs::SensingMatrix train_matrix(const TrainArgs& a, const CLI::App* cmd) {
  if (!a.matrix_path.empty()) {
    bcs::SensingMatrix A = bcs::read_matrix_text(a.matrix_path);
    if (cmd->count("--m") && A.rows() != a.cfg.m)
      throw std::runtime_error("--m disagrees with matrix file row count");
    if (cmd->count("--n") && A.cols() != a.cfg.n)
      throw std::runtime_error("--n disagrees with matrix file column count");
    return A;
  }
  auto rng =
      bcs::make_stream(bcs::derive_seed(a.cfg.seed, bcs::seed_tag::matrix));
  return bcs::sample_sensing_matrix(a.cfg.m, a.cfg.n, rng);
}

int run_train(TrainArgs& a, const CLI::App* cmd) {
  bcs::SensingMatrix A = train_matrix(a, cmd);
  a.cfg.m = A.rows();
  a.cfg.n = A.cols();
  if (a.components == 1) {
    bcs::TrainResult res = bcs::train(a.cfg, A);
    bcs::save_model(res.params, a.out_path);
    if (!a.log_path.empty()) res.log.save_csv(a.log_path);
  } else {
    if (!a.log_path.empty())
      throw std::runtime_error("--log is only available with --components 1");
    bcs::EnsembleModel model = bcs::train_ensemble(a.cfg, a.components, A);
    bcs::save_ensemble(model, a.out_path);
  }
  std::cout << "wrote " << a.out_path << std::endl;
  return 0;
}

bool file_has_magic(const std::string& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char buf[4] = {};
  in.read(buf, sizeof buf);
  return in && std::equal(buf, buf + 4, magic);
}

int run_recover(const std::string& model_path, const std::string& obs_path,
                const std::string& out_path) {
  bcs::BinaryObservation u = bcs::read_observation_text(obs_path);
  bcs::BinaryEstimate est;
  if (file_has_magic(model_path, "BCSE")) {
    bcs::EnsembleModel model = bcs::load_ensemble(model_path);
    est = bcs::ensemble_predict(model, u);
  } else {
    bcs::NetParams params = bcs::load_model(model_path);
    est = bcs::round_output(bcs::forward(params, u));
  }
  if (out_path.empty()) {
    bcs::write_estimate(std::cout, est);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    bcs::write_estimate(out, est);
  }
  return 0;
}

int run_oracle(const std::string& matrix_path, const std::string& obs_path,
               std::size_t k, const std::string& method,
               const std::string& out_path) {
  bcs::SensingMatrix A = bcs::read_matrix_text(matrix_path);
  bcs::BinaryObservation u = bcs::read_observation_text(obs_path);
  bcs::RecoveryOutcome outcome;
  if (method == "bnb") {
    outcome = bcs::recover_bnb(A, u, k);
  } else if (method == "exhaustive") {
    outcome = bcs::recover_exhaustive(A, u, k);
  } else {
    throw std::runtime_error("unknown method: " + method);
  }
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot open for writing: " + out_path);
    out = &file;
  }
  if (outcome.status == bcs::RecoveryStatus::found) {
    bcs::write_estimate(*out, bcs::BinaryEstimate{std::move(outcome.z)});
  } else {
    *out << "infeasible\n";
  }
  std::cerr << "nodes explored: " << outcome.nodes_explored << std::endl;
  return 0;
}

struct ConfigArgs {
  std::string preset;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--preset", a.preset, "named preset: desk or paper-k6");
  cmd->add_option("--config", a.config_path, "key=value config file")
      ->excludes("--preset");
  cmd->add_option("--set", a.overrides,
                  "override one config option, e.g. --set steps=200");
  cmd->add_option("--out-dir", a.out_dir, "output directory");
}

bcs::ExperimentConfig resolve_config(const ConfigArgs& a) {
  bcs::ExperimentConfig cfg;
  if (!a.preset.empty()) {
    auto p = bcs::preset_by_name(a.preset);
    if (!p) throw std::runtime_error("unknown preset: " + a.preset);
    cfg = *p;
  } else if (!a.config_path.empty()) {
    cfg = bcs::load_config_file(a.config_path);
  }
  for (const std::string& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got: " + kv);
    bcs::apply_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  return cfg;
}

void echo_config(const bcs::ExperimentConfig& cfg) {
  std::cout << "# effective configuration\n";
  bcs::write_config(std::cout, cfg);
  std::cout.flush();
}

int run_benchmark(const ConfigArgs& a) {
  bcs::ExperimentConfig cfg = resolve_config(a);
  echo_config(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream out(cfg.out_dir + "/config.txt");
    if (!out)
      throw std::runtime_error("cannot write to out_dir: " + cfg.out_dir);
    bcs::write_config(out, cfg);
  }
  bcs::SweepContext ctx = bcs::SweepContext::build(cfg, &std::cout);
  bcs::SweepResult sweep = ctx.rates();
  sweep.save_csv(cfg.out_dir + "/sweep.csv");
  std::cout << "wrote " << cfg.out_dir << "/sweep.csv" << std::endl;
  if (cfg.timing_instances > 0) {
    bcs::TimingResult timing = ctx.timing(cfg.timing_instances);
    timing.save_csv(cfg.out_dir + "/timing.csv");
    std::cout << "wrote " << cfg.out_dir << "/timing.csv" << std::endl;
  }
  sweep.write_csv(std::cout);
  return 0;
}

int run_curve(const ConfigArgs& a, std::size_t m, std::string out_path) {
  bcs::ExperimentConfig cfg = resolve_config(a);
  if (m == 0) m = cfg.m_list.front();
  echo_config(cfg);
  bcs::TrainingLog log = bcs::run_training_curve(cfg, m);
  if (out_path.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    out_path = cfg.out_dir + "/curve.csv";
  }
  log.save_csv(out_path);
  std::cout << "wrote " << out_path << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sparse binary signal recovery from one-bit observations: trainable"
      " recovery nets, majority-vote ensembles, and a feasibility solver"};
  app.require_subcommand(1);

  TrainArgs train_args;
  train_args.cfg.n = 64;
  train_args.cfg.m = 32;
  train_args.cfg.k = 3;
  train_args.cfg.alpha = 256;
  train_args.cfg.steps = 5000;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a recovery net or ensemble");
  add_train_options(train_cmd, train_args);

  std::string model_path, obs_path, out_path;
  CLI::App* recover_cmd = app.add_subcommand(
      "recover", "run a trained model on one observation");
  recover_cmd->add_option("--model", model_path, "model or ensemble file")
      ->required();
  recover_cmd
      ->add_option("--observation", obs_path, "observation text file (+-1)")
      ->required();
  recover_cmd->add_option("--out", out_path, "write estimate here instead of"
                          " stdout");

  std::string oracle_matrix, oracle_obs, oracle_out;
  std::size_t oracle_k = 0;
  std::string oracle_method = "bnb";
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "feasibility-based recovery from a matrix and observation");
  oracle_cmd->add_option("--matrix", oracle_matrix, "matrix text file")
      ->required();
  oracle_cmd->add_option("--observation", oracle_obs, "observation text file")
      ->required();
  oracle_cmd->add_option("--k", oracle_k, "number of ones")->required();
  oracle_cmd->add_option("--method", oracle_method, "bnb or exhaustive")
      ->capture_default_str();
  oracle_cmd->add_option("--out", oracle_out, "write result here instead of"
                         " stdout");

  ConfigArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand(
      "benchmark", "train a sweep and measure recovery rates and timing");
  add_config_options(bench_cmd, bench_args);

  ConfigArgs curve_args;
  std::size_t curve_m = 0;
  std::string curve_out;
  CLI::App* curve_cmd = app.add_subcommand(
      "curve", "train one net and log the loss/recovery-rate curve");
  add_config_options(curve_cmd, curve_args);
  curve_cmd->add_option("--m", curve_m,
                        "observation length (default: first sweep point)");
  curve_cmd->add_option("--out", curve_out, "curve CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(train_args, train_cmd);
    if (recover_cmd->parsed())
      return run_recover(model_path, obs_path, out_path);
    if (oracle_cmd->parsed())
      return run_oracle(oracle_matrix, oracle_obs, oracle_k, oracle_method,
                        oracle_out);
    if (bench_cmd->parsed()) return run_benchmark(bench_args);
    if (curve_cmd->parsed()) return run_curve(curve_args, curve_m, curve_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
