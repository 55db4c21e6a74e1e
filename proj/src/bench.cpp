#include "bcs/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bcs/optimal_recovery.hpp"

namespace bcs {

namespace {

using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config option " + key + ": bad number '" +
                                value + "'");
  }
  if (pos != value.size() || value[0] == '-')
    throw std::invalid_argument("config option " + key + ": bad number '" +
                                value + "'");
  return static_cast<std::size_t>(v);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config option " + key + ": bad number '" +
                                value + "'");
  }
  if (pos != value.size() || !std::isfinite(v))
    throw std::invalid_argument("config option " + key + ": bad number '" +
                                value + "'");
  return v;
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ','))
    out.push_back(parse_size(key, trim(item)));
  if (out.empty())
    throw std::invalid_argument("config option " + key + ": empty list");
  return out;
}

std::string format_size_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.m_list.empty())
    throw std::invalid_argument("config: m_list must not be empty");
  if (cfg.s_list.empty())
    throw std::invalid_argument("config: s_list must not be empty");
  for (std::size_t s : cfg.s_list)
    if (s == 0) throw std::invalid_argument("config: s_list entries >= 1");
  for (std::size_t m : cfg.m_list)
    if (m == 0) throw std::invalid_argument("config: m_list entries >= 1");
  if (cfg.trials == 0)
    throw std::invalid_argument("config: trials must be >= 1");
}

TrainingConfig training_config(const ExperimentConfig& cfg, std::size_t m,
                               std::uint64_t seed) {
  TrainingConfig tc;
  tc.n = cfg.n;
  tc.m = m;
  tc.k = cfg.k;
  tc.alpha = cfg.alpha;
  tc.batch = cfg.batch;
  tc.steps = cfg.steps;
  tc.lambda = cfg.lambda;
  tc.learning_rate = cfg.learning_rate;
  tc.seed = seed;
  tc.probe_trials = cfg.probe_trials;
  return tc;
}

}  // namespace

ExperimentConfig desk_preset() {
  ExperimentConfig cfg;
  cfg.n = 64;
  cfg.k = 3;
  cfg.alpha = 256;
  cfg.steps = 5000;
  cfg.m_list = {16, 24, 32, 40, 48, 56};
  cfg.trials = 500;
  return cfg;
}

ExperimentConfig paper_k6_preset() { return ExperimentConfig{}; }

std::optional<ExperimentConfig> preset_by_name(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "paper-k6") return paper_k6_preset();
  return std::nullopt;
}

void apply_option(ExperimentConfig& cfg, const std::string& key,
                  const std::string& value) {
  if (key == "n") cfg.n = parse_size(key, value);
  else if (key == "k") cfg.k = parse_size(key, value);
  else if (key == "alpha") cfg.alpha = parse_size(key, value);
  else if (key == "batch") cfg.batch = parse_size(key, value);
  else if (key == "steps") cfg.steps = parse_size(key, value);
  else if (key == "lambda") cfg.lambda = parse_double(key, value);
  else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
  else if (key == "m_list") cfg.m_list = parse_size_list(key, value);
  else if (key == "s_list") cfg.s_list = parse_size_list(key, value);
  else if (key == "trials") cfg.trials = parse_size(key, value);
  else if (key == "seed") cfg.seed = parse_size(key, value);
  else if (key == "probe_every") cfg.probe_every = parse_size(key, value);
  else if (key == "probe_trials") cfg.probe_trials = parse_size(key, value);
  else if (key == "timing_instances")
    cfg.timing_instances = parse_size(key, value);
  else if (key == "out_dir") cfg.out_dir = value;
  else throw std::invalid_argument("unknown config option: " + key);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    apply_option(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << "n=" << cfg.n << '\n'
      << "k=" << cfg.k << '\n'
      << "alpha=" << cfg.alpha << '\n'
      << "batch=" << cfg.batch << '\n'
      << "steps=" << cfg.steps << '\n'
      << "lambda=" << format_double(cfg.lambda, "%.12g") << '\n'
      << "learning_rate=" << format_double(cfg.learning_rate, "%.12g") << '\n'
      << "m_list=" << format_size_list(cfg.m_list) << '\n'
      << "s_list=" << format_size_list(cfg.s_list) << '\n'
      << "trials=" << cfg.trials << '\n'
      << "seed=" << cfg.seed << '\n'
      << "probe_every=" << cfg.probe_every << '\n'
      << "probe_trials=" << cfg.probe_trials << '\n'
      << "timing_instances=" << cfg.timing_instances << '\n'
      << "out_dir=" << cfg.out_dir << '\n';
}

std::uint64_t sweep_cell_seed(const ExperimentConfig& cfg, std::size_t m) {
  return derive_seed(derive_seed(cfg.seed, seed_tag::cell), m);
}

SensingMatrix sweep_cell_matrix(const ExperimentConfig& cfg, std::size_t m) {
  auto rng =
      make_stream(derive_seed(sweep_cell_seed(cfg, m), seed_tag::matrix));
  return sample_sensing_matrix(m, cfg.n, rng);
}

SweepContext SweepContext::build(const ExperimentConfig& cfg,
                                 std::ostream* progress) {
  validate(cfg);
  SweepContext ctx(cfg);
  const std::size_t s_max =
      *std::max_element(cfg.s_list.begin(), cfg.s_list.end());
  for (std::size_t m : cfg.m_list) {
    const std::uint64_t cell_seed = sweep_cell_seed(cfg, m);
    SensingMatrix A = sweep_cell_matrix(cfg, m);
    Cell cell{m, cell_seed, std::move(A), {}, false, ""};
    const auto t0 = steady::now();
    try {
      EnsembleModel em =
          train_ensemble(training_config(cfg, m, cell_seed), s_max, cell.A);
      cell.components = em.components();
    } catch (const divergence_error& e) {
      cell.diverged = true;
      cell.note = e.what();
    }
    if (progress) {
      *progress << "m=" << m << ": trained " << s_max << " nets in "
                << format_double(seconds_since(t0), "%.1f") << "s";
      if (cell.diverged) *progress << " (diverged: " << cell.note << ")";
      *progress << std::endl;
    }
    ctx.cells_.push_back(std::move(cell));
  }
  return ctx;
}

namespace {

BinaryEstimate bnb_estimate(const SensingMatrix& A, const BinaryObservation& u,
                            std::size_t k) {
  RecoveryOutcome out = recover_bnb(A, u, k);
  BinaryEstimate est;
  if (out.status == RecoveryStatus::found)
    est.values = std::move(out.z);
  else
    est.values.assign(A.cols(), 0);
  return est;
}

}  // namespace

SweepResult SweepContext::rates() const {
  SweepResult result;
  for (const Cell& cell : cells_) {
    TrialSet trials =
        make_trial_set(cell.A, cfg_.k, cfg_.trials,
                       derive_seed(cell.cell_seed, seed_tag::eval));
    for (std::size_t S : cfg_.s_list) {
      SweepRow row;
      row.m = cell.m;
      row.method = "nn_s" + std::to_string(S);
      row.trials = cfg_.trials;
      if (cell.diverged) {
        row.status = "diverged";
      } else {
        EnsembleModel prefix(
            std::vector<NetParams>(cell.components.begin(),
                                   cell.components.begin() +
                                       static_cast<std::ptrdiff_t>(S)),
            static_cast<double>(S) / 2.0, cell.cell_seed);
        double secs = 0.0;
        RateEstimate est = evaluate_on_trials(
            [&prefix, &secs](const BinaryObservation& u, std::size_t) {
              const auto t0 = steady::now();
              BinaryEstimate e = ensemble_predict(prefix, u);
              const double dt = seconds_since(t0);
#pragma omp atomic
              secs += dt;
              return e;
            },
            trials);
        row.successes = est.successes;
        row.rate = est.rate;
        row.wilson_low = est.wilson_low;
        row.wilson_high = est.wilson_high;
        row.mean_recover_seconds = secs / static_cast<double>(cfg_.trials);
      }
      result.rows.push_back(std::move(row));
    }
    SweepRow row;
    row.m = cell.m;
    row.method = "ip_bnb";
    row.trials = cfg_.trials;
    double secs = 0.0;
    const SensingMatrix& A = cell.A;
    const std::size_t k = cfg_.k;
    RateEstimate est = evaluate_on_trials(
        [&A, &secs, k](const BinaryObservation& u, std::size_t) {
          const auto t0 = steady::now();
          BinaryEstimate e = bnb_estimate(A, u, k);
          const double dt = seconds_since(t0);
#pragma omp atomic
          secs += dt;
          return e;
        },
        trials);
    row.successes = est.successes;
    row.rate = est.rate;
    row.wilson_low = est.wilson_low;
    row.wilson_high = est.wilson_high;
    row.mean_recover_seconds = secs / static_cast<double>(cfg_.trials);
    result.rows.push_back(std::move(row));
  }
  return result;
}

TimingResult SweepContext::timing(std::size_t instances) const {
  if (instances == 0)
    throw std::invalid_argument("timing: instances must be >= 1");
  TimingResult result;
  for (const Cell& cell : cells_) {
    TrialSet set = make_trial_set(cell.A, cfg_.k, instances,
                                  derive_seed(cell.cell_seed, seed_tag::timing));
    std::size_t sink = 0;
    for (std::size_t S : cfg_.s_list) {
      if (cell.diverged) continue;
      EnsembleModel prefix(
          std::vector<NetParams>(cell.components.begin(),
                                 cell.components.begin() +
                                     static_cast<std::ptrdiff_t>(S)),
          static_cast<double>(S) / 2.0, cell.cell_seed);
      const auto t0 = steady::now();
      for (std::size_t t = 0; t < instances; ++t)
        sink += ensemble_predict(prefix, set.observations[t]).values[0];
      const double total = seconds_since(t0);
      result.rows.push_back({cell.m, "nn_s" + std::to_string(S), instances,
                             total, total / static_cast<double>(instances)});
    }
    {
      const auto t0 = steady::now();
      for (std::size_t t = 0; t < instances; ++t)
        sink += bnb_estimate(cell.A, set.observations[t], cfg_.k).values[0];
      const double total = seconds_since(t0);
      result.rows.push_back({cell.m, "ip_bnb", instances, total,
                             total / static_cast<double>(instances)});
    }
    if (sink == static_cast<std::size_t>(-1))
      throw std::logic_error("timing: impossible sink value");
  }
  return result;
}

void SweepResult::write_csv(std::ostream& out) const {
  out << "m,method,trials,successes,rate,wilson_low,wilson_high,"
         "mean_recover_seconds,status\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.method << ',' << r.trials << ',';
    if (r.status == "ok") {
      out << r.successes << ',' << format_double(r.rate, "%.6f") << ','
          << format_double(r.wilson_low, "%.6f") << ','
          << format_double(r.wilson_high, "%.6f") << ','
          << format_double(r.mean_recover_seconds, "%.9f") << ',';
    } else {
      out << ",,,,,";
    }
    out << r.status << '\n';
  }
}

void SweepResult::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void TimingResult::write_csv(std::ostream& out) const {
  out << "m,method,instances,total_seconds,seconds_per_instance\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.method << ',' << r.instances << ','
        << format_double(r.total_seconds, "%.9f") << ','
        << format_double(r.seconds_per_instance, "%.9f") << '\n';
  }
}

void TimingResult::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  return SweepContext::build(cfg).rates();
}

TrainingLog run_training_curve(const ExperimentConfig& cfg, std::size_t m) {
  validate(cfg);
  SensingMatrix A = sweep_cell_matrix(cfg, m);
  TrainingConfig tc = training_config(cfg, m, sweep_cell_seed(cfg, m));
  tc.probe_every = cfg.probe_every == 0 ? 500 : cfg.probe_every;
  return train(tc, A).log;
}

TimingResult run_timing(const ExperimentConfig& cfg) {
  if (cfg.timing_instances == 0)
    throw std::invalid_argument("config: timing_instances must be >= 1");
  return SweepContext::build(cfg).timing(cfg.timing_instances);
}

}  // namespace bcs
