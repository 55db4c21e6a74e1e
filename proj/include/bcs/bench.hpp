#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bcs/ensemble.hpp"
#include "bcs/signal_model.hpp"
#include "bcs/training.hpp"

namespace bcs {

// Full description of one benchmark run. Defaults are the full-size setup
// (hours of training); the desk preset shrinks it to minutes while keeping
// the same qualitative behaviour.
struct ExperimentConfig {
  std::size_t n = 256;
  std::size_t k = 6;
  std::size_t alpha = 1000;
  std::size_t batch = 100;
  std::size_t steps = 50000;
  double lambda = 0.95;
  double learning_rate = 0.002;
  std::vector<std::size_t> m_list = {60, 90, 120, 140, 180};
  std::vector<std::size_t> s_list = {1, 3, 5};
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t probe_every = 500;
  std::size_t probe_trials = 200;
  std::size_t timing_instances = 1000;
  std::string out_dir = "out";

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

ExperimentConfig desk_preset();
ExperimentConfig paper_k6_preset();
std::optional<ExperimentConfig> preset_by_name(const std::string& name);

// key=value per line; '#' starts a comment; lists are comma-separated.
ExperimentConfig load_config_file(const std::string& path);
void apply_option(ExperimentConfig& cfg, const std::string& key,
                  const std::string& value);
void write_config(std::ostream& out, const ExperimentConfig& cfg);

struct SweepRow {
  std::size_t m = 0;
  std::string method;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double mean_recover_seconds = 0.0;
  std::string status = "ok";
};

struct SweepResult {
  std::vector<SweepRow> rows;

  void write_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
};

struct TimingRow {
  std::size_t m = 0;
  std::string method;
  std::size_t instances = 0;
  double total_seconds = 0.0;
  double seconds_per_instance = 0.0;
};

struct TimingResult {
  std::vector<TimingRow> rows;

  void write_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
};

// Trains the nets for every m in the sweep once and serves both the
// recovery-rate and the timing measurements from the shared models.
class SweepContext {
 public:
  struct Cell {
    std::size_t m = 0;
    std::uint64_t cell_seed = 0;
    SensingMatrix A;
    std::vector<NetParams> components;  // max(s_list) of them when trained
    bool diverged = false;
    std::string note;
  };

  // progress, when given, receives one line per trained sweep cell.
  static SweepContext build(const ExperimentConfig& cfg,
                            std::ostream* progress = nullptr);

  const ExperimentConfig& config() const { return cfg_; }
  const std::vector<Cell>& cells() const { return cells_; }

  SweepResult rates() const;
  TimingResult timing(std::size_t instances) const;

 private:
  explicit SweepContext(ExperimentConfig cfg) : cfg_(std::move(cfg)) {}

  ExperimentConfig cfg_;
  std::vector<Cell> cells_;
};

std::uint64_t sweep_cell_seed(const ExperimentConfig& cfg, std::size_t m);
SensingMatrix sweep_cell_matrix(const ExperimentConfig& cfg, std::size_t m);

SweepResult run_sweep(const ExperimentConfig& cfg);
TrainingLog run_training_curve(const ExperimentConfig& cfg, std::size_t m);
TimingResult run_timing(const ExperimentConfig& cfg);

}  // namespace bcs
