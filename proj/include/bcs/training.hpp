#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcs/neuralnet.hpp"
#include "bcs/signal_model.hpp"

namespace bcs {

struct TrainingConfig {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t alpha = 0;
  std::size_t batch = 100;
  std::size_t steps = 0;
  double lambda = 0.95;
  double learning_rate = 0.002;
  std::uint64_t seed = 0;
  std::size_t probe_every = 0;  // 0 disables recovery-rate probes
  std::size_t probe_trials = 200;
};

struct Minibatch {
  std::vector<BinaryObservation> inputs;
  std::vector<SparseSignal> targets;
};

struct Gradients {
  std::vector<double> w_h;
  std::vector<double> b_h;
  std::vector<double> w_o;
  std::vector<double> b_o;
};

// Mean over samples and coordinates of the support cross-entropy plus
// lambda times the output L1 mass:
//   L = -(1/(nT)) sum_t sum_j x_j log y_j + (lambda/(nT)) sum_t sum_j y_j
// Outputs are clamped to [1e-12, 1 - 1e-12] before the log; the clamp does
// not propagate gradient.
double loss(const std::vector<SoftOutput>& outputs,
            const std::vector<SparseSignal>& targets, double lambda,
            std::size_t n);

struct BackpropResult {
  double loss = 0.0;
  Gradients grads;
};

// Loss value and exact gradients for one minibatch.
BackpropResult backprop(const NetParams& p, const Minibatch& batch,
                        double lambda);

struct AdamConfig {
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState(const NetDims& dims, const AdamConfig& cfg);

  void step(NetParams& p, const Gradients& g);
  std::size_t t() const { return t_; }

 private:
  void update(std::vector<double>& param, const std::vector<double>& grad,
              std::vector<double>& m, std::vector<double>& v, double bc1,
              double bc2);

  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<double> m_w_h, v_w_h, m_b_h, v_b_h;
  std::vector<double> m_w_o, v_w_o, m_b_o, v_b_o;
};

struct TrainingLog {
  struct Row {
    std::size_t step = 0;
    std::optional<double> loss;
    std::optional<double> probe_rate;
  };
  std::vector<Row> rows;

  void write_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
};

struct TrainResult {
  NetParams params;
  TrainingLog log;
};

class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Streaming training: every minibatch is freshly sampled, nothing is
// revisited. Throws divergence_error if the loss or a parameter becomes
// non-finite.
TrainResult train(const TrainingConfig& cfg, const SensingMatrix& A);

struct RateEstimate {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

// 95% Wilson score interval for a binomial proportion.
RateEstimate wilson_interval(std::size_t successes, std::size_t trials);

// Fixed set of (signal, observation) pairs; trial t is a pure function of
// (seed, t), so sets regenerate identically.
struct TrialSet {
  std::vector<SparseSignal> signals;
  std::vector<BinaryObservation> observations;

  std::size_t size() const { return signals.size(); }
};

TrialSet make_trial_set(const SensingMatrix& A, std::size_t k,
                        std::size_t count, std::uint64_t seed);

using Recoverer = std::function<BinaryEstimate(const BinaryObservation&)>;
using IndexedRecoverer =
    std::function<BinaryEstimate(const BinaryObservation&, std::size_t)>;

// Fraction of trials whose estimate equals the true signal exactly.
RateEstimate evaluate_on_trials(const IndexedRecoverer& recover,
                                const TrialSet& trials);
RateEstimate evaluate_recovery_rate(const Recoverer& recover,
                                    const SensingMatrix& A, std::size_t k,
                                    std::size_t trials, std::uint64_t seed);

}  // namespace bcs
