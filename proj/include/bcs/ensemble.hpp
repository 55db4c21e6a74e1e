#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bcs/neuralnet.hpp"
#include "bcs/training.hpp"

namespace bcs {

// A bag of independently trained nets with identical shapes plus a voting
// threshold tau.
class EnsembleModel {
 public:
  EnsembleModel(std::vector<NetParams> components, double tau,
                std::uint64_t seed = 0);

  std::size_t size() const { return components_.size(); }
  const NetParams& component(std::size_t s) const { return components_[s]; }
  const std::vector<NetParams>& components() const { return components_; }
  double tau() const { return tau_; }
  std::uint64_t seed() const { return seed_; }
  const NetDims& dims() const { return components_.front().dims; }

 private:
  std::vector<NetParams> components_;
  double tau_;
  std::uint64_t seed_;
};

// 0 for a <= tau, 1 otherwise.
int threshold(double a, double tau);

// Sums the component soft outputs coordinatewise and thresholds at tau.
BinaryEstimate ensemble_predict(const EnsembleModel& model,
                                const BinaryObservation& u,
                                kernel::OpCount* ops = nullptr);

// Trains S components with seeds derived from cfg.seed and component index;
// component s comes out identical no matter what S is. tau defaults to S/2.
EnsembleModel train_ensemble(const TrainingConfig& cfg, std::size_t S,
                             const SensingMatrix& A);

std::uint64_t component_seed(std::uint64_t master, std::size_t index);

void save_ensemble(const EnsembleModel& model, const std::string& path);
EnsembleModel load_ensemble(const std::string& path);

}  // namespace bcs
