#include "bcs/ensemble.hpp"

#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bcs {

namespace {

constexpr char ensemble_magic[4] = {'B', 'C', 'S', 'E'};
constexpr std::uint32_t ensemble_version = 1;
constexpr std::uint32_t max_components = 1u << 20;

}  // namespace

EnsembleModel::EnsembleModel(std::vector<NetParams> components, double tau,
                             std::uint64_t seed)
    : components_(std::move(components)), tau_(tau), seed_(seed) {
  if (components_.empty())
    throw std::invalid_argument("EnsembleModel: need at least one component");
  const NetDims& d = components_.front().dims;
  for (const auto& c : components_)
    if (!(c.dims == d))
      throw std::invalid_argument("EnsembleModel: component shape mismatch");
  if (!std::isfinite(tau_) || tau_ <= 0.0 ||
      tau_ >= static_cast<double>(components_.size()))
    throw std::invalid_argument("EnsembleModel: tau must lie in (0, S)");
}

int threshold(double a, double tau) { return a <= tau ? 0 : 1; }

BinaryEstimate ensemble_predict(const EnsembleModel& model,
                                const BinaryObservation& u,
                                kernel::OpCount* ops) {
  const NetDims& d = model.dims();
  if (u.size() != d.m)
    throw std::invalid_argument(
        "ensemble_predict: observation length mismatch");
  std::vector<double> sum(d.n, 0.0);
  for (std::size_t s = 0; s < model.size(); ++s) {
    SoftOutput y = forward(model.component(s), u, ops);
    for (std::size_t j = 0; j < d.n; ++j) sum[j] += y.values[j];
  }
  std::vector<std::uint8_t> out(d.n);
  for (std::size_t j = 0; j < d.n; ++j)
    out[j] = static_cast<std::uint8_t>(threshold(sum[j], model.tau()));
  return BinaryEstimate{std::move(out)};
}

std::uint64_t component_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(derive_seed(master, seed_tag::component), index);
}

EnsembleModel train_ensemble(const TrainingConfig& cfg, std::size_t S,
                             const SensingMatrix& A) {
  if (S == 0)
    throw std::invalid_argument("train_ensemble: need at least one component");
  std::vector<NetParams> comps(S);
  std::vector<std::exception_ptr> errors(S);
#pragma omp parallel for schedule(static) if (S > 1)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(S); ++s) {
    const auto si = static_cast<std::size_t>(s);
    try {
      TrainingConfig c = cfg;
      c.seed = component_seed(cfg.seed, si);
      c.probe_every = 0;
      comps[si] = train(c, A).params;
    } catch (...) {
      errors[si] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return EnsembleModel(std::move(comps), static_cast<double>(S) / 2.0,
                       cfg.seed);
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("ensemble file: truncated header");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("ensemble file: truncated header");
  return v;
}

double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("ensemble file: truncated header");
  return v;
}

}  // namespace

void save_ensemble(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(ensemble_magic, sizeof ensemble_magic);
  write_u32(out, ensemble_version);
  write_u32(out, static_cast<std::uint32_t>(model.size()));
  write_f64(out, model.tau());
  write_u64(out, model.seed());
  for (std::size_t s = 0; s < model.size(); ++s)
    write_model(out, model.component(s));
  if (!out) throw std::runtime_error("ensemble file: write failed");
}

EnsembleModel load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, ensemble_magic, sizeof magic) != 0)
    throw std::runtime_error("ensemble file: bad magic");
  const std::uint32_t version = read_u32(in);
  if (version != ensemble_version) {
    std::ostringstream msg;
    msg << "ensemble file: unsupported version " << version;
    throw std::runtime_error(msg.str());
  }
  const std::uint32_t S = read_u32(in);
  if (S == 0 || S > max_components)
    throw std::runtime_error("ensemble file: invalid component count");
  const double tau = read_f64(in);
  const std::uint64_t seed = read_u64(in);
  std::vector<NetParams> comps;
  comps.reserve(S);
  for (std::uint32_t s = 0; s < S; ++s) comps.push_back(read_model(in));
  in.peek();
  if (!in.eof()) throw std::runtime_error("ensemble file: trailing data");
  return EnsembleModel(std::move(comps), tau, seed);
}

}  // namespace bcs
