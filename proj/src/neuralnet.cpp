#include "bcs/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bcs {

namespace {

constexpr char model_magic[4] = {'B', 'C', 'S', 'N'};
constexpr std::uint32_t model_version = 1;
// Caps header dimensions so corrupt files fail fast instead of allocating.
constexpr std::uint64_t max_dim = 1u << 24;

constexpr double sigmoid_floor = std::numeric_limits<double>::min();
const double sigmoid_ceil = 1.0 - std::numeric_limits<double>::epsilon() / 2;

}  // namespace

double sigmoid(double a) {
  double y;
  if (a >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-a));
  } else {
    const double e = std::exp(a);
    y = e / (1.0 + e);
  }
  return std::clamp(y, sigmoid_floor, sigmoid_ceil);
}

std::vector<double> sigmoid(std::vector<double> a) {
  for (double& v : a) v = sigmoid(v);
  return a;
}

NetParams init_params(std::size_t m, std::size_t n, std::size_t alpha,
                      std::mt19937_64& rng) {
  if (m == 0 || n == 0 || alpha == 0)
    throw std::invalid_argument("init_params: zero dimension");
  NetParams p;
  p.dims = {m, n, alpha};
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.05));
  p.w_h.resize(alpha * m);
  for (double& w : p.w_h) w = gauss(rng);
  p.w_o.resize(n * alpha);
  for (double& w : p.w_o) w = gauss(rng);
  p.b_h.assign(alpha, 0.0);
  p.b_o.assign(n, 0.0);
  return p;
}

SoftOutput forward(const NetParams& p, const BinaryObservation& u,
                   kernel::OpCount* ops) {
  const auto& d = p.dims;
  if (u.size() != d.m)
    throw std::invalid_argument("forward: observation length mismatch");
  std::vector<double> h(d.alpha);
  kernel::matvec(p.w_h.data(), u.data(), p.b_h.data(), h.data(), d.alpha, d.m,
                 ops);
  for (double& v : h) v = sigmoid(v);
  std::vector<double> y(d.n);
  kernel::matvec(p.w_o.data(), h.data(), p.b_o.data(), y.data(), d.n, d.alpha,
                 ops);
  for (double& v : y) v = sigmoid(v);
  return SoftOutput{std::move(y)};
}

BinaryEstimate round_output(const SoftOutput& y) {
  std::vector<std::uint8_t> out(y.values.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = y.values[j] >= 0.5 ? 1 : 0;
  return BinaryEstimate{std::move(out)};
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("model file: truncated header");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("model file: truncated header");
  return v;
}

void read_doubles(std::istream& in, std::vector<double>& v, std::size_t count) {
  v.resize(count);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("model file: truncated parameter block");
  for (double x : v)
    if (!std::isfinite(x))
      throw std::runtime_error("model file: non-finite parameter");
}

}  // namespace

void write_model(std::ostream& out, const NetParams& p) {
  out.write(model_magic, sizeof model_magic);
  write_u32(out, model_version);
  write_u32(out, static_cast<std::uint32_t>(p.dims.m));
  write_u32(out, static_cast<std::uint32_t>(p.dims.n));
  write_u32(out, static_cast<std::uint32_t>(p.dims.alpha));
  write_u64(out, p.seed);
  write_doubles(out, p.w_h);
  write_doubles(out, p.b_h);
  write_doubles(out, p.w_o);
  write_doubles(out, p.b_o);
  if (!out) throw std::runtime_error("model file: write failed");
}

NetParams read_model(std::istream& in) {
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, model_magic, sizeof magic) != 0)
    throw std::runtime_error("model file: bad magic");
  const std::uint32_t version = read_u32(in);
  if (version != model_version) {
    std::ostringstream msg;
    msg << "model file: unsupported version " << version;
    throw std::runtime_error(msg.str());
  }
  NetParams p;
  const std::uint64_t m = read_u32(in);
  const std::uint64_t n = read_u32(in);
  const std::uint64_t alpha = read_u32(in);
  if (m == 0 || n == 0 || alpha == 0 || m > max_dim || n > max_dim ||
      alpha > max_dim)
    throw std::runtime_error("model file: invalid dimensions");
  p.dims = {static_cast<std::size_t>(m), static_cast<std::size_t>(n),
            static_cast<std::size_t>(alpha)};
  p.seed = read_u64(in);
  read_doubles(in, p.w_h, p.dims.alpha * p.dims.m);
  read_doubles(in, p.b_h, p.dims.alpha);
  read_doubles(in, p.w_o, p.dims.n * p.dims.alpha);
  read_doubles(in, p.b_o, p.dims.n);
  return p;
}

void save_model(const NetParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_model(out, p);
}

NetParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  NetParams p = read_model(in);
  in.peek();
  if (!in.eof()) throw std::runtime_error("model file: trailing data");
  return p;
}

}  // namespace bcs
