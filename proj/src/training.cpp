#include "bcs/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bcs {

namespace {

constexpr double loss_clamp = 1e-12;

double clamp_output(double y) {
  return std::clamp(y, loss_clamp, 1.0 - loss_clamp);
}

// Shared by loss() and backprop() so both report the same value for the
// same batch.
double combine_loss(double ce, double l1, double lambda, std::size_t n,
                    std::size_t batch) {
  return (lambda * l1 - ce) / (static_cast<double>(n) *
                               static_cast<double>(batch));
}

}  // namespace

double loss(const std::vector<SoftOutput>& outputs,
            const std::vector<SparseSignal>& targets, double lambda,
            std::size_t n) {
  if (outputs.empty() || outputs.size() != targets.size())
    throw std::invalid_argument("loss: batch size mismatch");
  double ce = 0.0;
  double l1 = 0.0;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    const auto& y = outputs[t].values;
    const auto& x = targets[t];
    if (y.size() != n || x.n() != n)
      throw std::invalid_argument("loss: output length mismatch");
    const auto& support = x.support();
    std::size_t ptr = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double yc = clamp_output(y[j]);
      if (ptr < support.size() &&
          static_cast<std::size_t>(support[ptr]) == j) {
        ce += std::log(yc);
        ++ptr;
      }
      l1 += yc;
    }
  }
  return combine_loss(ce, l1, lambda, n, outputs.size());
}

BackpropResult backprop(const NetParams& p, const Minibatch& batch,
                        double lambda) {
  const auto& d = p.dims;
  const std::size_t T = batch.inputs.size();
  if (T == 0 || batch.targets.size() != T)
    throw std::invalid_argument("backprop: batch size mismatch");
  for (std::size_t t = 0; t < T; ++t) {
    if (batch.inputs[t].size() != d.m)
      throw std::invalid_argument("backprop: observation length mismatch");
    if (batch.targets[t].n() != d.n)
      throw std::invalid_argument("backprop: target length mismatch");
  }

  // Samples are columns; Ut keeps each sample's observation contiguous.
  std::vector<double> Ut(T * d.m);
  for (std::size_t t = 0; t < T; ++t)
    std::copy(batch.inputs[t].data(), batch.inputs[t].data() + d.m,
              Ut.begin() + static_cast<std::ptrdiff_t>(t * d.m));

  std::vector<double> H(d.alpha * T);
  kernel::gemm_nt(p.w_h.data(), Ut.data(), H.data(), d.alpha, d.m, T);
  kernel::add_col_bias(H.data(), p.b_h.data(), d.alpha, T);
  for (double& v : H) v = sigmoid(v);

  std::vector<double> Y(d.n * T);
  kernel::gemm_nn(p.w_o.data(), H.data(), Y.data(), d.n, d.alpha, T);
  kernel::add_col_bias(Y.data(), p.b_o.data(), d.n, T);
  for (double& v : Y) v = sigmoid(v);

  const double denom = static_cast<double>(d.n) * static_cast<double>(T);
  std::vector<double> G2(d.n * T);
  double ce = 0.0;
  double l1 = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& support = batch.targets[t].support();
    std::size_t ptr = 0;
    for (std::size_t j = 0; j < d.n; ++j) {
      const double y = Y[j * T + t];
      const double yc = clamp_output(y);
      double xj = 0.0;
      if (ptr < support.size() &&
          static_cast<std::size_t>(support[ptr]) == j) {
        xj = 1.0;
        ce += std::log(yc);
        ++ptr;
      }
      l1 += yc;
      G2[j * T + t] = (lambda - xj / yc) / denom * (y * (1.0 - y));
    }
  }

  BackpropResult res;
  res.loss = combine_loss(ce, l1, lambda, d.n, T);

  res.grads.w_o.resize(d.n * d.alpha);
  kernel::gemm_nt(G2.data(), H.data(), res.grads.w_o.data(), d.n, T, d.alpha);
  res.grads.b_o.resize(d.n);
  kernel::row_sums(G2.data(), res.grads.b_o.data(), d.n, T);

  std::vector<double> G1(d.alpha * T);
  kernel::gemm_tn(p.w_o.data(), G2.data(), G1.data(), d.alpha, d.n, T);
  for (std::size_t i = 0; i < G1.size(); ++i) {
    const double h = H[i];
    G1[i] *= h * (1.0 - h);
  }

  res.grads.w_h.resize(d.alpha * d.m);
  kernel::gemm_nn(G1.data(), Ut.data(), res.grads.w_h.data(), d.alpha, T, d.m);
  res.grads.b_h.resize(d.alpha);
  kernel::row_sums(G1.data(), res.grads.b_h.data(), d.alpha, T);
  return res;
}

AdamState::AdamState(const NetDims& dims, const AdamConfig& cfg) : cfg_(cfg) {
  if (cfg_.learning_rate <= 0.0)
    throw std::invalid_argument("AdamState: learning rate must be positive");
  m_w_h.assign(dims.alpha * dims.m, 0.0);
  v_w_h.assign(dims.alpha * dims.m, 0.0);
  m_b_h.assign(dims.alpha, 0.0);
  v_b_h.assign(dims.alpha, 0.0);
  m_w_o.assign(dims.n * dims.alpha, 0.0);
  v_w_o.assign(dims.n * dims.alpha, 0.0);
  m_b_o.assign(dims.n, 0.0);
  v_b_o.assign(dims.n, 0.0);
}

void AdamState::update(std::vector<double>& param,
                       const std::vector<double>& grad, std::vector<double>& m,
                       std::vector<double>& v, double bc1, double bc2) {
  if (param.size() != grad.size() || param.size() != m.size())
    throw std::invalid_argument("AdamState: gradient shape mismatch");
  const double lr = cfg_.learning_rate;
  const double eps = cfg_.epsilon;
#pragma omp parallel for schedule(static) if (param.size() >= kernel::parallel_grain)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(param.size()); ++i) {
    const double g = grad[static_cast<std::size_t>(i)];
    double& mi = m[static_cast<std::size_t>(i)];
    double& vi = v[static_cast<std::size_t>(i)];
    mi = cfg_.beta1 * mi + (1.0 - cfg_.beta1) * g;
    vi = cfg_.beta2 * vi + (1.0 - cfg_.beta2) * g * g;
    const double mhat = mi / bc1;
    const double vhat = vi / bc2;
    param[static_cast<std::size_t>(i)] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void AdamState::step(NetParams& p, const Gradients& g) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  update(p.w_h, g.w_h, m_w_h, v_w_h, bc1, bc2);
  update(p.b_h, g.b_h, m_b_h, v_b_h, bc1, bc2);
  update(p.w_o, g.w_o, m_w_o, v_w_o, bc1, bc2);
  update(p.b_o, g.b_o, m_b_o, v_b_o, bc1, bc2);
}

namespace {

void write_csv_double(std::string& line, double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  line += buf;
}

}  // namespace

void TrainingLog::write_csv(std::ostream& out) const {
  bool any_probe = false;
  for (const auto& r : rows) any_probe |= r.probe_rate.has_value();
  out << (any_probe ? "step,loss,probe_recovery_rate\n" : "step,loss\n");
  for (const auto& r : rows) {
    std::string line = std::to_string(r.step);
    line += ',';
    if (r.loss) write_csv_double(line, *r.loss, "%.12g");
    if (any_probe) {
      line += ',';
      if (r.probe_rate) write_csv_double(line, *r.probe_rate, "%.6f");
    }
    line += '\n';
    out << line;
  }
}

void TrainingLog::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

TrainResult train(const TrainingConfig& cfg, const SensingMatrix& A) {
  if (cfg.steps == 0) throw std::invalid_argument("train: steps must be >= 1");
  if (cfg.batch == 0) throw std::invalid_argument("train: batch must be >= 1");
  if (cfg.lambda < 0.0)
    throw std::invalid_argument("train: lambda must be >= 0");
  if (cfg.k == 0 || cfg.k >= cfg.n)
    throw std::invalid_argument("train: require 1 <= k < n");
  if (A.rows() != cfg.m || A.cols() != cfg.n)
    throw std::invalid_argument("train: sensing matrix shape mismatch");

  auto init_rng = make_stream(derive_seed(cfg.seed, seed_tag::init));
  NetParams params = init_params(cfg.m, cfg.n, cfg.alpha, init_rng);
  params.seed = cfg.seed;

  AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  AdamState adam(params.dims, adam_cfg);

  TrialSet probe_set;
  if (cfg.probe_every > 0)
    probe_set = make_trial_set(A, cfg.k, cfg.probe_trials,
                               derive_seed(cfg.seed, seed_tag::probe));
  auto probe_rate = [&](const NetParams& p) {
    auto est = evaluate_on_trials(
        [&p](const BinaryObservation& u, std::size_t) {
          return round_output(forward(p, u));
        },
        probe_set);
    return est.rate;
  };

  TrainResult res;
  if (cfg.probe_every > 0)
    res.log.rows.push_back({0, std::nullopt, probe_rate(params)});

  auto data_rng = make_stream(derive_seed(cfg.seed, seed_tag::data));
  Minibatch batch;
  for (std::size_t s = 1; s <= cfg.steps; ++s) {
    batch.inputs.clear();
    batch.targets.clear();
    for (std::size_t t = 0; t < cfg.batch; ++t) {
      SparseSignal x = sample_sparse_signal(cfg.n, cfg.k, data_rng);
      batch.inputs.push_back(observe(A, x));
      batch.targets.push_back(std::move(x));
    }
    BackpropResult bp = backprop(params, batch, cfg.lambda);
    if (!std::isfinite(bp.loss)) {
      throw divergence_error("training diverged: non-finite loss at step " +
                             std::to_string(s));
    }
    adam.step(params, bp.grads);

    TrainingLog::Row row;
    row.step = s;
    row.loss = bp.loss;
    if (cfg.probe_every > 0 &&
        (s % cfg.probe_every == 0 || s == cfg.steps))
      row.probe_rate = probe_rate(params);
    res.log.rows.push_back(row);
  }

  for (const auto* block : {&params.w_h, &params.b_h, &params.w_o, &params.b_o})
    for (double v : *block)
      if (!std::isfinite(v))
        throw divergence_error("training diverged: non-finite parameter");

  res.params = std::move(params);
  return res;
}

RateEstimate wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0)
    throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes > trials)
    throw std::invalid_argument("wilson_interval: successes > trials");
  constexpr double z = 1.959963984540054;
  const double nd = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (phat + z2 / (2.0 * nd)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nd + z2 / (4.0 * nd * nd)) / denom;
  RateEstimate est;
  est.successes = successes;
  est.trials = trials;
  est.rate = phat;
  // At phat = 0 the lower endpoint is exactly 0 and at phat = 1 the upper
  // is exactly 1; the closed form cancels only up to rounding, so pin them.
  est.wilson_low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  est.wilson_high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return est;
}

TrialSet make_trial_set(const SensingMatrix& A, std::size_t k,
                        std::size_t count, std::uint64_t seed) {
  if (count == 0)
    throw std::invalid_argument("make_trial_set: count must be >= 1");
  TrialSet set;
  set.signals.reserve(count);
  set.observations.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    auto rng = make_stream(derive_seed(seed, t));
    SparseSignal x = sample_sparse_signal(A.cols(), k, rng);
    set.observations.push_back(observe(A, x));
    set.signals.push_back(std::move(x));
  }
  return set;
}

RateEstimate evaluate_on_trials(const IndexedRecoverer& recover,
                                const TrialSet& trials) {
  const std::size_t count = trials.size();
  if (count == 0 || trials.observations.size() != count)
    throw std::invalid_argument("evaluate_on_trials: empty or ragged trials");
  std::size_t successes = 0;
  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static) reduction(+ : successes)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(count); ++t) {
    try {
      const auto ti = static_cast<std::size_t>(t);
      BinaryEstimate est = recover(trials.observations[ti], ti);
      const SparseSignal& x = trials.signals[ti];
      if (est.values.size() != x.n())
        throw std::invalid_argument(
            "evaluate_on_trials: estimate length mismatch");
      if (est.values == x.values()) successes += 1;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return wilson_interval(successes, count);
}

RateEstimate evaluate_recovery_rate(const Recoverer& recover,
                                    const SensingMatrix& A, std::size_t k,
                                    std::size_t trials, std::uint64_t seed) {
  TrialSet set = make_trial_set(A, k, trials, seed);
  return evaluate_on_trials(
      [&recover](const BinaryObservation& u, std::size_t) {
        return recover(u);
      },
      set);
}

}  // namespace bcs
