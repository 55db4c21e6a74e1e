#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bcs/ensemble.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bcs;
using testutil::temp_path;

namespace {

NetParams random_net(std::size_t m, std::size_t n, std::size_t alpha,
                     std::uint64_t seed) {
  auto rng = make_stream(seed);
  return init_params(m, n, alpha, rng);
}

// Net whose output j is sigmoid(logit[j]) regardless of the observation:
// hidden weights are zero, so h = 0.5 everywhere, and the output bias does
// the work.
NetParams constant_net(std::size_t m, const std::vector<double>& logits) {
  NetParams p;
  p.dims = {m, logits.size(), 1};
  p.w_h.assign(1 * m, 0.0);
  p.b_h.assign(1, 0.0);
  p.w_o.assign(logits.size(), 0.0);
  p.b_o = logits;
  return p;
}

}  // namespace

TEST_CASE("threshold is zero at and below tau") {
  CHECK(threshold(1.5, 1.5) == 0);
  CHECK(threshold(1.4999, 1.5) == 0);
  CHECK(threshold(0.0, 1.5) == 0);
  CHECK(threshold(1.5001, 1.5) == 1);
  CHECK(threshold(2.0, 1.5) == 1);
  CHECK(threshold(-1.0, 0.5) == 0);
}

TEST_CASE("ensemble model validates its components") {
  std::vector<NetParams> comps = {random_net(3, 4, 5, 1),
                                  random_net(3, 4, 5, 2)};
  EnsembleModel ok(comps, 1.0, 9);
  CHECK(ok.size() == 2);
  CHECK(ok.tau() == 1.0);
  CHECK(ok.seed() == 9);
  CHECK(ok.dims() == NetDims{3, 4, 5});

  CHECK_THROWS_AS(EnsembleModel({}, 0.5), std::invalid_argument);
  std::vector<NetParams> ragged = {random_net(3, 4, 5, 1),
                                   random_net(3, 4, 6, 2)};
  CHECK_THROWS_AS(EnsembleModel(ragged, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleModel(comps, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleModel(comps, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleModel(comps, -0.5), std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(EnsembleModel(comps, nan), std::invalid_argument);
}

TEST_CASE("ensemble vote sums soft outputs against tau") {
  // per-coordinate outputs: sigmoid(log 9) = 0.9 and sigmoid(log(2/3)) = 0.4
  const double strong = std::log(9.0);
  const double weak = std::log(2.0 / 3.0);
  std::vector<NetParams> comps = {constant_net(2, {strong, weak}),
                                  constant_net(2, {strong, weak}),
                                  constant_net(2, {strong, weak})};
  EnsembleModel model(comps, 1.5, 0);
  // sums are 2.7 and 1.2 against tau = 1.5
  BinaryEstimate est = ensemble_predict(model, BinaryObservation({1.0, -1.0}));
  CHECK(est.values == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("one dissenting strong vote cannot flip a majority") {
  const double strong = std::log(9.0);
  std::vector<NetParams> comps = {constant_net(1, {strong}),
                                  constant_net(1, {-strong}),
                                  constant_net(1, {-strong})};
  // sum = 0.9 + 0.1 + 0.1 = 1.1 <= 1.5
  EnsembleModel model(comps, 1.5, 0);
  CHECK(ensemble_predict(model, BinaryObservation({1.0})).values ==
        std::vector<std::uint8_t>{0});
}

TEST_CASE("single component ensemble with tau one half matches rounding") {
  NetParams p = random_net(4, 6, 8, 3);
  EnsembleModel model({p}, 0.5, 0);
  auto rng = make_stream(17);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> u(4);
    for (double& v : u) v = rng() % 2 ? 1.0 : -1.0;
    BinaryObservation obs(u);
    CHECK(ensemble_predict(model, obs) == round_output(forward(p, obs)));
  }
}

TEST_CASE("duplicating a component S times with scaled tau changes nothing") {
  NetParams p = random_net(4, 6, 8, 4);
  EnsembleModel one({p}, 0.5, 0);
  EnsembleModel three({p, p, p}, 1.5, 0);
  auto rng = make_stream(18);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> u(4);
    for (double& v : u) v = rng() % 2 ? 1.0 : -1.0;
    BinaryObservation obs(u);
    CHECK(ensemble_predict(one, obs) == ensemble_predict(three, obs));
  }
}

TEST_CASE("component order does not change the vote") {
  std::vector<NetParams> comps = {random_net(4, 6, 8, 5),
                                  random_net(4, 6, 8, 6),
                                  random_net(4, 6, 8, 7)};
  EnsembleModel a(comps, 1.5, 0);
  std::swap(comps[0], comps[2]);
  EnsembleModel b(comps, 1.5, 0);
  BinaryObservation obs({1.0, -1.0, 1.0, -1.0});
  CHECK(ensemble_predict(a, obs) == ensemble_predict(b, obs));
}

TEST_CASE("raising tau can only clear bits") {
  std::vector<NetParams> comps = {random_net(4, 6, 8, 5),
                                  random_net(4, 6, 8, 6),
                                  random_net(4, 6, 8, 7)};
  BinaryObservation obs({1.0, 1.0, -1.0, -1.0});
  EnsembleModel low(comps, 0.5, 0);
  EnsembleModel high(comps, 2.5, 0);
  BinaryEstimate a = ensemble_predict(low, obs);
  BinaryEstimate b = ensemble_predict(high, obs);
  for (std::size_t j = 0; j < 6; ++j) CHECK(b.values[j] <= a.values[j]);
}

TEST_CASE("ensemble_predict validates observation length") {
  EnsembleModel model({random_net(3, 4, 5, 8)}, 0.5, 0);
  CHECK_THROWS_AS(ensemble_predict(model, BinaryObservation({1.0})),
                  std::invalid_argument);
}

TEST_CASE("ensemble op count scales with the component count") {
  std::vector<NetParams> comps = {random_net(3, 4, 5, 1),
                                  random_net(3, 4, 5, 2),
                                  random_net(3, 4, 5, 3)};
  EnsembleModel model(comps, 1.5, 0);
  kernel::OpCount ops;
  ensemble_predict(model, BinaryObservation({1.0, -1.0, 1.0}), &ops);
  CHECK(ops.madds == 3 * 5 * (3 + 4));
}

TEST_CASE("component seeds are distinct and reproducible") {
  CHECK(component_seed(1, 0) == component_seed(1, 0));
  CHECK(component_seed(1, 0) != component_seed(1, 1));
  CHECK(component_seed(1, 0) != component_seed(2, 0));
  // component streams must not collide with the master's other purposes
  CHECK(component_seed(1, 0) != derive_seed(1, seed_tag::init));
}

TEST_CASE("train_ensemble components depend only on their own index") {
  auto rng = make_stream(19);
  SensingMatrix A = sample_sensing_matrix(4, 10, rng);
  TrainingConfig cfg;
  cfg.n = 10;
  cfg.m = 4;
  cfg.k = 2;
  cfg.alpha = 8;
  cfg.batch = 5;
  cfg.steps = 12;
  cfg.seed = 77;

  EnsembleModel two = train_ensemble(cfg, 2, A);
  EnsembleModel three = train_ensemble(cfg, 3, A);
  CHECK(two.size() == 2);
  CHECK(three.size() == 3);
  CHECK(two.tau() == 1.0);
  CHECK(three.tau() == 1.5);
  CHECK(three.seed() == 77);
  // the first two components are bit-identical prefixes
  CHECK(two.component(0) == three.component(0));
  CHECK(two.component(1) == three.component(1));
  CHECK_FALSE(three.component(1) == three.component(2));

  EnsembleModel again = train_ensemble(cfg, 3, A);
  for (std::size_t s = 0; s < 3; ++s)
    CHECK(again.component(s) == three.component(s));

  CHECK_THROWS_AS(train_ensemble(cfg, 0, A), std::invalid_argument);
}

TEST_CASE("ensemble file round trip") {
  std::vector<NetParams> comps = {random_net(3, 4, 5, 21),
                                  random_net(3, 4, 5, 22),
                                  random_net(3, 4, 5, 23)};
  EnsembleModel model(comps, 1.5, 55);
  const std::string path = temp_path("ensemble");
  save_ensemble(model, path);
  EnsembleModel loaded = load_ensemble(path);
  CHECK(loaded.size() == 3);
  CHECK(loaded.tau() == 1.5);
  CHECK(loaded.seed() == 55);
  for (std::size_t s = 0; s < 3; ++s)
    CHECK(loaded.component(s) == model.component(s));
  std::filesystem::remove(path);
}

TEST_CASE("ensemble file rejects corruption") {
  EnsembleModel model({random_net(2, 3, 4, 31)}, 0.5, 1);
  const std::string path = temp_path("ensemble");
  save_ensemble(model, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  in.close();
  const std::string good = buf.str();
  std::filesystem::remove(path);

  auto load_bytes = [&](std::string bytes) {
    const std::string p = temp_path("ensemble_bad");
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    try {
      load_ensemble(p);
    } catch (...) {
      std::filesystem::remove(p);
      throw;
    }
    std::filesystem::remove(p);
  };

  SUBCASE("bad magic") {
    std::string bad = good;
    bad[3] = 'X';
    CHECK_THROWS_WITH(load_bytes(bad), "ensemble file: bad magic");
  }
  SUBCASE("unsupported version") {
    std::string bad = good;
    bad[4] = 2;
    CHECK_THROWS_WITH(load_bytes(bad), "ensemble file: unsupported version 2");
  }
  SUBCASE("zero components") {
    std::string bad = good;
    for (int i = 0; i < 4; ++i) bad[8 + i] = 0;
    CHECK_THROWS_WITH(load_bytes(bad),
                      "ensemble file: invalid component count");
  }
  SUBCASE("tau outside (0, S)") {
    std::string bad = good;
    const double tau = 7.0;
    std::memcpy(bad.data() + 12, &tau, sizeof tau);
    CHECK_THROWS_AS(load_bytes(bad), std::invalid_argument);
  }
  SUBCASE("trailing data") {
    CHECK_THROWS_WITH(load_bytes(good + "z"), "ensemble file: trailing data");
  }
  SUBCASE("truncated component") {
    CHECK_THROWS_WITH(load_bytes(good.substr(0, good.size() - 5)),
                      "model file: truncated parameter block");
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_ensemble("/nonexistent/ensemble.bin"),
                    std::runtime_error);
  }
}
