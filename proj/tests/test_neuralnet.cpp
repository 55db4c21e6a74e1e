#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bcs/neuralnet.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bcs;
using testutil::rel_close;
using testutil::temp_path;

namespace {

NetParams tiny_net(double w_h, double w_o) {
  NetParams p;
  p.dims = {1, 1, 1};
  p.w_h = {w_h};
  p.b_h = {0.0};
  p.w_o = {w_o};
  p.b_o = {0.0};
  return p;
}

NetParams random_net(std::size_t m, std::size_t n, std::size_t alpha,
                     std::uint64_t seed) {
  auto rng = make_stream(seed);
  return init_params(m, n, alpha, rng);
}

}  // namespace

TEST_CASE("sigmoid fixed points and symmetry") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(rel_close(sigmoid(1.0), 0.7310585786300049, 1e-13));
  CHECK(rel_close(sigmoid(2.0), 0.8807970779778823, 1e-13));
  CHECK(rel_close(sigmoid(-0.5), 0.37754066879814546, 1e-13));
  CHECK(rel_close(sigmoid(0.5), 0.6224593312018546, 1e-13));
  CHECK(rel_close(sigmoid(1.0) + sigmoid(-1.0), 1.0, 1e-13));
}

TEST_CASE("sigmoid saturates strictly inside (0,1)") {
  CHECK(rel_close(sigmoid(-700.0), 9.85967654375977e-305, 1e-13));
  for (double a : {-1e6, -750.0, -36.0, 36.0, 750.0, 1e6}) {
    const double y = sigmoid(a);
    CHECK(y > 0.0);
    CHECK(y < 1.0);
  }
  CHECK(sigmoid(1e9) < 1.0);
  CHECK(sigmoid(-1e9) > 0.0);
  CHECK(sigmoid(std::numeric_limits<double>::max()) < 1.0);
  CHECK(sigmoid(std::numeric_limits<double>::lowest()) > 0.0);
}

TEST_CASE("sigmoid vector overload maps every entry") {
  const std::vector<double> y = sigmoid(std::vector<double>{0.0, 1.0, -1.0});
  CHECK(y[0] == 0.5);
  CHECK(rel_close(y[1], 0.7310585786300049, 1e-13));
  CHECK(rel_close(y[1] + y[2], 1.0, 1e-13));
}

TEST_CASE("forward through a scalar chain") {
  // u = +1, w_h = 2: h = sigmoid(2), then y = sigmoid(h)
  NetParams p = tiny_net(2.0, 1.0);
  SoftOutput y = forward(p, BinaryObservation({1.0}));
  REQUIRE(y.values.size() == 1);
  CHECK(rel_close(y.values[0], 0.7069873680001046, 1e-13));
}

TEST_CASE("zero weights give exactly one half") {
  NetParams p = tiny_net(0.0, 0.0);
  CHECK(forward(p, BinaryObservation({-1.0})).values[0] == 0.5);
}

TEST_CASE("forward output stays strictly inside (0,1) for extreme weights") {
  NetParams p = tiny_net(1e6, -1e8);
  const double y = forward(p, BinaryObservation({1.0})).values[0];
  CHECK(y > 0.0);
  CHECK(y < 1.0);
  p = tiny_net(-1e6, 1e8);
  const double z = forward(p, BinaryObservation({1.0})).values[0];
  CHECK(z > 0.0);
  CHECK(z < 1.0);
}

TEST_CASE("forward validates observation length") {
  NetParams p = random_net(4, 6, 5, 1);
  CHECK_THROWS_AS(forward(p, BinaryObservation({1.0, -1.0})),
                  std::invalid_argument);
}

TEST_CASE("forward op count is alpha times m plus n") {
  NetParams p = random_net(4, 6, 5, 2);
  kernel::OpCount ops;
  forward(p, BinaryObservation({1.0, -1.0, 1.0, 1.0}), &ops);
  CHECK(ops.madds == 5 * (4 + 6));
}

TEST_CASE("round_output rounds half up") {
  SoftOutput y{{0.49999, 0.5, 0.50001, 0.1, 0.9}};
  CHECK(round_output(y).values == std::vector<std::uint8_t>{0, 1, 1, 0, 1});
}

TEST_CASE("init_params shapes, zero biases, determinism") {
  NetParams a = random_net(3, 5, 7, 99);
  CHECK(a.dims == NetDims{3, 5, 7});
  CHECK(a.w_h.size() == 7 * 3);
  CHECK(a.w_o.size() == 5 * 7);
  CHECK(a.b_h == std::vector<double>(7, 0.0));
  CHECK(a.b_o == std::vector<double>(5, 0.0));
  NetParams b = random_net(3, 5, 7, 99);
  CHECK(a == b);
  NetParams c = random_net(3, 5, 7, 100);
  CHECK(a.w_h != c.w_h);
  auto rng = make_stream(1);
  CHECK_THROWS_AS(init_params(0, 5, 7, rng), std::invalid_argument);
}

TEST_CASE("init_params weight variance is near 0.05") {
  // 10^4 weights pooled across both layers
  NetParams p = random_net(50, 50, 100, 7);
  std::vector<double> all = p.w_h;
  all.insert(all.end(), p.w_o.begin(), p.w_o.end());
  REQUIRE(all.size() == 10000);
  double mean = 0.0;
  for (double w : all) mean += w;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (double w : all) var += (w - mean) * (w - mean);
  var /= static_cast<double>(all.size() - 1);
  CHECK(var > 0.045);
  CHECK(var < 0.055);
}

TEST_CASE("model round trip preserves every bit") {
  NetParams p = random_net(6, 9, 11, 5);
  p.seed = 0xDEADBEEFCAFEBABEULL;
  const std::string path = temp_path("model");
  save_model(p, path);
  NetParams q = load_model(path);
  CHECK(p == q);
  const std::string path2 = temp_path("model");
  save_model(q, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("model stream io round trip") {
  NetParams p = random_net(2, 3, 4, 8);
  std::stringstream buf;
  write_model(buf, p);
  CHECK(read_model(buf) == p);
}

TEST_CASE("model load rejects corrupt files") {
  NetParams p = random_net(2, 3, 4, 8);
  std::stringstream buf;
  write_model(buf, p);
  const std::string good = buf.str();

  auto load_bytes = [](std::string bytes) {
    std::istringstream in(std::move(bytes));
    NetParams q = read_model(in);
    in.peek();
    if (!in.eof()) throw std::runtime_error("model file: trailing data");
    return q;
  };

  SUBCASE("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    CHECK_THROWS_WITH(load_bytes(bad), "model file: bad magic");
  }
  SUBCASE("unsupported version") {
    std::string bad = good;
    bad[4] = 9;
    CHECK_THROWS_WITH(load_bytes(bad), "model file: unsupported version 9");
  }
  SUBCASE("zero dimension") {
    std::string bad = good;
    // alpha field sits after magic, version, m, n
    for (int i = 0; i < 4; ++i) bad[16 + i] = 0;
    CHECK_THROWS_WITH(load_bytes(bad), "model file: invalid dimensions");
  }
  SUBCASE("truncated header") {
    CHECK_THROWS_WITH(load_bytes(good.substr(0, 10)),
                      "model file: truncated header");
  }
  SUBCASE("truncated parameters") {
    CHECK_THROWS_WITH(load_bytes(good.substr(0, good.size() - 3)),
                      "model file: truncated parameter block");
  }
  SUBCASE("trailing data") {
    CHECK_THROWS_WITH(load_bytes(good + "x"), "model file: trailing data");
  }
  SUBCASE("non-finite parameter") {
    std::string bad = good;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    // first w_h entry starts right after the 28 byte header
    std::memcpy(bad.data() + 28, &nan, sizeof nan);
    CHECK_THROWS_WITH(load_bytes(bad), "model file: non-finite parameter");
  }
  SUBCASE("empty file") {
    CHECK_THROWS_WITH(load_bytes(""), "model file: bad magic");
  }
}

TEST_CASE("load_model reports missing files") {
  CHECK_THROWS_AS(load_model("/nonexistent/path/model.bin"),
                  std::runtime_error);
}
