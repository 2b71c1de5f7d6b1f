#include <cmath>

#include "doctest.h"
#include "dphc/error.hpp"
#include "dphc/transport.hpp"
#include "testing.hpp"

using namespace dphc;
using namespace dphc::testing;

namespace {

using Points = std::vector<std::vector<double>>;

double w1(const Points& a, const Points& b) {
  std::vector<double> fa, fb;
  for (const auto& x : a) fa.insert(fa.end(), x.begin(), x.end());
  for (const auto& x : b) fb.insert(fb.end(), x.begin(), x.end());
  const std::size_t dim = a.front().size();
  return wasserstein_distance({fa, dim}, {fb, dim});
}

Points random_points(Rng& rng, std::size_t count, std::size_t dim) {
  Points out(count, std::vector<double>(dim));
  for (auto& x : out) {
    for (double& v : x) v = uniform(rng, -2.0, 2.0);
  }
  return out;
}

}  // namespace

TEST_CASE("wasserstein examples") {
  CHECK(w1({{0.0}}, {{3.0}}) == 3.0);
  CHECK(w1({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}) == doctest::Approx(1.0).epsilon(1e-15));
  const Points s{{1, 2}, {3, -1}, {0.5, 0.5}};
  CHECK(w1(s, s) == 0.0);
  CHECK(w1(s, {{3, -1}, {0.5, 0.5}, {1, 2}}) == 0.0);
  std::vector<double> empty;
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(wasserstein_distance({empty, 1}, {one, 1}), ValidationError);
}

TEST_CASE("wasserstein matches plan enumeration on small sets") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t na = 1 + pick(rng, 4), nb = 1 + pick(rng, 4), dim = 1 + pick(rng, 3);
    const auto a = random_points(rng, na, dim), b = random_points(rng, nb, dim);
    const double got = w1(a, b);
    CHECK(got == doctest::Approx(oracle_wasserstein(a, b)).epsilon(1e-12));
    CHECK(got == doctest::Approx(w1(b, a)).epsilon(1e-12));
    CHECK(got >= 0.0);
  }
}

TEST_CASE("wasserstein triangle inequality") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_points(rng, 1 + pick(rng, 4), 2);
    const auto b = random_points(rng, 1 + pick(rng, 4), 2);
    const auto c = random_points(rng, 1 + pick(rng, 4), 2);
    CHECK(w1(a, c) <= w1(a, b) + w1(b, c) + 1e-12);
  }
}

TEST_CASE("transport solver matches enumeration with uneven margins") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + pick(rng, 3), cols = 1 + pick(rng, 3);
    std::vector<long long> supply(rows), demand(cols, 0);
    long long total = 0;
    for (auto& s : supply) total += (s = 1 + static_cast<long long>(pick(rng, 3)));
    for (long long t = 0; t < total; ++t) ++demand[pick(rng, cols)];
    std::vector<double> cost(rows * cols);
    for (double& c : cost) c = uniform(rng, 0.0, 5.0);
    const std::vector<std::int64_t> s64(supply.begin(), supply.end()), d64(demand.begin(), demand.end());
    const auto sol = solve_transport(cost, rows, cols, s64, d64);
    CHECK(sol.cost == doctest::Approx(oracle_transport(cost, rows, cols, supply, demand)).epsilon(1e-12));
    for (std::size_t i = 0; i < rows; ++i) {
      std::int64_t out = 0;
      for (std::size_t j = 0; j < cols; ++j) {
        CHECK(sol.flow[i * cols + j] >= 0);
        out += sol.flow[i * cols + j];
      }
      CHECK(out == supply[i]);
    }
  }
  const std::vector<double> cost{1.0};
  CHECK_THROWS_AS(solve_transport(cost, 1, 1, std::vector<std::int64_t>{2}, std::vector<std::int64_t>{1}), ValidationError);
}
