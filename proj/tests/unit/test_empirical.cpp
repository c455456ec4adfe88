#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gpi/empirical.hpp"
#include "gpi/errors.hpp"
#include "gpi/rng.hpp"
#include "oracles.hpp"

using gpi::ErrorKind;
using gpi::RngStream;
using gpi::Sample;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const gpi::Error& e) {
    return e.kind();
  }
  FAIL("expected gpi::Error");
  return ErrorKind::InvalidArgument;
}

std::vector<double> normal_draws(std::size_t m, std::uint64_t seed) {
  const auto v = oracle::random_vector(static_cast<Eigen::Index>(m), seed);
  return {v.data(), v.data() + v.size()};
}

}  // namespace

TEST_CASE("Sample rejects empty and non-finite input") {
  CHECK(kind_of([] { Sample s({}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { Sample s({1.0, std::numeric_limits<double>::quiet_NaN()}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { Sample s({std::numeric_limits<double>::infinity()}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("ecdf counts points at or below x") {
  const Sample s({1, 2, 3, 4});
  CHECK(gpi::ecdf(s, 2.5) == 0.5);
  CHECK(gpi::ecdf(s, 2.0) == 0.5);
  CHECK(gpi::ecdf(s, 0.999) == 0.0);
  CHECK(gpi::ecdf(s, std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(gpi::ecdf(Sample({-3.0, 8.0, 0.1}), std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("ecdf of standard normal draws at zero is near one half") {
  const Sample s(normal_draws(1000, 11));
  CHECK(std::abs(gpi::ecdf(s, 0.0) - 0.5) < 0.05);
}

TEST_CASE("quantile follows the inf definition") {
  const Sample s({1, 2, 3, 4});
  CHECK(gpi::quantile(s, 0.5) == 2.0);
  CHECK(gpi::quantile(s, 1.0) == 4.0);
  CHECK(gpi::quantile(s, 0.25) == 1.0);
  CHECK(gpi::quantile(s, 0.2500001) == 2.0);
  CHECK(gpi::quantile(s, 1e-9) == 1.0);
}

TEST_CASE("quantile rejects levels outside (0, 1]") {
  const Sample s({1, 2, 3});
  for (double a : {0.0, -0.1, 1.0000001, std::numeric_limits<double>::quiet_NaN()})
    CHECK(kind_of([&] { (void)gpi::quantile(s, a); }) == ErrorKind::AlphaOutOfRange);
}

TEST_CASE("quantile matches a linear scan on random samples") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto v = normal_draws(37, seed);
    const Sample s(v);
    for (double a : {0.95, 0.5, 0.01, 0.3, 1.0, 1.0 / 37.0, 36.0 / 37.0})
      CHECK(gpi::quantile(s, a) == oracle::scan_quantile(v, a));
  }
}

TEST_CASE("quantile_sorted agrees with quantile") {
  auto v = normal_draws(101, 5);
  const Sample s(v);
  std::sort(v.begin(), v.end());
  for (double a = 0.005; a <= 1.0; a += 0.01) CHECK(gpi::quantile_sorted(v, a) == gpi::quantile(s, a));
}

TEST_CASE("quantile properties: membership, monotonicity, Galois") {
  const auto v = normal_draws(53, 99);
  std::vector<double> with_ties = v;
  with_ties.insert(with_ties.end(), v.begin(), v.begin() + 10);
  for (const auto& values : {v, with_ties}) {
    const Sample s(values);
    double prev = -INFINITY;
    for (int k = 1; k <= 400; ++k) {
      const double a = k / 400.0;
      const double q = gpi::quantile(s, a);
      CHECK(std::find(values.begin(), values.end(), q) != values.end());
      CHECK(q >= prev);
      prev = q;
      CHECK(gpi::ecdf(s, q) >= a);
      CHECK(gpi::ecdf(s, std::nextafter(q, -INFINITY)) < a);
    }
  }
}

TEST_CASE("quantile_rank is the smallest rank reaching the level") {
  CHECK(gpi::quantile_rank(4, 0.5) == 2);
  CHECK(gpi::quantile_rank(4, 1.0) == 4);
  CHECK(gpi::quantile_rank(1000, 0.95) == 950);
  CHECK(gpi::quantile_rank(1000, 0.9500001) == 951);
  for (std::size_t m : {1u, 7u, 100u, 2500u}) {
    for (double a : {0.01, 0.15, 0.5, 0.85, 0.95, 0.999}) {
      const std::size_t k = gpi::quantile_rank(m, a);
      CHECK(static_cast<double>(k) / static_cast<double>(m) >= a);
      if (k > 1) CHECK(static_cast<double>(k - 1) / static_cast<double>(m) < a);
    }
  }
}

TEST_CASE("resample from a singleton repeats it") {
  RngStream rng(1, 0);
  const auto r = gpi::resample(Sample({7.0}), 5, rng);
  REQUIRE(r.size() == 5);
  for (double v : r.values()) CHECK(v == 7.0);
}

TEST_CASE("resample is deterministic and stays inside the support") {
  const auto v = normal_draws(25, 3);
  const Sample s(v);
  RngStream a(42, 7);
  RngStream b(42, 7);
  const auto ra = gpi::resample(s, 500, a);
  const auto rb = gpi::resample(s, 500, b);
  CHECK(std::equal(ra.values().begin(), ra.values().end(), rb.values().begin()));
  const std::set<double> support(v.begin(), v.end());
  for (double x : ra.values()) CHECK(support.count(x) == 1);
}

TEST_CASE("resample frequencies are uniform") {
  std::vector<double> v(10);
  for (int i = 0; i < 10; ++i) v[i] = i;
  RngStream rng(2024, 1);
  const auto r = gpi::resample(Sample(v), 100000, rng);
  std::vector<int> counts(10, 0);
  for (double x : r.values()) ++counts[static_cast<int>(x)];
  for (int c : counts) CHECK(std::abs(c / 100000.0 - 0.1) < 0.01);
}

TEST_CASE("RngStream: same id repeats, distinct ids and substreams differ") {
  RngStream a(5, 9);
  RngStream b(5, 9);
  RngStream c(5, 10);
  RngStream d(6, 9);
  bool differs_c = false;
  bool differs_d = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs_c |= x != c();
    differs_d |= x != d();
  }
  CHECK(differs_c);
  CHECK(differs_d);

  const RngStream base(5, 9);
  auto s1 = base.substream(1);
  auto s2 = base.substream(2);
  auto s1again = base.substream(1);
  const auto first = s1();
  CHECK(first == s1again());
  CHECK(first != s2());
}

TEST_CASE("RngStream uniform01 and uniform_index ranges") {
  RngStream rng(77, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000.0 - 0.5) < 0.005);
  for (int i = 0; i < 10000; ++i) REQUIRE(rng.uniform_index(3) < 3);
  CHECK(rng.uniform_index(1) == 0);
}
