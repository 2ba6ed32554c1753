#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "gibbslab/rng.hpp"
#include "gibbslab/stats.hpp"

using namespace gibbslab;

TEST_CASE("same (seed, stream) reproduces identical draws") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42, 7), d(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("distinct streams and seeds differ") {
  RngStream a(42, 7), b(42, 8), c(43, 7);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++equal_ab;
    if (va == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniform lies in [0,1) with the right mean and variance") {
  RngStream rs(1, 0);
  MeanAccumulator acc;
  for (int i = 0; i < 200000; ++i) {
    double u = rs.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    acc.add(u);
  }
  McEstimate est = acc.finish();
  CHECK(std::abs(est.estimate - 0.5) < 4.0 * est.std_err);
}

TEST_CASE("normal moments") {
  RngStream rs(9, 3);
  double sum = 0, sum2 = 0, sum3 = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    double z = rs.normal();
    sum += z;
    sum2 += z * z;
    sum3 += z * z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(sum3 / n) < 4.0 * std::sqrt(15.0 / n));
}

TEST_CASE("substream consumption order does not matter") {
  RngStream base(5, 100);
  RngStream t3 = base.substream(3);
  double first = t3.normal();
  RngStream t0 = base.substream(0);
  (void)t0.normal();
  RngStream t3_again = base.substream(3);
  CHECK(t3_again.normal() == first);
}

TEST_CASE("mc_mean is bit-identical for any worker count") {
  auto kernel = [](std::int64_t, RngStream& rs) {
    return rs.normal() * rs.normal() + rs.uniform();
  };
  setenv("SSL_GIBBS_THREADS", "1", 1);
  McEstimate serial = mc_mean(50000, RngStream(11, 0), kernel);
  setenv("SSL_GIBBS_THREADS", "4", 1);
  McEstimate parallel = mc_mean(50000, RngStream(11, 0), kernel);
  unsetenv("SSL_GIBBS_THREADS");
  CHECK(serial.estimate == parallel.estimate);
  CHECK(serial.std_err == parallel.std_err);
}

TEST_CASE("mc_mean rejects fewer than two trials") {
  CHECK_THROWS_AS(mc_mean(1, RngStream(1, 0),
                          [](std::int64_t, RngStream&) { return 0.0; }),
                  std::invalid_argument);
}

TEST_CASE("batch means std err matches iid std err on white noise") {
  RngStream rs(3, 0);
  std::vector<double> series(60000);
  MeanAccumulator acc;
  for (auto& v : series) {
    v = rs.normal();
    acc.add(v);
  }
  double bm = batch_means_std_err(series);
  double iid = acc.finish().std_err;
  CHECK(bm == doctest::Approx(iid).epsilon(0.5));
}
