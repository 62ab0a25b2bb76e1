#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "hpgan/datagen.hpp"
#include "hpgan/reference.hpp"
#include "hpgan/rng.hpp"
#include "hpgan/seqcore.hpp"
#include "oracles.hpp"

using namespace hpgan;

namespace {

BinarySequence random_seq(std::size_t n, Rng& rng) {
  std::vector<int> v(n);
  for (auto& x : v) x = rng.sign();
  return BinarySequence(v);
}

SequenceSet random_set(std::size_t j, std::size_t m, std::size_t n, Rng& rng) {
  std::vector<BinarySequence> g;
  for (std::size_t i = 0; i < j * m; ++i) g.push_back(random_seq(n, rng));
  return SequenceSet(j, m, g);
}

}  // namespace

TEST_CASE("BinarySequence validates and converts") {
  CHECK_THROWS_AS(BinarySequence(std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(BinarySequence(std::vector<int>{1, 0}), std::invalid_argument);
  const auto s = BinarySequence::from_signs("+-+");
  CHECK(s == BinarySequence{1, -1, 1});
  CHECK(BinarySequence::from_bits("101") == s);
  CHECK(s.to_bits() == "101");
  CHECK(s.negated().to_signs() == "-+-");
  CHECK(BinarySequence{1, 1, -1}.reversed() == BinarySequence{-1, 1, 1});
  CHECK(s.negated().canonical() == s);
  CHECK(s.canonical().canonical() == s.canonical());
  CHECK_THROWS(BinarySequence::from_signs("+x"));
}

TEST_CASE("SequenceSet shape rules") {
  CHECK_THROWS(SequenceSet(2, 1, {BinarySequence{1}}));
  CHECK_THROWS(SequenceSet(1, 2, {BinarySequence{1}, BinarySequence{1, 1}}));
}

TEST_CASE("aperiodic_xcorr examples") {
  CHECK(aperiodic_xcorr({1, 1}, {1, -1}, 0) == 0);
  CHECK(aperiodic_xcorr({1, 1, -1}, {1, 1, -1}, 2) == -1);
  CHECK(aperiodic_xcorr(barker13(), barker13(), 1) == 0);
  CHECK_THROWS(aperiodic_xcorr({1, 1}, {1, 1, 1}, 0));
  CHECK_THROWS(aperiodic_xcorr({1, 1}, {1, 1}, 2));
  CHECK_THROWS(aperiodic_xcorr({1, 1}, {1, 1}, -2));
}

TEST_CASE("aperiodic_xcorr matches the loop oracle, both shift signs") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const auto a = random_seq(n, rng);
    const auto b = random_seq(n, rng);
    for (int tau = -static_cast<int>(n) + 1; tau < static_cast<int>(n); ++tau) {
      CHECK(aperiodic_xcorr(a, b, tau) == oracle::xcorr(oracle::ints(a), oracle::ints(b), tau));
      CHECK(aperiodic_xcorr(a, b, -tau) == aperiodic_xcorr(b, a, tau));
    }
  }
}

TEST_CASE("aaf_sum and acf_sum examples") {
  const Flock gcp2{{1, 1}, {1, -1}};
  CHECK(aaf_sum(gcp2, 1) == 0);
  CHECK(aaf_sum(Flock{{1}}, 0) == 1);
  CHECK(aaf_sum(reference::obzcp_type1(), 3) == 0);
  CHECK_THROWS(aaf_sum(Flock{}, 0));
  CHECK_THROWS(aaf_sum(Flock{{1, 1}, {1}}, 0));

  const Flock one{{1, 1}};
  CHECK(acf_sum(one, one, 0) == 2);
  const Flock mate{{-1, 1}, {-1, -1}};
  CHECK(acf_sum(gcp2, mate, 0) == 0);
  CHECK(acf_sum(gcp2, mate, 1) == 0);
  CHECK_THROWS(acf_sum(gcp2, one, 0));
}

TEST_CASE("aaf_sum is symmetric in tau") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_set(1, 1 + rng.below(3), 1 + rng.below(10), rng);
    const int n = static_cast<int>(s.length());
    for (int tau = 0; tau < n; ++tau) CHECK(aaf_sum(s.flock(0), tau) == aaf_sum(s.flock(0), -tau));
  }
}

TEST_CASE("moccs_metric examples") {
  CHECK(moccs_metric(SequenceSet(1, 2, {{1, 1}, {1, -1}})) == 0);
  CHECK(moccs_metric(SequenceSet(2, 1, {{1, 1}, {1, 1}})) == 8);
  Rng rng(3);
  for (const auto& s : moccs_train_set(20, rng)) CHECK(moccs_metric(s) == 0);
}

TEST_CASE("moccs_metric agrees with the direct definition on random small sets") {
  Rng rng(13);
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_set(1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(6), rng);
    REQUIRE(moccs_metric(s) == oracle::moccs_metric(oracle::grid(s)));
  }
}

TEST_CASE("correlation_report invariants") {
  Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_set(1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(8), rng);
    const auto r = correlation_report(s);
    const long n = static_cast<long>(s.length());
    long total = 0;
    for (const auto& a : r.aaf) {
      CHECK(a[n - 1] == static_cast<long>(s.channels()) * n);
      for (long tau = 1; tau < n; ++tau) {
        CHECK(a[n - 1 + tau] == a[n - 1 - tau]);
        total += 2 * std::labs(a[n - 1 + tau]);
      }
    }
    for (const auto& c : r.acf)
      for (long v : c) total += std::labs(v);
    CHECK(r.metric_total == total);
    CHECK(r.metric_total == moccs_metric(s));
  }
}

TEST_CASE("moccs_metric symmetries (N <= 4, J, M <= 2)") {
  Rng rng(15);
  for (int t = 0; t < 500; ++t) {
    const std::size_t J = 1 + rng.below(2), M = 1 + rng.below(2), N = 1 + rng.below(4);
    const auto s = random_set(J, M, N, rng);
    const long base = moccs_metric(s);
    auto rebuild = [&](auto f) {
      std::vector<BinarySequence> g;
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t m = 0; m < M; ++m) g.push_back(f(j, m));
      return moccs_metric(SequenceSet(J, M, g));
    };
    const std::size_t jn = rng.below(J), mn = rng.below(M);
    // negate one user's whole flock
    CHECK(rebuild([&](auto j, auto m) { return j == jn ? s.at(j, m).negated() : s.at(j, m); }) == base);
    // negate one channel across every user
    CHECK(rebuild([&](auto j, auto m) { return m == mn ? s.at(j, m).negated() : s.at(j, m); }) == base);
    // reverse everything
    CHECK(rebuild([&](auto j, auto m) { return s.at(j, m).reversed(); }) == base);
    // permute users, permute channels
    CHECK(rebuild([&](auto j, auto m) { return s.at(J - 1 - j, m); }) == base);
    CHECK(rebuild([&](auto j, auto m) { return s.at(j, M - 1 - m); }) == base);
  }
}

TEST_CASE("pmepr") {
  CHECK(pmepr(BinarySequence{1}, 4) == doctest::Approx(1.0));
  CHECK(pmepr(BinarySequence(std::vector<int>(9, 1)), 8) == doctest::Approx(9.0));
  CHECK(std::abs(pmepr(reference::low_pmepr15(), 64) - 1.6667) <= 0.01);
  CHECK_THROWS(pmepr(BinarySequence{1, 1}, 3));
  Rng rng(16);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_seq(15, rng);
    const double p64 = pmepr(s, 64);
    CHECK(p64 >= 1.0);
    CHECK(p64 == doctest::Approx(oracle::pmepr(oracle::ints(s), 64)).epsilon(1e-12));
    CHECK(std::abs(pmepr(s, 128) - p64) / p64 < 0.005);
    CHECK(pmepr(s, 256) >= p64 - 1e-12);  // the 256 grid contains the 64 grid
  }
}

TEST_CASE("zcp_profile") {
  const auto t1 = zcp_profile(reference::obzcp_type1());
  CHECK(t1.front_zcz == 8);
  CHECK(t1.out_of_zone_max == 2);
  CHECK(zcp_profile(reference::obzcp_type2()).tail_zcz == 8);
  const auto one = zcp_profile(Flock{{1}, {1}});
  CHECK(one.front_zcz == 1);
  CHECK(one.tail_zcz == 1);
  const auto sub = zcp_profile(reference::obzcp_suboptimal());
  CHECK(sub.front_zcz == 1);  // aaf sum at shift 1 is 2
  CHECK(sub.tail_zcz == 2);   // zero only at the last shift
  CHECK_THROWS(zcp_profile(Flock{{1, 1}, {1, -1}}));
  CHECK_THROWS(zcp_profile(Flock{{1}}));
}

TEST_CASE("mf_sir") {
  CHECK(mf_sir(barker13()) == doctest::Approx(169.0 / 12.0).epsilon(1e-12));
  CHECK(std::abs(mf_sir(barker13()) - 169.0 / 12.0) < 1e-9);
  CHECK(mf_sir({1, 1}) == doctest::Approx(2.0));
  CHECK_THROWS(mf_sir(BinarySequence{1}));
}

TEST_CASE("build_r_matrix matches the explicit shift sum") {
  CHECK(build_r_matrix({1, 1}).isApprox(Eigen::Matrix2d::Identity()));
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_seq(2 + rng.below(15), rng);
    const auto r = build_r_matrix(s);
    const auto o = oracle::r_shift_sum(oracle::ints(s));
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      for (Eigen::Index k = 0; k < r.cols(); ++k) REQUIRE(r(i, k) == o[i][k]);
    CHECK(r.isApprox(r.transpose(), 0.0));
    CHECK(build_r_matrix(s.negated()) == r);
  }
}

TEST_CASE("mmf_sir") {
  const auto two = mmf_sir({1, 1});
  CHECK(two.gamma_mmf == doctest::Approx(2.0));
  const auto hp = mmf_sir(reference::radar_hpgan59());
  CHECK(std::abs(hp.gamma_mmf - 45.16) <= 0.5);
  CHECK(hp.gamma_mmf == doctest::Approx(oracle::gamma_mmf(oracle::ints(reference::radar_hpgan59()))).epsilon(1e-9));
  CHECK(mmf_sir(reference::radar_hpgan59().negated()).gamma_mmf == doctest::Approx(hp.gamma_mmf).epsilon(1e-12));
  CHECK_THROWS(mmf_sir(BinarySequence{1}));

  Rng rng(18);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_seq(2 + rng.below(30), rng);
    const auto sol = mmf_sir(s);
    const double g = sol.gamma_mmf;
    CHECK(g == doctest::Approx(oracle::gamma_mmf(oracle::ints(s))).epsilon(1e-9));
    CHECK(std::abs(mmf_gamma(s) - g) <= 1e-9 * g);
    CHECK(std::abs(mmf_sir(s.negated()).gamma_mmf - g) <= 1e-9 * g);
    CHECK(std::abs(mmf_sir(s.reversed()).gamma_mmf - g) <= 1e-9 * g);
    CHECK(g >= mf_sir(s) - 1e-6);
    REQUIRE(sol.gamma_mf.has_value());
    CHECK(*sol.gamma_mf == doctest::Approx(oracle::merit_factor(oracle::ints(s))));
    // x solves R x = s and gamma = s^T x
    Eigen::VectorXd sv(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) sv(static_cast<Eigen::Index>(i)) = s[i];
    CHECK((sol.r_matrix * sol.mmf_weights - sv).norm() <= 1e-8 * sv.norm());
    CHECK(sv.dot(sol.mmf_weights) == doctest::Approx(g));
  }
}

TEST_CASE("flatten and unflatten are inverse, row-major") {
  const SequenceSet one(1, 1, {BinarySequence{-1}});
  CHECK(flatten(one) == BinarySequence{-1});
  Rng rng(19);
  for (int t = 0; t < 50; ++t) {
    const std::size_t J = 1 + rng.below(3), M = 1 + rng.below(3), N = 1 + rng.below(9);
    const auto s = random_set(J, M, N, rng);
    const auto f = flatten(s);
    CHECK(f.size() == J * M * N);
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t n = 0; n < N; ++n) CHECK(f[(j * M + m) * N + n] == s.at(j, m)[n]);
    CHECK(unflatten(f, J, M, N) == s);
  }
  CHECK_THROWS(unflatten(BinarySequence{1, 1, 1}, 1, 2, 2));
  Rng r2(4);
  CHECK(flatten(moccs_train_set(1, r2).front()).size() == 32);
}
