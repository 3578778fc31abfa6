#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tsmotif/distance.hpp"

using namespace tsmotif;

TEST_CASE("z_normalize basic values") {
  const auto z = z_normalize({0.0, 1.0, 0.0});
  REQUIRE(z[0] == Catch::Approx(-0.7071).margin(1e-4));
  REQUIRE(z[1] == Catch::Approx(1.4142).margin(1e-4));
  REQUIRE(z[2] == Catch::Approx(-0.7071).margin(1e-4));
}

TEST_CASE("z_normalize constant input maps to zeros") {
  const auto z = z_normalize({5.0, 5.0, 5.0});
  for (double v : z) REQUIRE(v == 0.0);
}

TEST_CASE("z_normalize is idempotent") {
  const auto once = z_normalize(oracle::gaussian_noise(3, 50));
  const auto twice = z_normalize(once);
  for (std::size_t i = 0; i < once.size(); ++i)
    REQUIRE(twice[i] == Catch::Approx(once[i]).margin(1e-9));
}

TEST_CASE("sliding_mean_std small example") {
  const auto [means, stds] = sliding_mean_std({1.0, 2.0, 3.0, 4.0}, 2);
  REQUIRE(means == std::vector<double>{1.5, 2.5, 3.5});
  for (double s : stds) REQUIRE(s == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("sliding_mean_std constant series has zero stds") {
  const auto [means, stds] = sliding_mean_std(std::vector<double>(30, 2.5), 7);
  for (double s : stds) REQUIRE(s == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("sliding_mean_std matches the direct computation") {
  const auto t = oracle::gaussian_noise(11, 200);
  const std::size_t m = 16;
  const auto [means, stds] = sliding_mean_std(t, m);
  for (std::size_t i = 0; i + m <= t.size(); ++i) {
    const auto w = oracle::window(t, i, m);
    double mu = 0.0;
    for (double v : w) mu += v;
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (double v : w) var += (v - mu) * (v - mu);
    REQUIRE(means[i] == Catch::Approx(mu).margin(1e-9));
    REQUIRE(stds[i] == Catch::Approx(std::sqrt(var / static_cast<double>(m))).margin(1e-9));
  }
}

TEST_CASE("sliding_mean_std rejects m > n") {
  REQUIRE_THROWS_AS(sliding_mean_std({1.0, 2.0}, 3), std::invalid_argument);
}

TEST_CASE("distance_profile self-match is zero") {
  const auto t = oracle::gaussian_noise(5, 80);
  const auto q = oracle::window(t, 0, 12);
  const auto profile = distance_profile(q, t);
  REQUIRE(profile.distances[0] == Catch::Approx(0.0).margin(1e-6));
  REQUIRE(profile.distances.size() == t.size() - q.size() + 1);
}

TEST_CASE("distance_profile treats affinely equal windows as identical") {
  // [0,1,0] and [0,2,0] z-normalize to the same vector
  const std::vector<double> t = {0.0, 2.0, 0.0};
  const auto profile = distance_profile({0.0, 1.0, 0.0}, t);
  REQUIRE(profile.distances[0] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("distance_profile matches the naive oracle") {
  const auto t = oracle::gaussian_noise(7, 64);
  const auto q = oracle::gaussian_noise(8, 8);
  const auto got = distance_profile(q, t).distances;
  const auto want = oracle::distance_profile(q, t);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-6));
}

TEST_CASE("distance_profile is invariant to positive affine query changes") {
  const auto t = oracle::gaussian_noise(13, 100);
  auto q = oracle::gaussian_noise(14, 10);
  const auto base = distance_profile(q, t).distances;
  for (double& v : q) v = 3.5 * v - 2.0;
  const auto scaled = distance_profile(q, t).distances;
  for (std::size_t i = 0; i < base.size(); ++i)
    REQUIRE(scaled[i] == Catch::Approx(base[i]).margin(1e-6));
}

TEST_CASE("FFT and direct dot-product paths agree") {
  // m = 32 is the FFT switch-over point
  for (std::size_t m : {2u, 31u, 32u, 33u, 128u}) {
    const auto t = oracle::gaussian_noise(100 + m, 300);
    const auto q = oracle::gaussian_noise(200 + m, m);
    const auto direct = detail::sliding_dot_direct(q, t);
    const auto fft = detail::sliding_dot_fft(q, t);
    for (std::size_t i = 0; i < direct.size(); ++i)
      REQUIRE(fft[i] == Catch::Approx(direct[i]).margin(1e-6));
    const auto got = distance_profile(q, t).distances;
    const auto want = oracle::distance_profile(q, t);
    for (std::size_t i = 0; i < got.size(); ++i)
      REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-6));
  }
}

TEST_CASE("distances respect the 2 sqrt(m) bound") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = oracle::gaussian_noise(seed, 150);
    const auto q = oracle::gaussian_noise(seed + 50, 16);
    for (double d : distance_profile(q, t).distances) {
      REQUIRE(d >= 0.0);
      REQUIRE(d <= 2.0 * std::sqrt(16.0) + 1e-9);
    }
  }
}

TEST_CASE("triangle inequality on z-normalized windows") {
  const auto t = oracle::gaussian_noise(21, 120);
  const std::size_t m = 10;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, t.size() - m);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::window(t, pick(rng), m);
    const auto b = oracle::window(t, pick(rng), m);
    const auto c = oracle::window(t, pick(rng), m);
    const double ab = oracle::znorm_distance(a, b);
    const double bc = oracle::znorm_distance(b, c);
    const double ac = oracle::znorm_distance(a, c);
    REQUIRE(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("distance_profile rejects a query longer than the series") {
  REQUIRE_THROWS_AS(distance_profile({1.0, 2.0, 3.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("pairwise matrix is symmetric with a zero diagonal") {
  const auto t = oracle::gaussian_noise(31, 90);
  const auto mat = pairwise_distance_matrix(t, 8);
  for (std::size_t i = 0; i < mat.n_windows; ++i) {
    REQUIRE(mat.at(i, i) == 0.0);
    for (std::size_t j = 0; j < mat.n_windows; ++j) REQUIRE(mat.at(i, j) == mat.at(j, i));
  }
}

TEST_CASE("pairwise matrix finds periodic repeats") {
  // one full period apart -> same shape -> distance ~ 0
  const std::size_t period = 25;
  std::vector<double> t(4 * period);
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(i) /
                    static_cast<double>(period));
  const auto mat = pairwise_distance_matrix(t, period);
  REQUIRE(mat.at(0, period) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("pairwise matrix rows match distance_profile") {
  const auto t = oracle::gaussian_noise(41, 70);
  const std::size_t m = 9;
  const auto mat = pairwise_distance_matrix(t, m);
  for (std::size_t i = 0; i < mat.n_windows; i += 7) {
    const auto profile = distance_profile(oracle::window(t, i, m), t).distances;
    for (std::size_t j = 0; j < mat.n_windows; ++j)
      REQUIRE(mat.at(i, j) == Catch::Approx(profile[j]).margin(1e-6));
  }
}

TEST_CASE("pairwise matrix exclusion zone is half the window") {
  const auto mat = pairwise_distance_matrix(oracle::gaussian_noise(1, 40), 8);
  REQUIRE(mat.exclusion_zone() == 4);
  REQUIRE(mat.excluded(10, 13));
  REQUIRE_FALSE(mat.excluded(10, 14));
}
