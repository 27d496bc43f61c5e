#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "smid/selector_losses.hpp"

using namespace smid;

TEST_CASE("rotation bound loss") {
  CHECK(loss_rot(Vec3(0, 0, 1)) == 0.0);
  CHECK(loss_rot(Vec3(0, 0, kPi)) == 0.0);
  CHECK(loss_rot(Vec3(0, 0, 4)) == doctest::Approx(4 - kPi));
}

TEST_CASE("norm loss") {
  CHECK(loss_norm(std::vector<double>{0, 1, 0}) == 0.0);
  CHECK(loss_norm(std::vector<double>{0.5, 0.5, 0.5}) == doctest::Approx(0.25));
  CHECK(loss_norm(std::vector<double>{-0.5, 1.5}) == doctest::Approx(1.0));
}

TEST_CASE("positivity loss") {
  CHECK(loss_pos(std::vector<double>{0.2, 0.8}) == 0.0);
  CHECK(loss_pos(std::vector<double>{-0.3, 0.4}) == doctest::Approx(0.3));
  CHECK(loss_pos(std::vector<double>{-3, -4}) == doctest::Approx(5.0));
}

TEST_CASE("unit vector loss") {
  CHECK(loss_vec(Vec3(0, 0.6, 0.8)) == doctest::Approx(0.0));
  CHECK(loss_vec(Vec3(2, 0, 0)) == doctest::Approx(1.0));
  CHECK(loss_vec(Vec3::Zero()) == doctest::Approx(1.0));
}

TEST_CASE("std loss") {
  CHECK(loss_std(std::vector<double>{1, 0}) == doctest::Approx(0.0));
  CHECK(sample_std(std::vector<double>{1, 0}) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(loss_std(std::vector<double>{0.5, 0.5}) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(loss_std(std::vector<double>(5, 0.2)) == doctest::Approx(1 / std::sqrt(5.0)));
  CHECK_THROWS_AS(loss_std(std::vector<double>{1.0}), Error);
}

TEST_CASE("one-hot vectors are the only simplex points with std 1/sqrt(N)") {
  for (int n = 2; n <= 7; ++n) {
    for (int k = 0; k < n; ++k) {
      std::vector<double> b(static_cast<std::size_t>(n), 0.0);
      b[static_cast<std::size_t>(k)] = 1.0;
      CHECK(std::abs(sample_std(b) - 1 / std::sqrt(static_cast<double>(n))) < 1e-12);
    }
  }
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(1.0);
  for (int i = 0; i < 20000; ++i) {
    const int n = 2 + i % 6;
    std::vector<double> b(static_cast<std::size_t>(n));
    double s = 0.0;
    for (auto& v : b) s += (v = e(rng));
    for (auto& v : b) v /= s;
    if (*std::max_element(b.begin(), b.end()) > 1 - 1e-9) continue;
    CHECK(loss_std(b) > 1e-6);
  }
}
