#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "smid/geometry.hpp"

using namespace smid;

TEST_CASE("skew is the cross-product matrix") {
  CHECK(skew(Vec3::Zero()).isZero());
  Mat3 ex;
  ex << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK(skew(Vec3::UnitX()) == ex);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = oracle::random_vec(rng, 5.0);
    CHECK((skew(v) * v).norm() < 1e-12);
  }
}

TEST_CASE("exp_so3 special cases") {
  CHECK(exp_so3(Vec3::Zero()) == Mat3::Identity());
  const Mat3 R = exp_so3(Vec3(0, 0, kPi / 2));
  CHECK((R * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
  CHECK(is_rotation(exp_so3(Vec3(1e-10, -2e-10, 3e-10))));
}

TEST_CASE("exp_so3 agrees with AngleAxis") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 w = oracle::random_tangent(rng, 6.0);
    CHECK((exp_so3(w) - oracle::rot(w)).norm() < 1e-14);
  }
}

TEST_CASE("log_so3 inverts exp_so3") {
  CHECK(log_so3(Mat3::Identity()).isZero());
  const Vec3 w(0.1, 0.2, 0.3);
  CHECK((log_so3(exp_so3(w)) - w).norm() < 1e-9);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 v = oracle::random_tangent(rng, kPi - 1e-6);
    CHECK((log_so3(exp_so3(v)) - v).norm() < 1e-9);
  }
  // near the small-angle switch
  for (double a : {1e-9, 1e-8, 3e-8, 1e-7, 2e-7, 1e-6}) {
    const Vec3 v = a * Vec3(1, -2, 2).normalized();
    CHECK((log_so3(exp_so3(v)) - v).norm() < 1e-15);
  }
}

TEST_CASE("log_so3 at pi picks the positive axis") {
  const Vec3 w = log_so3(exp_so3(Vec3(0, 0, kPi)));
  CHECK(w.norm() == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(w.z() > 0.0);
  const Vec3 u = log_so3(exp_so3(Vec3(0, 0, -kPi)));
  CHECK((u - w).norm() < 1e-9);
  const Vec3 d = log_so3(exp_so3(kPi * Vec3(1, 1, 0).normalized()));
  CHECK((d - kPi * Vec3(1, 1, 0).normalized()).norm() < 1e-7);
}

TEST_CASE("log_so3 near pi matches the oracle") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const Vec3 axis = oracle::random_tangent(rng, 1.0).normalized();
    const double a = kPi - std::pow(10.0, -1.0 - 7.0 * (i % 8) / 8.0);
    const Mat3 R = oracle::rot(a * axis);
    CHECK((exp_so3(log_so3(R)) - R).norm() < 1e-12);
    CHECK((log_so3(R) - oracle::log(R)).norm() < 1e-9);
  }
}

TEST_CASE("log_so3 rejects non-rotations") {
  Mat3 M = Mat3::Identity();
  M(0, 0) = 1.1;
  CHECK_THROWS_AS(log_so3(M), Error);
  CHECK_THROWS_AS(log_so3(-Mat3::Identity()), Error);
}

TEST_CASE("canonicalize wraps onto the pi ball") {
  const Vec3 w(0, 0, 1.5 * kPi);
  const Vec3 c = canonicalize(w);
  CHECK(c.norm() <= kPi + 1e-12);
  CHECK((exp_so3(c) - exp_so3(w)).norm() < 1e-12);
  CHECK(canonicalize(Vec3(0.1, 0.2, 0.3)) == Vec3(0.1, 0.2, 0.3));
}

TEST_CASE("quaternion conversion") {
  CHECK(quat_to_matrix(Quat(1, 0, 0, 0)) == Mat3::Identity());
  const Mat3 Rx = quat_to_matrix(Quat(0, 1, 0, 0));
  CHECK((Rx - Vec3(1, -1, -1).asDiagonal().toDenseMatrix()).norm() < 1e-15);
  const Quat q = Quat(0.3, -0.5, 0.2, 0.7).normalized();
  const Quat nq(-q.w(), -q.x(), -q.y(), -q.z());
  CHECK((quat_to_matrix(q) - quat_to_matrix(nq)).norm() < 1e-15);
  CHECK((quat_to_matrix(matrix_to_quat(quat_to_matrix(q))) - quat_to_matrix(q)).norm() < 1e-14);
  CHECK_THROWS_AS(quat_to_matrix(Quat(2, 0, 0, 0)), Error);
  CHECK(is_rotation(quat_to_matrix(Quat(1.0005, 0, 0, 0))));
}

TEST_CASE("geodesic_error") {
  CHECK(geodesic_error(Vec3(0.3, 0.1, -0.2), Vec3(0.3, 0.1, -0.2)) == doctest::Approx(0.0));
  CHECK(geodesic_error(Vec3(0, 0, kPi / 2), Vec3(0, 0, -kPi / 2)) ==
        doctest::Approx(kPi).epsilon(1e-12));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = oracle::random_tangent(rng, kPi), b = oracle::random_tangent(rng, kPi);
    CHECK(std::abs(geodesic_error(a, b) - oracle::geodesic(a, b)) < 1e-9);
  }
}
