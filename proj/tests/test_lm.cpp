#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "smid/levenberg_marquardt.hpp"

using namespace smid;

namespace {

class Linear final : public LeastSquaresProblem {
 public:
  Linear(Eigen::MatrixXd A, Eigen::VectorXd b) : A_(std::move(A)), b_(std::move(b)) {}
  int num_params() const override { return static_cast<int>(A_.cols()); }
  int num_residuals() const override { return static_cast<int>(A_.rows()); }
  void residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const override {
    r = A_ * x - b_;
  }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

class Rosenbrock final : public LeastSquaresProblem {
 public:
  int num_params() const override { return 2; }
  int num_residuals() const override { return 2; }
  void residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const override {
    r[0] = 10.0 * (x[1] - x[0] * x[0]);
    r[1] = 1.0 - x[0];
  }
};

class Bounded final : public LeastSquaresProblem {
 public:
  int num_params() const override { return 2; }
  int num_residuals() const override { return 2; }
  void residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const override {
    r[0] = x[0] + 1.0;
    r[1] = x[1] - 2.0;
  }
  double lower_bound(int j) const override { return j == 0 ? 0.0 : LeastSquaresProblem::lower_bound(j); }
};

class Exploding final : public LeastSquaresProblem {
 public:
  int num_params() const override { return 1; }
  int num_residuals() const override { return 1; }
  void residual(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> r) const override {
    r[0] = std::log(x[0]);
  }
};

}  // namespace

TEST_CASE("linear problem matches QR") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd A(30, 4);
  Eigen::VectorXd b(30);
  for (int i = 0; i < 30; ++i) {
    b[i] = n(rng);
    for (int j = 0; j < 4; ++j) A(i, j) = n(rng);
  }
  const Eigen::VectorXd want = A.colPivHouseholderQr().solve(b);
  Linear p(A, b);
  for (auto damping : {LmDamping::Identity, LmDamping::Marquardt}) {
    LmOptions o;
    o.damping = damping;
    const auto s = levenberg_marquardt(p, Eigen::VectorXd::Zero(4), o);
    CHECK(s.converged());
    CHECK((s.x - want).norm() < 1e-6);
    CHECK(s.final_cost <= s.initial_cost);
  }
}

TEST_CASE("rosenbrock") {
  Rosenbrock p;
  const auto s = levenberg_marquardt(p, Eigen::Vector2d(-1.2, 1.0));
  CHECK(s.converged());
  CHECK((s.x - Eigen::Vector2d(1, 1)).norm() < 1e-6);
}

TEST_CASE("lower bounds hold and are reached exactly") {
  Bounded p;
  const auto s = levenberg_marquardt(p, Eigen::Vector2d(3.0, 0.0));
  CHECK(s.x[0] == 0.0);
  CHECK(s.x[1] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("starting at the minimum takes no accepted steps") {
  Rosenbrock p;
  const auto s = levenberg_marquardt(p, Eigen::Vector2d(1.0, 1.0));
  CHECK(s.accepted_steps == 0);
  CHECK(s.final_cost == 0.0);
}

TEST_CASE("non-finite start throws") {
  Exploding p;
  CHECK_THROWS_AS(levenberg_marquardt(p, Eigen::VectorXd::Constant(1, -1.0)), Error);
}
