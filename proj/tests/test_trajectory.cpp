#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "smid/csv_io.hpp"
#include "smid/trajectory.hpp"

using namespace smid;

namespace {

LissajousParams sample_params() {
  LissajousParams p;
  p.name = "t";
  p.amplitude = Vec3(1.5, 1.2, 1.0);
  p.frequency = Vec3(3, 4, 5) * (2 * kPi / 30);
  p.phase = Vec3(0.0, 0.4, 0.8);
  p.attitude_amplitude = Vec3(0.4, 0.35, 0.45);
  p.attitude_frequency = Vec3(2, 3, 4) * (2 * kPi / 30);
  p.attitude_phase = Vec3(0.1, 0.2, 0.3);
  return p;
}

}  // namespace

TEST_CASE("zero amplitudes give a constant pose") {
  LissajousParams p;
  p.duration = 2.0;
  const auto s = generate_lissajous(p);
  CHECK(s.samples.size() == 401);
  for (const auto& c : s.samples) {
    CHECK(c.p_wi.isZero());
    CHECK(c.v_wi.isZero());
    CHECK(c.omega_i.isZero());
    CHECK(quat_to_matrix(c.q_wi).isIdentity(1e-15));
  }
}

TEST_CASE("pure yaw motion rotates about body z") {
  LissajousParams p;
  p.attitude_amplitude = Vec3(0, 0, 0.5);
  p.attitude_frequency = Vec3(0, 0, 0.6);
  p.duration = 5.0;
  for (const auto& c : generate_lissajous(p).samples) {
    CHECK(c.p_wi.isZero());
    CHECK(std::abs(c.omega_i.x()) < 1e-15);
    CHECK(std::abs(c.omega_i.y()) < 1e-15);
  }
}

TEST_CASE("velocity matches a central difference of position") {
  const auto s = generate_lissajous(sample_params());
  const double dt = 1.0 / s.rate_hz;
  for (std::size_t i = 1; i + 1 < s.samples.size(); i += 37) {
    const Vec3 fd = (s.samples[i + 1].p_wi - s.samples[i - 1].p_wi) / (2 * dt);
    // truncation error of the central difference is A f^3 dt^2 / 6
    CHECK((fd - s.samples[i].v_wi).norm() < 1e-4);
  }
}

TEST_CASE("body rate matches the attitude increments") {
  const auto s = generate_lissajous(sample_params());
  const double dt = 1.0 / s.rate_hz;
  for (std::size_t i = 1; i + 1 < s.samples.size(); i += 41) {
    const Mat3 Rm = quat_to_matrix(s.samples[i - 1].q_wi);
    const Mat3 Rp = quat_to_matrix(s.samples[i + 1].q_wi);
    const Vec3 w = oracle::log(Rm.transpose() * Rp) / (2 * dt);
    CHECK((w - s.samples[i].omega_i).norm() < 1e-3);
  }
}

TEST_CASE("envelope violations are reported") {
  LissajousParams p = sample_params();
  p.amplitude = Vec3(4.0, 0.1, 0.1);
  CHECK_THROWS_AS(generate_lissajous(p), Error);
  try {
    generate_lissajous(p);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EnvelopeViolation);
  }
  p = sample_params();
  p.attitude_amplitude = Vec3(0.7, 0.1, 0.1);
  CHECK_THROWS_AS(generate_lissajous(p), Error);
}

TEST_CASE("canonical trajectories respect the envelope") {
  const auto set = load_trajectory_set(SMID_SOURCE_DIR "/configs/trajectories/canonical_v1.json");
  CHECK(set.size() == 10);
  for (const auto& p : set) CHECK_NOTHROW(generate_lissajous(p));
}

TEST_CASE("zero noise leaves the core unchanged") {
  const auto s = generate_lissajous(sample_params());
  NoiseProfile n;
  n.seed = 3;
  const auto q = perturb_core_states(s, n);
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    CHECK(q.samples[i].p_wi == s.samples[i].p_wi);
    CHECK(q.samples[i].q_wi.coeffs() == s.samples[i].q_wi.coeffs());
  }
}

TEST_CASE("core noise has the requested spread") {
  LissajousParams p;
  p.duration = 60.0;
  const auto s = generate_lissajous(p);  // 12001 samples
  NoiseProfile n;
  n.sigma_p = Vec3::Constant(0.1);
  n.sigma_rot = 2.0 * kPi / 180.0;
  n.seed = 11;
  const auto q = perturb_core_states(s, n);
  double ss = 0.0, geo = 0.0;
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    ss += (q.samples[i].p_wi - s.samples[i].p_wi).squaredNorm();
    geo += oracle::log(quat_to_matrix(s.samples[i].q_wi).transpose() *
                       quat_to_matrix(q.samples[i].q_wi))
               .norm();
  }
  const double count = static_cast<double>(s.samples.size());
  CHECK(std::sqrt(ss / (3 * count)) == doctest::Approx(0.1).epsilon(0.05));
  // mean of a chi(3) variable is 2 sqrt(2/pi)
  const double expected = n.sigma_rot / std::sqrt(3.0) * 2.0 * std::sqrt(2.0 / kPi);
  CHECK(geo / count == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("sigma from snr") {
  const std::vector<double> two = {-1.0, 1.0};  // population std 1
  CHECK(sigma_from_snr(two, 2.0) == doctest::Approx(0.5));
  const std::vector<double> flat(10, 3.0);
  CHECK_THROWS_AS(sigma_from_snr(flat, 1.0), Error);
  const auto s = generate_lissajous(sample_params());
  std::vector<double> x;
  for (const auto& c : s.samples) x.push_back(c.p_wi.x());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double lambda = std::sqrt(var / static_cast<double>(x.size()));
  CHECK(sigma_from_snr(x, 1.0) == doctest::Approx(lambda).epsilon(1e-12));
}

TEST_CASE("axis sigma from angle") {
  CHECK(axis_sigma_from_angle(0.0) == 0.0);
  CHECK(axis_sigma_from_angle(std::sqrt(3.0)) == doctest::Approx(1.0));
  CHECK(axis_sigma_from_angle(kPi) == doctest::Approx(1.8138).epsilon(1e-4));
}

TEST_CASE("synchronize") {
  CoreStateSeries core;
  for (double t : {0.0, 1.0, 2.0}) {
    CoreStateSample c;
    c.t = t;
    core.samples.push_back(c);
  }
  MeasurementSeries m;
  m.t = {0.0, 1.0, 2.0};
  m.vectors.assign(3, Vec3::Zero());
  CHECK(synchronize(core, m, 0.1).size() == 3);

  m.t = {0.5, 1.02};
  m.vectors.assign(2, Vec3::Zero());
  const auto d = synchronize(core, m, 0.1);
  REQUIRE(d.size() == 1);
  CHECK(d.meas.t[0] == 1.02);
  CHECK(d.core[0].t == 1.0);

  m.t = {0.5};
  m.vectors.assign(1, Vec3::Zero());
  CHECK_THROWS_AS(synchronize(core, m, 0.1), Error);
}

TEST_CASE("synchronize agrees with an exhaustive matcher") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> jitter(-0.004, 0.004);
  for (int trial = 0; trial < 20; ++trial) {
    CoreStateSeries core;
    for (int i = 0; i < 400; ++i) {
      CoreStateSample c;
      c.t = i * 0.005 + jitter(rng) * 0.2;
      core.samples.push_back(c);
    }
    MeasurementSeries m;
    for (int i = 0; i < 100; ++i) m.t.push_back(i * 0.02 + jitter(rng));
    m.vectors.assign(m.t.size(), Vec3::Zero());
    const double tol = 0.0025;

    std::vector<bool> used(core.samples.size(), false);
    std::size_t pairs = 0;
    for (double tm : m.t) {
      int best = -1;
      for (std::size_t j = 0; j < core.samples.size(); ++j) {
        const double d = std::abs(core.samples[j].t - tm);
        if (used[j] || d > tol) continue;
        if (best < 0 || d < std::abs(core.samples[static_cast<std::size_t>(best)].t - tm)) {
          best = static_cast<int>(j);
        }
      }
      if (best >= 0) {
        used[static_cast<std::size_t>(best)] = true;
        ++pairs;
      }
    }
    CHECK(synchronize(core, m, tol).size() == pairs);
  }
}

TEST_CASE("core csv round trip") {
  const auto s = generate_lissajous(sample_params());
  std::stringstream ss;
  write_core_csv(ss, s);
  const auto back = read_core_csv(ss);
  REQUIRE(back.samples.size() == s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); i += 97) {
    CHECK(back.samples[i].t == s.samples[i].t);
    CHECK(back.samples[i].p_wi == s.samples[i].p_wi);
    CHECK(back.samples[i].q_wi.coeffs() == s.samples[i].q_wi.coeffs());
    CHECK(back.samples[i].omega_i == s.samples[i].omega_i);
  }
}

TEST_CASE("measurement csv round trip and errors") {
  MeasurementSeries r;
  r.channel = Channel::Rotation;
  r.t = {0.0, 0.1};
  r.rotations = {Quat(1, 0, 0, 0), Quat(0.5, 0.5, 0.5, 0.5)};
  std::stringstream ss;
  write_measurement_csv(ss, r);
  const auto back = read_measurement_csv(ss);
  CHECK(back.channel == Channel::Rotation);
  CHECK(back.rotations[1].coeffs() == r.rotations[1].coeffs());

  std::stringstream bad("t,mx,my,mz\n0,1,2,3\n0.1,1,x,3\n");
  try {
    read_measurement_csv(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::stringstream unordered("t,mx,my,mz\n0.2,1,2,3\n0.1,1,2,3\n");
  CHECK_THROWS_AS(read_measurement_csv(unordered), Error);
}
