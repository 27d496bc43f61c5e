#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "smid/csv_io.hpp"
#include "smid/report.hpp"
#include "smid/sensor_models.hpp"

namespace fs = std::filesystem;
using namespace smid;

namespace {

const std::string kConfig = SMID_SOURCE_DIR "/configs/trajectories/canonical_v1.json";

struct Run {
  int code = -1;
  std::string err;
};

Run smid_cli(const std::string& args, const fs::path& scratch) {
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd =
      std::string(SMID_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(err);
  std::stringstream ss;
  ss << f.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("smid_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("simulate writes three files per trajectory") {
  const fs::path d = scratch_dir("count");
  const Run r = smid_cli("simulate --config " + kConfig + " --model Magnetometer --out " +
                             (d / "sim").string(),
                         d);
  REQUIRE(r.code == 0);
  int files = 0, manifests = 0;
  for (const auto& e : fs::directory_iterator(d / "sim")) {
    ++files;
    manifests += e.path().string().ends_with("_manifest.txt") ? 1 : 0;
  }
  CHECK(files == 30);
  CHECK(manifests == 10);
}

TEST_CASE("simulate is deterministic and noiseless output reloads exactly") {
  const fs::path d = scratch_dir("det");
  const std::string base = "simulate --config " + kConfig +
                           " --model BodyVelocity --trajectories 1 --noiseless --seed 4 --out ";
  REQUIRE(smid_cli(base + (d / "a").string(), d).code == 0);
  REQUIRE(smid_cli(base + (d / "b").string(), d).code == 0);
  for (const char* f : {"lissajous_00_core.csv", "lissajous_00_meas.csv", "lissajous_00_manifest.txt"}) {
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
  }
  const auto core = load_core_csv(d / "a" / "lissajous_00_core.csv");
  const auto meas = load_measurement_csv(d / "a" / "lissajous_00_meas.csv");
  const auto manifest = KeyValueReport::load(d / "a" / "lissajous_00_manifest.txt");
  ModelStateVector x;
  x.set(StateSlot::BodyVelocityLever, manifest.get_vec3("truth.body_velocity.p_is"));
  x.set(StateSlot::BodyVelocityRotation, manifest.get_vec3("truth.body_velocity.omega_is"));
  REQUIRE(meas.size() == 1501);
  for (std::size_t i = 0; i < meas.size(); ++i) {
    CHECK(meas.vectors[i] == predict(ModelKind::BodyVelocity, core.samples[4 * i], x));
  }
}

TEST_CASE("identify and calibrate a position sensor") {
  const fs::path d = scratch_dir("pos");
  REQUIRE(smid_cli("simulate --config " + kConfig +
                       " --model Position --trajectories 1 --with-reference --seed 2 --out " +
                       (d / "sim").string(),
                   d)
              .code == 0);
  const std::string io = " --core " + (d / "sim" / "lissajous_00_core.csv").string() +
                         " --meas " + (d / "sim" / "lissajous_00_meas.csv").string();
  REQUIRE(smid_cli("identify" + io + " --out " + (d / "id").string(), d).code == 0);
  const auto s1 = KeyValueReport::load(d / "id" / "stage1_report.txt");
  CHECK(s1.get("stage1.selected") == "Position");
  CHECK(s1.get_bool("health.accepted"));

  const std::string cal =
      "calibrate" + io + " --stage1 " + (d / "id" / "stage1_report.txt").string() + " --out ";
  REQUIRE(smid_cli(cal + (d / "c1").string(), d).code == 0);
  REQUIRE(smid_cli(cal + (d / "c2").string(), d).code == 0);
  const auto rep = KeyValueReport::load(d / "c1" / "calibration_report.txt");
  const auto manifest = KeyValueReport::load(d / "sim" / "lissajous_00_manifest.txt");
  CHECK(rep.get_bool("reference.reference_required") == manifest.get_bool("reference_present"));
  CHECK(slurp(d / "c1" / "calibration_report.txt") == slurp(d / "c2" / "calibration_report.txt"));
}

TEST_CASE("noisy velocity data is rejected by the health check") {
  const fs::path d = scratch_dir("vel");
  REQUIRE(smid_cli("simulate --config " + kConfig +
                       " --model WorldVelocity --trajectories 1 --measurement-sigma 3 --seed 5 "
                       "--out " +
                       (d / "sim").string(),
                   d)
              .code == 0);
  const std::string io = " --core " + (d / "sim" / "lissajous_00_core.csv").string() +
                         " --meas " + (d / "sim" / "lissajous_00_meas.csv").string();
  CHECK(smid_cli("identify" + io + " --out " + (d / "id").string(), d).code == 2);
  const auto s1 = KeyValueReport::load(d / "id" / "stage1_report.txt");
  CHECK(s1.get("health.failed_criteria").find("DeltaB") != std::string::npos);
  CHECK(smid_cli("calibrate" + io + " --stage1 " + (d / "id" / "stage1_report.txt").string() +
                     " --out " + (d / "cal").string(),
                 d)
            .code == 2);
}

TEST_CASE("reference test on a velocity sensor is refused") {
  const fs::path d = scratch_dir("velref");
  REQUIRE(smid_cli("simulate --config " + kConfig +
                       " --model WorldVelocity --trajectories 1 --seed 1 --out " +
                       (d / "sim").string(),
                   d)
              .code == 0);
  const std::string io = " --core " + (d / "sim" / "lissajous_00_core.csv").string() +
                         " --meas " + (d / "sim" / "lissajous_00_meas.csv").string();
  REQUIRE(smid_cli("identify" + io + " --out " + (d / "id").string(), d).code == 0);
  const std::string cal = "calibrate" + io + " --stage1 " +
                          (d / "id" / "stage1_report.txt").string() + " --out " +
                          (d / "cal").string();
  CHECK(smid_cli(cal, d).code == 0);
  const Run r = smid_cli(cal + " --reference always", d);
  CHECK(r.code == 1);
  CHECK(r.err.find("ModelHasNoReference") != std::string::npos);
}

TEST_CASE("malformed input exits with 1 and names the line") {
  const fs::path d = scratch_dir("bad");
  std::ofstream(d / "core.csv") << kCoreCsvHeader << "\n0,0,0,0,0,0,0,1,0,0,0,0,0,0\n";
  std::ofstream(d / "meas.csv") << kVectorCsvHeader << "\n0,1,2,3\n0.1,1,2\n";
  const Run r = smid_cli("identify --core " + (d / "core.csv").string() + " --meas " +
                             (d / "meas.csv").string() + " --out " + d.string(),
                         d);
  CHECK(r.code == 1);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(smid_cli("identify --core missing.csv --meas missing.csv", d).code == 1);
  CHECK(smid_cli("identify --bogus-flag 1", d).code == 1);
}

TEST_CASE("sweep writes its tables") {
  const fs::path d = scratch_dir("sweep");
  const Run r = smid_cli("sweep --config " + kConfig +
                             " --kind measurement-noise --models Position,Rotation --levels 3 "
                             "--trajectories 2 --quiet --out " +
                             d.string(),
                         d);
  REQUIRE(r.code == 0);
  const auto m = KeyValueReport::load(d / "manifest.txt");
  CHECK(m.get_int("sweep.cells") == 2 * 1 * 2);
  for (const char* f : {"table.csv", "records.csv", "sweep.csv"}) CHECK(fs::exists(d / f));
  CHECK(slurp(d / "sweep.csv").rfind("min_delta_b,max_loss_std,max_loss_norm,", 0) == 0);
}
