#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "jrmpc/cli.hpp"
#include "jrmpc/run_record.hpp"

using namespace jrmpc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "jrmpc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "jrmpc_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("help exits 0") {
  const Run r = cli({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("register-batch") != std::string::npos);
  CHECK(cli({"synth", "--help"}).code == kExitOk);
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == kExitUsage);
  const Run unknown = cli({"register-batch", "--inputs", "a.ply", "--out", "r.json", "--bogus"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("--bogus") != std::string::npos);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
}

TEST_CASE("a missing input file exits 1 and names the path") {
  const std::string missing = (work_dir() / "no_such_view.ply").string();
  const Run r = cli({"register-batch", "--inputs", missing, "--out", (work_dir() / "r.json").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find(missing) != std::string::npos);
}

TEST_CASE("synth, register, eval and classify work end to end") {
  const fs::path dir = work_dir() / "pipeline";
  fs::remove_all(dir);
  const Run synth = cli({"synth", "--blob", "3000", "--angles", "0", "15", "--no-noise", "--outliers", "0",
                         "--out-dir", dir.string(), "--format", "xyz"});
  REQUIRE(synth.code == kExitOk);
  CHECK(fs::exists(dir / "view_00.xyz"));
  CHECK(fs::exists(dir / "truth.json"));

  const std::string record = (dir / "record.json").string();
  const std::string truth = (dir / "truth.json").string();
  const Run reg = cli({"register-batch", "--inputs", (dir / "view_00.xyz").string(),
                       (dir / "view_01.xyz").string(), "--out", record, "--truth", truth});
  REQUIRE(reg.code == kExitOk);
  CHECK(reg.out.find("rotation_rmse=") != std::string::npos);
  const RunRecord rec = load_record(record);
  CHECK(rec.transforms.size() == 2);
  CHECK(rec.metrics.count("rotation_rmse") == 1);

  const Run eval = cli({"eval", "--record", record, "--truth", truth});
  CHECK(eval.code == kExitOk);
  CHECK(eval.out.find("rotation_rmse=") != std::string::npos);
  CHECK(eval.out.find("mean_composition_angle=") != std::string::npos);

  const std::string scene = (dir / "scene.ply").string();
  const Run cls = cli({"classify", "--record", record, "--out", scene});
  CHECK(cls.code == kExitOk);
  CHECK(cls.out.find("threshold=") != std::string::npos);
  CHECK(fs::exists(scene));

  const Run icp = cli({"baseline-icp", "--inputs", (dir / "view_00.xyz").string(),
                       (dir / "view_01.xyz").string(), "--out", (dir / "icp.json").string(), "--truth", truth});
  CHECK(icp.code == kExitOk);
  CHECK(icp.out.find("rotation_rmse=") != std::string::npos);
}

TEST_CASE("a truth file of the wrong size is a usage error") {
  const fs::path dir = work_dir() / "mismatch";
  fs::remove_all(dir);
  REQUIRE(cli({"synth", "--blob", "2000", "--angles", "0", "10", "20", "--out-dir", dir.string()}).code == kExitOk);
  const std::string record = (dir / "record.json").string();
  REQUIRE(cli({"baseline-icp", "--inputs", (dir / "view_00.ply").string(), (dir / "view_01.ply").string(),
               "--out", record})
              .code == kExitOk);
  const Run r = cli({"eval", "--record", record, "--truth", (dir / "truth.json").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("truth holds 3") != std::string::npos);
}
