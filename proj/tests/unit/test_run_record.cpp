#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "jrmpc/batch.hpp"
#include "jrmpc/errors.hpp"
#include "jrmpc/init.hpp"
#include "jrmpc/run_record.hpp"
#include "test_helpers.hpp"

using namespace jrmpc;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("jrmpc_record_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunRecord full_record(std::mt19937_64& rng) {
  RunRecord r;
  r.command = "register-incremental";
  r.config = {{"seed", 3}, {"batch", {{"gamma", 0.1}}}};
  r.seed = 3;
  r.inputs = {"a.ply", "b.xyz"};
  IterationRecord it;
  it.iteration = 1;
  it.objective = -12.5;
  it.objective_start = -13.0;
  it.cm_gain = 0.25;
  it.log_likelihood = -40.125;
  it.rotation_change = 0.01;
  it.translation_change = 0.2;
  it.mean_change = 1e-4;
  r.trace = {it, it};
  r.trace[1].iteration = 2;
  r.transforms = {testgen::random_transform(rng), testgen::random_transform(rng)};
  r.normalization_scale = 7.25;
  r.model = testgen::random_model(rng, 6, 0.3);
  r.mixture = MixtureSummary::of(r.model, 4);
  IntegrationRecord ir;
  ir.set_id = 1;
  ir.transform = testgen::random_transform(rng);
  ir.masses = Eigen::VectorXd::LinSpaced(6, 0.0, 2.5);
  ir.recycled = {0, 4};
  ir.rigid_step_skipped = true;
  r.integrations = {ir};
  r.flagged_groups = {2};
  r.converged = true;
  r.metrics = {{"rotation_rmse", 0.125}, {"mean_composition_angle", 1.5}};
  r.runtime_ms = 12.0;
  return r;
}

}  // namespace

TEST_CASE("a record with every field survives save and load") {
  std::mt19937_64 rng(1);
  const RunRecord r = full_record(rng);
  const std::string path = temp_path("full.json");
  save_record(r, path);
  const RunRecord back = load_record(path);
  CHECK(to_json(back) == to_json(r));
  CHECK(back.model.means == r.model.means);
  CHECK(back.transforms[1].rotation() == r.transforms[1].rotation());
  CHECK(back.integrations[0].recycled == r.integrations[0].recycled);
  CHECK(back.trace[0].cm_gain == 0.25);
}

TEST_CASE("saving twice differs only in the runtime field") {
  std::mt19937_64 rng(2);
  RunRecord r = full_record(rng);
  const std::string a = temp_path("a.json");
  const std::string b = temp_path("b.json");
  save_record(r, a);
  save_record(r, b);
  CHECK(slurp(a) == slurp(b));
  r.runtime_ms = 99.0;
  save_record(r, b);
  json ja = json::parse(slurp(a));
  json jb = json::parse(slurp(b));
  ja.erase("runtime_ms");
  jb.erase("runtime_ms");
  CHECK(ja == jb);
}

TEST_CASE("a registration run gives the same record twice") {
  std::mt19937_64 rng(3);
  std::vector<PointSet> sets;
  const Points base = testgen::random_points(rng, 60);
  for (std::size_t j = 0; j < 3; ++j) {
    sets.emplace_back(j, testgen::random_transform(rng, 0.1).apply(base));
  }
  auto run = [&] {
    InitConfig ic;
    ic.seed = 4;
    BatchConfig bc;
    bc.max_iterations = 20;
    const InitialEstimate est = initialize(sets, ic, bc.gamma, sphere_volume(0.5), 1e-3);
    const BatchResult res = run_batch(sets, est.transforms, est.model, bc);
    RunRecord rec;
    rec.trace = res.trace;
    rec.transforms = res.transforms;
    rec.model = res.model;
    rec.mixture = MixtureSummary::of(res.model);
    return to_json(rec).dump();
  };
  CHECK(run() == run());
}

TEST_CASE("a non-orthonormal rotation is rejected on load") {
  json t = transform_to_json(RigidTransform{});
  t["rotation"][0] = 1.5;
  CHECK_THROWS_AS(transform_from_json(t), DomainError);
}

TEST_CASE("ground truth round trip") {
  GroundTruth g;
  g.transforms = {RigidTransform{}, RigidTransform(rotation_y(30.0), Vec3(1.0, 2.0, 3.0))};
  g.outlier = {{false, true}, {true, true, false}};
  g.signal_power = {0.5, 0.25};
  g.noise_power = {0.05, 0.025};
  const std::string path = temp_path("truth.json");
  save_truth(g, path);
  const GroundTruth back = load_truth(path);
  CHECK(to_json(back) == to_json(g));
  CHECK(back.outlier == g.outlier);
}

TEST_CASE("denormalisation scales lengths, areas and volumes") {
  std::mt19937_64 rng(5);
  const MixtureModel m = testgen::random_model(rng, 4, 0.2);
  const MixtureModel d = denormalize(m, 3.0);
  CHECK(testgen::max_abs(d.means - 3.0 * m.means) < 1e-15);
  CHECK(testgen::max_abs(d.variances - 9.0 * m.variances) < 1e-15);
  CHECK(d.h == doctest::Approx(27.0 * m.h).epsilon(1e-15));
  CHECK(d.epsilon == doctest::Approx(3.0 * m.epsilon).epsilon(1e-15));
  CHECK(d.priors == m.priors);
  const auto t = denormalize({RigidTransform(Mat3::Identity(), Vec3(1.0, -2.0, 0.5))}, 2.0);
  CHECK(t[0].translation() == Vec3(2.0, -4.0, 1.0));
}

TEST_CASE("mixture summary histogram and threshold") {
  MixtureModel m = MixtureModel::with_uniform_priors(Points::Zero(3, 4), Eigen::Vector4d(1.0, 1.0, 1.0, 10.0),
                                                     0.1, 1.0, 1e-3);
  const MixtureSummary s = MixtureSummary::of(m, 3);
  CHECK(s.components == 4);
  CHECK(s.sigma_counts == std::vector<std::size_t>{3, 0, 1});
  CHECK(s.rejected == std::vector<std::size_t>{3});
  CHECK(s.threshold == 2.0);
}
