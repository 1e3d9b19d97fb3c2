#include <algorithm>
#include <deque>

#include "jrmpc/errors.hpp"
#include "jrmpc/incremental.hpp"
#include "jrmpc/objective.hpp"
#include "jrmpc/outliers.hpp"

namespace jrmpc {

InitConfig prealigned_init() {
  InitConfig cfg;
  cfg.mean_strategy = MeanStrategy::sample_aligned;
  cfg.sigma_scale = 0.02;
  return cfg;
}

BatchConfig prealigned_batch() {
  BatchConfig cfg;
  cfg.fix_variance_iters = 0;
  return cfg;
}

namespace {

struct Group {
  std::vector<std::size_t> frames;
  std::vector<RigidTransform> poses;  // frame -> group model frame
  PointSet mean_set;
  bool flagged = false;
};

Group register_group(const std::vector<PointSet>& sequence, std::size_t begin, std::size_t end,
                     const WindowConfig& cfg,
                     const std::optional<std::vector<RigidTransform>>& provided, double h) {
  Group g;
  std::vector<PointSet> sets;
  std::optional<std::vector<RigidTransform>> init;
  if (provided) init.emplace();
  for (std::size_t f = begin; f < end; ++f) {
    g.frames.push_back(f);
    sets.push_back(sequence[f]);
    sets.back().id = f - begin;
    if (provided) init->push_back((*provided)[f]);
  }
  const InitConfig& ic = provided ? cfg.aligned_front_init : cfg.front_init;
  const BatchConfig& bc = provided ? cfg.aligned_front_batch : cfg.front_batch;
  try {
    const InitialEstimate est = initialize(sets, ic, bc.gamma, h, cfg.epsilon, init);
    const BatchResult res = run_batch(sets, est.transforms, est.model, bc);
    g.poses = res.transforms;
    const ComponentLabels labels = classify_components(res.model);
    g.mean_set = export_scene_model(res.model, labels);
  } catch (const NumericalError&) {
    g.flagged = true;
    g.poses = provided ? *init : std::vector<RigidTransform>(sets.size());
    std::vector<RigidTransform> poses = g.poses;
    g.mean_set = PointSet(0, transformed_union(sets, poses));
  }
  return g;
}

// Batch refinement of the current window; updates poses and rebuilds the state.
void refine_window(const std::vector<PointSet>& means, std::vector<RigidTransform>& back_poses,
                   const std::deque<std::size_t>& window, IncrementalState& state,
                   const WindowConfig& cfg, std::size_t iterations) {
  std::vector<PointSet> sets;
  std::vector<RigidTransform> init;
  for (std::size_t g : window) {
    sets.push_back(means[g]);
    init.push_back(back_poses[g]);
  }
  BatchConfig bc = cfg.back_batch;
  bc.max_iterations = iterations;
  bc.components = 0;
  bc.fix_variance_iters = 0;
  const BatchResult res = run_batch(sets, init, state.model, bc);
  for (std::size_t i = 0; i < window.size(); ++i) back_poses[window[i]] = res.transforms[i];
  IncrementalState rebuilt = IncrementalState::from_history(sets, res.transforms, res.responsibilities,
                                                            res.model, state.rejection_fraction);
  rebuilt.rng = state.rng;
  state = std::move(rebuilt);
}

}  // namespace

WindowedResult run_windowed(const std::vector<PointSet>& sequence, const WindowConfig& cfg,
                            const std::optional<std::vector<RigidTransform>>& provided) {
  if (cfg.front_size < 2) throw ContractViolation("run_windowed: front groups need at least two frames");
  if (cfg.back_size < 2) throw ContractViolation("run_windowed: back-end window needs at least two mean sets");
  if (sequence.size() < cfg.front_size) {
    throw ContractViolation("run_windowed: sequence shorter than one front-end group");
  }
  if (provided && provided->size() != sequence.size()) {
    throw ContractViolation("run_windowed: one provided transform per frame");
  }
  const double h = cfg.h.value_or(sphere_volume(0.5));

  // Front-end: groups share their first frame with the previous group's last.
  std::vector<Group> groups;
  for (std::size_t begin = 0;;) {
    const std::size_t end = std::min(begin + cfg.front_size, sequence.size());
    groups.push_back(register_group(sequence, begin, end, cfg, provided, h));
    if (end == sequence.size()) break;
    begin = end - 1;
  }

  WindowedResult out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].flagged) out.flagged_groups.push_back(g);
    groups[g].mean_set.id = g;
    out.mean_sets.push_back(groups[g].mean_set);
  }

  // Chain initial back-end poses through the shared frames.
  std::vector<RigidTransform> back(groups.size());
  for (std::size_t g = 1; g < groups.size(); ++g) {
    const RigidTransform& prev_shared = groups[g - 1].poses.back();
    const RigidTransform& next_shared = groups[g].poses.front();
    back[g] = back[g - 1] * prev_shared * next_shared.inverse();
  }

  // Bootstrap the back-end model on the first two mean sets.
  const std::size_t boot = std::min<std::size_t>(2, groups.size());
  std::vector<PointSet> boot_sets(out.mean_sets.begin(), out.mean_sets.begin() + static_cast<std::ptrdiff_t>(boot));
  std::vector<RigidTransform> boot_init(back.begin(), back.begin() + static_cast<std::ptrdiff_t>(boot));
  InitConfig back_init = cfg.back_init;
  back_init.mean_strategy = MeanStrategy::sample_aligned;
  back_init.seed = cfg.seed;
  const InitialEstimate est = initialize(boot_sets, back_init, cfg.back_batch.gamma, h, cfg.epsilon, boot_init);
  BatchConfig boot_cfg = cfg.back_batch;
  boot_cfg.max_iterations = cfg.bootstrap_iterations;
  boot_cfg.components = 0;
  const BatchResult boot_res = run_batch(boot_sets, est.transforms, est.model, boot_cfg);
  for (std::size_t g = 0; g < boot; ++g) back[g] = boot_res.transforms[g];

  const double rejection = cfg.rejection_fraction >= 0.0
                               ? cfg.rejection_fraction
                               : 1.0 / static_cast<double>(groups.size());
  IncrementalState state = IncrementalState::from_history(
      boot_sets, boot_res.transforms, boot_res.responsibilities, boot_res.model, rejection, cfg.seed);

  std::deque<std::size_t> window;
  for (std::size_t g = 0; g < boot; ++g) window.push_back(g);
  std::size_t since_refine = 0;
  for (std::size_t g = boot; g < groups.size(); ++g) {
    // Start from the chained pose relative to the (possibly refined) previous group.
    const RigidTransform& prev_shared = groups[g - 1].poses.back();
    const RigidTransform& next_shared = groups[g].poses.front();
    const RigidTransform init = back[g - 1] * prev_shared * next_shared.inverse();
    IntegrateOptions opt;
    opt.iterations = cfg.integrate_iterations;
    opt.recycle = cfg.recycle;
    opt.form = cfg.update_form;
    IntegrationResult res = integrate_set(state, out.mean_sets[g], init, opt);
    back[g] = res.transform;
    state = std::move(res.state);
    out.integrations.push_back(std::move(res.record));

    window.push_back(g);
    while (window.size() > cfg.back_size) window.pop_front();
    if (cfg.refine_every > 0 && ++since_refine >= cfg.refine_every) {
      refine_window(out.mean_sets, back, window, state, cfg, cfg.refine_iterations);
      since_refine = 0;
    }
  }

  // Each frame takes its pose from the first group that contains it.
  out.transforms.assign(sequence.size(), RigidTransform::identity());
  std::vector<bool> assigned(sequence.size(), false);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = 0; i < groups[g].frames.size(); ++i) {
      const std::size_t f = groups[g].frames[i];
      if (assigned[f]) continue;
      out.transforms[f] = back[g] * groups[g].poses[i];
      assigned[f] = true;
    }
  }
  out.model = state.model;
  return out;
}

}  // namespace jrmpc
