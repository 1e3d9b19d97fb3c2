#pragma once

#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

struct ComponentLabels {
  std::vector<bool> outlier;  // one flag per Gaussian component
  double threshold = 0.0;     // T = 2 * median of the variances

  std::size_t outlier_count() const;
};

/// Flags components whose variance exceeds twice the median variance.
ComponentLabels classify_components(const MixtureModel& model);

/// Means of the components labelled inlier. Throws EmptyModel if none remain.
PointSet export_scene_model(const MixtureModel& model, const ComponentLabels& labels);

}  // namespace jrmpc
