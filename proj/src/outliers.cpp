#include "jrmpc/outliers.hpp"

#include <algorithm>

#include "jrmpc/errors.hpp"

namespace jrmpc {

std::size_t ComponentLabels::outlier_count() const {
  return static_cast<std::size_t>(std::count(outlier.begin(), outlier.end(), true));
}

ComponentLabels classify_components(const MixtureModel& model) {
  if (model.size() < 1) throw ContractViolation("classify_components: empty mixture");
  const Eigen::VectorXd& v = model.variances;
  ComponentLabels labels;
  labels.threshold = 2.0 * median(std::vector<double>(v.data(), v.data() + v.size()));
  labels.outlier.resize(model.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    labels.outlier[static_cast<std::size_t>(k)] = v[k] > labels.threshold;
  }
  return labels;
}

PointSet export_scene_model(const MixtureModel& model, const ComponentLabels& labels) {
  if (labels.outlier.size() != model.size()) {
    throw ContractViolation("export_scene_model: labels do not match the mixture");
  }
  const std::size_t kept = model.size() - labels.outlier_count();
  if (kept == 0) throw EmptyModel("every component was rejected as outlier");
  Points pts(3, static_cast<Eigen::Index>(kept));
  Eigen::Index c = 0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    if (!labels.outlier[k]) pts.col(c++) = model.means.col(static_cast<Eigen::Index>(k));
  }
  return PointSet(0, std::move(pts));
}

}  // namespace jrmpc
