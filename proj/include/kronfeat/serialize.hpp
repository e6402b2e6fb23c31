#pragma once

// JSON encodings. Random feature maps are stored by their sampling spec and
// regenerated from the seed; perceptron maps store their weights.

#include "kronfeat/featmap.hpp"
#include "kronfeat/learn.hpp"
#include "kronfeat/stats.hpp"
#include "kronfeat/sweep.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace kronfeat {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json matrix_to_json(const Matrix& m);
/// Throws DataError on malformed input.
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json map_to_json(const FeatureMapModel& m);
FeatureMapModel map_from_json(const nlohmann::json& j);

/// A trained classifier: feature map plus linear SVM, or an exact-kernel SVM.
struct Pipeline {
  Method method = Method::kron_pi;
  std::optional<double> eps;
  std::optional<FeatureMapModel> map;
  std::optional<LinearSvmModel> linear;
  std::optional<KernelSvmModel> kernel;

  /// Predicted labels for descriptor matrices.
  std::vector<std::string> predict(std::span<const Matrix> inputs) const;
};

nlohmann::json pipeline_to_json(const Pipeline& p);
Pipeline pipeline_from_json(const nlohmann::json& j);
void save_pipeline(const Pipeline& p, const std::filesystem::path& path);
/// Throws DataError on unreadable or malformed files.
Pipeline load_pipeline(const std::filesystem::path& path);

nlohmann::json to_json(const CRhoResult& r);
nlohmann::json to_json(const BoundReport& r);
nlohmann::json to_json(const EstimatorStats& s);
nlohmann::json to_json(const McResult& r);

}  // namespace kronfeat
