#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gpsales/data_io.hpp"
#include "gpsales/gp.hpp"
#include "gpsales/transforms.hpp"

namespace gpsales {

enum class TransformKind { Quantile, YeoJohnson, None };

TransformKind transform_kind_from_string(const std::string& s);
const char* to_string(TransformKind kind);

/// One fitted Gaussianizer per feature column plus one for the target.
struct FittedTransforms {
  std::vector<ColumnTransform> feature_transforms;
  ColumnTransform target_transform;
};

/// Fits the chosen transform independently on every column (target included).
FittedTransforms fit_transforms(const Dataset& data, TransformKind kind);

/// Applies the fitted transforms columnwise; the target is transformed when
/// present.
Dataset apply_transforms(const Dataset& data, const FittedTransforms& transforms);

double inverse_target(double y_transformed, const FittedTransforms& transforms);

/// Everything needed to predict from disk: column transforms, the trained GP
/// (over transformed features/targets), and the schema.
struct PipelineModel {
  int version = 1;
  std::uint64_t seed = 42;
  std::vector<std::string> feature_names;
  std::string target_name;
  FittedTransforms transforms;
  GPModel gp;
};

/// Versioned plain-text model file. The Cholesky factor is not stored; the
/// loader recomputes it and verifies the solve vector against a checksum.
void save_model(const PipelineModel& model, const std::string& path);
PipelineModel load_model(const std::string& path);

/// Selects the model's feature columns from `input` by name (extra columns
/// ignored, missing ones are schema errors) and applies the transforms.
Eigen::MatrixXd transform_features(const PipelineModel& model, const Dataset& input);

struct PipelinePrediction {
  Eigen::VectorXd mean_transformed;
  Eigen::VectorXd variance_transformed;
  Eigen::VectorXd mean_original;
};

PipelinePrediction predict_with_model(const PipelineModel& model, const Dataset& input);

}  // namespace gpsales
