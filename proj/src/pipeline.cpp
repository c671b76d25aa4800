#include "gpsales/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gpsales/errors.hpp"

namespace gpsales {

namespace {

constexpr const char* kModelHeader = "gpsales-model v1";

std::vector<double> column_vector(const Eigen::Ref<const Eigen::VectorXd>& col) {
  return {col.data(), col.data() + col.size()};
}

ColumnTransform fit_column(const std::vector<double>& values, TransformKind kind) {
  switch (kind) {
    case TransformKind::Quantile:
      return fit_quantile_transform(values);
    case TransformKind::YeoJohnson:
      return fit_yeo_johnson(values);
    case TransformKind::None:
      return IdentityTransform{};
  }
  throw std::invalid_argument("fit_transforms: unknown transform kind");
}

void write_transform(std::ostream& out, const std::string& tag, const ColumnTransform& t) {
  out << "transform " << tag << " ";
  if (std::holds_alternative<IdentityTransform>(t)) {
    out << "none";
  } else if (const auto* yj = std::get_if<YeoJohnsonTransform>(&t)) {
    out << "yeo-johnson " << format_number(yj->lambda) << " "
        << format_number(yj->fitted_mean) << " " << format_number(yj->fitted_std);
  } else {
    const auto& q = std::get<QuantileMap>(t);
    out << "quantile " << q.n();
    for (double v : q.sorted_reference) out << " " << format_number(v);
  }
  out << "\n";
}

ColumnTransform read_transform(std::istringstream& line, const std::string& path) {
  std::string kind;
  line >> kind;
  if (kind == "none") return IdentityTransform{};
  if (kind == "yeo-johnson") {
    YeoJohnsonTransform yj;
    if (!(line >> yj.lambda >> yj.fitted_mean >> yj.fitted_std))
      throw IoError(path + ": malformed yeo-johnson transform line");
    return yj;
  }
  if (kind == "quantile") {
    std::size_t n = 0;
    if (!(line >> n) || n < 2) throw IoError(path + ": malformed quantile transform line");
    QuantileMap q;
    q.sorted_reference.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      if (!(line >> q.sorted_reference[i]))
        throw IoError(path + ": truncated quantile transform line");
    return q;
  }
  throw IoError(path + ": unknown transform kind '" + kind + "'");
}

std::istringstream next_record(std::istream& in, const std::string& key,
                               const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": unexpected end of model file");
  std::istringstream ss(line);
  std::string head;
  ss >> head;
  if (head != key)
    throw IoError(path + ": expected '" + key + "' record, found '" + head + "'");
  return ss;
}

// remainder of the record, leading whitespace stripped; keeps interior spaces
std::string read_name(std::istringstream& ss, const std::string& path) {
  std::string name;
  std::getline(ss, name);
  const auto b = name.find_first_not_of(" \t");
  if (b == std::string::npos) throw IoError(path + ": empty name in model record");
  return name.substr(b);
}

}  // namespace

TransformKind transform_kind_from_string(const std::string& s) {
  if (s == "quantile") return TransformKind::Quantile;
  if (s == "yeo-johnson") return TransformKind::YeoJohnson;
  if (s == "none") return TransformKind::None;
  throw std::invalid_argument("unknown transform kind '" + s +
                              "' (expected quantile, yeo-johnson, or none)");
}

const char* to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Quantile: return "quantile";
    case TransformKind::YeoJohnson: return "yeo-johnson";
    case TransformKind::None: return "none";
  }
  return "?";
}

FittedTransforms fit_transforms(const Dataset& data, TransformKind kind) {
  if (!data.has_target())
    throw std::invalid_argument("fit_transforms: dataset has no target column");
  FittedTransforms out;
  out.feature_transforms.reserve(static_cast<std::size_t>(data.d()));
  for (Eigen::Index c = 0; c < data.d(); ++c)
    out.feature_transforms.push_back(fit_column(column_vector(data.features.col(c)), kind));
  out.target_transform = fit_column(column_vector(data.target), kind);
  return out;
}

Dataset apply_transforms(const Dataset& data, const FittedTransforms& transforms) {
  if (transforms.feature_transforms.size() != static_cast<std::size_t>(data.d()))
    throw std::invalid_argument("apply_transforms: transform count does not match columns");
  Dataset out = data;
  for (Eigen::Index c = 0; c < data.d(); ++c)
    for (Eigen::Index r = 0; r < data.n(); ++r)
      out.features(r, c) = transform_forward(
          data.features(r, c), transforms.feature_transforms[static_cast<std::size_t>(c)]);
  if (data.has_target())
    for (Eigen::Index r = 0; r < data.n(); ++r)
      out.target(r) = transform_forward(data.target(r), transforms.target_transform);
  return out;
}

double inverse_target(double y_transformed, const FittedTransforms& transforms) {
  return transform_inverse(y_transformed, transforms.target_transform);
}

void save_model(const PipelineModel& model, const std::string& path) {
  if (!model.gp.fitted()) throw std::invalid_argument("save_model: GP not fitted");
  if (model.feature_names.size() != static_cast<std::size_t>(model.gp.X_train.cols()))
    throw std::invalid_argument("save_model: feature name count mismatch");

  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << kModelHeader << "\n";
  out << "seed " << model.seed << "\n";
  out << "target " << model.target_name << "\n";
  out << "noise_variance " << format_number(model.gp.noise_variance) << "\n";
  out << "jitter " << format_number(model.gp.jitter) << "\n";
  out << "y_offset " << format_number(model.gp.y_offset) << "\n";
  out << "features " << model.feature_names.size() << "\n";
  for (std::size_t c = 0; c < model.feature_names.size(); ++c) {
    out << "feature " << c << " " << model.feature_names[c] << "\n";
    write_transform(out, std::to_string(c), model.transforms.feature_transforms[c]);
  }
  write_transform(out, "target", model.transforms.target_transform);

  const KernelSpec& k = model.gp.kernel;
  const char* family = k.family == KernelFamily::RBF      ? "rbf"
                       : k.family == KernelFamily::RQ     ? "rq"
                       : k.family == KernelFamily::Matern ? "matern"
                                                          : "ensemble";
  out << "kernel " << family << "\n";
  out << "variance " << format_number(k.variance) << "\n";
  out << "lengthscale " << format_number(k.lengthscale) << "\n";
  out << "rq_alpha " << format_number(k.rq_alpha) << "\n";
  out << "matern_nu " << format_number(matern_nu_value(k.matern_nu)) << "\n";
  if (k.family == KernelFamily::Ensemble) {
    const EnsembleSpec& e = *k.ensemble;
    out << "ensemble_weights " << format_number(e.weights.w_rbf) << " "
        << format_number(e.weights.w_rq) << " " << format_number(e.weights.w_matern) << "\n";
    out << "ensemble_rbf_lengthscale " << format_number(e.rbf_lengthscale) << "\n";
    out << "ensemble_rq_variance " << format_number(e.rq_variance) << "\n";
    out << "ensemble_rq_lengthscale " << format_number(e.rq_lengthscale) << "\n";
    out << "ensemble_rq_alpha " << format_number(e.rq_alpha) << "\n";
    out << "ensemble_matern_variance " << format_number(e.matern_variance) << "\n";
    out << "ensemble_matern_lengthscale " << format_number(e.matern_lengthscale) << "\n";
    out << "ensemble_matern_nu " << format_number(matern_nu_value(e.matern_nu)) << "\n";
  }

  out << "train " << model.gp.X_train.rows() << " " << model.gp.X_train.cols() << "\n";
  for (Eigen::Index r = 0; r < model.gp.X_train.rows(); ++r) {
    out << "row";
    for (Eigen::Index c = 0; c < model.gp.X_train.cols(); ++c)
      out << " " << format_number(model.gp.X_train(r, c));
    out << "\n";
  }
  out << "y";
  for (Eigen::Index r = 0; r < model.gp.y_train.size(); ++r)
    out << " " << format_number(model.gp.y_train(r));
  out << "\n";
  out << "alpha_checksum " << format_number(model.gp.alpha_vec.sum()) << "\n";
  out << "end\n";
  if (!out) throw IoError("write failed: " + path);
}

PipelineModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw IoError(path + ": empty model file");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kModelHeader)
    throw IoError(path + ": unsupported model file version '" + header + "'");

  PipelineModel model;
  next_record(in, "seed", path) >> model.seed;
  {
    auto ss = next_record(in, "target", path);
    model.target_name = read_name(ss, path);
  }
  next_record(in, "noise_variance", path) >> model.gp.noise_variance;
  next_record(in, "jitter", path) >> model.gp.jitter;
  next_record(in, "y_offset", path) >> model.gp.y_offset;

  std::size_t n_features = 0;
  next_record(in, "features", path) >> n_features;
  if (n_features == 0) throw IoError(path + ": model has no feature columns");
  model.feature_names.resize(n_features);
  model.transforms.feature_transforms.resize(n_features);
  for (std::size_t c = 0; c < n_features; ++c) {
    auto fs = next_record(in, "feature", path);
    std::size_t idx = 0;
    fs >> idx;
    if (idx != c) throw IoError(path + ": feature records out of order");
    model.feature_names[c] = read_name(fs, path);
    auto ts = next_record(in, "transform", path);
    std::string tag;
    ts >> tag;
    model.transforms.feature_transforms[c] = read_transform(ts, path);
  }
  {
    auto ts = next_record(in, "transform", path);
    std::string tag;
    ts >> tag;
    if (tag != "target") throw IoError(path + ": missing target transform record");
    model.transforms.target_transform = read_transform(ts, path);
  }

  KernelSpec spec;
  {
    auto ks = next_record(in, "kernel", path);
    std::string family;
    ks >> family;
    if (family == "rbf") spec.family = KernelFamily::RBF;
    else if (family == "rq") spec.family = KernelFamily::RQ;
    else if (family == "matern") spec.family = KernelFamily::Matern;
    else if (family == "ensemble") spec.family = KernelFamily::Ensemble;
    else throw IoError(path + ": unknown kernel family '" + family + "'");
  }
  next_record(in, "variance", path) >> spec.variance;
  next_record(in, "lengthscale", path) >> spec.lengthscale;
  next_record(in, "rq_alpha", path) >> spec.rq_alpha;
  double nu = 1.5;
  next_record(in, "matern_nu", path) >> nu;
  spec.matern_nu = matern_nu_from_value(nu);
  if (spec.family == KernelFamily::Ensemble) {
    EnsembleSpec e;
    next_record(in, "ensemble_weights", path) >> e.weights.w_rbf >> e.weights.w_rq >>
        e.weights.w_matern;
    next_record(in, "ensemble_rbf_lengthscale", path) >> e.rbf_lengthscale;
    next_record(in, "ensemble_rq_variance", path) >> e.rq_variance;
    next_record(in, "ensemble_rq_lengthscale", path) >> e.rq_lengthscale;
    next_record(in, "ensemble_rq_alpha", path) >> e.rq_alpha;
    next_record(in, "ensemble_matern_variance", path) >> e.matern_variance;
    next_record(in, "ensemble_matern_lengthscale", path) >> e.matern_lengthscale;
    double member_nu = 1.5;
    next_record(in, "ensemble_matern_nu", path) >> member_nu;
    e.matern_nu = matern_nu_from_value(member_nu);
    spec.ensemble = e;
  }
  model.gp.kernel = spec;

  Eigen::Index rows = 0, cols = 0;
  next_record(in, "train", path) >> rows >> cols;
  if (rows < 1 || cols < 1 || cols != static_cast<Eigen::Index>(n_features))
    throw IoError(path + ": malformed training block");
  model.gp.X_train.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    auto rs = next_record(in, "row", path);
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!(rs >> model.gp.X_train(r, c)))
        throw IoError(path + ": truncated training row");
  }
  model.gp.y_train.resize(rows);
  {
    auto ys = next_record(in, "y", path);
    for (Eigen::Index r = 0; r < rows; ++r)
      if (!(ys >> model.gp.y_train(r))) throw IoError(path + ": truncated target vector");
  }
  double checksum = 0.0;
  next_record(in, "alpha_checksum", path) >> checksum;
  next_record(in, "end", path);

  // Recompute the factorization at the stored jitter and verify the solve
  // vector against the checksum.
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw IoError(path + ": invalid kernel spec: " + e.what());
  }
  Eigen::MatrixXd A = gram_matrix(model.gp.X_train, model.gp.X_train, spec);
  A.diagonal().array() += model.gp.noise_variance + model.gp.jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw IoError(path + ": stored model cannot be refactorized");
  model.gp.chol_factor = llt.matrixL();
  model.gp.alpha_vec = llt.solve(model.gp.y_train);
  const double recomputed = model.gp.alpha_vec.sum();
  if (std::abs(recomputed - checksum) > 1e-6 * (1.0 + std::abs(checksum)))
    throw IoError(path + ": alpha checksum mismatch, model file is corrupt");
  return model;
}

Eigen::MatrixXd transform_features(const PipelineModel& model, const Dataset& input) {
  Eigen::MatrixXd out(input.n(), static_cast<Eigen::Index>(model.feature_names.size()));
  for (std::size_t c = 0; c < model.feature_names.size(); ++c) {
    const auto it = std::find(input.feature_names.begin(), input.feature_names.end(),
                              model.feature_names[c]);
    if (it == input.feature_names.end())
      throw IoError("input is missing column '" + model.feature_names[c] +
                    "' required by the model");
    const auto src = static_cast<Eigen::Index>(it - input.feature_names.begin());
    for (Eigen::Index r = 0; r < input.n(); ++r)
      out(r, static_cast<Eigen::Index>(c)) = transform_forward(
          input.features(r, src), model.transforms.feature_transforms[c]);
  }
  return out;
}

PipelinePrediction predict_with_model(const PipelineModel& model, const Dataset& input) {
  const Eigen::MatrixXd X = transform_features(model, input);
  const Prediction p = predict(model.gp, X);
  PipelinePrediction out;
  out.mean_transformed = p.mean;
  out.variance_transformed = p.variance;
  out.mean_original.resize(p.mean.size());
  for (Eigen::Index i = 0; i < p.mean.size(); ++i)
    out.mean_original(i) = inverse_target(p.mean(i), model.transforms);
  return out;
}

}  // namespace gpsales
