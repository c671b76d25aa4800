#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "gpsales/bayes_opt.hpp"
#include "gpsales/data_io.hpp"
#include "gpsales/errors.hpp"
#include "gpsales/evaluation.hpp"
#include "gpsales/gp.hpp"
#include "gpsales/kernels.hpp"
#include "gpsales/pipeline.hpp"
#include "gpsales/transforms.hpp"

namespace {

using namespace gpsales;

constexpr int kTuneBudget = 16;

/// Everything a single invocation needs; filled from flags, defaults match
/// the documented pipeline.
struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string model = "model.gpsales";
  std::string target = "Product_Sold";
  std::string transform = "quantile";
  std::string kernel = "ensemble";
  double nu = 1.5;
  double noise = 1e-4;
  int iterations = 30;
  int initial_designs = 8;
  int folds = 5;
  std::uint64_t seed = 42;
  double test_fraction = 0.0;
  int n = 400;
  double noise_sd = 5.0;
};

KernelFamily family_from_string(const std::string& s) {
  if (s == "rbf") return KernelFamily::RBF;
  if (s == "rq") return KernelFamily::RQ;
  if (s == "matern") return KernelFamily::Matern;
  if (s == "ensemble") return KernelFamily::Ensemble;
  throw std::invalid_argument("unknown kernel '" + s +
                              "' (expected rbf, rq, matern, or ensemble)");
}

std::vector<double> to_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return {v.data(), v.data() + v.size()};
}

void print_metrics(const char* label, const MetricReport& m) {
  std::cout << label << ": mse=" << m.mse << " mae=" << m.mae << " rmse=" << m.rmse
            << " r2=" << m.r2 << " accuracy_pct=" << m.accuracy_pct << "  ["
            << accuracy_definition() << "]\n";
}

/// Metrics of transformed-scale predictions against the dataset, reported on
/// both scales.
void report_both_scales(const Dataset& raw, const Eigen::VectorXd& pred_transformed,
                        const FittedTransforms& transforms,
                        const std::string& prefix = "") {
  Eigen::VectorXd y_t(raw.n());
  for (Eigen::Index i = 0; i < raw.n(); ++i)
    y_t(i) = transform_forward(raw.target(i), transforms.target_transform);
  print_metrics((prefix + "metrics (transformed scale)").c_str(),
                compute_metrics(y_t, pred_transformed));

  Eigen::VectorXd pred_orig(raw.n());
  for (Eigen::Index i = 0; i < raw.n(); ++i)
    pred_orig(i) = inverse_target(pred_transformed(i), transforms);
  print_metrics((prefix + "metrics (original scale)").c_str(),
                compute_metrics(raw.target, pred_orig));
}

void print_skew_table(const Dataset& data, const Dataset* transformed) {
  std::cout << std::left << std::setw(24) << "column" << std::right << std::setw(14)
            << "skewness";
  if (transformed) std::cout << std::setw(14) << "transformed";
  std::cout << "\n";
  auto row = [&](const std::string& name, const std::vector<double>& before,
                 const std::vector<double>* after) {
    try {
      std::cout << std::left << std::setw(24) << name << std::right << std::setw(14)
                << std::setprecision(4) << std::fixed << skewness(before);
      if (after) std::cout << std::setw(14) << skewness(*after);
    } catch (const std::exception& e) {
      std::cout << "\n" << std::defaultfloat << std::setprecision(6);
      throw std::invalid_argument("column '" + name + "': " + e.what());
    }
    std::cout << "\n" << std::defaultfloat << std::setprecision(6);
  };
  for (Eigen::Index c = 0; c < data.d(); ++c) {
    const std::vector<double> before = to_vector(data.features.col(c));
    if (transformed) {
      const std::vector<double> after = to_vector(transformed->features.col(c));
      row(data.feature_names[static_cast<std::size_t>(c)], before, &after);
    } else {
      row(data.feature_names[static_cast<std::size_t>(c)], before, nullptr);
    }
  }
  if (data.has_target()) {
    const std::vector<double> before = to_vector(data.target);
    if (transformed) {
      const std::vector<double> after = to_vector(transformed->target);
      row(data.target_name, before, &after);
    } else {
      row(data.target_name, before, nullptr);
    }
  }
}

KernelSpec build_fit_spec(const RunConfig& cfg, const Dataset& transformed) {
  const KernelFamily family = family_from_string(cfg.kernel);
  const MaternNu nu = matern_nu_from_value(cfg.nu);
  if (family == KernelFamily::Ensemble) {
    EnsembleSpec members = tune_ensemble_members(transformed.features, transformed.target,
                                                 cfg.noise, kTuneBudget, nu, cfg.seed);
    members.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return make_ensemble_spec(members);
  }
  return tune_hyperparameters(transformed.features, transformed.target,
                              default_spec(family, nu), cfg.noise, kTuneBudget, cfg.seed);
}

int run_synth(const RunConfig& cfg) {
  SynthConfig sc;
  sc.n = cfg.n;
  sc.seed = cfg.seed;
  sc.noise_sd = cfg.noise_sd;
  const Dataset data = synth_generate(sc);
  save_csv(data, cfg.output, synth_metadata_line(sc));
  std::cout << "wrote synthetic dataset: " << cfg.output << " (n=" << data.n()
            << ", d=" << data.d() << ")\n";
  return 0;
}

int run_inspect(const RunConfig& cfg) {
  const Dataset data = load_csv(cfg.input, cfg.target);
  print_skew_table(data, nullptr);
  const Eigen::MatrixXd corr = correlation_matrix(data);
  write_correlation_csv(data, corr, cfg.output);
  std::cout << "wrote correlation matrix: " << cfg.output << "\n";
  return 0;
}

int run_transform(const RunConfig& cfg) {
  const Dataset data = load_csv(cfg.input, cfg.target);
  const TransformKind kind = transform_kind_from_string(cfg.transform);
  const FittedTransforms transforms = fit_transforms(data, kind);
  const Dataset transformed = apply_transforms(data, transforms);
  print_skew_table(data, &transformed);
  save_csv(transformed, cfg.output,
           std::string("transform=") + to_string(kind) + " source=" + cfg.input);
  std::cout << "wrote transformed dataset: " << cfg.output << "\n";
  return 0;
}

int run_optimize(const RunConfig& cfg) {
  Dataset data = load_csv(cfg.input, cfg.target);
  Dataset holdout;
  if (cfg.test_fraction > 0.0) {
    auto [train, test] = train_test_split(data, cfg.test_fraction, cfg.seed);
    data = std::move(train);
    holdout = std::move(test);
    std::cout << "holdout split: train=" << data.n() << " test=" << holdout.n() << "\n";
  }
  const TransformKind kind = transform_kind_from_string(cfg.transform);
  const FittedTransforms transforms = fit_transforms(data, kind);
  const Dataset transformed = apply_transforms(data, transforms);

  const MaternNu nu = matern_nu_from_value(cfg.nu);
  const EnsembleSpec members = tune_ensemble_members(
      transformed.features, transformed.target, cfg.noise, kTuneBudget, nu, cfg.seed);
  std::cout << "tuned member kernels:\n"
            << "  rbf: lengthscale=" << members.rbf_lengthscale << "\n"
            << "  rq: variance=" << members.rq_variance
            << " lengthscale=" << members.rq_lengthscale << " alpha=" << members.rq_alpha
            << "\n"
            << "  matern: nu=" << matern_nu_value(members.matern_nu)
            << " variance=" << members.matern_variance
            << " lengthscale=" << members.matern_lengthscale << "\n";

  BOConfig bo;
  bo.iterations = cfg.iterations;
  bo.initial_designs = cfg.initial_designs;
  bo.cv_folds = cfg.folds;
  bo.seed = cfg.seed;
  const BOResult result = optimize_kernel_weight(transformed, members, cfg.noise, bo);
  write_bo_trace_csv(result.state, cfg.output);

  const EnsembleWeights& w = result.best_weights;
  std::cout << "bo: " << bo.initial_designs << " seed points + " << bo.iterations
            << " iterations (pool=" << bo.candidate_pool << ", xi=" << bo.acquisition_xi
            << ", folds=" << bo.cv_folds << ", seed=" << bo.seed << ")\n";
  std::cout << "best weights: w_rbf=" << w.w_rbf << " w_rq=" << w.w_rq
            << " w_matern=" << w.w_matern << " (sum=" << w.w_rbf + w.w_rq + w.w_matern
            << ")\n";
  std::cout << "best score (-rmse, cv): " << result.best_score << "\n";

  EnsembleSpec tuned = members;
  tuned.weights = w;
  const KernelSpec spec = make_ensemble_spec(tuned);

  const FoldPlan plan = canonical_fold_plan(transformed, cfg.folds, cfg.seed);
  const Eigen::VectorXd cv_preds =
      cross_validate_predictions(transformed, spec, cfg.noise, plan);
  print_metrics("cv metrics (transformed scale)",
                compute_metrics(transformed.target, cv_preds));
  Eigen::VectorXd cv_orig(cv_preds.size());
  for (Eigen::Index i = 0; i < cv_preds.size(); ++i)
    cv_orig(i) = inverse_target(cv_preds(i), transforms);
  print_metrics("cv metrics (original scale)", compute_metrics(data.target, cv_orig));

  PipelineModel model;
  model.seed = cfg.seed;
  model.feature_names = data.feature_names;
  model.target_name = data.target_name;
  model.transforms = transforms;
  model.gp = fit(transformed.features, transformed.target, spec, cfg.noise);
  save_model(model, cfg.model);

  if (holdout.n() > 0) {
    const PipelinePrediction p = predict_with_model(model, holdout);
    report_both_scales(holdout, p.mean_transformed, model.transforms, "holdout ");
  }
  std::cout << "wrote bo trace: " << cfg.output << "\n";
  std::cout << "wrote model: " << cfg.model << "\n";
  return 0;
}

int run_fit(const RunConfig& cfg) {
  Dataset data = load_csv(cfg.input, cfg.target);
  Dataset holdout;
  if (cfg.test_fraction > 0.0) {
    auto [train, test] = train_test_split(data, cfg.test_fraction, cfg.seed);
    data = std::move(train);
    holdout = std::move(test);
    std::cout << "holdout split: train=" << data.n() << " test=" << holdout.n() << "\n";
  }
  const TransformKind kind = transform_kind_from_string(cfg.transform);
  const FittedTransforms transforms = fit_transforms(data, kind);
  const Dataset transformed = apply_transforms(data, transforms);

  const KernelSpec spec = build_fit_spec(cfg, transformed);
  PipelineModel model;
  model.seed = cfg.seed;
  model.feature_names = data.feature_names;
  model.target_name = data.target_name;
  model.transforms = transforms;
  model.gp = fit(transformed.features, transformed.target, spec, cfg.noise);
  std::cout << "fitted kernel: " << cfg.kernel
            << " (log marginal likelihood=" << log_marginal_likelihood(model.gp) << ")\n";
  save_model(model, cfg.model);
  std::cout << "wrote model: " << cfg.model << "\n";

  if (holdout.n() > 0) {
    const PipelinePrediction p = predict_with_model(model, holdout);
    report_both_scales(holdout, p.mean_transformed, model.transforms, "holdout ");
  }
  return 0;
}

int run_predict(const RunConfig& cfg) {
  const PipelineModel model = load_model(cfg.model);
  const Dataset input = load_csv_columns(cfg.input);
  const PipelinePrediction p = predict_with_model(model, input);

  std::ofstream out(cfg.output);
  if (!out) throw IoError("cannot write file: " + cfg.output);
  out << "row,mean,variance,mean_original\n";
  for (Eigen::Index i = 0; i < p.mean_transformed.size(); ++i)
    out << i << "," << format_number(p.mean_transformed(i)) << ","
        << format_number(p.variance_transformed(i)) << ","
        << format_number(p.mean_original(i)) << "\n";
  if (!out) throw IoError("write failed: " + cfg.output);
  std::cout << "wrote predictions: " << cfg.output << " (" << p.mean_transformed.size()
            << " rows)\n";
  return 0;
}

int run_evaluate(const RunConfig& cfg) {
  const PipelineModel model = load_model(cfg.model);
  const Dataset data = load_csv(cfg.input, model.target_name);
  const PipelinePrediction p = predict_with_model(model, data);
  report_both_scales(data, p.mean_transformed, model.transforms);

  std::ofstream out(cfg.output);
  if (!out) throw IoError("cannot write file: " + cfg.output);
  out << "row,actual,predicted,variance,actual_transformed,predicted_transformed\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double y_t = transform_forward(data.target(i), model.transforms.target_transform);
    out << i << "," << format_number(data.target(i)) << ","
        << format_number(p.mean_original(i)) << ","
        << format_number(p.variance_transformed(i)) << "," << format_number(y_t) << ","
        << format_number(p.mean_transformed(i)) << "\n";
  }
  if (!out) throw IoError("write failed: " + cfg.output);
  std::cout << "wrote predicted-vs-actual: " << cfg.output << "\n";
  return 0;
}

int run_report(const RunConfig& cfg) {
  const PipelineModel model = load_model(cfg.model);
  std::cout << "model file: " << cfg.model << "\n";
  std::cout << "target: " << model.target_name << "\n";
  std::cout << "seed: " << model.seed << "\n";
  std::cout << "training rows: " << model.gp.X_train.rows() << "\n";
  std::cout << "noise variance: " << model.gp.noise_variance
            << " (jitter=" << model.gp.jitter << ")\n";
  std::cout << "y offset: " << model.gp.y_offset << "\n";
  std::cout << "log marginal likelihood: " << log_marginal_likelihood(model.gp) << "\n";

  for (std::size_t c = 0; c < model.feature_names.size(); ++c) {
    const ColumnTransform& t = model.transforms.feature_transforms[c];
    std::cout << "column " << model.feature_names[c] << ": ";
    if (const auto* yj = std::get_if<YeoJohnsonTransform>(&t))
      std::cout << "yeo-johnson lambda=" << yj->lambda;
    else if (std::holds_alternative<QuantileMap>(t))
      std::cout << "quantile n=" << std::get<QuantileMap>(t).n();
    else
      std::cout << "none";
    std::cout << "\n";
  }

  const KernelSpec& k = model.gp.kernel;
  switch (k.family) {
    case KernelFamily::RBF:
      std::cout << "kernel: rbf lengthscale=" << k.lengthscale << "\n";
      break;
    case KernelFamily::RQ:
      std::cout << "kernel: rq variance=" << k.variance << " lengthscale=" << k.lengthscale
                << " alpha=" << k.rq_alpha << "\n";
      break;
    case KernelFamily::Matern:
      std::cout << "kernel: matern nu=" << matern_nu_value(k.matern_nu)
                << " variance=" << k.variance << " lengthscale=" << k.lengthscale << "\n";
      break;
    case KernelFamily::Ensemble: {
      const EnsembleSpec& e = *k.ensemble;
      std::cout << "kernel: ensemble weights=(" << e.weights.w_rbf << ", " << e.weights.w_rq
                << ", " << e.weights.w_matern << ")\n"
                << "  rbf: lengthscale=" << e.rbf_lengthscale << "\n"
                << "  rq: variance=" << e.rq_variance << " lengthscale=" << e.rq_lengthscale
                << " alpha=" << e.rq_alpha << "\n"
                << "  matern: nu=" << matern_nu_value(e.matern_nu)
                << " variance=" << e.matern_variance
                << " lengthscale=" << e.matern_lengthscale << "\n";
      break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Gaussian process sales forecasting pipeline"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", cfg.seed, "random seed (default 42)");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate the synthetic marketing dataset");
  synth->add_option("--output", cfg.output, "output CSV path")->required();
  synth->add_option("--n", cfg.n, "number of rows (default 400)");
  synth->add_option("--noise-sd", cfg.noise_sd, "target noise standard deviation");
  add_common(synth);

  CLI::App* inspect = app.add_subcommand(
      "inspect", "per-column skewness table and correlation matrix CSV");
  inspect->add_option("--input", cfg.input, "input CSV path")->required();
  inspect->add_option("--target", cfg.target, "target column name");
  inspect->add_option("--output", cfg.output, "correlation CSV path")
      ->default_val("correlation.csv");
  add_common(inspect);

  CLI::App* transform = app.add_subcommand(
      "transform", "fit per-column Gaussianizers and write the transformed dataset");
  transform->add_option("--input", cfg.input, "input CSV path")->required();
  transform->add_option("--target", cfg.target, "target column name");
  transform->add_option("--transform", cfg.transform, "quantile|yeo-johnson|none");
  transform->add_option("--output", cfg.output, "transformed CSV path")->required();
  add_common(transform);

  CLI::App* optimize = app.add_subcommand(
      "optimize", "tune member kernels, optimize ensemble weights, write trace and model");
  optimize->add_option("--input", cfg.input, "input CSV path")->required();
  optimize->add_option("--target", cfg.target, "target column name");
  optimize->add_option("--transform", cfg.transform, "quantile|yeo-johnson|none");
  optimize->add_option("--nu", cfg.nu, "Matern smoothness: 0.5|1.5|2.5");
  optimize->add_option("--noise", cfg.noise, "observation noise variance");
  optimize->add_option("--iterations", cfg.iterations, "optimization iterations");
  optimize->add_option("--initial-designs", cfg.initial_designs, "seed design count");
  optimize->add_option("--folds", cfg.folds, "cross-validation folds");
  optimize->add_option("--test-fraction", cfg.test_fraction, "holdout fraction, 0 = none");
  optimize->add_option("--output", cfg.output, "trace CSV path")->default_val("bo_trace.csv");
  optimize->add_option("--model", cfg.model, "output model path");
  add_common(optimize);

  CLI::App* fit = app.add_subcommand("fit", "fit a single model and write the model file");
  fit->add_option("--input", cfg.input, "input CSV path")->required();
  fit->add_option("--target", cfg.target, "target column name");
  fit->add_option("--transform", cfg.transform, "quantile|yeo-johnson|none");
  fit->add_option("--kernel", cfg.kernel, "rbf|rq|matern|ensemble");
  fit->add_option("--nu", cfg.nu, "Matern smoothness: 0.5|1.5|2.5");
  fit->add_option("--noise", cfg.noise, "observation noise variance");
  fit->add_option("--test-fraction", cfg.test_fraction, "holdout fraction, 0 = none");
  fit->add_option("--model", cfg.model, "output model path");
  add_common(fit);

  CLI::App* predict_cmd = app.add_subcommand("predict", "predict from a saved model");
  predict_cmd->add_option("--model", cfg.model, "model path");
  predict_cmd->add_option("--input", cfg.input, "input CSV path")->required();
  predict_cmd->add_option("--output", cfg.output, "predictions CSV path")
      ->default_val("predictions.csv");
  add_common(predict_cmd);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "metrics on labeled data plus predicted-vs-actual CSV");
  evaluate->add_option("--model", cfg.model, "model path");
  evaluate->add_option("--input", cfg.input, "input CSV path")->required();
  evaluate->add_option("--output", cfg.output, "predicted-vs-actual CSV path")
      ->default_val("predictions_vs_actual.csv");
  add_common(evaluate);

  CLI::App* report = app.add_subcommand("report", "print a saved model summary");
  report->add_option("--model", cfg.model, "model path");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return run_synth(cfg);
    if (*inspect) return run_inspect(cfg);
    if (*transform) return run_transform(cfg);
    if (*optimize) return run_optimize(cfg);
    if (*fit) return run_fit(cfg);
    if (*predict_cmd) return run_predict(cfg);
    if (*evaluate) return run_evaluate(cfg);
    if (*report) return run_report(cfg);
  } catch (const gpsales::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
