// Acceptance suite: each criterion prints one PASS/FAIL line with its
// measured tolerance and runtime. The binary exits nonzero when anything
// fails.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gpsales/bayes_opt.hpp"
#include "gpsales/data_io.hpp"
#include "gpsales/evaluation.hpp"
#include "gpsales/gp.hpp"
#include "gpsales/kernels.hpp"
#include "gpsales/pipeline.hpp"
#include "gpsales/rng.hpp"
#include "gpsales/transforms.hpp"
#include "oracles.hpp"

#ifndef GPSALES_CLI_PATH
#error "GPSALES_CLI_PATH must point at the built CLI binary"
#endif

namespace {

using namespace gpsales;
using Clock = std::chrono::steady_clock;

struct Criterion {
  std::vector<std::string> problems;
  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
};

int g_failures = 0;

void run_criterion(int number, const std::string& name, double time_limit_s,
                   const std::function<void(Criterion&)>& body) {
  Criterion c;
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.problems.push_back(std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  if (time_limit_s > 0.0 && elapsed > time_limit_s) {
    std::ostringstream msg;
    msg << "runtime " << elapsed << "s exceeds " << time_limit_s << "s";
    c.problems.push_back(msg.str());
  }
  if (c.problems.empty()) {
    if (time_limit_s > 0.0)
      std::printf("[PASS] criterion %d: %s (%.2fs < %.0fs)\n", number, name.c_str(), elapsed,
                  time_limit_s);
    else
      std::printf("[PASS] criterion %d: %s (%.2fs)\n", number, name.c_str(), elapsed);
  } else {
    ++g_failures;
    std::printf("[FAIL] criterion %d: %s (%.2fs)\n", number, name.c_str(), elapsed);
    for (const auto& p : c.problems) std::printf("       - %s\n", p.c_str());
  }
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------- helpers

Eigen::MatrixXd random_points(int n, int d, std::uint64_t seed, double spread = 3.0) {
  std::mt19937_64 eng(seed);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = spread * normal01(eng);
  return X;
}

Eigen::VectorXd random_targets(int n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = normal01(eng);
  return y;
}

EnsembleWeights random_simplex(std::mt19937_64& eng) {
  const double e1 = exponential1(eng), e2 = exponential1(eng), e3 = exponential1(eng);
  const double s = e1 + e2 + e3;
  return {e1 / s, e2 / s, e3 / s};
}

double stub_objective(const EnsembleWeights& w) {
  const double d1 = w.w_rbf - 0.6, d2 = w.w_rq - 0.3, d3 = w.w_matern - 0.1;
  return -(d1 * d1 + d2 * d2 + d3 * d3);
}

// ------------------------------------------------------------- criteria

void criterion_transforms(Criterion& c) {
  // quantile transform of 1000 seeded exponential draws
  std::mt19937_64 eng(4242);
  std::vector<double> exp_sample(1000);
  for (auto& v : exp_sample) v = exponential1(eng);
  const QuantileMap map = fit_quantile_transform(exp_sample);
  std::vector<double> transformed(exp_sample.size());
  for (std::size_t i = 0; i < exp_sample.size(); ++i)
    transformed[i] = quantile_forward(exp_sample[i], map);
  const double q_skew = std::abs(skewness(transformed));
  c.require(q_skew < 0.05, "quantile |skewness| = " + fmt(q_skew) + " (need < 0.05)");

  // Yeo-Johnson MLE on seeded lognormal data
  std::vector<double> lognormal(1000);
  for (auto& v : lognormal) v = std::exp(normal01(eng));
  const double before = std::abs(skewness(lognormal));
  const YeoJohnsonTransform t = fit_yeo_johnson(lognormal);
  std::vector<double> yj(lognormal.size());
  for (std::size_t i = 0; i < lognormal.size(); ++i)
    yj[i] = yeo_johnson_forward(lognormal[i], t.lambda);
  const double after = std::abs(skewness(yj));
  c.require(after <= 0.2 * before, "yeo-johnson skew reduction " +
                                       fmt(100.0 * (1.0 - after / before)) +
                                       "% (need >= 80%): " + fmt(before) + " -> " +
                                       fmt(after));
}

void criterion_gp(Criterion& c) {
  EnsembleSpec members;
  members.weights = {0.68, 0.21, 0.11};
  members.rbf_lengthscale = 1.2;
  members.rq_variance = 0.8;
  members.matern_lengthscale = 0.9;
  const std::vector<std::pair<std::string, KernelSpec>> specs = {
      {"rbf", default_spec(KernelFamily::RBF)},
      {"rq", default_spec(KernelFamily::RQ)},
      {"matern12", default_spec(KernelFamily::Matern, MaternNu::half)},
      {"matern32", default_spec(KernelFamily::Matern, MaternNu::three_halves)},
      {"matern52", default_spec(KernelFamily::Matern, MaternNu::five_halves)},
      {"ensemble", make_ensemble_spec(members)}};

  int salt = 0;
  for (const auto& [name, spec] : specs) {
    for (int n : {5, 20, 50}) {
      const Eigen::MatrixXd X = random_points(n, 2, 100 + salt, 4.0);
      const Eigen::VectorXd y = random_targets(n, 200 + salt);
      ++salt;
      const GPModel model = fit(X, y, spec, 1e-4);
      const Eigen::MatrixXd X_star = random_points(8, 2, 300 + salt, 4.0);
      const Prediction p = predict(model, X_star);

      // dense-inverse oracle
      Eigen::MatrixXd A = gram_matrix(X, X, spec);
      A.diagonal().array() += model.noise_variance + model.jitter;
      const Eigen::MatrixXd A_inv = oracle::gauss_jordan_inverse(A);
      const Eigen::MatrixXd K_star = gram_matrix(X_star, X, spec);
      const Eigen::VectorXd mean_ref =
          (K_star * A_inv * model.y_train).array() + model.y_offset;
      const double prior = kernel_diag_value(spec);
      double max_mean_err = (p.mean - mean_ref).cwiseAbs().maxCoeff();
      double max_var_err = 0.0;
      for (Eigen::Index i = 0; i < X_star.rows(); ++i) {
        const Eigen::VectorXd k = K_star.row(i).transpose();
        const double var_ref = std::max(0.0, prior - k.dot(A_inv * k));
        max_var_err = std::max(max_var_err, std::abs(p.variance(i) - var_ref));
      }
      c.require(max_mean_err <= 1e-8, name + " n=" + std::to_string(n) +
                                          ": mean error vs dense oracle " +
                                          fmt(max_mean_err));
      c.require(max_var_err <= 1e-8, name + " n=" + std::to_string(n) +
                                         ": variance error vs dense oracle " +
                                         fmt(max_var_err));
    }
  }

  // noiseless interpolation on a well-separated grid
  Eigen::MatrixXd X(100, 2);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      X(i * 10 + j, 0) = i;
      X(i * 10 + j, 1) = j;
    }
  const Eigen::VectorXd y =
      (X.col(0).array() * 0.3 + (X.col(1).array() * 0.7).sin()).matrix();
  const GPModel interp = fit(X, y, default_spec(KernelFamily::RBF), 0.0);
  const double max_err = (predict(interp, X).mean - y).cwiseAbs().maxCoeff();
  c.require(max_err <= 1e-5, "noiseless interpolation error " + fmt(max_err));
}

void criterion_kernels(Criterion& c) {
  std::mt19937_64 eng(555);
  double worst_eig = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(eng() % 6);
    const Eigen::MatrixXd X = random_points(30, d, 900 + trial);
    KernelSpec spec;
    switch (trial % 4) {
      case 0:
        spec = default_spec(KernelFamily::RBF);
        spec.lengthscale = 0.2 + 4.0 * uniform01(eng);
        break;
      case 1:
        spec = default_spec(KernelFamily::RQ);
        spec.variance = 0.2 + 4.0 * uniform01(eng);
        spec.lengthscale = 0.2 + 4.0 * uniform01(eng);
        spec.rq_alpha = 0.2 + 4.0 * uniform01(eng);
        break;
      case 2: {
        const MaternNu nus[] = {MaternNu::half, MaternNu::three_halves,
                                MaternNu::five_halves};
        spec = default_spec(KernelFamily::Matern, nus[trial % 3]);
        spec.variance = 0.2 + 4.0 * uniform01(eng);
        spec.lengthscale = 0.2 + 4.0 * uniform01(eng);
        break;
      }
      default: {
        EnsembleSpec members;
        members.weights = random_simplex(eng);
        members.rbf_lengthscale = 0.2 + 4.0 * uniform01(eng);
        members.rq_variance = 0.2 + 4.0 * uniform01(eng);
        members.rq_lengthscale = 0.2 + 4.0 * uniform01(eng);
        members.rq_alpha = 0.2 + 4.0 * uniform01(eng);
        members.matern_variance = 0.2 + 4.0 * uniform01(eng);
        members.matern_lengthscale = 0.2 + 4.0 * uniform01(eng);
        spec = make_ensemble_spec(members);
      }
    }
    const Eigen::MatrixXd K = gram_matrix(X, X, spec);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
  }
  c.require(worst_eig >= -1e-8,
            "min gram eigenvalue over 200 configs = " + fmt(worst_eig));

  // Matern 1/2 equals the exponential form to machine precision
  double worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd X = random_points(2, 3, 5000 + trial);
    const Eigen::VectorXd a = X.row(0), b = X.row(1);
    const double variance = 0.3 + 3.0 * uniform01(eng);
    const double l = 0.3 + 3.0 * uniform01(eng);
    const double d = (a - b).norm();
    const double direct = variance * std::exp(-d / l);
    const double kernel = k_matern(a, b, variance, l, MaternNu::half);
    worst_rel = std::max(worst_rel, std::abs(kernel - direct) / std::abs(direct));
  }
  c.require(worst_rel <= 1e-15, "matern 1/2 vs exponential relative error " + fmt(worst_rel));

  // RQ at alpha = 1e6 matches RBF within 1e-4 relative
  double worst_rq = 0.0;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(1);
  for (double d = 0.0; d <= 5.0; d += 0.1) {
    Eigen::VectorXd q(1);
    q << d;
    const double variance = 1.6, l = 1.0;
    const double rq = k_rq(origin, q, variance, l, 1e6);
    const double rbf = variance * k_rbf(origin, q, l);
    worst_rq = std::max(worst_rq, std::abs(rq - rbf) / std::abs(rbf));
  }
  c.require(worst_rq <= 1e-4, "rq(alpha=1e6) vs rbf relative error " + fmt(worst_rq));
}

void criterion_bo(Criterion& c) {
  BOConfig config;
  config.iterations = 32;
  config.initial_designs = 8;  // 40 evaluations total
  config.seed = 42;
  const BOResult canonical = optimize_weights(stub_objective, config);
  const double linf = std::max({std::abs(canonical.best_weights.w_rbf - 0.6),
                                std::abs(canonical.best_weights.w_rq - 0.3),
                                std::abs(canonical.best_weights.w_matern - 0.1)});
  c.require(linf <= 0.08, "stub objective l_inf error after 40 evaluations = " + fmt(linf));

  int wins = 0;
  for (int t = 1; t <= 50; ++t) {
    config.seed = static_cast<std::uint64_t>(t);
    const BOResult bo = optimize_weights(stub_objective, config);
    std::mt19937_64 eng(static_cast<std::uint64_t>(70000 + t));
    double rs_best = -1e300;
    for (int i = 0; i < 40; ++i)
      rs_best = std::max(rs_best, stub_objective(random_simplex(eng)));
    if (bo.best_score >= rs_best) ++wins;
  }
  c.require(wins >= 35, "bo beat random search in " + std::to_string(wins) +
                            "/50 seeded trials (need >= 35)");
}

void criterion_ensemble(Criterion& c) {
  SynthConfig synth;
  synth.n = 400;
  synth.seed = 42;
  const Dataset raw = synth_generate(synth);
  const FittedTransforms transforms = fit_transforms(raw, TransformKind::Quantile);
  const Dataset data = apply_transforms(raw, transforms);
  const double noise = 1e-4;

  const EnsembleSpec members = tune_ensemble_members(data.features, data.target, noise, 16,
                                                     MaternNu::three_halves, 42);

  KernelSpec rbf = default_spec(KernelFamily::RBF);
  rbf.lengthscale = members.rbf_lengthscale;
  KernelSpec rq = default_spec(KernelFamily::RQ);
  rq.variance = members.rq_variance;
  rq.lengthscale = members.rq_lengthscale;
  rq.rq_alpha = members.rq_alpha;
  KernelSpec matern = default_spec(KernelFamily::Matern, members.matern_nu);
  matern.variance = members.matern_variance;
  matern.lengthscale = members.matern_lengthscale;

  const FoldPlan plan = canonical_fold_plan(data, 5, 42);
  const double r2_rbf = cross_validate(data, rbf, noise, plan).r2;
  const double r2_rq = cross_validate(data, rq, noise, plan).r2;
  const double r2_matern = cross_validate(data, matern, noise, plan).r2;
  const double best_individual = std::max({r2_rbf, r2_rq, r2_matern});

  BOConfig config;
  config.iterations = 30;
  config.initial_designs = 8;
  config.cv_folds = 5;
  config.seed = 42;
  const BOResult result = optimize_kernel_weight(data, members, noise, config);
  EnsembleSpec tuned = members;
  tuned.weights = result.best_weights;
  const double r2_ensemble =
      cross_validate(data, make_ensemble_spec(tuned), noise, plan).r2;

  std::printf("       ensemble r2=%.5f vs rbf=%.5f rq=%.5f matern=%.5f (weights %.3f/%.3f/%.3f)\n",
              r2_ensemble, r2_rbf, r2_rq, r2_matern, result.best_weights.w_rbf,
              result.best_weights.w_rq, result.best_weights.w_matern);
  c.require(r2_ensemble >= best_individual - 0.005,
            "ensemble cv r2 " + fmt(r2_ensemble) + " < best individual " +
                fmt(best_individual) + " - 0.005");
}

int run_cli(const std::string& args, const std::string& stdout_path) {
  const std::string cmd =
      std::string(GPSALES_CLI_PATH) + " " + args + " >" + stdout_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_determinism(Criterion& c) {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("gpsales_acc_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto file = [&](const char* name) { return (dir / name).string(); };

  c.require(run_cli("synth --output " + file("d.csv") + " --n 120 --seed 11",
                    file("synth.out")) == 0,
            "synth failed");
  const std::string common = "optimize --input " + file("d.csv") +
                             " --target Product_Sold --iterations 5 --initial-designs 4"
                             " --folds 3 --seed 42";
  c.require(run_cli(common + " --output " + file("t1.csv") + " --model " + file("m1.bin"),
                    file("r1.out")) == 0,
            "first optimize run failed");
  c.require(run_cli(common + " --output " + file("t2.csv") + " --model " + file("m2.bin"),
                    file("r2.out")) == 0,
            "second optimize run failed");

  c.require(slurp(file("t1.csv")) == slurp(file("t2.csv")), "trace files differ");
  c.require(slurp(file("m1.bin")) == slurp(file("m2.bin")), "model files differ");
  // stdout reports mention the (different) output paths; compare after
  // stripping the two "wrote ..." lines
  auto strip_paths = [](std::string text) {
    std::istringstream in(text);
    std::string line, kept;
    while (std::getline(in, line))
      if (line.rfind("wrote ", 0) != 0) kept += line + "\n";
    return kept;
  };
  c.require(strip_paths(slurp(file("r1.out"))) == strip_paths(slurp(file("r2.out"))),
            "metric reports differ");
  fs::remove_all(dir);
}

void criterion_metrics(Criterion& c) {
  Eigen::VectorXd y(3), pred(3);
  y << 0.0, 1.0, 2.0;
  pred << 0.0, 1.0, 3.0;
  const MetricReport m = compute_metrics(y, pred);
  c.require(m.mse == 1.0 / 3.0, "hand example mse = " + fmt(m.mse) + " (need exactly 1/3)");
  c.require(m.r2 == 0.5, "hand example r2 = " + fmt(m.r2) + " (need exactly 0.5)");

  std::mt19937_64 eng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + static_cast<int>(eng() % 100);
    Eigen::VectorXd yt(n), yp(n);
    for (int i = 0; i < n; ++i) {
      yt(i) = 10.0 * normal01(eng);
      yp(i) = yt(i) + normal01(eng);
    }
    const MetricReport r = compute_metrics(yt, yp);
    worst = std::max(worst, std::abs(r.rmse * r.rmse - r.mse) / std::max(1.0, r.mse));
  }
  c.require(worst <= 1e-12, "rmse^2 vs mse relative error " + fmt(worst));
}

}  // namespace

int main() {
  std::printf("gpsales acceptance suite\n");
  run_criterion(1, "transform efficacy", 1.0, criterion_transforms);
  run_criterion(2, "gp correctness vs dense oracle", 5.0, criterion_gp);
  run_criterion(3, "kernel validity", 10.0, criterion_kernels);
  run_criterion(4, "bayesian optimization effectiveness", 30.0, criterion_bo);
  run_criterion(5, "ensemble non-inferiority", 120.0, criterion_ensemble);
  run_criterion(6, "end-to-end determinism", 0.0, criterion_determinism);
  run_criterion(7, "metric definitions", 0.0, criterion_metrics);
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", g_failures);
  return 1;
}
