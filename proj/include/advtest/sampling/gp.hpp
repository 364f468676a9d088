#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "advtest/error.hpp"

namespace advtest::sampling {

struct KernelConfig {
  std::vector<double> length_scales;  // one per dimension, or a single shared value
  double signal_variance = 1.0;
  double noise = 1e-4;  // observation noise variance
  double prior_mean = 0.0;
};

struct Prediction {
  double mean;
  double variance;
};

/**
 * Exact Gaussian-process regression with a squared-exponential kernel
 *
 *   k(x, x') = s2 * exp(-0.5 * sum_i ((x_i - x'_i) / l_i)^2)
 *
 * and fixed hyperparameters. When the Cholesky factorization of K + noise*I
 * fails, jitter 1e-10, 1e-9, ..., 1e-6 is added to the diagonal in turn.
 * Predicted variances are of the latent function, clamped at zero.
 */
class GpSurrogate {
 public:
  GpSurrogate() = default;

  GpSurrogate(std::vector<std::vector<double>> points, std::vector<double> targets, KernelConfig cfg)
      : cfg_(std::move(cfg)), points_(std::move(points)), targets_(std::move(targets)) {
    fit();
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return dims_; }
  double jitter() const { return jitter_; }
  const KernelConfig& config() const { return cfg_; }

  double kernel(const double* a, const double* b) const {
    double s = 0;
    for (std::size_t i = 0; i < dims_; ++i) {
      const double d = (a[i] - b[i]) / length_scale(i);
      s += d * d;
    }
    return cfg_.signal_variance * std::exp(-0.5 * s);
  }

  Prediction predict(const std::vector<double>& x) const {
    if (x.size() != dims_) throw Error("gp query dimension mismatch");
    const auto n = static_cast<Eigen::Index>(points_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(points_[static_cast<std::size_t>(i)].data(), x.data());
    const double mean = cfg_.prior_mean + ks.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double var = cfg_.signal_variance - v.squaredNorm();
    return {mean, var > 0 ? var : 0.0};
  }

 private:
  double length_scale(std::size_t i) const {
    return cfg_.length_scales.size() == 1 ? cfg_.length_scales.front() : cfg_.length_scales[i];
  }

  void fit() {
    if (points_.empty()) throw Error("gp needs at least one training point");
    if (points_.size() != targets_.size()) throw Error("gp point/target count mismatch");
    dims_ = points_.front().size();
    if (cfg_.length_scales.size() != 1 && cfg_.length_scales.size() != dims_)
      throw Error("gp length scales must be one shared value or one per dimension");
    for (double l : cfg_.length_scales)
      if (!(l > 0) || !std::isfinite(l)) throw Error("gp length scales must be positive");
    if (!(cfg_.signal_variance > 0) || !std::isfinite(cfg_.signal_variance))
      throw Error("gp signal variance must be positive");
    if (!(cfg_.noise >= 0) || !std::isfinite(cfg_.noise)) throw Error("gp noise must be non-negative");
    for (const auto& p : points_) {
      if (p.size() != dims_) throw Error("gp training points differ in dimension");
      for (double c : p)
        if (!std::isfinite(c)) throw Error("gp training point is not finite");
    }
    for (double y : targets_)
      if (!std::isfinite(y)) throw Error("gp target is not finite");

    const auto n = static_cast<Eigen::Index>(points_.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        k(i, j) = k(j, i) =
            kernel(points_[static_cast<std::size_t>(i)].data(), points_[static_cast<std::size_t>(j)].data());
    k.diagonal().array() += cfg_.noise;

    jitter_ = 0;
    llt_.compute(k);
    for (double j = 1e-10; llt_.info() != Eigen::Success && j <= 1.000001e-6; j *= 10) {
      jitter_ = j;
      Eigen::MatrixXd kj = k;
      kj.diagonal().array() += j;
      llt_.compute(kj);
    }
    if (llt_.info() != Eigen::Success) throw Error("gp covariance is not positive definite even with jitter");

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = targets_[static_cast<std::size_t>(i)] - cfg_.prior_mean;
    alpha_ = llt_.solve(y);
  }

  KernelConfig cfg_;
  std::vector<std::vector<double>> points_;
  std::vector<double> targets_;
  std::size_t dims_ = 0;
  double jitter_ = 0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

inline GpSurrogate gp_fit(std::vector<std::vector<double>> points, std::vector<double> scores, KernelConfig cfg) {
  return GpSurrogate(std::move(points), std::move(scores), std::move(cfg));
}

inline Prediction gp_predict(const GpSurrogate& gp, const std::vector<double>& x) { return gp.predict(x); }

}  // namespace advtest::sampling
