// Copyright 2026 The t2imt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reference.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

#include "t2imt/error.hpp"

namespace t2imt::reference {

GaussianSummary summarize(const Mat& x) {
  const size_t n = x.rows, d = x.cols;
  GaussianSummary out;
  out.mean.assign(d, 0.0);
  out.cov = Mat(d, d);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) out.mean[j] += x.at(i, j);
  for (size_t j = 0; j < d; ++j) out.mean[j] /= static_cast<double>(n);
  for (size_t j = 0; j < d; ++j) {
    for (size_t k = 0; k < d; ++k) {
      double acc = 0.0;
      for (size_t i = 0; i < n; ++i)
        acc += (x.at(i, j) - out.mean[j]) * (x.at(i, k) - out.mean[k]);
      out.cov.at(j, k) = acc / static_cast<double>(n - 1);
    }
  }
  // symmetrize
  for (size_t j = 0; j < d; ++j)
    for (size_t k = j + 1; k < d; ++k) {
      double v = 0.5 * (out.cov.at(j, k) + out.cov.at(k, j));
      out.cov.at(j, k) = v;
      out.cov.at(k, j) = v;
    }
  return out;
}

double frechet_distance(const GaussianSummary& real, const GaussianSummary& gen) {
  const size_t d = real.dim();
  if (gen.dim() != d) raise(ErrorCode::kDimensionMismatch, "summary dims differ");

  double mean_sq = 0.0;
  for (size_t i = 0; i < d; ++i) {
    double diff = real.mean[i] - gen.mean[i];
    mean_sq += diff * diff;
  }

  Eigen::MatrixXd sr(d, d), sg(d, d);
  for (size_t j = 0; j < d; ++j)
    for (size_t k = 0; k < d; ++k) {
      sr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = real.cov.at(j, k);
      sg(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = gen.cov.at(j, k);
    }

  // Principal square root of the PSD product: eigenvalues have nonnegative
  // real part, so sqrt of the (generally complex) spectrum is well defined.
  Eigen::MatrixXd product = sr * sg;
  Eigen::EigenSolver<Eigen::MatrixXd> eig(product);
  if (eig.info() != Eigen::Success)
    raise(ErrorCode::kEigDecompositionFailure, "product eigendecomposition");
  Eigen::VectorXcd sqrt_vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < sqrt_vals.size(); ++i) sqrt_vals(i) = std::sqrt(sqrt_vals(i));
  Eigen::MatrixXcd v = eig.eigenvectors();
  Eigen::MatrixXcd sqrt_product = v * sqrt_vals.asDiagonal() * v.inverse();
  double trace_sqrt = sqrt_product.trace().real();

  return mean_sq + sr.trace() + sg.trace() - 2.0 * trace_sqrt;
}

Mat temperature_scale(const Mat& logits, double temperature) {
  Mat probs(logits.rows, logits.cols);
  for (size_t r = 0; r < logits.rows; ++r) {
    double mx = logits.at(r, 0) / temperature;
    for (size_t c = 1; c < logits.cols; ++c) mx = std::max(mx, logits.at(r, c) / temperature);
    double sum = 0.0;
    for (size_t c = 0; c < logits.cols; ++c) {
      probs.at(r, c) = std::exp(logits.at(r, c) / temperature - mx);
      sum += probs.at(r, c);
    }
    for (size_t c = 0; c < logits.cols; ++c) probs.at(r, c) /= sum;
  }
  return probs;
}

double mean_nll(const Mat& logits, std::span<const int> labels, double temperature) {
  Mat probs = temperature_scale(logits, temperature);
  double acc = 0.0;
  for (size_t r = 0; r < logits.rows; ++r)
    acc += -std::log(probs.at(r, static_cast<size_t>(labels[r])));
  return acc / static_cast<double>(logits.rows);
}

TemperatureFit fit_temperature(const Mat& logits, std::span<const int> labels, double grid_lo,
                               double grid_hi, double grid_step) {
  TemperatureFit best{0.0, 0.0};
  bool first = true;
  const int steps = static_cast<int>(std::floor((grid_hi - grid_lo) / grid_step + 0.5)) + 1;
  for (int g = 0; g < steps; ++g) {
    double t = grid_lo + g * grid_step;
    double nll = mean_nll(logits, labels, t);
    if (first || nll < best.nll) {
      best = {t, nll};
      first = false;
    }
  }
  return best;
}

SplitScore inception_score(const Mat& probs, int splits) {
  const size_t base = probs.rows / static_cast<size_t>(splits);
  std::vector<double> scores;
  for (int s = 0; s < splits; ++s) {
    size_t lo = static_cast<size_t>(s) * base;
    size_t hi = (s == splits - 1) ? probs.rows : lo + base;
    std::vector<double> marginal(probs.cols, 0.0);
    for (size_t r = lo; r < hi; ++r)
      for (size_t c = 0; c < probs.cols; ++c) marginal[c] += probs.at(r, c);
    for (size_t c = 0; c < probs.cols; ++c) marginal[c] /= static_cast<double>(hi - lo);
    double mean_kl = 0.0;
    for (size_t r = lo; r < hi; ++r) {
      double kl = 0.0;
      for (size_t c = 0; c < probs.cols; ++c) {
        double p = probs.at(r, c);
        if (p > 0.0) kl += p * (std::log(p) - std::log(marginal[c]));
      }
      mean_kl += kl;
    }
    mean_kl /= static_cast<double>(hi - lo);
    scores.push_back(std::exp(mean_kl));
  }
  double mean = 0.0;
  for (double v : scores) mean += v;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double v : scores) var += (v - mean) * (v - mean);
  var /= static_cast<double>(scores.size());
  return {mean, std::sqrt(var)};
}

double r_precision(const Mat& sims) {
  size_t hits = 0;
  for (size_t r = 0; r < sims.rows; ++r) {
    bool success = true;
    for (size_t c = 1; c < sims.cols; ++c) {
      if (sims.at(r, c) >= sims.at(r, 0)) {
        success = false;
        break;
      }
    }
    if (success) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(sims.rows);
}

}  // namespace t2imt::reference
