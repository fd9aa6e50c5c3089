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

#include "t2imt/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "t2imt/error.hpp"

namespace t2imt {

namespace {

constexpr double kNegativeEigenTolerance = 1e-6;

Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
  for (size_t r = 0; r < m.rows; ++r)
    for (size_t c = 0; c < m.cols; ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m.at(r, c);
  return out;
}

// Symmetric PSD square root via eigendecomposition, eigenvalues clamped at 0.
// Eigenvalues below -tolerance throw.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sym, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success)
    raise(ErrorCode::kEigDecompositionFailure, std::string("eigendecomposition of ") + what);
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -kNegativeEigenTolerance)
      raise(ErrorCode::kEigDecompositionFailure,
            std::string(what) + " has eigenvalue " + std::to_string(lambda(i)));
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

FeatureSet FeatureSet::from(Mat m, FeatureSource source) {
  if (m.rows < 2)
    raise(ErrorCode::kTooFewSamples, "need >= 2 feature rows, got " + std::to_string(m.rows));
  if (!m.all_finite()) raise(ErrorCode::kNonFiniteInput, "feature matrix has non-finite values");
  return {std::move(m), source};
}

FeatureSet FeatureSet::load(const std::filesystem::path& path, FeatureSource source) {
  return from(load_matrix(path), source);
}

LogitSet LogitSet::from(Mat m) {
  if (m.cols < 2)
    raise(ErrorCode::kInvalidInput, "need >= 2 logit classes, got " + std::to_string(m.cols));
  if (m.rows == 0) raise(ErrorCode::kInvalidInput, "empty logit matrix");
  if (!m.all_finite()) raise(ErrorCode::kNonFiniteInput, "logit matrix has non-finite values");
  return {std::move(m)};
}

LogitSet LogitSet::load(const std::filesystem::path& path) { return from(load_matrix(path)); }

GaussianSummary summarize(const FeatureSet& features) {
  const Mat& x = features.matrix;
  const size_t n = x.rows, d = x.cols;
  GaussianSummary out;
  out.mean.assign(d, 0.0);
  out.cov = Mat(d, d);

#pragma omp parallel for schedule(static)
  for (long long jj = 0; jj < static_cast<long long>(d); ++jj) {
    const size_t j = static_cast<size_t>(jj);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) sum += x.at(i, j);
    out.mean[j] = sum / static_cast<double>(n);
  }

  // Upper triangle only; each entry is a serial sum over samples.
#pragma omp parallel for schedule(dynamic, 1)
  for (long long jj = 0; jj < static_cast<long long>(d); ++jj) {
    const size_t j = static_cast<size_t>(jj);
    for (size_t k = j; k < d; ++k) {
      double acc = 0.0;
      for (size_t i = 0; i < n; ++i)
        acc += (x.at(i, j) - out.mean[j]) * (x.at(i, k) - out.mean[k]);
      double v = acc / static_cast<double>(n - 1);
      out.cov.at(j, k) = v;
      out.cov.at(k, j) = v;
    }
  }
  return out;
}

double frechet_distance(const GaussianSummary& real, const GaussianSummary& gen) {
  const size_t d = real.dim();
  if (d == 0 || gen.dim() != d)
    raise(ErrorCode::kDimensionMismatch, "summaries have dims " + std::to_string(d) + " and " +
                                             std::to_string(gen.dim()));

  double mean_sq = 0.0;
  for (size_t i = 0; i < d; ++i) {
    double diff = real.mean[i] - gen.mean[i];
    mean_sq += diff * diff;
  }

  Eigen::MatrixXd sr = to_eigen(real.cov);
  Eigen::MatrixXd sg = to_eigen(gen.cov);
  sr = 0.5 * (sr + sr.transpose().eval());
  sg = 0.5 * (sg + sg.transpose().eval());

  Eigen::MatrixXd sr_half = psd_sqrt(sr, "real covariance");
  Eigen::MatrixXd inner = sr_half * sg * sr_half;
  inner = 0.5 * (inner + inner.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner);
  if (eig.info() != Eigen::Success)
    raise(ErrorCode::kEigDecompositionFailure, "eigendecomposition of cross term");
  double trace_sqrt = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    double lambda = eig.eigenvalues()(i);
    if (lambda < -kNegativeEigenTolerance)
      raise(ErrorCode::kEigDecompositionFailure,
            "cross term eigenvalue " + std::to_string(lambda));
    trace_sqrt += std::sqrt(std::max(lambda, 0.0));
  }

  double value = mean_sq + sr.trace() + sg.trace() - 2.0 * trace_sqrt;
  if (value < -kNegativeEigenTolerance)
    raise(ErrorCode::kEigDecompositionFailure, "distance " + std::to_string(value) + " < -1e-6");
  return std::max(value, 0.0);
}

Mat temperature_scale(const LogitSet& logits, double temperature) {
  if (!(temperature > 0.0))
    raise(ErrorCode::kNonPositiveTemperature, "temperature " + std::to_string(temperature));
  const Mat& z = logits.matrix;
  Mat probs(z.rows, z.cols);

#pragma omp parallel for schedule(static)
  for (long long rr = 0; rr < static_cast<long long>(z.rows); ++rr) {
    const size_t r = static_cast<size_t>(rr);
    const double* in = z.row(r);
    double* out = probs.row(r);
    double mx = in[0] / temperature;
    for (size_t c = 1; c < z.cols; ++c) mx = std::max(mx, in[c] / temperature);
    double sum = 0.0;
    for (size_t c = 0; c < z.cols; ++c) {
      out[c] = std::exp(in[c] / temperature - mx);
      sum += out[c];
    }
    for (size_t c = 0; c < z.cols; ++c) out[c] /= sum;
  }
  return probs;
}

namespace {

// Mean NLL of labels under softmax(logits / T), via log-sum-exp.
double mean_nll(const Mat& z, std::span<const int> labels, double temperature) {
  std::vector<double> per_row(z.rows);
#pragma omp parallel for schedule(static)
  for (long long rr = 0; rr < static_cast<long long>(z.rows); ++rr) {
    const size_t r = static_cast<size_t>(rr);
    const double* in = z.row(r);
    double mx = in[0] / temperature;
    for (size_t c = 1; c < z.cols; ++c) mx = std::max(mx, in[c] / temperature);
    double sum = 0.0;
    for (size_t c = 0; c < z.cols; ++c) sum += std::exp(in[c] / temperature - mx);
    double log_z = mx + std::log(sum);
    per_row[r] = log_z - in[static_cast<size_t>(labels[r])] / temperature;
  }
  double acc = 0.0;
  for (double v : per_row) acc += v;
  return acc / static_cast<double>(z.rows);
}

}  // namespace

TemperatureFit fit_temperature(const LogitSet& logits, std::span<const int> labels,
                               double grid_lo, double grid_hi, double grid_step) {
  const Mat& z = logits.matrix;
  if (labels.size() != z.rows)
    raise(ErrorCode::kDimensionMismatch, "labels/logits row mismatch");
  for (int y : labels)
    if (y < 0 || static_cast<size_t>(y) >= z.cols)
      raise(ErrorCode::kInvalidInput, "label " + std::to_string(y) + " out of range");
  if (!(grid_lo > 0) || grid_hi < grid_lo || !(grid_step > 0))
    raise(ErrorCode::kInvalidInput, "bad temperature grid");

  const int steps = static_cast<int>(std::floor((grid_hi - grid_lo) / grid_step + 0.5)) + 1;
  std::vector<double> nlls(static_cast<size_t>(steps));
#pragma omp parallel for schedule(dynamic)
  for (int g = 0; g < steps; ++g) {
    nlls[static_cast<size_t>(g)] = mean_nll(z, labels, grid_lo + g * grid_step);
  }
  int best = 0;
  for (int g = 1; g < steps; ++g)
    if (nlls[static_cast<size_t>(g)] < nlls[static_cast<size_t>(best)]) best = g;
  return {grid_lo + best * grid_step, nlls[static_cast<size_t>(best)]};
}

namespace {

double split_score(const Mat& probs, size_t lo, size_t hi) {
  const size_t c = probs.cols;
  std::vector<double> marginal(c, 0.0);
  for (size_t j = 0; j < c; ++j) {
    double acc = 0.0;
    for (size_t r = lo; r < hi; ++r) acc += probs.at(r, j);
    marginal[j] = acc / static_cast<double>(hi - lo);
  }
  std::vector<double> kl(hi - lo, 0.0);
#pragma omp parallel for schedule(static)
  for (long long rr = static_cast<long long>(lo); rr < static_cast<long long>(hi); ++rr) {
    const size_t r = static_cast<size_t>(rr);
    const double* p = probs.row(r);
    double acc = 0.0;
    for (size_t j = 0; j < c; ++j) {
      if (p[j] > 0.0) acc += p[j] * (std::log(p[j]) - std::log(marginal[j]));
    }
    kl[r - lo] = acc;
  }
  double mean_kl = 0.0;
  for (double v : kl) mean_kl += v;
  mean_kl /= static_cast<double>(hi - lo);
  return std::exp(mean_kl);
}

}  // namespace

SplitScore inception_score(const Mat& probs, int splits) {
  if (probs.rows == 0) raise(ErrorCode::kEmptyMatrix, "probability matrix is empty");
  if (splits < 1 || static_cast<size_t>(splits) > probs.rows)
    raise(ErrorCode::kInvalidInput, "splits must be in [1, rows]");
  for (size_t r = 0; r < probs.rows; ++r) {
    double sum = 0.0;
    for (size_t c = 0; c < probs.cols; ++c) {
      double v = probs.at(r, c);
      if (!std::isfinite(v) || v < 0.0)
        raise(ErrorCode::kInvalidDistribution, "row " + std::to_string(r) + " not a distribution");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      raise(ErrorCode::kInvalidDistribution,
            "row " + std::to_string(r) + " sums to " + std::to_string(sum));
  }

  const size_t base = probs.rows / static_cast<size_t>(splits);
  std::vector<double> scores;
  scores.reserve(static_cast<size_t>(splits));
  for (int s = 0; s < splits; ++s) {
    size_t lo = static_cast<size_t>(s) * base;
    size_t hi = (s == splits - 1) ? probs.rows : lo + base;  // remainder to last split
    scores.push_back(split_score(probs, lo, hi));
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
  if (sims.rows == 0) raise(ErrorCode::kEmptyMatrix, "similarity matrix is empty");
  if (sims.cols < 2) raise(ErrorCode::kInvalidInput, "similarity rows need >= 2 columns");
  if (!sims.all_finite())
    raise(ErrorCode::kNonFiniteInput, "similarity matrix has non-finite values");
  std::vector<unsigned char> success(sims.rows, 0);
#pragma omp parallel for schedule(static)
  for (long long rr = 0; rr < static_cast<long long>(sims.rows); ++rr) {
    const size_t r = static_cast<size_t>(rr);
    const double* row = sims.row(r);
    double best_distractor = row[1];
    for (size_t c = 2; c < sims.cols; ++c) best_distractor = std::max(best_distractor, row[c]);
    success[r] = row[0] > best_distractor ? 1 : 0;
  }
  size_t hits = 0;
  for (unsigned char s : success) hits += s;
  return static_cast<double>(hits) / static_cast<double>(sims.rows);
}

}  // namespace t2imt
