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
//
// Numerical quality metrics over ingested features, logits and similarity
// scores. The sample-dimension loops are OpenMP kernels; each output element
// is accumulated serially in a fixed order so results are identical for any
// thread count. A plain serial implementation of every kernel lives in
// src/reference/ and is compared against these in the tests and benchmarks.

#ifndef T2IMT_METRICS_HPP_
#define T2IMT_METRICS_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include "t2imt/matrix.hpp"

namespace t2imt {

enum class FeatureSource { kReal, kGenerated };

struct FeatureSet {
  Mat matrix;  // rows = images, cols = feature dims
  FeatureSource source = FeatureSource::kGenerated;

  // Validates N >= 2 and finiteness. Throws TooFewSamples / NonFiniteInput.
  static FeatureSet from(Mat m, FeatureSource source);
  static FeatureSet load(const std::filesystem::path& path, FeatureSource source);
};

struct LogitSet {
  Mat matrix;  // rows = images, cols = classes (C >= 2)

  static LogitSet from(Mat m);
  static LogitSet load(const std::filesystem::path& path);
};

struct GaussianSummary {
  std::vector<double> mean;  // D
  Mat cov;                   // D x D, symmetric PSD up to clamping
  size_t dim() const { return mean.size(); }
};

// Sample mean and covariance (N-1 denominator), symmetrized as (A+A')/2.
GaussianSummary summarize(const FeatureSet& features);

// Squared mean distance plus the Gaussian trace term. The cross term is
// tr((S_r^{1/2} S_g S_r^{1/2})^{1/2}) with eigenvalues clamped at zero;
// values below -1e-6 indicate a decomposition problem and throw, small
// negatives are clamped to 0.
double frechet_distance(const GaussianSummary& real, const GaussianSummary& gen);

// Row-wise softmax of logits / temperature. Throws NonPositiveTemperature.
Mat temperature_scale(const LogitSet& logits, double temperature);

struct TemperatureFit {
  double temperature = 1.0;
  double nll = 0.0;
};

// Grid search minimizing mean negative log-likelihood of the labels.
// Ties resolve to the smallest temperature.
TemperatureFit fit_temperature(const LogitSet& logits, std::span<const int> labels,
                               double grid_lo = 0.05, double grid_hi = 5.0,
                               double grid_step = 0.05);

struct SplitScore {
  double mean = 0.0;
  double stddev = 0.0;  // population std across splits
};

// exp(mean KL(row || split marginal)) per split; rows must be distributions
// (sum within 1e-6 of 1). Splits are contiguous blocks of N/splits rows with
// the remainder going to the last split.
SplitScore inception_score(const Mat& probs, int splits = 10);

// Fraction of rows whose column-0 score strictly exceeds every other column.
// Ties count as failures.
double r_precision(const Mat& sims);

}  // namespace t2imt

#endif  // T2IMT_METRICS_HPP_
