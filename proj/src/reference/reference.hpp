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
// Serial reference implementations of the metric kernels, kept for testing
// and benchmarking against the parallel versions. These deliberately take
// different computational routes where one exists: the Gaussian trace term
// uses the eigendecomposition of the (non-symmetric) covariance product
// rather than the symmetric-form square root, and the score kernels are
// direct double loops. Not linked into the product library.

#ifndef T2IMT_REFERENCE_REFERENCE_HPP_
#define T2IMT_REFERENCE_REFERENCE_HPP_

#include <span>

#include "t2imt/matrix.hpp"
#include "t2imt/metrics.hpp"

namespace t2imt::reference {

GaussianSummary summarize(const Mat& features);

// ||mu_r - mu_g||^2 + tr(S_r + S_g - 2 sqrtm(S_r S_g)), with the matrix
// square root taken from the complex eigendecomposition of the product.
double frechet_distance(const GaussianSummary& real, const GaussianSummary& gen);

Mat temperature_scale(const Mat& logits, double temperature);

// Mean NLL computed from explicit softmax probabilities, not log-sum-exp.
double mean_nll(const Mat& logits, std::span<const int> labels, double temperature);
TemperatureFit fit_temperature(const Mat& logits, std::span<const int> labels,
                               double grid_lo = 0.05, double grid_hi = 5.0,
                               double grid_step = 0.05);

SplitScore inception_score(const Mat& probs, int splits);

double r_precision(const Mat& sims);

}  // namespace t2imt::reference

#endif  // T2IMT_REFERENCE_REFERENCE_HPP_
