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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "reference/reference.hpp"
#include "t2imt/error.hpp"
#include "t2imt/matrix.hpp"
#include "t2imt/metrics.hpp"
#include "t2imt/rng.hpp"

using namespace t2imt;

namespace {

Mat from_rows(std::vector<std::vector<double>> rows) {
  Mat m(rows.size(), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) m.at(r, c) = rows[r][c];
  return m;
}

Mat random_matrix(size_t rows, size_t cols, uint64_t seed, double scale = 1.0) {
  Mat m(rows, cols);
  Rng rng(seed);
  for (double& v : m.data) v = (rng.uniform01() * 2.0 - 1.0) * scale;
  return m;
}

// random PD matrix: B B' + jitter I
Mat random_pd(size_t d, uint64_t seed, double jitter = 0.5) {
  Mat b = random_matrix(d, d, seed);
  Mat out(d, d);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) {
      double acc = 0;
      for (size_t k = 0; k < d; ++k) acc += b.at(i, k) * b.at(j, k);
      out.at(i, j) = acc + (i == j ? jitter : 0.0);
    }
  return out;
}

GaussianSummary summary_of(std::vector<double> mean, Mat cov) {
  return GaussianSummary{std::move(mean), std::move(cov)};
}

}  // namespace

TEST_CASE("summarize: identical rows give zero covariance") {
  Mat m = from_rows({{1.5, -2.0, 0.25}, {1.5, -2.0, 0.25}, {1.5, -2.0, 0.25}});
  GaussianSummary s = summarize(FeatureSet::from(m, FeatureSource::kReal));
  CHECK(s.mean[0] == doctest::Approx(1.5));
  CHECK(s.mean[1] == doctest::Approx(-2.0));
  for (double v : s.cov.data) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("summarize: two 1-d samples use the n-1 denominator") {
  Mat m = from_rows({{0.0}, {2.0}});
  GaussianSummary s = summarize(FeatureSet::from(m, FeatureSource::kGenerated));
  CHECK(s.mean[0] == doctest::Approx(1.0));
  CHECK(s.cov.at(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("summarize matches the frozen external oracle on a fixed 3x4 matrix") {
  Mat m = from_rows({{0.5, -1.25, 2.0, 0.125},
                     {1.5, 0.75, -0.5, 2.25},
                     {-0.25, 1.0, 0.625, -1.75}});
  GaussianSummary s = summarize(FeatureSet::from(m, FeatureSource::kReal));
  // expected values computed in an independent high-precision environment
  const double mean[4] = {0.5833333333333334, 0.16666666666666666, 0.7083333333333334,
                          0.20833333333333334};
  const double cov[4][4] = {
      {0.7708333333333334, -0.02083333333333336, -0.5729166666666667, 1.7552083333333333},
      {-0.02083333333333336, 1.5208333333333335, -1.3020833333333335, -0.1614583333333333},
      {-0.5729166666666667, -1.3020833333333335, 1.5677083333333335, -1.2057291666666667},
      {1.7552083333333333, -0.1614583333333333, -1.2057291666666667, 4.005208333333333}};
  for (size_t j = 0; j < 4; ++j) CHECK(std::abs(s.mean[j] - mean[j]) < 1e-10);
  for (size_t j = 0; j < 4; ++j)
    for (size_t k = 0; k < 4; ++k) CHECK(std::abs(s.cov.at(j, k) - cov[j][k]) < 1e-10);
}

TEST_CASE("summarize parallel kernel equals the serial reference") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Mat m = random_matrix(64, 17, seed);
    GaussianSummary par = summarize(FeatureSet::from(m, FeatureSource::kReal));
    GaussianSummary ser = reference::summarize(m);
    for (size_t j = 0; j < 17; ++j) CHECK(std::abs(par.mean[j] - ser.mean[j]) < 1e-12);
    for (size_t i = 0; i < par.cov.data.size(); ++i)
      CHECK(std::abs(par.cov.data[i] - ser.cov.data[i]) < 1e-12);
  }
}

TEST_CASE("summarize validation") {
  Mat one(1, 3);
  CHECK_THROWS_AS(FeatureSet::from(one, FeatureSource::kReal), Error);
  Mat bad(2, 2);
  bad.at(0, 0) = std::nan("");
  CHECK_THROWS_AS(FeatureSet::from(bad, FeatureSource::kReal), Error);
}

TEST_CASE("distance of a summary to itself is zero") {
  GaussianSummary s = summarize(FeatureSet::from(random_matrix(32, 5, 9), FeatureSource::kReal));
  CHECK(std::abs(frechet_distance(s, s)) < 1e-8);
}

TEST_CASE("1-d distance matches the closed form on 100 random pairs") {
  Rng rng(123);
  for (int i = 0; i < 100; ++i) {
    double mu_r = rng.uniform01() * 10 - 5, mu_g = rng.uniform01() * 10 - 5;
    double var_r = rng.uniform01() * 4 + 0.01, var_g = rng.uniform01() * 4 + 0.01;
    Mat cr(1, 1), cg(1, 1);
    cr.at(0, 0) = var_r;
    cg.at(0, 0) = var_g;
    double got = frechet_distance(summary_of({mu_r}, cr), summary_of({mu_g}, cg));
    double want = (mu_r - mu_g) * (mu_r - mu_g) +
                  (std::sqrt(var_r) - std::sqrt(var_g)) * (std::sqrt(var_r) - std::sqrt(var_g));
    CHECK(std::abs(got - want) < 1e-10);
  }
}

TEST_CASE("1-d worked example: means 0 and 3, variances 1 and 4") {
  Mat cr(1, 1), cg(1, 1);
  cr.at(0, 0) = 1.0;
  cg.at(0, 0) = 4.0;
  CHECK(frechet_distance(summary_of({0.0}, cr), summary_of({3.0}, cg)) ==
        doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("distance matches the frozen external oracle on a fixed 5-d pair") {
  Mat sr = from_rows({{4.0, 1.0, 0.5, 0.0, 0.25},
                      {1.0, 3.0, 0.75, 0.5, 0.0},
                      {0.5, 0.75, 5.0, 1.0, 0.5},
                      {0.0, 0.5, 1.0, 2.5, 0.25},
                      {0.25, 0.0, 0.5, 0.25, 3.5}});
  Mat sg = from_rows({{2.0, -0.5, 0.25, 0.0, 0.5},
                      {-0.5, 4.5, 1.0, -0.25, 0.0},
                      {0.25, 1.0, 3.0, 0.5, -0.5},
                      {0.0, -0.25, 0.5, 6.0, 1.0},
                      {0.5, 0.0, -0.5, 1.0, 2.25}});
  GaussianSummary real = summary_of({0.5, -1.0, 2.0, 0.25, -0.75}, sr);
  GaussianSummary gen = summary_of({1.5, 0.5, -0.5, 1.0, 0.0}, sg);
  const double frozen = 13.092471226855288;  // scipy sqrtm route
  CHECK(std::abs(frechet_distance(real, gen) - frozen) / frozen < 1e-6);
  CHECK(std::abs(reference::frechet_distance(real, gen) - frozen) / frozen < 1e-6);
}

TEST_CASE("distance agrees with the product-eigendecomposition reference on random pairs") {
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    GaussianSummary real = summary_of(
        {0.1 * seed, -0.2, 0.3, 0.0, 1.0}, random_pd(5, seed * 2 + 1));
    GaussianSummary gen = summary_of(
        {-0.4, 0.5 * seed, 0.0, 0.7, -0.1}, random_pd(5, seed * 2 + 2));
    double got = frechet_distance(real, gen);
    double want = reference::frechet_distance(real, gen);
    CHECK(std::abs(got - want) / std::max(1.0, std::abs(want)) < 1e-6);
  }
}

TEST_CASE("distance is symmetric and rotation invariant") {
  GaussianSummary a = summary_of({1.0, 2.0, 3.0}, random_pd(3, 31));
  GaussianSummary b = summary_of({-1.0, 0.5, 2.5}, random_pd(3, 32));
  CHECK(std::abs(frechet_distance(a, b) - frechet_distance(b, a)) < 1e-8);

  // rotate both summaries by the same orthogonal matrix (Givens rotation)
  double theta = 0.7;
  double rot[3][3] = {{std::cos(theta), -std::sin(theta), 0},
                      {std::sin(theta), std::cos(theta), 0},
                      {0, 0, 1}};
  auto rotate = [&rot](const GaussianSummary& s) {
    GaussianSummary out = s;
    for (size_t i = 0; i < 3; ++i) {
      out.mean[i] = 0;
      for (size_t j = 0; j < 3; ++j) out.mean[i] += rot[i][j] * s.mean[j];
    }
    Mat tmp(3, 3);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) {
        double acc = 0;
        for (size_t k = 0; k < 3; ++k) acc += rot[i][k] * s.cov.at(k, j);
        tmp.at(i, j) = acc;
      }
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) {
        double acc = 0;
        for (size_t k = 0; k < 3; ++k) acc += tmp.at(i, k) * rot[j][k];
        out.cov.at(i, j) = acc;
      }
    return out;
  };
  double base = frechet_distance(a, b);
  double rotated = frechet_distance(rotate(a), rotate(b));
  CHECK(std::abs(base - rotated) < 1e-6);
}

TEST_CASE("distance dimension mismatch") {
  GaussianSummary a = summary_of({0.0}, Mat(1, 1));
  GaussianSummary b = summary_of({0.0, 0.0}, Mat(2, 2));
  CHECK_THROWS_AS(frechet_distance(a, b), Error);
}

TEST_CASE("temperature scaling at T=1 is plain softmax") {
  Mat logits = random_matrix(16, 6, 77, 3.0);
  Mat par = temperature_scale(LogitSet::from(logits), 1.0);
  Mat ser = reference::temperature_scale(logits, 1.0);
  for (size_t i = 0; i < par.data.size(); ++i) CHECK(std::abs(par.data[i] - ser.data[i]) < 1e-12);
  for (size_t r = 0; r < par.rows; ++r) {
    double sum = 0;
    for (size_t c = 0; c < par.cols; ++c) sum += par.at(r, c);
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("very high temperature flattens rows to uniform") {
  Mat logits = random_matrix(8, 5, 21, 20.0);
  Mat probs = temperature_scale(LogitSet::from(logits), 1e6);
  for (size_t r = 0; r < probs.rows; ++r)
    for (size_t c = 0; c < probs.cols; ++c) CHECK(std::abs(probs.at(r, c) - 0.2) < 1e-4);
}

TEST_CASE("temperature scaling preserves the row argmax") {
  Mat logits = random_matrix(1000, 10, 5);
  for (double t : {0.1, 1.0, 10.0}) {
    Mat probs = temperature_scale(LogitSet::from(logits), t);
    for (size_t r = 0; r < logits.rows; ++r) {
      size_t a = 0, b = 0;
      for (size_t c = 1; c < logits.cols; ++c) {
        if (logits.at(r, c) > logits.at(r, a)) a = c;
        if (probs.at(r, c) > probs.at(r, b)) b = c;
      }
      CHECK(a == b);
    }
  }
}

TEST_CASE("non-positive temperatures are rejected") {
  Mat logits = random_matrix(2, 3, 1);
  CHECK_THROWS_AS(temperature_scale(LogitSet::from(logits), 0.0), Error);
  CHECK_THROWS_AS(temperature_scale(LogitSet::from(logits), -1.0), Error);
}

TEST_CASE("temperature fit matches the frozen grid oracle") {
  Mat logits = from_rows({{2.0, 0.5, -1.0, 0.25},
                          {0.1, 3.2, 0.4, -0.6},
                          {-0.3, 0.2, 1.9, 0.8},
                          {1.1, 1.0, 0.9, 4.0},
                          {0.6, -0.2, 0.3, 0.1},
                          {2.5, 2.4, 2.3, 2.2}});
  std::vector<int> labels = {0, 1, 2, 3, 0, 1};
  TemperatureFit fit = fit_temperature(LogitSet::from(logits), labels);
  CHECK(fit.temperature == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(std::abs(fit.nll - 0.24628321031145342) < 1e-10);
}

TEST_CASE("temperature fit equals the brute-force reference argmin") {
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    Mat logits = random_matrix(40, 7, seed, 4.0);
    std::vector<int> labels(40);
    Rng rng(seed + 100);
    for (auto& y : labels) y = static_cast<int>(rng.uniform_index(7));
    TemperatureFit got = fit_temperature(LogitSet::from(logits), labels);
    TemperatureFit want = reference::fit_temperature(logits, labels);
    CHECK(got.temperature == doctest::Approx(want.temperature).epsilon(1e-12));
  }
}

TEST_CASE("inception score analytic cases") {
  SUBCASE("all rows equal gives 1") {
    Mat probs = from_rows({{0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}});
    SplitScore s = inception_score(probs, 2);
    CHECK(std::abs(s.mean - 1.0) < 1e-9);
    CHECK(s.stddev == doctest::Approx(0.0));
  }
  SUBCASE("one-hot rows covering all of C=10 classes give 10") {
    Mat probs(100, 10);
    for (size_t r = 0; r < 100; ++r) probs.at(r, r % 10) = 1.0;
    SplitScore s1 = inception_score(probs, 1);
    CHECK(std::abs(s1.mean - 10.0) < 1e-6);
    // contiguous splits of 10 rows each also cover every class once
    SplitScore s10 = inception_score(probs, 10);
    CHECK(std::abs(s10.mean - 10.0) < 1e-6);
    CHECK(s10.stddev == doctest::Approx(0.0));
  }
}

TEST_CASE("inception score matches the double-loop reference") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Mat probs = reference::temperature_scale(random_matrix(64, 8, seed, 2.0), 1.0);
    for (int splits : {1, 3, 10}) {
      SplitScore got = inception_score(probs, splits);
      SplitScore want = reference::inception_score(probs, splits);
      CHECK(std::abs(got.mean - want.mean) < 1e-10);
      CHECK(std::abs(got.stddev - want.stddev) < 1e-10);
    }
  }
}

TEST_CASE("inception score matches the frozen fixture with two splits") {
  Mat probs = from_rows({{0.7, 0.2, 0.1},
                         {0.1, 0.8, 0.1},
                         {0.25, 0.25, 0.5},
                         {0.9, 0.05, 0.05},
                         {0.3, 0.4, 0.3},
                         {0.2, 0.3, 0.5}});
  SplitScore s = inception_score(probs, 2);
  CHECK(std::abs(s.mean - 1.2629926329583649) < 1e-10);
  CHECK(std::abs(s.stddev - 0.014534579324966601) < 1e-10);
}

TEST_CASE("inception score bounds and permutation invariance") {
  Mat probs = reference::temperature_scale(random_matrix(60, 6, 44, 3.0), 1.0);
  SplitScore s = inception_score(probs, 1);
  CHECK(s.mean >= 1.0 - 1e-12);
  CHECK(s.mean <= 6.0 + 1e-12);
  // permuting rows leaves a single-split score unchanged
  Mat shuffled = probs;
  Rng rng(7);
  for (size_t i = probs.rows; i > 1; --i) {
    size_t j = rng.uniform_index(i);
    for (size_t c = 0; c < probs.cols; ++c)
      std::swap(shuffled.at(i - 1, c), shuffled.at(j, c));
  }
  CHECK(std::abs(inception_score(shuffled, 1).mean - s.mean) < 1e-10);
}

TEST_CASE("inception score validation") {
  Mat probs = from_rows({{0.5, 0.6}});  // sums to 1.1
  CHECK_THROWS_AS(inception_score(probs, 1), Error);
  Mat ok = from_rows({{0.5, 0.5}});
  CHECK_THROWS_AS(inception_score(ok, 2), Error);  // splits > rows
  CHECK_THROWS_AS(inception_score(Mat{}, 1), Error);
}

TEST_CASE("retrieval precision counts strict wins only") {
  SUBCASE("true caption strictly highest in every row") {
    Mat sims = from_rows({{0.9, 0.1, 0.2}, {0.8, 0.7, 0.79}});
    CHECK(r_precision(sims) == doctest::Approx(1.0));
  }
  SUBCASE("94 of 100 rows succeed") {
    Mat sims(100, 100);
    for (size_t r = 0; r < 100; ++r) {
      for (size_t c = 1; c < 100; ++c) sims.at(r, c) = 0.5;
      sims.at(r, 0) = r < 94 ? 0.9 : 0.1;
    }
    CHECK(r_precision(sims) == doctest::Approx(0.94));
  }
  SUBCASE("a tie with the best distractor is a failure") {
    Mat sims = from_rows({{0.5, 0.5, 0.1}});
    CHECK(r_precision(sims) == doctest::Approx(0.0));
  }
  SUBCASE("distractor column permutation does not change the rate") {
    Mat sims = random_matrix(50, 100, 3);
    double base = r_precision(sims);
    Mat shuffled = sims;
    Rng rng(9);
    for (size_t c = 99; c > 1; --c) {
      size_t k = 1 + rng.uniform_index(c);
      for (size_t r = 0; r < 50; ++r) std::swap(shuffled.at(r, c), shuffled.at(r, k));
    }
    CHECK(r_precision(shuffled) == doctest::Approx(base));
  }
  SUBCASE("agrees with the serial reference") {
    Mat sims = random_matrix(200, 100, 13);
    CHECK(r_precision(sims) == doctest::Approx(reference::r_precision(sims)));
  }
  CHECK_THROWS_AS(r_precision(Mat{}), Error);
}

TEST_CASE("matrix files round trip through both layouts") {
  Mat m = random_matrix(7, 3, 55);
  auto dir = std::filesystem::temp_directory_path() / "t2imt_matrix_test";
  std::filesystem::create_directories(dir);
  save_matrix_text(dir / "m.txt", m);
  Mat t = load_matrix(dir / "m.txt");
  REQUIRE(t.rows == m.rows);
  for (size_t i = 0; i < m.data.size(); ++i) CHECK(t.data[i] == doctest::Approx(m.data[i]));
  save_matrix_binary(dir / "m.bin", m);
  Mat b = load_matrix(dir / "m.bin");
  REQUIRE(b.rows == m.rows);
  for (size_t i = 0; i < m.data.size(); ++i) CHECK(b.data[i] == m.data[i]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("binary matrix files can carry float32 payloads") {
  auto dir = std::filesystem::temp_directory_path() / "t2imt_matrix_f32";
  std::filesystem::create_directories(dir);
  std::string bytes = "T2IMAT01";
  uint32_t rows = 2, cols = 2;
  bytes.append(reinterpret_cast<const char*>(&rows), 4);
  bytes.append(reinterpret_cast<const char*>(&cols), 4);
  bytes.push_back(1);  // float32 tag
  bytes.append(3, '\0');
  const float values[4] = {1.5f, -2.25f, 0.0f, 4.0f};
  bytes.append(reinterpret_cast<const char*>(values), sizeof(values));
  std::ofstream(dir / "m32.bin", std::ios::binary) << bytes;
  Mat m = load_matrix(dir / "m32.bin");
  REQUIRE(m.rows == 2);
  REQUIRE(m.cols == 2);
  CHECK(m.at(0, 0) == 1.5);
  CHECK(m.at(0, 1) == -2.25);
  CHECK(m.at(1, 1) == 4.0);
  // truncated payload is rejected
  std::ofstream(dir / "bad.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 4);
  CHECK_THROWS_AS(load_matrix(dir / "bad.bin"), Error);
  std::filesystem::remove_all(dir);
}
