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

#ifndef T2IMT_MATRIX_HPP_
#define T2IMT_MATRIX_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace t2imt {

// Dense row-major matrix. Rows are samples throughout the metrics code.
struct Mat {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }
  double* row(size_t r) { return data.data() + r * cols; }
  const double* row(size_t r) const { return data.data() + r * cols; }
  bool all_finite() const;
};

// Matrix file, version 1. Two interchangeable layouts:
//   text     "t2imt-matrix 1" header line, then "<rows> <cols> <dtype>",
//            then one whitespace-separated row per line
//   binary   magic "T2IMAT01", u32 rows, u32 cols, u8 dtype (1 = float32,
//            2 = float64), 3 zero pad bytes, row-major little-endian payload
// load_matrix sniffs the magic and falls back to text.
Mat load_matrix(const std::filesystem::path& path);
void save_matrix_text(const std::filesystem::path& path, const Mat& m);
void save_matrix_binary(const std::filesystem::path& path, const Mat& m);

// One integer class label per line; '#' starts a comment.
std::vector<int> load_labels(const std::filesystem::path& path);

}  // namespace t2imt

#endif  // T2IMT_MATRIX_HPP_
