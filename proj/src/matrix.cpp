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

#include "t2imt/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "t2imt/error.hpp"
#include "t2imt/util.hpp"

namespace t2imt {

namespace {

constexpr char kMagic[8] = {'T', '2', 'I', 'M', 'A', 'T', '0', '1'};
constexpr uint8_t kDtypeF32 = 1;
constexpr uint8_t kDtypeF64 = 2;

Mat parse_text(const std::string& content, const std::string& origin) {
  std::istringstream in(content);
  std::string header;
  std::getline(in, header);
  if (trim(header) != "t2imt-matrix 1")
    raise(ErrorCode::kIoError, origin + ": expected 't2imt-matrix 1' header");
  size_t rows = 0, cols = 0;
  std::string dtype;
  in >> rows >> cols >> dtype;
  if (!in || rows == 0 || cols == 0)
    raise(ErrorCode::kIoError, origin + ": bad dimension line");
  if (dtype != "float64" && dtype != "float32")
    raise(ErrorCode::kIoError, origin + ": dtype must be float32 or float64");
  Mat m(rows, cols);
  for (size_t i = 0; i < rows * cols; ++i) {
    if (!(in >> m.data[i]))
      raise(ErrorCode::kIoError, origin + ": expected " + std::to_string(rows * cols) +
                                     " values, got " + std::to_string(i));
  }
  return m;
}

Mat parse_binary(const std::string& content, const std::string& origin) {
  const size_t header_size = sizeof(kMagic) + 4 + 4 + 1 + 3;
  if (content.size() < header_size) raise(ErrorCode::kIoError, origin + ": truncated header");
  uint32_t rows = 0, cols = 0;
  std::memcpy(&rows, content.data() + 8, 4);
  std::memcpy(&cols, content.data() + 12, 4);
  uint8_t dtype = static_cast<uint8_t>(content[16]);
  if (rows == 0 || cols == 0) raise(ErrorCode::kIoError, origin + ": zero dimension");
  size_t n = static_cast<size_t>(rows) * cols;
  size_t elem = dtype == kDtypeF32 ? 4 : 8;
  if (dtype != kDtypeF32 && dtype != kDtypeF64)
    raise(ErrorCode::kIoError, origin + ": unknown dtype tag");
  if (content.size() != header_size + n * elem)
    raise(ErrorCode::kIoError, origin + ": payload size mismatch");
  Mat m(rows, cols);
  const char* p = content.data() + header_size;
  if (dtype == kDtypeF64) {
    std::memcpy(m.data.data(), p, n * 8);
  } else {
    for (size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, p + i * 4, 4);
      m.data[i] = static_cast<double>(v);
    }
  }
  return m;
}

}  // namespace

bool Mat::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat load_matrix(const std::filesystem::path& path) {
  std::string content = read_file(path);
  if (content.size() >= sizeof(kMagic) && std::memcmp(content.data(), kMagic, sizeof(kMagic)) == 0)
    return parse_binary(content, path.string());
  return parse_text(content, path.string());
}

void save_matrix_text(const std::filesystem::path& path, const Mat& m) {
  std::ostringstream out;
  out << "t2imt-matrix 1\n" << m.rows << " " << m.cols << " float64\n";
  out << std::setprecision(17);
  for (size_t r = 0; r < m.rows; ++r) {
    for (size_t c = 0; c < m.cols; ++c) {
      if (c) out << " ";
      out << m.at(r, c);
    }
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

void save_matrix_binary(const std::filesystem::path& path, const Mat& m) {
  std::string out;
  out.reserve(20 + m.data.size() * 8);
  out.append(kMagic, sizeof(kMagic));
  uint32_t rows = static_cast<uint32_t>(m.rows), cols = static_cast<uint32_t>(m.cols);
  out.append(reinterpret_cast<const char*>(&rows), 4);
  out.append(reinterpret_cast<const char*>(&cols), 4);
  out.push_back(static_cast<char>(kDtypeF64));
  out.append(3, '\0');
  out.append(reinterpret_cast<const char*>(m.data.data()), m.data.size() * 8);
  write_file_atomic(path, out);
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    labels.push_back(std::stoi(line));
  }
  return labels;
}

}  // namespace t2imt
