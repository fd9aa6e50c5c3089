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

#ifndef T2IMT_UTIL_HPP_
#define T2IMT_UTIL_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace t2imt {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercased alphanumeric word tokens, left to right. Everything else
// (punctuation, hyphens) acts as a separator.
std::vector<std::string> tokenize_words(std::string_view text);

std::string sha256_hex(std::string_view bytes);
std::string base64_decode(std::string_view encoded);

std::string read_file(const std::filesystem::path& path);
// Writes via a temp file + rename so readers never observe partial content.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// Replaces characters that are unsafe in file names with '_'.
std::string sanitize_filename(std::string_view name);

}  // namespace t2imt

#endif  // T2IMT_UTIL_HPP_
