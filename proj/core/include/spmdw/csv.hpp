// Copyright 2026 The spmdw Authors
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

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spmdw {

/// RFC 4180 style writer: fields containing a comma, quote, CR or LF are
/// quoted with doubled inner quotes. Records end in "\n".
class CsvWriter {
 public:
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields) {
    row(std::span<const std::string>(fields.begin(), fields.size()));
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// Parses a whole document. Accepts LF or CRLF endings and a missing final
/// newline. Throws Error(MalformedFile) on an unterminated quote or stray
/// text after a closing quote.
std::vector<CsvRecord> parse_csv(std::string_view text);

}  // namespace spmdw
