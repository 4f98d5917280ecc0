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

#include "spmdw/csv.hpp"

#include "spmdw/error.hpp"

namespace spmdw {

void CsvWriter::row(std::span<const std::string> fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out_.push_back(',');
    first = false;
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out_ += f;
      continue;
    }
    out_.push_back('"');
    for (char c : f) {
      if (c == '"') out_.push_back('"');
      out_.push_back(c);
    }
    out_.push_back('"');
  }
  out_.push_back('\n');
}

std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> records;
  CsvRecord rec;
  std::string field;
  std::size_t line = 1;
  rec.line = 1;
  size_t i = 0;
  const size_t n = text.size();

  auto end_record = [&] {
    rec.fields.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(rec));
    rec = CsvRecord{};
  };

  while (i < n) {
    // Start of a field.
    if (text[i] == '"') {
      size_t quote_line = line;
      ++i;
      while (true) {
        if (i >= n) {
          throw Error(ErrorCode::MalformedFile,
                      "unterminated quoted field starting on line " + std::to_string(quote_line));
        }
        char c = text[i++];
        if (c == '"') {
          if (i < n && text[i] == '"') {
            field.push_back('"');
            ++i;
            continue;
          }
          break;
        }
        if (c == '\n') ++line;
        field.push_back(c);
      }
      if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw Error(ErrorCode::MalformedFile,
                    "unexpected text after closing quote on line " + std::to_string(line));
      }
    } else {
      while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        if (text[i] == '"') {
          throw Error(ErrorCode::MalformedFile,
                      "stray quote in unquoted field on line " + std::to_string(line));
        }
        field.push_back(text[i++]);
      }
    }
    if (i >= n) {
      end_record();
      break;
    }
    char sep = text[i++];
    if (sep == ',') {
      rec.fields.push_back(std::move(field));
      field.clear();
      if (i >= n) {  // trailing comma at EOF
        end_record();
        break;
      }
      continue;
    }
    if (sep == '\r') {
      if (i < n && text[i] == '\n') ++i;
    }
    end_record();
    ++line;
    rec.line = line;
  }
  return records;
}

}  // namespace spmdw
