// Copyright 2026 The Simcap Authors
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

#ifndef SIMCAP_TEXTIO_H_
#define SIMCAP_TEXTIO_H_

#include <cstdint>
#include <string>
#include <vector>

namespace simcap {

// Locale-independent float formatting with round-trip precision
// (shortest representation that parses back to the same double).
std::string format_double(double v);

// Locale-independent parse; throws std::runtime_error on malformed input.
double parse_double(const std::string& s);

// Splits on runs of spaces and tabs, dropping empty tokens.
std::vector<std::string> split_ws(const std::string& line);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::vector<std::uint8_t> read_binary(const std::string& path);
void write_binary(const std::string& path, const void* data, std::size_t size);

}  // namespace simcap

#endif  // SIMCAP_TEXTIO_H_
