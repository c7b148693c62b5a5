// Copyright 2026 The SIMT Forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small string helpers shared by the text formats.

#ifndef SIMT_FORGE_STRINGS_H_
#define SIMT_FORGE_STRINGS_H_

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace simt_forge {

template <typename... Args>
std::string StrCat(const Args&... args) {
  std::string out;
  ((out += fmt::to_string(args)), ...);
  return out;
}

std::string_view Trim(std::string_view s);

// Splits on `sep`; empty fields are kept.
std::vector<std::string_view> Split(std::string_view s, char sep);

// Splits on runs of blanks; no empty fields.
std::vector<std::string_view> SplitWords(std::string_view s);

bool ConsumePrefix(std::string_view& s, std::string_view prefix);

// Whole-string integer parse. Accepts an optional sign and 0x prefix.
std::optional<int64_t> ParseInt(std::string_view s);
std::optional<uint64_t> ParseUint(std::string_view s);

std::string HexEncode(std::string_view bytes);
std::optional<std::string> HexDecode(std::string_view hex);

std::optional<std::string> ReadFile(const std::string& path);
bool WriteFile(const std::string& path, std::string_view contents);

}  // namespace simt_forge

#endif  // SIMT_FORGE_STRINGS_H_
