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

// Error kinds shared by every module, carried by a small Status/StatusOr
// pair. Sanitizer findings are ordinary values and never travel as errors.

#ifndef SIMT_FORGE_ERROR_H_
#define SIMT_FORGE_ERROR_H_

#include <cassert>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace simt_forge {

enum class ErrorCode {
  kNone = 0,
  // kernel_ir
  kSyntaxError,
  kDuplicateKernel,
  kUnresolvedLabel,
  kTypeMismatch,
  // device_memory
  kOutOfDeviceMemory,
  kZeroSize,
  kInvalidFree,
  kBadSnapshot,
  // simt_executor
  kLaunchArityMismatch,
  kUnknownKernel,
  // coverage
  kPhantomEdge,
  kDigestMismatch,
  kZeroTotal,
  kEmptyList,
  kNonPositiveEntry,
  // harness / campaign
  kManifestSyntax,
  kDanglingFree,
  kArgArityMismatch,
  kNonReproducing,
  kUnknownBenchmark,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class [[nodiscard]] Status {
 public:
  Status() = default;
  Status(ErrorCode code, std::string message)
      : code_(code), message_(std::move(message)) {}

  bool ok() const { return code_ == ErrorCode::kNone; }
  ErrorCode code() const { return code_; }
  const std::string& message() const { return message_; }
  // "<Kind>: <message>", or "OK".
  std::string ToString() const;

 private:
  ErrorCode code_ = ErrorCode::kNone;
  std::string message_;
};

inline Status OkStatus() { return Status(); }

inline Status MakeError(ErrorCode code, std::string message) {
  return Status(code, std::move(message));
}

template <typename T>
class [[nodiscard]] StatusOr {
 public:
  StatusOr(Status status) : rep_(std::move(status)) {  // NOLINT
    assert(!std::get<Status>(rep_).ok());
  }
  StatusOr(T value) : rep_(std::move(value)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(rep_); }
  Status status() const {
    return ok() ? Status() : std::get<Status>(rep_);
  }

  T& value() & { return std::get<T>(rep_); }
  const T& value() const& { return std::get<T>(rep_); }
  T&& value() && { return std::get<T>(std::move(rep_)); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T&& operator*() && { return std::move(*this).value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  std::variant<Status, T> rep_;
};

}  // namespace simt_forge

#define SF_RETURN_IF_ERROR(expr)                  \
  do {                                            \
    ::simt_forge::Status sf_status_ = (expr);     \
    if (!sf_status_.ok()) return sf_status_;      \
  } while (0)

#define SF_CONCAT_INNER(a, b) a##b
#define SF_CONCAT(a, b) SF_CONCAT_INNER(a, b)
#define SF_ASSIGN_OR_RETURN(lhs, expr) \
  SF_ASSIGN_OR_RETURN_IMPL(SF_CONCAT(sf_statusor_, __LINE__), lhs, expr)
#define SF_ASSIGN_OR_RETURN_IMPL(tmp, lhs, expr) \
  auto tmp = (expr);                             \
  if (!tmp.ok()) return tmp.status();            \
  lhs = std::move(tmp).value()

#endif  // SIMT_FORGE_ERROR_H_
