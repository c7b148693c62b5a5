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

#include "simt_forge/error.h"

namespace simt_forge {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNone: return "OK";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kDuplicateKernel: return "DuplicateKernel";
    case ErrorCode::kUnresolvedLabel: return "UnresolvedLabel";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kOutOfDeviceMemory: return "OutOfDeviceMemory";
    case ErrorCode::kZeroSize: return "ZeroSize";
    case ErrorCode::kInvalidFree: return "InvalidFree";
    case ErrorCode::kBadSnapshot: return "BadSnapshot";
    case ErrorCode::kLaunchArityMismatch: return "LaunchArityMismatch";
    case ErrorCode::kUnknownKernel: return "UnknownKernel";
    case ErrorCode::kPhantomEdge: return "PhantomEdge";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kZeroTotal: return "ZeroTotal";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kNonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::kManifestSyntax: return "ManifestSyntax";
    case ErrorCode::kDanglingFree: return "DanglingFree";
    case ErrorCode::kArgArityMismatch: return "ArgArityMismatch";
    case ErrorCode::kNonReproducing: return "NonReproducing";
    case ErrorCode::kUnknownBenchmark: return "UnknownBenchmark";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::string Status::ToString() const {
  if (ok()) return "OK";
  std::string out(ErrorCodeName(code_));
  out += ": ";
  out += message_;
  return out;
}

}  // namespace simt_forge
