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


// Batch command-line front end. Exit codes: 0 success with no findings,
// 1 findings present, 2 usage or validation error, 3 fatal (including a
// crash that does not reproduce).

#ifndef SIMT_FORGE_CLI_H_
#define SIMT_FORGE_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace simt_forge {

enum ExitCode : int {
  kExitOk = 0,
  kExitFindings = 1,
  kExitUsage = 2,
  kExitFatal = 3,
};

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace simt_forge

#endif  // SIMT_FORGE_CLI_H_
