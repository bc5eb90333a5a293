// Copyright 2026 The Tracksim Authors
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

// Command-line entry point, kept in the library so tests can drive it.

#ifndef TRACKSIM_CLI_H_
#define TRACKSIM_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace tracksim {

enum ExitStatus {
  kExitOk = 0,
  kExitInvalid = 1,    // bad arguments, files or configuration
  kExitNumerical = 2,  // non-finite state, divergence, failed check
};

// args excludes the program name. Errors go to `err` as one line:
//   error: <code>: <message>
int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err);

std::string Usage();

}  // namespace tracksim

#endif  // TRACKSIM_CLI_H_
