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

#ifndef TRACKSIM_ERROR_H_
#define TRACKSIM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracksim {

enum class ErrorCode {
  kOutOfBounds,
  kConfig,
  kNonFinite,
  kTapeOverflow,
  kEmptyOverlap,
  kAllMasked,
  kDiverged,
  kNonPositiveDepth,
  kShape,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Single exception type for the library; the code drives CLI exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

  // true for failures caused by numerics rather than by bad input
  bool numerical() const {
    return code_ == ErrorCode::kNonFinite || code_ == ErrorCode::kDiverged ||
           code_ == ErrorCode::kTapeOverflow;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tracksim

#endif  // TRACKSIM_ERROR_H_
