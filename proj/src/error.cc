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
#include "tracksim/error.h"

namespace tracksim {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kTapeOverflow: return "TapeOverflow";
    case ErrorCode::kEmptyOverlap: return "EmptyOverlap";
    case ErrorCode::kAllMasked: return "AllMasked";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace tracksim
