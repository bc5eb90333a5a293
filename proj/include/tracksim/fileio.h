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

// Whole-file reads and atomic writes.

#ifndef TRACKSIM_FILEIO_H_
#define TRACKSIM_FILEIO_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace tracksim {

// throws Io when the file cannot be read
std::string ReadFile(const std::filesystem::path& path);

// writes to a sibling temporary file, then renames over `path`
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

// `relative` resolved against the directory containing `base_file`
std::filesystem::path ResolveRelative(const std::filesystem::path& base_file,
                                      const std::filesystem::path& relative);

}  // namespace tracksim

#endif  // TRACKSIM_FILEIO_H_
