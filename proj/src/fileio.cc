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

#include "tracksim/fileio.h"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "tracksim/error.h"

namespace tracksim {

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) Fail(ErrorCode::kIo, "read failed on " + path.string());
  return buf.str();
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view data) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      Fail(ErrorCode::kIo, "write failed on " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    Fail(ErrorCode::kIo, "cannot move output into place at " + path.string());
  }
}

std::filesystem::path ResolveRelative(const std::filesystem::path& base_file,
                                      const std::filesystem::path& relative) {
  if (relative.is_absolute()) return relative;
  return base_file.parent_path() / relative;
}

}  // namespace tracksim
