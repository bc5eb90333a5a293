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

#include "tracksim/lift_splat.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <thread>

#include "json.hpp"
#include "tracksim/error.h"

namespace tracksim {

void CameraIntrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    Fail(ErrorCode::kConfig, "camera focal lengths must be positive and finite");
  }
}

Mat3d CameraIntrinsics::K() const {
  Mat3d k = Mat3d::Zero();
  k(0, 0) = fx;
  k(0, 2) = cx;
  k(1, 1) = fy;
  k(1, 2) = cy;
  k(2, 2) = 1.0;
  return k;
}

Vec3d LiftPixel(const CameraIntrinsics& k, double u, double v, double d) {
  k.Validate();
  if (!(d > 0.0)) {
    Fail(ErrorCode::kNonPositiveDepth,
         "depth must be positive, got " + std::to_string(d));
  }
  return {d * (u - k.cx) / k.fx, d * (v - k.cy) / k.fy, d};
}

Vec3d LiftPixel(const CameraIntrinsics& k, const Extrinsics& pose, double u,
                double v, double d) {
  return pose.R * LiftPixel(k, u, v, d) + pose.t;
}

PixelDepth ProjectPoint(const CameraIntrinsics& k, const Vec3d& p) {
  if (!(p.z > 0.0)) {
    Fail(ErrorCode::kNonPositiveDepth, "point is behind the camera");
  }
  return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy, p.z};
}

void LiftedFeatureCloud::Add(const Vec3d& p, double prob,
                             std::span<const double> phi, int pixel_id) {
  if (static_cast<int>(phi.size()) != channels) {
    Fail(ErrorCode::kShape, "feature vector length differs from channels");
  }
  points.push_back(p);
  probability.push_back(prob);
  features.insert(features.end(), phi.begin(), phi.end());
  pixel.push_back(pixel_id);
}

void LiftedFeatureCloud::Validate() const {
  std::size_t n = points.size();
  if (channels < 1) Fail(ErrorCode::kShape, "cloud needs >= 1 channel");
  if (probability.size() != n || features.size() != n * channels ||
      (!pixel.empty() && pixel.size() != n)) {
    Fail(ErrorCode::kShape, "cloud arrays differ in length");
  }
  std::map<int, double> per_pixel;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(probability[i] >= 0.0) || !std::isfinite(probability[i])) {
      Fail(ErrorCode::kConfig, "probabilities must be finite and >= 0");
    }
    if (!pixel.empty() && pixel[i] >= 0) per_pixel[pixel[i]] += probability[i];
  }
  for (const auto& [id, sum] : per_pixel) {
    if (sum > 1.0 + 1e-6) {
      Fail(ErrorCode::kConfig, "depth probabilities of pixel " +
                                   std::to_string(id) + " sum above 1");
    }
  }
}

LiftedFeatureCloud LiftImage(const CameraIntrinsics& k, const Extrinsics& pose,
                             int width, int height,
                             const std::vector<double>& bin_depths,
                             const std::vector<double>& probabilities,
                             const std::vector<double>& features,
                             int channels) {
  std::size_t pixels = static_cast<std::size_t>(width) * height;
  std::size_t bins = bin_depths.size();
  if (width < 1 || height < 1 || bins < 1 || channels < 1 ||
      probabilities.size() != pixels * bins ||
      features.size() != pixels * channels) {
    Fail(ErrorCode::kShape, "image, depth bin and feature sizes disagree");
  }
  LiftedFeatureCloud cloud;
  cloud.channels = channels;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      std::size_t px = static_cast<std::size_t>(v) * width + u;
      std::span<const double> phi(features.data() + px * channels, channels);
      for (std::size_t b = 0; b < bins; ++b) {
        cloud.Add(LiftPixel(k, pose, u, v, bin_depths[b]),
                  probabilities[px * bins + b], phi, static_cast<int>(px));
      }
    }
  }
  cloud.Validate();
  return cloud;
}

int NearestCell(const GridSpec& spec, double x, double y) {
  double gx = (x - spec.origin_x) / spec.resolution;
  double gy = (y - spec.origin_y) / spec.resolution;
  if (!(gx >= -0.5 && gx < spec.cols - 0.5 && gy >= -0.5 &&
        gy < spec.rows - 0.5)) {
    return -1;
  }
  int c = std::clamp(static_cast<int>(std::floor(gx + 0.5)), 0, spec.cols - 1);
  int r = std::clamp(static_cast<int>(std::floor(gy + 0.5)), 0, spec.rows - 1);
  return spec.Index(r, c);
}

SplatResult Splat(const LiftedFeatureCloud& cloud, const GridSpec& spec,
                  int workers) {
  cloud.Validate();
  spec.Validate();
  const int n = cloud.size();
  const int ch = cloud.channels;
  SplatResult out;
  out.spec = spec;
  out.channels = ch;
  out.features.assign(static_cast<std::size_t>(spec.cells()) * ch, 0.0);
  out.weights.assign(spec.cells(), 0.0);
  out.empty.assign(spec.cells(), 1);

  // cell of every entry, computed in parallel shards
  std::vector<int> cell(n);
  workers = std::clamp(workers, 1, std::max(1, n / 4096));
  auto assign = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      cell[i] = NearestCell(spec, cloud.points[i].x, cloud.points[i].y);
    }
  };
  if (workers == 1) {
    assign(0, n);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(assign, static_cast<int>(static_cast<long>(n) * w / workers),
                        static_cast<int>(static_cast<long>(n) * (w + 1) / workers));
    }
    for (std::thread& t : pool) t.join();
  }

  // stable counting sort by cell fixes the summation order
  std::vector<int> start(spec.cells() + 1, 0);
  for (int i = 0; i < n; ++i) {
    if (cell[i] < 0) {
      ++out.dropped;
      out.dropped_weight += cloud.probability[i];
    } else {
      ++start[cell[i] + 1];
    }
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<int> order(start.back());
  std::vector<int> fill(start.begin(), start.end() - 1);
  for (int i = 0; i < n; ++i) {
    if (cell[i] >= 0) order[fill[cell[i]]++] = i;
  }

  for (int j = 0; j < spec.cells(); ++j) {
    double w = 0.0;
    double* phi = out.features.data() + static_cast<std::size_t>(j) * ch;
    for (int k = start[j]; k < start[j + 1]; ++k) {
      int i = order[k];
      double p = cloud.probability[i];
      w += p;
      for (int c = 0; c < ch; ++c) {
        phi[c] += p * cloud.features[static_cast<std::size_t>(i) * ch + c];
      }
    }
    out.weights[j] = w;
    if (w > 0.0) {
      out.empty[j] = 0;
      for (int c = 0; c < ch; ++c) phi[c] /= w;
    } else {
      for (int c = 0; c < ch; ++c) phi[c] = 0.0;
    }
  }
  return out;
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) Fail(ErrorCode::kConfig, "percentile of no values");
  if (!(q >= 0.0 && q <= 100.0)) {
    Fail(ErrorCode::kConfig, "percentile must lie in [0, 100]");
  }
  std::sort(values.begin(), values.end());
  double pos = q / 100.0 * (values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double f = pos - lo;
  return values[lo] + f * (values[hi] - values[lo]);
}

Heightmap PointCloudToHeightmap(const std::vector<Vec3d>& points,
                                const GridSpec& spec,
                                const HeightmapOptions& options) {
  spec.Validate();
  if (points.empty()) Fail(ErrorCode::kConfig, "point cloud is empty");
  Heightmap out;
  out.spec = spec;
  out.height.assign(spec.cells(), 0.0);
  out.valid.assign(spec.cells(), 0);
  out.count.assign(spec.cells(), 0);
  std::vector<std::vector<double>> zs(spec.cells());
  for (const Vec3d& p : points) {
    int j = NearestCell(spec, p.x, p.y);
    if (j < 0 || !std::isfinite(p.z)) {
      ++out.dropped;
      continue;
    }
    zs[j].push_back(p.z);
  }
  for (int j = 0; j < spec.cells(); ++j) {
    std::vector<double>& z = zs[j];
    out.count[j] = static_cast<int>(z.size());
    if (z.empty()) continue;
    out.valid[j] = 1;
    switch (options.aggregator) {
      case HeightAggregator::kPercentile:
        out.height[j] = Percentile(std::move(z), options.percentile);
        break;
      case HeightAggregator::kMax:
        out.height[j] = *std::max_element(z.begin(), z.end());
        break;
      case HeightAggregator::kMin:
        out.height[j] = *std::min_element(z.begin(), z.end());
        break;
      case HeightAggregator::kMean:
        out.height[j] = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
        break;
    }
  }
  return out;
}

namespace {

// numeric rows of a CSV, skipping comments and a non-numeric header
std::vector<std::vector<double>> NumericRows(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    bool numeric = true;
    std::size_t p = 0;
    while (p <= line.size()) {
      std::size_t q = line.find(',', p);
      if (q == std::string_view::npos) q = line.size();
      std::string_view field = line.substr(p, q - p);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
      p = q + 1;
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      Fail(ErrorCode::kConfig,
           "cloud CSV line " + std::to_string(line_no) + " is not numeric");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      Fail(ErrorCode::kShape,
           "cloud CSV line " + std::to_string(line_no) + " has a different column count");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

LiftedFeatureCloud CloudFromCsv(std::string_view text) {
  auto rows = NumericRows(text);
  if (rows.empty()) Fail(ErrorCode::kConfig, "cloud CSV has no rows");
  int cols = static_cast<int>(rows.front().size());
  if (cols < 3) Fail(ErrorCode::kShape, "cloud CSV needs x,y,z columns");
  LiftedFeatureCloud cloud;
  cloud.channels = std::max(1, cols - 4);
  std::vector<double> zero(cloud.channels, 0.0);
  for (const auto& r : rows) {
    double p = cols > 3 ? r[3] : 1.0;
    std::span<const double> phi =
        cols > 4 ? std::span<const double>(r.data() + 4, cols - 4)
                 : std::span<const double>(zero);
    cloud.Add({r[0], r[1], r[2]}, p, phi);
  }
  cloud.Validate();
  return cloud;
}

std::vector<Vec3d> PointsFromCsv(std::string_view text) {
  auto rows = NumericRows(text);
  std::vector<Vec3d> out;
  for (const auto& r : rows) {
    if (r.size() < 3) Fail(ErrorCode::kShape, "point CSV needs x,y,z columns");
    out.push_back({r[0], r[1], r[2]});
  }
  return out;
}

void ParseCamera(std::string_view json_text, CameraIntrinsics* k,
                 Extrinsics* pose) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
    k->fx = j.at("fx").get<double>();
    k->fy = j.at("fy").get<double>();
    k->cx = j.at("cx").get<double>();
    k->cy = j.at("cy").get<double>();
    *pose = Extrinsics{};
    if (j.contains("pose")) {
      const auto& p = j.at("pose");
      if (p.contains("R")) {
        auto r = p.at("R").get<std::vector<double>>();
        if (r.size() != 9) Fail(ErrorCode::kShape, "camera R needs 9 values");
        for (int i = 0; i < 9; ++i) pose->R.m[i] = r[i];
      }
      if (p.contains("t")) {
        auto t = p.at("t").get<std::vector<double>>();
        if (t.size() != 3) Fail(ErrorCode::kShape, "camera t needs 3 values");
        pose->t = {t[0], t[1], t[2]};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("camera file: ") + e.what());
  }
  k->Validate();
}

}  // namespace tracksim
