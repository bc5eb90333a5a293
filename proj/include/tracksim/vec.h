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

// Small fixed-size vector and matrix templates. They are generic over the
// scalar so the same dynamics code runs on float, double and ad::Var.

#ifndef TRACKSIM_VEC_H_
#define TRACKSIM_VEC_H_

#include <array>
#include <cmath>

namespace tracksim {

template <class T>
struct Vec3 {
  T x{}, y{}, z{};

  Vec3() = default;
  Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  template <class U>
  static Vec3 Cast(const Vec3<U>& o) {
    return Vec3(T(o.x), T(o.y), T(o.z));
  }

  T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const T& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3& operator+=(const Vec3& o) {
    x = x + o.x;
    y = y + o.y;
    z = z + o.z;
    return *this;
  }
};

using Vec3d = Vec3<double>;

template <class T>
Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <class T>
Vec3<T> operator*(const T& s, const Vec3<T>& a) {
  return {s * a.x, s * a.y, s * a.z};
}
template <class T>
Vec3<T> operator*(const Vec3<T>& a, const T& s) {
  return {a.x * s, a.y * s, a.z * s};
}

template <class T>
T Dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
Vec3<T> Cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}

template <class T>
T SquaredNorm(const Vec3<T>& a) {
  return Dot(a, a);
}

template <class T>
T Norm(const Vec3<T>& a) {
  using std::sqrt;
  return sqrt(Dot(a, a));
}

// row-major 3x3
template <class T>
struct Mat3 {
  std::array<T, 9> m{};

  T& operator()(int r, int c) { return m[3 * r + c]; }
  const T& operator()(int r, int c) const { return m[3 * r + c]; }

  static Mat3 Identity() {
    Mat3 out;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out(i, j) = T(i == j ? 1.0 : 0.0);
    }
    return out;
  }

  static Mat3 Zero() {
    Mat3 out;
    for (auto& v : out.m) v = T(0.0);
    return out;
  }

  template <class U>
  static Mat3 Cast(const Mat3<U>& o) {
    Mat3 out;
    for (int i = 0; i < 9; ++i) out.m[i] = T(o.m[i]);
    return out;
  }

  Vec3<T> Column(int c) const { return {m[c], m[3 + c], m[6 + c]}; }
};

using Mat3d = Mat3<double>;

template <class T>
Mat3<T> operator+(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> out;
  for (int i = 0; i < 9; ++i) out.m[i] = a.m[i] + b.m[i];
  return out;
}
template <class T>
Mat3<T> operator-(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> out;
  for (int i = 0; i < 9; ++i) out.m[i] = a.m[i] - b.m[i];
  return out;
}
template <class T>
Mat3<T> operator*(const T& s, const Mat3<T>& a) {
  Mat3<T> out;
  for (int i = 0; i < 9; ++i) out.m[i] = s * a.m[i];
  return out;
}

template <class T>
Mat3<T> operator*(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    }
  }
  return out;
}

template <class T>
Vec3<T> operator*(const Mat3<T>& a, const Vec3<T>& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

template <class T>
Mat3<T> Transpose(const Mat3<T>& a) {
  Mat3<T> out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out(i, j) = a(j, i);
  }
  return out;
}

// a^T v without forming the transpose
template <class T>
Vec3<T> TransposeTimes(const Mat3<T>& a, const Vec3<T>& v) {
  return {a(0, 0) * v.x + a(1, 0) * v.y + a(2, 0) * v.z,
          a(0, 1) * v.x + a(1, 1) * v.y + a(2, 1) * v.z,
          a(0, 2) * v.x + a(1, 2) * v.y + a(2, 2) * v.z};
}

template <class T>
Mat3<T> Skew(const Vec3<T>& w) {
  Mat3<T> out = Mat3<T>::Zero();
  out(0, 1) = -w.z;
  out(0, 2) = w.y;
  out(1, 0) = w.z;
  out(1, 2) = -w.x;
  out(2, 0) = -w.y;
  out(2, 1) = w.x;
  return out;
}

template <class T>
T Trace(const Mat3<T>& a) {
  return a(0, 0) + a(1, 1) + a(2, 2);
}

template <class T>
T Determinant(const Mat3<T>& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// adjugate / determinant; caller guarantees invertibility
template <class T>
Mat3<T> Inverse(const Mat3<T>& a) {
  T det = Determinant(a);
  Mat3<T> adj;
  adj(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  adj(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  adj(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  adj(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  adj(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  adj(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  adj(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  adj(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  adj(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  Mat3<T> out;
  for (int i = 0; i < 9; ++i) out.m[i] = adj.m[i] / det;
  return out;
}

// Rodrigues formula for exp([axis * angle]x); axis need not be unit
inline Mat3d RotationFromAxisAngle(const Vec3d& axis, double angle) {
  double n = Norm(axis);
  if (n == 0.0 || angle == 0.0) return Mat3d::Identity();
  Vec3d k = (1.0 / n) * axis;
  Mat3d kx = Skew(k);
  return Mat3d::Identity() + std::sin(angle) * kx +
         (1.0 - std::cos(angle)) * (kx * kx);
}

inline Mat3d RotationFromRotationVector(const Vec3d& w) {
  return RotationFromAxisAngle(w, Norm(w));
}

// z-y-x intrinsic (yaw, pitch, roll)
inline Mat3d RotationFromEuler(double yaw, double pitch, double roll) {
  return RotationFromAxisAngle({0, 0, 1}, yaw) *
         RotationFromAxisAngle({0, 1, 0}, pitch) *
         RotationFromAxisAngle({1, 0, 0}, roll);
}

inline double Yaw(const Mat3d& r) { return std::atan2(r(1, 0), r(0, 0)); }

inline double Pitch(const Mat3d& r) {
  double s = -r(2, 0);
  s = s > 1.0 ? 1.0 : (s < -1.0 ? -1.0 : s);
  return std::asin(s);
}

inline double Roll(const Mat3d& r) { return std::atan2(r(2, 1), r(2, 2)); }

// unit quaternion (w, x, y, z) of a rotation matrix
std::array<double, 4> QuaternionFromRotation(const Mat3d& r);
Mat3d RotationFromQuaternion(const std::array<double, 4>& q);

// geodesic angle between two rotations, argument of acos clamped to [-1, 1]
double RotationAngleBetween(const Mat3d& a, const Mat3d& b);

}  // namespace tracksim

#endif  // TRACKSIM_VEC_H_
