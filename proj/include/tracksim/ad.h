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

// Reverse-mode automatic differentiation over a recorded operation tape.
//
// A Var is a double value plus the index of the tape node that produced it.
// Vars with index kConstant never touch the tape, so a computation with no
// registered leaves records nothing. Each thread has at most one active tape
// (set with TapeScope); arithmetic on non-constant Vars appends nodes to it.
// Every node has at most two parents with the local partial derivatives
// stored alongside, so the backward sweep is a single reverse pass.

#ifndef TRACKSIM_AD_H_
#define TRACKSIM_AD_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tracksim::ad {

enum class OpKind : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSqrt,
  kExp,
  kLog,
  kSigmoid,
  kMax,
  kMin,
  kAbs,
  kSin,
  kCos,
  kAcos,
  kAtan2,
};

std::string_view OpKindName(OpKind kind);

inline constexpr std::int32_t kConstant = -1;

class Tape;

struct Var {
  double value = 0.0;
  std::int32_t index = kConstant;

  Var() = default;
  // implicit so literals and doubles mix freely with Vars in templates
  Var(double v) : value(v) {}  // NOLINT
  Var(double v, std::int32_t i) : value(v), index(i) {}

  bool is_constant() const { return index == kConstant; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
};

// Bytes consumed per recorded node, used to enforce the memory budget.
inline constexpr std::size_t kBytesPerNode =
    2 * sizeof(std::int32_t) + 2 * sizeof(double) + sizeof(OpKind);

struct BackwardResult {
  std::vector<double> adjoints;  // one per tape node
  bool finite = true;
  // op kind of the node whose local partial first produced a non-finite
  // adjoint, valid when finite is false
  OpKind offending = OpKind::kLeaf;
};

class Tape {
 public:
  // default budget: 2 GiB of node storage
  static constexpr std::size_t kDefaultBudgetBytes = std::size_t{2} << 30;

  explicit Tape(std::size_t budget_bytes = kDefaultBudgetBytes);

  Var Leaf(double value);

  // records a node; b may be kConstant for unary ops
  std::int32_t Push(OpKind kind, std::int32_t a, double da, std::int32_t b,
                    double db);

  std::size_t size() const { return parent_a_.size(); }
  std::size_t budget_bytes() const { return budget_bytes_; }
  std::size_t bytes_used() const { return size() * kBytesPerNode; }
  void Reserve(std::size_t nodes);
  void Clear();

  // d(root)/d(node) for every node, seeded with d(root)/d(root) = seed
  BackwardResult Backward(const Var& root, double seed = 1.0) const;
  // seeds several outputs at once: sum_k weights[k] * roots[k]
  BackwardResult Backward(std::span<const Var> roots,
                          std::span<const double> weights) const;

  static Tape* Active();

 private:
  friend class TapeScope;
  void Sweep(BackwardResult& result) const;

  std::size_t budget_bytes_;
  std::size_t max_nodes_;
  std::vector<std::int32_t> parent_a_;
  std::vector<std::int32_t> parent_b_;
  std::vector<double> partial_a_;
  std::vector<double> partial_b_;
  std::vector<OpKind> kinds_;
};

// Makes a tape the active recording target for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

namespace internal {
Var Unary(OpKind kind, const Var& a, double value, double da);
Var Binary(OpKind kind, const Var& a, const Var& b, double value, double da,
           double db);
}  // namespace internal

inline Var operator+(const Var& a, const Var& b) {
  double v = a.value + b.value;
  if (a.is_constant() && b.is_constant()) return Var(v);
  return internal::Binary(OpKind::kAdd, a, b, v, 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  double v = a.value - b.value;
  if (a.is_constant() && b.is_constant()) return Var(v);
  return internal::Binary(OpKind::kSub, a, b, v, 1.0, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  double v = a.value * b.value;
  if (a.is_constant() && b.is_constant()) return Var(v);
  return internal::Binary(OpKind::kMul, a, b, v, b.value, a.value);
}
inline Var operator/(const Var& a, const Var& b) {
  double v = a.value / b.value;
  if (a.is_constant() && b.is_constant()) return Var(v);
  return internal::Binary(OpKind::kDiv, a, b, v, 1.0 / b.value,
                          -v / b.value);
}
inline Var operator-(const Var& a) {
  if (a.is_constant()) return Var(-a.value);
  return internal::Unary(OpKind::kNeg, a, -a.value, -1.0);
}

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }

inline bool operator<(const Var& a, const Var& b) { return a.value < b.value; }
inline bool operator>(const Var& a, const Var& b) { return a.value > b.value; }
inline bool operator<=(const Var& a, const Var& b) {
  return a.value <= b.value;
}
inline bool operator>=(const Var& a, const Var& b) {
  return a.value >= b.value;
}

inline Var sqrt(const Var& a) {
  double v = std::sqrt(a.value);
  if (a.is_constant()) return Var(v);
  return internal::Unary(OpKind::kSqrt, a, v, 0.5 / v);
}
inline Var exp(const Var& a) {
  double v = std::exp(a.value);
  if (a.is_constant()) return Var(v);
  return internal::Unary(OpKind::kExp, a, v, v);
}
inline Var log(const Var& a) {
  double v = std::log(a.value);
  if (a.is_constant()) return Var(v);
  return internal::Unary(OpKind::kLog, a, v, 1.0 / a.value);
}
inline Var sin(const Var& a) {
  double v = std::sin(a.value);
  if (a.is_constant()) return Var(v);
  return internal::Unary(OpKind::kSin, a, v, std::cos(a.value));
}
inline Var cos(const Var& a) {
  double v = std::cos(a.value);
  if (a.is_constant()) return Var(v);
  return internal::Unary(OpKind::kCos, a, v, -std::sin(a.value));
}
inline Var acos(const Var& a) {
  double v = std::acos(a.value);
  if (a.is_constant()) return Var(v);
  return internal::Unary(OpKind::kAcos, a, v,
                         -1.0 / std::sqrt(1.0 - a.value * a.value));
}
inline Var abs(const Var& a) {
  double v = std::abs(a.value);
  if (a.is_constant()) return Var(v);
  return internal::Unary(OpKind::kAbs, a, v, a.value < 0.0 ? -1.0 : 1.0);
}
inline Var atan2(const Var& y, const Var& x) {
  double v = std::atan2(y.value, x.value);
  if (y.is_constant() && x.is_constant()) return Var(v);
  double r2 = x.value * x.value + y.value * y.value;
  return internal::Binary(OpKind::kAtan2, y, x, v, x.value / r2,
                          -y.value / r2);
}
// ties pick a, matching std::max
inline Var max(const Var& a, const Var& b) {
  bool pick_b = a.value < b.value;
  double v = pick_b ? b.value : a.value;
  if (a.is_constant() && b.is_constant()) return Var(v);
  return internal::Binary(OpKind::kMax, a, b, v, pick_b ? 0.0 : 1.0,
                          pick_b ? 1.0 : 0.0);
}
inline Var min(const Var& a, const Var& b) {
  bool pick_b = b.value < a.value;
  double v = pick_b ? b.value : a.value;
  if (a.is_constant() && b.is_constant()) return Var(v);
  return internal::Binary(OpKind::kMin, a, b, v, pick_b ? 0.0 : 1.0,
                          pick_b ? 1.0 : 0.0);
}

inline double Value(const Var& a) { return a.value; }

}  // namespace tracksim::ad

namespace tracksim {

// value extraction that works for every scalar the engine runs on
inline double Value(double a) { return a; }
inline double Value(float a) { return a; }
using ad::Value;

// logistic function written once so every scalar type evaluates it the same
// way; the tape records it as a single node
template <class T>
T Sigmoid(const T& x) {
  using std::exp;
  return T(1) / (T(1) + exp(-x));
}

template <>
inline ad::Var Sigmoid<ad::Var>(const ad::Var& x) {
  double s = 1.0 / (1.0 + std::exp(-x.value));
  if (x.is_constant()) return ad::Var(s);
  return ad::internal::Unary(ad::OpKind::kSigmoid, x, s, s * (1.0 - s));
}

}  // namespace tracksim

#endif  // TRACKSIM_AD_H_
