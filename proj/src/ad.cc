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

#include "tracksim/ad.h"

#include <cmath>
#include <limits>

#include "tracksim/error.h"

namespace tracksim::ad {
namespace {

thread_local Tape* active_tape = nullptr;

Tape& RequireActive() {
  if (active_tape == nullptr) {
    Fail(ErrorCode::kConfig,
         "ad: operation on a recorded Var with no active tape");
  }
  return *active_tape;
}

}  // namespace

std::string_view OpKindName(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kNeg: return "neg";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kMax: return "max";
    case OpKind::kMin: return "min";
    case OpKind::kAbs: return "abs";
    case OpKind::kSin: return "sin";
    case OpKind::kCos: return "cos";
    case OpKind::kAcos: return "acos";
    case OpKind::kAtan2: return "atan2";
  }
  return "unknown";
}

Tape::Tape(std::size_t budget_bytes)
    : budget_bytes_(budget_bytes), max_nodes_(budget_bytes / kBytesPerNode) {
  if (max_nodes_ > static_cast<std::size_t>(
                       std::numeric_limits<std::int32_t>::max())) {
    max_nodes_ = std::numeric_limits<std::int32_t>::max();
  }
}

Var Tape::Leaf(double value) {
  return Var(value, Push(OpKind::kLeaf, kConstant, 0.0, kConstant, 0.0));
}

std::int32_t Tape::Push(OpKind kind, std::int32_t a, double da,
                        std::int32_t b, double db) {
  if (parent_a_.size() >= max_nodes_) {
    Fail(ErrorCode::kTapeOverflow,
         "tape exceeded its budget of " + std::to_string(budget_bytes_) +
             " bytes (" + std::to_string(max_nodes_) + " nodes)");
  }
  parent_a_.push_back(a);
  parent_b_.push_back(b);
  partial_a_.push_back(da);
  partial_b_.push_back(db);
  kinds_.push_back(kind);
  return static_cast<std::int32_t>(parent_a_.size() - 1);
}

void Tape::Reserve(std::size_t nodes) {
  if (nodes > max_nodes_) nodes = max_nodes_;
  parent_a_.reserve(nodes);
  parent_b_.reserve(nodes);
  partial_a_.reserve(nodes);
  partial_b_.reserve(nodes);
  kinds_.reserve(nodes);
}

void Tape::Clear() {
  parent_a_.clear();
  parent_b_.clear();
  partial_a_.clear();
  partial_b_.clear();
  kinds_.clear();
}

BackwardResult Tape::Backward(const Var& root, double seed) const {
  BackwardResult result;
  result.adjoints.assign(size(), 0.0);
  if (!root.is_constant()) result.adjoints[root.index] = seed;
  Sweep(result);
  return result;
}

BackwardResult Tape::Backward(std::span<const Var> roots,
                              std::span<const double> weights) const {
  BackwardResult result;
  result.adjoints.assign(size(), 0.0);
  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (!roots[k].is_constant()) {
      result.adjoints[roots[k].index] += weights[k];
    }
  }
  Sweep(result);
  return result;
}

void Tape::Sweep(BackwardResult& result) const {
  std::vector<double>& adj = result.adjoints;
  for (std::size_t n = size(); n-- > 0;) {
    double g = adj[n];
    if (g == 0.0) continue;
    std::int32_t a = parent_a_[n];
    std::int32_t b = parent_b_[n];
    if (a != kConstant) {
      double c = g * partial_a_[n];
      if (result.finite && !std::isfinite(c)) {
        result.finite = false;
        result.offending = kinds_[n];
      }
      adj[a] += c;
    }
    if (b != kConstant) {
      double c = g * partial_b_[n];
      if (result.finite && !std::isfinite(c)) {
        result.finite = false;
        result.offending = kinds_[n];
      }
      adj[b] += c;
    }
  }
}

Tape* Tape::Active() { return active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(active_tape) {
  active_tape = &tape;
}

TapeScope::~TapeScope() { active_tape = previous_; }

namespace internal {

Var Unary(OpKind kind, const Var& a, double value, double da) {
  Tape& tape = RequireActive();
  return Var(value, tape.Push(kind, a.index, da, kConstant, 0.0));
}

Var Binary(OpKind kind, const Var& a, const Var& b, double value, double da,
           double db) {
  Tape& tape = RequireActive();
  // constant operands carry no parent; their partials are dropped
  return Var(value, tape.Push(kind, a.index, a.is_constant() ? 0.0 : da,
                              b.index, b.is_constant() ? 0.0 : db));
}

}  // namespace internal
}  // namespace tracksim::ad
