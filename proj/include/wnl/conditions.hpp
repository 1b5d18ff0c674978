#pragma once

// Labelled residual/condition collections and engine error types shared by
// all backends.

#include "wnl/expr.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace wnl {

struct Condition {
  std::string label;
  Expr value;
};

struct ConditionSet {
  std::vector<Condition> items;

  /// Record a residual; identically-zero values are dropped.
  void add(std::string label, Expr value) {
    if (!value.is_zero()) items.push_back({std::move(label), std::move(value)});
  }
  bool empty() const { return items.empty(); }
  size_t size() const { return items.size(); }
};

enum class ErrCode {
  NotSkewAdjoint,
  SingularMetric,
  NonTerminating,
  UnclassifiableTerm,
  Parse,
  Internal,
};

struct EngineError : std::runtime_error {
  ErrCode code;
  EngineError(ErrCode c, const std::string& msg)
      : std::runtime_error(msg), code(c) {}
};

} // namespace wnl
