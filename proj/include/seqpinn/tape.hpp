#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "seqpinn/errors.hpp"

namespace seqpinn {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; never outlives its tape.
class Var {
 public:
  Var() = default;
  double value() const { return val_; }

 private:
  friend class Tape;
  friend Var operator+(Var, Var);
  friend Var operator-(Var, Var);
  friend Var operator*(Var, Var);
  friend Var operator/(Var, Var);
  friend Var operator+(Var, double);
  friend Var operator+(double, Var);
  friend Var operator-(Var, double);
  friend Var operator-(double, Var);
  friend Var operator*(Var, double);
  friend Var operator*(double, Var);
  friend Var operator/(Var, double);
  friend Var operator/(double, Var);
  friend Var operator-(Var);
  friend Var tanh(Var);
  friend Var sin(Var);
  friend Var cos(Var);
  friend Var pow(Var, int);
  friend Var exp(Var);
  friend Var sqrt(Var);
  friend Var log(Var);

  Var(Tape* t, std::uint32_t i, double v) : tape_(t), idx_(i), val_(v) {}
  Tape* tape_ = nullptr;
  std::uint32_t idx_ = 0;
  double val_ = 0;
};

/// Append-only reverse-mode tape over the closed operation set used by the
/// solver's loss algebra: +, -, *, tanh, sin, cos, integer powers, and
/// caller-supplied primitives with precomputed partials. Operations outside
/// that set (division by a variable, exp, sqrt, log) throw
/// unsupported_operation instead of silently producing wrong gradients.
class Tape {
 public:
  Var leaf(double value) { return record(value, 0, 0.0, 0, 0.0, 0); }

  /// Custom node with one or two explicit local partials, for quantities
  /// whose derivative is known analytically (e.g. influence weights as a
  /// function of the node parameter).
  Var primitive(double value, Var a, double d_da) {
    check(a);
    return record(value, a.idx_, d_da, 0, 0.0, 1);
  }
  Var primitive(double value, Var a, double d_da, Var b, double d_db) {
    check(a);
    check(b);
    return record(value, a.idx_, d_da, b.idx_, d_db, 2);
  }

  /// Reverse sweep from `root`; afterwards adjoint(v) = d root / d v.
  void backward(Var root) {
    check(root);
    adj_.assign(nodes_.size(), 0.0);
    adj_[root.idx_] = 1.0;
    for (std::uint32_t i = static_cast<std::uint32_t>(nodes_.size()); i-- > 0;) {
      const Node& n = nodes_[i];
      const double a = adj_[i];
      if (a == 0.0) continue;
      if (n.arity > 0) adj_[n.a1] += n.p1 * a;
      if (n.arity > 1) adj_[n.a2] += n.p2 * a;
    }
  }

  double adjoint(Var v) const {
    check(v);
    if (adj_.size() != nodes_.size())
      throw numeric_error("tape: adjoint queried before backward()");
    return adj_[v.idx_];
  }

  void clear() {
    nodes_.clear();
    adj_.clear();
  }
  std::size_t size() const { return nodes_.size(); }

 private:
  friend Var operator+(Var, Var);
  friend Var operator-(Var, Var);
  friend Var operator*(Var, Var);
  friend Var operator+(Var, double);
  friend Var operator-(Var, double);
  friend Var operator-(double, Var);
  friend Var operator*(Var, double);
  friend Var operator-(Var);
  friend Var tanh(Var);
  friend Var sin(Var);
  friend Var cos(Var);
  friend Var pow(Var, int);

  struct Node {
    double p1, p2;
    std::uint32_t a1, a2;
    std::uint8_t arity;
  };

  Var record(double value, std::uint32_t a1, double p1, std::uint32_t a2,
             double p2, std::uint8_t arity) {
    nodes_.push_back(Node{p1, p2, a1, a2, arity});
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
  }

  void check(Var v) const {
    if (v.tape_ != this || v.idx_ >= nodes_.size())
      throw numeric_error("tape: variable does not belong to this tape");
  }

  static Tape* same_tape(Var a, Var b) {
    if (a.tape_ == nullptr || a.tape_ != b.tape_)
      throw numeric_error("tape: operands recorded on different tapes");
    return a.tape_;
  }

  std::vector<Node> nodes_;
  std::vector<double> adj_;
};

inline Var operator+(Var a, Var b) {
  Tape* t = Tape::same_tape(a, b);
  return t->record(a.val_ + b.val_, a.idx_, 1.0, b.idx_, 1.0, 2);
}
inline Var operator-(Var a, Var b) {
  Tape* t = Tape::same_tape(a, b);
  return t->record(a.val_ - b.val_, a.idx_, 1.0, b.idx_, -1.0, 2);
}
inline Var operator*(Var a, Var b) {
  Tape* t = Tape::same_tape(a, b);
  return t->record(a.val_ * b.val_, a.idx_, b.val_, b.idx_, a.val_, 2);
}
inline Var operator/(Var, Var) {
  throw unsupported_operation("tape: division by a variable is not supported");
}

inline Var operator+(Var a, double s) {
  return a.tape_->record(a.val_ + s, a.idx_, 1.0, 0, 0.0, 1);
}
inline Var operator+(double s, Var a) { return a + s; }
inline Var operator-(Var a, double s) {
  return a.tape_->record(a.val_ - s, a.idx_, 1.0, 0, 0.0, 1);
}
inline Var operator-(double s, Var a) {
  return a.tape_->record(s - a.val_, a.idx_, -1.0, 0, 0.0, 1);
}
inline Var operator*(Var a, double s) {
  return a.tape_->record(a.val_ * s, a.idx_, s, 0, 0.0, 1);
}
inline Var operator*(double s, Var a) { return a * s; }
inline Var operator/(Var a, double s) { return a * (1.0 / s); }
inline Var operator/(double, Var) {
  throw unsupported_operation("tape: division by a variable is not supported");
}
inline Var operator-(Var a) { return a * -1.0; }

inline Var tanh(Var a) {
  const double y = std::tanh(a.val_);
  return a.tape_->record(y, a.idx_, 1.0 - y * y, 0, 0.0, 1);
}
inline Var sin(Var a) {
  return a.tape_->record(std::sin(a.val_), a.idx_, std::cos(a.val_), 0, 0.0, 1);
}
inline Var cos(Var a) {
  return a.tape_->record(std::cos(a.val_), a.idx_, -std::sin(a.val_), 0, 0.0, 1);
}
inline Var pow(Var a, int n) {
  if (n < 0)
    throw unsupported_operation("tape: negative integer powers are not supported");
  if (n == 0) return a.tape_->record(1.0, a.idx_, 0.0, 0, 0.0, 1);
  // Repeated multiplication keeps rounding identical to written-out products.
  double v = 1.0;
  for (int k = 0; k < n; ++k) v *= a.val_;
  double d = static_cast<double>(n);
  for (int k = 0; k < n - 1; ++k) d *= a.val_;
  return a.tape_->record(v, a.idx_, d, 0, 0.0, 1);
}
inline Var exp(Var) {
  throw unsupported_operation("tape: exp is not supported");
}
inline Var sqrt(Var) {
  throw unsupported_operation("tape: sqrt is not supported");
}
inline Var log(Var) {
  throw unsupported_operation("tape: log is not supported");
}

}  // namespace seqpinn
