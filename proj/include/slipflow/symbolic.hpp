#pragma once

#include "slipflow/common.hpp"

#include <memory>
#include <string>

namespace slipflow::symbolic {

/// Expression over x, y built from constants, +, -, *, integer powers,
/// sin and cos. Derivatives are exact.
class Expr {
 public:
  enum class Op { Const, Var, Add, Mul, Neg, Sin, Cos, Pow };

  Expr(double c = 0);  // NOLINT: implicit constants read naturally in formulas
  static Expr var(int i);

  double eval(const Vec2& x) const;
  Expr diff(int var) const;
  std::string str() const;

  Op op() const;
  bool is_const(double* value = nullptr) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr pow(const Expr& a, int k);

  struct Node;  // implementation detail

 private:
  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

inline Expr X() { return Expr::var(0); }
inline Expr Y() { return Expr::var(1); }

struct Vec {
  Expr c[2];
};

inline Expr dx(const Expr& e) { return e.diff(0); }
inline Expr dy(const Expr& e) { return e.diff(1); }

ScalarField to_field(const Expr& e);
VectorField to_field(const Vec& v);

}  // namespace slipflow::symbolic
