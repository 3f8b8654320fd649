#include "slipflow/symbolic.hpp"

#include <cmath>
#include <sstream>

namespace slipflow::symbolic {

struct Expr::Node {
  Op op;
  double c = 0;
  int k = 0;  // variable index or exponent
  std::shared_ptr<const Node> a, b;
};

namespace {

std::shared_ptr<const Expr::Node> make(Expr::Op op, double c, int k,
                                       std::shared_ptr<const Expr::Node> a = nullptr,
                                       std::shared_ptr<const Expr::Node> b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->c = c;
  n->k = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

}  // namespace

Expr::Expr(double c) : n_(make(Op::Const, c, 0)) {}

Expr Expr::var(int i) {
  if (i != 0 && i != 1) throw InvalidInput("sym::Expr::var: index must be 0 or 1");
  return Expr(make(Op::Var, 0, i));
}

Expr::Op Expr::op() const { return n_->op; }

bool Expr::is_const(double* value) const {
  if (n_->op != Op::Const) return false;
  if (value) *value = n_->c;
  return true;
}

Expr operator+(const Expr& a, const Expr& b) {
  double x, y;
  bool ca = a.is_const(&x), cb = b.is_const(&y);
  if (ca && cb) return Expr(x + y);
  if (ca && x == 0) return b;
  if (cb && y == 0) return a;
  return Expr(make(Expr::Op::Add, 0, 0, a.n_, b.n_));
}

Expr operator*(const Expr& a, const Expr& b) {
  double x, y;
  bool ca = a.is_const(&x), cb = b.is_const(&y);
  if (ca && cb) return Expr(x * y);
  if ((ca && x == 0) || (cb && y == 0)) return Expr(0.0);
  if (ca && x == 1) return b;
  if (cb && y == 1) return a;
  return Expr(make(Expr::Op::Mul, 0, 0, a.n_, b.n_));
}

Expr operator-(const Expr& a) {
  double x;
  if (a.is_const(&x)) return Expr(-x);
  if (a.op() == Expr::Op::Neg) return Expr(a.n_->a);
  return Expr(make(Expr::Op::Neg, 0, 0, a.n_));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr sin(const Expr& a) {
  double x;
  if (a.is_const(&x)) return Expr(std::sin(x));
  return Expr(make(Expr::Op::Sin, 0, 0, a.n_));
}

Expr cos(const Expr& a) {
  double x;
  if (a.is_const(&x)) return Expr(std::cos(x));
  return Expr(make(Expr::Op::Cos, 0, 0, a.n_));
}

Expr pow(const Expr& a, int k) {
  double x;
  if (k == 0) return Expr(1.0);
  if (k == 1) return a;
  if (a.is_const(&x)) return Expr(std::pow(x, k));
  return Expr(make(Expr::Op::Pow, 0, k, a.n_));
}

double Expr::eval(const Vec2& x) const {
  const Node& n = *n_;
  const Expr A(n.a), B(n.b);
  switch (n.op) {
    case Op::Const: return n.c;
    case Op::Var: return x[n.k];
    case Op::Add: return A.eval(x) + B.eval(x);
    case Op::Mul: return A.eval(x) * B.eval(x);
    case Op::Neg: return -A.eval(x);
    case Op::Sin: return std::sin(A.eval(x));
    case Op::Cos: return std::cos(A.eval(x));
    case Op::Pow: return std::pow(A.eval(x), n.k);
  }
  return 0;
}

Expr Expr::diff(int v) const {
  const Node& n = *n_;
  const Expr A(n.a), B(n.b);
  switch (n.op) {
    case Op::Const: return Expr(0.0);
    case Op::Var: return Expr(n.k == v ? 1.0 : 0.0);
    case Op::Add: return A.diff(v) + B.diff(v);
    case Op::Mul: return A.diff(v) * B + A * B.diff(v);
    case Op::Neg: return -A.diff(v);
    case Op::Sin: return cos(A) * A.diff(v);
    case Op::Cos: return -(sin(A) * A.diff(v));
    case Op::Pow: return Expr(static_cast<double>(n.k)) * pow(A, n.k - 1) * A.diff(v);
  }
  return Expr(0.0);
}

std::string Expr::str() const {
  const Node& n = *n_;
  const Expr A(n.a), B(n.b);
  std::ostringstream os;
  switch (n.op) {
    case Op::Const: os << n.c; break;
    case Op::Var: os << (n.k == 0 ? "x" : "y"); break;
    case Op::Add: os << "(" << A.str() << " + " << B.str() << ")"; break;
    case Op::Mul: os << A.str() << "*" << B.str(); break;
    case Op::Neg: os << "-" << A.str(); break;
    case Op::Sin: os << "sin(" << A.str() << ")"; break;
    case Op::Cos: os << "cos(" << A.str() << ")"; break;
    case Op::Pow: os << A.str() << "^" << n.k; break;
  }
  return os.str();
}

ScalarField to_field(const Expr& e) {
  Expr gx = dx(e), gy = dy(e);
  return {[e](const Vec2& x) { return e.eval(x); },
          [gx, gy](const Vec2& x) { return Vec2(gx.eval(x), gy.eval(x)); }};
}

VectorField to_field(const Vec& v) {
  Expr d[2][2] = {{dx(v.c[0]), dy(v.c[0])}, {dx(v.c[1]), dy(v.c[1])}};
  return {[v](const Vec2& x) { return Vec2(v.c[0].eval(x), v.c[1].eval(x)); },
          [d](const Vec2& x) {
            Mat2 m;
            m << d[0][0].eval(x), d[0][1].eval(x), d[1][0].eval(x), d[1][1].eval(x);
            return m;
          }};
}

}  // namespace slipflow::symbolic
