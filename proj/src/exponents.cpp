#include "slipflow/exponents.hpp"

#include "slipflow/common.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace slipflow {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational reduce(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("rational division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  Rational r;
  r.num = narrow(n);
  r.den = narrow(d);
  return r;
}

constexpr double kSlack = 1e-12;

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) { *this = reduce(n, d); }

std::int64_t Rational::floor() const {
  std::int64_t q = num / den;
  if (num % den != 0 && num < 0) --q;
  return q;
}

std::int64_t Rational::ceil() const {
  std::int64_t q = num / den;
  if (num % den != 0 && num > 0) ++q;
  return q;
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational operator+(const Rational& a, const Rational& b) {
  return reduce(i128(a.num) * b.den + i128(b.num) * a.den, i128(a.den) * b.den);
}
Rational operator-(const Rational& a, const Rational& b) {
  return reduce(i128(a.num) * b.den - i128(b.num) * a.den, i128(a.den) * b.den);
}
Rational operator*(const Rational& a, const Rational& b) {
  return reduce(i128(a.num) * b.num, i128(a.den) * b.den);
}
Rational operator/(const Rational& a, const Rational& b) {
  return reduce(i128(a.num) * b.den, i128(a.den) * b.num);
}
int compare(const Rational& a, const Rational& b) {
  i128 l = i128(a.num) * b.den, r = i128(b.num) * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

Num Num::real(double x) {
  Num n;
  n.exact_ = false;
  n.x_ = x;
  return n;
}

Num Num::parse(const std::string& text) {
  auto bad = [&] { return InvalidInput("cannot parse exponent '" + text + "'"); };
  if (text.empty()) throw bad();
  std::size_t slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      Num a = parse(text.substr(0, slash)), b = parse(text.substr(slash + 1));
      return a / b;
    }
    // [-]digits[.digits][e[-]digits]
    std::size_t i = 0;
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
    i128 mant = 0;
    int scale = 0, digits = 0;
    bool exact = true;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i, ++digits) {
      mant = mant * 10 + (text[i] - '0');
      if (mant > i128(1) << 62) exact = false;
    }
    if (i < text.size() && text[i] == '.')
      for (++i; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i, ++digits) {
        mant = mant * 10 + (text[i] - '0');
        --scale;
        if (mant > i128(1) << 62) exact = false;
      }
    if (digits == 0) throw bad();
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
      std::size_t used = 0;
      int e = std::stoi(text.substr(i + 1), &used);
      if (used == 0) throw bad();
      scale += e;
      i += 1 + used;
    }
    if (i != text.size()) throw bad();
    if (!exact || std::abs(scale) > 18) return real(std::stod(text));
    i128 p = 1;
    for (int k = 0; k < std::abs(scale); ++k) p *= 10;
    i128 n = neg ? -mant : mant;
    return scale >= 0 ? Num(reduce(n * p, 1)) : Num(reduce(n, p));
  } catch (const std::overflow_error&) {
    return real(std::stod(text));
  } catch (const std::invalid_argument&) {
    throw bad();
  } catch (const std::out_of_range&) {
    throw bad();
  }
}

std::string Num::str() const {
  if (exact_) return q_.str();
  std::ostringstream os;
  os.precision(17);
  os << x_;
  return os.str();
}

namespace {

template <class ExactOp, class FloatOp>
Num combine(const Num& a, const Num& b, ExactOp eop, FloatOp fop) {
  if (a.exact() && b.exact()) {
    try {
      return Num(eop(a.rational(), b.rational()));
    } catch (const std::overflow_error&) {
    }
  }
  return Num::real(fop(a.value(), b.value()));
}

}  // namespace

Num operator+(const Num& a, const Num& b) {
  return combine(a, b, [](auto x, auto y) { return x + y; }, [](double x, double y) { return x + y; });
}
Num operator-(const Num& a, const Num& b) {
  return combine(a, b, [](auto x, auto y) { return x - y; }, [](double x, double y) { return x - y; });
}
Num operator*(const Num& a, const Num& b) {
  return combine(a, b, [](auto x, auto y) { return x * y; }, [](double x, double y) { return x * y; });
}
Num operator/(const Num& a, const Num& b) {
  if (b.value() == 0) throw InvalidInput("exponent division by zero");
  return combine(a, b, [](auto x, auto y) { return x / y; }, [](double x, double y) { return x / y; });
}
Num operator-(const Num& a) { return a.exact() ? Num(-a.rational()) : Num::real(-a.value()); }

int compare(const Num& a, const Num& b) {
  if (a.exact() && b.exact()) return compare(a.rational(), b.rational());
  double x = a.value(), y = b.value();
  double tol = kSlack * std::max({1.0, std::abs(x), std::abs(y)});
  if (x < y - tol) return -1;
  if (x > y + tol) return 1;
  return 0;
}

std::int64_t Num::ceil() const {
  if (exact_) return q_.ceil();
  return static_cast<std::int64_t>(std::ceil(x_ - kSlack * std::max(1.0, std::abs(x_))));
}

Num ExponentLadder::inv(std::int64_t m) const {
  if (m < 0) throw InvalidInput("ladder index must be >= 0");
  if (m < static_cast<std::int64_t>(inv_t.size())) return inv_t[m];
  return inv_t.front() - Num(m) * step;
}

double ExponentLadder::t(std::int64_t m) const {
  double v = inv(m).value();
  return inv(m) <= Num(0) ? INFINITY : 1 / v;
}

namespace {

constexpr std::int64_t kMaxStored = 4096;

void fill(ExponentLadder& L) {
  std::int64_t count = std::min<std::int64_t>(L.M + 1, kMaxStored);
  L.truncated = L.M + 1 > kMaxStored;
  L.inv_t.reserve(count);
  for (std::int64_t m = 1; m < count; ++m) L.inv_t.push_back(L.inv_t.back() - L.step);
  // t_m >= 2  <=>  1/t_m <= 1/2
  const Num half = Rational(1, 2);
  Num need = (L.inv_t.front() - half) / L.step;
  L.M_first = need <= Num(0) ? 0 : need.ceil();
}

void check_sn(const Num& s, int n) {
  if (n < 2) throw InvalidInput("ladder: need n >= 2");
  if (!(s > Num(n))) throw InvalidInput("ladder: need s > n");
}

}  // namespace

ExponentLadder slip_ladder(const Num& s, int n) {
  check_sn(s, n);
  ExponentLadder L;
  L.flavor = LadderFlavor::Slip;
  L.n = n;
  L.s = s;
  const Num one(1), N(n);
  L.inv_t_minus1 = one - one / s;
  L.inv_t.push_back(one - Num(2) / (s + N));
  L.step = one / N - one / s;
  L.M = ((Rational(1, 2) - Num(2) / (s + N)) / L.step).ceil();
  fill(L);
  return L;
}

ExponentLadder navier_ladder(const Num& s, int n, const Num& q) {
  check_sn(s, n);
  if (!(q > Num(n - 1))) throw InvalidInput("navier_ladder: need q > n - 1");
  ExponentLadder L;
  L.flavor = LadderFlavor::Friction;
  L.n = n;
  L.s = s;
  L.q = q;
  const Num one(1), N(n);
  L.inv_t.push_back(one - one / s);
  Num factor = one - Num(n - 1) / q;
  L.step = factor / N;
  Num inner(((L.inv_t.front() - Rational(1, 2))).ceil());
  L.M = (N / factor * inner).ceil();
  fill(L);
  return L;
}

ChainReport check_embedding_chain(const ExponentLadder& L) {
  ChainReport rep;
  const Num one(1), invn = one / Num(L.n), zero(0);
  // 1/t for index m, with m = -1 the conjugate of s on slip ladders
  auto inv_at = [&](std::int64_t m) { return m < 0 ? *L.inv_t_minus1 : L.inv(m); };
  std::int64_t start = L.inv_t_minus1 ? 0 : 1;
  std::int64_t last = std::min<std::int64_t>(L.M, kMaxStored - 1);
  if (L.inv_t_minus1) rep.first_gap = inv_at(0) - (inv_at(-1) - invn);
  for (std::int64_t m = start; m <= last; ++m) {
    Num prev = inv_at(m - 1), cur = inv_at(m);
    // primal: t_{m-1} < n is needed for t*_{m-1}
    if (!rep.terminated) {
      if (prev <= invn) {
        rep.terminated = true;
        rep.terminated_at = m;
      } else {
        ++rep.checked;
        Num star = prev - invn;  // 1/t*_{m-1} > 0
        if (cur < star) {
          rep.holds = false;
          rep.failures.push_back("t_" + std::to_string(m) + " > t*_" + std::to_string(m - 1));
        }
      }
    }
    // dual: 1/t'_{m-1} >= 1/(t'_m)* when t'_m < n; trivial otherwise
    Num dual_cur = one - cur, dual_prev = one - prev;
    if (dual_cur > invn) {
      ++rep.checked;
      Num star = dual_cur - invn;
      if (dual_prev < star) {
        rep.holds = false;
        rep.failures.push_back("t'_" + std::to_string(m - 1) + " > (t'_" + std::to_string(m) + ")*");
      }
    }
  }
  return rep;
}

bool friction_exponent_gate(const Num& r, int n, const Num& q) {
  if (n < 2) throw InvalidInput("friction gate: need n >= 2");
  if (!(r > Num(1))) throw InvalidInput("friction gate: need r > 1");
  if (!(q > Num(0))) throw InvalidInput("friction gate: need q > 0");
  const Num N(n), nprime = N / Num(n - 1);
  if (r > N) return q >= r / nprime;
  if (r >= nprime) return q > Num(n - 1);
  Num rprime = r / (r - Num(1));
  return q > rprime / nprime;
}

}  // namespace slipflow
