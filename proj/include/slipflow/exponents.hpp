#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slipflow {

/// Reduced fraction num/den with den > 0. Arithmetic throws
/// std::overflow_error if a result does not fit in int64.
struct Rational {
  std::int64_t num = 0, den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);  // NOLINT

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::int64_t floor() const;
  std::int64_t ceil() const;
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a) { return Rational(-a.num, a.den); }
  friend int compare(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
};

/// Exponent value: exact rational when every input was, double otherwise.
/// An exact operation that would overflow falls back to double.
class Num {
 public:
  Num(std::int64_t n = 0) : exact_(true), q_(n) {}  // NOLINT
  Num(Rational q) : exact_(true), q_(q) {}           // NOLINT
  static Num real(double x);
  /// "3", "-2.75", "4/3", "1e-3"; decimals become exact fractions.
  static Num parse(const std::string& text);

  bool exact() const { return exact_; }
  const Rational& rational() const { return q_; }
  double value() const { return exact_ ? q_.value() : x_; }
  std::string str() const;

  friend Num operator+(const Num& a, const Num& b);
  friend Num operator-(const Num& a, const Num& b);
  friend Num operator*(const Num& a, const Num& b);
  friend Num operator/(const Num& a, const Num& b);
  friend Num operator-(const Num& a);

  /// -1, 0, 1; doubles compare with 1e-12 relative slack.
  friend int compare(const Num& a, const Num& b);
  friend bool operator<(const Num& a, const Num& b) { return compare(a, b) < 0; }
  friend bool operator<=(const Num& a, const Num& b) { return compare(a, b) <= 0; }
  friend bool operator>(const Num& a, const Num& b) { return compare(a, b) > 0; }
  friend bool operator>=(const Num& a, const Num& b) { return compare(a, b) >= 0; }
  friend bool operator==(const Num& a, const Num& b) { return compare(a, b) == 0; }

  std::int64_t ceil() const;

 private:
  bool exact_ = true;
  Rational q_;
  double x_ = 0;
};

enum class LadderFlavor { Slip, Friction };

/// Exponents stored by their reciprocals; 1/t <= 0 means t = +inf.
struct ExponentLadder {
  LadderFlavor flavor = LadderFlavor::Slip;
  int n = 2;
  Num s;
  std::optional<Num> q;
  std::optional<Num> inv_t_minus1;  // slip: 1/s'
  Num step;                         // 1/t_{m-1} - 1/t_m
  std::vector<Num> inv_t;           // 1/t_0 .. 1/t_M, at most 4096 entries
  std::int64_t M = 0;               // the index the ladder is built to
  std::int64_t M_first = 0;         // first m with t_m >= 2
  bool truncated = false;           // M exceeds the stored range

  /// 1/t_m for any m >= 0 (closed form beyond the stored range).
  Num inv(std::int64_t m) const;
  /// t_m as a double, +inf when 1/t_m <= 0.
  double t(std::int64_t m) const;
};

ExponentLadder slip_ladder(const Num& s, int n);
ExponentLadder navier_ladder(const Num& s, int n, const Num& q);

struct ChainReport {
  bool holds = true;
  bool terminated = false;      // some t_{m-1} >= n, starred exponent undefined
  std::int64_t terminated_at = -1;
  int checked = 0;              // inequalities evaluated
  std::optional<Num> first_gap; // 1/t_0 - 1/t*_{-1} (slip ladder)
  std::vector<std::string> failures;
};

/// t_m <= t*_{m-1} and t'_{m-1} <= (t'_m)* along the ladder, with
/// 1/t* = 1/t - 1/n.
ChainReport check_embedding_chain(const ExponentLadder& ladder);

/// Integrability gate on (r, n, q) with n' = n/(n-1):
/// r > n: q >= r/n';  n' <= r <= n: q > n-1;  r < n': q > r'/n'.
bool friction_exponent_gate(const Num& r, int n, const Num& q);

}  // namespace slipflow
