#pragma once

#include <gmpxx.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace gorbit {

/// Exact rational scalar. Thin value wrapper around GMP's mpq_class that
/// always stores a canonicalized fraction and avoids gmpxx expression
/// templates leaking into generic code.
class Rat {
 public:
  Rat() : v_(0) {}
  Rat(long n) : v_(n) {}  // NOLINT: implicit by design, mirrors int literals
  Rat(long num, long den) : v_(num, den) {
    if (den == 0) throw std::domain_error("Rat: zero denominator");
    v_.canonicalize();
  }
  explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }

  static Rat from_string(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("Rat: cannot parse '" + s + "'");
    q.canonicalize();
    return Rat(q);
  }

  /// Canonical serialization: "p" for integers, "p/q" otherwise.
  std::string str() const {
    if (v_.get_den() == 1) return v_.get_num().get_str();
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
  }

  double to_double() const { return v_.get_d(); }
  const mpq_class& raw() const { return v_; }

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sgn(v_) == 0; }

  Rat operator-() const { return Rat(mpq_class(-v_)); }
  Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
  Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
  Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
  Rat& operator/=(const Rat& o) {
    if (o.is_zero()) throw std::domain_error("Rat: division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { a += b; return a; }
  friend Rat operator-(Rat a, const Rat& b) { a -= b; return a; }
  friend Rat operator*(Rat a, const Rat& b) { a *= b; return a; }
  friend Rat operator/(Rat a, const Rat& b) { a /= b; return a; }

  /// In-place this += a*b / this -= a*b with a caller-provided scratch,
  /// avoiding one temporary allocation per operation in the hot loops.
  void add_mul(const Rat& a, const Rat& b, Rat& scratch) {
    mpq_mul(scratch.v_.get_mpq_t(), a.v_.get_mpq_t(), b.v_.get_mpq_t());
    mpq_add(v_.get_mpq_t(), v_.get_mpq_t(), scratch.v_.get_mpq_t());
  }
  void sub_mul(const Rat& a, const Rat& b, Rat& scratch) {
    mpq_mul(scratch.v_.get_mpq_t(), a.v_.get_mpq_t(), b.v_.get_mpq_t());
    mpq_sub(v_.get_mpq_t(), v_.get_mpq_t(), scratch.v_.get_mpq_t());
  }

  friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) == 0; }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) < 0; }
  friend bool operator>(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) > 0; }
  friend bool operator<=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) <= 0; }
  friend bool operator>=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) >= 0; }

 private:
  mpq_class v_;
};

inline Rat abs(const Rat& a) { return a.sign() < 0 ? -a : a; }

/// Exact square root when the argument is a perfect rational square.
inline std::optional<Rat> sqrt_exact(const Rat& a) {
  if (a.sign() < 0) return std::nullopt;
  const mpz_class num = a.raw().get_num(), den = a.raw().get_den();
  if (mpz_perfect_square_p(num.get_mpz_t()) == 0) return std::nullopt;
  if (mpz_perfect_square_p(den.get_mpz_t()) == 0) return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  return Rat(mpq_class(rn) / mpq_class(rd));
}

/// Scalar abstraction: the whole pipeline is templated on T being either
/// Rat (exact certificates) or double (fast mode with tolerances).
template <class T>
struct scalar_traits;

template <>
struct scalar_traits<Rat> {
  static constexpr bool is_exact = true;
  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }
  static Rat from_rat(const Rat& r) { return r; }
  static bool is_zero(const Rat& x, const Rat& = Rat(0)) { return x.is_zero(); }
  static double to_double(const Rat& x) { return x.to_double(); }
  static std::string str(const Rat& x) { return x.str(); }
};

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double from_rat(const Rat& r) { return r.to_double(); }
  static bool is_zero(double x, double tol = 1e-12) { return std::fabs(x) <= tol; }
  static double to_double(double x) { return x; }
  // Shortest decimal that round-trips.
  static std::string str(double x) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, p);
  }
};

inline double abs_value(const Rat& a) { return std::fabs(a.to_double()); }
inline double abs_value(double a) { return std::fabs(a); }

/// acc += a*b and acc -= a*b with a reusable scratch value (significant for
/// Rat, where avoiding the temporary skips a heap allocation per operation).
inline void fused_add_mul(Rat& acc, const Rat& a, const Rat& b, Rat& scratch) {
  acc.add_mul(a, b, scratch);
}
inline void fused_add_mul(double& acc, double a, double b, double&) { acc += a * b; }
inline void fused_sub_mul(Rat& acc, const Rat& a, const Rat& b, Rat& scratch) {
  acc.sub_mul(a, b, scratch);
}
inline void fused_sub_mul(double& acc, double a, double b, double&) { acc -= a * b; }

}  // namespace gorbit
