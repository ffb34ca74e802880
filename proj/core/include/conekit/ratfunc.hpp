#pragma once

// Rational functions of the family index i, used for coefficient templates.

#include <optional>
#include <string>
#include <string_view>

#include "conekit/rational.hpp"

namespace conekit {

// Polynomial in i, coefficients from degree 0 upward, no trailing zeros.
class Poly {
 public:
  Poly() = default;
  explicit Poly(Vec coeffs);
  static Poly constant(const Q& c);
  static Poly monomial(const Q& c, int degree);

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }
  const Vec& coeffs() const { return c_; }
  Q coeff(int k) const;
  Q leading() const;
  Q eval(const Q& x) const;
  Poly shifted(const Q& a) const;  // p(x + a)

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

  // Euclidean division over Q.
  static void divmod(const Poly& a, const Poly& b, Poly& quot, Poly& rem);
  static Poly gcd(Poly a, Poly b);

 private:
  void trim();
  Vec c_;
};

// Sign pattern of a template over all integers i >= i0, decided exactly.
struct SignPattern {
  bool positive = false;     // > 0 everywhere
  bool negative = false;     // < 0 everywhere
  bool nonnegative = false;  // >= 0 everywhere
  bool nonpositive = false;  // <= 0 everywhere
  bool zero = false;         // identically zero
  bool decided = true;       // false if the enumeration bound was exceeded
};

class RatFunc {
 public:
  RatFunc() : num_(), den_(Poly::constant(1)) {}
  RatFunc(const Q& c);  // NOLINT(google-explicit-constructor)
  RatFunc(Poly num, Poly den);
  static RatFunc index();  // the variable i

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }
  Q constant_value() const;  // requires is_constant()
  Q eval(const Q& i) const;  // throws MalformedInput on a pole
  // Growth order deg(num) - deg(den); nullopt for the zero function.
  std::optional<int> order() const;
  // lim f(i) / i^order() as i -> infinity.
  Q leading_ratio() const;
  SignPattern sign_from(long i0) const;

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a);
  friend bool operator==(const RatFunc& a, const RatFunc& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  RatFunc pow(long e) const;

  std::string str() const;

 private:
  void normalize();
  Poly num_, den_;
};

using TVec = std::vector<RatFunc>;

// Template grammar: numbers (integer, p/q via '/', decimals), the symbol i,
// + - * / ^ and parentheses. Exponents must be integer constants.
RatFunc parse_template(std::string_view text);

TVec constant_tvec(const Vec& v);
Vec eval_tvec(const TVec& v, long i);
bool tvec_constant(const TVec& v);
RatFunc tdot(const TVec& a, const Vec& b);
// Direction of lim v(i) / i^k for the dominant growth order k; nullopt when v == 0.
std::optional<Vec> limit_direction(const TVec& v);

}  // namespace conekit
