#include "conekit/ratfunc.hpp"

#include <cctype>

namespace conekit {

Poly::Poly(Vec coeffs) : c_(std::move(coeffs)) { trim(); }

Poly Poly::constant(const Q& c) { return Poly(Vec{c}); }

Poly Poly::monomial(const Q& c, int degree) {
  Vec v = zeros(static_cast<std::size_t>(degree) + 1);
  v.back() = c;
  return Poly(std::move(v));
}

void Poly::trim() {
  while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
}

Q Poly::coeff(int k) const {
  return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : Q(0);
}

Q Poly::leading() const { return c_.empty() ? Q(0) : c_.back(); }

Q Poly::eval(const Q& x) const {
  Q acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Poly Poly::shifted(const Q& a) const {
  // Horner in polynomial arithmetic: p(x + a).
  Poly lin(Vec{a, Q(1)});
  Poly acc;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * lin + Poly::constant(*it);
  return acc;
}

Poly operator+(const Poly& a, const Poly& b) {
  Vec r = zeros(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] += b.c_[k];
  return Poly(std::move(r));
}

Poly operator-(const Poly& a, const Poly& b) {
  Vec r = zeros(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] -= b.c_[k];
  return Poly(std::move(r));
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.c_.empty() || b.c_.empty()) return Poly();
  Vec r = zeros(a.c_.size() + b.c_.size() - 1);
  for (std::size_t x = 0; x < a.c_.size(); ++x)
    for (std::size_t y = 0; y < b.c_.size(); ++y) r[x + y] += a.c_[x] * b.c_[y];
  return Poly(std::move(r));
}

void Poly::divmod(const Poly& a, const Poly& b, Poly& quot, Poly& rem) {
  if (b.is_zero()) throw MalformedInput("polynomial division by zero");
  quot = Poly();
  rem = a;
  while (!rem.is_zero() && rem.degree() >= b.degree()) {
    Poly t = Poly::monomial(rem.leading() / b.leading(), rem.degree() - b.degree());
    quot = quot + t;
    rem = rem - t * b;
  }
}

Poly Poly::gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly q, r;
    divmod(a, b, q, r);
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  Q lead = a.leading();
  for (Q& c : a.c_) c /= lead;
  return a;
}

RatFunc::RatFunc(const Q& c) : num_(Poly::constant(c)), den_(Poly::constant(1)) {}

RatFunc::RatFunc(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw MalformedInput("template has a zero denominator");
  normalize();
}

RatFunc RatFunc::index() { return RatFunc(Poly(Vec{Q(0), Q(1)}), Poly::constant(1)); }

void RatFunc::normalize() {
  if (num_.is_zero()) {
    den_ = Poly::constant(1);
    return;
  }
  Poly g = Poly::gcd(num_, den_);
  if (g.degree() > 0) {
    Poly q, r;
    Poly::divmod(num_, g, q, r);
    num_ = q;
    Poly::divmod(den_, g, q, r);
    den_ = q;
  }
  Q lead = den_.leading();
  Vec nc = num_.coeffs(), dc = den_.coeffs();
  for (Q& c : nc) c /= lead;
  for (Q& c : dc) c /= lead;
  num_ = Poly(std::move(nc));
  den_ = Poly(std::move(dc));
}

Q RatFunc::constant_value() const {
  if (!is_constant()) throw MalformedInput("template is not constant in i");
  return num_.coeff(0) / den_.coeff(0);
}

Q RatFunc::eval(const Q& i) const {
  Q d = den_.eval(i);
  if (sgn(d) == 0) throw MalformedInput("template " + str() + " has a pole at i=" + i.get_str());
  return num_.eval(i) / d;
}

std::optional<int> RatFunc::order() const {
  if (num_.is_zero()) return std::nullopt;
  return num_.degree() - den_.degree();
}

Q RatFunc::leading_ratio() const {
  if (num_.is_zero()) return 0;
  return num_.leading() / den_.leading();
}

SignPattern RatFunc::sign_from(long i0) const {
  SignPattern sp;
  if (num_.is_zero()) {
    sp.zero = sp.nonnegative = sp.nonpositive = true;
    return sp;
  }
  Poly p = num_ * den_;
  // Cauchy bound on the real roots of p.
  Q bound = 0;
  for (int k = 0; k < p.degree(); ++k) {
    Q r = abs(p.coeff(k) / p.leading());
    if (r > bound) bound = r;
  }
  bound += 1;
  mpz_class last = bound.get_num() / bound.get_den() + 1;
  constexpr long kMaxScan = 200000;
  bool saw_pos = false, saw_neg = false, saw_zero = false;
  if (last - i0 > kMaxScan) {
    sp.decided = false;
    last = i0 + kMaxScan;
  }
  for (mpz_class i = i0; i <= last; ++i) {
    Q x(i);
    if (sgn(den_.eval(x)) == 0) {
      sp.decided = false;
      continue;
    }
    int s = sgn(p.eval(x));
    saw_pos |= s > 0;
    saw_neg |= s < 0;
    saw_zero |= s == 0;
  }
  if (sgn(p.leading()) > 0) saw_pos = true; else saw_neg = true;
  sp.positive = saw_pos && !saw_neg && !saw_zero;
  sp.negative = saw_neg && !saw_pos && !saw_zero;
  sp.nonnegative = !saw_neg;
  sp.nonpositive = !saw_pos;
  if (!sp.decided) sp.positive = sp.negative = sp.nonnegative = sp.nonpositive = false;
  return sp;
}

RatFunc operator+(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator-(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator*(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
}

RatFunc operator/(const RatFunc& a, const RatFunc& b) {
  if (b.num_.is_zero()) throw MalformedInput("template division by zero");
  return RatFunc(a.num_ * b.den_, a.den_ * b.num_);
}

RatFunc operator-(const RatFunc& a) { return RatFunc(Poly() - a.num_, a.den_); }

RatFunc RatFunc::pow(long e) const {
  if (e < 0) return RatFunc(Q(1)) / pow(-e);
  RatFunc r(Q(1));
  for (long k = 0; k < e; ++k) r = r * *this;
  return r;
}

namespace {

std::string poly_str(const Poly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (int k = p.degree(); k >= 0; --k) {
    Q c = p.coeff(k);
    if (sgn(c) == 0) continue;
    bool negative = sgn(c) < 0;
    Q a = abs(c);
    if (!out.empty()) out += negative ? " - " : " + ";
    else if (negative) out += "-";
    bool unit_coeff = (a == 1) && k > 0;
    if (!unit_coeff) out += a.get_str();
    if (k > 0) {
      if (!unit_coeff) out += "*";
      out += "i";
      if (k > 1) out += "^" + std::to_string(k);
    }
  }
  return out;
}

class TemplateParser {
 public:
  explicit TemplateParser(std::string_view s) : s_(s) {}

  RatFunc parse() {
    RatFunc r = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw MalformedInput("template '" + std::string(s_) + "': " + what + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  RatFunc expr() {
    RatFunc acc = term();
    for (;;) {
      if (eat('+')) acc = acc + term();
      else if (eat('-')) acc = acc - term();
      else return acc;
    }
  }
  RatFunc term() {
    RatFunc acc = unary();
    for (;;) {
      if (eat('*')) acc = acc * unary();
      else if (eat('/')) acc = acc / unary();
      else return acc;
    }
  }
  RatFunc unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  RatFunc power() {
    RatFunc base = atom();
    if (eat('^')) {
      RatFunc e = unary();
      if (!e.is_constant()) fail("exponent must be constant");
      Q ev = e.constant_value();
      if (ev.get_den() != 1) fail("exponent must be an integer");
      if (abs(ev) > 64) fail("exponent too large");
      return base.pow(ev.get_num().get_si());
    }
    return base;
  }
  RatFunc atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      RatFunc r = expr();
      if (!eat(')')) fail("missing ')'");
      return r;
    }
    if (c == 'i') {
      ++pos_;
      return RatFunc::index();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      return RatFunc(parse_rational(s_.substr(start, pos_ - start)));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string RatFunc::str() const {
  if (den_.degree() == 0 && den_.leading() == 1) return poly_str(num_);
  return "(" + poly_str(num_) + ")/(" + poly_str(den_) + ")";
}

RatFunc parse_template(std::string_view text) { return TemplateParser(text).parse(); }

TVec constant_tvec(const Vec& v) {
  TVec r;
  r.reserve(v.size());
  for (const Q& q : v) r.emplace_back(q);
  return r;
}

Vec eval_tvec(const TVec& v, long i) {
  Vec r;
  r.reserve(v.size());
  for (const RatFunc& f : v) r.push_back(f.eval(Q(i)));
  return r;
}

bool tvec_constant(const TVec& v) {
  for (const RatFunc& f : v)
    if (!f.is_constant()) return false;
  return true;
}

RatFunc tdot(const TVec& a, const Vec& b) {
  if (a.size() != b.size()) throw MalformedInput("dimension mismatch in template product");
  RatFunc s(Q(0));
  for (std::size_t k = 0; k < a.size(); ++k) s = s + a[k] * RatFunc(b[k]);
  return s;
}

std::optional<Vec> limit_direction(const TVec& v) {
  std::optional<int> top;
  for (const RatFunc& f : v) {
    auto o = f.order();
    if (o && (!top || *o > *top)) top = o;
  }
  if (!top) return std::nullopt;
  Vec d = zeros(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k].order() == top) d[k] = v[k].leading_ratio();
  return primitive(d);
}

}  // namespace conekit
