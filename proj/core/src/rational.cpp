#include "conekit/rational.hpp"

#include <algorithm>
#include <cctype>

namespace conekit {

namespace {

bool valid_integer(std::string_view s) {
  if (s.empty()) return false;
  std::size_t k = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (k == s.size()) return false;
  for (; k < s.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
  return true;
}

std::string strip_plus(std::string_view s) {
  return std::string(s.substr(!s.empty() && s[0] == '+' ? 1 : 0));
}

}  // namespace

Q parse_rational(std::string_view raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw MalformedInput("empty rational literal");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string_view num(s.data(), slash), den(s.data() + slash + 1, s.size() - slash - 1);
    if (!valid_integer(num) || !valid_integer(den))
      throw MalformedInput("bad rational literal '" + s + "'");
    Q q(mpz_class(strip_plus(num), 10), mpz_class(strip_plus(den), 10));
    if (q.get_den() == 0) throw MalformedInput("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    bool negative = !ip.empty() && ip[0] == '-';
    std::string digits = ip;
    if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) digits.erase(0, 1);
    if (digits.empty()) digits = "0";
    if (!valid_integer(digits) || (!fp.empty() && !valid_integer(fp)) || fp.find_first_of("+-") != std::string::npos)
      throw MalformedInput("bad decimal literal '" + s + "'");
    mpz_class den = 1;
    for (std::size_t k = 0; k < fp.size(); ++k) den *= 10;
    mpz_class num(digits + fp, 10);
    Q q(negative ? mpz_class(-num) : num, den);
    q.canonicalize();
    return q;
  }
  if (!valid_integer(s)) throw MalformedInput("bad rational literal '" + s + "'");
  return Q(mpz_class(strip_plus(s), 10));
}

std::string to_string(const Q& q) {
  Q c(q);
  c.canonicalize();
  return c.get_str();
}

std::string to_string(const Vec& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ",";
    out += to_string(v[k]);
  }
  return out + "]";
}

double to_double(const Q& q) { return q.get_d(); }

Vec zeros(std::size_t n) { return Vec(n, Q(0)); }

Vec unit(std::size_t n, std::size_t k) {
  Vec e = zeros(n);
  e[k] = 1;
  return e;
}

Q dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw MalformedInput("dimension mismatch in dot product");
  Q s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Q norm2(const Vec& a) { return dot(a, a); }

Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw MalformedInput("dimension mismatch in vector sum");
  Vec r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] + b[k];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw MalformedInput("dimension mismatch in vector difference");
  Vec r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] - b[k];
  return r;
}

Vec scale(const Q& s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = s * a[k];
  return r;
}

Vec neg(const Vec& a) { return scale(Q(-1), a); }

bool is_zero(const Vec& a) {
  return std::all_of(a.begin(), a.end(), [](const Q& q) { return sgn(q) == 0; });
}

Vec concat(const Vec& a, const Vec& b) {
  Vec r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

Vec primitive(const Vec& v) {
  if (is_zero(v)) return v;
  mpz_class l = 1;
  for (const Q& q : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
  std::vector<mpz_class> ints;
  ints.reserve(v.size());
  mpz_class g = 0;
  for (const Q& q : v) {
    mpz_class z = q.get_num() * (l / q.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.get_mpz_t());
    ints.push_back(z);
  }
  Vec r(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) r[k] = Q(ints[k] / g);
  return r;
}

Vec canonical_line(const Vec& v) {
  Vec r = primitive(v);
  for (const Q& q : r) {
    if (sgn(q) == 0) continue;
    if (sgn(q) < 0) r = neg(r);
    break;
  }
  return r;
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Vec mat_vec(const Mat& m, const Vec& v) {
  Vec r;
  r.reserve(m.size());
  for (const Vec& row : m) r.push_back(dot(row, v));
  return r;
}

Vec mat_t_vec(const Mat& m, const Vec& v) {
  if (m.size() != v.size()) throw MalformedInput("dimension mismatch in transposed product");
  if (m.empty()) return {};
  Vec r = zeros(m[0].size());
  for (std::size_t k = 0; k < m.size(); ++k)
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += m[k][j] * v[k];
  return r;
}

Mat transpose(const Mat& m, std::size_t cols) {
  Mat t(cols, zeros(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c][r] = m[r][c];
  return t;
}

Mat rref(Mat m) {
  if (m.empty()) return m;
  const std::size_t cols = m[0].size();
  std::size_t lead = 0;
  for (std::size_t c = 0; c < cols && lead < m.size(); ++c) {
    std::size_t piv = lead;
    while (piv < m.size() && sgn(m[piv][c]) == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[lead]);
    Q inv = 1 / m[lead][c];
    for (Q& q : m[lead]) q *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == lead || sgn(m[r][c]) == 0) continue;
      Q f = m[r][c];
      for (std::size_t j = 0; j < cols; ++j) m[r][j] -= f * m[lead][j];
    }
    ++lead;
  }
  m.resize(lead);
  return m;
}

std::size_t rank(Mat m) { return rref(std::move(m)).size(); }

Mat nullspace(const Mat& m, std::size_t cols) {
  Mat r = rref(m);
  std::vector<long> pivot_of_col(cols, -1);
  for (std::size_t row = 0; row < r.size(); ++row)
    for (std::size_t c = 0; c < cols; ++c)
      if (sgn(r[row][c]) != 0) {
        pivot_of_col[c] = static_cast<long>(row);
        break;
      }
  Mat basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (pivot_of_col[free] >= 0) continue;
    Vec v = zeros(cols);
    v[free] = 1;
    for (std::size_t c = 0; c < cols; ++c)
      if (pivot_of_col[c] >= 0) v[c] = -r[static_cast<std::size_t>(pivot_of_col[c])][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

Vec project_out(const Vec& v, const Mat& rows) {
  if (rows.empty()) return v;
  // Gram-Schmidt on an exact copy; fine at desk scale.
  Mat ortho;
  for (const Vec& r : rows) {
    Vec w = r;
    for (const Vec& o : ortho) w = sub(w, scale(dot(w, o) / norm2(o), o));
    if (!is_zero(w)) ortho.push_back(std::move(w));
  }
  Vec out = v;
  for (const Vec& o : ortho) out = sub(out, scale(dot(out, o) / norm2(o), o));
  return out;
}

}  // namespace conekit
