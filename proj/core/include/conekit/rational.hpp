#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conekit {

using Q = mpq_class;
using Vec = std::vector<Q>;
using Mat = std::vector<Vec>;  // row-major

struct MalformedInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Q parse_rational(std::string_view s);
std::string to_string(const Q& q);
std::string to_string(const Vec& v);
double to_double(const Q& q);

Vec zeros(std::size_t n);
Vec unit(std::size_t n, std::size_t k);
Q dot(const Vec& a, const Vec& b);
Q norm2(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Q& s, const Vec& a);
Vec neg(const Vec& a);
bool is_zero(const Vec& a);
Vec concat(const Vec& a, const Vec& b);

// Primitive integer vector with the same direction (positive rescaling only).
Vec primitive(const Vec& v);
// Primitive integer vector whose first nonzero coordinate is positive.
Vec canonical_line(const Vec& v);
bool lex_less(const Vec& a, const Vec& b);

Vec mat_vec(const Mat& m, const Vec& v);
Vec mat_t_vec(const Mat& m, const Vec& v);
Mat transpose(const Mat& m, std::size_t cols);

// Exact Gaussian elimination helpers.
std::size_t rank(Mat m);
// Reduced row echelon form with zero rows dropped.
Mat rref(Mat m);
// Basis of {x : m x = 0}; rows of the result are basis vectors.
Mat nullspace(const Mat& m, std::size_t cols);
// Orthogonal projection of v onto the orthogonal complement of span(rows).
Vec project_out(const Vec& v, const Mat& rows);

}  // namespace conekit
