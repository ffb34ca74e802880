#pragma once

#include <vector>

#include "conekit/rational.hpp"

namespace conekit {

enum class Sense { LE, EQ, GE };
enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPRow {
  Vec coeffs;
  Sense sense;
  Q rhs;
};

// maximize objective . x subject to rows; variables are >= 0 unless marked free.
struct LinearProgram {
  explicit LinearProgram(std::size_t n) : nvars(n), free(n, false), objective(zeros(n)) {}
  std::size_t nvars;
  std::vector<bool> free;
  std::vector<LPRow> rows;
  Vec objective;

  void add(Vec coeffs, Sense s, Q rhs) { rows.push_back({std::move(coeffs), s, std::move(rhs)}); }
};

struct LPResult {
  LPStatus status = LPStatus::Infeasible;
  Vec x;
  Q value;
};

// Exact two-phase simplex with Bland's rule.
LPResult solve_lp(const LinearProgram& lp);
bool lp_feasible(const LinearProgram& lp, Vec* point = nullptr);

}  // namespace conekit
