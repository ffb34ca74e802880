#include "conekit/lp.hpp"

namespace conekit {

namespace {

struct Tableau {
  // rows m, columns ncols + 1 (last column is the right-hand side)
  std::vector<Vec> t;
  std::vector<std::size_t> basis;
  std::size_t ncols = 0;

  void pivot(std::size_t r, std::size_t c) {
    Q inv = 1 / t[r][c];
    for (Q& q : t[r]) q *= inv;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k == r || sgn(t[k][c]) == 0) continue;
      Q f = t[k][c];
      for (std::size_t j = 0; j <= ncols; ++j) t[k][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  // Minimizes cost . z over the allowed columns; returns false if unbounded.
  bool minimize(const Vec& cost, const std::vector<bool>& allowed) {
    const std::size_t m = t.size();
    for (;;) {
      // reduced costs
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols && enter == ncols; ++j) {
        if (!allowed[j]) continue;
        Q rc = cost[j];
        for (std::size_t r = 0; r < m; ++r) rc -= cost[basis[r]] * t[r][j];
        if (sgn(rc) < 0) enter = j;
      }
      if (enter == ncols) return true;
      std::size_t leave = m;
      Q best;
      for (std::size_t r = 0; r < m; ++r) {
        if (sgn(t[r][enter]) <= 0) continue;
        Q ratio = t[r][ncols] / t[r][enter];
        if (leave == m || ratio < best || (ratio == best && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LPResult solve_lp(const LinearProgram& lp) {
  const std::size_t n = lp.nvars;
  // column layout: x+ (n) | x- for free vars | slacks | artificials
  std::vector<std::size_t> neg_col(n, 0);
  std::size_t col = n;
  for (std::size_t j = 0; j < n; ++j)
    if (lp.free[j]) neg_col[j] = col++;
  std::vector<std::size_t> slack_col(lp.rows.size(), 0);
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    if (lp.rows[r].sense != Sense::EQ) slack_col[r] = col++;
  const std::size_t first_art = col;
  const std::size_t m = lp.rows.size();
  const std::size_t ncols = first_art + m;

  Tableau tab;
  tab.ncols = ncols;
  tab.t.assign(m, zeros(ncols + 1));
  tab.basis.assign(m, 0);
  for (std::size_t r = 0; r < m; ++r) {
    const LPRow& row = lp.rows[r];
    if (row.coeffs.size() != n) throw MalformedInput("LP row has wrong dimension");
    Vec& tr = tab.t[r];
    for (std::size_t j = 0; j < n; ++j) {
      tr[j] = row.coeffs[j];
      if (lp.free[j]) tr[neg_col[j]] = -row.coeffs[j];
    }
    if (row.sense == Sense::LE) tr[slack_col[r]] = 1;
    if (row.sense == Sense::GE) tr[slack_col[r]] = -1;
    tr[ncols] = row.rhs;
    if (sgn(tr[ncols]) < 0)
      for (Q& q : tr) q = -q;
    tr[first_art + r] = 1;
    tab.basis[r] = first_art + r;
  }

  Vec cost1 = zeros(ncols);
  for (std::size_t r = 0; r < m; ++r) cost1[first_art + r] = 1;
  std::vector<bool> all(ncols, true);
  tab.minimize(cost1, all);

  LPResult res;
  Q infeas = 0;
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis[r] >= first_art) infeas += tab.t[r][ncols];
  if (sgn(infeas) != 0) {
    res.status = LPStatus::Infeasible;
    return res;
  }
  // Drive artificial variables out of the basis or drop redundant rows.
  for (std::size_t r = 0; r < tab.t.size();) {
    if (tab.basis[r] < first_art) {
      ++r;
      continue;
    }
    std::size_t c = 0;
    while (c < first_art && sgn(tab.t[r][c]) == 0) ++c;
    if (c < first_art) {
      tab.pivot(r, c);
      ++r;
    } else {
      tab.t.erase(tab.t.begin() + static_cast<long>(r));
      tab.basis.erase(tab.basis.begin() + static_cast<long>(r));
    }
  }

  Vec cost2 = zeros(ncols);
  for (std::size_t j = 0; j < n; ++j) {
    cost2[j] = -lp.objective[j];
    if (lp.free[j]) cost2[neg_col[j]] = lp.objective[j];
  }
  std::vector<bool> allowed(ncols, true);
  for (std::size_t j = first_art; j < ncols; ++j) allowed[j] = false;
  bool bounded = tab.minimize(cost2, allowed);

  Vec z = zeros(ncols);
  for (std::size_t r = 0; r < tab.t.size(); ++r) z[tab.basis[r]] = tab.t[r][ncols];
  res.x = zeros(n);
  for (std::size_t j = 0; j < n; ++j) {
    res.x[j] = z[j];
    if (lp.free[j]) res.x[j] -= z[neg_col[j]];
  }
  res.value = dot(lp.objective, res.x);
  res.status = bounded ? LPStatus::Optimal : LPStatus::Unbounded;
  return res;
}

bool lp_feasible(const LinearProgram& lp, Vec* point) {
  LinearProgram feas = lp;
  feas.objective = zeros(lp.nvars);
  LPResult r = solve_lp(feas);
  if (r.status == LPStatus::Infeasible) return false;
  if (point) *point = r.x;
  return true;
}

}  // namespace conekit
