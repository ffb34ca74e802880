#pragma once

// Conical hull intersection property (CHIP) and its sufficient conditions for
// countable families.

#include <optional>
#include <string>
#include <vector>

#include "conekit/setalg.hpp"
#include "conekit/verdict.hpp"

namespace conekit {

// Throws DomainError unless x lies in every member (templates: up to K_max).
void require_base_point(const IndexedFamily& f, const Vec& x);

// Both sides of the CHIP identity T(x; intersection) = intersection of T(x; Omega_i).
struct ChipSides {
  ConeRep lhs;
  ConeRep rhs;
  bool lhs_exact = false;
  bool rhs_exact = false;
  long K = 0;
  std::string method;
};
ChipSides chip_sides(const IndexedFamily& f, const Vec& x);
// Same at the truncation to the first K members.
ChipSides chip_sides_at(const IndexedFamily& f, const Vec& x, long K);

ChipVerdict chip_check(const IndexedFamily& f, const Vec& x);

struct StrongChipReport {
  Holds holds = Holds::Inconclusive;
  ConeRep lhs;  // N(x; intersection)
  ConeRep rhs;  // cl co of the union of N(x; Omega_i)
  std::vector<Vec> limit_directions;
  bool exact = false;
  long K_used = 0;
  std::optional<Vec> witness;
  std::string method;
};
// Convex families only; throws Unsupported otherwise.
StrongChipReport asymptotic_strong_chip_check(const IndexedFamily& f, const Vec& x);

struct RegularityGrid {
  std::vector<double> radii{1e-1, 1e-2, 1e-3};
  std::size_t directions = 72;  // 2D; 200 random directions otherwise
  unsigned seed = 1;
};

struct RegularityEstimate {
  double C_hat = 1.0;
  std::vector<double> per_radius;  // max ratio on each radius
  bool growing = false;
  bool degenerate = false;  // every ratio was 0/0
  std::size_t points = 0;
  long K = 0;
  RegularityGrid grid;
};
RegularityEstimate linear_regularity_estimate(const IndexedFamily& f, const Vec& x,
                                              const RegularityGrid& grid = {});

struct EquiDirReport {
  bool passes = false;
  double worst = 0.0;  // largest deviation at the smallest step
  std::vector<double> worst_direction;
  long worst_index = 0;
  std::vector<double> t;
  double tol = 1e-3;
};
EquiDirReport equi_dir_diff_check(const IndexedFamily& f, const Vec& x,
                                  std::size_t directions = 36,
                                  std::vector<double> t = {0.0625, 0.0078125, 0.0009765625},
                                  double tol = 1e-3);

// yes only when the estimate stays bounded and equi-directional
// differentiability passes; labeled as resting on sampled hypotheses.
ChipVerdict chip_via_regularity(const IndexedFamily& f, const Vec& x);

struct RankReport {
  double rho = 0.0;
  bool exact_zero = false;
  std::string certificate;  // why the rank is exactly zero
  long K = 0;
  long index = 0;  // member attaining the infimum
};
RankReport tangential_rank(const IndexedFamily& f, const Vec& x, const RegularityGrid& grid = {});
ChipVerdict chip_via_rank(const IndexedFamily& f, const Vec& x);

// Complement-of-open-convex members with x on their boundary, the rest with
// x interior. Structural mismatch yields NotApplicable.
ChipVerdict invex_chip_check(const IndexedFamily& f, const Vec& x);
// x + T(x; A) contained in A, tested on scaled tangent generators.
bool invex_lemma_check(const SetExpr& A, const Vec& x);

}  // namespace conekit
