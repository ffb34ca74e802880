#pragma once

// Sampling oracles for tangent and normal cones, used to validate the exact
// computations independently.

#include <vector>

#include "conekit/setalg.hpp"
#include "conekit/varcalc.hpp"

namespace conekit {

using DVec = std::vector<double>;

struct SampledCone {
  std::vector<DVec> directions;  // unit directions that were tested or produced
  std::vector<bool> accepted;    // tangent oracle: membership verdict per direction
  std::vector<DVec> coarse;      // normal oracle: same probe at the next radius (empty if inside)
  SampleGrid grid;
};

struct OracleOptions {
  std::vector<double> t;  // defaults: 2^-1 .. 2^-24 (tangent), 10^-1 .. 10^-4 (normal)
  std::size_t directions_2d = 720;
  std::size_t directions_nd = 2000;
  unsigned seed = 1;
  double angular_tolerance_deg = 1.0;
};

std::vector<DVec> sample_directions(std::size_t n, const OracleOptions& opt);

// Difference-quotient test: d is accepted when x + t d lies in S for the
// smallest steps of the grid.
SampledCone oracle_tangent(const SetExpr& s, const Vec& x, const OracleOptions& opt = {});

// Projection test: unit vectors (y - P(y)) / |y - P(y)| for y on spheres
// around x, collected at the smallest radius of the grid.
SampledCone oracle_normal(const SetExpr& s, const Vec& x, const OracleOptions& opt = {});

// Angle in degrees between d and the nearest point of the cone (0 inside).
double angle_to_cone(const ConeRep& c, const DVec& d);
// Angle in degrees between d and the complement of the cone (0 outside).
double angle_to_complement(const ConeRep& c, const DVec& d);

struct Agreement {
  std::size_t total = 0;
  std::size_t agree = 0;
  std::size_t disagree_in_band = 0;
  std::size_t disagree_outside_band = 0;
};

Agreement compare_tangent(const ConeRep& exact, const SampledCone& sampled);
// Every sampled normal direction must lie within the band of the exact cone.
// Samples that converge towards the cone between the two finest radii agree.
Agreement compare_normal(const ConeRep& exact, const SampledCone& sampled);

}  // namespace conekit
