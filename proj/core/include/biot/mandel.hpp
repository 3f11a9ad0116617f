#pragma once

#include <vector>

#include "biot/assembly.hpp"

namespace biot {

/// Load and material data of Mandel's consolidation problem on [0, a] x [0, b].
struct MandelParams {
  double F = 6.0e8;   // applied load per unit length
  double B = 0.833;   // Skempton coefficient
  double nu_u = 0.44; // undrained Poisson ratio
  double a = 1.0;
  double b = 1.0;
  int series_terms = 200;
  std::vector<double> roots;  // first series_terms roots, see mandel_roots
};

/// Drained Poisson ratio lambda / (2 (lambda + mu)).
double poisson_ratio(const PhysicalParams& params);

/// Positive roots of tan(r) = k r with k = (1 - nu) / (nu_u - nu), the n-th in
/// ((n-1) pi, (n-1) pi + pi/2), found by bisection to full double precision.
/// Throws std::invalid_argument unless nu < nu_u < 0.5 and count >= 1.
std::vector<double> mandel_roots(double nu, double nu_u, int count);

/// Fills mp.roots for the given material. Also checks 0 < B <= 1.
MandelParams make_mandel_params(const PhysicalParams& params, MandelParams mp = {});

/// Consolidation coefficient 2 k_p B^2 mu (1 - nu)(1 + nu_u)^2 / (9 (1 - nu_u)(nu_u - nu)).
double mandel_consolidation_coefficient(const MandelParams& mp, const PhysicalParams& params);

struct MandelValue {
  double u1 = 0.0;
  double u2 = 0.0;
  double p = 0.0;
  double du1_dx = 0.0;
  double du2_dy = 0.0;
  double dp_dx = 0.0;
};

/// Truncated series solution. For t <= 0 the undrained limits are returned:
/// u1 = F nu_u x / (2 mu a), u2 = -F (1 - nu_u) y / (2 mu a), p = F B (1 + nu_u) / (3 a).
MandelValue mandel_exact(const MandelParams& mp, const PhysicalParams& params, double x, double y,
                         double t);

/// Bound on the magnitude of the first omitted pressure term at time t.
double mandel_tail_bound(const MandelParams& mp, const PhysicalParams& params, double t);

}  // namespace biot
