#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biot/assembly.hpp"
#include "biot/mandel.hpp"
#include "biot/mesh.hpp"

namespace biot {

using TensorField = std::function<std::array<double, 4>(double x, double y, double t)>;

/// Conditions on one side of the rectangle. Components without a Dirichlet
/// value are natural (traction); a pressure without one is a flux boundary.
struct SideConditions {
  std::array<std::optional<ScalarField>, 2> displacement;
  std::optional<ScalarField> pressure;
};

struct ExactSolution {
  VectorField u;
  TensorField grad_u;  // (du1/dx, du1/dy, du2/dx, du2/dy)
  ScalarField xi;
  ScalarField p;
  VectorField grad_p;
};

struct PointSourceSpec {
  Point location;
  std::function<double(double)> magnitude;
};

struct ProblemSpec {
  std::string name;
  PhysicalParams params;
  Rectangle domain{0.0, 1.0, 0.0, 1.0};
  /// Indexed by static_cast<int>(BoundaryTag).
  std::array<SideConditions, 4> sides;
  VectorField body_force;  // empty means zero
  ScalarField source;      // empty means zero
  std::optional<PointSourceSpec> point_source;
  VectorField traction;  // f1 on natural displacement sides; empty means zero
  ScalarField flux;      // g1 on natural pressure sides; empty means zero
  std::function<double(double, double)> initial_pressure;
  std::optional<ExactSolution> exact;
  double final_time = 1.0;
  int default_subdivisions = 16;
  int default_steps = 16;

  const SideConditions& side(BoundaryTag tag) const { return sides[static_cast<int>(tag)]; }
  /// Tags on which displacement component `c` is natural.
  std::vector<BoundaryTag> traction_sides(int c) const;
  std::vector<BoundaryTag> flux_sides() const;

  /// Throws std::invalid_argument when no side fixes a displacement component
  /// or no side fixes the pressure, or the data is otherwise incomplete.
  void validate() const;
};

/// lambda = E nu / ((1 + nu)(1 - 2 nu)), mu = E / (2 (1 + nu)).
/// Throws std::invalid_argument unless E > 0 and 0 <= nu < 0.5.
std::pair<double, double> lame_from_young_poisson(double E, double nu);

/// Manufactured solution with lambda = mu = alpha = c0 = k_p = 1 on the unit
/// square, Dirichlet data for u and p on the whole boundary, T = 1.
ProblemSpec example1_problem();

/// Point-source problem with rollers and drained sides. The source sits at
/// (0.25, 0.25); `subdivisions` not divisible by 4 moves it off the vertices and
/// prints a warning. `rounded_lame` uses lambda = 1.1e4, mu = 4.5e4.
ProblemSpec barry_mercer_problem(int subdivisions = 20, bool rounded_lame = false);
double barry_mercer_omega(const PhysicalParams& params);

/// Quarter plate of Mandel's problem with the analytical series supplying the
/// top-plate displacement and the reference solution.
ProblemSpec mandel_problem(const MandelParams& overrides = {});
PhysicalParams mandel_physical_params();

/// "example1" | "barry-mercer" | "mandel". Throws std::invalid_argument otherwise.
ProblemSpec problem_by_name(std::string_view name, int subdivisions);

}  // namespace biot
