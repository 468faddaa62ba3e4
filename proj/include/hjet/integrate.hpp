#ifndef HJET_INTEGRATE_HPP
#define HJET_INTEGRATE_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hjet/field_theory.hpp"
#include "hjet/mechanics.hpp"
#include "hjet/residual_report.hpp"
#include "hjet/sampling.hpp"

namespace hjet::num {

/// Trajectory on a uniform time grid.
struct CurveSolution {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<std::vector<double>> states;  // states[step][coordinate]

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  double time(std::size_t idx) const { return t0 + h * static_cast<double>(idx); }
  /// Central-difference velocities; first and last node use one-sided
  /// differences of the same order.
  std::vector<std::vector<double>> central_velocities() const;
};

/// Classical fixed-step RK4 for dq/dt = nabla(q). The step count is
/// ceil(span/h) with the step adjusted to land exactly on t1.
/// Throws NumericError with the step index on blow-up.
CurveSolution integrate_vector_field(const mech::MechProblem& prob,
                                     const mech::VectorFieldCandidate& nabla,
                                     const std::vector<double>& q0, double t0, double t1,
                                     double h);

/// Phase trajectory of the EL dynamics (q, v), accelerations obtained by
/// solving the velocity Hessian system each stage. Requires a regular
/// Lagrangian along the trajectory.
struct PhaseSolution {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> v;
};
PhaseSolution integrate_el_dynamics(const mech::MechProblem& prob, const std::vector<double>& q0,
                                    const std::vector<double>& v0, double t0, double t1, double h);

/// E = sum p v - L sampled along a phase trajectory.
std::vector<double> energy_series(const mech::MechProblem& prob, const PhaseSolution& sol);

struct GridSpec {
  std::vector<double> origin;
  std::vector<double> step;
  std::vector<int> count;  // nodes per axis, >= 2

  int dims() const { return static_cast<int>(count.size()); }
  std::size_t nodes() const;
};

/// Values of every jet coordinate u^alpha_I, |I| <= k, on a rectangular
/// base grid. State slots follow (alpha, I) in graded order.
struct SectionSolution {
  JetContextPtr ctx;
  GridSpec grid;
  std::vector<std::pair<int, MultiIndex>> state_index;
  std::vector<std::string> state_names;
  std::vector<std::vector<double>> values;  // values[node][slot], axis 1 fastest

  std::size_t node(const std::vector<int>& coords) const;
  std::vector<double> node_x(const std::vector<int>& coords) const;
  int slot(int alpha, const MultiIndex& I) const;
};

struct ConnectionIntegrationOptions {
  std::vector<int> axis_order;  // default 1, 2, ..., n
  bool force = false;           // proceed even if the flatness gate fails
  double flatness_tol = 1e-9;
  int flatness_samples = 100;
};

/// Sweeps the grid axis by axis, RK4 along each line of the first-order
/// system du^alpha_I/dx^i = u^alpha_{Ii} (top order from the
/// connection). `initial` holds the full jet state at the grid origin.
/// Unless options.force, the connection must be flat (symbolically or
/// sampled below tolerance); a failed gate throws Error.
SectionSolution integrate_connection(const field::FieldProblem& prob,
                                     const field::HolonomicConnection& nabla,
                                     const std::vector<double>& initial, const GridSpec& grid,
                                     const ConnectionIntegrationOptions& options = {});

struct VerifyOptions {
  double tol = 0.0;  // 0: use the default 100 h^2 of order-2 stencils
};

/// Finite-difference EL residuals over interior nodes: order-2 central
/// stencils build the needed derivatives from the trajectory / the
/// section's base layer; the verdict compares the max residual with the
/// tolerance. Throws NumericError when the grid is too coarse for the
/// stencil depth.
ResidualReport verify_el(const mech::MechProblem& prob, const CurveSolution& sol,
                         const VerifyOptions& options = {});
ResidualReport verify_el(const field::FieldProblem& prob, const SectionSolution& sol,
                         const VerifyOptions& options = {});

/// Implicit Hamilton residuals (constraint + evolution groups) along
/// T o solution, derivatives from finite differences.
ResidualReport verify_hamilton(const mech::MechProblem& prob, const mech::MomentumMap& T,
                               const CurveSolution& sol, const VerifyOptions& options = {});
ResidualReport verify_hamilton(const field::FieldProblem& prob, const field::MomentumSection& T,
                               const SectionSolution& sol, const VerifyOptions& options = {});

struct ConvergenceResult {
  double slope = 0.0;
  bool saturated = false;                         // errors at the rounding floor
  std::vector<std::pair<double, double>> samples; // (h, error)
};

/// Least-squares slope of log error against log h. Requires >= 3 step
/// sizes; errors below 1e-13 mark the study saturated.
ConvergenceResult convergence_study(const std::function<double(double)>& error_of_h,
                                    const std::vector<double>& hs);

/// CSV emission: header of symbol names, one row per node, dot decimal.
void write_curve_csv(const mech::MechProblem& prob, const CurveSolution& sol,
                     const std::string& path);
void write_section_csv(const SectionSolution& sol, const std::string& path);

/// Fornberg weights for the m-th derivative at offset 0 on the symmetric
/// integer stencil -r..r, r = ceil(m/2); divide by h^m after use.
std::vector<double> central_stencil(int m);

}  // namespace hjet::num

#endif  // HJET_INTEGRATE_HPP
