#include "hjet/integrate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>

namespace hjet::num {

namespace {

using State = std::vector<double>;

bool all_finite(const State& s) {
  for (double v : s)
    if (!std::isfinite(v)) return false;
  return true;
}

/// One classical RK4 step of an autonomous-in-state system whose rhs may
/// also depend on the sweep coordinate t.
template <typename Rhs>
State rk4_step(const Rhs& f, const State& y, double t, double h) {
  State k1 = f(y, t);
  State y2(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + 0.5 * h * k1[i];
  State k2 = f(y2, t + 0.5 * h);
  for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + 0.5 * h * k2[i];
  State k3 = f(y2, t + 0.5 * h);
  for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + h * k3[i];
  State k4 = f(y2, t + h);
  State out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

std::size_t step_count(double t0, double t1, double h) {
  if (h <= 0.0) throw Error("step size must be positive");
  double span = t1 - t0;
  if (span <= 0.0) throw Error("integration span must be positive");
  return static_cast<std::size_t>(std::ceil(span / h - 1e-9));
}

EvalEnv parameter_env(const std::map<std::string, double>& values) {
  return EvalEnv(values.begin(), values.end());
}

}  // namespace

CurveSolution integrate_vector_field(const mech::MechProblem& prob,
                                     const mech::VectorFieldCandidate& nabla,
                                     const std::vector<double>& q0, double t0, double t1,
                                     double h) {
  if (q0.size() != static_cast<std::size_t>(prob.dof()))
    throw Error("initial state dimension mismatch");
  std::size_t steps = step_count(t0, t1, h);
  double dt = (t1 - t0) / static_cast<double>(steps);
  EvalEnv params = parameter_env(prob.parameter_values());

  auto rhs = [&](const State& q, double) {
    EvalEnv env = params;
    for (int i = 1; i <= prob.dof(); ++i) env[prob.q(i).name()] = q[i - 1];
    State out(q.size());
    for (int i = 0; i < prob.dof(); ++i) out[i] = eval(nabla.components[i], env);
    return out;
  };

  CurveSolution sol;
  sol.t0 = t0;
  sol.h = dt;
  sol.states.push_back(q0);
  for (std::size_t s = 0; s < steps; ++s) {
    State next;
    try {
      next = rk4_step(rhs, sol.states.back(), sol.time(s), dt);
    } catch (const NonFiniteError&) {
      throw NumericError("trajectory blow-up at step " + std::to_string(s + 1));
    }
    if (!all_finite(next))
      throw NumericError("trajectory blow-up at step " + std::to_string(s + 1));
    sol.states.push_back(std::move(next));
  }
  return sol;
}

PhaseSolution integrate_el_dynamics(const mech::MechProblem& prob, const std::vector<double>& q0,
                                    const std::vector<double>& v0, double t0, double t1,
                                    double h) {
  const int n = prob.dof();
  if (q0.size() != static_cast<std::size_t>(n) || v0.size() != static_cast<std::size_t>(n))
    throw Error("initial state dimension mismatch");
  std::size_t steps = step_count(t0, t1, h);
  double dt = (t1 - t0) / static_cast<double>(steps);
  EvalEnv params = parameter_env(prob.parameter_values());

  mech::LegendreMap fl = mech::legendre(prob);
  std::vector<Expr> dLdq(n);
  std::vector<Expr> mixed(n * n);  // d2L/dq^j dv^i
  for (int i = 1; i <= n; ++i) {
    dLdq[i - 1] = diff(prob.lagrangian(), prob.q(i));
    for (int j = 1; j <= n; ++j)
      mixed[(i - 1) * n + (j - 1)] = diff(fl.momenta[i - 1], prob.q(j));
  }

  auto rhs = [&](const State& y, double) {
    EvalEnv env = params;
    for (int i = 1; i <= n; ++i) {
      env[prob.q(i).name()] = y[i - 1];
      env[prob.v(i).name()] = y[n + i - 1];
    }
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
      double drift = 0.0;
      for (int j = 0; j < n; ++j) {
        H(i, j) = eval(fl.hessian[i * n + j], env);
        drift += eval(mixed[i * n + j], env) * y[n + j];
      }
      g(i) = eval(dLdq[i], env) - drift;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
    if (!lu.isInvertible())
      throw NumericError("singular velocity Hessian along the trajectory");
    Eigen::VectorXd a = lu.solve(g);
    State out(2 * n);
    for (int i = 0; i < n; ++i) {
      out[i] = y[n + i];
      out[n + i] = a(i);
    }
    return out;
  };

  State y(2 * n);
  std::copy(q0.begin(), q0.end(), y.begin());
  std::copy(v0.begin(), v0.end(), y.begin() + n);

  PhaseSolution sol;
  sol.t0 = t0;
  sol.h = dt;
  sol.q.push_back(q0);
  sol.v.push_back(v0);
  for (std::size_t s = 0; s < steps; ++s) {
    try {
      y = rk4_step(rhs, y, t0 + dt * static_cast<double>(s), dt);
    } catch (const NonFiniteError&) {
      throw NumericError("trajectory blow-up at step " + std::to_string(s + 1));
    }
    if (!all_finite(y)) throw NumericError("trajectory blow-up at step " + std::to_string(s + 1));
    sol.q.emplace_back(y.begin(), y.begin() + n);
    sol.v.emplace_back(y.begin() + n, y.end());
  }
  return sol;
}

std::vector<double> energy_series(const mech::MechProblem& prob, const PhaseSolution& sol) {
  Expr E = mech::energy_expr(prob);
  EvalEnv env = parameter_env(prob.parameter_values());
  std::vector<double> out;
  out.reserve(sol.q.size());
  for (std::size_t s = 0; s < sol.q.size(); ++s) {
    for (int i = 1; i <= prob.dof(); ++i) {
      env[prob.q(i).name()] = sol.q[s][i - 1];
      env[prob.v(i).name()] = sol.v[s][i - 1];
    }
    out.push_back(eval(E, env));
  }
  return out;
}

std::vector<std::vector<double>> CurveSolution::central_velocities() const {
  if (states.size() < 3) throw NumericError("grid too coarse for the required stencil depth");
  std::size_t n = states.size();
  std::size_t dof = states[0].size();
  std::vector<std::vector<double>> v(n, std::vector<double>(dof));
  for (std::size_t i = 0; i < dof; ++i) {
    v[0][i] = (-3.0 * states[0][i] + 4.0 * states[1][i] - states[2][i]) / (2.0 * h);
    for (std::size_t s = 1; s + 1 < n; ++s)
      v[s][i] = (states[s + 1][i] - states[s - 1][i]) / (2.0 * h);
    v[n - 1][i] = (3.0 * states[n - 1][i] - 4.0 * states[n - 2][i] + states[n - 3][i]) / (2.0 * h);
  }
  return v;
}

std::size_t GridSpec::nodes() const {
  std::size_t n = 1;
  for (int c : count) n *= static_cast<std::size_t>(c);
  return n;
}

std::size_t SectionSolution::node(const std::vector<int>& coords) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int d = 0; d < grid.dims(); ++d) {
    idx += stride * static_cast<std::size_t>(coords[d]);
    stride *= static_cast<std::size_t>(grid.count[d]);
  }
  return idx;
}

std::vector<double> SectionSolution::node_x(const std::vector<int>& coords) const {
  std::vector<double> x(grid.dims());
  for (int d = 0; d < grid.dims(); ++d) x[d] = grid.origin[d] + grid.step[d] * coords[d];
  return x;
}

int SectionSolution::slot(int alpha, const MultiIndex& I) const {
  for (std::size_t s = 0; s < state_index.size(); ++s)
    if (state_index[s].first == alpha && state_index[s].second == I) return static_cast<int>(s);
  throw Error("jet " + JetContext::jet_name(alpha, I) + " is not part of the section state");
}

namespace {

void check_flatness_gate(const field::FieldProblem& prob, const field::HolonomicConnection& nabla,
                         const GridSpec& grid, const ConnectionIntegrationOptions& options) {
  auto residuals = field::flatness_residuals(nabla);
  if (residuals.empty()) return;
  const JetContext& ctx = prob.ctx();
  Box box;
  for (int d = 1; d <= ctx.n(); ++d) {
    box.names.push_back(ctx.base(d).name());
    box.lo.push_back(grid.origin[d - 1]);
    box.hi.push_back(grid.origin[d - 1] + grid.step[d - 1] * (grid.count[d - 1] - 1));
  }
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k())) {
      box.names.push_back(JetContext::jet_name(alpha, I));
      box.lo.push_back(-1.0);
      box.hi.push_back(1.0);
    }
  }
  EvalEnv params = parameter_env(prob.parameter_values());
  for (const auto& entry : residuals) {
    if (is_proved_zero(entry.residual)) continue;
    double worst =
        sample_max_abs(entry.residual, box, options.flatness_samples, 0, params);
    if (worst > options.flatness_tol) {
      if (options.force) continue;
      throw Error("connection is not flat: residual for " +
                  JetContext::jet_name(entry.alpha, entry.I) + " axes (" +
                  std::to_string(entry.i) + "," + std::to_string(entry.j) +
                  ") samples at " + std::to_string(worst));
    }
  }
}

}  // namespace

SectionSolution integrate_connection(const field::FieldProblem& prob,
                                     const field::HolonomicConnection& nabla,
                                     const std::vector<double>& initial, const GridSpec& grid,
                                     const ConnectionIntegrationOptions& options) {
  const JetContext& ctx = prob.ctx();
  if (grid.dims() != ctx.n()) throw Error("grid dimension mismatch");
  for (int d = 0; d < grid.dims(); ++d) {
    if (grid.count[d] < 2 || grid.step[d] <= 0.0)
      throw Error("grid extents must be positive with at least two nodes per axis");
  }
  std::vector<int> order = options.axis_order;
  if (order.empty()) {
    order.resize(ctx.n());
    std::iota(order.begin(), order.end(), 1);
  }
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int d = 0; d < ctx.n(); ++d)
      if (sorted[d] != d + 1) throw Error("axis order must be a permutation of 1..n");
  }
  check_flatness_gate(prob, nabla, grid, options);

  SectionSolution sol;
  sol.ctx = prob.ctx_ptr();
  sol.grid = grid;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k())) {
      sol.state_index.emplace_back(alpha, I);
      sol.state_names.push_back(JetContext::jet_name(alpha, I));
    }
  }
  if (initial.size() != sol.state_index.size())
    throw Error("initial jet state has " + std::to_string(initial.size()) + " values, expected " +
                std::to_string(sol.state_index.size()));

  sol.values.assign(grid.nodes(), State(sol.state_index.size(),
                                        std::numeric_limits<double>::quiet_NaN()));
  EvalEnv params = parameter_env(prob.parameter_values());

  // ds/dx_axis for the state vector at base position x.
  auto line_rhs = [&](int axis, std::vector<double> x_fixed) {
    return [&, axis, x_fixed](const State& s, double t) {
      EvalEnv env = params;
      std::vector<double> x = x_fixed;
      x[axis - 1] = t;
      for (int d = 1; d <= ctx.n(); ++d) env[ctx.base(d).name()] = x[d - 1];
      for (std::size_t slot = 0; slot < sol.state_index.size(); ++slot)
        env[sol.state_names[slot]] = s[slot];
      State out(s.size());
      for (std::size_t slot = 0; slot < sol.state_index.size(); ++slot) {
        const auto& [alpha, I] = sol.state_index[slot];
        MultiIndex lifted = I.append(axis);
        if (lifted.order() <= ctx.k()) {
          out[slot] = s[sol.slot(alpha, lifted)];
        } else {
          out[slot] = eval(nabla.component(alpha, lifted), env);
        }
      }
      return out;
    };
  };

  std::vector<std::vector<int>> filled{std::vector<int>(ctx.n(), 0)};
  sol.values[sol.node(filled[0])] = initial;
  for (int level = 0; level < ctx.n(); ++level) {
    int axis = order[level];
    std::vector<std::vector<int>> next = filled;
    for (const auto& start : filled) {
      std::vector<int> coords = start;
      State s = sol.values[sol.node(coords)];
      auto rhs = line_rhs(axis, sol.node_x(coords));
      for (int step = 0; step < grid.count[axis - 1] - 1; ++step) {
        double t = grid.origin[axis - 1] + grid.step[axis - 1] * step;
        try {
          s = rk4_step(rhs, s, t, grid.step[axis - 1]);
        } catch (const NonFiniteError&) {
          throw NumericError("section blow-up along axis " + std::to_string(axis) + " at step " +
                             std::to_string(step + 1));
        }
        if (!all_finite(s))
          throw NumericError("section blow-up along axis " + std::to_string(axis) + " at step " +
                             std::to_string(step + 1));
        coords[axis - 1] = step + 1;
        sol.values[sol.node(coords)] = s;
        next.push_back(coords);
      }
    }
    filled = std::move(next);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Finite-difference verification
// ---------------------------------------------------------------------------

std::vector<double> central_stencil(int m) {
  // Fornberg weight generation on the symmetric stencil -r..r.
  const int r = (m + 1) / 2;
  const int nd = 2 * r + 1;
  std::vector<double> grid(nd);
  for (int i = 0; i < nd; ++i) grid[i] = static_cast<double>(i - r);
  std::vector<std::vector<double>> c(nd, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = grid[0];
  c[0][0] = 1.0;
  for (int i = 1; i < nd; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = grid[i];
    for (int j = 0; j < i; ++j) {
      double c3 = grid[i] - grid[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s) c[i][s] = c1 * (s * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s) c[j][s] = (c4 * c[j][s] - s * c[j][s - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(nd);
  for (int i = 0; i < nd; ++i) w[i] = c[i][m];
  return w;
}

namespace {

double default_tol(double h, const VerifyOptions& options) {
  return options.tol > 0.0 ? options.tol : 100.0 * h * h;
}

ResidualReport numeric_report(std::vector<ResidualEntry> entries, double tol) {
  ResidualReport report;
  report.residuals = std::move(entries);
  report.tolerances["finite_difference"] = tol;
  report.verdict = Verdict::kSolution;
  for (const auto& e : report.residuals)
    if (e.max_abs > tol) report.verdict = Verdict::kNotSolution;
  return report;
}

// Samples q, v, a on interior trajectory nodes via central stencils.
struct CurveStencil {
  const mech::MechProblem& prob;
  const CurveSolution& sol;
  std::vector<double> w1 = central_stencil(1);
  std::vector<double> w2 = central_stencil(2);

  void fill(std::size_t node, EvalEnv& env, bool with_acceleration) const {
    double h = sol.h;
    for (int i = 1; i <= prob.dof(); ++i) {
      env[prob.q(i).name()] = sol.states[node][i - 1];
      double v = 0.0;
      double a = 0.0;
      for (int s = -1; s <= 1; ++s) {
        v += w1[s + 1] * sol.states[node + s][i - 1];
        a += w2[s + 1] * sol.states[node + s][i - 1];
      }
      env[prob.v(i).name()] = v / h;
      if (with_acceleration) env[prob.a(i).name()] = a / (h * h);
    }
  }
};

void require_interior(std::size_t nodes, std::size_t margin) {
  if (nodes < 2 * margin + 1)
    throw NumericError("grid too coarse for the required stencil depth");
}

}  // namespace

ResidualReport verify_el(const mech::MechProblem& prob, const CurveSolution& sol,
                         const VerifyOptions& options) {
  require_interior(sol.states.size(), 1);
  std::vector<Expr> residuals = mech::euler_lagrange(prob);
  EvalEnv env = parameter_env(prob.parameter_values());
  CurveStencil stencil{prob, sol};
  std::vector<ResidualEntry> entries;
  for (int i = 0; i < prob.dof(); ++i)
    entries.push_back({"el_q" + std::to_string(i + 1), 0.0, false});
  for (std::size_t node = 1; node + 1 < sol.states.size(); ++node) {
    stencil.fill(node, env, true);
    for (int i = 0; i < prob.dof(); ++i)
      entries[i].max_abs = std::max(entries[i].max_abs, std::abs(eval(residuals[i], env)));
  }
  return numeric_report(std::move(entries), default_tol(sol.h, options));
}

ResidualReport verify_hamilton(const mech::MechProblem& prob, const mech::MomentumMap& T,
                               const CurveSolution& sol, const VerifyOptions& options) {
  if (T.components.size() != static_cast<std::size_t>(prob.dof()))
    throw Error("momentum map dimension mismatch");
  require_interior(sol.states.size(), 1);
  const int n = prob.dof();
  EvalEnv env = parameter_env(prob.parameter_values());

  // p_i along the curve.
  std::vector<std::vector<double>> p(sol.states.size(), std::vector<double>(n));
  for (std::size_t node = 0; node < sol.states.size(); ++node) {
    for (int i = 1; i <= n; ++i) env[prob.q(i).name()] = sol.states[node][i - 1];
    for (int i = 0; i < n; ++i) p[node][i] = eval(T.components[i], env);
  }

  mech::LegendreMap fl = mech::legendre(prob);
  std::vector<Expr> dLdq(n);
  for (int i = 1; i <= n; ++i) dLdq[i - 1] = diff(prob.lagrangian(), prob.q(i));

  CurveStencil stencil{prob, sol};
  std::vector<ResidualEntry> entries;
  for (int i = 1; i <= n; ++i) entries.push_back({"constraint_p" + std::to_string(i), 0.0, false});
  for (int i = 1; i <= n; ++i) entries.push_back({"evolution_p" + std::to_string(i), 0.0, false});
  const std::vector<double>& w1 = stencil.w1;
  for (std::size_t node = 1; node + 1 < sol.states.size(); ++node) {
    stencil.fill(node, env, false);
    for (int i = 0; i < n; ++i) {
      double constraint = p[node][i] - eval(fl.momenta[i], env);
      double dpdt = (w1[0] * p[node - 1][i] + w1[1] * p[node][i] + w1[2] * p[node + 1][i]) / sol.h;
      double evolution = dpdt - eval(dLdq[i], env);
      entries[i].max_abs = std::max(entries[i].max_abs, std::abs(constraint));
      entries[n + i].max_abs = std::max(entries[n + i].max_abs, std::abs(evolution));
    }
  }
  return numeric_report(std::move(entries), default_tol(sol.h, options));
}

namespace {

// Tensor-product central differences of the base layer of a section.
class SectionStencil {
 public:
  SectionStencil(const SectionSolution& sol, const std::vector<MultiIndex>& derivatives)
      : sol_(sol), margin_(sol.grid.dims(), 0) {
    int max_order = 0;
    for (const MultiIndex& I : derivatives) {
      for (int d = 1; d <= I.base_dim(); ++d) {
        max_order = std::max(max_order, I.count(d));
        margin_[d - 1] = std::max(margin_[d - 1], (I.count(d) + 1) / 2);
      }
    }
    for (int m = 0; m <= max_order; ++m) weights_.push_back(central_stencil(m));
  }

  const std::vector<int>& margin() const { return margin_; }

  bool interior(const std::vector<int>& coords) const {
    for (int d = 0; d < sol_.grid.dims(); ++d) {
      if (coords[d] < margin_[d] || coords[d] + margin_[d] >= sol_.grid.count[d]) return false;
    }
    return true;
  }

  /// FD estimate of the I-th derivative of state slot `slot` at coords.
  double derivative(const std::vector<int>& coords, int slot, const MultiIndex& I) const {
    std::vector<int> at = coords;
    double scale = 1.0;
    for (int d = 1; d <= I.base_dim(); ++d)
      for (int c = 0; c < I.count(d); ++c) scale /= sol_.grid.step[d - 1];
    return axis_recurse(at, slot, I, 1) * scale;
  }

 private:
  double axis_recurse(std::vector<int>& at, int slot, const MultiIndex& I, int axis) const {
    if (axis > I.base_dim()) return sol_.values[sol_.node(at)][slot];
    int c = I.count(axis);
    if (c == 0) return axis_recurse(at, slot, I, axis + 1);
    const std::vector<double>& w = weights_[c];
    int r = (c + 1) / 2;
    double acc = 0.0;
    int original = at[axis - 1];
    for (int o = -r; o <= r; ++o) {
      if (w[o + r] == 0.0) continue;
      at[axis - 1] = original + o;
      acc += w[o + r] * axis_recurse(at, slot, I, axis + 1);
    }
    at[axis - 1] = original;
    return acc;
  }

  const SectionSolution& sol_;
  std::vector<int> margin_;
  std::vector<std::vector<double>> weights_;
};

template <typename Fn>
void for_each_node(const GridSpec& grid, const Fn& fn) {
  std::vector<int> coords(grid.dims(), 0);
  while (true) {
    fn(coords);
    int d = 0;
    while (d < grid.dims()) {
      if (++coords[d] < grid.count[d]) break;
      coords[d] = 0;
      ++d;
    }
    if (d == grid.dims()) break;
  }
}

void require_some_interior(const SectionSolution& sol, const std::vector<int>& margin) {
  for (int d = 0; d < sol.grid.dims(); ++d)
    if (sol.grid.count[d] <= 2 * margin[d])
      throw NumericError("grid too coarse for the required stencil depth");
}

}  // namespace

ResidualReport verify_el(const field::FieldProblem& prob, const SectionSolution& sol,
                         const VerifyOptions& options) {
  const JetContext& ctx = prob.ctx();
  if (sol.ctx.get() != &ctx) throw Error("section belongs to a different jet context");
  std::vector<Expr> residuals = field::field_euler_lagrange(prob);

  // All jet coordinates the residuals mention, derived by differencing
  // the base layer only.
  std::set<std::pair<int, MultiIndex>> needed;
  for (const Expr& r : residuals) {
    for (const Symbol& s : free_symbols(r)) {
      if (auto j = ctx.as_jet(s)) needed.insert(*j);
    }
  }
  std::vector<MultiIndex> derivative_orders;
  for (const auto& [alpha, I] : needed) derivative_orders.push_back(I);
  SectionStencil stencil(sol, derivative_orders);
  require_some_interior(sol, stencil.margin());

  EvalEnv params = parameter_env(prob.parameter_values());
  std::vector<ResidualEntry> entries;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha)
    entries.push_back({"el_u" + std::to_string(alpha), 0.0, false});

  for_each_node(sol.grid, [&](const std::vector<int>& coords) {
    if (!stencil.interior(coords)) return;
    EvalEnv env = params;
    std::vector<double> x = sol.node_x(coords);
    for (int d = 1; d <= ctx.n(); ++d) env[ctx.base(d).name()] = x[d - 1];
    for (const auto& [alpha, I] : needed) {
      int base_slot = sol.slot(alpha, MultiIndex(ctx.n()));
      double value = I.order() == 0 ? sol.values[sol.node(coords)][base_slot]
                                    : stencil.derivative(coords, base_slot, I);
      env[JetContext::jet_name(alpha, I)] = value;
    }
    for (int alpha = 0; alpha < ctx.m(); ++alpha)
      entries[alpha].max_abs = std::max(entries[alpha].max_abs, std::abs(eval(residuals[alpha], env)));
  });

  double h = *std::max_element(sol.grid.step.begin(), sol.grid.step.end());
  return numeric_report(std::move(entries), default_tol(h, options));
}

ResidualReport verify_hamilton(const field::FieldProblem& prob, const field::MomentumSection& T,
                               const SectionSolution& sol, const VerifyOptions& options) {
  const JetContext& ctx = prob.ctx();
  if (sol.ctx.get() != &ctx) throw Error("section belongs to a different jet context");
  if (T.ctx_ptr() != prob.ctx_ptr()) throw Error("jet context mismatch in verify_hamilton");

  // First-derivative stencils only: divergence of T and the ubar slots.
  std::vector<MultiIndex> firsts;
  for (int i = 1; i <= ctx.n(); ++i) firsts.push_back(MultiIndex(ctx.n()).append(i));
  SectionStencil stencil(sol, firsts);
  require_some_interior(sol, stencil.margin());

  EvalEnv params = parameter_env(prob.parameter_values());

  // T component values on every node.
  std::vector<field::MomKey> momentum_keys;
  for (const auto& [key, unused] : T.components()) momentum_keys.push_back(key);
  std::vector<std::vector<double>> t_values(sol.grid.nodes(),
                                            std::vector<double>(momentum_keys.size()));
  for_each_node(sol.grid, [&](const std::vector<int>& coords) {
    EvalEnv env = params;
    std::vector<double> x = sol.node_x(coords);
    for (int d = 1; d <= ctx.n(); ++d) env[ctx.base(d).name()] = x[d - 1];
    std::size_t nd = sol.node(coords);
    for (std::size_t slot = 0; slot < sol.state_names.size(); ++slot)
      env[sol.state_names[slot]] = sol.values[nd][slot];
    for (std::size_t m = 0; m < momentum_keys.size(); ++m) {
      const auto& key = momentum_keys[m];
      t_values[nd][m] = eval(T.component(key.alpha, key.I, key.i), env);
    }
  });
  auto t_slot = [&](int alpha, const MultiIndex& I, int i) {
    for (std::size_t m = 0; m < momentum_keys.size(); ++m) {
      const auto& key = momentum_keys[m];
      if (key.alpha == alpha && key.I == I && key.i == i) return m;
    }
    throw Error("missing momentum component");
  };

  std::vector<ResidualEntry> entries;
  std::vector<std::pair<int, MultiIndex>> evolution_rows;
  std::vector<std::pair<int, MultiIndex>> constraint_rows;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k()))
      evolution_rows.emplace_back(alpha, I);
    for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), ctx.k() + 1))
      constraint_rows.emplace_back(alpha, I);
  }
  for (const auto& [alpha, I] : constraint_rows)
    entries.push_back({"constraint_" + JetContext::jet_name(alpha, I), 0.0, false});
  for (const auto& [alpha, I] : evolution_rows)
    entries.push_back({"evolution_" + JetContext::jet_name(alpha, I), 0.0, false});

  // d/dx^i of a stored T array at a node.
  const std::vector<double> w1 = central_stencil(1);
  auto t_derivative = [&](const std::vector<int>& coords, std::size_t m, int axis) {
    std::vector<int> at = coords;
    double acc = 0.0;
    for (int o = -1; o <= 1; ++o) {
      if (w1[o + 1] == 0.0) continue;
      at[axis - 1] = coords[axis - 1] + o;
      acc += w1[o + 1] * t_values[sol.node(at)][m];
    }
    return acc / sol.grid.step[axis - 1];
  };

  for_each_node(sol.grid, [&](const std::vector<int>& coords) {
    if (!stencil.interior(coords)) return;
    EvalEnv env = params;
    std::vector<double> x = sol.node_x(coords);
    for (int d = 1; d <= ctx.n(); ++d) env[ctx.base(d).name()] = x[d - 1];
    std::size_t nd = sol.node(coords);
    for (std::size_t slot = 0; slot < sol.state_names.size(); ++slot)
      env[sol.state_names[slot]] = sol.values[nd][slot];
    // Top jets (the ubar slots): first differences of the order-k layer.
    for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
      for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), ctx.k() + 1)) {
        auto [J, i] = delta_decompositions(I).front();
        double value = stencil.derivative(coords, sol.slot(alpha, J),
                                          MultiIndex(ctx.n()).append(i));
        env[JetContext::jet_name(alpha, I)] = value;
      }
    }
    std::size_t row = 0;
    for (const auto& [alpha, I] : constraint_rows) {
      double lhs = 0.0;
      for (const auto& [J, i] : delta_decompositions(I)) lhs += t_values[nd][t_slot(alpha, J, i)];
      double rhs = eval(diff(prob.lagrangian(), ctx.jet(alpha, I)), env);
      entries[row].max_abs = std::max(entries[row].max_abs, std::abs(lhs - rhs));
      ++row;
    }
    for (const auto& [alpha, I] : evolution_rows) {
      double div = 0.0;
      for (int i = 1; i <= ctx.n(); ++i) div += t_derivative(coords, t_slot(alpha, I, i), i);
      double source = eval(diff(prob.lagrangian(), ctx.jet(alpha, I)), env);
      double delta = 0.0;
      if (I.order() > 0)
        for (const auto& [J, i] : delta_decompositions(I)) delta += t_values[nd][t_slot(alpha, J, i)];
      entries[row].max_abs = std::max(entries[row].max_abs, std::abs(div - source + delta));
      ++row;
    }
  });

  double h = *std::max_element(sol.grid.step.begin(), sol.grid.step.end());
  return numeric_report(std::move(entries), default_tol(h, options));
}

ConvergenceResult convergence_study(const std::function<double(double)>& error_of_h,
                                    const std::vector<double>& hs) {
  if (hs.size() < 3) throw Error("convergence study needs at least 3 step sizes");
  ConvergenceResult out;
  constexpr double kFloor = 1e-13;
  for (double h : hs) {
    double err = error_of_h(h);
    out.samples.emplace_back(h, err);
    if (err < kFloor) out.saturated = true;
  }
  std::vector<std::pair<double, double>> usable;
  for (const auto& s : out.samples)
    if (s.second >= kFloor) usable.push_back(s);
  if (usable.size() < 2) {
    out.slope = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  Eigen::MatrixXd A(usable.size(), 2);
  Eigen::VectorXd b(usable.size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    A(i, 0) = std::log(usable[i].first);
    A(i, 1) = 1.0;
    b(i) = std::log(usable[i].second);
  }
  Eigen::Vector2d fit = A.colPivHouseholderQr().solve(b);
  out.slope = fit(0);
  return out;
}

namespace {

std::string format_value(double v) {
  char buf[32];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
  return std::string(buf, result.ptr);
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw Error("cannot open output file: " + path);
  return out;
}

}  // namespace

void write_curve_csv(const mech::MechProblem& prob, const CurveSolution& sol,
                     const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "t";
  for (int i = 1; i <= prob.dof(); ++i) out << "," << prob.q(i).name();
  out << "\n";
  for (std::size_t node = 0; node < sol.states.size(); ++node) {
    out << format_value(sol.time(node));
    for (double v : sol.states[node]) out << "," << format_value(v);
    out << "\n";
  }
}

void write_section_csv(const SectionSolution& sol, const std::string& path) {
  std::ofstream out = open_csv(path);
  for (int d = 1; d <= sol.grid.dims(); ++d) out << (d > 1 ? "," : "") << "x" << d;
  for (const std::string& name : sol.state_names) out << "," << name;
  out << "\n";
  for_each_node(sol.grid, [&](const std::vector<int>& coords) {
    std::vector<double> x = sol.node_x(coords);
    for (int d = 0; d < sol.grid.dims(); ++d) out << (d > 0 ? "," : "") << format_value(x[d]);
    for (double v : sol.values[sol.node(coords)]) out << "," << format_value(v);
    out << "\n";
  });
}

}  // namespace hjet::num
