#ifndef HJET_SAMPLING_HPP
#define HJET_SAMPLING_HPP

#include <string>
#include <utility>
#include <vector>

#include "hjet/expr.hpp"
#include "hjet/residual_report.hpp"

namespace hjet {

/// Axis-aligned sampling box over named variables.
struct Box {
  std::vector<std::string> names;
  std::vector<double> lo;
  std::vector<double> hi;

  static Box unit(const std::vector<std::string>& names);  // [-1, 1] per variable
};

/// Radical-inverse Halton value for 1-based index in the given base.
double halton(std::size_t index, int base);

/// Deterministic quasi-random point set over the box; `seed` offsets the
/// sequence start.
std::vector<double> halton_point(std::size_t index, const Box& box, unsigned seed);

/// max |e| over n Halton points of the box; `fixed` supplies values for
/// symbols outside the box (parameters).
double sample_max_abs(const Expr& e, const Box& box, int n, unsigned seed,
                      const EvalEnv& fixed = {});

struct SamplingOptions {
  int samples = 100;
  unsigned seed = 0;
  double tol = 1e-9;
};

/// Report over symbolic residuals: an entry is proved-zero or gets a
/// sampled max. Verdict precedence: all proved-zero -> solution; any
/// sample above tol -> not_solution; otherwise inconclusive.
ResidualReport symbolic_residual_report(const std::vector<std::pair<std::string, Expr>>& residuals,
                                        const Box& box, const SamplingOptions& options,
                                        const EvalEnv& fixed = {});

}  // namespace hjet

#endif  // HJET_SAMPLING_HPP
