#include "hjet/sampling.hpp"

#include <cmath>

#include "hjet/errors.hpp"

namespace hjet {

Box Box::unit(const std::vector<std::string>& names) {
  Box b;
  b.names = names;
  b.lo.assign(names.size(), -1.0);
  b.hi.assign(names.size(), 1.0);
  return b;
}

double halton(std::size_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

namespace {

int nth_prime(std::size_t n) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                               41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
  if (n < sizeof(primes) / sizeof(primes[0])) return primes[n];
  throw Error("sampling box has too many dimensions");
}

}  // namespace

std::vector<double> halton_point(std::size_t index, const Box& box, unsigned seed) {
  std::vector<double> x(box.names.size());
  for (std::size_t d = 0; d < box.names.size(); ++d) {
    double t = halton(index + 1 + seed, nth_prime(d));
    x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * t;
  }
  return x;
}

double sample_max_abs(const Expr& e, const Box& box, int n, unsigned seed, const EvalEnv& fixed) {
  double worst = 0.0;
  for (int s = 0; s < n; ++s) {
    std::vector<double> x = halton_point(static_cast<std::size_t>(s), box, seed);
    EvalEnv env = fixed;
    for (std::size_t d = 0; d < box.names.size(); ++d) env[box.names[d]] = x[d];
    worst = std::max(worst, std::abs(eval(e, env)));
  }
  return worst;
}

ResidualReport symbolic_residual_report(const std::vector<std::pair<std::string, Expr>>& residuals,
                                        const Box& box, const SamplingOptions& options,
                                        const EvalEnv& fixed) {
  ResidualReport report;
  report.tolerances["sampled_max_abs"] = options.tol;
  bool all_proved = true;
  bool any_above = false;
  for (const auto& [name, expr] : residuals) {
    ResidualEntry entry{name, 0.0, is_proved_zero(expr)};
    if (!entry.symbolic_zero) {
      all_proved = false;
      entry.max_abs = sample_max_abs(expr, box, options.samples, options.seed, fixed);
      if (entry.max_abs > options.tol) any_above = true;
    }
    report.residuals.push_back(std::move(entry));
  }
  report.verdict = all_proved  ? Verdict::kSolution
                   : any_above ? Verdict::kNotSolution
                               : Verdict::kInconclusive;
  return report;
}

}  // namespace hjet
