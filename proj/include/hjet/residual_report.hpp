#ifndef HJET_RESIDUAL_REPORT_HPP
#define HJET_RESIDUAL_REPORT_HPP

#include <map>
#include <string>
#include <vector>

namespace hjet {

struct ResidualEntry {
  std::string name;
  double max_abs = 0.0;
  bool symbolic_zero = false;
};

enum class Verdict { kSolution, kNotSolution, kInconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kSolution: return "solution";
    case Verdict::kNotSolution: return "not_solution";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "?";
}

/// Weakest verdict wins: not_solution > inconclusive > solution.
inline Verdict combine_verdicts(Verdict a, Verdict b) {
  if (a == Verdict::kNotSolution || b == Verdict::kNotSolution) return Verdict::kNotSolution;
  if (a == Verdict::kInconclusive || b == Verdict::kInconclusive) return Verdict::kInconclusive;
  return Verdict::kSolution;
}

struct ResidualReport {
  std::vector<ResidualEntry> residuals;
  Verdict verdict = Verdict::kInconclusive;
  std::map<std::string, double> tolerances;

  double max_abs() const {
    double m = 0.0;
    for (const auto& r : residuals) m = std::max(m, r.max_abs);
    return m;
  }
};

}  // namespace hjet

#endif  // HJET_RESIDUAL_REPORT_HPP
