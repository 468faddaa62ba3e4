#ifndef HJET_SYSTEM_HPP
#define HJET_SYSTEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "hjet/expr.hpp"

namespace hjet {

/// One equation of a derived system, printed as "lhs_label = rhs".
/// Constraint rows (whose left side is itself an expression, e.g. the
/// momentum sums of the Legendre locus) also carry the symbolic lhs so
/// residuals lhs - rhs can be formed.
struct SystemEquation {
  std::string lhs_label;
  std::optional<Expr> lhs;
  Expr rhs;
};

struct EquationGroup {
  std::string name;  // "kinematic", "dynamic", "constraint"
  std::vector<SystemEquation> equations;
};

struct DerivedSystem {
  std::vector<EquationGroup> groups;

  const EquationGroup* find(const std::string& name) const {
    for (const auto& g : groups)
      if (g.name == name) return &g;
    return nullptr;
  }
};

}  // namespace hjet

#endif  // HJET_SYSTEM_HPP
