#include "hjet/jet_context.hpp"

namespace hjet {

std::string JetContext::jet_name(int alpha, const MultiIndex& I) {
  std::string name = "u" + std::to_string(alpha);
  if (I.order() > 0) name += "_" + I.digits();
  return name;
}

std::string JetContext::momentum_name(int alpha, const MultiIndex& I, int i) {
  return "P" + std::to_string(alpha) + "_" + I.digits() + "." + std::to_string(i);
}

JetContext::JetContext(int n, int m, int k, const std::vector<std::string>& parameters)
    : n_(n), m_(m), k_(k) {
  if (n < 1 || m < 1 || k < 0) throw Error("jet context requires n >= 1, m >= 1, k >= 0");
  for (int i = 1; i <= n; ++i) table_.create("x" + std::to_string(i), SymbolRole::kBaseCoord);
  for (int alpha = 1; alpha <= m; ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(n, 2 * k + 2)) {
      table_.create(jet_name(alpha, I), SymbolRole::kJetCoord);
      jet_index_.emplace(jet_name(alpha, I), std::make_pair(alpha, I));
    }
    for (const MultiIndex& I : MultiIndex::all_up_to_order(n, k)) {
      for (int i = 1; i <= n; ++i)
        table_.create(momentum_name(alpha, I, i), SymbolRole::kMomentum);
    }
    for (const MultiIndex& I : MultiIndex::all_of_order(n, k + 1)) {
      table_.create("ubar" + std::to_string(alpha) + "_" + I.digits(), SymbolRole::kJetCoord);
    }
  }
  for (const std::string& p : parameters)
    params_.push_back(table_.create(p, SymbolRole::kParameter));
}

Symbol JetContext::base(int i) const { return table_.get("x" + std::to_string(i)); }

Symbol JetContext::jet(int alpha, const MultiIndex& I) const {
  return table_.get(jet_name(alpha, I));
}

Symbol JetContext::momentum(int alpha, const MultiIndex& I, int i) const {
  return table_.get(momentum_name(alpha, I, i));
}

Symbol JetContext::ubar(int alpha, const MultiIndex& I) const {
  return table_.get("ubar" + std::to_string(alpha) + "_" + I.digits());
}

Symbol JetContext::parameter(const std::string& name) const {
  Symbol s = table_.get(name);
  if (s.role() != SymbolRole::kParameter) throw Error(name + " is not a parameter");
  return s;
}

std::optional<std::pair<int, MultiIndex>> JetContext::as_jet(const Symbol& s) const {
  auto it = jet_index_.find(s.name());
  if (it == jet_index_.end()) return std::nullopt;
  return it->second;
}

bool JetContext::is_momentum(const Symbol& s) const {
  return s.role() == SymbolRole::kMomentum;
}

int JetContext::max_jet_order(const Expr& e) const {
  int order = 0;
  for (const Symbol& s : free_symbols(e)) {
    if (auto j = as_jet(s)) order = std::max(order, j->second.order());
  }
  return order;
}

Expr JetContext::total_derivative(const Expr& e, int i) const {
  if (i < 1 || i > n_) throw Error("base index out of range");
  std::vector<Expr> parts{diff(e, base(i))};
  for (const Symbol& s : free_symbols(e)) {
    if (is_momentum(s))
      throw Error("total derivative is undefined on momentum symbols (" + s.name() + ")");
    auto j = as_jet(s);
    if (!j) continue;
    const auto& [alpha, I] = *j;
    if (I.order() + 1 > 2 * k_ + 2)
      throw Error("total derivative overflows the jet table: order " +
                  std::to_string(I.order() + 1) + " exceeds " + std::to_string(2 * k_ + 2));
    parts.push_back(mul({sym(jet(alpha, I.append(i))), diff(e, s)}));
  }
  return add(std::move(parts));
}

Expr JetContext::iterated_total_derivative(const Expr& e, const MultiIndex& I) const {
  Expr out = e;
  for (int i = 1; i <= I.base_dim(); ++i)
    for (int c = 0; c < I.count(i); ++c) out = total_derivative(out, i);
  return out;
}

}  // namespace hjet
