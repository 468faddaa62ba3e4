#ifndef HJET_SYMBOL_HPP
#define HJET_SYMBOL_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hjet/errors.hpp"

namespace hjet {

enum class SymbolRole {
  kBaseCoord,     // x^i, q^i
  kJetCoord,      // u^alpha_I (and the ubar markers of the implicit systems)
  kMomentum,      // p_i, p^{I.i}_alpha
  kVelocity,      // q-dot and the dq/dt markers
  kAcceleration,  // a^i
  kParameter,
};

struct SymbolInfo {
  std::string name;
  SymbolRole role;
};

/// Lightweight value handle to an interned symbol. Identity is the name:
/// two handles with the same name compare equal even across contexts,
/// which is what cross-context renaming substitutions rely on.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::shared_ptr<const SymbolInfo> info) : info_(std::move(info)) {}

  bool valid() const { return info_ != nullptr; }
  const std::string& name() const { return info_->name; }
  SymbolRole role() const { return info_->role; }

  friend bool operator==(const Symbol& a, const Symbol& b) {
    if (a.info_ == b.info_) return true;
    if (!a.info_ || !b.info_) return false;
    return a.info_->name == b.info_->name;
  }
  friend bool operator<(const Symbol& a, const Symbol& b) {
    return a.info_->name < b.info_->name;
  }

 private:
  std::shared_ptr<const SymbolInfo> info_;
};

/// Symbol context for parsing and for the per-problem coordinate
/// universes. Names are unique within a table.
class SymbolTable {
 public:
  Symbol create(const std::string& name, SymbolRole role) {
    if (by_name_.count(name)) throw Error("duplicate symbol name: " + name);
    auto info = std::make_shared<SymbolInfo>(SymbolInfo{name, role});
    Symbol s(info);
    by_name_.emplace(name, s);
    order_.push_back(s);
    return s;
  }

  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

  Symbol get(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw Error("unknown symbol: " + name);
    return it->second;
  }

  /// Symbols in creation order.
  const std::vector<Symbol>& symbols() const { return order_; }

 private:
  std::map<std::string, Symbol> by_name_;
  std::vector<Symbol> order_;
};

}  // namespace hjet

#endif  // HJET_SYMBOL_HPP
