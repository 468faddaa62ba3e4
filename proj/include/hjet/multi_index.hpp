#ifndef HJET_MULTI_INDEX_HPP
#define HJET_MULTI_INDEX_HPP

#include <string>
#include <utility>
#include <vector>

#include "hjet/errors.hpp"

namespace hjet {

/// Symmetric multi-index over base indices 1..n, stored as a count
/// vector (canonical: two multi-indices are equal iff their count
/// vectors are equal). The paper-style digit string (e.g. "112" for
/// I = (1,1,2)) is display-only.
class MultiIndex {
 public:
  explicit MultiIndex(int n) : counts_(n, 0) {}
  MultiIndex(int n, std::initializer_list<int> indices) : counts_(n, 0) {
    for (int i : indices) bump(i);
  }

  int base_dim() const { return static_cast<int>(counts_.size()); }
  int order() const;
  int count(int i) const { return counts_[check(i) - 1]; }

  /// The concatenation I.i: count of base index i incremented.
  MultiIndex append(int i) const;
  /// Removes one occurrence of i; requires count(i) > 0.
  MultiIndex remove(int i) const;

  /// Base indices as a sorted digit string ("" for |I| = 0).
  std::string digits() const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.counts_ == b.counts_;
  }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    return a.counts_ < b.counts_;
  }

  /// All multi-indices of the given exact order, in ascending digit-string
  /// order (e.g. n=2, d=2: 11, 12, 22).
  static std::vector<MultiIndex> all_of_order(int n, int order);
  /// Orders 0..max_order, graded.
  static std::vector<MultiIndex> all_up_to_order(int n, int max_order);

 private:
  int check(int i) const {
    if (i < 1 || i > base_dim())
      throw Error("base index " + std::to_string(i) + " out of range 1.." +
                  std::to_string(base_dim()));
    return i;
  }
  void bump(int i) { ++counts_[check(i) - 1]; }

  std::vector<int> counts_;
};

/// All (J, i) with J.i == I, one pair per distinct base index occurring
/// in I (each with coefficient 1, J ranging over symmetric multi-indices).
/// This evaluates sums of the form delta^I_{Ji} f(J, i).
/// Throws on |I| = 0.
std::vector<std::pair<MultiIndex, int>> delta_decompositions(const MultiIndex& I);

}  // namespace hjet

#endif  // HJET_MULTI_INDEX_HPP
