#include "hjet/multi_index.hpp"

#include <numeric>

namespace hjet {

int MultiIndex::order() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0);
}

MultiIndex MultiIndex::append(int i) const {
  MultiIndex out = *this;
  out.bump(i);
  return out;
}

MultiIndex MultiIndex::remove(int i) const {
  MultiIndex out = *this;
  if (out.counts_[check(i) - 1] == 0)
    throw Error("multi-index has no occurrence of index " + std::to_string(i));
  --out.counts_[i - 1];
  return out;
}

std::string MultiIndex::digits() const {
  std::string s;
  for (int i = 1; i <= base_dim(); ++i)
    s.append(static_cast<std::size_t>(count(i)), static_cast<char>('0' + i));
  return s;
}

namespace {

void enumerate(int n, int order, int from, const MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (order == 0) {
    out.push_back(cur);
    return;
  }
  // Nondecreasing digit sequences, so each symmetric multi-index appears once.
  for (int i = from; i <= n; ++i) enumerate(n, order - 1, i, cur.append(i), out);
}

}  // namespace

std::vector<MultiIndex> MultiIndex::all_of_order(int n, int order) {
  std::vector<MultiIndex> out;
  enumerate(n, order, 1, MultiIndex(n), out);
  return out;
}

std::vector<MultiIndex> MultiIndex::all_up_to_order(int n, int max_order) {
  std::vector<MultiIndex> out;
  for (int d = 0; d <= max_order; ++d) {
    auto layer = all_of_order(n, d);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

std::vector<std::pair<MultiIndex, int>> delta_decompositions(const MultiIndex& I) {
  if (I.order() == 0) throw Error("delta decomposition of the empty multi-index");
  std::vector<std::pair<MultiIndex, int>> out;
  for (int i = 1; i <= I.base_dim(); ++i) {
    if (I.count(i) > 0) out.emplace_back(I.remove(i), i);
  }
  return out;
}

}  // namespace hjet
