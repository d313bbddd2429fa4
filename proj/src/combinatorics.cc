// Copyright 2026 The MMPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmpc/combinatorics.h"

#include <numeric>

namespace mmpc {

std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    // Exact at every step: result * (n - k + i) is divisible by i.
    result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return result;
}

LabelSet range_set(int first, int last_exclusive) {
  LabelSet s = 0;
  for (int l = first; l < last_exclusive; ++l) s = with(s, l);
  return s;
}

std::vector<int> members(LabelSet s) {
  std::vector<int> out;
  out.reserve(set_size(s));
  while (s != 0) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

std::vector<LabelSet> k_subsets(std::span<const int> universe, int k) {
  std::vector<LabelSet> out;
  const int n = static_cast<int>(universe.size());
  if (k < 0 || k > n) return out;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    LabelSet s = 0;
    for (int p : pick) s = with(s, universe[p]);
    out.push_back(s);
    int i = k - 1;
    while (i >= 0 && pick[i] == n - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

std::vector<LabelSet> k_subsets(int n, int k) {
  std::vector<int> universe(n);
  std::iota(universe.begin(), universe.end(), 0);
  return k_subsets(universe, k);
}

std::size_t subset_rank(LabelSet s, int n) {
  const int k = set_size(s);
  std::size_t rank = 0;
  int next = 0;
  int t = 0;
  for (int label : members(s)) {
    ++t;
    for (int v = next; v < label; ++v) rank += binomial(n - 1 - v, k - t);
    next = label + 1;
  }
  return rank;
}

bool lex_less(LabelSet a, LabelSet b) {
  // The first differing label decides: whichever set holds the smaller one
  // sorts first.
  LabelSet diff = a ^ b;
  if (diff == 0) return false;
  int lowest = std::countr_zero(diff);
  return contains(a, lowest);
}

}  // namespace mmpc
