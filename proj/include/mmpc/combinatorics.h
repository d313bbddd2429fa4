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

#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace mmpc {

// Message subsets are bitmasks over labels; libraries are small enough that
// 32 labels is a hard ceiling.
using LabelSet = std::uint32_t;

inline constexpr int kMaxLabels = 31;

// C(n, k), zero outside 0 <= k <= n.
std::uint64_t binomial(std::int64_t n, std::int64_t k);

inline int set_size(LabelSet s) { return std::popcount(s); }
inline bool contains(LabelSet s, int label) { return (s >> label) & 1U; }
inline LabelSet with(LabelSet s, int label) { return s | (LabelSet{1} << label); }
inline LabelSet without(LabelSet s, int label) { return s & ~(LabelSet{1} << label); }
LabelSet range_set(int first, int last_exclusive);

// Labels of `s` in ascending order.
std::vector<int> members(LabelSet s);

// All k-subsets of `universe` in lexicographic order of their sorted members.
std::vector<LabelSet> k_subsets(std::span<const int> universe, int k);

// Same, for universe {0, ..., n-1}.
std::vector<LabelSet> k_subsets(int n, int k);

// Position of `s` in k_subsets(n, |s|).
std::size_t subset_rank(LabelSet s, int n);

// Lexicographic comparison of the sorted member lists of two equal-size sets.
bool lex_less(LabelSet a, LabelSet b);

}  // namespace mmpc
