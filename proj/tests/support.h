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

// Shared fixtures for the unit and acceptance suites.

#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "mmpc/combinatorics.h"
#include "mmpc/error.h"
#include "mmpc/model.h"
#include "mmpc/rng.h"

namespace mmpc::testing {

inline constexpr std::uint64_t kBigPrime = 2147483647;

// Five messages over three files: d = a + b, e = b + c.
inline model::MessageLibrary golden_library(std::uint64_t q = kBigPrime) {
  return model::MessageLibrary::build(5, 3, q, {{1, 1, 0}, {0, 1, 1}});
}

inline model::DemandSet demand_of(std::initializer_list<int> labels) {
  return model::DemandSet{std::vector<int>(labels)};
}

// Distinct dependent rows with at least two nonzero entries, so that no
// dependent message duplicates a file.
inline model::MessageLibrary random_library(int m, int k, std::uint64_t q, Rng& rng,
                                            std::uint64_t entry_range = 0) {
  const std::uint64_t range = entry_range == 0 ? q : entry_range;
  std::vector<std::vector<std::int64_t>> rows;
  while (static_cast<int>(rows.size()) < m - k) {
    std::vector<std::int64_t> row(k);
    int nonzero = 0;
    for (auto& x : row) {
      x = static_cast<std::int64_t>(rng.uniform(range));
      nonzero += x != 0;
    }
    if (nonzero < 2) continue;
    bool repeated = false;
    for (const auto& r : rows) repeated |= r == row;
    if (!repeated) rows.push_back(row);
  }
  return model::MessageLibrary::build(m, k, q, rows);
}

// Uniformly drawn admissible demand (independent rows).
inline model::DemandSet random_demand(const model::MessageLibrary& lib, int p, Rng& rng) {
  std::vector<int> labels(lib.message_count());
  std::iota(labels.begin(), labels.end(), 0);
  for (;;) {
    rng.shuffle(std::span<int>(labels));
    model::DemandSet d{std::vector<int>(labels.begin(), labels.begin() + p)};
    try {
      model::validate_demand(lib, d);
      return d;
    } catch (const Error&) {
    }
  }
}

struct GridPoint {
  int m, k, p, n;
  std::string name() const {
    return "M=" + std::to_string(m) + " K=" + std::to_string(k) + " P=" + std::to_string(p) +
           " N=" + std::to_string(n);
  }
};

// N in {2,3}, M in [3:7], K in [2:M], P in [1:K-1].
inline std::vector<GridPoint> small_grid(int max_m = 7) {
  std::vector<GridPoint> out;
  for (int n : {2, 3})
    for (int m = 3; m <= max_m; ++m)
      for (int k = 2; k <= m; ++k)
        for (int p = 1; p < k; ++p) out.push_back({m, k, p, n});
  return out;
}

// Every admissible demand of size p, in lexicographic order.
inline std::vector<model::DemandSet> all_demands(const model::MessageLibrary& lib, int p) {
  std::vector<model::DemandSet> out;
  for (LabelSet s : k_subsets(lib.message_count(), p)) {
    model::DemandSet d{members(s)};
    try {
      model::validate_demand(lib, d);
      out.push_back(d);
    } catch (const Error&) {
    }
  }
  return out;
}

// Determinant mod q by cofactor expansion; an oracle for tiny matrices only.
inline std::int64_t det_mod(const std::vector<std::vector<std::int64_t>>& a, std::int64_t q) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  if (n == 1) return ((a[0][0] % q) + q) % q;
  std::int64_t total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<std::int64_t>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<std::int64_t> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(row);
    }
    const std::int64_t term = ((a[0][c] % q) + q) % q * det_mod(minor, q) % q;
    total = (total + (c % 2 ? q - term : term)) % q;
  }
  return total;
}

}  // namespace mmpc::testing
