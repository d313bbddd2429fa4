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

// Closed-form rates and bounds in exact rational arithmetic.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmpc/planner.h"

namespace mmpc::analytics {

using planner::Rational;

// (1 - 1/N) / (1 - 1/N^K). Throws kBadParams unless N >= 2, K >= 1.
Rational pc_capacity(int server_count, int file_count);

struct BaselineRate {
  Rational r1;
  Rational delta;
  Rational first_term;  // pc_capacity + delta
  // Known in closed form only for P >= M/2.
  std::optional<Rational> c_mmp;
};

// Throws kBadParams unless 1 <= P <= K <= M and N >= 2.
BaselineRate baseline_rate(int message_count, int file_count, int demand_count,
                           int server_count);

struct GapCheck {
  Rational r_upper;
  Rational ratio;
  bool within2 = false;
};

// Throws kBadParams unless 1 <= P <= K, N >= 2 and the achieved rate is positive.
GapCheck gap_check(int file_count, int demand_count, int server_count,
                   const Rational& achieved);

struct RatePoint {
  int m = 0;
  int k = 0;
  int p = 0;
  int n = 0;
  Rational r1;
  Rational r2;
  Rational c_pc;
  Rational delta;
  std::optional<Rational> c_mmp;
  Rational r_upper;
  Rational gap;  // r_upper / max(r1, r2)
};

// R2 is P/K when P == K.
RatePoint rate_point(int message_count, int file_count, int demand_count, int server_count);

struct GridAxis {
  int first = 0;
  int last = 0;  // inclusive
};

// Parses "a" or "a:b". Throws kConfig.
GridAxis parse_axis(const std::string& text);

// Every admissible (M, K, P, N) in the grid, in M, K, P, N order; tuples with
// P > K or K > M are skipped.
std::vector<RatePoint> sweep(GridAxis m, GridAxis k, GridAxis p, GridAxis n);

void write_csv(const std::vector<RatePoint>& points, std::ostream& out);

// Fixed six-decimal rendering.
std::string decimal(const Rational& r);

}  // namespace mmpc::analytics
