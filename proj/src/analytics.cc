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

#include "mmpc/analytics.h"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "mmpc/error.h"

namespace mmpc::analytics {
namespace {

using boost::multiprecision::cpp_int;

cpp_int power(int base, int exp) {
  cpp_int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

Rational pc_capacity(int server_count, int file_count) {
  if (server_count < 2 || file_count < 1) {
    throw Error(ErrorCode::kBadParams, "pc_capacity needs N >= 2 and K >= 1");
  }
  const Rational n(server_count);
  return (Rational(1) - Rational(1) / n) /
         (Rational(1) - Rational(cpp_int(1), power(server_count, file_count)));
}

BaselineRate baseline_rate(int message_count, int file_count, int demand_count,
                           int server_count) {
  const int m = message_count;
  const int k = file_count;
  const int p = demand_count;
  const int n = server_count;
  if (!(1 <= p && p <= k && k <= m && n >= 2)) {
    throw Error(ErrorCode::kBadParams, "baseline needs 1 <= P <= K <= M and N >= 2");
  }
  BaselineRate b;
  const Rational tail = Rational(1) - Rational(cpp_int(1), power(n, k));
  b.delta = Rational((p - 1) * (n - 1)) / (Rational(power(n, m)) * tail);
  b.first_term = pc_capacity(n, k) + b.delta;
  b.r1 = b.first_term;
  if (2 * p >= m) {
    b.c_mmp = Rational(1) / (Rational(1) + Rational(m - p, p * n));
    b.r1 = std::max(b.r1, *b.c_mmp);
  }
  return b;
}

GapCheck gap_check(int file_count, int demand_count, int server_count,
                   const Rational& achieved) {
  const int k = file_count;
  const int p = demand_count;
  const int n = server_count;
  if (!(1 <= p && p <= k && n >= 2) || achieved <= 0) {
    throw Error(ErrorCode::kBadParams, "gap_check needs 1 <= P <= K, N >= 2, positive rate");
  }
  GapCheck g;
  if (2 * p <= k) {
    g.r_upper = (Rational(1) - Rational(1, n)) /
                (Rational(1) - Rational(cpp_int(1), power(n, k / p)));
  } else {
    g.r_upper = Rational(1) / (Rational(1) + Rational(k - p, p * n));
  }
  g.ratio = g.r_upper / achieved;
  g.within2 = g.ratio <= 2;
  return g;
}

RatePoint rate_point(int message_count, int file_count, int demand_count, int server_count) {
  RatePoint pt;
  pt.m = message_count;
  pt.k = file_count;
  pt.p = demand_count;
  pt.n = server_count;
  const BaselineRate base = baseline_rate(message_count, file_count, demand_count, server_count);
  pt.r1 = base.r1;
  pt.delta = base.delta;
  pt.c_mmp = base.c_mmp;
  pt.c_pc = pc_capacity(server_count, file_count);
  pt.r2 = demand_count == file_count
              ? Rational(demand_count, file_count)
              : planner::plan_summary(message_count, file_count, demand_count, server_count).rate;
  const GapCheck g = gap_check(file_count, demand_count, server_count, std::max(pt.r1, pt.r2));
  pt.r_upper = g.r_upper;
  pt.gap = g.ratio;
  return pt;
}

GridAxis parse_axis(const std::string& text) {
  auto parse_int = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorCode::kConfig, "invalid range '" + text + "': expected a or a:b");
    }
    return std::stoi(s);
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const int v = parse_int(text);
    return {v, v};
  }
  GridAxis axis{parse_int(text.substr(0, colon)), parse_int(text.substr(colon + 1))};
  if (axis.last < axis.first) {
    throw Error(ErrorCode::kConfig, "invalid range '" + text + "': end before start");
  }
  return axis;
}

std::vector<RatePoint> sweep(GridAxis m, GridAxis k, GridAxis p, GridAxis n) {
  std::vector<RatePoint> points;
  for (int mi = m.first; mi <= m.last; ++mi) {
    for (int ki = k.first; ki <= k.last; ++ki) {
      for (int pi = p.first; pi <= p.last; ++pi) {
        for (int ni = n.first; ni <= n.last; ++ni) {
          if (pi < 1 || pi > ki || ki > mi || ni < 2) continue;
          points.push_back(rate_point(mi, ki, pi, ni));
        }
      }
    }
  }
  return points;
}

std::string decimal(const Rational& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.convert_to<double>());
  return buf;
}

void write_csv(const std::vector<RatePoint>& points, std::ostream& out) {
  out << "M,K,P,N,R1,R2,C_pc,Delta,C_mmP,R_upper,gap\n";
  for (const RatePoint& pt : points) {
    out << pt.m << ',' << pt.k << ',' << pt.p << ',' << pt.n << ',' << decimal(pt.r1) << ','
        << decimal(pt.r2) << ',' << decimal(pt.c_pc) << ',' << decimal(pt.delta) << ','
        << (pt.c_mmp ? decimal(*pt.c_mmp) : "NA") << ',' << decimal(pt.r_upper) << ','
        << decimal(pt.gap) << '\n';
  }
}

}  // namespace mmpc::analytics
