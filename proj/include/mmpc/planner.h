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

// Stage counts, index assignment, sign assignment and shuffling. The output is
// the uncoded query plan over relabeled messages and alternated symbol
// indices; the coding module compresses it and the protocol module puts it on
// the wire.
//
// Conventions: labels, servers, stages and symbol indices are 0-based; a round
// number is the subset size of its queries and therefore starts at 1.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmpc/combinatorics.h"
#include "mmpc/model.h"

namespace mmpc::planner {

using Rational = boost::multiprecision::cpp_rational;

struct StageCounts {
  // alpha[i - 1] = stages per server in round i, for i = 1..M-P+1.
  std::vector<std::uint64_t> alpha;
  std::uint64_t scale = 1;

  int rounds() const { return static_cast<int>(alpha.size()); }
  // Zero for rounds past the last one.
  std::uint64_t at(int round) const {
    return round >= 1 && round <= rounds() ? alpha[round - 1] : 0;
  }
  friend bool operator==(const StageCounts&, const StageCounts&) = default;
};

// Throws kBadParams unless 1 <= P <= M-1 and N >= 2.
StageCounts stage_counts(int message_count, int demand_count, int server_count);

// Coded downloads per stage of `round`.
std::uint64_t coded_stage_size(int message_count, int file_count, int demand_count, int round);

struct PlanSummary {
  StageCounts counts;
  std::uint64_t length = 0;    // L
  std::uint64_t download = 0;  // D
  Rational rate;               // P * L / D
  // coded_sizes[i - 1] = downloads per stage of round i.
  std::vector<std::uint64_t> coded_sizes;
};

// Throws kBadParams unless 1 <= P < K <= M and N >= 2.
PlanSummary plan_summary(int message_count, int file_count, int demand_count, int server_count);

enum class QueryClass : std::uint8_t { kInformative, kSideInfo, kUseless };

std::string_view query_class_name(QueryClass c);

struct Term {
  int label = 0;
  std::uint32_t index = 0;
  int sign = 1;

  friend bool operator==(const Term&, const Term&) = default;
};

struct QuerySpec {
  int server = 0;
  int round = 0;
  int stage = 0;
  LabelSet subset = 0;
  QueryClass kind = QueryClass::kSideInfo;
  // Ascending label order until shuffled.
  std::vector<Term> terms;
  int switch_sign = 1;
  // Stage (index into QueryPlan::stages) and SideInfo subset whose terms were
  // copied into this query; -1 / 0 when nothing was copied.
  int donor_stage = -1;
  LabelSet donor_subset = 0;

  friend bool operator==(const QuerySpec&, const QuerySpec&) = default;
};

struct Stage {
  int server = 0;
  int round = 0;
  int stage = 0;
  // One query per i-subset, in lexicographic subset order until shuffled.
  std::vector<QuerySpec> queries;

  friend bool operator==(const Stage&, const Stage&) = default;
};

struct QueryPlan {
  int message_count = 0;
  int file_count = 0;
  int demand_count = 0;
  int server_count = 0;
  StageCounts counts;
  std::uint32_t length = 0;
  // Ordered by (round, stage, server): every donor precedes its consumers.
  std::vector<Stage> stages;

  std::size_t stage_index(int server, int round, int stage) const;
  std::vector<std::size_t> stage_sizes() const;
  // Query of `stage` on `subset`; requires lexicographic query order.
  const QuerySpec& query(std::size_t stage, LabelSet subset) const;

  friend bool operator==(const QueryPlan&, const QueryPlan&) = default;
};

// Indexed plan with all signs +1. Throws kDonorExhausted or kIndexClash,
// both of which indicate a construction defect.
QueryPlan build_query_plan(const model::RelabeledLibrary& rlib, const StageCounts& counts,
                           int server_count);

// Structure plus/minus by round parity, then the switching sign from the tape.
QueryPlan assign_signs(const QueryPlan& plan, const model::RandomTape& tape);

// Permutes query order per stage and term order per query. The input plan is
// the unshuffled copy the client keeps for decoding.
QueryPlan shuffle_plan(const QueryPlan& plan, const model::RandomTape& tape);

// First pair of queries in `stage` that break the shared-index structure:
// for queries on S+{x} and S+{y} the indices of x and y must agree.
std::optional<std::string> find_index_clash(const Stage& stage);

// One JSON object per query, 1-based labels and indices.
void write_plan_dump(const QueryPlan& plan, std::ostream& out);

}  // namespace mmpc::planner
