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

// MDS compression of plan stages and the per-stage linear redundancy that the
// decoder eliminates.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmpc/gf.h"
#include "mmpc/model.h"
#include "mmpc/planner.h"

namespace mmpc::coding {

// r x c Cauchy matrix with x = 0..r-1 and y = r..r+c-1.
struct MdsMatrix {
  std::size_t r = 0;
  std::size_t c = 0;
  gf::FieldMatrix entries;
};

// Throws kFieldTooSmall if q < r + c, kDimensionMismatch if r > c.
MdsMatrix cauchy_mds(std::size_t r, std::size_t c, const gf::PrimeField& f);

// G column for each query of a round-`round` stage, indexed by the query's
// lexicographic position in the relabeled order. Columns themselves follow
// the lexicographic order of the subsets under the original labels, so that
// the column a subset lands in does not depend on the demand.
std::vector<std::size_t> column_order(const model::RelabeledLibrary& rlib, int round);

struct CodedTerm {
  int label = 0;
  std::uint32_t index = 0;
  gf::FieldElem coef;

  friend bool operator==(const CodedTerm&, const CodedTerm&) = default;
};

struct CodedQuery {
  int server = 0;
  int round = 0;
  int stage = 0;
  int row = 0;
  std::vector<CodedTerm> terms;

  friend bool operator==(const CodedQuery&, const CodedQuery&) = default;
};

// Row k is sum over queries of G[k][column_of[pos]] * query, with like terms
// merged and zeros dropped, terms in (label, index) order. The stage must be
// in lexicographic query order. Throws kDimensionMismatch.
std::vector<CodedQuery> encode_stage(const planner::Stage& stage, const MdsMatrix& g,
                                     std::span<const std::size_t> column_of,
                                     const gf::PrimeField& f);

// Each query as a row over ground coordinates (basis message k, symbol index).
struct Expansion {
  gf::FieldMatrix rows;
  // Distinct symbol indices, sorted; column = k * indices.size() + position.
  std::vector<std::uint32_t> indices;
};
Expansion expand_stage(const planner::Stage& stage, const model::MessageLibrary& base);

// q3 = A q1 + B q2 over query values, where q3 are the SideInfo queries on
// dependent labels only, q2 the Useless queries and q1 everything else.
struct Redundancy {
  std::vector<std::size_t> q1;
  std::vector<std::size_t> q2;
  std::vector<std::size_t> q3;
  gf::FieldMatrix a;
  gf::FieldMatrix b;
};

// Throws kRedundancyViolated if some q3 row is outside the span of q1 and q2.
Redundancy stage_redundancy_basis(const planner::Stage& stage,
                                  const model::RelabeledLibrary& rlib);

// One JSON object per line: {server, round, stage, row, terms:[[label, index,
// coef], ...]} with 1-based server, stage, row, label and index.
// Parsing throws kConfig on malformed records.
nlohmann::json wire_json(const CodedQuery& q);
CodedQuery parse_wire_json(const nlohmann::json& record);

}  // namespace mmpc::coding
