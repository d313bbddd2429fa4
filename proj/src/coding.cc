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

#include "mmpc/coding.h"

#include <algorithm>
#include <map>
#include <utility>

#include "mmpc/combinatorics.h"
#include "mmpc/error.h"

namespace mmpc::coding {

using gf::FieldElem;
using gf::FieldMatrix;
using gf::PrimeField;

MdsMatrix cauchy_mds(std::size_t r, std::size_t c, const PrimeField& f) {
  if (r > c) {
    throw Error(ErrorCode::kDimensionMismatch,
                "MDS matrix needs r <= c, got " + std::to_string(r) + "x" + std::to_string(c));
  }
  if (f.modulus() < r + c) {
    throw Error(ErrorCode::kFieldTooSmall, "Cauchy " + std::to_string(r) + "x" +
                                               std::to_string(c) + " needs q >= " +
                                               std::to_string(r + c) + ", have q=" +
                                               std::to_string(f.modulus()));
  }
  MdsMatrix g{.r = r, .c = c, .entries = FieldMatrix(r, c)};
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const auto x = static_cast<std::int64_t>(i);
      const auto y = static_cast<std::int64_t>(r + j);
      g.entries(i, j) = f.inv(f.reduce(x - y));
    }
  }
  return g;
}

std::vector<std::size_t> column_order(const model::RelabeledLibrary& rlib, int round) {
  const int m = rlib.base.message_count();
  std::vector<std::size_t> columns;
  for (LabelSet subset : k_subsets(m, round)) {
    LabelSet original = 0;
    for (int l : members(subset)) original = with(original, rlib.original_of[l]);
    columns.push_back(subset_rank(original, m));
  }
  return columns;
}

std::vector<CodedQuery> encode_stage(const planner::Stage& stage, const MdsMatrix& g,
                                     std::span<const std::size_t> column_of,
                                     const PrimeField& f) {
  if (stage.queries.size() != g.c || column_of.size() != g.c) {
    throw Error(ErrorCode::kDimensionMismatch,
                "stage has " + std::to_string(stage.queries.size()) + " queries, G has " +
                    std::to_string(g.c) + " columns, column map has " +
                    std::to_string(column_of.size()));
  }
  for (std::size_t pos = 1; pos < stage.queries.size(); ++pos) {
    if (!lex_less(stage.queries[pos - 1].subset, stage.queries[pos].subset)) {
      throw Error(ErrorCode::kDimensionMismatch, "stage queries are not in lexicographic order");
    }
  }
  std::vector<CodedQuery> coded;
  coded.reserve(g.r);
  for (std::size_t row = 0; row < g.r; ++row) {
    std::map<std::pair<int, std::uint32_t>, FieldElem> merged;
    for (std::size_t pos = 0; pos < stage.queries.size(); ++pos) {
      const FieldElem weight = g.entries(row, column_of[pos]);
      for (const planner::Term& t : stage.queries[pos].terms) {
        FieldElem& slot = merged[{t.label, t.index}];
        slot = f.add(slot, f.mul(weight, f.sign(t.sign)));
      }
    }
    CodedQuery q{.server = stage.server,
                 .round = stage.round,
                 .stage = stage.stage,
                 .row = static_cast<int>(row),
                 .terms = {}};
    for (const auto& [key, coef] : merged) {
      if (coef.value != 0) q.terms.push_back(CodedTerm{key.first, key.second, coef});
    }
    coded.push_back(std::move(q));
  }
  return coded;
}

Expansion expand_stage(const planner::Stage& stage, const model::MessageLibrary& base) {
  const PrimeField& f = base.field();
  const int k = base.file_count();
  Expansion out;
  for (const auto& q : stage.queries) {
    for (const auto& t : q.terms) out.indices.push_back(t.index);
  }
  std::sort(out.indices.begin(), out.indices.end());
  out.indices.erase(std::unique(out.indices.begin(), out.indices.end()), out.indices.end());
  const std::size_t width = out.indices.size();
  out.rows = FieldMatrix(stage.queries.size(), static_cast<std::size_t>(k) * width);
  for (std::size_t r = 0; r < stage.queries.size(); ++r) {
    for (const auto& t : stage.queries[r].terms) {
      const std::size_t pos =
          std::lower_bound(out.indices.begin(), out.indices.end(), t.index) - out.indices.begin();
      auto coeff = base.coefficient_row(t.label);
      for (int file = 0; file < k; ++file) {
        FieldElem& cell = out.rows(r, file * width + pos);
        cell = f.add(cell, f.mul(f.sign(t.sign), coeff[file]));
      }
    }
  }
  return out;
}

Redundancy stage_redundancy_basis(const planner::Stage& stage,
                                  const model::RelabeledLibrary& rlib) {
  const int k = rlib.base.file_count();
  const PrimeField& f = rlib.base.field();
  Redundancy red;
  for (std::size_t pos = 0; pos < stage.queries.size(); ++pos) {
    const auto& q = stage.queries[pos];
    const bool all_dependent = (q.subset & range_set(0, k)) == 0;
    if (q.kind == planner::QueryClass::kSideInfo && all_dependent) {
      red.q3.push_back(pos);
    } else if (q.kind == planner::QueryClass::kUseless) {
      red.q2.push_back(pos);
    } else {
      red.q1.push_back(pos);
    }
  }
  red.a = FieldMatrix(red.q3.size(), red.q1.size());
  red.b = FieldMatrix(red.q3.size(), red.q2.size());
  if (red.q3.empty()) return red;

  Expansion ex = expand_stage(stage, rlib.base);
  FieldMatrix basis(0, ex.rows.cols());
  for (std::size_t pos : red.q1) basis.append_row(ex.rows.row(pos));
  for (std::size_t pos : red.q2) basis.append_row(ex.rows.row(pos));
  FieldMatrix targets(0, ex.rows.cols());
  for (std::size_t pos : red.q3) targets.append_row(ex.rows.row(pos));
  FieldMatrix coeffs;
  try {
    coeffs = gf::solve_in_row_span(targets, basis, f);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotInSpan) throw;
    throw Error(ErrorCode::kRedundancyViolated,
                "server " + std::to_string(stage.server + 1) + " round " +
                    std::to_string(stage.round) + " stage " + std::to_string(stage.stage + 1) +
                    ": " + e.what());
  }
  for (std::size_t t = 0; t < red.q3.size(); ++t) {
    for (std::size_t j = 0; j < red.q1.size(); ++j) red.a(t, j) = coeffs(t, j);
    for (std::size_t j = 0; j < red.q2.size(); ++j) red.b(t, j) = coeffs(t, red.q1.size() + j);
  }
  return red;
}

nlohmann::json wire_json(const CodedQuery& q) {
  nlohmann::json terms = nlohmann::json::array();
  for (const CodedTerm& t : q.terms) terms.push_back({t.label + 1, t.index + 1, t.coef.value});
  return {{"server", q.server + 1},
          {"round", q.round},
          {"stage", q.stage + 1},
          {"row", q.row + 1},
          {"terms", std::move(terms)}};
}

CodedQuery parse_wire_json(const nlohmann::json& record) {
  try {
    CodedQuery q{.server = record.at("server").get<int>() - 1,
                 .round = record.at("round").get<int>(),
                 .stage = record.at("stage").get<int>() - 1,
                 .row = record.at("row").get<int>() - 1,
                 .terms = {}};
    if (q.server < 0 || q.round < 1 || q.stage < 0 || q.row < 0) {
      throw Error(ErrorCode::kConfig, "server, round, stage and row are 1-based");
    }
    for (const auto& t : record.at("terms")) {
      if (!t.is_array() || t.size() != 3) throw Error(ErrorCode::kConfig, "term must be a triple");
      const int label = t[0].get<int>();
      const auto index = t[1].get<std::uint32_t>();
      if (label < 1 || index < 1) throw Error(ErrorCode::kConfig, "labels and indices are 1-based");
      q.terms.push_back(CodedTerm{label - 1, index - 1, FieldElem{t[2].get<std::uint32_t>()}});
    }
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed wire record: ") + e.what());
  }
}

}  // namespace mmpc::coding
