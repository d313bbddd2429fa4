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

#include <algorithm>
#include <numeric>
#include <optional>

#include <gtest/gtest.h>

#include "mmpc/coding.h"
#include "support.h"

namespace mmpc::coding {
namespace {

using gf::FieldElem;
using gf::PrimeField;
using planner::QueryPlan;
using planner::Stage;

FieldElem eval_query(const planner::QuerySpec& q, const model::AlternatedSymbols& u,
                     const PrimeField& f) {
  FieldElem acc = f.zero();
  for (const auto& t : q.terms) acc = f.add(acc, f.mul(f.sign(t.sign), u(t.label, t.index)));
  return acc;
}

FieldElem eval_coded(const CodedQuery& q, const model::AlternatedSymbols& u, const PrimeField& f) {
  FieldElem acc = f.zero();
  for (const auto& t : q.terms) acc = f.add(acc, f.mul(t.coef, u(t.label, t.index)));
  return acc;
}

struct Fixture {
  model::RelabeledLibrary rlib;
  model::RandomTape tape;
  QueryPlan plan;
};

Fixture signed_plan(const model::MessageLibrary& lib, const model::DemandSet& d, int n,
                    std::optional<std::uint64_t> seed) {
  model::RelabeledLibrary r = model::relabel(lib, d);
  QueryPlan plan = planner::build_query_plan(
      r, planner::stage_counts(lib.message_count(), d.size(), n), n);
  model::RandomTape tape = seed ? model::RandomTape::draw(*seed, plan.length, plan.stage_sizes())
                                : model::RandomTape::identity(plan.length, plan.stage_sizes());
  QueryPlan s = planner::assign_signs(plan, tape);
  return {std::move(r), std::move(tape), std::move(s)};
}

TEST(Cauchy, Examples) {
  const MdsMatrix one = cauchy_mds(1, 1, PrimeField(5));
  EXPECT_EQ(one.entries(0, 0).value, 4u);
  const MdsMatrix g = cauchy_mds(2, 3, PrimeField(7));
  // Entries from the definition 1 / (x - y), x in {0,1}, y in {2,3,4}.
  const std::int64_t want[2][3] = {{3, 2, 5}, {6, 3, 2}};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(g.entries(r, c).value, want[r][c]) << r << c;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      EXPECT_NE(mmpc::testing::det_mod({{want[0][a], want[0][b]}, {want[1][a], want[1][b]}}, 7), 0);
  try {
    cauchy_mds(3, 5, PrimeField(7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFieldTooSmall);
  }
  try {
    cauchy_mds(4, 3, PrimeField(101));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Cauchy, EverySquareSubmatrixInvertible) {
  for (auto [r, c, q] : {std::tuple{2, 5, 7}, {3, 6, 11}, {4, 7, 13}, {3, 10, 101}}) {
    const MdsMatrix g = cauchy_mds(r, c, PrimeField(q));
    for (int k = 1; k <= r; ++k) {
      for (LabelSet rows : k_subsets(r, k)) {
        for (LabelSet cols : k_subsets(c, k)) {
          std::vector<std::vector<std::int64_t>> sub;
          for (int i : members(rows)) {
            std::vector<std::int64_t> row;
            for (int j : members(cols)) row.push_back(g.entries(i, j).value);
            sub.push_back(row);
          }
          EXPECT_NE(mmpc::testing::det_mod(sub, q), 0);
        }
      }
    }
  }
}

TEST(ColumnOrder, FollowsOriginalLabels) {
  const auto lib = mmpc::testing::golden_library(101);
  const auto ab = model::relabel(lib, {{0, 1}});
  EXPECT_EQ(column_order(ab, 2), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  // {d,e} relabels (d, e, a, b, c) to (0, 1, 2, 3, 4). New subset {0,1} = {d,e}
  // is original rank 9; {0,2} = {d,a} is original {a,d}, rank 2.
  const auto de = model::relabel(lib, {{3, 4}});
  const auto cols = column_order(de, 2);
  EXPECT_EQ(cols[0], 9u);
  EXPECT_EQ(cols[1], 2u);
  std::vector<std::size_t> sorted = cols;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, column_order(ab, 2));
}

TEST(Encode, GoldenShapes) {
  Fixture fx = signed_plan(mmpc::testing::golden_library(), {{0, 1}}, 2, std::nullopt);
  const PrimeField& f = fx.rlib.base.field();
  const Stage& r1 = fx.plan.stages[fx.plan.stage_index(0, 1, 0)];
  const Stage& r2 = fx.plan.stages[fx.plan.stage_index(0, 2, 0)];
  const auto c1 = encode_stage(r1, cauchy_mds(3, 5, f), column_order(fx.rlib, 1), f);
  const auto c2 = encode_stage(r2, cauchy_mds(8, 10, f), column_order(fx.rlib, 2), f);
  EXPECT_EQ(c1.size(), 3u);
  EXPECT_EQ(c2.size(), 8u);
  // Each coded round-1 row mixes all five singletons.
  for (const auto& q : c1) EXPECT_EQ(q.terms.size(), 5u);
  EXPECT_THROW(encode_stage(r2, cauchy_mds(8, 9, f), column_order(fx.rlib, 2), f), Error);
}

TEST(Encode, IdentityPrefixDouble) {
  Fixture fx = signed_plan(mmpc::testing::golden_library(), {{0, 1}}, 2, 3);
  const PrimeField& f = fx.rlib.base.field();
  const Stage& s = fx.plan.stages[fx.plan.stage_index(1, 3, 1)];
  MdsMatrix g{.r = 7, .c = 10, .entries = gf::FieldMatrix(7, 10)};
  for (std::size_t i = 0; i < 7; ++i) g.entries(i, i) = f.one();
  std::vector<std::size_t> cols(10);
  std::iota(cols.begin(), cols.end(), 0);
  const auto coded = encode_stage(s, g, cols, f);
  for (std::size_t i = 0; i < 7; ++i) {
    auto terms = s.queries[i].terms;
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.label < b.label; });
    ASSERT_EQ(coded[i].terms.size(), terms.size());
    for (std::size_t j = 0; j < terms.size(); ++j) {
      EXPECT_EQ(coded[i].terms[j].label, terms[j].label);
      EXPECT_EQ(coded[i].terms[j].index, terms[j].index);
      EXPECT_EQ(coded[i].terms[j].coef, f.sign(terms[j].sign));
    }
  }
}

TEST(Encode, Linearity) {
  Rng rng(12);
  for (int t = 0; t < 6; ++t) {
    const auto lib = mmpc::testing::random_library(5 + t % 2, 3, 1000003, rng);
    const auto d = mmpc::testing::random_demand(lib, 2, rng);
    Fixture fx = signed_plan(lib, d, 2 + t % 2, t);
    const PrimeField& f = fx.rlib.base.field();
    const auto files = model::random_files(f, 3, fx.plan.length, t);
    const model::AlternatedSymbols u(fx.rlib, files, fx.tape);
    for (const Stage& s : fx.plan.stages) {
      if (s.stage > 1) continue;
      const auto g = cauchy_mds(planner::coded_stage_size(lib.message_count(), 3, 2, s.round),
                                s.queries.size(), f);
      const auto cols = column_order(fx.rlib, s.round);
      const auto coded = encode_stage(s, g, cols, f);
      for (std::size_t row = 0; row < g.r; ++row) {
        FieldElem want = f.zero();
        for (std::size_t pos = 0; pos < s.queries.size(); ++pos)
          want = f.add(want, f.mul(g.entries(row, cols[pos]), eval_query(s.queries[pos], u, f)));
        EXPECT_EQ(eval_coded(coded[row], u, f), want);
        for (const auto& term : coded[row].terms) EXPECT_NE(term.coef, f.zero());
      }
    }
  }
}

// The redundant round-2 query of the worked example, with its seven-term
// relation. Lexicographic positions: ab=0 ac=1 ad=2 ae=3 bc=4 bd=5 be=6
// cd=7 ce=8 de=9.
TEST(Redundancy, WorkedExampleRelation) {
  Fixture fx = signed_plan(mmpc::testing::golden_library(), {{0, 1}}, 2, std::nullopt);
  const PrimeField& f = fx.rlib.base.field();
  const Stage& s = fx.plan.stages[fx.plan.stage_index(0, 2, 0)];
  const Redundancy red = stage_redundancy_basis(s, fx.rlib);
  EXPECT_EQ(red.q3, (std::vector<std::size_t>{9}));
  EXPECT_EQ(red.q2, (std::vector<std::size_t>{0}));
  EXPECT_EQ(red.q1, (std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8}));
  const std::vector<int> want_a = {1, 0, 1, 1, -1, 1, -1, 0};
  for (std::size_t j = 0; j < 8; ++j)
    EXPECT_EQ(f.centered(red.a(0, j)), want_a[j]) << "position " << red.q1[j];
  EXPECT_EQ(f.centered(red.b(0, 0)), 1);
}

TEST(Redundancy, AllIndependentLibraryHasNone) {
  Fixture fx = signed_plan(model::MessageLibrary::build(4, 4, 101, {}), {{0, 1}}, 2, 1);
  for (const Stage& s : fx.plan.stages) {
    const Redundancy red = stage_redundancy_basis(s, fx.rlib);
    EXPECT_TRUE(red.q3.empty());
    EXPECT_EQ(red.a.rows(), 0u);
  }
}

TEST(Redundancy, ReconstructionOnRandomLibraries) {
  Rng rng(5);
  for (const auto& g : mmpc::testing::small_grid(6)) {
    if (g.m == g.k) continue;
    const auto lib = mmpc::testing::random_library(g.m, g.k, 1000003, rng);
    const auto d = mmpc::testing::random_demand(lib, g.p, rng);
    Fixture fx = signed_plan(lib, d, g.n, g.m + g.k);
    const PrimeField& f = fx.rlib.base.field();
    const auto files = model::random_files(f, g.k, fx.plan.length, 9);
    const model::AlternatedSymbols u(fx.rlib, files, fx.tape);
    for (const Stage& s : fx.plan.stages) {
      if (s.stage > 0) continue;
      const Redundancy red = stage_redundancy_basis(s, fx.rlib);
      EXPECT_EQ(red.q3.size(), binomial(g.m - g.k, s.round)) << g.name();
      for (std::size_t t = 0; t < red.q3.size(); ++t) {
        FieldElem acc = f.zero();
        for (std::size_t j = 0; j < red.q1.size(); ++j)
          acc = f.add(acc, f.mul(red.a(t, j), eval_query(s.queries[red.q1[j]], u, f)));
        for (std::size_t j = 0; j < red.q2.size(); ++j)
          acc = f.add(acc, f.mul(red.b(t, j), eval_query(s.queries[red.q2[j]], u, f)));
        EXPECT_EQ(acc, eval_query(s.queries[red.q3[t]], u, f)) << g.name();
      }
    }
  }
}

TEST(Wire, RoundTripAndErrors) {
  CodedQuery q{.server = 1, .round = 3, .stage = 4, .row = 2,
               .terms = {{0, 7, FieldElem{5}}, {3, 0, FieldElem{100}}}};
  const nlohmann::json j = wire_json(q);
  EXPECT_EQ(j.dump(), R"({"round":3,"row":3,"server":2,"stage":5,"terms":[[1,8,5],[4,1,100]]})");
  EXPECT_EQ(parse_wire_json(j), q);
  for (const char* bad : {R"({"round":3})", R"({"round":3,"row":3,"server":2,"stage":5,"terms":[[1]]})",
                          R"({"round":3,"row":0,"server":2,"stage":5,"terms":[]})"}) {
    try {
      parse_wire_json(nlohmann::json::parse(bad));
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
  }
}

}  // namespace
}  // namespace mmpc::coding
