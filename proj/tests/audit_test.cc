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

#include <cmath>

#include <gtest/gtest.h>

#include "mmpc/audit.h"
#include "mmpc/coding.h"
#include "mmpc/protocol.h"
#include "support.h"

namespace mmpc::audit {
namespace {

using mmpc::testing::golden_library;
using planner::QueryPlan;

struct Signed {
  model::RelabeledLibrary rlib;
  QueryPlan plan;
};

Signed signed_plan(const model::MessageLibrary& lib, const model::DemandSet& d, int n,
                   std::uint64_t seed) {
  protocol::Session s = protocol::open_session(lib, d, n, seed);
  return {std::move(s.rlib), std::move(s.plan)};
}

TEST(Structure, GoldenPasses) {
  for (auto d : {model::DemandSet{{0, 1}}, model::DemandSet{{3, 4}}}) {
    const Signed s = signed_plan(golden_library(), d, 2, 1);
    EXPECT_TRUE(check_subset_coverage(s.plan).pass);
    EXPECT_TRUE(check_index_structure(s.plan).pass);
    EXPECT_TRUE(check_stage_index_disjointness(s.plan).pass);
    EXPECT_TRUE(check_redundancy_rank(s.plan, s.rlib).pass);
  }
}

TEST(Structure, GoldenRankNineOfTen) {
  const Signed s = signed_plan(golden_library(), {{0, 1}}, 2, 1);
  for (const auto& stage : s.plan.stages) {
    const auto ex = coding::expand_stage(stage, s.rlib.base);
    const std::size_t want = stage.round == 2 ? 9 : (stage.round == 3 ? 10 : (stage.round == 1 ? 3 : 5));
    EXPECT_EQ(gf::rank(ex.rows, s.rlib.base.field()), want);
  }
  const Signed full = signed_plan(model::MessageLibrary::build(4, 4, 2147483647, {}), {{0, 1}}, 2, 1);
  for (const auto& stage : full.plan.stages) {
    EXPECT_EQ(gf::rank(coding::expand_stage(stage, full.rlib.base).rows, full.rlib.base.field()),
              stage.queries.size());
  }
  EXPECT_TRUE(check_redundancy_rank(full.plan, full.rlib).pass);
}

TEST(Structure, EachCheckCatchesItsMutation) {
  const Signed s = signed_plan(golden_library(), {{0, 1}}, 2, 1);
  const QueryPlan dropped = mutate(s.plan, Mutation::kDropQuery);
  const CheckReport cov = check_subset_coverage(dropped);
  EXPECT_FALSE(cov.pass);
  ASSERT_FALSE(cov.detail.empty());
  EXPECT_NE(cov.detail[0].find("server 1 round 2 stage 1"), std::string::npos) << cov.detail[0];
  EXPECT_NE(cov.detail[0].find("{4,5} missing"), std::string::npos) << cov.detail[0];
  EXPECT_FALSE(check_index_structure(mutate(s.plan, Mutation::kSwapIndex)).pass);
  EXPECT_FALSE(check_stage_index_disjointness(mutate(s.plan, Mutation::kDupDonor)).pass);
  // The untargeted checks stay quiet where the mutation leaves them intact.
  EXPECT_TRUE(check_index_structure(dropped).pass);
  EXPECT_TRUE(check_subset_coverage(mutate(s.plan, Mutation::kSwapIndex)).pass);
}

TEST(Structure, ReportJson) {
  const Signed s = signed_plan(golden_library(), {{0, 1}}, 2, 1);
  const auto j = check_subset_coverage(s.plan).to_json();
  EXPECT_EQ(j.at("check"), "subset_coverage");
  EXPECT_EQ(j.at("pass"), true);
  EXPECT_EQ(j.at("scope"), "M=5 K=3 P=2 N=2, 40 stages");
  EXPECT_TRUE(j.at("detail").empty());
  EXPECT_EQ(parse_mutation("dup-donor"), Mutation::kDupDonor);
  EXPECT_THROW(parse_mutation("flip"), Error);
}

// Exhaustive oracle over whole-query flips: every index multiplier is then
// forced by its first occurrence. Returns the number of consistent choices.
std::size_t brute_force_solutions(const planner::Stage& s1, const model::RelabeledLibrary& r1,
                                  const planner::Stage& s2, const model::RelabeledLibrary& r2,
                                  int m) {
  struct Edge {
    std::size_t query;
    std::uint32_t index;
    int want;  // required product flip * sigma
  };
  std::vector<Edge> edges;
  for (std::size_t p2 = 0; p2 < s2.queries.size(); ++p2) {
    const auto& q2 = s2.queries[p2];
    LabelSet g1 = 0;
    for (int l : members(q2.subset)) g1 = with(g1, r1.relabeled_of[r2.original_of[l]]);
    const auto& q1 = s1.queries[subset_rank(g1, m)];
    for (const auto& t2 : q2.terms) {
      const int l1 = r1.relabeled_of[r2.original_of[t2.label]];
      for (const auto& t1 : q1.terms) {
        if (t1.label != l1) continue;
        edges.push_back({p2, t2.index, t1.sign * q1.switch_sign * t2.sign * q2.switch_sign});
      }
    }
  }
  std::size_t count = 0;
  const std::size_t width = s2.queries.size();
  for (std::uint64_t flips = 0; flips < (1ULL << width); ++flips) {
    std::map<std::uint32_t, int> sigma;
    bool ok = true;
    for (const Edge& e : edges) {
      const int flip = (flips >> e.query) & 1 ? -1 : 1;
      auto [it, inserted] = sigma.emplace(e.index, e.want * flip);
      if (!inserted && it->second != e.want * flip) {
        ok = false;
        break;
      }
    }
    count += ok;
  }
  return count;
}

TEST(SignMapping, IdentityIsTrivial) {
  const Signed s = signed_plan(golden_library(), {{0, 1}}, 2, 3);
  const SignMapping m = find_sign_mapping(s.plan, s.rlib, s.plan, s.rlib);
  EXPECT_TRUE(m.two_solutions_everywhere());
  for (const auto& st : m.stages) {
    for (int v : st.switch_signs) EXPECT_EQ(v, 1);
    for (auto [i, v] : st.sigma) EXPECT_EQ(v, 1);
  }
}

TEST(SignMapping, GoldenPairMatchesBruteForce) {
  const Signed a = signed_plan(golden_library(), {{0, 1}}, 2, 3);
  const Signed b = signed_plan(golden_library(), {{3, 4}}, 2, 4);
  const SignMapping m = find_sign_mapping(a.plan, a.rlib, b.plan, b.rlib);
  EXPECT_TRUE(m.two_solutions_everywhere());
  ASSERT_EQ(m.stages.size(), a.plan.stages.size());
  for (std::size_t st = 0; st < a.plan.stages.size(); ++st) {
    EXPECT_EQ(brute_force_solutions(a.plan.stages[st], a.rlib, b.plan.stages[st], b.rlib, 5), 2u)
        << st;
  }
}

TEST(SignMapping, AppliedMappingReproducesSigns) {
  const Signed a = signed_plan(golden_library(), {{0, 1}}, 2, 3);
  const Signed b = signed_plan(golden_library(), {{2, 3}}, 2, 8);
  const SignMapping m = find_sign_mapping(a.plan, a.rlib, b.plan, b.rlib);
  for (std::size_t st = 0; st < a.plan.stages.size(); ++st) {
    const auto& s1 = a.plan.stages[st];
    const auto& s2 = b.plan.stages[st];
    for (std::size_t p2 = 0; p2 < s2.queries.size(); ++p2) {
      const auto& q2 = s2.queries[p2];
      LabelSet g1 = 0;
      for (int l : members(q2.subset)) g1 = with(g1, a.rlib.relabeled_of[b.rlib.original_of[l]]);
      const auto& q1 = s1.queries[subset_rank(g1, 5)];
      for (const auto& t2 : q2.terms) {
        const int l1 = a.rlib.relabeled_of[b.rlib.original_of[t2.label]];
        const auto t1 = std::find_if(q1.terms.begin(), q1.terms.end(),
                                     [&](const auto& t) { return t.label == l1; });
        EXPECT_EQ(t2.sign * q2.switch_sign * m.stages[st].switch_signs[p2] * m.stages[st].sigma.at(t2.index),
                  t1->sign * q1.switch_sign);
      }
    }
  }
}

TEST(SignMapping, SmallInstancesAllPairs) {
  for (const auto& g : mmpc::testing::small_grid(4)) {
    Rng rng = Rng::derive(1, 3, g.m * 100 + g.k * 10 + g.p, g.n);
    const auto lib = mmpc::testing::random_library(g.m, g.k, 2147483647, rng, 3);
    const auto demands = mmpc::testing::all_demands(lib, g.p);
    std::vector<Signed> plans;
    for (const auto& d : demands) plans.push_back(signed_plan(lib, d, g.n, rng.next()));
    for (const auto& x : plans) {
      for (const auto& y : plans) {
        const SignMapping m = find_sign_mapping(x.plan, x.rlib, y.plan, y.rlib);
        EXPECT_TRUE(m.two_solutions_everywhere()) << g.name();
        for (std::size_t st = 0; st < x.plan.stages.size(); ++st) {
          if (x.plan.stages[st].queries.size() > 12) continue;
          EXPECT_EQ(brute_force_solutions(x.plan.stages[st], x.rlib, y.plan.stages[st], y.rlib, g.m),
                    2u);
        }
      }
    }
  }
}

TEST(SignMapping, BrokenSignHasNoMapping) {
  const Signed a = signed_plan(golden_library(), {{0, 1}}, 2, 3);
  Signed b = signed_plan(golden_library(), {{3, 4}}, 2, 4);
  auto& q = b.plan.stages[b.plan.stage_index(0, 2, 0)].queries[3];
  q.terms[0].sign = -q.terms[0].sign;
  try {
    find_sign_mapping(a.plan, a.rlib, b.plan, b.rlib);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoMapping);
  }
  const Signed c = signed_plan(golden_library(), {{0, 1}}, 3, 3);
  try {
    find_sign_mapping(a.plan, a.rlib, c.plan, c.rlib);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadParams);
  }
}

TEST(ChiSquare, TwoByTwoMatchesClosedForm) {
  const FeatureResult r = chi_square_homogeneity({{{"A", 30}, {"B", 10}}, {{"A", 10}, {"B", 30}}});
  EXPECT_NEAR(r.statistic, 20.0, 1e-9);
  EXPECT_EQ(r.dof, 1);
  // One degree of freedom: p = erfc(sqrt(x / 2)).
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(10.0)), 1e-12);
  const FeatureResult same = chi_square_homogeneity({{{"A", 50}, {"B", 50}}, {{"A", 50}, {"B", 50}}});
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_NEAR(same.p_value, 1.0, 1e-12);
}

TEST(ChiSquare, SparseBinsArePooled) {
  // Two rare categories pool into one bin; three bins remain.
  const FeatureResult r = chi_square_homogeneity(
      {{{"A", 40}, {"B", 40}, {"x", 2}, {"y", 3}}, {{"A", 40}, {"B", 40}, {"x", 3}, {"y", 2}}});
  EXPECT_EQ(r.dof, 2);
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
  const FeatureResult single = chi_square_homogeneity({{{"A", 100}}, {{"A", 100}}});
  EXPECT_EQ(single.dof, 0);
  EXPECT_EQ(single.p_value, 1.0);
}

TEST(ShapeTest, GuardsAndPower) {
  const auto lib = golden_library();
  EXPECT_THROW(transcript_shape_test(lib, {{{0, 1}}, {{3, 4}}}, 2, 999, 1), Error);
  EXPECT_THROW(transcript_shape_test(lib, {{{0, 1}}}, 2, 1000, 1), Error);
  const ShapeReport same = transcript_shape_test(lib, {{{0, 1}}, {{0, 1}}}, 2, 1000, 1);
  EXPECT_FALSE(same.any_reject());
  EXPECT_NEAR(same.threshold, 0.01 / static_cast<double>(same.features.size()), 1e-15);
  const ShapeReport raw = transcript_shape_test(lib, {{{0, 1}}, {{3, 4}}}, 2, 1000, 1, false);
  EXPECT_TRUE(raw.any_reject());
  EXPECT_EQ(raw.to_json().at("pass"), false);
}

}  // namespace
}  // namespace mmpc::audit
