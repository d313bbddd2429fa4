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

// Structural checks over query plans, the sign-mapping search between two
// demands, and a statistical comparison of what servers observe.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmpc/model.h"
#include "mmpc/planner.h"

namespace mmpc::audit {

struct CheckReport {
  std::string check;
  std::string scope;
  bool pass = true;
  std::vector<std::string> detail;

  nlohmann::json to_json() const;
};

// Each stage of round i holds every i-subset exactly once.
CheckReport check_subset_coverage(const planner::QueryPlan& plan);
// Queries on S+{x} and S+{y} give x and y the same index, in every stage.
CheckReport check_index_structure(const planner::QueryPlan& plan);
// Per server and label, distinct stages use disjoint index sets.
CheckReport check_stage_index_disjointness(const planner::QueryPlan& plan);
// Per stage of round i, rank C(M,i) - C(M-K,i) with exactly the
// dependent-only SideInfo queries redundant.
CheckReport check_redundancy_rank(const planner::QueryPlan& plan,
                                  const model::RelabeledLibrary& rlib);

enum class Mutation { kDropQuery, kSwapIndex, kDupDonor };

// Throws kConfig for unknown names.
Mutation parse_mutation(const std::string& name);
// Applies the mutation to the first stage where it is possible. Throws
// kBadParams if no stage admits it.
planner::QueryPlan mutate(const planner::QueryPlan& plan, Mutation mutation);

struct StageMapping {
  int server = 0;
  int round = 0;
  int stage = 0;
  // Multiplier for each second-plan symbol index used in the stage.
  std::map<std::uint32_t, int> sigma;
  // Whole-query flip per second-plan query, by lexicographic position.
  std::vector<int> switch_signs;
  // Independent sign choices; the stage has 2^components solutions.
  int components = 0;
};

struct SignMapping {
  std::vector<StageMapping> stages;

  // Every stage has exactly one solution up to global negation.
  bool two_solutions_everywhere() const;
};

// Plans must share (M, K, N) and stage counts and carry structure signs
// (switching signs are divided out). Queries are matched by their subset
// under the original labels, terms by original label. Throws kNoMapping on
// the first inconsistent constraint, kBadParams on shape mismatch.
SignMapping find_sign_mapping(const planner::QueryPlan& first, const model::RelabeledLibrary& r1,
                              const planner::QueryPlan& second,
                              const model::RelabeledLibrary& r2);

struct FeatureResult {
  std::string feature;
  int server = 0;
  int round = 0;
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
  bool reject = false;
};

struct ShapeReport {
  std::size_t samples = 0;
  double threshold = 0;
  std::vector<FeatureResult> features;

  bool any_reject() const;
  nlohmann::json to_json() const;
};

// Chi-square homogeneity over category counts, one row per population. Bins
// with expected count below 5 are pooled.
FeatureResult chi_square_homogeneity(const std::vector<std::map<std::string, std::size_t>>& rows);

// For every demand, `samples` independent tapes over one fixed plan; per
// server and round, features of the first stage as a server sees it on the
// wire. Throws kInsufficientSamples below 1000 samples or with fewer than two
// demand sets.
ShapeReport transcript_shape_test(const model::MessageLibrary& lib,
                                  const std::vector<model::DemandSet>& demands, int server_count,
                                  std::size_t samples, std::uint64_t seed, bool shuffle = true);

}  // namespace mmpc::audit
