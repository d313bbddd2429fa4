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

#include "mmpc/audit.h"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <numeric>
#include <optional>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "mmpc/coding.h"
#include "mmpc/combinatorics.h"
#include "mmpc/error.h"
#include "mmpc/protocol.h"
#include "mmpc/rng.h"

namespace mmpc::audit {
namespace {

using planner::QueryPlan;
using planner::QuerySpec;
using planner::Stage;

constexpr std::uint64_t kTagShapeTape = 0x71;

std::string where(const Stage& s) {
  return "server " + std::to_string(s.server + 1) + " round " + std::to_string(s.round) +
         " stage " + std::to_string(s.stage + 1);
}

std::string set_name(LabelSet s) {
  std::string out = "{";
  for (int l : members(s)) out += (out.size() > 1 ? "," : "") + std::to_string(l + 1);
  return out + "}";
}

std::string scope_of(const QueryPlan& plan) {
  return "M=" + std::to_string(plan.message_count) + " K=" + std::to_string(plan.file_count) +
         " P=" + std::to_string(plan.demand_count) + " N=" + std::to_string(plan.server_count) +
         ", " + std::to_string(plan.stages.size()) + " stages";
}

CheckReport start_report(const char* name, const QueryPlan& plan) {
  return CheckReport{.check = name, .scope = scope_of(plan), .pass = true, .detail = {}};
}

void fail(CheckReport& report, std::string message) {
  report.pass = false;
  report.detail.push_back(std::move(message));
}

}  // namespace

nlohmann::json CheckReport::to_json() const {
  return {{"check", check}, {"scope", scope}, {"pass", pass}, {"detail", detail}};
}

CheckReport check_subset_coverage(const QueryPlan& plan) {
  CheckReport report = start_report("subset_coverage", plan);
  std::map<std::pair<int, int>, std::uint64_t> stage_count;
  for (const Stage& stage : plan.stages) {
    ++stage_count[{stage.server, stage.round}];
    std::map<LabelSet, int> seen;
    for (const QuerySpec& q : stage.queries) {
      if (set_size(q.subset) != stage.round) {
        fail(report, where(stage) + ": subset " + set_name(q.subset) + " has the wrong size");
      }
      ++seen[q.subset];
    }
    for (LabelSet subset : k_subsets(plan.message_count, stage.round)) {
      auto it = seen.find(subset);
      if (it == seen.end()) {
        fail(report, where(stage) + ": subset " + set_name(subset) + " missing");
      } else if (it->second > 1) {
        fail(report, where(stage) + ": subset " + set_name(subset) + " repeated");
      }
    }
  }
  for (int n = 0; n < plan.server_count; ++n) {
    for (int i = 1; i <= plan.counts.rounds(); ++i) {
      if (stage_count[{n, i}] != plan.counts.at(i)) {
        fail(report, "server " + std::to_string(n + 1) + " round " + std::to_string(i) + ": " +
                         std::to_string(stage_count[{n, i}]) + " stages, expected " +
                         std::to_string(plan.counts.at(i)));
      }
    }
  }
  return report;
}

CheckReport check_index_structure(const QueryPlan& plan) {
  CheckReport report = start_report("index_structure", plan);
  for (const Stage& stage : plan.stages) {
    if (auto clash = planner::find_index_clash(stage)) fail(report, where(stage) + ": " + *clash);
  }
  return report;
}

CheckReport check_stage_index_disjointness(const QueryPlan& plan) {
  CheckReport report = start_report("stage_index_disjointness", plan);
  // (server, label, index) -> first stage using it
  std::map<std::tuple<int, int, std::uint32_t>, std::size_t> owner;
  for (std::size_t st = 0; st < plan.stages.size(); ++st) {
    const Stage& stage = plan.stages[st];
    for (const QuerySpec& q : stage.queries) {
      for (const planner::Term& t : q.terms) {
        auto [it, inserted] = owner.emplace(std::make_tuple(stage.server, t.label, t.index), st);
        if (!inserted && it->second != st) {
          fail(report, where(stage) + ": message " + std::to_string(t.label + 1) + " index " +
                           std::to_string(t.index + 1) + " already used by " +
                           where(plan.stages[it->second]));
        }
      }
    }
  }
  return report;
}

CheckReport check_redundancy_rank(const QueryPlan& plan, const model::RelabeledLibrary& rlib) {
  CheckReport report = start_report("redundancy_rank", plan);
  const gf::PrimeField& f = rlib.base.field();
  for (const Stage& stage : plan.stages) {
    const int i = stage.round;
    const std::size_t expected =
        binomial(plan.message_count, i) - binomial(plan.message_count - plan.file_count, i);
    coding::Expansion ex = coding::expand_stage(stage, rlib.base);
    const std::size_t rank = gf::rank(ex.rows, f);
    if (rank != expected) {
      fail(report, where(stage) + ": rank " + std::to_string(rank) + ", expected " +
                       std::to_string(expected));
      continue;
    }
    try {
      coding::Redundancy red = coding::stage_redundancy_basis(stage, rlib);
      gf::FieldMatrix kept(0, ex.rows.cols());
      for (std::size_t pos : red.q1) kept.append_row(ex.rows.row(pos));
      for (std::size_t pos : red.q2) kept.append_row(ex.rows.row(pos));
      if (gf::rank(kept, f) != kept.rows()) {
        fail(report, where(stage) + ": a query outside the dependent-only SideInfo set is redundant");
      }
    } catch (const Error& e) {
      fail(report, where(stage) + ": " + e.what());
    }
  }
  return report;
}

Mutation parse_mutation(const std::string& name) {
  if (name == "drop-query") return Mutation::kDropQuery;
  if (name == "swap-index") return Mutation::kSwapIndex;
  if (name == "dup-donor") return Mutation::kDupDonor;
  throw Error(ErrorCode::kConfig,
              "unknown mutation '" + name + "' (expected drop-query, swap-index or dup-donor)");
}

QueryPlan mutate(const QueryPlan& plan, Mutation mutation) {
  QueryPlan out = plan;
  switch (mutation) {
    case Mutation::kDropQuery: {
      auto it = std::find_if(out.stages.begin(), out.stages.end(),
                             [](const Stage& s) { return s.round >= 2; });
      if (it == out.stages.end()) it = out.stages.begin();
      it->queries.pop_back();
      return out;
    }
    case Mutation::kSwapIndex: {
      for (Stage& stage : out.stages) {
        if (stage.round < 2) continue;
        for (std::size_t a = 0; a < stage.queries.size(); ++a) {
          for (std::size_t b = a + 1; b < stage.queries.size(); ++b) {
            for (auto& ta : stage.queries[a].terms) {
              for (auto& tb : stage.queries[b].terms) {
                if (ta.label == tb.label && ta.index != tb.index) {
                  std::swap(ta.index, tb.index);
                  return out;
                }
              }
            }
          }
        }
      }
      break;
    }
    case Mutation::kDupDonor: {
      for (int i = 2; i <= out.counts.rounds(); ++i) {
        if (out.counts.at(i) < 2) continue;
        const Stage& source = out.stages[out.stage_index(0, i, 0)];
        Stage& target = out.stages[out.stage_index(0, i, 1)];
        for (std::size_t pos = 0; pos < target.queries.size(); ++pos) {
          QuerySpec& q = target.queries[pos];
          if (q.kind != planner::QueryClass::kInformative || !contains(q.subset, 0)) continue;
          const QuerySpec& src = source.queries[pos];
          for (auto& t : q.terms) {
            if (t.label == 0) continue;
            auto it = std::find_if(src.terms.begin(), src.terms.end(),
                                   [&](const planner::Term& s) { return s.label == t.label; });
            t.index = it->index;
          }
          q.donor_stage = src.donor_stage;
          q.donor_subset = src.donor_subset;
        }
        return out;
      }
      break;
    }
  }
  throw Error(ErrorCode::kBadParams, "no stage admits the requested mutation");
}

bool SignMapping::two_solutions_everywhere() const {
  return std::all_of(stages.begin(), stages.end(),
                     [](const StageMapping& s) { return s.components == 1; });
}

SignMapping find_sign_mapping(const QueryPlan& first, const model::RelabeledLibrary& r1,
                              const QueryPlan& second, const model::RelabeledLibrary& r2) {
  if (first.message_count != second.message_count || first.file_count != second.file_count ||
      first.server_count != second.server_count || first.counts.alpha != second.counts.alpha ||
      first.stages.size() != second.stages.size()) {
    throw Error(ErrorCode::kBadParams, "plans differ in shape");
  }
  const int m = first.message_count;
  SignMapping mapping;
  for (std::size_t st = 0; st < first.stages.size(); ++st) {
    const Stage& s1 = first.stages[st];
    const Stage& s2 = second.stages[st];
    const std::size_t width = s1.queries.size();

    // Bipartite constraint graph: second-plan queries 0..width-1, then one
    // node per second-plan index. Edge parity 1 means the signs must differ.
    std::map<std::uint32_t, std::size_t> index_node;
    std::vector<std::vector<std::pair<std::size_t, int>>> edges(width);
    std::vector<std::size_t> visit_order;
    for (LabelSet original : k_subsets(m, s1.round)) {
      LabelSet g1 = 0;
      LabelSet g2 = 0;
      for (int o : members(original)) {
        g1 = with(g1, r1.relabeled_of[o]);
        g2 = with(g2, r2.relabeled_of[o]);
      }
      const QuerySpec& q1 = s1.queries.at(subset_rank(g1, m));
      const std::size_t p2 = subset_rank(g2, m);
      const QuerySpec& q2 = s2.queries.at(p2);
      visit_order.push_back(p2);
      for (const planner::Term& t1 : q1.terms) {
        const int l2 = r2.relabeled_of[r1.original_of[t1.label]];
        auto t2 = std::find_if(q2.terms.begin(), q2.terms.end(),
                               [&](const planner::Term& t) { return t.label == l2; });
        if (t2 == q2.terms.end()) throw Error(ErrorCode::kBadParams, "query terms do not match");
        auto [it, inserted] = index_node.emplace(t2->index, width + index_node.size());
        if (inserted) edges.emplace_back();
        const int parity = (t1.sign * q1.switch_sign) != (t2->sign * q2.switch_sign) ? 1 : 0;
        edges[p2].push_back({it->second, parity});
        edges[it->second].push_back({p2, parity});
      }
    }

    // Propagate outward from the first query in original-label order; a
    // breadth-first sweep reaches queries in order of their distance.
    std::vector<int> bit(edges.size(), -1);
    StageMapping sm;
    sm.server = s2.server;
    sm.round = s2.round;
    sm.stage = s2.stage;
    for (std::size_t startq : visit_order) {
      if (bit[startq] >= 0) continue;
      ++sm.components;
      bit[startq] = 0;
      std::deque<std::size_t> frontier{startq};
      while (!frontier.empty()) {
        const std::size_t node = frontier.front();
        frontier.pop_front();
        for (auto [next, parity] : edges[node]) {
          const int want = bit[node] ^ parity;
          if (bit[next] < 0) {
            bit[next] = want;
            frontier.push_back(next);
          } else if (bit[next] != want) {
            const std::size_t q = node < width ? node : next;
            throw Error(ErrorCode::kNoMapping,
                        where(s2) + ": query " + set_name(s2.queries[q].subset) +
                            " cannot be matched; sign constraint through index node " +
                            std::to_string(std::max(node, next) - width) + " is inconsistent");
          }
        }
      }
    }
    sm.switch_signs.resize(width);
    for (std::size_t q = 0; q < width; ++q) sm.switch_signs[q] = bit[q] ? -1 : 1;
    for (auto [index, node] : index_node) sm.sigma[index] = bit[node] ? -1 : 1;
    mapping.stages.push_back(std::move(sm));
  }
  return mapping;
}

FeatureResult chi_square_homogeneity(const std::vector<std::map<std::string, std::size_t>>& rows) {
  FeatureResult result;
  std::map<std::string, std::size_t> column_total;
  std::vector<double> row_total(rows.size(), 0);
  for (std::size_t d = 0; d < rows.size(); ++d) {
    for (const auto& [cat, count] : rows[d]) {
      column_total[cat] += count;
      row_total[d] += static_cast<double>(count);
    }
  }
  const double total = std::accumulate(row_total.begin(), row_total.end(), 0.0);
  if (total == 0 || rows.size() < 2) return result;
  const double min_row = *std::min_element(row_total.begin(), row_total.end());

  // Pool the sparsest categories until every bin expects at least 5 per row.
  std::vector<std::pair<std::size_t, std::string>> by_size;
  for (const auto& [cat, t] : column_total) by_size.push_back({t, cat});
  std::sort(by_size.begin(), by_size.end());
  std::vector<std::vector<std::string>> bins;
  std::vector<std::string> pending;
  std::size_t pending_total = 0;
  for (const auto& [t, cat] : by_size) {
    pending.push_back(cat);
    pending_total += t;
    if (static_cast<double>(pending_total) * min_row / total >= 5.0) {
      bins.push_back(std::move(pending));
      pending.clear();
      pending_total = 0;
    }
  }
  if (!pending.empty()) {
    if (bins.empty()) {
      bins.push_back(std::move(pending));
    } else {
      bins.back().insert(bins.back().end(), pending.begin(), pending.end());
    }
  }
  if (bins.size() < 2) return result;

  double stat = 0;
  for (const auto& bin : bins) {
    double col = 0;
    for (const auto& cat : bin) col += static_cast<double>(column_total[cat]);
    for (std::size_t d = 0; d < rows.size(); ++d) {
      double observed = 0;
      for (const auto& cat : bin) {
        auto it = rows[d].find(cat);
        if (it != rows[d].end()) observed += static_cast<double>(it->second);
      }
      const double expected = row_total[d] * col / total;
      stat += (observed - expected) * (observed - expected) / expected;
    }
  }
  result.statistic = stat;
  result.dof = static_cast<int>((rows.size() - 1) * (bins.size() - 1));
  result.p_value = boost::math::gamma_q(result.dof / 2.0, stat / 2.0);
  return result;
}

bool ShapeReport::any_reject() const {
  return std::any_of(features.begin(), features.end(),
                     [](const FeatureResult& r) { return r.reject; });
}

nlohmann::json ShapeReport::to_json() const {
  nlohmann::json detail = nlohmann::json::array();
  for (const FeatureResult& r : features) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "server %d round %d %s: chi2=%.4f dof=%d p=%.6g%s", r.server + 1,
                  r.round, r.feature.c_str(), r.statistic, r.dof, r.p_value,
                  r.reject ? " REJECT" : "");
    detail.push_back(buf);
  }
  char scope[96];
  std::snprintf(scope, sizeof scope, "%zu samples, per-test threshold %.3g", samples, threshold);
  return {{"check", "transcript_shape"}, {"scope", scope}, {"pass", !any_reject()},
          {"detail", std::move(detail)}};
}

namespace {

using Observation = std::map<std::string, std::string>;

// What one server can read off the wire records of one stage.
Observation observe_stage(const std::vector<const coding::CodedQuery*>& records,
                          const coding::MdsMatrix& g, const gf::PrimeField& f) {
  Observation obs;
  const coding::CodedQuery& first = *records.front();
  const coding::CodedTerm& lead = first.terms.front();
  obs["first_label"] = std::to_string(lead.label);
  obs["term_count"] = std::to_string(first.terms.size());
  obs["coef"] = std::to_string(lead.coef.value);

  const coding::CodedQuery* row0 = nullptr;
  const coding::CodedQuery* row1 = nullptr;
  for (const auto* r : records) {
    if (r->row == 0) row0 = r;
    if (r->row == 1) row1 = r;
  }
  std::map<std::uint32_t, int> multiplicity;
  for (const auto& t : row0->terms) ++multiplicity[t.index];
  std::vector<int> profile;
  for (auto [index, count] : multiplicity) profile.push_back(count);
  std::sort(profile.begin(), profile.end());
  std::string collision;
  for (int c : profile) collision += std::to_string(c) + ",";
  obs["index_collision"] = collision;
  if (row1 == nullptr) return obs;

  // Public G: the ratio of a term's coefficients in rows 0 and 1 names its column.
  auto column_of = [&](const coding::CodedTerm& t) -> std::optional<std::size_t> {
    auto match = std::find_if(row1->terms.begin(), row1->terms.end(), [&](const auto& u) {
      return u.label == t.label && u.index == t.index;
    });
    if (match == row1->terms.end()) return std::nullopt;
    const gf::FieldElem ratio = f.div(t.coef, match->coef);
    for (std::size_t j = 0; j < g.c; ++j) {
      if (f.div(g.entries(0, j), g.entries(1, j)) == ratio) return j;
    }
    return std::nullopt;
  };
  auto lead0 = std::find_if(row0->terms.begin(), row0->terms.end(), [&](const auto& u) {
    return u.label == lead.label && u.index == lead.index;
  });
  const auto column = lead0 == row0->terms.end() ? std::nullopt : column_of(*lead0);
  if (!column) {
    obs["subset"] = "merged";
    obs["sign_pattern"] = "merged";
    return obs;
  }
  obs["subset"] = std::to_string(*column);
  std::vector<std::pair<int, int>> signs;
  for (const auto& t : row0->terms) {
    if (column_of(t) != column) continue;
    const gf::FieldElem s = f.div(t.coef, g.entries(0, *column));
    signs.push_back({t.label, s == f.one() ? 1 : (s == f.sign(-1) ? -1 : 0)});
  }
  std::sort(signs.begin(), signs.end());
  std::string pattern;
  const int flip = signs.front().second;
  for (auto [label, s] : signs) pattern += s * flip > 0 ? '+' : (s == 0 ? '?' : '-');
  obs["sign_pattern"] = pattern;
  return obs;
}

}  // namespace

ShapeReport transcript_shape_test(const model::MessageLibrary& lib,
                                  const std::vector<model::DemandSet>& demands, int server_count,
                                  std::size_t samples, std::uint64_t seed, bool shuffle) {
  if (samples < 1000 || demands.size() < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "need at least 1000 samples and two demand sets, got " + std::to_string(samples) +
                    " and " + std::to_string(demands.size()));
  }
  const gf::PrimeField& f = lib.field();
  // (feature, server, round) -> per-demand category counts
  std::map<std::tuple<std::string, int, int>, std::vector<std::map<std::string, std::size_t>>>
      counts;

  for (std::size_t di = 0; di < demands.size(); ++di) {
    const protocol::Session base =
        protocol::open_session(lib, demands[di], server_count, seed, {.shuffle = shuffle});
    const auto sizes = base.plan.stage_sizes();
    protocol::Session cur{.rlib = base.rlib,
                          .demand = base.demand,
                          .summary = base.summary,
                          .tape = {},
                          .plan = {},
                          .g = base.g,
                          .columns = base.columns,
                          .redundancy = {},
                          .coded = {}};
    for (std::size_t s = 0; s < samples; ++s) {
      cur.tape = model::RandomTape::draw(Rng::derive(seed, kTagShapeTape, di, s).next(),
                                         base.plan.length, sizes);
      cur.tape.shuffle_enabled = shuffle;
      cur.plan = planner::assign_signs(base.plan, cur.tape);
      // Only first stages are observed; the rest stay empty so that the
      // dispatch shuffle orders just the observed records.
      cur.coded.assign(cur.plan.stages.size(), {});
      for (std::size_t st = 0; st < cur.plan.stages.size(); ++st) {
        const auto& stage = cur.plan.stages[st];
        if (stage.stage != 0) continue;
        cur.coded[st] = coding::encode_stage(stage, cur.g[stage.round - 1],
                                             cur.columns[stage.round - 1], f);
      }
      const auto wire = protocol::wire_queries(cur);
      for (int n = 0; n < server_count; ++n) {
        for (int i = 1; i <= cur.summary.counts.rounds(); ++i) {
          std::vector<const coding::CodedQuery*> records;
          for (const auto& q : wire[n]) {
            if (q.round == i && q.stage == 0) records.push_back(&q);
          }
          for (const auto& [feature, value] : observe_stage(records, cur.g[i - 1], f)) {
            auto& rows = counts[{feature, n, i}];
            rows.resize(demands.size());
            ++rows[di][value];
          }
        }
      }
    }
  }

  ShapeReport report;
  report.samples = samples;
  report.threshold = 0.01 / static_cast<double>(counts.size());
  for (const auto& [key, rows] : counts) {
    FeatureResult r = chi_square_homogeneity(rows);
    r.feature = std::get<0>(key);
    r.server = std::get<1>(key);
    r.round = std::get<2>(key);
    r.reject = r.p_value < report.threshold;
    report.features.push_back(std::move(r));
  }
  return report;
}

}  // namespace mmpc::audit
