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

#include "mmpc/planner.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "mmpc/error.h"
#include "mmpc/rng.h"

namespace mmpc::planner {
namespace {

using boost::multiprecision::cpp_int;

constexpr std::uint64_t kTagPlanQueries = 0x51;
constexpr std::uint64_t kTagPlanTerms = 0x52;

std::uint64_t to_u64(const cpp_int& v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint64_t>::max()) {
    throw Error(ErrorCode::kBadParams, std::string(what) + " does not fit in 64 bits");
  }
  return v.convert_to<std::uint64_t>();
}

void check_scheme_params(int m, int k, int p, int n) {
  if (!(1 <= p && p < k && k <= m && n >= 2)) {
    throw Error(ErrorCode::kBadParams, "need 1 <= P < K <= M and N >= 2, got M=" +
                                           std::to_string(m) + " K=" + std::to_string(k) +
                                           " P=" + std::to_string(p) + " N=" + std::to_string(n));
  }
  if (m > kMaxLabels) throw Error(ErrorCode::kBadParams, "M too large");
}

}  // namespace

StageCounts stage_counts(int message_count, int demand_count, int server_count) {
  const int m = message_count;
  const int p = demand_count;
  const int n = server_count;
  if (!(1 <= p && p <= m - 1 && n >= 2)) {
    throw Error(ErrorCode::kBadParams, "need 1 <= P <= M-1 and N >= 2");
  }
  const int rounds = m - p + 1;
  std::vector<Rational> raw(rounds + p + 1, Rational(0));
  cpp_int top = 1;
  for (int i = 0; i < m - p; ++i) top *= (n - 1);
  raw[rounds] = Rational(top);
  for (int i = rounds - 1; i >= 1; --i) {
    Rational sum = 0;
    for (int mm = 1; mm <= p; ++mm) sum += Rational(cpp_int(binomial(p, mm))) * raw[i + mm];
    raw[i] = sum / (n - 1);
  }
  cpp_int scale = 1;
  for (int i = 1; i <= rounds; ++i) {
    cpp_int den = boost::multiprecision::denominator(raw[i]);
    scale = scale / boost::multiprecision::gcd(scale, den) * den;
  }
  StageCounts counts;
  counts.scale = to_u64(scale, "stage scale");
  for (int i = 1; i <= rounds; ++i) {
    Rational scaled = raw[i] * Rational(scale);
    counts.alpha.push_back(to_u64(boost::multiprecision::numerator(scaled), "stage count"));
  }
  return counts;
}

std::uint64_t coded_stage_size(int message_count, int file_count, int demand_count, int round) {
  const int m = message_count;
  const int k = file_count;
  const int p = demand_count;
  return binomial(m - p, round) - binomial(m - k, round) +
         static_cast<std::uint64_t>(p) * binomial(m - p, round - 1);
}

PlanSummary plan_summary(int message_count, int file_count, int demand_count, int server_count) {
  check_scheme_params(message_count, file_count, demand_count, server_count);
  PlanSummary summary;
  summary.counts = stage_counts(message_count, demand_count, server_count);
  cpp_int length = 0;
  cpp_int download = 0;
  for (int i = 1; i <= summary.counts.rounds(); ++i) {
    const std::uint64_t r = coded_stage_size(message_count, file_count, demand_count, i);
    summary.coded_sizes.push_back(r);
    length += cpp_int(summary.counts.at(i)) * binomial(message_count - demand_count, i - 1);
    download += cpp_int(summary.counts.at(i)) * r;
  }
  length *= server_count;
  download *= server_count;
  summary.length = to_u64(length, "L");
  summary.download = to_u64(download, "D");
  summary.rate = Rational(length * demand_count, download);
  return summary;
}

std::string_view query_class_name(QueryClass c) {
  switch (c) {
    case QueryClass::kInformative:
      return "informative";
    case QueryClass::kSideInfo:
      return "side_info";
    case QueryClass::kUseless:
      return "useless";
  }
  return "?";
}

std::size_t QueryPlan::stage_index(int server, int round, int stage) const {
  std::size_t offset = 0;
  for (int r = 1; r < round; ++r) offset += counts.at(r) * server_count;
  return offset + static_cast<std::size_t>(stage) * server_count + server;
}

std::vector<std::size_t> QueryPlan::stage_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(stages.size());
  for (const Stage& s : stages) sizes.push_back(s.queries.size());
  return sizes;
}

const QuerySpec& QueryPlan::query(std::size_t stage, LabelSet subset) const {
  return stages.at(stage).queries.at(subset_rank(subset, message_count));
}

QueryPlan build_query_plan(const model::RelabeledLibrary& rlib, const StageCounts& counts,
                           int server_count) {
  const int m = rlib.base.message_count();
  const int k = rlib.base.file_count();
  const int p = rlib.demand_count;
  const int n_servers = server_count;
  check_scheme_params(m, k, p, n_servers);
  if (counts.alpha != stage_counts(m, p, n_servers).alpha) {
    throw Error(ErrorCode::kBadParams, "stage counts do not match (M, P, N)");
  }
  const PlanSummary summary = plan_summary(m, k, p, n_servers);
  if (summary.length > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kBadParams, "subpacketization exceeds 32-bit indices");
  }

  QueryPlan plan;
  plan.message_count = m;
  plan.file_count = k;
  plan.demand_count = p;
  plan.server_count = n_servers;
  plan.counts = counts;
  plan.length = static_cast<std::uint32_t>(summary.length);
  const int rounds = counts.rounds();

  std::vector<int> non_demanded;
  for (int l = p; l < m; ++l) non_demanded.push_back(l);
  const LabelSet demanded_set = range_set(0, p);

  // Donor queues per (consumer server, round), round-robin over the others.
  std::vector<std::vector<std::deque<std::size_t>>> queues(
      n_servers, std::vector<std::deque<std::size_t>>(rounds + 1));
  for (int j = 1; j <= rounds; ++j) {
    for (std::uint64_t s = 0; s < counts.at(j); ++s) {
      for (int offset = 1; offset < n_servers; ++offset) {
        for (int n = 0; n < n_servers; ++n) {
          queues[n][j].push_back(plan.stage_index((n + offset) % n_servers, j,
                                                  static_cast<int>(s)));
        }
      }
    }
  }
  auto pop_donor = [&](int consumer, int round) {
    auto& queue = queues[consumer][round];
    if (queue.empty()) {
      throw Error(ErrorCode::kDonorExhausted, "server " + std::to_string(consumer + 1) +
                                                  " ran out of round-" + std::to_string(round) +
                                                  " donors");
    }
    std::size_t d = queue.front();
    queue.pop_front();
    return d;
  };
  auto classify = [&](LabelSet subset) {
    int hits = set_size(subset & demanded_set);
    return hits == 0 ? QueryClass::kSideInfo
                     : (hits == 1 ? QueryClass::kInformative : QueryClass::kUseless);
  };
  auto nd_rank = [&](LabelSet nd_subset) { return subset_rank(nd_subset >> p, m - p); };

  plan.stages.reserve(summary.counts.alpha.size());
  std::uint32_t next_fresh = 0;
  for (int i = 1; i <= rounds; ++i) {
    const std::size_t width = binomial(m, i);
    const std::uint64_t fresh_per_stage = binomial(m - p, i - 1);
    if (i == 2) next_fresh = static_cast<std::uint32_t>(n_servers * counts.at(1));
    for (std::uint64_t s = 0; s < counts.at(i); ++s) {
      for (int n = 0; n < n_servers; ++n) {
        Stage stage{.server = n, .round = i, .stage = static_cast<int>(s), .queries = {}};
        std::vector<QuerySpec> slots(width);
        auto slot = [&](LabelSet subset) -> QuerySpec& { return slots[subset_rank(subset, m)]; };
        auto start = [&](LabelSet subset) -> QuerySpec& {
          QuerySpec& q = slot(subset);
          q.server = n;
          q.round = i;
          q.stage = static_cast<int>(s);
          q.subset = subset;
          q.kind = classify(subset);
          return q;
        };
        auto copy_from = [&](QuerySpec& q, std::size_t donor, LabelSet nd_subset) {
          const QuerySpec& src = plan.query(donor, nd_subset);
          q.terms.insert(q.terms.end(), src.terms.begin(), src.terms.end());
          q.donor_stage = static_cast<int>(donor);
          q.donor_subset = nd_subset;
        };
        auto finish = [](QuerySpec& q) {
          std::sort(q.terms.begin(), q.terms.end(),
                    [](const Term& a, const Term& b) { return a.label < b.label; });
          for (Term& t : q.terms) t.sign = 1;
        };

        if (i == 1) {
          // Every message gets the same fresh index in a round-1 stage.
          const auto index = static_cast<std::uint32_t>(n * counts.at(1) + s);
          for (int l = 0; l < m; ++l) {
            QuerySpec& q = start(with(0, l));
            q.terms.push_back(Term{l, index, 1});
          }
        } else {
          const std::uint32_t base = next_fresh;
          next_fresh += static_cast<std::uint32_t>(fresh_per_stage);

          for (int theta = 0; theta < p; ++theta) {
            const std::size_t donor = pop_donor(n, i - 1);
            for (LabelSet side : k_subsets(non_demanded, i - 1)) {
              QuerySpec& q = start(with(side, theta));
              q.terms.push_back(Term{theta, base + static_cast<std::uint32_t>(nd_rank(side)), 1});
              copy_from(q, donor, side);
              finish(q);
            }
          }
          for (LabelSet subset : k_subsets(non_demanded, i)) {
            QuerySpec& q = start(subset);
            for (int label : members(subset)) {
              q.terms.push_back(
                  Term{label, base + static_cast<std::uint32_t>(nd_rank(without(subset, label))), 1});
            }
          }
          for (int hits = 2; hits <= std::min(p, i); ++hits) {
            for (LabelSet demanded : k_subsets(p, hits)) {
              const std::size_t donor =
                  i > hits ? pop_donor(n, i - hits) : std::numeric_limits<std::size_t>::max();
              for (LabelSet side : k_subsets(non_demanded, i - hits)) {
                QuerySpec& q = start(demanded | side);
                for (int x : members(demanded)) {
                  const LabelSet rest = without(q.subset, x);
                  int y = p;
                  while (contains(rest, y)) ++y;
                  const QuerySpec& ref = slot(with(rest, y));
                  auto it = std::find_if(ref.terms.begin(), ref.terms.end(),
                                         [&](const Term& t) { return t.label == y; });
                  if (it == ref.terms.end()) {
                    throw Error(ErrorCode::kIndexClash, "reference query for useless index missing");
                  }
                  q.terms.push_back(Term{x, it->index, 1});
                }
                if (i > hits) copy_from(q, donor, side);
                finish(q);
              }
            }
          }
        }
        stage.queries = std::move(slots);
        if (auto clash = find_index_clash(stage)) {
          throw Error(ErrorCode::kIndexClash,
                      "server " + std::to_string(n + 1) + " round " + std::to_string(i) +
                          " stage " + std::to_string(s + 1) + ": " + *clash);
        }
        plan.stages.push_back(std::move(stage));
      }
    }
  }

  for (int n = 0; n < n_servers; ++n) {
    for (int j = 1; j <= rounds - 1; ++j) {
      if (!queues[n][j].empty()) {
        throw Error(ErrorCode::kDonorExhausted,
                    std::to_string(queues[n][j].size()) + " round-" + std::to_string(j) +
                        " donor stages left unused by server " + std::to_string(n + 1));
      }
    }
  }
  return plan;
}

QueryPlan assign_signs(const QueryPlan& plan, const model::RandomTape& tape) {
  QueryPlan signed_plan = plan;
  for (std::size_t st = 0; st < signed_plan.stages.size(); ++st) {
    Stage& stage = signed_plan.stages[st];
    if (stage.round == 1) continue;
    const int between = stage.round % 2 == 0 ? 1 : -1;
    for (std::size_t qi = 0; qi < stage.queries.size(); ++qi) {
      QuerySpec& q = stage.queries[qi];
      q.switch_sign = tape.switching.at(st).at(qi);
      std::vector<Term*> ordered;
      for (Term& t : q.terms) ordered.push_back(&t);
      std::sort(ordered.begin(), ordered.end(),
                [](const Term* a, const Term* b) { return a->label < b->label; });
      int independent_sign = 1;
      int dependent_sign = between;
      for (Term* t : ordered) {
        if (t->label < plan.file_count) {
          t->sign = independent_sign * q.switch_sign;
          independent_sign = -independent_sign;
        } else {
          t->sign = dependent_sign * q.switch_sign;
          dependent_sign = -dependent_sign;
        }
      }
    }
  }
  return signed_plan;
}

QueryPlan shuffle_plan(const QueryPlan& plan, const model::RandomTape& tape) {
  QueryPlan shuffled = plan;
  if (!tape.shuffle_enabled) return shuffled;
  for (std::size_t st = 0; st < shuffled.stages.size(); ++st) {
    auto& queries = shuffled.stages[st].queries;
    Rng::derive(tape.shuffle_seed, kTagPlanQueries, st).shuffle(std::span<QuerySpec>(queries));
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      Rng::derive(tape.shuffle_seed, kTagPlanTerms, st, qi)
          .shuffle(std::span<Term>(queries[qi].terms));
    }
  }
  return shuffled;
}

std::optional<std::string> find_index_clash(const Stage& stage) {
  // rest subset -> (index of the completing label, completed subset)
  std::map<LabelSet, std::pair<std::uint32_t, LabelSet>> seen;
  for (const QuerySpec& q : stage.queries) {
    for (const Term& t : q.terms) {
      const LabelSet rest = without(q.subset, t.label);
      auto [it, inserted] = seen.emplace(rest, std::make_pair(t.index, q.subset));
      if (!inserted && it->second.first != t.index) {
        auto name = [](LabelSet s) {
          std::string out = "{";
          for (int l : members(s)) out += (out.size() > 1 ? "," : "") + std::to_string(l + 1);
          return out + "}";
        };
        return "queries " + name(it->second.second) + " and " + name(q.subset) +
               " disagree on the index completing " + name(rest) + " (" +
               std::to_string(it->second.first + 1) + " vs " + std::to_string(t.index + 1) + ")";
      }
    }
  }
  return std::nullopt;
}

void write_plan_dump(const QueryPlan& plan, std::ostream& out) {
  for (const Stage& stage : plan.stages) {
    for (const QuerySpec& q : stage.queries) {
      nlohmann::json terms = nlohmann::json::array();
      for (const Term& t : q.terms) terms.push_back({t.label + 1, t.index + 1, t.sign});
      nlohmann::json record = {{"server", q.server + 1},
                               {"round", q.round},
                               {"stage", q.stage + 1},
                               {"class", query_class_name(q.kind)},
                               {"terms", std::move(terms)}};
      out << record.dump() << '\n';
    }
  }
}

}  // namespace mmpc::planner
