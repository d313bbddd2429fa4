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

#include "mmpc/protocol.h"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>

#include "mmpc/error.h"
#include "mmpc/rng.h"

namespace mmpc::protocol {

using gf::FieldElem;
using gf::FieldMatrix;
using gf::PrimeField;

namespace {

constexpr std::uint64_t kTagDispatch = 0x61;
constexpr std::uint64_t kTagWireTerms = 0x62;
constexpr std::uint64_t kTagFiles = 0x63;

std::string where(const planner::Stage& s) {
  return "server " + std::to_string(s.server + 1) + " round " + std::to_string(s.round) +
         " stage " + std::to_string(s.stage + 1);
}

// Value of the copied side-information block of `q`: c * donor value, where
// c = +-1 must be the same for every copied term.
FieldElem donor_block(const DecoderState& dec, const planner::QueryPlan& plan,
                      const planner::QuerySpec& q, const PrimeField& f) {
  if (q.donor_stage < 0) return f.zero();
  const auto donor = static_cast<std::size_t>(q.donor_stage);
  if (!dec.processed.at(donor)) {
    throw Error(ErrorCode::kMissingDonor, "donor stage " + where(plan.stages[donor]) +
                                              " has not been decoded");
  }
  const planner::QuerySpec& dq = plan.query(donor, q.donor_subset);
  int ratio = 0;
  for (const planner::Term& dt : dq.terms) {
    auto it = std::find_if(q.terms.begin(), q.terms.end(), [&](const planner::Term& t) {
      return t.label == dt.label && t.index == dt.index;
    });
    if (it == q.terms.end()) {
      throw Error(ErrorCode::kMissingDonor, "copied block does not contain donor term");
    }
    const int c = it->sign * dt.sign;
    if (ratio != 0 && c != ratio) {
      throw Error(ErrorCode::kSingularSystem,
                  "side information block is not a signed copy of its donor");
    }
    ratio = c;
  }
  const auto& value = dec.values[donor][subset_rank(q.donor_subset, plan.message_count)];
  return f.mul(f.sign(ratio), *value);
}

FieldElem decoded_symbol(const DecoderState& dec, int label, std::uint32_t index) {
  const auto& slot = dec.symbols.at(label).at(index);
  if (!slot) {
    throw Error(ErrorCode::kMissingDonor, "symbol " + std::to_string(index + 1) + " of message " +
                                              std::to_string(label + 1) + " is not decoded yet");
  }
  return *slot;
}

}  // namespace

ServerState::ServerState(int id, PrimeField field, SymbolGrid grid)
    : id_(id), field_(field), grid_(std::move(grid)) {}

FieldElem server_answer(const ServerState& state, const coding::CodedQuery& q) {
  const PrimeField& f = state.field_;
  FieldElem acc = f.zero();
  for (const coding::CodedTerm& t : q.terms) {
    if (t.label < 0 || static_cast<std::size_t>(t.label) >= state.grid_.size() ||
        t.index >= state.grid_[t.label].size()) {
      throw Error(ErrorCode::kIndexOutOfRange, "term (" + std::to_string(t.label + 1) + ", " +
                                                   std::to_string(t.index + 1) +
                                                   ") outside the stored grid");
    }
    acc = f.add(acc, f.mul(t.coef, state.grid_[t.label][t.index]));
  }
  return acc;
}

std::size_t Transcript::download() const {
  std::size_t total = 0;
  for (const auto& s : servers) total += s.size();
  return total;
}

void write_transcript(const Transcript& t, std::ostream& out) {
  for (const auto& server : t.servers) {
    for (const TranscriptEntry& e : server) {
      nlohmann::json record = coding::wire_json(e.query);
      record["answer"] = e.answer.value;
      out << record.dump() << '\n';
    }
  }
}

Transcript read_transcript(std::istream& in) {
  Transcript t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
      TranscriptEntry e{coding::parse_wire_json(record),
                        FieldElem{record.at("answer").get<std::uint32_t>()}};
      if (e.query.server < 0) throw Error(ErrorCode::kConfig, "server must be >= 1");
      if (t.servers.size() <= static_cast<std::size_t>(e.query.server)) {
        t.servers.resize(e.query.server + 1);
      }
      t.servers[e.query.server].push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kConfig,
                  "transcript line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return t;
}

Session open_session(const model::MessageLibrary& lib, const model::DemandSet& demand,
                     int server_count, std::uint64_t seed, Options options) {
  Session s{.rlib = model::relabel(lib, demand),
            .demand = demand,
            .summary = {},
            .tape = {},
            .plan = {},
            .g = {},
            .columns = {},
            .redundancy = {},
            .coded = {}};
  const int m = lib.message_count();
  const int k = lib.file_count();
  const int p = demand.size();
  const PrimeField& f = lib.field();
  s.summary = planner::plan_summary(m, k, p, server_count);
  // Checked before planning so an undersized field fails fast.
  for (int i = 1; i <= s.summary.counts.rounds(); ++i) {
    s.g.push_back(coding::cauchy_mds(s.summary.coded_sizes[i - 1], binomial(m, i), f));
    s.columns.push_back(coding::column_order(s.rlib, i));
  }
  planner::QueryPlan unsigned_plan =
      planner::build_query_plan(s.rlib, s.summary.counts, server_count);
  const auto sizes = unsigned_plan.stage_sizes();
  s.tape = options.identity_tape ? model::RandomTape::identity(unsigned_plan.length, sizes)
                                 : model::RandomTape::draw(seed, unsigned_plan.length, sizes);
  s.tape.shuffle_enabled = options.shuffle;
  if (options.identity_tape) s.tape.shuffle_seed = seed;
  s.plan = planner::assign_signs(unsigned_plan, s.tape);
  for (const planner::Stage& stage : s.plan.stages) {
    s.redundancy.push_back(coding::stage_redundancy_basis(stage, s.rlib));
    s.coded.push_back(
        coding::encode_stage(stage, s.g[stage.round - 1], s.columns[stage.round - 1], f));
  }
  return s;
}

coding::CodedQuery to_wire(const Session& session, const coding::CodedQuery& coded) {
  const PrimeField& f = session.rlib.base.field();
  coding::CodedQuery wire = coded;
  for (coding::CodedTerm& t : wire.terms) {
    const std::uint32_t j = t.index;
    t.label = session.rlib.original_of[t.label];
    t.index = session.tape.permutation[j];
    t.coef = f.mul(t.coef, f.sign(session.tape.signs[j]));
  }
  return wire;
}

std::vector<std::vector<coding::CodedQuery>> wire_queries(const Session& session) {
  std::vector<std::vector<coding::CodedQuery>> per_server(session.plan.server_count);
  for (const auto& stage : session.coded) {
    for (const auto& q : stage) per_server[q.server].push_back(to_wire(session, q));
  }
  if (!session.tape.shuffle_enabled) return per_server;
  for (std::size_t n = 0; n < per_server.size(); ++n) {
    auto& queries = per_server[n];
    Rng::derive(session.tape.shuffle_seed, kTagDispatch, n)
        .shuffle(std::span<coding::CodedQuery>(queries));
    for (std::size_t i = 0; i < queries.size(); ++i) {
      Rng::derive(session.tape.shuffle_seed, kTagWireTerms, n, i)
          .shuffle(std::span<coding::CodedTerm>(queries[i].terms));
    }
  }
  return per_server;
}

Transcript collect_answers(const std::vector<std::vector<coding::CodedQuery>>& wire,
                           const std::vector<ServerState>& servers) {
  Transcript t;
  t.servers.resize(wire.size());
  for (std::size_t n = 0; n < wire.size(); ++n) {
    for (const auto& q : wire[n]) {
      t.servers[n].push_back(TranscriptEntry{q, server_answer(servers.at(n), q)});
    }
  }
  return t;
}

DecoderState DecoderState::for_plan(const planner::QueryPlan& plan) {
  DecoderState dec;
  for (const auto& stage : plan.stages) dec.values.emplace_back(stage.queries.size());
  dec.symbols.assign(plan.demand_count,
                     std::vector<std::optional<FieldElem>>(plan.length));
  dec.processed.assign(plan.stages.size(), false);
  return dec;
}

void decode_stage(DecoderState& dec, const planner::QueryPlan& plan, std::size_t stage_idx,
                  std::span<const FieldElem> answers, const coding::Redundancy& red,
                  const coding::MdsMatrix& g, std::span<const std::size_t> column_of,
                  const PrimeField& f) {
  const planner::Stage& stage = plan.stages.at(stage_idx);
  if (dec.processed[stage_idx]) {
    throw Error(ErrorCode::kAlreadyDecoded, where(stage) + " was already decoded");
  }
  if (answers.size() != g.r || red.q1.size() != g.r) {
    throw Error(ErrorCode::kLengthMismatch, where(stage) + ": expected " + std::to_string(g.r) +
                                                " answers and unknowns, got " +
                                                std::to_string(answers.size()) + " and " +
                                                std::to_string(red.q1.size()));
  }
  const auto& queries = stage.queries;
  std::vector<FieldElem> value(queries.size());
  auto is_demanded = [&](int label) { return label < plan.demand_count; };

  // Useless queries: decoded demanded symbols plus one donor block.
  for (std::size_t pos : red.q2) {
    const auto& q = queries[pos];
    FieldElem v = donor_block(dec, plan, q, f);
    for (const auto& t : q.terms) {
      if (is_demanded(t.label)) v = f.add(v, f.mul(f.sign(t.sign), decoded_symbol(dec, t.label, t.index)));
    }
    value[pos] = v;
  }

  // (G1 + G3 A) q1 = f - (G2 + G3 B) q2.
  const std::size_t r = g.r;
  auto gcol = [&](std::size_t row, std::size_t pos) { return g.entries(row, column_of[pos]); };
  FieldMatrix lhs(r, red.q1.size());
  FieldMatrix rhs(r, 1);
  for (std::size_t row = 0; row < r; ++row) {
    for (std::size_t j = 0; j < red.q1.size(); ++j) {
      FieldElem e = gcol(row, red.q1[j]);
      for (std::size_t t = 0; t < red.q3.size(); ++t) {
        e = f.add(e, f.mul(gcol(row, red.q3[t]), red.a(t, j)));
      }
      lhs(row, j) = e;
    }
    FieldElem known = answers[row];
    for (std::size_t j = 0; j < red.q2.size(); ++j) {
      FieldElem e = gcol(row, red.q2[j]);
      for (std::size_t t = 0; t < red.q3.size(); ++t) {
        e = f.add(e, f.mul(gcol(row, red.q3[t]), red.b(t, j)));
      }
      known = f.sub(known, f.mul(e, value[red.q2[j]]));
    }
    rhs(row, 0) = known;
  }
  auto solution = gf::solve_square(lhs, rhs, f);
  if (!solution) throw Error(ErrorCode::kSingularSystem, where(stage) + ": effective system is singular");
  for (std::size_t j = 0; j < red.q1.size(); ++j) value[red.q1[j]] = (*solution)(j, 0);
  for (std::size_t t = 0; t < red.q3.size(); ++t) {
    FieldElem v = f.zero();
    for (std::size_t j = 0; j < red.q1.size(); ++j) v = f.add(v, f.mul(red.a(t, j), value[red.q1[j]]));
    for (std::size_t j = 0; j < red.q2.size(); ++j) v = f.add(v, f.mul(red.b(t, j), value[red.q2[j]]));
    value[red.q3[t]] = v;
  }

  // Informative queries: peel the donor block to get one fresh symbol each.
  for (std::size_t pos = 0; pos < queries.size(); ++pos) {
    const auto& q = queries[pos];
    if (q.kind != planner::QueryClass::kInformative) continue;
    auto theta = std::find_if(q.terms.begin(), q.terms.end(),
                              [&](const planner::Term& t) { return is_demanded(t.label); });
    const FieldElem fresh =
        f.mul(f.sign(theta->sign), f.sub(value[pos], donor_block(dec, plan, q, f)));
    auto& slot = dec.symbols[theta->label][theta->index];
    if (slot && *slot != fresh) {
      throw Error(ErrorCode::kSingularSystem, where(stage) + ": inconsistent symbol value");
    }
    if (!slot) ++dec.decoded;
    slot = fresh;
  }
  for (std::size_t pos = 0; pos < queries.size(); ++pos) dec.values[stage_idx][pos] = value[pos];
  dec.processed[stage_idx] = true;
}

SymbolGrid decode_transcript(const Session& session, const Transcript& transcript) {
  const auto& plan = session.plan;
  const PrimeField& f = session.rlib.base.field();
  using Key = std::tuple<int, int, int, int>;
  std::map<Key, const TranscriptEntry*> by_key;
  for (const auto& server : transcript.servers) {
    for (const auto& e : server) {
      const auto& q = e.query;
      if (!by_key.emplace(Key{q.server, q.round, q.stage, q.row}, &e).second) {
        throw Error(ErrorCode::kTranscriptMismatch, "duplicate transcript record");
      }
    }
  }
  if (by_key.size() != session.summary.download) {
    throw Error(ErrorCode::kTranscriptMismatch,
                "transcript holds " + std::to_string(by_key.size()) + " answers, expected " +
                    std::to_string(session.summary.download));
  }

  DecoderState dec = DecoderState::for_plan(plan);
  for (std::size_t st = 0; st < plan.stages.size(); ++st) {
    const auto& stage = plan.stages[st];
    std::vector<FieldElem> answers;
    for (const auto& coded : session.coded[st]) {
      auto it = by_key.find(Key{coded.server, coded.round, coded.stage, coded.row});
      if (it == by_key.end()) {
        throw Error(ErrorCode::kTranscriptMismatch, where(stage) + ": missing answer");
      }
      coding::CodedQuery sent = it->second->query;
      coding::CodedQuery expected = to_wire(session, coded);
      auto order = [](const coding::CodedTerm& a, const coding::CodedTerm& b) {
        return std::tie(a.label, a.index) < std::tie(b.label, b.index);
      };
      std::sort(sent.terms.begin(), sent.terms.end(), order);
      std::sort(expected.terms.begin(), expected.terms.end(), order);
      if (sent != expected) {
        throw Error(ErrorCode::kTranscriptMismatch,
                    where(stage) + " row " + std::to_string(coded.row + 1) +
                        ": transcript query differs from the query sent");
      }
      answers.push_back(it->second->answer);
    }
    decode_stage(dec, plan, st, answers, session.redundancy[st], session.g[stage.round - 1],
                 session.columns[stage.round - 1], f);
  }

  SymbolGrid out(plan.demand_count, std::vector<FieldElem>(plan.length));
  for (int theta = 0; theta < plan.demand_count; ++theta) {
    for (std::uint32_t j = 0; j < plan.length; ++j) {
      out[theta][session.tape.permutation[j]] =
          f.mul(f.sign(session.tape.signs[j]), decoded_symbol(dec, theta, j));
    }
  }
  return out;
}

std::vector<ServerState> make_servers(const model::MessageLibrary& lib, const SymbolGrid& files,
                                      int server_count) {
  SymbolGrid grid = model::message_grid(lib, files);
  std::vector<ServerState> servers;
  for (int n = 0; n < server_count; ++n) servers.emplace_back(n, lib.field(), grid);
  return servers;
}

SymbolGrid run_files(const model::MessageLibrary& lib, std::size_t length, std::uint64_t seed) {
  return model::random_files(lib.field(), lib.file_count(), length,
                             Rng::derive(seed, kTagFiles).next());
}

RunResult run_protocol(const model::MessageLibrary& lib, const model::DemandSet& demand,
                       int server_count, std::uint64_t seed, Options options) {
  Session session = open_session(lib, demand, server_count, seed, options);
  const SymbolGrid files = run_files(lib, session.plan.length, seed);
  const auto servers = make_servers(lib, files, server_count);
  Transcript transcript = collect_answers(wire_queries(session), servers);
  SymbolGrid decoded = decode_transcript(session, transcript);
  SymbolGrid expected;
  for (int label : demand.indices) expected.push_back(servers[0].grid()[label]);
  return RunResult{.session = std::move(session),
                   .transcript = std::move(transcript),
                   .decoded = std::move(decoded),
                   .expected = std::move(expected)};
}

}  // namespace mmpc::protocol
