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

// Servers, the client session, and the stage-by-stage decoder.
//
// The client works over alternated symbols u_m(i) = sigma_i W_m(pi(i)) and
// relabeled messages. What leaves the client is the wire form: original
// labels, stored symbol positions pi(i), and sigma_i folded into each
// coefficient. Servers only ever evaluate wire queries on raw stored symbols.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mmpc/coding.h"
#include "mmpc/gf.h"
#include "mmpc/model.h"
#include "mmpc/planner.h"

namespace mmpc::protocol {

using SymbolGrid = std::vector<std::vector<gf::FieldElem>>;

class ServerState {
 public:
  // grid: the M x L stored message symbols.
  ServerState(int id, gf::PrimeField field, SymbolGrid grid);

  int id() const { return id_; }
  const SymbolGrid& grid() const { return grid_; }

 private:
  friend gf::FieldElem server_answer(const ServerState& state, const coding::CodedQuery& q);

  int id_;
  gf::PrimeField field_;
  SymbolGrid grid_;
};

// Sum of coef * W_label(index). Throws kIndexOutOfRange.
gf::FieldElem server_answer(const ServerState& state, const coding::CodedQuery& q);

struct TranscriptEntry {
  coding::CodedQuery query;
  gf::FieldElem answer;
};

struct Transcript {
  // Per server, in dispatch order.
  std::vector<std::vector<TranscriptEntry>> servers;

  std::size_t download() const;
};

// JSON-lines: the wire record plus an "answer" field.
void write_transcript(const Transcript& t, std::ostream& out);
// Throws kConfig on malformed input.
Transcript read_transcript(std::istream& in);

struct Options {
  bool shuffle = true;
  // pi = id, sigma = +1, switching signs +1: the hand-worked setting.
  bool identity_tape = false;
};

// Everything the client fixes before sending anything.
struct Session {
  model::RelabeledLibrary rlib;
  model::DemandSet demand;
  planner::PlanSummary summary;
  model::RandomTape tape;
  // Signed, unshuffled, lexicographic query order.
  planner::QueryPlan plan;
  // Indexed by round - 1.
  std::vector<coding::MdsMatrix> g;
  std::vector<std::vector<std::size_t>> columns;
  // Indexed like plan.stages.
  std::vector<coding::Redundancy> redundancy;
  std::vector<std::vector<coding::CodedQuery>> coded;
};

// Throws the model/planner/coding errors for inadmissible parameters.
Session open_session(const model::MessageLibrary& lib, const model::DemandSet& demand,
                     int server_count, std::uint64_t seed, Options options = {});

coding::CodedQuery to_wire(const Session& session, const coding::CodedQuery& coded);

// Per server: wire queries, dispatch order and term order shuffled unless the
// tape disables shuffling.
std::vector<std::vector<coding::CodedQuery>> wire_queries(const Session& session);

Transcript collect_answers(const std::vector<std::vector<coding::CodedQuery>>& wire,
                           const std::vector<ServerState>& servers);

struct DecoderState {
  // values[stage][position]: plan query values, known once a stage is decoded.
  std::vector<std::vector<std::optional<gf::FieldElem>>> values;
  // symbols[label][index] for demanded labels.
  std::vector<std::vector<std::optional<gf::FieldElem>>> symbols;
  std::vector<bool> processed;
  std::size_t decoded = 0;

  static DecoderState for_plan(const planner::QueryPlan& plan);
};

// Decodes one stage from its r coded answers (row order). Throws
// kAlreadyDecoded, kMissingDonor (a donor stage or symbol is not known yet),
// kSingularSystem, kLengthMismatch.
void decode_stage(DecoderState& dec, const planner::QueryPlan& plan, std::size_t stage,
                  std::span<const gf::FieldElem> answers, const coding::Redundancy& red,
                  const coding::MdsMatrix& g, std::span<const std::size_t> column_of,
                  const gf::PrimeField& f);

// Decodes every stage and returns the demanded messages, one row per demand
// in demand order. Throws kTranscriptMismatch if a transcript query differs
// from the one the session sent or an answer is missing.
SymbolGrid decode_transcript(const Session& session, const Transcript& transcript);

struct RunResult {
  Session session;
  Transcript transcript;
  SymbolGrid decoded;
  SymbolGrid expected;

  bool exact() const { return decoded == expected; }
};

// The K x L file contents run_protocol draws for `seed`.
SymbolGrid run_files(const model::MessageLibrary& lib, std::size_t length, std::uint64_t seed);

// Random files from the seed, full pipeline, ground truth alongside.
RunResult run_protocol(const model::MessageLibrary& lib, const model::DemandSet& demand,
                       int server_count, std::uint64_t seed, Options options = {});

// The replicated server set for `files` (K x L original files).
std::vector<ServerState> make_servers(const model::MessageLibrary& lib, const SymbolGrid& files,
                                      int server_count);

}  // namespace mmpc::protocol
