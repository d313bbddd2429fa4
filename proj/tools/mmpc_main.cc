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

// Command-line front end: plan, simulate, audit and sweep.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmpc/analytics.h"
#include "mmpc/audit.h"
#include "mmpc/error.h"
#include "mmpc/protocol.h"

namespace {

using mmpc::Error;
using mmpc::ErrorCode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Command-line values; unset fields fall back to the config file.
struct Flags {
  std::string config_path;
  std::optional<int> m, k, p, n;
  std::optional<std::uint64_t> q, seed;
  std::optional<std::string> demand;
  std::optional<std::string> rows;
};

struct Config {
  int m = 0, k = 0, p = 0, n = 0;
  std::uint64_t q = 2147483647;
  std::optional<std::uint64_t> seed;
  std::vector<int> demand;  // 0-based
  std::vector<std::vector<std::int64_t>> dependent_rows;
};

// "3", "c" and "C" all name message 3.
int parse_label(const json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.size() == 1 && std::isalpha(static_cast<unsigned char>(s[0]))) {
      return std::tolower(static_cast<unsigned char>(s[0])) - 'a' + 1;
    }
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return std::stoi(s);
  }
  throw ConfigError("demand entries must be 1-based integers or letters, got " + v.dump());
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

template <typename T>
std::optional<T> field(const json& doc, const char* key) {
  if (!doc.contains(key)) return std::nullopt;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

Config resolve(const Flags& flags, bool need_library) {
  json doc = json::object();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw ConfigError("cannot open config file '" + flags.config_path + "'");
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + flags.config_path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  }
  Config c;
  auto pick = [&](std::optional<int> flag, const char* key) {
    if (flag) return *flag;
    if (auto v = field<int>(doc, key)) return *v;
    return 0;
  };
  c.m = pick(flags.m, "M");
  c.k = pick(flags.k, "K");
  c.n = pick(flags.n, "N");
  const int p = pick(flags.p, "P");
  if (flags.q) {
    c.q = *flags.q;
  } else if (auto v = field<std::uint64_t>(doc, "q")) {
    c.q = *v;
  }
  if (flags.seed) {
    c.seed = flags.seed;
  } else if (auto v = field<std::uint64_t>(doc, "seed")) {
    c.seed = v;
  } else if (const char* env = std::getenv("MMPC_SEED")) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("MMPC_SEED='") + env + "' is not an unsigned integer");
    }
  }
  if (c.m < 1 || c.k < 1 || c.n < 1) {
    throw ConfigError("M, K and N are required (config fields or --M/--K/--N)");
  }

  json demand = json::array();
  if (flags.demand) {
    for (const auto& item : split(*flags.demand, ',')) demand.push_back(item);
  } else if (doc.contains("demand")) {
    demand = doc.at("demand");
    if (!demand.is_array()) throw ConfigError("config field 'demand' must be a list");
  }
  for (const auto& v : demand) {
    const int label = parse_label(v);
    if (label < 1 || label > c.m) {
      throw ConfigError("demand label " + v.dump() + " outside 1.." + std::to_string(c.m));
    }
    c.demand.push_back(label - 1);
  }
  if (c.demand.empty()) {
    for (int l = 0; l < p; ++l) c.demand.push_back(l);
  }
  if (p != 0 && p != static_cast<int>(c.demand.size())) {
    throw ConfigError("P=" + std::to_string(p) + " but the demand lists " +
                      std::to_string(c.demand.size()) + " messages");
  }
  c.p = static_cast<int>(c.demand.size());
  if (c.p < 1) throw ConfigError("P is required (config field, --P or a demand list)");

  if (flags.rows) {
    for (const auto& row : split(*flags.rows, ';')) {
      std::vector<std::int64_t> r;
      for (const auto& x : split(row, ',')) {
        try {
          r.push_back(std::stoll(x));
        } catch (const std::exception&) {
          throw ConfigError("--dependent-rows entry '" + x + "' is not an integer");
        }
      }
      c.dependent_rows.push_back(r);
    }
  } else if (doc.contains("dependent_rows")) {
    c.dependent_rows = field<std::vector<std::vector<std::int64_t>>>(doc, "dependent_rows").value();
  }
  if (need_library && static_cast<int>(c.dependent_rows.size()) != c.m - c.k) {
    throw ConfigError("dependent_rows must list M-K=" + std::to_string(c.m - c.k) +
                      " rows of length K, got " + std::to_string(c.dependent_rows.size()));
  }
  return c;
}

std::uint64_t require_seed(const Config& c) {
  if (!c.seed) throw ConfigError("no seed: pass --seed, set \"seed\" in the config, or export MMPC_SEED");
  return *c.seed;
}

mmpc::model::MessageLibrary library(const Config& c) {
  return mmpc::model::MessageLibrary::build(c.m, c.k, c.q, c.dependent_rows);
}

std::string tuple(const std::vector<std::uint64_t>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out + ")";
}

std::string rational(const mmpc::planner::Rational& r) {
  std::ostringstream out;
  out << r;
  return out.str();
}

std::string labels(const std::vector<int>& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) out += (i ? "," : "") + std::to_string(d[i] + 1);
  return out;
}

void print_header(const Config& c) {
  std::cout << "M=" << c.m << " K=" << c.k << " P=" << c.p << " N=" << c.n << " q=" << c.q
            << " demand=" << labels(c.demand) << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

int cmd_plan(const Flags& flags, const std::string& dump) {
  const Config c = resolve(flags, !dump.empty());
  print_header(c);
  const auto s = mmpc::planner::plan_summary(c.m, c.k, c.p, c.n);
  std::cout << "alpha=" << tuple(s.counts.alpha) << " scale=" << s.counts.scale << "\n";
  std::cout << "coded_stage_sizes=" << tuple(s.coded_sizes) << "\n";
  std::cout << "L=" << s.length << " D=" << s.download << " R2=" << rational(s.rate) << "\n";
  std::cout << "R2~" << mmpc::analytics::decimal(s.rate) << "\n";
  if (!dump.empty()) {
    const auto session =
        mmpc::protocol::open_session(library(c), {c.demand}, c.n, require_seed(c));
    std::ofstream out = open_out(dump);
    mmpc::planner::write_plan_dump(session.plan, out);
    std::cout << "dump=" << dump << " queries=" << session.plan.stages.size() << " stages\n";
  }
  return kExitOk;
}

int cmd_simulate(const Flags& flags, const std::string& transcript_path,
                 const std::string& replay_path, bool no_shuffle) {
  const Config c = resolve(flags, true);
  const std::uint64_t seed = require_seed(c);
  std::cout << "seed=" << seed << "\n";
  print_header(c);
  const auto lib = library(c);
  mmpc::protocol::Options options;
  options.shuffle = !no_shuffle;

  mmpc::protocol::RunResult run = mmpc::protocol::run_protocol(lib, {c.demand}, c.n, seed, options);
  if (!transcript_path.empty()) {
    std::ofstream out = open_out(transcript_path);
    mmpc::protocol::write_transcript(run.transcript, out);
  }
  const auto& summary = run.session.summary;
  std::size_t download = run.transcript.download();
  bool exact = run.exact();
  if (!replay_path.empty()) {
    std::ifstream in(replay_path);
    if (!in) throw ConfigError("cannot open transcript '" + replay_path + "'");
    const auto replay = mmpc::protocol::read_transcript(in);
    download = replay.download();
    try {
      exact = mmpc::protocol::decode_transcript(run.session, replay) == run.expected;
    } catch (const Error& e) {
      std::cout << "replay rejected: " << e.what() << "\n";
      exact = false;
    }
    std::cout << "replay=" << replay_path << "\n";
  }
  const mmpc::planner::Rational measured(c.p * static_cast<long long>(summary.length),
                                         static_cast<long long>(download));
  std::cout << "L=" << summary.length << " download=" << download << " D=" << summary.download
            << "\n";
  std::cout << "rate=" << rational(measured) << " (" << mmpc::analytics::decimal(measured)
            << ") R2=" << rational(summary.rate) << "\n";
  const bool ok = exact && download == summary.download;
  std::cout << "decoded=" << (exact ? "exact" : "MISMATCH") << "\n";
  return ok ? kExitOk : kExitVerify;
}

json mapping_report(const mmpc::protocol::Session& a, const mmpc::protocol::Session& b) {
  mmpc::audit::CheckReport r{.check = "sign_mapping",
                             .scope = "demand " + labels(a.demand.indices) + " vs " +
                                      labels(b.demand.indices),
                             .pass = true,
                             .detail = {}};
  try {
    const auto m = mmpc::audit::find_sign_mapping(a.plan, a.rlib, b.plan, b.rlib);
    for (const auto& st : m.stages) {
      if (st.components != 1) {
        r.pass = false;
        r.detail.push_back("server " + std::to_string(st.server + 1) + " round " +
                           std::to_string(st.round) + " stage " + std::to_string(st.stage + 1) +
                           ": " + std::to_string(st.components) + " independent sign choices");
      }
    }
    if (r.pass) {
      r.detail.push_back("mapping found in all " + std::to_string(m.stages.size()) +
                         " stages; exactly two solutions each, negatives of each other");
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoMapping) throw;
    r.pass = false;
    r.detail.push_back(e.what());
  }
  return r.to_json();
}

int cmd_audit(const Flags& flags, const std::string& pair, std::optional<std::size_t> samples,
              const std::string& mutation) {
  const Config c = resolve(flags, true);
  const std::uint64_t seed = require_seed(c);
  const auto lib = library(c);
  const auto session = mmpc::protocol::open_session(lib, {c.demand}, c.n, seed);
  mmpc::planner::QueryPlan plan = session.plan;
  if (!mutation.empty()) {
    mmpc::audit::Mutation m;
    try {
      m = mmpc::audit::parse_mutation(mutation);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    plan = mmpc::audit::mutate(plan, m);
  }
  std::vector<json> reports = {
      mmpc::audit::check_subset_coverage(plan).to_json(),
      mmpc::audit::check_index_structure(plan).to_json(),
      mmpc::audit::check_stage_index_disjointness(plan).to_json(),
      mmpc::audit::check_redundancy_rank(plan, session.rlib).to_json()};

  std::optional<mmpc::model::DemandSet> other;
  if (!pair.empty()) {
    mmpc::model::DemandSet d;
    for (const auto& item : split(pair, ',')) {
      const int label = parse_label(json(item));
      if (label < 1 || label > c.m) throw ConfigError("--pair label '" + item + "' out of range");
      d.indices.push_back(label - 1);
    }
    if (d.size() != c.p) throw ConfigError("--pair must list exactly P=" + std::to_string(c.p) + " messages");
    other = d;
    const auto second = mmpc::protocol::open_session(lib, d, c.n, seed + 1);
    reports.push_back(mapping_report(session, second));
  }
  if (samples) {
    if (!other) throw ConfigError("--samples needs --pair to name the second demand");
    reports.push_back(
        mmpc::audit::transcript_shape_test(lib, {{c.demand}, *other}, c.n, *samples, seed).to_json());
  }
  bool pass = true;
  for (const auto& r : reports) {
    std::cout << r.dump() << "\n";
    pass = pass && r.at("pass").get<bool>();
  }
  return pass ? kExitOk : kExitVerify;
}

int cmd_sweep(const std::string& m, const std::string& k, const std::string& p,
              const std::string& n, const std::string& out_path) {
  namespace an = mmpc::analytics;
  const auto points =
      an::sweep(an::parse_axis(m), an::parse_axis(k), an::parse_axis(p), an::parse_axis(n));
  if (out_path.empty()) {
    an::write_csv(points, std::cout);
  } else {
    std::ofstream out = open_out(out_path);
    an::write_csv(points, out);
  }
  return kExitOk;
}

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kBadParams:
    case ErrorCode::kBadDimensions:
    case ErrorCode::kZeroRow:
    case ErrorCode::kDuplicateRow:
    case ErrorCode::kDependentDemand:
    case ErrorCode::kNotPrime:
    case ErrorCode::kEvenField:
    case ErrorCode::kFieldTooSmall:
    case ErrorCode::kInsufficientSamples:
      return true;
    default:
      return false;
  }
}

void add_instance_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--M", f.m, "number of messages");
  cmd->add_option("--K", f.k, "number of independent files");
  cmd->add_option("--P", f.p, "number of demanded messages");
  cmd->add_option("--N", f.n, "number of servers");
  cmd->add_option("--q", f.q, "field modulus (odd prime below 2^31)");
  cmd->add_option("--seed", f.seed, "seed (falls back to the config, then MMPC_SEED)");
  cmd->add_option("--demand", f.demand, "demanded messages, e.g. 1,2 or d,e");
  cmd->add_option("--dependent-rows", f.rows, "dependent rows, e.g. '1,1,0;0,1,1'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-message private computation: planning, simulation, audits and rate sweeps"};
  app.require_subcommand(1);
  Flags flags;

  std::string dump;
  auto* plan = app.add_subcommand("plan", "stage counts, subpacketization, download and rate");
  add_instance_flags(plan, flags);
  plan->add_option("--dump", dump, "write the signed query plan as JSON lines");

  std::string transcript, replay;
  bool no_shuffle = false;
  auto* simulate = app.add_subcommand("simulate", "run the protocol end to end and verify");
  add_instance_flags(simulate, flags);
  simulate->add_option("--transcript", transcript, "write the transcript as JSON lines");
  simulate->add_option("--replay", replay, "decode this transcript instead of the live one");
  simulate->add_flag("--no-shuffle", no_shuffle, "disable query and term shuffling");

  std::string pair, mutation;
  std::optional<std::size_t> samples;
  auto* audit = app.add_subcommand("audit", "structural, sign-mapping and distribution audits");
  add_instance_flags(audit, flags);
  audit->add_option("--pair", pair, "second demand for the sign mapping, e.g. d,e");
  audit->add_option("--samples", samples, "samples per demand for the shape test (>= 1000)");
  audit->add_option("--mutate", mutation, "drop-query, swap-index or dup-donor");

  std::string sm, sk, sp, sn, out;
  auto* sweep = app.add_subcommand("sweep", "closed-form rates over a parameter grid as CSV");
  sweep->add_option("--M", sm, "a or a:b")->required();
  sweep->add_option("--K", sk, "a or a:b")->required();
  sweep->add_option("--P", sp, "a or a:b")->required();
  sweep->add_option("--N", sn, "a or a:b")->required();
  sweep->add_option("--out", out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*plan) return cmd_plan(flags, dump);
    if (*simulate) return cmd_simulate(flags, transcript, replay, no_shuffle);
    if (*audit) return cmd_audit(flags, pair, samples, mutation);
    return cmd_sweep(sm, sk, sp, sn, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << (is_config_error(e.code()) ? "config error: " : "error: ") << e.what() << "\n";
    return is_config_error(e.code()) ? kExitConfig : kExitVerify;
  }
}
