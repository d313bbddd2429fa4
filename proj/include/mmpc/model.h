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

// Message libraries, demands, the private relabeling, and the per-symbol
// randomness (permutation, multiplicative signs) every later step consumes.
//
// Labels are 0-based throughout the library. External formats (JSON config,
// dumps) are 1-based and converted at the boundary.

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mmpc/gf.h"

namespace mmpc::model {

// M messages over F_q^K. Rows 0..K-1 are the files themselves.
class MessageLibrary {
 public:
  // Throws kBadDimensions, kZeroRow, kDuplicateRow, kNotPrime, kEvenField.
  static MessageLibrary build(int message_count, int file_count, std::uint64_t q,
                              const std::vector<std::vector<std::int64_t>>& dependent_rows);
  // Same checks on a complete M x K coefficient matrix.
  static MessageLibrary from_coefficients(const gf::PrimeField& field, gf::FieldMatrix coeffs);

  int message_count() const { return static_cast<int>(coeffs_.rows()); }
  int file_count() const { return static_cast<int>(coeffs_.cols()); }
  const gf::PrimeField& field() const { return field_; }
  const gf::FieldMatrix& coeffs() const { return coeffs_; }
  std::span<const gf::FieldElem> coefficient_row(int label) const { return coeffs_.row(label); }
  bool is_independent(int label) const { return label < file_count(); }

  friend bool operator==(const MessageLibrary&, const MessageLibrary&) = default;

 private:
  MessageLibrary(gf::PrimeField field, gf::FieldMatrix coeffs)
      : field_(field), coeffs_(std::move(coeffs)) {}

  gf::PrimeField field_;
  gf::FieldMatrix coeffs_;
};

// Ordered demand labels (original labelling).
struct DemandSet {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
};

// Throws kBadParams for out-of-range / repeated labels or P outside [1, K-1],
// kDependentDemand if the demanded rows are linearly dependent.
void validate_demand(const MessageLibrary& lib, const DemandSet& demand);

// Library in the demand-adapted basis: labels 0..P-1 are the demands,
// P..K-1 complete the basis, K..M-1 are the remaining (dependent) messages.
struct RelabeledLibrary {
  MessageLibrary base;
  MessageLibrary original;
  int demand_count = 0;
  // original_of[new label] = original label; relabeled_of is its inverse.
  std::vector<int> original_of;
  std::vector<int> relabeled_of;
  // Row k = original coefficient row of new basis message k, so that
  // original_row(original_of[l]) == base_row(l) * basis_change.
  gf::FieldMatrix basis_change;

  // Rebuilds the original library from base, label map and basis change.
  MessageLibrary unrelabel() const;
  // Maps per-label symbol rows (new labelling) back to original labels.
  std::vector<std::vector<gf::FieldElem>> to_original_labels(
      const std::vector<std::vector<gf::FieldElem>>& by_new_label) const;
};

// Greedy basis completion over original files in ascending order.
RelabeledLibrary relabel(const MessageLibrary& lib, const DemandSet& demand);

// Protocol randomness. Every field is a deterministic function of the seed.
struct RandomTape {
  std::uint64_t seed = 0;
  // u_m(i) = signs[i] * W_m(permutation[i]).
  std::vector<std::uint32_t> permutation;
  std::vector<std::int8_t> signs;
  // switching[stage][query], indexed like QueryPlan::stages.
  std::vector<std::vector<std::int8_t>> switching;
  // Step-7 shuffles are drawn lazily from streams derived from this.
  std::uint64_t shuffle_seed = 0;
  bool shuffle_enabled = true;

  std::size_t length() const { return permutation.size(); }

  // stage_sizes[s] = number of queries in plan stage s.
  static RandomTape draw(std::uint64_t seed, std::size_t length,
                         std::span<const std::size_t> stage_sizes);
  // pi = id, sigma = +1, all switches +1, no shuffling.
  static RandomTape identity(std::size_t length, std::span<const std::size_t> stage_sizes);
};

// files: K x L (original files). Returns the M x L message grid W.
std::vector<std::vector<gf::FieldElem>> message_grid(
    const MessageLibrary& lib, const std::vector<std::vector<gf::FieldElem>>& files);

// Uniform random file contents.
std::vector<std::vector<gf::FieldElem>> random_files(const gf::PrimeField& f, int file_count,
                                                     std::size_t length, std::uint64_t seed);

// u_m(i) for every relabeled message m. Built once, then read-only.
class AlternatedSymbols {
 public:
  // Throws kLengthMismatch if the tape and files disagree on L.
  AlternatedSymbols(const RelabeledLibrary& rlib,
                    const std::vector<std::vector<gf::FieldElem>>& files, const RandomTape& tape);

  gf::FieldElem operator()(int label, std::size_t i) const { return table_[label][i]; }
  std::size_t length() const { return table_.empty() ? 0 : table_[0].size(); }

 private:
  std::vector<std::vector<gf::FieldElem>> table_;
};

}  // namespace mmpc::model
