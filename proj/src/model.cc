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

#include "mmpc/model.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "mmpc/combinatorics.h"
#include "mmpc/error.h"
#include "mmpc/rng.h"

namespace mmpc::model {

using gf::FieldElem;
using gf::FieldMatrix;
using gf::PrimeField;

MessageLibrary MessageLibrary::build(int message_count, int file_count, std::uint64_t q,
                                     const std::vector<std::vector<std::int64_t>>& dependent_rows) {
  if (file_count < 1 || message_count < file_count || message_count > kMaxLabels) {
    throw Error(ErrorCode::kBadDimensions, "need 1 <= K <= M <= " + std::to_string(kMaxLabels) +
                                               ", got M=" + std::to_string(message_count) +
                                               " K=" + std::to_string(file_count));
  }
  if (static_cast<int>(dependent_rows.size()) != message_count - file_count) {
    throw Error(ErrorCode::kBadDimensions,
                "expected " + std::to_string(message_count - file_count) + " dependent rows, got " +
                    std::to_string(dependent_rows.size()));
  }
  PrimeField field(q);
  FieldMatrix coeffs = FieldMatrix::identity(file_count);
  std::vector<FieldElem> row(file_count);
  for (const auto& dep : dependent_rows) {
    if (static_cast<int>(dep.size()) != file_count) {
      throw Error(ErrorCode::kBadDimensions, "dependent row of length " + std::to_string(dep.size()) +
                                                 ", expected " + std::to_string(file_count));
    }
    std::transform(dep.begin(), dep.end(), row.begin(),
                   [&](std::int64_t v) { return field.reduce(v); });
    coeffs.append_row(row);
  }
  return from_coefficients(field, std::move(coeffs));
}

MessageLibrary MessageLibrary::from_coefficients(const PrimeField& field, FieldMatrix coeffs) {
  const std::size_t k = coeffs.cols();
  if (k == 0 || coeffs.rows() < k || coeffs.rows() > kMaxLabels) {
    throw Error(ErrorCode::kBadDimensions, "coefficient matrix must be M x K with 1 <= K <= M");
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (coeffs(i, j).value != (i == j ? 1U : 0U)) {
        throw Error(ErrorCode::kBadDimensions, "first K rows must be the identity");
      }
    }
  }
  std::set<std::vector<std::uint32_t>> seen;
  for (std::size_t m = 0; m < coeffs.rows(); ++m) {
    if (coeffs.is_zero_row(m)) {
      throw Error(ErrorCode::kZeroRow, "message " + std::to_string(m + 1) + " has a zero row");
    }
    std::vector<std::uint32_t> key;
    for (FieldElem e : coeffs.row(m)) key.push_back(e.value);
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::kDuplicateRow, "message " + std::to_string(m + 1) + " repeats a row");
    }
  }
  return MessageLibrary(field, std::move(coeffs));
}

void validate_demand(const MessageLibrary& lib, const DemandSet& demand) {
  const int p = demand.size();
  if (p < 1 || p >= lib.file_count()) {
    throw Error(ErrorCode::kBadParams, "demand size P=" + std::to_string(p) +
                                           " must satisfy 1 <= P < K=" +
                                           std::to_string(lib.file_count()));
  }
  std::set<int> distinct;
  for (int label : demand.indices) {
    if (label < 0 || label >= lib.message_count()) {
      throw Error(ErrorCode::kBadParams, "demand label " + std::to_string(label + 1) +
                                             " outside [1, M]");
    }
    if (!distinct.insert(label).second) {
      throw Error(ErrorCode::kBadParams, "demand label " + std::to_string(label + 1) + " repeated");
    }
  }
  FieldMatrix rows;
  for (int label : demand.indices) rows.append_row(lib.coefficient_row(label));
  if (gf::rank(rows, lib.field()) != static_cast<std::size_t>(p)) {
    throw Error(ErrorCode::kDependentDemand, "demanded messages are linearly dependent");
  }
}

RelabeledLibrary relabel(const MessageLibrary& lib, const DemandSet& demand) {
  validate_demand(lib, demand);
  const PrimeField& f = lib.field();
  const int m_count = lib.message_count();
  const int k = lib.file_count();

  std::vector<int> basis = demand.indices;
  FieldMatrix basis_rows;
  for (int label : basis) basis_rows.append_row(lib.coefficient_row(label));
  for (int file = 0; file < k && static_cast<int>(basis.size()) < k; ++file) {
    if (std::find(basis.begin(), basis.end(), file) != basis.end()) continue;
    FieldMatrix trial = basis_rows;
    trial.append_row(lib.coefficient_row(file));
    if (gf::rank(trial, f) == trial.rows()) {
      basis.push_back(file);
      basis_rows = std::move(trial);
    }
  }

  std::vector<int> original_of = basis;
  for (int label = 0; label < m_count; ++label) {
    if (std::find(basis.begin(), basis.end(), label) == basis.end()) original_of.push_back(label);
  }
  std::vector<int> relabeled_of(m_count);
  for (int l = 0; l < m_count; ++l) relabeled_of[original_of[l]] = l;

  // New coefficient rows: v'_l = v_{orig(l)} * B^{-1}.
  FieldMatrix basis_inverse = *gf::inverse(basis_rows, f);
  FieldMatrix permuted;
  for (int l = 0; l < m_count; ++l) permuted.append_row(lib.coefficient_row(original_of[l]));
  FieldMatrix new_coeffs = gf::multiply(permuted, basis_inverse, f);

  return RelabeledLibrary{
      .base = MessageLibrary::from_coefficients(f, std::move(new_coeffs)),
      .original = lib,
      .demand_count = demand.size(),
      .original_of = std::move(original_of),
      .relabeled_of = std::move(relabeled_of),
      .basis_change = std::move(basis_rows),
  };
}

MessageLibrary RelabeledLibrary::unrelabel() const {
  const PrimeField& f = base.field();
  FieldMatrix in_original_basis = gf::multiply(base.coeffs(), basis_change, f);
  FieldMatrix out(in_original_basis.rows(), in_original_basis.cols());
  for (std::size_t l = 0; l < in_original_basis.rows(); ++l) {
    auto src = in_original_basis.row(l);
    std::copy(src.begin(), src.end(), out.row(original_of[l]).begin());
  }
  return MessageLibrary::from_coefficients(f, std::move(out));
}

std::vector<std::vector<FieldElem>> RelabeledLibrary::to_original_labels(
    const std::vector<std::vector<FieldElem>>& by_new_label) const {
  std::vector<std::vector<FieldElem>> out(original_of.size());
  for (std::size_t l = 0; l < by_new_label.size(); ++l) out[original_of[l]] = by_new_label[l];
  return out;
}

RandomTape RandomTape::draw(std::uint64_t seed, std::size_t length,
                            std::span<const std::size_t> stage_sizes) {
  RandomTape tape;
  tape.seed = seed;
  Rng rng = Rng::derive(seed, /*tag=*/1);
  tape.permutation.resize(length);
  std::iota(tape.permutation.begin(), tape.permutation.end(), 0U);
  rng.shuffle(std::span<std::uint32_t>(tape.permutation));
  tape.signs.resize(length);
  for (auto& s : tape.signs) s = static_cast<std::int8_t>(rng.sign());
  Rng switches = Rng::derive(seed, /*tag=*/2);
  tape.switching.reserve(stage_sizes.size());
  for (std::size_t n : stage_sizes) {
    std::vector<std::int8_t> row(n);
    for (auto& s : row) s = static_cast<std::int8_t>(switches.sign());
    tape.switching.push_back(std::move(row));
  }
  tape.shuffle_seed = Rng::derive(seed, /*tag=*/3).next();
  return tape;
}

RandomTape RandomTape::identity(std::size_t length, std::span<const std::size_t> stage_sizes) {
  RandomTape tape;
  tape.permutation.resize(length);
  std::iota(tape.permutation.begin(), tape.permutation.end(), 0U);
  tape.signs.assign(length, 1);
  for (std::size_t n : stage_sizes) tape.switching.emplace_back(n, 1);
  tape.shuffle_enabled = false;
  return tape;
}

std::vector<std::vector<FieldElem>> message_grid(const MessageLibrary& lib,
                                                 const std::vector<std::vector<FieldElem>>& files) {
  const PrimeField& f = lib.field();
  if (static_cast<int>(files.size()) != lib.file_count()) {
    throw Error(ErrorCode::kLengthMismatch, "expected one row per file");
  }
  const std::size_t length = files.empty() ? 0 : files[0].size();
  std::vector<std::vector<FieldElem>> grid(lib.message_count(), std::vector<FieldElem>(length));
  for (int m = 0; m < lib.message_count(); ++m) {
    auto coeff = lib.coefficient_row(m);
    for (int k = 0; k < lib.file_count(); ++k) {
      if (coeff[k].value == 0) continue;
      if (files[k].size() != length) throw Error(ErrorCode::kLengthMismatch, "ragged file grid");
      for (std::size_t j = 0; j < length; ++j) {
        grid[m][j] = f.add(grid[m][j], f.mul(coeff[k], files[k][j]));
      }
    }
  }
  return grid;
}

std::vector<std::vector<FieldElem>> random_files(const PrimeField& f, int file_count,
                                                 std::size_t length, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, /*tag=*/7);
  std::vector<std::vector<FieldElem>> files(file_count, std::vector<FieldElem>(length));
  for (auto& file : files) {
    for (auto& symbol : file) symbol = FieldElem{static_cast<std::uint32_t>(rng.uniform(f.modulus()))};
  }
  return files;
}

AlternatedSymbols::AlternatedSymbols(const RelabeledLibrary& rlib,
                                     const std::vector<std::vector<FieldElem>>& files,
                                     const RandomTape& tape) {
  const PrimeField& f = rlib.base.field();
  const std::size_t length = tape.length();
  for (const auto& file : files) {
    if (file.size() != length) {
      throw Error(ErrorCode::kLengthMismatch, "file length " + std::to_string(file.size()) +
                                                 " != tape length " + std::to_string(length));
    }
  }
  auto grid = message_grid(rlib.original, files);
  table_.assign(grid.size(), std::vector<FieldElem>(length));
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const auto& stored = grid[rlib.original_of[l]];
    for (std::size_t i = 0; i < length; ++i) {
      table_[l][i] = f.mul(f.sign(tape.signs[i]), stored[tape.permutation[i]]);
    }
  }
}

}  // namespace mmpc::model
