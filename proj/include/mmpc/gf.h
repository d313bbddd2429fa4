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

// Exact arithmetic and linear algebra over a prime field F_q.
//
// Everything here is a pure function of its arguments. The modulus lives in a
// PrimeField value that is passed explicitly; FieldElem carries only the
// residue so that matrices stay compact.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mmpc::gf {

struct FieldElem {
  std::uint32_t value = 0;

  friend bool operator==(FieldElem, FieldElem) = default;
};

bool is_prime(std::uint64_t n);

class PrimeField {
 public:
  // Throws kNotPrime or kEvenField. Moduli must fit in 31 bits.
  explicit PrimeField(std::uint64_t q);

  std::uint32_t modulus() const { return q_; }

  FieldElem reduce(std::int64_t v) const;
  FieldElem zero() const { return FieldElem{0}; }
  FieldElem one() const { return FieldElem{1}; }
  // +1 or -1 as a field element.
  FieldElem sign(int s) const { return s >= 0 ? one() : FieldElem{q_ - 1}; }

  FieldElem add(FieldElem a, FieldElem b) const;
  FieldElem sub(FieldElem a, FieldElem b) const;
  FieldElem neg(FieldElem a) const;
  FieldElem mul(FieldElem a, FieldElem b) const;
  FieldElem pow(FieldElem a, std::uint64_t e) const;
  // Throws kZeroInverse for a == 0.
  FieldElem inv(FieldElem a) const;
  FieldElem div(FieldElem a, FieldElem b) const { return mul(a, inv(b)); }

  // Representative in (-q/2, q/2], handy for printing signs.
  std::int64_t centered(FieldElem a) const;

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  std::uint32_t q_;
};

class FieldMatrix {
 public:
  FieldMatrix() = default;
  FieldMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols) {}

  static FieldMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  FieldElem& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  FieldElem operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<FieldElem> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
  std::span<const FieldElem> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const FieldElem> values);
  bool is_zero_row(std::size_t r) const;

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<FieldElem> entries_;
};

FieldMatrix multiply(const FieldMatrix& a, const FieldMatrix& b, const PrimeField& f);
FieldMatrix transpose(const FieldMatrix& m);

// Rank via exact row reduction.
std::size_t rank(const FieldMatrix& m, const PrimeField& f);

// Returns C with C * basis_rows == targets. Throws kNotInSpan naming the first
// target row outside the row span, kDimensionMismatch on width mismatch.
FieldMatrix solve_in_row_span(const FieldMatrix& targets, const FieldMatrix& basis_rows,
                              const PrimeField& f);

// Returns X with a * X == b for square invertible a, nullopt if a is singular.
std::optional<FieldMatrix> solve_square(const FieldMatrix& a, const FieldMatrix& b,
                                        const PrimeField& f);

std::optional<FieldMatrix> inverse(const FieldMatrix& m, const PrimeField& f);

}  // namespace mmpc::gf
