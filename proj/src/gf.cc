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

#include "mmpc/gf.h"

#include <algorithm>
#include <string>
#include <utility>

#include "mmpc/error.h"

namespace mmpc::gf {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

PrimeField::PrimeField(std::uint64_t q) {
  if (q >= (1ULL << 31) || !is_prime(q)) {
    throw Error(ErrorCode::kNotPrime, "modulus " + std::to_string(q) + " is not a supported prime");
  }
  if (q == 2) {
    throw Error(ErrorCode::kEvenField, "characteristic 2 cannot distinguish +1 from -1");
  }
  q_ = static_cast<std::uint32_t>(q);
}

FieldElem PrimeField::reduce(std::int64_t v) const {
  std::int64_t r = v % static_cast<std::int64_t>(q_);
  if (r < 0) r += q_;
  return FieldElem{static_cast<std::uint32_t>(r)};
}

FieldElem PrimeField::add(FieldElem a, FieldElem b) const {
  std::uint32_t s = a.value + b.value;
  if (s >= q_) s -= q_;
  return FieldElem{s};
}

FieldElem PrimeField::sub(FieldElem a, FieldElem b) const {
  return a.value >= b.value ? FieldElem{a.value - b.value} : FieldElem{a.value + q_ - b.value};
}

FieldElem PrimeField::neg(FieldElem a) const {
  return a.value == 0 ? a : FieldElem{q_ - a.value};
}

FieldElem PrimeField::mul(FieldElem a, FieldElem b) const {
  return FieldElem{static_cast<std::uint32_t>(static_cast<std::uint64_t>(a.value) * b.value % q_)};
}

FieldElem PrimeField::pow(FieldElem a, std::uint64_t e) const {
  FieldElem result = one();
  while (e > 0) {
    if (e & 1) result = mul(result, a);
    a = mul(a, a);
    e >>= 1;
  }
  return result;
}

FieldElem PrimeField::inv(FieldElem a) const {
  if (a.value == 0) throw Error(ErrorCode::kZeroInverse, "inverse of zero");
  return pow(a, q_ - 2);
}

std::int64_t PrimeField::centered(FieldElem a) const {
  return a.value > q_ / 2 ? static_cast<std::int64_t>(a.value) - q_ : a.value;
}

FieldMatrix FieldMatrix::identity(std::size_t n) {
  FieldMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = FieldElem{1};
  return m;
}

void FieldMatrix::append_row(std::span<const FieldElem> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "row width " + std::to_string(values.size()) +
                                                   " != " + std::to_string(cols_));
  }
  entries_.insert(entries_.end(), values.begin(), values.end());
  ++rows_;
}

bool FieldMatrix::is_zero_row(std::size_t r) const {
  auto values = row(r);
  return std::all_of(values.begin(), values.end(), [](FieldElem e) { return e.value == 0; });
}

FieldMatrix multiply(const FieldMatrix& a, const FieldMatrix& b, const PrimeField& f) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "multiply " + std::to_string(a.cols()) +
                                                   " vs " + std::to_string(b.rows()));
  }
  FieldMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      FieldElem aik = a(i, k);
      if (aik.value == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) = f.add(out(i, j), f.mul(aik, b(k, j)));
      }
    }
  }
  return out;
}

FieldMatrix transpose(const FieldMatrix& m) {
  FieldMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

namespace {

// In-place reduced row echelon form restricted to the first `pivot_cols`
// columns. Returns the pivot column of each pivot row, in row order.
std::vector<std::size_t> reduce(FieldMatrix& m, std::size_t pivot_cols, const PrimeField& f) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_cols && r < m.rows(); ++c) {
    std::size_t p = r;
    while (p < m.rows() && m(p, c).value == 0) ++p;
    if (p == m.rows()) continue;
    if (p != r) {
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    }
    FieldElem scale = f.inv(m(r, c));
    for (std::size_t j = c; j < m.cols(); ++j) m(r, j) = f.mul(m(r, j), scale);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c).value == 0) continue;
      FieldElem factor = m(i, c);
      for (std::size_t j = c; j < m.cols(); ++j) {
        m(i, j) = f.sub(m(i, j), f.mul(factor, m(r, j)));
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t rank(const FieldMatrix& m, const PrimeField& f) {
  FieldMatrix work = m;
  return reduce(work, work.cols(), f).size();
}

FieldMatrix solve_in_row_span(const FieldMatrix& targets, const FieldMatrix& basis_rows,
                              const PrimeField& f) {
  if (targets.rows() > 0 && basis_rows.rows() > 0 && targets.cols() != basis_rows.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "targets and basis differ in width");
  }
  const std::size_t width = std::max(targets.cols(), basis_rows.cols());
  const std::size_t nb = basis_rows.rows();
  const std::size_t nt = targets.rows();
  // Columns of the augmented system are basis rows, then target rows.
  FieldMatrix aug(width, nb + nt);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < width; ++j) aug(j, i) = basis_rows(i, j);
  }
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t j = 0; j < width; ++j) aug(j, nb + t) = targets(t, j);
  }
  std::vector<std::size_t> pivots = reduce(aug, nb, f);

  FieldMatrix coeffs(nt, nb);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t r = pivots.size(); r < width; ++r) {
      if (aug(r, nb + t).value != 0) {
        throw Error(ErrorCode::kNotInSpan, "target row " + std::to_string(t));
      }
    }
    for (std::size_t r = 0; r < pivots.size(); ++r) coeffs(t, pivots[r]) = aug(r, nb + t);
  }
  return coeffs;
}

std::optional<FieldMatrix> solve_square(const FieldMatrix& a, const FieldMatrix& b,
                                        const PrimeField& f) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_square needs square a and matching b");
  }
  FieldMatrix aug(n, n + b.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) aug(i, n + j) = b(i, j);
  }
  if (reduce(aug, n, f).size() != n) return std::nullopt;
  FieldMatrix x(n, b.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) = aug(i, n + j);
  }
  return x;
}

std::optional<FieldMatrix> inverse(const FieldMatrix& m, const PrimeField& f) {
  return solve_square(m, FieldMatrix::identity(m.rows()), f);
}

}  // namespace mmpc::gf
