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

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "mmpc/model.h"
#include "support.h"

namespace mmpc::model {
namespace {

using gf::FieldElem;
using mmpc::testing::golden_library;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kConfig;
}

TEST(Library, GoldenRows) {
  const MessageLibrary lib = golden_library(101);
  EXPECT_EQ(lib.message_count(), 5);
  EXPECT_EQ(lib.file_count(), 3);
  const std::vector<std::vector<std::uint32_t>> want = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}};
  for (int m = 0; m < 5; ++m)
    for (int k = 0; k < 3; ++k) EXPECT_EQ(lib.coeffs()(m, k).value, want[m][k]);
  EXPECT_TRUE(lib.is_independent(2));
  EXPECT_FALSE(lib.is_independent(3));
}

TEST(Library, PureRetrievalInstance) {
  const MessageLibrary lib = MessageLibrary::build(3, 3, 7, {});
  EXPECT_EQ(lib.coeffs(), gf::FieldMatrix::identity(3));
}

TEST(Library, RejectsExactlyTheListedInputs) {
  EXPECT_EQ(code_of([] { MessageLibrary::build(5, 3, 7, {{0, 0, 0}, {1, 1, 0}}); }),
            ErrorCode::kZeroRow);
  EXPECT_EQ(code_of([] { MessageLibrary::build(5, 3, 7, {{1, 1, 0}, {1, 1, 0}}); }),
            ErrorCode::kDuplicateRow);
  // A dependent row equal to a file is a duplicate too.
  EXPECT_EQ(code_of([] { MessageLibrary::build(4, 3, 7, {{0, 1, 0}}); }),
            ErrorCode::kDuplicateRow);
  EXPECT_EQ(code_of([] { MessageLibrary::build(5, 3, 7, {{1, 1, 0}}); }),
            ErrorCode::kBadDimensions);
  EXPECT_EQ(code_of([] { MessageLibrary::build(4, 3, 7, {{1, 1}}); }), ErrorCode::kBadDimensions);
  EXPECT_EQ(code_of([] { MessageLibrary::build(2, 3, 7, {}); }), ErrorCode::kBadDimensions);
  EXPECT_EQ(code_of([] { MessageLibrary::build(4, 3, 9, {{1, 1, 0}}); }), ErrorCode::kNotPrime);
  EXPECT_EQ(code_of([] { MessageLibrary::build(4, 3, 2, {{1, 1, 0}}); }), ErrorCode::kEvenField);
  // Entries are reduced mod q: 8 = 1 over F_7, so this duplicates the first row.
  EXPECT_EQ(code_of([] { MessageLibrary::build(5, 3, 7, {{1, 1, 0}, {8, 1, 0}}); }),
            ErrorCode::kDuplicateRow);
  EXPECT_NO_THROW(MessageLibrary::build(5, 3, 7, {{1, 1, 0}, {-1, 1, 0}}));
}

TEST(Demand, Validation) {
  const MessageLibrary lib = golden_library(101);
  EXPECT_NO_THROW(validate_demand(lib, {{0, 1}}));
  EXPECT_NO_THROW(validate_demand(lib, {{3, 4}}));
  EXPECT_EQ(code_of([&] { validate_demand(lib, {{0, 0}}); }), ErrorCode::kBadParams);
  EXPECT_EQ(code_of([&] { validate_demand(lib, {{0, 5}}); }), ErrorCode::kBadParams);
  EXPECT_EQ(code_of([&] { validate_demand(lib, {{0, 1, 2}}); }), ErrorCode::kBadParams);
  EXPECT_EQ(code_of([&] { validate_demand(lib, {{}}); }), ErrorCode::kBadParams);
  // d = a + b with a and b.
  EXPECT_EQ(code_of([&] { validate_demand(lib, {{0, 1, 3}}); }), ErrorCode::kBadParams);
  const MessageLibrary four = MessageLibrary::build(4, 3, 101, {{1, 1, 0}});
  EXPECT_EQ(code_of([&] { validate_demand(four, {{0, 1, 3}}); }), ErrorCode::kBadParams);
  const MessageLibrary wide = MessageLibrary::build(6, 4, 101, {{1, 1, 0, 0}, {0, 0, 1, 1}});
  EXPECT_EQ(code_of([&] { relabel(wide, {{0, 1, 4}}); }), ErrorCode::kDependentDemand);
}

TEST(Relabel, IdentityForFileDemand) {
  const RelabeledLibrary r = relabel(golden_library(101), {{0, 1}});
  EXPECT_EQ(r.original_of, (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(r.base, golden_library(101));
  EXPECT_EQ(r.basis_change, gf::FieldMatrix::identity(3));
}

// Oracle: the new basis is (d, e, first file completing the rank) and the
// remaining messages keep ascending order.
TEST(Relabel, DependentDemand) {
  const MessageLibrary lib = golden_library(101);
  const RelabeledLibrary r = relabel(lib, {{3, 4}});
  EXPECT_EQ(r.original_of, (std::vector<int>{3, 4, 0, 1, 2}));
  for (int l = 0; l < 5; ++l) EXPECT_EQ(r.relabeled_of[r.original_of[l]], l);
  // rows 0..K-1 of the base are the identity
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k)
      EXPECT_EQ(r.base.coeffs()(l, k).value, l == k ? 1u : 0u);
  // base row times basis change gives the original row
  const gf::PrimeField& f = lib.field();
  for (int l = 0; l < 5; ++l) {
    for (int k = 0; k < 3; ++k) {
      FieldElem acc = f.zero();
      for (int j = 0; j < 3; ++j) acc = f.add(acc, f.mul(r.base.coeffs()(l, j), r.basis_change(j, k)));
      EXPECT_EQ(acc, lib.coeffs()(r.original_of[l], k));
    }
  }
  EXPECT_EQ(r.unrelabel(), lib);
}

TEST(Relabel, RoundTripOnRandomLibraries) {
  Rng rng(41);
  for (int t = 0; t < 60; ++t) {
    const int m = 3 + static_cast<int>(rng.uniform(5));
    const int k = 2 + static_cast<int>(rng.uniform(m - 1));
    const int p = 1 + static_cast<int>(rng.uniform(k - 1));
    const MessageLibrary lib = mmpc::testing::random_library(m, k, 101, rng);
    const DemandSet d = mmpc::testing::random_demand(lib, p, rng);
    const RelabeledLibrary r = relabel(lib, d);
    EXPECT_EQ(r.unrelabel(), lib);
    for (int j = 0; j < p; ++j) EXPECT_EQ(r.original_of[j], d.indices[j]);
    EXPECT_TRUE(std::is_sorted(r.original_of.begin() + k, r.original_of.end()));
    EXPECT_EQ(gf::rank(r.base.coeffs(), lib.field()), static_cast<std::size_t>(k));

    std::vector<std::vector<FieldElem>> by_new(m, std::vector<FieldElem>(3));
    for (int l = 0; l < m; ++l)
      for (auto& x : by_new[l]) x = FieldElem{std::uint32_t(rng.uniform(101))};
    const auto by_old = r.to_original_labels(by_new);
    for (int l = 0; l < m; ++l) EXPECT_EQ(by_old[r.original_of[l]], by_new[l]);
  }
}

TEST(Tape, DeterministicAndWellFormed) {
  const std::vector<std::size_t> sizes = {3, 10, 10};
  const RandomTape a = RandomTape::draw(9, 40, sizes);
  const RandomTape b = RandomTape::draw(9, 40, sizes);
  EXPECT_EQ(a.permutation, b.permutation);
  EXPECT_EQ(a.signs, b.signs);
  EXPECT_EQ(a.switching, b.switching);
  EXPECT_EQ(a.shuffle_seed, b.shuffle_seed);
  std::vector<std::uint32_t> sorted = a.permutation;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 40; ++i) EXPECT_EQ(sorted[i], i);
  for (auto s : a.signs) EXPECT_TRUE(s == 1 || s == -1);
  ASSERT_EQ(a.switching.size(), 3u);
  EXPECT_EQ(a.switching[1].size(), 10u);
  EXPECT_NE(RandomTape::draw(10, 40, sizes).permutation, a.permutation);
}

TEST(AlternatedSymbols, IdentityTapeIsPlainGrid) {
  const MessageLibrary lib = golden_library(101);
  const RelabeledLibrary r = relabel(lib, {{0, 1}});
  const auto files = random_files(lib.field(), 3, 12, 4);
  const auto grid = message_grid(lib, files);
  const AlternatedSymbols u(r, files, RandomTape::identity(12, {}));
  for (int m = 0; m < 5; ++m)
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(u(m, i), grid[m][i]);
}

TEST(AlternatedSymbols, SingleSignNegatesOneColumn) {
  const MessageLibrary lib = golden_library(101);
  const RelabeledLibrary r = relabel(lib, {{0, 1}});
  const auto files = random_files(lib.field(), 3, 6, 4);
  RandomTape tape = RandomTape::identity(6, {});
  tape.signs[2] = -1;
  const AlternatedSymbols u(r, files, tape);
  const auto grid = message_grid(lib, files);
  for (int m = 0; m < 5; ++m)
    for (std::size_t i = 0; i < 6; ++i)
      EXPECT_EQ(u(m, i), i == 2 ? lib.field().neg(grid[m][i]) : grid[m][i]);
}

TEST(AlternatedSymbols, DependencyPreservedUnderRandomTapes) {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    const MessageLibrary lib = mmpc::testing::random_library(6, 3, 1009, rng);
    const DemandSet d = mmpc::testing::random_demand(lib, 2, rng);
    const RelabeledLibrary r = relabel(lib, d);
    const auto files = random_files(lib.field(), 3, 30, t);
    const AlternatedSymbols u(r, files, RandomTape::draw(t, 30, {}));
    const gf::PrimeField& f = lib.field();
    for (int m = 0; m < 6; ++m) {
      for (std::size_t i = 0; i < 30; ++i) {
        FieldElem acc = f.zero();
        for (int k = 0; k < 3; ++k) acc = f.add(acc, f.mul(r.base.coeffs()(m, k), u(k, i)));
        EXPECT_EQ(u(m, i), acc);
      }
    }
  }
}

TEST(AlternatedSymbols, LengthMismatch) {
  const MessageLibrary lib = golden_library(101);
  const RelabeledLibrary r = relabel(lib, {{0, 1}});
  const auto files = random_files(lib.field(), 3, 6, 4);
  EXPECT_EQ(code_of([&] { AlternatedSymbols(r, files, RandomTape::identity(7, {})); }),
            ErrorCode::kLengthMismatch);
}

}  // namespace
}  // namespace mmpc::model
