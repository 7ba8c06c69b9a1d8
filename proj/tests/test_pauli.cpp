// Copyright 2026 The qedpec Authors
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

#include <random>
#include <unordered_set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qedpec/pauli.hpp"

namespace {

using qedpec::PauliString;

std::string random_pauli_text(std::mt19937_64& rng, std::size_t n) {
    static const char kAlphabet[] = "IXYZ";
    std::string s(n, 'I');
    for (auto& c : s) c = kAlphabet[rng() % 4];
    return s;
}

TEST(Pauli, TextRoundTripAcrossWordBoundaries) {
    std::mt19937_64 rng(11);
    for (std::size_t n : {1u, 2u, 63u, 64u, 65u, 127u, 128u, 130u, 200u}) {
        for (int rep = 0; rep < 20; rep++) {
            const std::string s = random_pauli_text(rng, n);
            EXPECT_EQ(PauliString::from_string(s).str(), s);
        }
    }
}

TEST(Pauli, RejectsBadCharacters) {
    EXPECT_THROW(PauliString::from_string("XQZ"), std::invalid_argument);
    EXPECT_EQ(PauliString::from_string("X_Z").str(), "XIZ");
}

TEST(Pauli, SingleQubitTableMatchesMatrices) {
    const std::string chars = "IXYZ";
    for (char a : chars) {
        for (char b : chars) {
            const auto prod = PauliString::from_string(std::string(1, a)) * PauliString::from_string(std::string(1, b));
            const auto m = oracle::mul(oracle::pauli1(a), oracle::pauli1(b));
            EXPECT_TRUE(oracle::proportional(m, oracle::pauli1(prod.at(0)))) << a << b;
        }
    }
}

TEST(Pauli, ProductAndCommutationMatchDenseMatrices) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; rep++) {
        const std::string a = random_pauli_text(rng, 3);
        const std::string b = random_pauli_text(rng, 3);
        const auto pa = PauliString::from_string(a);
        const auto pb = PauliString::from_string(b);
        const auto ma = oracle::pauli_matrix(a);
        const auto mb = oracle::pauli_matrix(b);
        const auto ab = oracle::mul(ma, mb);
        EXPECT_TRUE(oracle::proportional(ab, oracle::pauli_matrix((pa * pb).str()))) << a << " " << b;
        const auto ba = oracle::mul(mb, ma);
        bool same = true;
        for (std::size_t i = 0; i < ab.a.size(); i++) same &= std::abs(ab.a[i] - ba.a[i]) < 1e-12;
        EXPECT_EQ(qedpec::commutes(pa, pb), same) << a << " " << b;
    }
}

TEST(Pauli, LargeRegisterAgreesWithTextOracle) {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 100; rep++) {
        const std::size_t n = 1 + rng() % 250;
        const std::string a = random_pauli_text(rng, n);
        const std::string b = random_pauli_text(rng, n);
        const auto pa = PauliString::from_string(a);
        const auto pb = PauliString::from_string(b);
        EXPECT_EQ((pa * pb).str(), oracle::pauli_times(a, b));
        EXPECT_EQ(pa.commutes_with(pb), oracle::pauli_commute(a, b));
        std::size_t w = 0;
        for (char c : a) w += c != 'I';
        EXPECT_EQ(pa.weight(), w);
    }
}

TEST(Pauli, GroupLaws) {
    std::mt19937_64 rng(3);
    const auto id = PauliString(70);
    for (int rep = 0; rep < 50; rep++) {
        const auto a = PauliString::from_string(random_pauli_text(rng, 70));
        const auto b = PauliString::from_string(random_pauli_text(rng, 70));
        EXPECT_EQ(a * a, id);
        EXPECT_EQ(a * b, b * a);
        EXPECT_EQ(a * id, a);
        EXPECT_TRUE((a * a).is_identity());
    }
}

TEST(Pauli, SizeMismatchThrows) {
    EXPECT_THROW(PauliString(3) * PauliString(4), std::invalid_argument);
    EXPECT_THROW((void)PauliString(3).commutes_with(PauliString(4)), std::invalid_argument);
}

TEST(Pauli, HashAndOrderingAreConsistent) {
    std::mt19937_64 rng(9);
    std::unordered_set<PauliString, qedpec::PauliHash> set;
    std::vector<std::string> texts;
    for (int rep = 0; rep < 300; rep++) {
        texts.push_back(random_pauli_text(rng, 5));
        set.insert(PauliString::from_string(texts.back()));
    }
    std::sort(texts.begin(), texts.end());
    texts.erase(std::unique(texts.begin(), texts.end()), texts.end());
    EXPECT_EQ(set.size(), texts.size());
    const auto a = PauliString::from_string("XIZ");
    const auto b = PauliString::from_string("XIZ");
    EXPECT_FALSE(a < b);
    EXPECT_FALSE(b < a);
}

TEST(Pauli, SliceAndSingle) {
    const auto p = PauliString::from_string("IXYZXY");
    EXPECT_EQ(p.slice(1, 3).str(), "XYZ");
    EXPECT_EQ(PauliString::single(4, 2, 'Y').str(), "IIYI");
}

}  // namespace
