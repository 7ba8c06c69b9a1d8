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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qedpec/code.hpp"
#include "qedpec/ghz.hpp"

namespace {

using qedpec::PauliString;

TEST(Iceberg, GeneratorsAndLogicals) {
    const auto code = qedpec::iceberg(6);
    ASSERT_EQ(code.generators().size(), 2u);
    EXPECT_EQ(code.generators()[0].str(), "ZZZZZZ");
    EXPECT_EQ(code.generators()[1].str(), "XXXXXX");
    EXPECT_EQ(code.k(), 4u);
    EXPECT_EQ(code.logical_z()[0].str(), "ZIZIII");
    EXPECT_EQ(code.logical_x()[0].str(), "IXXIII");
    EXPECT_EQ(code.logical_x()[3].str(), "IXIIIX");
    EXPECT_THROW(qedpec::iceberg(3), std::invalid_argument);
    EXPECT_THROW(qedpec::iceberg(7), std::invalid_argument);
}

TEST(Iceberg, DetectsEverySingleQubitError) {
    for (std::size_t n : {4u, 10u, 66u}) {
        const auto code = qedpec::iceberg(n);
        for (std::size_t q = 0; q < n; q++) {
            for (char c : std::string("XYZ")) {
                const auto p = PauliString::single(n, q, c);
                EXPECT_FALSE(qedpec::accepts(code, p));
                const auto bits = qedpec::syndrome(code, p);
                EXPECT_EQ(bits[0], c != 'Z');  // Z^n flags X and Y
                EXPECT_EQ(bits[1], c != 'X');  // X^n flags Z and Y
            }
        }
    }
}

TEST(Iceberg, UndetectedWeightTwoCountMatchesBruteForce) {
    const std::size_t n = 6;
    const auto code = qedpec::iceberg(n);
    std::size_t undetected = 0, oracle_count = 0;
    const std::string chars = "XYZ";
    for (std::size_t a = 0; a < n; a++)
        for (std::size_t b = a + 1; b < n; b++)
            for (char ca : chars)
                for (char cb : chars) {
                    std::string s(n, 'I');
                    s[a] = ca;
                    s[b] = cb;
                    undetected += qedpec::accepts(code, PauliString::from_string(s));
                    oracle_count += oracle::pauli_commute(s, std::string(n, 'Z')) &&
                                    oracle::pauli_commute(s, std::string(n, 'X'));
                }
    EXPECT_EQ(undetected, oracle_count);
    EXPECT_EQ(undetected, 3 * n * (n - 1) / 2);
}

TEST(Ghz, BlockLengths) {
    EXPECT_EQ(qedpec::block_lengths(7, 3), (std::vector<std::size_t>{3, 3, 1}));
    EXPECT_EQ(qedpec::block_lengths(6, 3), (std::vector<std::size_t>{3, 3}));
    EXPECT_EQ(qedpec::block_lengths(2, 5), (std::vector<std::size_t>{2}));
    EXPECT_THROW(qedpec::block_lengths(4, 0), std::invalid_argument);
}

TEST(Ghz, CircuitShape) {
    const auto b = qedpec::build_ghz_logical_circuit(10, 3);
    EXPECT_EQ(b.circuit.layers().size(), 2u * 7u);
    EXPECT_EQ(b.circuit.block_boundaries(), (std::vector<std::size_t>{6, 12, 14}));
    EXPECT_EQ(b.initial_generators.size(), 10u);
    EXPECT_EQ(b.final_generators.size(), 10u);
}

// The final state is a stabilizer state, so any operator commuting with all
// n independent final generators is in its stabilizer group up to sign.
TEST(Ghz, FinalStateIsLogicalGhz) {
    for (std::size_t n : {4u, 6u, 10u, 12u}) {
        for (std::size_t T : {1u, 2u, 5u}) {
            const auto b = qedpec::build_ghz_logical_circuit(n, T);
            const auto& code = b.code;
            std::vector<PauliString> expected = code.generators();
            PauliString all_x(n);
            for (const auto& x : code.logical_x()) all_x *= x;
            expected.push_back(all_x);
            for (std::size_t j = 0; j + 1 < code.k(); j++) {
                expected.push_back(code.logical_z()[j] * code.logical_z()[j + 1]);
            }
            for (const auto& e : expected) {
                for (const auto& g : b.final_generators) {
                    EXPECT_TRUE(e.commutes_with(g)) << "n=" << n << " T=" << T << " " << e.str();
                }
            }
            // Single logical X flips break GHZ.
            for (const auto& x : code.logical_x()) {
                bool commutes_all = true;
                for (const auto& g : b.final_generators) commutes_all &= x.commutes_with(g);
                EXPECT_FALSE(commutes_all);
            }
        }
    }
}

}  // namespace
