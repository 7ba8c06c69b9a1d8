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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qedpec/code.hpp"
#include "qedpec/syndrome.hpp"

namespace {

using qedpec::MeasurementFault;
using qedpec::NoiseSpec;
using qedpec::PauliString;
using qedpec::SyndromeModel;

PauliString random_frame(std::mt19937_64& rng, std::size_t n) {
    PauliString p(n);
    for (std::size_t q = 0; q < n; q++) p.set(q, rng() & 1, rng() & 1);
    return p;
}

TEST(Syndrome, ModelValidation) {
    EXPECT_THROW(SyndromeModel::readout_flip(-0.1), std::invalid_argument);
    EXPECT_THROW(SyndromeModel::readout_flip(1.0), std::invalid_argument);
    EXPECT_THROW(SyndromeModel::cat_extraction(0, NoiseSpec{}), std::invalid_argument);
    EXPECT_EQ(SyndromeModel::ideal().name(), "ideal");
    EXPECT_EQ(SyndromeModel::readout_flip(1e-3).name(), "readout");
    EXPECT_EQ(SyndromeModel::cat_extraction(2, NoiseSpec{}).name(), "cat");
}

TEST(Syndrome, IdealAndReadoutFaultLists) {
    const auto code = qedpec::iceberg(6);
    EXPECT_TRUE(qedpec::measurement_faults(code, SyndromeModel::ideal()).empty());
    const auto r = qedpec::measurement_faults(code, SyndromeModel::readout_flip(2e-3));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].flips, 1u);
    EXPECT_EQ(r[1].flips, 2u);
    for (const auto& f : r) {
        EXPECT_EQ(f.weight, 2e-3);
        EXPECT_TRUE(f.residual.is_identity());
    }
}

TEST(Syndrome, ReadoutFlipFrequencies) {
    const auto code = qedpec::iceberg(4);
    const auto model = SyndromeModel::readout_flip(0.1);
    std::mt19937_64 rng(4);
    std::vector<double> counts(4, 0.0);
    const double shots = 200000;
    const PauliString frame = PauliString::from_string("XIII");  // syndrome 01
    for (int s = 0; s < shots; s++) {
        const auto out = qedpec::measure_syndrome(frame, code, model, rng);
        EXPECT_EQ(out.frame, frame);
        counts[out.reported] += 1.0;
    }
    // reported = 01 xor (independent flips of each bit with p = 0.1)
    const std::vector<double> probs = {0.9 * 0.1, 0.9 * 0.9, 0.1 * 0.1, 0.1 * 0.9};
    EXPECT_LT(oracle::chi_square(counts, probs, shots), oracle::chi_square_critical(3));
}

TEST(CatExtraction, NoiselessRoundReportsTrueSyndrome) {
    std::mt19937_64 rng(6);
    for (std::size_t n : {4u, 6u, 10u}) {
        const auto code = qedpec::iceberg(n);
        for (std::size_t m : {std::size_t{1}, std::size_t{2}, std::size_t{3}, n}) {
            const auto s = qedpec::build_extraction_schedule(code, m);
            EXPECT_EQ(s.width(), n + m);
            for (int rep = 0; rep < 50; rep++) {
                const auto frame = random_frame(rng, n);
                PauliString joint(s.width());
                for (std::size_t q = 0; q < n; q++) joint.set(q, frame.x(q), frame.z(q));
                const auto reported = qedpec::propagate_extraction(joint, s, [](std::size_t, PauliString&) {});
                EXPECT_EQ(reported, code.syndrome_mask(frame));
                EXPECT_EQ(joint.slice(0, n), frame);
                const auto out = qedpec::cat_extraction_round(frame, code, m, NoiseSpec{0.0, 0.0}, rng);
                EXPECT_EQ(out.reported, code.syndrome_mask(frame));
                EXPECT_EQ(out.residual, frame);
            }
        }
    }
}

TEST(CatExtraction, ScheduleShape) {
    const auto code = qedpec::iceberg(6);
    const auto s = qedpec::build_extraction_schedule(code, 4);
    // Each check has 6 support qubits: batches of 4 and 2 couplings.
    ASSERT_EQ(s.batches.size(), 4u);
    EXPECT_EQ(s.batches[0].couplings.size(), 4u);
    EXPECT_EQ(s.batches[1].couplings.size(), 2u);
    EXPECT_FALSE(s.batches[0].ends_check);
    EXPECT_TRUE(s.batches[1].ends_check);
    for (const auto& g : s.batches[0].couplings) EXPECT_EQ(g.kind, qedpec::GateKind::CZ);
    for (const auto& g : s.batches[2].couplings) {
        EXPECT_EQ(g.kind, qedpec::GateKind::CNOT);
        EXPECT_GE(g.qubits[0], 6u);  // ancilla controls
    }
}

TEST(CatExtraction, AncillaFaultExamples) {
    const std::size_t n = 4;
    const auto code = qedpec::iceberg(n);
    const auto s = qedpec::build_extraction_schedule(code, 2);
    ASSERT_EQ(s.batches.size(), 4u);
    auto run = [&](std::size_t batch, const std::string& joint_fault) {
        PauliString joint(s.width());
        const auto f = PauliString::from_string(joint_fault);
        const auto flips =
            qedpec::propagate_extraction(joint, s, [&](std::size_t b, PauliString& fr) { if (b == batch) fr *= f; });
        return std::make_pair(flips, joint.slice(0, n).str());
    };
    // Z on an ancilla of the Z-check flips that check only.
    EXPECT_EQ(run(1, "IIIIZI"), std::make_pair(qedpec::SyndromeMask{1}, std::string("IIII")));
    // Z on an ancilla of the X-check flips the X-check only.
    EXPECT_EQ(run(3, "IIIIIZ"), std::make_pair(qedpec::SyndromeMask{2}, std::string("IIII")));
    // X on an ancilla before the X-check's first batch spreads X onto the two
    // data qubits that ancilla couples to (hook), with no flipped bit.
    const auto hook = run(2, "IIIIXI");
    EXPECT_EQ(hook.first, 0u);
    EXPECT_EQ(PauliString::from_string(hook.second).weight(), 2u);
    EXPECT_EQ(hook.second.find_first_of("YZ"), std::string::npos);
    // A data error after the last batch of its check is not seen by it.
    const auto late = run(2, "XIIIII");
    EXPECT_EQ(late.first, 0u);
    EXPECT_EQ(late.second, "XIII");
    // A data X error before the Z-check is reported by it.
    EXPECT_EQ(run(0, "XIIIII"), std::make_pair(qedpec::SyndromeMask{1}, std::string("XIII")));
}

TEST(CatExtraction, ExtractionIsLinearInTheFrame) {
    std::mt19937_64 rng(7);
    const auto code = qedpec::iceberg(6);
    const auto s = qedpec::build_extraction_schedule(code, 3);
    const auto locs = qedpec::extraction_locations(s, NoiseSpec{1e-3, 1e-2});
    const auto faults = qedpec::measurement_faults(code, SyndromeModel::cat_extraction(3, NoiseSpec{1e-3, 1e-2}));
    ASSERT_EQ(faults.size(), locs.size());
    for (int rep = 0; rep < 300; rep++) {
        const std::size_t a = rng() % locs.size();
        const std::size_t b = rng() % locs.size();
        const auto frame = random_frame(rng, 6);
        PauliString joint(s.width());
        for (std::size_t q = 0; q < 6; q++) joint.set(q, frame.x(q), frame.z(q));
        const auto flips = qedpec::propagate_extraction(joint, s, [&](std::size_t batch, PauliString& fr) {
            if (locs[a].batch == batch) fr *= locs[a].pauli;
            if (locs[b].batch == batch) fr *= locs[b].pauli;
        });
        const auto expected_flips = a == b ? code.syndrome_mask(frame)
                                           : code.syndrome_mask(frame) ^ faults[a].flips ^ faults[b].flips;
        const auto expected_res = a == b ? frame : frame * faults[a].residual * faults[b].residual;
        EXPECT_EQ(flips, expected_flips);
        EXPECT_EQ(joint.slice(0, 6), expected_res);
    }
}

// Exact transition matrix against enumeration of all fault subsets.
TEST(RoundTransition, MatchesSubsetEnumeration) {
    std::mt19937_64 rng(8);
    const auto code = qedpec::iceberg(4);
    std::vector<MeasurementFault> faults;
    for (int k = 0; k < 10; k++) {
        faults.push_back({0.01 + 0.03 * (rng() % 5), static_cast<qedpec::SyndromeMask>(rng() % 4), random_frame(rng, 4)});
    }
    const auto t = qedpec::round_transition(code, faults);
    std::vector<std::vector<double>> brute(4, std::vector<double>(4, 0.0));
    for (std::uint32_t sub = 0; sub < (1u << faults.size()); sub++) {
        double p = 1.0;
        qedpec::SyndromeMask flips = 0, res = 0;
        for (std::size_t i = 0; i < faults.size(); i++) {
            if ((sub >> i) & 1) {
                p *= faults[i].weight;
                flips ^= faults[i].flips;
                res ^= code.syndrome_mask(faults[i].residual);
            } else {
                p *= 1.0 - faults[i].weight;
            }
        }
        for (std::size_t s_in = 0; s_in < 4; s_in++) {
            if ((s_in ^ flips) == 0) brute[s_in][s_in ^ res] += p;
        }
    }
    for (std::size_t i = 0; i < 4; i++)
        for (std::size_t j = 0; j < 4; j++) EXPECT_NEAR(t.prob[i][j], brute[i][j], 1e-14);
}

TEST(RoundTransition, CatRoundAcceptanceMatchesMonteCarlo) {
    const auto code = qedpec::iceberg(6);
    const NoiseSpec spec{5e-3, 3e-2};
    const auto t = qedpec::round_transition(code, qedpec::measurement_faults(code, SyndromeModel::cat_extraction(2, spec)));
    double p_accept = 0.0;
    for (double v : t.prob[0]) p_accept += v;
    std::mt19937_64 rng(10);
    const double shots = 100000;
    double accepted = 0.0;
    for (int s = 0; s < shots; s++) {
        accepted += qedpec::cat_extraction_round(PauliString(6), code, 2, spec, rng).reported == 0;
    }
    const double se = std::sqrt(p_accept * (1.0 - p_accept) / shots);
    EXPECT_NEAR(accepted / shots, p_accept, 4.0 * se);
}

}  // namespace
