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

#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qedpec/ghz.hpp"
#include "qedpec/noise.hpp"
#include "qedpec/sampler.hpp"

namespace {

using qedpec::Gate;
using qedpec::GateLayer;
using qedpec::LayeredCircuit;
using qedpec::NoiseSpec;
using qedpec::PauliString;

TEST(Noise, LayerFaultCountsAndWeights) {
    const NoiseSpec spec{3e-3, 1.5e-2};
    const GateLayer layer{Gate::cnot(0, 1), Gate::h(3)};
    const auto faults = qedpec::faults_for_layer(layer, 5, spec, 7, 100);
    // 15 two-qubit Paulis on (0,1); 3 each on qubits 2, 3, 4.
    ASSERT_EQ(faults.size(), 15u + 9u);
    std::set<std::string> seen;
    std::size_t two = 0, one = 0;
    for (std::size_t k = 0; k < faults.size(); k++) {
        const auto& f = faults[k];
        EXPECT_EQ(f.id, 100 + k);
        EXPECT_EQ(f.layer, 7u);
        EXPECT_TRUE(seen.insert(f.pauli.str()).second);
        EXPECT_FALSE(f.pauli.is_identity());
        if (f.pauli.weight() <= 2 && (f.pauli.at(0) != 'I' || f.pauli.at(1) != 'I')) {
            EXPECT_DOUBLE_EQ(f.weight, spec.p2 / 15.0);
            EXPECT_EQ(f.pauli.at(2), 'I');
            two++;
        } else {
            EXPECT_EQ(f.pauli.weight(), 1u);
            EXPECT_DOUBLE_EQ(f.weight, spec.p1 / 3.0);
            one++;
        }
    }
    EXPECT_EQ(two, 15u);
    EXPECT_EQ(one, 9u);
}

TEST(Noise, ZeroRatesOmitLocations) {
    const GateLayer layer{Gate::cnot(0, 1)};
    EXPECT_EQ(qedpec::faults_for_layer(layer, 4, NoiseSpec{0.0, 1e-3}).size(), 15u);
    EXPECT_EQ(qedpec::faults_for_layer(layer, 4, NoiseSpec{1e-3, 0.0}).size(), 6u);
    EXPECT_THROW(qedpec::faults_for_layer(layer, 4, NoiseSpec{-1e-3, 0.0}), std::invalid_argument);
}

TEST(Noise, BlockWeightMatchesClosedForm) {
    const NoiseSpec spec{1e-4, 1e-3};
    for (std::size_t n : {6u, 30u, 100u}) {
        for (std::size_t T : {1u, 2u, 5u}) {
            const auto b = qedpec::build_ghz_logical_circuit(n, T);
            const auto lengths = qedpec::block_lengths(n - 3, T);
            for (std::size_t k = 0; k < lengths.size(); k++) {
                const auto f = qedpec::block_faults(b.circuit, k, spec);
                // Each logical CNOT is two layers of two CNOTs on four qubits.
                const double expected = 2.0 * lengths[k] * (2.0 * spec.p2 + (n - 4) * spec.p1);
                EXPECT_NEAR(f.total_weight, expected, 1e-12);
                EXPECT_EQ(f.size(), 2 * lengths[k] * (30 + 3 * (n - 4)));
            }
        }
    }
}

TEST(Noise, ValidityLimit) {
    const auto b = qedpec::build_ghz_logical_circuit(200, 5);
    const NoiseSpec spec{1e-3, 1e-2};
    EXPECT_THROW(qedpec::block_faults(b.circuit, 0, spec), qedpec::ValidityError);
    EXPECT_NO_THROW(qedpec::block_faults(b.circuit, 0, spec, false));
}

TEST(Noise, PerturbedWeightsStayInBandAndReplay) {
    const auto b = qedpec::build_ghz_logical_circuit(20, 2);
    const auto f = qedpec::block_faults(b.circuit, 1, NoiseSpec{1e-4, 1e-3});
    const auto same = qedpec::perturb_weights(f, 0.0, 5);
    for (std::size_t i = 0; i < f.size(); i++) EXPECT_EQ(same.faults[i].weight, f.faults[i].weight);
    const auto p1 = qedpec::perturb_weights(f, 0.3, 5);
    const auto p2 = qedpec::perturb_weights(f, 0.3, 5);
    const auto p3 = qedpec::perturb_weights(f, 0.3, 6);
    bool differs = false;
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); i++) {
        const double w = f.faults[i].weight;
        EXPECT_GE(p1.faults[i].weight, w * 0.7 - 1e-18);
        EXPECT_LE(p1.faults[i].weight, w * 1.3 + 1e-18);
        EXPECT_EQ(p1.faults[i].weight, p2.faults[i].weight);
        differs |= p1.faults[i].weight != p3.faults[i].weight;
        sum += p1.faults[i].weight;
    }
    EXPECT_TRUE(differs);
    EXPECT_NEAR(p1.total_weight, sum, 1e-15);
    EXPECT_THROW(qedpec::perturb_weights(f, -0.1, 1), std::invalid_argument);
}

// Sampling faults layer by layer and conjugating the frame must give the same
// end-of-block distribution as propagating each fault to the end first.
// The reference distribution is built with dense unitaries.
TEST(Noise, CommutingDiagramChiSquare) {
    const std::size_t n = 4;
    const std::vector<GateLayer> layers = {GateLayer{Gate::cnot(0, 1), Gate::h(2)}, GateLayer{Gate::cz(1, 2)},
                                           GateLayer{Gate::cnot(3, 0), Gate::s(1)}};
    const LayeredCircuit circuit(n, layers, {3});
    const NoiseSpec spec{0.03, 0.06};
    const auto faults = qedpec::block_faults(circuit, 0, spec, false);

    auto unitary = [&](const Gate& g) {
        switch (g.kind) {
            case qedpec::GateKind::H:
                return oracle::gate_h(n, g.qubits[0]);
            case qedpec::GateKind::S:
                return oracle::gate_s(n, g.qubits[0]);
            case qedpec::GateKind::CNOT:
                return oracle::gate_cnot(n, g.qubits[0], g.qubits[1]);
            case qedpec::GateKind::CZ:
                return oracle::gate_cz(n, g.qubits[0], g.qubits[1]);
        }
        return oracle::Mat::identity(16);
    };
    std::map<std::string, double> exact{{"IIII", 1.0}};
    for (const auto& f : faults.faults) {
        oracle::Mat u = oracle::Mat::identity(16);
        for (std::size_t l = f.layer; l < layers.size(); l++)
            for (const auto& g : layers[l].gates()) u = oracle::mul(unitary(g), u);
        const auto moved = oracle::mul(oracle::mul(u, oracle::pauli_matrix(f.pauli.str())), oracle::dagger(u));
        const std::string p = oracle::identify_pauli(moved, n);
        ASSERT_FALSE(p.empty());
        std::map<std::string, double> next;
        for (const auto& [k, v] : exact) {
            next[k] += (1.0 - f.weight) * v;
            next[oracle::pauli_times(k, p)] += f.weight * v;
        }
        exact = std::move(next);
    }

    const double shots = 200000;
    std::mt19937_64 rng(99);
    std::map<std::string, double> counts;
    for (int s = 0; s < shots; s++) {
        PauliString frame(n);
        qedpec::run_block(frame, faults, circuit, rng);
        counts[frame.str()] += 1.0;
    }
    std::vector<double> c, p;
    double other_c = 0.0, other_p = 0.0;
    for (const auto& [k, v] : exact) {
        if (v * shots >= 5.0) {
            c.push_back(counts[k]);
            p.push_back(v);
        } else {
            other_c += counts[k];
            other_p += v;
        }
    }
    for (const auto& [k, v] : counts)
        if (!exact.count(k)) ADD_FAILURE() << "impossible frame " << k;
    c.push_back(other_c);
    p.push_back(other_p);
    const double chi2 = oracle::chi_square(c, p, shots);
    EXPECT_LT(chi2, oracle::chi_square_critical(static_cast<double>(c.size() - 1))) << "bins " << c.size();
}

}  // namespace
