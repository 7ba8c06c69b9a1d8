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

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qedpec/clifford.hpp"

namespace qedpec {

/// Raised when a block leaves the perturbative validity regime (W >= 0.5).
class ValidityError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Circuit-level depolarizing rates. p1 and p2 are total channel error rates,
/// split evenly over the 3 (resp. 15) non-identity Paulis.
struct NoiseSpec {
    double p1 = 0.0;
    double p2 = 0.0;

    void validate() const {
        if (!(p1 >= 0.0 && p1 < 1.0) || !(p2 >= 0.0 && p2 < 1.0)) {
            throw std::invalid_argument("noise rates must lie in [0, 1)");
        }
    }
    double w1() const { return p1 / 3.0; }
    double w2() const { return p2 / 15.0; }
};

/// One independent Bernoulli Pauli fault, applied just before `layer`'s gates.
struct FaultLocation {
    std::size_t id = 0;
    std::size_t layer = 0;
    PauliString pauli;
    double weight = 0.0;
};

struct BlockFaults {
    std::size_t block = 0;
    std::size_t first_layer = 0;
    std::size_t end_layer = 0;
    std::vector<FaultLocation> faults;
    double total_weight = 0.0;

    std::size_t size() const { return faults.size(); }

    std::vector<double> weights() const {
        std::vector<double> w;
        w.reserve(faults.size());
        for (const auto& f : faults) {
            w.push_back(f.weight);
        }
        return w;
    }
};

inline constexpr double kValidityLimit = 0.5;

namespace detail {

inline void append_single_qubit_faults(std::vector<FaultLocation>& out, std::size_t width, std::size_t layer,
                                       std::size_t q, double w) {
    for (char kind : {'X', 'Y', 'Z'}) {
        out.push_back({0, layer, PauliString::single(width, q, kind), w});
    }
}

inline void append_two_qubit_faults(std::vector<FaultLocation>& out, std::size_t width, std::size_t layer,
                                    std::size_t a, std::size_t b, double w) {
    static constexpr char kinds[4] = {'I', 'X', 'Y', 'Z'};
    for (int i = 0; i < 4; i++) {
        for (int j = 0; j < 4; j++) {
            if (i == 0 && j == 0) {
                continue;
            }
            PauliString p(width);
            p.set_char(a, kinds[i]);
            p.set_char(b, kinds[j]);
            out.push_back({0, layer, std::move(p), w});
        }
    }
}

}  // namespace detail

/// Fault locations of one layer: 15 two-qubit faults per two-qubit gate pair and
/// 3 single-qubit faults on every other qubit (idle or single-qubit gate).
/// Zero-weight locations are omitted. Ids are assigned sequentially from first_id.
inline std::vector<FaultLocation> faults_for_layer(const GateLayer& layer, std::size_t width, const NoiseSpec& spec,
                                                   std::size_t layer_index = 0, std::size_t first_id = 0) {
    spec.validate();
    std::vector<FaultLocation> out;
    std::vector<bool> in_pair(width, false);
    for (const Gate& g : layer.gates()) {
        if (g.arity() == 2) {
            if (g.qubits[0] >= width || g.qubits[1] >= width) {
                throw std::invalid_argument("gate outside register");
            }
            in_pair[g.qubits[0]] = in_pair[g.qubits[1]] = true;
            if (spec.w2() > 0.0) {
                detail::append_two_qubit_faults(out, width, layer_index, g.qubits[0], g.qubits[1], spec.w2());
            }
        }
    }
    if (spec.w1() > 0.0) {
        for (std::size_t q = 0; q < width; q++) {
            if (!in_pair[q]) {
                detail::append_single_qubit_faults(out, width, layer_index, q, spec.w1());
            }
        }
    }
    for (std::size_t k = 0; k < out.size(); k++) {
        out[k].id = first_id + k;
    }
    return out;
}

/// All fault locations of block b. Throws ValidityError when W >= 0.5 and
/// `enforce_validity` is set.
inline BlockFaults block_faults(const LayeredCircuit& circuit, std::size_t block, const NoiseSpec& spec,
                                bool enforce_validity = true) {
    const auto [first, last] = circuit.block_range(block);
    BlockFaults out;
    out.block = block;
    out.first_layer = first;
    out.end_layer = last;
    for (std::size_t l = first; l < last; l++) {
        auto layer_faults = faults_for_layer(circuit.layers()[l], circuit.width(), spec, l, out.faults.size());
        for (auto& f : layer_faults) {
            out.total_weight += f.weight;
            out.faults.push_back(std::move(f));
        }
    }
    if (enforce_validity && out.total_weight >= kValidityLimit) {
        throw ValidityError("block " + std::to_string(block) + " has total fault weight W = " +
                            std::to_string(out.total_weight) + " >= 0.5, outside the validity regime");
    }
    return out;
}

/// Characterization drift: each weight becomes w (1 + r), r ~ Uniform[-r_max, r_max].
inline BlockFaults perturb_weights(const BlockFaults& faults, double r_max, std::uint64_t seed) {
    if (!(r_max >= 0.0)) {
        throw std::invalid_argument("r_max must be nonnegative");
    }
    BlockFaults out = faults;
    if (r_max == 0.0) {
        return out;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(faults.block), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> r(-r_max, r_max);
    out.total_weight = 0.0;
    for (auto& f : out.faults) {
        f.weight *= 1.0 + r(rng);
        if (!(f.weight >= 0.0 && f.weight < 1.0)) {
            throw std::invalid_argument("perturbed weight outside [0, 1)");
        }
        out.total_weight += f.weight;
    }
    return out;
}

}  // namespace qedpec
