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

#include <stdexcept>
#include <vector>

#include "qedpec/clifford.hpp"
#include "qedpec/code.hpp"

namespace qedpec {

/// Encoded GHZ preparation on the Iceberg code together with the stabilizer
/// generators of the ideal output state.
struct GhzBenchmark {
    std::size_t n = 0;
    std::size_t interval = 0;  // logical gates per detection block
    LayeredCircuit circuit;
    StabilizerCode code;
    std::vector<PauliString> initial_generators;
    std::vector<PauliString> final_generators;
    std::vector<std::size_t> block_logical_lengths;

    std::size_t logical_gates() const { return n - 3; }
};

/// Splits `total` logical gates into blocks of `interval`, with a trailing
/// partial block when the interval does not divide the total.
inline std::vector<std::size_t> block_lengths(std::size_t total, std::size_t interval) {
    if (interval == 0) {
        throw std::invalid_argument("detection interval must be >= 1");
    }
    std::vector<std::size_t> out(total / interval, interval);
    if (total % interval) {
        out.push_back(total % interval);
    }
    return out;
}

/// Chain CNOTbar(j, j+1), j = 1..n-3, from |+>|0...0> (logical), each compiled to
/// two physical layers; a detection round follows every `interval` logical gates.
inline GhzBenchmark build_ghz_logical_circuit(std::size_t n, std::size_t interval) {
    if (n < 4) {
        throw std::invalid_argument("GHZ benchmark requires n >= 4");
    }
    const std::size_t logical = n - 3;
    auto lengths = block_lengths(logical, interval);

    std::vector<GateLayer> layers;
    layers.reserve(2 * logical);
    for (std::size_t j = 1; j <= logical; j++) {
        auto pair = compile_logical_cnot(j, j + 1, n);
        layers.push_back(std::move(pair[0]));
        layers.push_back(std::move(pair[1]));
    }
    std::vector<std::size_t> bounds;
    std::size_t acc = 0;
    for (std::size_t len : lengths) {
        acc += 2 * len;
        bounds.push_back(acc);
    }
    LayeredCircuit circuit(n, std::move(layers), std::move(bounds));
    StabilizerCode code = iceberg(n);

    std::vector<PauliString> initial = code.generators();
    initial.push_back(code.logical_x()[0]);
    for (std::size_t j = 1; j < code.k(); j++) {
        initial.push_back(code.logical_z()[j]);
    }
    std::vector<PauliString> final_gens;
    final_gens.reserve(initial.size());
    for (const auto& g : initial) {
        final_gens.push_back(conjugate_forward(g, circuit, 0, circuit.layers().size()));
    }
    return GhzBenchmark{n, interval, std::move(circuit), std::move(code), std::move(initial), std::move(final_gens),
                        std::move(lengths)};
}

}  // namespace qedpec
