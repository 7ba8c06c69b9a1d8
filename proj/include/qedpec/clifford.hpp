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

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qedpec/pauli.hpp"

namespace qedpec {

enum class GateKind : std::uint8_t { H, S, CNOT, CZ };

inline const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H:
            return "H";
        case GateKind::S:
            return "S";
        case GateKind::CNOT:
            return "CNOT";
        case GateKind::CZ:
            return "CZ";
    }
    return "?";
}

inline bool is_two_qubit(GateKind kind) { return kind == GateKind::CNOT || kind == GateKind::CZ; }

struct Gate {
    GateKind kind;
    std::array<std::uint32_t, 2> qubits{0, 0};

    static Gate h(std::uint32_t q) { return {GateKind::H, {q, q}}; }
    static Gate s(std::uint32_t q) { return {GateKind::S, {q, q}}; }
    static Gate cnot(std::uint32_t control, std::uint32_t target) { return {GateKind::CNOT, {control, target}}; }
    static Gate cz(std::uint32_t a, std::uint32_t b) { return {GateKind::CZ, {a, b}}; }

    std::size_t arity() const { return is_two_qubit(kind) ? 2 : 1; }

    friend bool operator==(const Gate&, const Gate&) = default;
};

namespace detail {

inline bool get_bit(std::span<const std::uint64_t> words, std::size_t q) { return (words[q >> 6] >> (q & 63)) & 1; }

inline void flip_bit(std::span<std::uint64_t> words, std::size_t q) { words[q >> 6] ^= std::uint64_t{1} << (q & 63); }

}  // namespace detail

/// Conjugates p in place by the gate: p <- G p G^dagger (phase dropped).
inline void apply_gate(PauliString& p, const Gate& g) {
    auto xs = p.x_words();
    auto zs = p.z_words();
    const std::size_t a = g.qubits[0];
    const std::size_t b = g.qubits[1];
    switch (g.kind) {
        case GateKind::H: {
            const bool x = detail::get_bit(xs, a);
            const bool z = detail::get_bit(zs, a);
            if (x != z) {
                detail::flip_bit(xs, a);
                detail::flip_bit(zs, a);
            }
            break;
        }
        case GateKind::S:
            if (detail::get_bit(xs, a)) {
                detail::flip_bit(zs, a);
            }
            break;
        case GateKind::CNOT:
            // X_c -> X_c X_t, Z_t -> Z_c Z_t.
            if (detail::get_bit(xs, a)) {
                detail::flip_bit(xs, b);
            }
            if (detail::get_bit(zs, b)) {
                detail::flip_bit(zs, a);
            }
            break;
        case GateKind::CZ: {
            // X_a -> X_a Z_b, X_b -> Z_a X_b.
            const bool xa = detail::get_bit(xs, a);
            const bool xb = detail::get_bit(xs, b);
            if (xa) {
                detail::flip_bit(zs, b);
            }
            if (xb) {
                detail::flip_bit(zs, a);
            }
            break;
        }
    }
}

/// A set of gates acting on pairwise-disjoint qubits.
class GateLayer {
   public:
    GateLayer() = default;
    GateLayer(std::initializer_list<Gate> gates) {
        for (const Gate& g : gates) {
            add(g);
        }
    }

    /// Appends a gate; throws if it touches a qubit already used in this layer.
    void add(const Gate& g) {
        if (g.arity() == 2 && g.qubits[0] == g.qubits[1]) {
            throw std::invalid_argument("two-qubit gate with repeated qubit " + std::to_string(g.qubits[0]));
        }
        for (const Gate& other : gates_) {
            for (std::size_t i = 0; i < g.arity(); i++) {
                for (std::size_t j = 0; j < other.arity(); j++) {
                    if (g.qubits[i] == other.qubits[j]) {
                        throw std::invalid_argument("gate layer overlap on qubit " + std::to_string(g.qubits[i]));
                    }
                }
            }
        }
        gates_.push_back(g);
    }

    const std::vector<Gate>& gates() const { return gates_; }
    bool empty() const { return gates_.empty(); }

    std::uint32_t max_qubit() const {
        std::uint32_t m = 0;
        for (const Gate& g : gates_) {
            m = std::max({m, g.qubits[0], g.qubits[1]});
        }
        return m;
    }

    friend bool operator==(const GateLayer&, const GateLayer&) = default;

   private:
    std::vector<Gate> gates_;
};

inline void apply_layer(PauliString& p, const GateLayer& layer) {
    for (const Gate& g : layer.gates()) {
        apply_gate(p, g);
    }
}

/// Ordered gate layers on a fixed register, partitioned into blocks.
///
/// `block_boundaries()[b]` is the layer index at which block b ends (exclusive),
/// i.e. where the b-th error-detection round happens.
class LayeredCircuit {
   public:
    LayeredCircuit(std::size_t width, std::vector<GateLayer> layers, std::vector<std::size_t> block_boundaries)
        : width_(width), layers_(std::move(layers)), boundaries_(std::move(block_boundaries)) {
        for (const GateLayer& layer : layers_) {
            if (!layer.empty() && layer.max_qubit() >= width_) {
                throw std::invalid_argument("gate qubit index exceeds circuit width");
            }
        }
        std::size_t prev = 0;
        for (std::size_t k = 0; k < boundaries_.size(); k++) {
            if (boundaries_[k] <= prev) {
                throw std::invalid_argument("block boundaries must be strictly increasing and positive");
            }
            prev = boundaries_[k];
        }
        if (!boundaries_.empty() && boundaries_.back() > layers_.size()) {
            throw std::invalid_argument("block boundary beyond last layer");
        }
    }

    std::size_t width() const { return width_; }
    const std::vector<GateLayer>& layers() const { return layers_; }
    const std::vector<std::size_t>& block_boundaries() const { return boundaries_; }
    std::size_t num_blocks() const { return boundaries_.size(); }

    /// Half-open layer range [first, last) of block b.
    std::pair<std::size_t, std::size_t> block_range(std::size_t b) const {
        if (b >= boundaries_.size()) {
            throw std::out_of_range("block index " + std::to_string(b) + " out of range");
        }
        return {b == 0 ? 0 : boundaries_[b - 1], boundaries_[b]};
    }

   private:
    std::size_t width_;
    std::vector<GateLayer> layers_;
    std::vector<std::size_t> boundaries_;
};

/// Returns U p U^dagger where U applies layers [from_layer, to_layer) in order.
inline PauliString conjugate_forward(PauliString p, const LayeredCircuit& circuit, std::size_t from_layer,
                                     std::size_t to_layer) {
    if (p.num_qubits() != circuit.width()) {
        throw std::invalid_argument("Pauli width does not match circuit width");
    }
    if (from_layer > to_layer || to_layer > circuit.layers().size()) {
        throw std::out_of_range("layer range out of bounds");
    }
    for (std::size_t l = from_layer; l < to_layer; l++) {
        apply_layer(p, circuit.layers()[l]);
    }
    return p;
}

/// Physical layers of the Iceberg logical CNOT between logical qubits i and j
/// (1-based) on an n-qubit block.
inline std::array<GateLayer, 2> compile_logical_cnot(std::size_t i, std::size_t j, std::size_t n) {
    if (n < 4) {
        throw std::invalid_argument("logical CNOT needs n >= 4");
    }
    if (i == j) {
        throw std::invalid_argument("logical CNOT control and target must differ");
    }
    if (i < 1 || j < 1 || i > n - 2 || j > n - 2) {
        throw std::out_of_range("logical index out of range [1, n-2]");
    }
    const auto ci = static_cast<std::uint32_t>(i + 1);
    const auto tj = static_cast<std::uint32_t>(j + 1);
    return {GateLayer{Gate::cnot(0, 1), Gate::cnot(ci, tj)}, GateLayer{Gate::cnot(0, tj), Gate::cnot(ci, 1)}};
}

// Text form: header "width N", then one layer per line with gates separated by
// ", ", e.g. "CNOT 0 1, CNOT 2 3". A line "--QED--" marks a block boundary.

inline void write_circuit(std::ostream& out, const LayeredCircuit& circuit) {
    out << "width " << circuit.width() << "\n";
    std::size_t next_boundary = 0;
    const auto& bounds = circuit.block_boundaries();
    for (std::size_t l = 0; l < circuit.layers().size(); l++) {
        const auto& gates = circuit.layers()[l].gates();
        for (std::size_t k = 0; k < gates.size(); k++) {
            if (k) {
                out << ", ";
            }
            out << gate_name(gates[k].kind) << " " << gates[k].qubits[0];
            if (gates[k].arity() == 2) {
                out << " " << gates[k].qubits[1];
            }
        }
        if (gates.empty()) {
            out << "IDLE";
        }
        out << "\n";
        while (next_boundary < bounds.size() && bounds[next_boundary] == l + 1) {
            out << "--QED--\n";
            next_boundary++;
        }
    }
}

inline LayeredCircuit read_circuit(std::istream& in) {
    std::string line;
    std::size_t width = 0;
    if (!std::getline(in, line) || line.rfind("width ", 0) != 0) {
        throw std::invalid_argument("circuit text must start with 'width N'");
    }
    width = std::stoul(line.substr(6));
    std::vector<GateLayer> layers;
    std::vector<std::size_t> bounds;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line == "--QED--") {
            bounds.push_back(layers.size());
            continue;
        }
        GateLayer layer;
        if (line != "IDLE") {
            std::stringstream ss(line);
            std::string item;
            while (std::getline(ss, item, ',')) {
                std::stringstream gs(item);
                std::string name;
                std::uint32_t a = 0, b = 0;
                gs >> name >> a;
                if (name == "H") {
                    layer.add(Gate::h(a));
                } else if (name == "S") {
                    layer.add(Gate::s(a));
                } else if (name == "CNOT" || name == "CZ") {
                    gs >> b;
                    layer.add(name == "CNOT" ? Gate::cnot(a, b) : Gate::cz(a, b));
                } else {
                    throw std::invalid_argument("unknown gate '" + name + "'");
                }
                if (gs.fail()) {
                    throw std::invalid_argument("malformed gate '" + item + "'");
                }
            }
        }
        layers.push_back(std::move(layer));
    }
    return LayeredCircuit(width, std::move(layers), std::move(bounds));
}

}  // namespace qedpec
