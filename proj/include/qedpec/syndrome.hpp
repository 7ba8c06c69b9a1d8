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

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qedpec/clifford.hpp"
#include "qedpec/code.hpp"
#include "qedpec/noise.hpp"

namespace qedpec {

/// Uniform double in [0, 1) from the top 53 bits.
template <class Rng>
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
template <class Rng>
inline double uniform_open0(Rng& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

struct SyndromeModel {
    enum class Kind { Ideal, ReadoutFlip, CatExtraction };

    Kind kind = Kind::Ideal;
    double p_m = 0.0;
    std::size_t m_ancilla = 1;
    NoiseSpec spec;

    static SyndromeModel ideal() { return {}; }
    static SyndromeModel readout_flip(double p_m) {
        SyndromeModel m;
        m.kind = Kind::ReadoutFlip;
        m.p_m = p_m;
        m.validate();
        return m;
    }
    static SyndromeModel cat_extraction(std::size_t m_ancilla, const NoiseSpec& spec) {
        SyndromeModel m;
        m.kind = Kind::CatExtraction;
        m.m_ancilla = m_ancilla;
        m.spec = spec;
        m.validate();
        return m;
    }

    void validate() const {
        if (!(p_m >= 0.0 && p_m < 1.0)) {
            throw std::invalid_argument("readout flip probability must lie in [0, 1)");
        }
        if (m_ancilla < 1) {
            throw std::invalid_argument("m_ancilla must be >= 1");
        }
        spec.validate();
    }

    std::string name() const {
        switch (kind) {
            case Kind::Ideal:
                return "ideal";
            case Kind::ReadoutFlip:
                return "readout";
            case Kind::CatExtraction:
                return "cat";
        }
        return "?";
    }
};

/// Independent measurement-stage fault: flips reported bits and leaves a data residual.
struct MeasurementFault {
    double weight = 0.0;
    SyndromeMask flips = 0;
    PauliString residual;
};

/// One parallel batch of data-ancilla couplings on the joint register
/// (data qubits 0..n-1, ancillas n..n+m-1).
struct ExtractionBatch {
    std::size_t generator = 0;
    std::vector<Gate> couplings;
    std::vector<std::uint32_t> idle;  // idle data and idle ancillas
    bool ends_check = false;
};

struct ExtractionSchedule {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<ExtractionBatch> batches;

    std::size_t width() const { return n + m; }
};

/// Round-robin schedule: the k-th supported data qubit of a check couples to
/// ancilla k mod m in batch k / m. X support uses CNOT(ancilla -> data), Z
/// support uses CZ(ancilla, data).
inline ExtractionSchedule build_extraction_schedule(const StabilizerCode& code, std::size_t m_ancilla) {
    if (m_ancilla < 1) {
        throw std::invalid_argument("m_ancilla must be >= 1");
    }
    const std::size_t n = code.n();
    ExtractionSchedule s{n, m_ancilla, {}};
    for (std::size_t g = 0; g < code.generators().size(); g++) {
        const PauliString& gen = code.generators()[g];
        std::vector<std::pair<std::uint32_t, GateKind>> support;
        for (std::size_t q = 0; q < n; q++) {
            const bool x = gen.x(q);
            const bool z = gen.z(q);
            if (x && z) {
                throw std::invalid_argument("cat extraction supports X- or Z-type generator components only");
            }
            if (x || z) {
                support.emplace_back(static_cast<std::uint32_t>(q), x ? GateKind::CNOT : GateKind::CZ);
            }
        }
        if (support.empty()) {
            throw std::invalid_argument("empty stabilizer generator");
        }
        const std::size_t num_batches = (support.size() + m_ancilla - 1) / m_ancilla;
        for (std::size_t b = 0; b < num_batches; b++) {
            ExtractionBatch batch;
            batch.generator = g;
            std::vector<bool> busy(n + m_ancilla, false);
            for (std::size_t k = b * m_ancilla; k < std::min(support.size(), (b + 1) * m_ancilla); k++) {
                const auto anc = static_cast<std::uint32_t>(n + k % m_ancilla);
                const auto [q, kind] = support[k];
                batch.couplings.push_back(kind == GateKind::CNOT ? Gate::cnot(anc, q) : Gate::cz(anc, q));
                busy[q] = busy[anc] = true;
            }
            for (std::uint32_t q = 0; q < n + m_ancilla; q++) {
                if (!busy[q]) {
                    batch.idle.push_back(q);
                }
            }
            batch.ends_check = b + 1 == num_batches;
            s.batches.push_back(std::move(batch));
        }
    }
    return s;
}

/// A fault location of the extraction circuit, applied before its batch's couplings.
struct ExtractionLocation {
    std::size_t batch = 0;
    PauliString pauli;  // over the joint register
    double weight = 0.0;
};

inline std::vector<ExtractionLocation> extraction_locations(const ExtractionSchedule& s, const NoiseSpec& spec) {
    std::vector<ExtractionLocation> out;
    const std::size_t width = s.width();
    for (std::size_t b = 0; b < s.batches.size(); b++) {
        GateLayer layer;
        for (const Gate& g : s.batches[b].couplings) {
            layer.add(g);
        }
        for (auto& f : faults_for_layer(layer, width, spec)) {
            out.push_back({b, std::move(f.pauli), f.weight});
        }
    }
    return out;
}

/// Propagates a joint frame through one full extraction round. `inject(b, joint)`
/// is called before batch b's couplings. Returns the reported bits; `joint`'s
/// data part holds the residual afterwards.
template <class Inject>
SyndromeMask propagate_extraction(PauliString& joint, const ExtractionSchedule& s, Inject&& inject) {
    SyndromeMask reported = 0;
    for (std::size_t b = 0; b < s.batches.size(); b++) {
        const ExtractionBatch& batch = s.batches[b];
        if (b == 0 || s.batches[b - 1].ends_check) {
            // Fresh ideal cat state for each check.
            for (std::size_t a = s.n; a < s.width(); a++) {
                joint.set(a, false, false);
            }
        }
        inject(b, joint);
        for (const Gate& g : batch.couplings) {
            apply_gate(joint, g);
        }
        if (batch.ends_check) {
            bool parity = false;
            for (std::size_t a = s.n; a < s.width(); a++) {
                parity ^= joint.z(a);
            }
            if (parity) {
                reported |= SyndromeMask{1} << batch.generator;
            }
        }
    }
    return reported;
}

struct ExtractionOutcome {
    SyndromeMask reported = 0;
    PauliString residual;
};

/// One noisy cat-state extraction round on a joint (data + ancilla) frame.
template <class Rng>
ExtractionOutcome cat_extraction_round(PauliString joint, const ExtractionSchedule& s, const NoiseSpec& spec,
                                       Rng& rng) {
    if (joint.num_qubits() != s.width()) {
        throw std::invalid_argument("joint frame width mismatch");
    }
    const auto locations = extraction_locations(s, spec);
    std::size_t next = 0;
    ExtractionOutcome out;
    out.reported = propagate_extraction(joint, s, [&](std::size_t b, PauliString& frame) {
        while (next < locations.size() && locations[next].batch == b) {
            if (uniform01(rng) < locations[next].weight) {
                frame *= locations[next].pauli;
            }
            next++;
        }
    });
    out.residual = joint.slice(0, s.n);
    return out;
}

template <class Rng>
ExtractionOutcome cat_extraction_round(const PauliString& data_frame, const StabilizerCode& code,
                                       std::size_t m_ancilla, const NoiseSpec& spec, Rng& rng) {
    const auto s = build_extraction_schedule(code, m_ancilla);
    PauliString joint(s.width());
    for (std::size_t q = 0; q < s.n; q++) {
        joint.set(q, data_frame.x(q), data_frame.z(q));
    }
    return cat_extraction_round(joint, s, spec, rng);
}

/// Per-round measurement faults of a model. The reported syndrome of a round is
/// syndrome(frame) XOR the flips of the faults that fired, and the frame picks
/// up their residuals (extraction is linear in the Pauli frame).
inline std::vector<MeasurementFault> measurement_faults(const StabilizerCode& code, const SyndromeModel& model) {
    model.validate();
    const std::size_t n = code.n();
    std::vector<MeasurementFault> out;
    switch (model.kind) {
        case SyndromeModel::Kind::Ideal:
            break;
        case SyndromeModel::Kind::ReadoutFlip:
            if (model.p_m > 0.0) {
                for (std::size_t a = 0; a < code.generators().size(); a++) {
                    out.push_back({model.p_m, SyndromeMask{1} << a, PauliString(n)});
                }
            }
            break;
        case SyndromeModel::Kind::CatExtraction: {
            const auto s = build_extraction_schedule(code, model.m_ancilla);
            const auto locations = extraction_locations(s, model.spec);
            out.reserve(locations.size());
            for (const auto& loc : locations) {
                PauliString joint(s.width());
                const SyndromeMask flips = propagate_extraction(joint, s, [&](std::size_t b, PauliString& frame) {
                    if (b == loc.batch) {
                        frame *= loc.pauli;
                    }
                });
                out.push_back({loc.weight, flips, joint.slice(0, n)});
            }
            break;
        }
    }
    return out;
}

struct SyndromeOutcome {
    SyndromeMask reported = 0;
    PauliString frame;
};

/// Reported syndrome of a data frame under the model, with the updated frame.
template <class Rng>
SyndromeOutcome measure_syndrome(const PauliString& frame, const StabilizerCode& code, const SyndromeModel& model,
                                 Rng& rng) {
    SyndromeOutcome out{code.syndrome_mask(frame), frame};
    switch (model.kind) {
        case SyndromeModel::Kind::Ideal:
            break;
        case SyndromeModel::Kind::ReadoutFlip:
            for (std::size_t a = 0; a < code.generators().size(); a++) {
                if (uniform01(rng) < model.p_m) {
                    out.reported ^= SyndromeMask{1} << a;
                }
            }
            break;
        case SyndromeModel::Kind::CatExtraction: {
            auto r = cat_extraction_round(frame, code, model.m_ancilla, model.spec, rng);
            out.reported = r.reported;
            out.frame = std::move(r.residual);
            break;
        }
    }
    return out;
}

/// Exact probability that a round reports a trivial syndrome given the incoming
/// frame syndrome `incoming`, together with the distribution of the outgoing
/// frame syndrome. Computed with a Walsh transform over (flips, residual syndrome).
struct RoundTransition {
    // prob[s_in][s_out]: probability of acceptance and outgoing syndrome s_out.
    std::vector<std::vector<double>> prob;
};

inline RoundTransition round_transition(const StabilizerCode& code, const std::vector<MeasurementFault>& faults) {
    const std::size_t r = code.generators().size();
    if (2 * r > 20) {
        throw std::invalid_argument("round_transition supports at most 10 generators");
    }
    const std::size_t states = std::size_t{1} << r;
    const std::size_t joint = states * states;
    // Characteristic function of the XOR-sum of (flips, residual syndrome).
    std::vector<double> chi(joint, 1.0);
    for (const auto& f : faults) {
        const std::uint64_t key = f.flips | (code.syndrome_mask(f.residual) << r);
        if (key == 0) {
            continue;
        }
        for (std::size_t c = 0; c < joint; c++) {
            if (std::popcount(c & key) & 1) {
                chi[c] *= 1.0 - 2.0 * f.weight;
            }
        }
    }
    // Inverse transform to the distribution over joint keys.
    std::vector<double> dist(joint, 0.0);
    for (std::size_t k = 0; k < joint; k++) {
        double s = 0.0;
        for (std::size_t c = 0; c < joint; c++) {
            s += (std::popcount(c & k) & 1) ? -chi[c] : chi[c];
        }
        dist[k] = s / static_cast<double>(joint);
    }
    RoundTransition t;
    t.prob.assign(states, std::vector<double>(states, 0.0));
    for (std::size_t s_in = 0; s_in < states; s_in++) {
        for (std::size_t res = 0; res < states; res++) {
            // Accepted iff flips == s_in.
            t.prob[s_in][s_in ^ res] += dist[s_in | (res << r)];
        }
    }
    return t;
}

}  // namespace qedpec
