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

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qedpec/compiler.hpp"
#include "qedpec/ghz.hpp"
#include "qedpec/syndrome.hpp"

namespace qedpec {

/// Layer-by-layer execution of one block: each fault fires with its weight
/// before its layer, then the frame is conjugated through the layer's gates.
template <class Rng>
void run_block(PauliString& frame, const BlockFaults& faults, const LayeredCircuit& circuit, Rng& rng) {
    if (frame.num_qubits() != circuit.width()) {
        throw std::invalid_argument("frame width does not match circuit");
    }
    std::size_t next = 0;
    for (std::size_t l = faults.first_layer; l < faults.end_layer; l++) {
        while (next < faults.faults.size() && faults.faults[next].layer == l) {
            if (uniform01(rng) < faults.faults[next].weight) {
                frame *= faults.faults[next].pauli;
            }
            next++;
        }
        apply_layer(frame, circuit.layers()[l]);
    }
}

/// 1 iff the frame commutes with every generator of the ideal output state.
inline int ghz_fidelity_indicator(const PauliString& frame, const std::vector<PauliString>& generators) {
    for (const auto& g : generators) {
        if (!frame.commutes_with(g)) {
            return 0;
        }
    }
    return 1;
}

struct PecDraw {
    int sign = 1;
    double gamma = 1.0;
    std::size_t entry = 0;
};

/// Draws one entry of the table, multiplies its Pauli into the frame.
template <class Rng>
PecDraw apply_pec_sample(PauliString& frame, const PecTable& table, Rng& rng) {
    if (table.entries.empty()) {
        throw std::invalid_argument("empty PEC table");
    }
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t k = 0;
    for (; k + 1 < table.entries.size(); k++) {
        acc += table.entries[k].prob;
        if (u < acc) {
            break;
        }
    }
    frame *= table.entries[k].pauli;
    return {table.entries[k].sign, table.gamma, k};
}

/// Independent Bernoulli sources with precomputed effects, sampled by geometric
/// skipping at the largest weight followed by thinning.
struct SourceList {
    std::vector<double> weights;
    std::vector<PauliString> paulis;
    std::vector<SyndromeMask> flips;
    double p_max = 0.0;
    double inv_log1m = 0.0;  // 1 / log(1 - p_max)

    std::size_t size() const { return weights.size(); }

    void finalize() {
        p_max = weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
        inv_log1m = p_max > 0.0 ? 1.0 / std::log1p(-p_max) : 0.0;
    }

    /// Calls fire(i) for each source i >= start that fires.
    template <class Rng, class Fire>
    void sample(Rng& rng, std::size_t start, Fire&& fire) const {
        if (p_max <= 0.0) {
            return;
        }
        const std::size_t m = weights.size();
        std::size_t i = start;
        while (true) {
            const double skip = std::floor(std::log(uniform_open0(rng)) * inv_log1m);
            if (skip >= static_cast<double>(m - i)) {
                return;
            }
            i += static_cast<std::size_t>(skip);
            const double w = weights[i];
            if (w == p_max || uniform01(rng) * p_max < w) {
                fire(i);
            }
            if (++i >= m) {
                return;
            }
        }
    }
};

struct ShotRecord {
    bool accepted = false;
    int sign = 1;
    double gamma_product = 1.0;
    double value = 0.0;
    std::size_t blocks_completed = 0;
};

struct ProtocolOptions {
    std::size_t n = 4;
    std::size_t interval = 1;
    std::size_t order = 1;
    NoiseSpec noise;
    SyndromeModel syndrome;
    Normalization normalization = Normalization::Numeric;
    bool pec = true;
    double r_max = 0.0;
    std::uint64_t drift_seed = 0;
    bool extraction_first_order = false;  // nonstandard
    bool enforce_validity = true;
    double prune_threshold = 1e-15;
    bool compute_eta = false;
};

/// Forces the first event of a shot (used by the stratified estimator).
struct ForcedEvent {
    enum class Kind { Fault, Measurement, Pec };
    std::size_t block = 0;
    Kind kind = Kind::Fault;
    std::size_t index = 0;
};

/// Compiled QED+PEC protocol for one GHZ benchmark point.
class Protocol {
   public:
    explicit Protocol(const ProtocolOptions& opts)
        : opts_(opts), bench_(build_ghz_logical_circuit(opts.n, opts.interval)) {
        opts_.noise.validate();
        opts_.syndrome.validate();
        if (opts_.extraction_first_order && opts_.order != 1) {
            throw std::invalid_argument("first-order extraction extension requires K = 1");
        }
        const std::size_t n = bench_.n;
        const auto& circuit = bench_.circuit;
        measurement_ = measurement_faults(bench_.code, opts_.syndrome);
        for (const auto& f : measurement_) {
            measurement_sources_.weights.push_back(f.weight);
            measurement_sources_.paulis.push_back(f.residual);
            measurement_sources_.flips.push_back(f.flips);
        }
        measurement_sources_.finalize();

        CompileOptions copts;
        copts.order = opts_.order;
        copts.normalization = opts_.normalization;
        copts.prune_threshold = opts_.prune_threshold;
        copts.enforce_validity = opts_.enforce_validity;
        copts.compute_eta = opts_.compute_eta;

        const std::size_t num_blocks = circuit.block_boundaries().size();
        gamma_total_ = 1.0;
        for (std::size_t b = 0; b < num_blocks; b++) {
            BlockFaults nominal = block_faults(circuit, b, opts_.noise, opts_.enforce_validity);
            PropagatedFaults prop = propagate_block_faults(nominal, circuit, bench_.code);
            if (opts_.pec) {
                if (opts_.extraction_first_order) {
                    BlockFaults ext = nominal;
                    PropagatedFaults ext_prop = prop;
                    for (const auto& f : measurement_) {
                        ext.faults.push_back({ext.faults.size(), nominal.end_layer, f.residual, f.weight});
                        ext.total_weight += f.weight;
                        ext_prop.paulis.push_back(f.residual);
                        ext_prop.masks.push_back(f.flips | bench_.code.syndrome_mask(f.residual));
                    }
                    compiled_.push_back(compile_block(ext, ext_prop, n, copts));
                } else {
                    compiled_.push_back(compile_block(nominal, prop, n, copts));
                }
                tables_.push_back(compiled_.back().table);
            } else {
                if (opts_.enforce_validity && nominal.total_weight >= kValidityLimit) {
                    throw ValidityError("block outside the validity regime");
                }
                tables_.push_back(PecTable::identity(n, b));
            }
            gamma_total_ *= tables_.back().gamma;

            // Execution weights may drift away from the compiled (nominal) ones.
            BlockFaults exec = opts_.r_max > 0.0
                                   ? perturb_weights(nominal, opts_.r_max, opts_.drift_seed * 1000003ULL + b)
                                   : nominal;
            BlockRuntime rt;
            rt.first_layer = exec.first_layer;
            rt.end_layer = exec.end_layer;
            for (std::size_t i = 0; i < exec.size(); i++) {
                rt.faults.weights.push_back(exec.faults[i].weight);
                rt.faults.paulis.push_back(prop.paulis[i]);
                rt.faults.flips.push_back(prop.masks[i]);
            }
            rt.faults.finalize();
            const PecTable& t = tables_.back();
            rt.q_identity = t.entries[0].prob;
            double acc = 0.0;
            for (std::size_t k = 1; k < t.entries.size(); k++) {
                acc += t.entries[k].prob;
                rt.cumulative.push_back(acc);
            }
            execution_.push_back(std::move(exec));
            runtime_.push_back(std::move(rt));
        }
        build_stratification();
    }

    const ProtocolOptions& options() const { return opts_; }
    const GhzBenchmark& benchmark() const { return bench_; }
    const std::vector<CompiledBlock>& compiled() const { return compiled_; }
    const std::vector<PecTable>& tables() const { return tables_; }
    const std::vector<BlockFaults>& execution_faults() const { return execution_; }
    const std::vector<MeasurementFault>& measurement() const { return measurement_; }
    std::size_t num_blocks() const { return runtime_.size(); }
    double gamma_total() const { return gamma_total_; }

    /// Probability that the whole run has no event at all (no fault, no
    /// measurement fault, identity PEC draw everywhere).
    double p_no_event() const { return survival_.back(); }

    /// One trajectory. With `forced`, blocks before forced->block are event-free
    /// and the forced source fires; sources after it are sampled normally.
    template <class Rng>
    ShotRecord run_shot(Rng& rng, const std::optional<ForcedEvent>& forced = std::nullopt) const {
        const std::size_t n = bench_.n;
        const auto& circuit = bench_.circuit;
        PauliString frame(n);
        ShotRecord rec;
        rec.gamma_product = gamma_total_;
        const std::size_t first_block = forced ? forced->block : 0;
        for (std::size_t b = first_block; b < runtime_.size(); b++) {
            const BlockRuntime& rt = runtime_[b];
            const bool is_forced = forced && b == forced->block;
            if (!frame.is_identity()) {
                for (std::size_t l = rt.first_layer; l < rt.end_layer; l++) {
                    apply_layer(frame, circuit.layers()[l]);
                }
            }
            auto add_fault = [&](std::size_t i) { frame *= rt.faults.paulis[i]; };
            std::size_t meas_start = 0;
            bool force_pec = false;
            if (is_forced) {
                switch (forced->kind) {
                    case ForcedEvent::Kind::Fault:
                        add_fault(forced->index);
                        rt.faults.sample(rng, forced->index + 1, add_fault);
                        break;
                    case ForcedEvent::Kind::Measurement:
                        meas_start = forced->index;
                        break;
                    case ForcedEvent::Kind::Pec:
                        meas_start = measurement_sources_.size();
                        force_pec = true;
                        break;
                }
            } else {
                rt.faults.sample(rng, 0, add_fault);
            }

            SyndromeMask reported = frame.is_identity() ? 0 : bench_.code.syndrome_mask(frame);
            auto add_meas = [&](std::size_t i) {
                reported ^= measurement_sources_.flips[i];
                frame *= measurement_sources_.paulis[i];
            };
            if (is_forced && forced->kind == ForcedEvent::Kind::Measurement) {
                add_meas(meas_start);
                measurement_sources_.sample(rng, meas_start + 1, add_meas);
            } else if (!(is_forced && forced->kind == ForcedEvent::Kind::Pec)) {
                measurement_sources_.sample(rng, 0, add_meas);
            }
            if (reported != 0) {
                rec.accepted = false;
                rec.blocks_completed = b;
                return rec;
            }

            if (!rt.cumulative.empty()) {
                std::size_t k = 0;
                if (force_pec) {
                    k = 1 + draw_non_identity(rt, uniform01(rng) * rt.cumulative.back());
                } else {
                    const double u = uniform01(rng);
                    if (u >= rt.q_identity) {
                        k = 1 + draw_non_identity(rt, (u - rt.q_identity));
                    }
                }
                if (k != 0) {
                    const PecEntry& e = tables_[b].entries[k];
                    frame *= e.pauli;
                    rec.sign *= e.sign;
                }
            }
        }
        rec.accepted = true;
        rec.blocks_completed = runtime_.size();
        rec.value = rec.gamma_product * rec.sign * ghz_fidelity_indicator(frame, bench_.final_generators);
        return rec;
    }

    /// Trajectory conditioned on acceptance: each block's faults are redrawn
    /// until its syndrome is trivial. Ideal measurement only.
    template <class Rng>
    ShotRecord run_conditioned_shot(Rng& rng) const {
        const std::size_t n = bench_.n;
        const auto& circuit = bench_.circuit;
        PauliString frame(n);
        PauliString trial(n);
        ShotRecord rec;
        rec.gamma_product = gamma_total_;
        for (std::size_t b = 0; b < runtime_.size(); b++) {
            const BlockRuntime& rt = runtime_[b];
            if (!frame.is_identity()) {
                for (std::size_t l = rt.first_layer; l < rt.end_layer; l++) {
                    apply_layer(frame, circuit.layers()[l]);
                }
            }
            while (true) {
                trial = frame;
                rt.faults.sample(rng, 0, [&](std::size_t i) { trial *= rt.faults.paulis[i]; });
                if (trial.is_identity() || bench_.code.syndrome_mask(trial) == 0) {
                    break;
                }
            }
            frame = trial;
            if (!rt.cumulative.empty()) {
                const double u = uniform01(rng);
                if (u >= rt.q_identity) {
                    const PecEntry& e = tables_[b].entries[1 + draw_non_identity(rt, u - rt.q_identity)];
                    frame *= e.pauli;
                    rec.sign *= e.sign;
                }
            }
        }
        rec.accepted = true;
        rec.blocks_completed = runtime_.size();
        rec.value = rec.gamma_product * rec.sign * ghz_fidelity_indicator(frame, bench_.final_generators);
        return rec;
    }

    /// Samples the first event conditioned on at least one event occurring.
    template <class Rng>
    ForcedEvent draw_first_event(Rng& rng) const {
        const double p0 = survival_.back();
        const double u = p0 + (1.0 - p0) * uniform01(rng);
        // First index j with survival_[j] < u; the event is source j - 1.
        auto it = std::partition_point(survival_.begin(), survival_.end(), [&](double s) { return s >= u; });
        std::size_t j = static_cast<std::size_t>(it - survival_.begin());
        if (j == 0) {
            j = 1;
        }
        if (j > source_kind_.size()) {
            j = source_kind_.size();
        }
        return source_kind_[j - 1];
    }

   private:
    struct BlockRuntime {
        std::size_t first_layer = 0;
        std::size_t end_layer = 0;
        SourceList faults;
        double q_identity = 1.0;
        std::vector<double> cumulative;  // over entries 1.. of the table
    };

    static std::size_t draw_non_identity(const BlockRuntime& rt, double u) {
        auto it = std::upper_bound(rt.cumulative.begin(), rt.cumulative.end(), u);
        if (it == rt.cumulative.end()) {
            --it;
        }
        return static_cast<std::size_t>(it - rt.cumulative.begin());
    }

    void build_stratification() {
        survival_.assign(1, 1.0);
        source_kind_.clear();
        double log_s = 0.0;
        auto push = [&](double rho, ForcedEvent ev) {
            log_s += std::log1p(-rho);
            survival_.push_back(std::exp(log_s));
            source_kind_.push_back(ev);
        };
        for (std::size_t b = 0; b < runtime_.size(); b++) {
            const auto& rt = runtime_[b];
            for (std::size_t i = 0; i < rt.faults.size(); i++) {
                push(rt.faults.weights[i], {b, ForcedEvent::Kind::Fault, i});
            }
            for (std::size_t i = 0; i < measurement_sources_.size(); i++) {
                push(measurement_sources_.weights[i], {b, ForcedEvent::Kind::Measurement, i});
            }
            if (!rt.cumulative.empty()) {
                push(1.0 - rt.q_identity, {b, ForcedEvent::Kind::Pec, 0});
            }
        }
    }

    ProtocolOptions opts_;
    GhzBenchmark bench_;
    std::vector<CompiledBlock> compiled_;
    std::vector<PecTable> tables_;
    std::vector<BlockFaults> execution_;
    std::vector<MeasurementFault> measurement_;
    SourceList measurement_sources_;
    std::vector<BlockRuntime> runtime_;
    double gamma_total_ = 1.0;
    std::vector<double> survival_;
    std::vector<ForcedEvent> source_kind_;
};

/// No accepted shot: the estimate is undefined.
class NoDataError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct RunResult {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n_attempted = 0;
    std::uint64_t n_accepted = 0;
    double acceptance_rate = 0.0;  // estimated probability of acceptance
    double acceptance_stderr = 0.0;
    double mean_abs_gamma = 0.0;
    bool stratified = false;
    double p_no_event = 0.0;
};

/// Running sums over shots: A = accepted, Y = value (0 when rejected).
struct ShotSums {
    std::uint64_t n = 0;
    std::uint64_t accepted = 0;
    double sum_y = 0.0;
    double sum_y2 = 0.0;
    double sum_abs_gamma = 0.0;

    void add(const ShotRecord& r) {
        n++;
        if (r.accepted) {
            accepted++;
            sum_y += r.value;
            sum_y2 += r.value * r.value;
            sum_abs_gamma += std::abs(r.gamma_product);
        }
    }
    ShotSums& operator+=(const ShotSums& o) {
        n += o.n;
        accepted += o.accepted;
        sum_y += o.sum_y;
        sum_y2 += o.sum_y2;
        sum_abs_gamma += o.sum_abs_gamma;
        return *this;
    }
};

/// Plain estimate: sample mean and standard error over accepted shots.
inline RunResult estimate(const ShotSums& s) {
    if (s.accepted == 0) {
        throw NoDataError("no accepted shots");
    }
    RunResult r;
    const double na = static_cast<double>(s.accepted);
    r.n_attempted = s.n;
    r.n_accepted = s.accepted;
    r.estimate = s.sum_y / na;
    const double var = s.accepted > 1 ? std::max(0.0, (s.sum_y2 - na * r.estimate * r.estimate) / (na - 1.0)) : 0.0;
    r.stderr_ = std::sqrt(var / na);
    r.acceptance_rate = na / static_cast<double>(s.n);
    r.acceptance_stderr = std::sqrt(r.acceptance_rate * (1.0 - r.acceptance_rate) / static_cast<double>(s.n));
    r.mean_abs_gamma = s.sum_abs_gamma / na;
    return r;
}

inline RunResult estimate(const std::vector<ShotRecord>& records) {
    ShotSums s;
    for (const auto& r : records) {
        s.add(r);
    }
    return estimate(s);
}

/// Ratio estimate combining the analytic no-event stratum (probability p0,
/// value gamma, always accepted) with shots conditioned on >= 1 event.
inline RunResult estimate_stratified(const ShotSums& s, double p0, double gamma) {
    if (s.n == 0) {
        throw NoDataError("no stratified samples");
    }
    const double n = static_cast<double>(s.n);
    const double q = 1.0 - p0;
    const double mean_a = static_cast<double>(s.accepted) / n;
    const double mean_y = s.sum_y / n;
    const double num = p0 * gamma + q * mean_y;
    const double den = p0 + q * mean_a;
    if (den <= 0.0) {
        throw NoDataError("no accepted shots");
    }
    RunResult r;
    r.stratified = true;
    r.p_no_event = p0;
    r.n_attempted = s.n;
    r.n_accepted = s.accepted;
    r.estimate = num / den;
    // Delta method on Y - F A, using Y A = Y and A^2 = A.
    const double f = r.estimate;
    const double e_d2 = (s.sum_y2 - 2.0 * f * s.sum_y + f * f * static_cast<double>(s.accepted)) / n;
    const double mean_d = mean_y - f * mean_a;
    const double var_d = std::max(0.0, e_d2 - mean_d * mean_d) * n / std::max(1.0, n - 1.0);
    r.stderr_ = q / den * std::sqrt(var_d / n);
    r.acceptance_rate = den;
    r.acceptance_stderr = q * std::sqrt(mean_a * (1.0 - mean_a) / n);
    r.mean_abs_gamma = s.accepted ? s.sum_abs_gamma / static_cast<double>(s.accepted) : gamma;
    return r;
}

/// Exact probability that every round reports a trivial syndrome (all orders),
/// from the Markov chain of the frame's syndrome.
inline double exact_acceptance(const Protocol& protocol) {
    const auto& bench = protocol.benchmark();
    const StabilizerCode& code = bench.code;
    const std::size_t r = code.generators().size();
    const std::size_t states = std::size_t{1} << r;
    const RoundTransition round = round_transition(code, protocol.measurement());
    std::vector<double> dist(states, 0.0);
    dist[0] = 1.0;
    for (std::size_t b = 0; b < protocol.num_blocks(); b++) {
        const BlockFaults& faults = protocol.execution_faults()[b];
        const auto prop = propagate_block_faults(faults, bench.circuit, code);
        std::vector<double> chi(states, 1.0);
        for (std::size_t i = 0; i < faults.size(); i++) {
            for (std::size_t c = 0; c < states; c++) {
                if (std::popcount(c & prop.masks[i]) & 1) {
                    chi[c] *= 1.0 - 2.0 * faults.faults[i].weight;
                }
            }
        }
        std::vector<double> shift(states, 0.0);
        for (std::size_t k = 0; k < states; k++) {
            for (std::size_t c = 0; c < states; c++) {
                shift[k] += (std::popcount(c & k) & 1) ? -chi[c] : chi[c];
            }
            shift[k] /= static_cast<double>(states);
        }
        std::vector<double> after(states, 0.0);
        for (std::size_t s = 0; s < states; s++) {
            for (std::size_t k = 0; k < states; k++) {
                after[s ^ k] += dist[s] * shift[k];
            }
        }
        std::vector<double> accepted(states, 0.0);
        for (std::size_t s = 0; s < states; s++) {
            for (std::size_t t = 0; t < states; t++) {
                accepted[t] += after[s] * round.prob[s][t];
            }
        }
        dist = std::move(accepted);
    }
    double total = 0.0;
    for (double d : dist) {
        total += d;
    }
    return total;
}

/// Plain: every shot from scratch. Stratified: shots conditioned on >= 1 event,
/// combined with the analytic no-event stratum. Conditioned: each block is
/// resampled until it is accepted (exact for Ideal measurement only, where the
/// frame syndrome is trivial after every accepted round).
enum class SamplingMode { Plain, Stratified, Conditioned };

inline const char* sampling_mode_name(SamplingMode m) {
    switch (m) {
        case SamplingMode::Plain:
            return "plain";
        case SamplingMode::Stratified:
            return "stratified";
        case SamplingMode::Conditioned:
            return "conditioned";
    }
    return "?";
}

struct SamplingOptions {
    std::uint64_t shots = 100000;
    double target_stderr = 0.0;  // > 0: stop once reached (shots is then the cap)
    SamplingMode mode = SamplingMode::Plain;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::uint64_t chunk_size = 4096;
};

namespace detail {

inline std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace detail

/// Monte Carlo over independent chunks of shots. Chunk c uses its own stream
/// seeded from (seed, c); chunk sums are reduced in chunk order, so the result
/// does not depend on the number of threads.
inline RunResult run_protocol(const Protocol& protocol, const SamplingOptions& opts) {
    if (opts.shots == 0 || opts.chunk_size == 0) {
        throw std::invalid_argument("shots and chunk_size must be positive");
    }
    const std::uint64_t total_chunks = (opts.shots + opts.chunk_size - 1) / opts.chunk_size;
    const unsigned threads = std::max(1u, opts.threads);
    // Stopping is checked after fixed rounds of chunks, independent of threads.
    const std::uint64_t round = opts.target_stderr > 0.0 ? 16 : total_chunks;
    ShotSums total;
    if (opts.mode == SamplingMode::Conditioned && protocol.options().syndrome.kind != SyndromeModel::Kind::Ideal) {
        throw std::invalid_argument("conditioned sampling requires ideal syndrome measurement");
    }
    const double p_exact = opts.mode == SamplingMode::Conditioned ? exact_acceptance(protocol) : 0.0;
    auto finish = [&](const ShotSums& s) {
        switch (opts.mode) {
            case SamplingMode::Stratified:
                return estimate_stratified(s, protocol.p_no_event(), protocol.gamma_total());
            case SamplingMode::Conditioned: {
                RunResult r = estimate(s);
                r.acceptance_rate = p_exact;
                r.acceptance_stderr = 0.0;
                return r;
            }
            case SamplingMode::Plain:
                break;
        }
        return estimate(s);
    };
    for (std::uint64_t begin = 0; begin < total_chunks; begin += round) {
        const std::uint64_t end = std::min(total_chunks, begin + round);
        std::vector<ShotSums> sums(end - begin);
        std::atomic<std::uint64_t> next{begin};
        auto worker = [&]() {
            for (std::uint64_t c = next++; c < end; c = next++) {
                auto rng = detail::chunk_rng(opts.seed, c);
                const std::uint64_t count = std::min(opts.chunk_size, opts.shots - c * opts.chunk_size);
                ShotSums& s = sums[c - begin];
                for (std::uint64_t k = 0; k < count; k++) {
                    switch (opts.mode) {
                        case SamplingMode::Plain:
                            s.add(protocol.run_shot(rng));
                            break;
                        case SamplingMode::Stratified:
                            s.add(protocol.run_shot(rng, protocol.draw_first_event(rng)));
                            break;
                        case SamplingMode::Conditioned:
                            s.add(protocol.run_conditioned_shot(rng));
                            break;
                    }
                }
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; t++) {
                pool.emplace_back(worker);
            }
            for (auto& t : pool) {
                t.join();
            }
        }
        for (const auto& s : sums) {
            total += s;
        }
        if (opts.target_stderr > 0.0 && (total.accepted > 1 || opts.mode == SamplingMode::Stratified)) {
            const RunResult r = finish(total);
            if (r.stderr_ > 0.0 && r.stderr_ <= opts.target_stderr) {
                return r;
            }
        }
    }
    return finish(total);
}

struct OracleResult {
    double fidelity = 0.0;
    double acceptance = 0.0;
};

namespace detail {

// Phase-free Pauli on n <= 12 qubits packed as x bits | (z bits << n).
inline std::uint32_t pack_pauli(const PauliString& p) {
    const std::size_t n = p.num_qubits();
    std::uint32_t code = 0;
    for (std::size_t q = 0; q < n; q++) {
        code |= static_cast<std::uint32_t>(p.x(q)) << q;
        code |= static_cast<std::uint32_t>(p.z(q)) << (n + q);
    }
    return code;
}

inline PauliString unpack_pauli(std::uint32_t code, std::size_t n) {
    PauliString p(n);
    for (std::size_t q = 0; q < n; q++) {
        p.set(q, (code >> q) & 1, (code >> (n + q)) & 1);
    }
    return p;
}

// Images of every packed Pauli under a GF(2)-linear map given on basis vectors.
inline std::vector<std::uint32_t> linear_images(const std::vector<std::uint32_t>& basis) {
    std::vector<std::uint32_t> img(std::size_t{1} << basis.size(), 0);
    for (std::size_t i = 1; i < img.size(); i++) {
        img[i] = img[i & (i - 1)] ^ basis[std::countr_zero(i)];
    }
    return img;
}

// a <- (1 - w) a + w a[i ^ e], in place, for the two arrays together.
inline void mix_pairs(std::vector<double>& prob, std::vector<double>& value, std::uint32_t e, double w) {
    if (e == 0 || w == 0.0) {
        return;
    }
    for (std::uint32_t i = 0; i < prob.size(); i++) {
        const std::uint32_t j = i ^ e;
        if (j < i) {
            continue;
        }
        const double pi = prob[i], pj = prob[j];
        prob[i] = (1.0 - w) * pi + w * pj;
        prob[j] = (1.0 - w) * pj + w * pi;
        const double vi = value[i], vj = value[j];
        value[i] = (1.0 - w) * vi + w * vj;
        value[j] = (1.0 - w) * vj + w * vi;
    }
}

}  // namespace detail

/// Exact mitigated expectation by propagating the full distribution of frames
/// (with signed PEC weights) block by block over dense 4^n arrays. Limited to
/// small registers.
inline OracleResult exact_oracle(const Protocol& protocol, std::size_t max_qubits = 10) {
    const auto& bench = protocol.benchmark();
    const std::size_t n = bench.n;
    if (n > max_qubits || n > 12) {
        throw std::invalid_argument("exact_oracle limited to " + std::to_string(std::min<std::size_t>(max_qubits, 12)) +
                                    " qubits");
    }
    const std::size_t bits = 2 * n;
    const std::size_t dim = std::size_t{1} << bits;
    const auto& code = bench.code;
    const std::size_t r = code.generators().size();

    std::vector<std::uint32_t> syn_basis(bits);
    for (std::size_t k = 0; k < bits; k++) {
        syn_basis[k] = static_cast<std::uint32_t>(code.syndrome_mask(detail::unpack_pauli(1u << k, n)));
    }
    const auto syndrome = detail::linear_images(syn_basis);

    std::vector<double> prob(dim, 0.0), value(dim, 0.0);
    prob[0] = value[0] = 1.0;
    std::vector<double> tmp_p(dim), tmp_v(dim);
    const auto& circuit = bench.circuit;
    for (std::size_t b = 0; b < protocol.num_blocks(); b++) {
        const BlockFaults& faults = protocol.execution_faults()[b];
        std::vector<std::uint32_t> basis(bits);
        for (std::size_t k = 0; k < bits; k++) {
            basis[k] = detail::pack_pauli(conjugate_forward(detail::unpack_pauli(1u << k, n), circuit,
                                                            faults.first_layer, faults.end_layer));
        }
        const auto image = detail::linear_images(basis);
        std::fill(tmp_p.begin(), tmp_p.end(), 0.0);
        std::fill(tmp_v.begin(), tmp_v.end(), 0.0);
        for (std::size_t i = 0; i < dim; i++) {
            tmp_p[image[i]] = prob[i];
            tmp_v[image[i]] = value[i];
        }
        prob.swap(tmp_p);
        value.swap(tmp_v);
        const auto prop = propagate_block_faults(faults, circuit, code);
        for (std::size_t i = 0; i < faults.size(); i++) {
            detail::mix_pairs(prob, value, detail::pack_pauli(prop.paulis[i]), faults.faults[i].weight);
        }

        // Measurement: joint index (reported << bits) | frame; keep reported == 0.
        const auto& meas = protocol.measurement();
        if (meas.empty()) {
            for (std::size_t i = 0; i < dim; i++) {
                if (syndrome[i] != 0) {
                    prob[i] = value[i] = 0.0;
                }
            }
        } else {
            std::vector<double> jp(dim << r, 0.0), jv(dim << r, 0.0);
            for (std::size_t i = 0; i < dim; i++) {
                jp[(std::size_t{syndrome[i]} << bits) | i] = prob[i];
                jv[(std::size_t{syndrome[i]} << bits) | i] = value[i];
            }
            for (const auto& mf : meas) {
                const std::uint32_t e = (static_cast<std::uint32_t>(mf.flips) << bits) | detail::pack_pauli(mf.residual);
                detail::mix_pairs(jp, jv, e, mf.weight);
            }
            std::copy(jp.begin(), jp.begin() + static_cast<std::ptrdiff_t>(dim), prob.begin());
            std::copy(jv.begin(), jv.begin() + static_cast<std::ptrdiff_t>(dim), value.begin());
        }

        const PecTable& table = protocol.tables()[b];
        if (table.entries.size() > 1) {
            std::fill(tmp_p.begin(), tmp_p.end(), 0.0);
            std::fill(tmp_v.begin(), tmp_v.end(), 0.0);
            for (const auto& e : table.entries) {
                const std::uint32_t shift = detail::pack_pauli(e.pauli);
                const double scale = e.sign * table.gamma;
                for (std::size_t i = 0; i < dim; i++) {
                    if (prob[i] == 0.0 && value[i] == 0.0) {
                        continue;
                    }
                    tmp_p[i ^ shift] += e.prob * prob[i];
                    tmp_v[i ^ shift] += e.prob * scale * value[i];
                }
            }
            prob.swap(tmp_p);
            value.swap(tmp_v);
        } else if (table.gamma != 1.0) {
            for (double& v : value) {
                v *= table.gamma;
            }
        }
    }

    std::vector<std::uint32_t> anti_basis(bits, 0);
    for (std::size_t k = 0; k < bits; k++) {
        const PauliString e = detail::unpack_pauli(1u << k, n);
        for (std::size_t g = 0; g < bench.final_generators.size(); g++) {
            if (!e.commutes_with(bench.final_generators[g])) {
                anti_basis[k] |= 1u << g;
            }
        }
    }
    if (bench.final_generators.size() > 32) {
        throw std::invalid_argument("too many final generators for exact_oracle");
    }
    const auto anti = detail::linear_images(anti_basis);
    OracleResult out;
    double num = 0.0;
    for (std::size_t i = 0; i < dim; i++) {
        out.acceptance += prob[i];
        if (anti[i] == 0) {
            num += value[i];
        }
    }
    if (out.acceptance <= 0.0) {
        throw NoDataError("zero acceptance probability");
    }
    out.fidelity = num / out.acceptance;
    return out;
}

}  // namespace qedpec
