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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qedpec/sampler.hpp"

namespace {

using qedpec::NoiseSpec;
using qedpec::PauliString;
using qedpec::Protocol;
using qedpec::ProtocolOptions;
using qedpec::SamplingMode;
using qedpec::SamplingOptions;
using qedpec::SyndromeModel;

ProtocolOptions options(std::size_t n, std::size_t T, SyndromeModel model = SyndromeModel::ideal(),
                        NoiseSpec noise = {1e-3, 1e-2}) {
    ProtocolOptions o;
    o.n = n;
    o.interval = T;
    o.noise = noise;
    o.syndrome = model;
    return o;
}

// Independent exact evaluation for the ideal-measurement model on text
// frames: accumulate (probability, signed value) per frame, block by block.
double text_oracle_fidelity(const Protocol& p) {
    const auto& bench = p.benchmark();
    const std::size_t n = bench.n;
    struct Acc {
        double prob = 0.0, value = 0.0;
    };
    std::map<std::string, Acc> state{{std::string(n, 'I'), {1.0, 1.0}}};
    const std::string zs(n, 'Z'), xs(n, 'X');
    for (std::size_t b = 0; b < p.num_blocks(); b++) {
        const auto& faults = p.execution_faults()[b];
        std::map<std::string, Acc> moved;
        for (const auto& [f, a] : state) {
            const auto g = qedpec::conjugate_forward(PauliString::from_string(f), bench.circuit, faults.first_layer,
                                                     faults.end_layer);
            moved[g.str()] = a;
        }
        state = std::move(moved);
        for (const auto& loc : faults.faults) {
            const std::string e =
                qedpec::conjugate_forward(loc.pauli, bench.circuit, loc.layer, faults.end_layer).str();
            std::map<std::string, Acc> next;
            for (const auto& [f, a] : state) {
                next[f].prob += (1.0 - loc.weight) * a.prob;
                next[f].value += (1.0 - loc.weight) * a.value;
                auto& h = next[oracle::pauli_times(f, e)];
                h.prob += loc.weight * a.prob;
                h.value += loc.weight * a.value;
            }
            state = std::move(next);
        }
        std::map<std::string, Acc> kept;
        for (const auto& [f, a] : state)
            if (oracle::pauli_commute(f, zs) && oracle::pauli_commute(f, xs)) kept[f] = a;
        const auto& table = p.tables()[b];
        std::map<std::string, Acc> after;
        for (const auto& [f, a] : kept) {
            for (const auto& e : table.entries) {
                auto& h = after[oracle::pauli_times(f, e.pauli.str())];
                h.prob += e.prob * a.prob;
                h.value += e.prob * e.sign * table.gamma * a.value;
            }
        }
        state = std::move(after);
    }
    double num = 0.0, den = 0.0;
    for (const auto& [f, a] : state) {
        bool ok = true;
        for (const auto& g : bench.final_generators) ok &= oracle::pauli_commute(f, g.str());
        num += ok ? a.value : 0.0;
        den += a.prob;
    }
    return num / den;
}

TEST(Sampler, ExactOracleMatchesTextOracle) {
    for (auto [n, T] : {std::pair<std::size_t, std::size_t>{4, 1}, {4, 3}, {6, 1}, {6, 2}}) {
        const Protocol p(options(n, T));
        EXPECT_NEAR(qedpec::exact_oracle(p).fidelity, text_oracle_fidelity(p), 1e-12) << n << " " << T;
    }
    const Protocol big(options(12, 1));
    EXPECT_THROW(qedpec::exact_oracle(big), std::invalid_argument);
}

TEST(Sampler, ExactAcceptanceMatchesOracle) {
    for (const auto& model : {SyndromeModel::ideal(), SyndromeModel::readout_flip(2e-2),
                              SyndromeModel::cat_extraction(2, NoiseSpec{1e-3, 1e-2})}) {
        for (std::size_t T : {1u, 3u}) {
            const Protocol p(options(6, T, model));
            EXPECT_NEAR(qedpec::exact_acceptance(p), qedpec::exact_oracle(p).acceptance, 1e-12) << model.name();
        }
    }
}

TEST(Sampler, PecImprovesOverPostSelectionAlone) {
    auto opt = options(8, 1);
    const double with = qedpec::exact_oracle(Protocol(opt)).fidelity;
    opt.pec = false;
    const double without = qedpec::exact_oracle(Protocol(opt)).fidelity;
    EXPECT_GT(with, without);
    EXPECT_LT(1.0 - with, 0.2 * (1.0 - without));
}

struct McCase {
    std::size_t n, T;
    SyndromeModel model;
    SamplingMode mode;
};

TEST(Sampler, MonteCarloMatchesOracle) {
    const std::vector<McCase> cases = {
        {4, 1, SyndromeModel::ideal(), SamplingMode::Plain},
        {6, 1, SyndromeModel::ideal(), SamplingMode::Plain},
        {6, 1, SyndromeModel::readout_flip(1e-2), SamplingMode::Plain},
        {6, 3, SyndromeModel::readout_flip(1e-2), SamplingMode::Stratified},
        {6, 1, SyndromeModel::ideal(), SamplingMode::Stratified},
        {6, 1, SyndromeModel::ideal(), SamplingMode::Conditioned},
        {8, 2, SyndromeModel::cat_extraction(2, NoiseSpec{1e-3, 1e-2}), SamplingMode::Plain},
    };
    for (const auto& c : cases) {
        const Protocol p(options(c.n, c.T, c.model));
        const auto exact = qedpec::exact_oracle(p);
        SamplingOptions so;
        so.shots = 100000;
        so.mode = c.mode;
        so.seed = 1234;
        const auto r = qedpec::run_protocol(p, so);
        EXPECT_NEAR(r.estimate, exact.fidelity, 3.0 * r.stderr_)
            << c.n << " " << c.T << " " << c.model.name() << " " << qedpec::sampling_mode_name(c.mode);
        if (c.mode != SamplingMode::Conditioned) {
            EXPECT_NEAR(r.acceptance_rate, exact.acceptance, 4.0 * r.acceptance_stderr + 1e-12);
        }
    }
}

TEST(Sampler, DeterministicReplayAndThreadInvariance) {
    const Protocol p(options(10, 2));
    for (auto mode : {SamplingMode::Plain, SamplingMode::Stratified, SamplingMode::Conditioned}) {
        SamplingOptions so;
        so.shots = 30000;
        so.chunk_size = 1000;
        so.mode = mode;
        so.seed = 77;
        const auto a = qedpec::run_protocol(p, so);
        const auto b = qedpec::run_protocol(p, so);
        so.threads = 3;
        const auto c = qedpec::run_protocol(p, so);
        EXPECT_EQ(a.estimate, b.estimate);
        EXPECT_EQ(a.stderr_, b.stderr_);
        EXPECT_EQ(a.estimate, c.estimate);
        EXPECT_EQ(a.n_accepted, c.n_accepted);
        so.seed = 78;
        EXPECT_NE(qedpec::run_protocol(p, so).estimate, a.estimate);
    }
}

TEST(Sampler, TargetStderrStopsEarly) {
    const Protocol p(options(6, 1));
    SamplingOptions so;
    so.shots = 10000000;
    so.chunk_size = 1000;
    so.target_stderr = 2e-3;
    so.mode = SamplingMode::Conditioned;
    const auto r = qedpec::run_protocol(p, so);
    EXPECT_LE(r.stderr_, 2e-3);
    EXPECT_LT(r.n_attempted, so.shots);
}

TEST(Sampler, ConditionedRequiresIdealMeasurement) {
    const Protocol p(options(6, 1, SyndromeModel::readout_flip(1e-3)));
    SamplingOptions so;
    so.mode = SamplingMode::Conditioned;
    EXPECT_THROW(qedpec::run_protocol(p, so), std::invalid_argument);
}

TEST(Sampler, NoAcceptedShotsIsReported) {
    qedpec::ShotSums s;
    s.n = 10;
    EXPECT_THROW(qedpec::estimate(s), qedpec::NoDataError);
}

TEST(Sampler, SourceListFiringFrequencies) {
    qedpec::SourceList list;
    list.weights = {0.05, 0.01, 0.2, 0.0, 0.13};
    list.finalize();
    std::mt19937_64 rng(5);
    const double shots = 200000;
    std::vector<double> fired(list.size(), 0.0);
    std::vector<double> pair(2, 0.0);
    for (int s = 0; s < shots; s++) {
        bool a = false, b = false;
        list.sample(rng, 0, [&](std::size_t i) {
            fired[i] += 1.0;
            a |= i == 0;
            b |= i == 2;
        });
        pair[0] += a && b;
    }
    for (std::size_t i = 0; i < list.size(); i++) {
        const double p = list.weights[i];
        EXPECT_NEAR(fired[i] / shots, p, 4.0 * std::sqrt(p * (1 - p) / shots) + 1e-12) << i;
    }
    // Independence between sources.
    EXPECT_NEAR(pair[0] / shots, 0.05 * 0.2, 4.0 * std::sqrt(0.01 / shots));
    // Starting offset skips earlier sources.
    list.sample(rng, 3, [&](std::size_t i) { EXPECT_GE(i, 3u); });
}

TEST(Sampler, ForcedFirstEventDistribution) {
    const Protocol p(options(6, 1));
    std::mt19937_64 rng(3);
    std::map<std::size_t, double> per_block;
    const double draws = 50000;
    for (int s = 0; s < draws; s++) per_block[p.draw_first_event(rng).block] += 1.0;
    // Blocks have equal weight but earlier blocks come first in the survival order.
    EXPECT_GT(per_block[0], per_block[2]);
    EXPECT_GT(p.p_no_event(), 0.0);
    EXPECT_LT(p.p_no_event(), 1.0);
}

TEST(Sampler, DriftChangesExecutionButNotTables) {
    auto opt = options(10, 1);
    const Protocol base(opt);
    opt.r_max = 0.3;
    opt.drift_seed = 9;
    const Protocol drifted(opt);
    ASSERT_EQ(base.tables().size(), drifted.tables().size());
    for (std::size_t b = 0; b < base.tables().size(); b++) {
        EXPECT_EQ(base.tables()[b].gamma, drifted.tables()[b].gamma);
        EXPECT_NE(base.execution_faults()[b].total_weight, drifted.execution_faults()[b].total_weight);
    }
}

}  // namespace
