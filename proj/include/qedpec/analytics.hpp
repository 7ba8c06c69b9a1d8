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
#include <stdexcept>
#include <vector>

#include "qedpec/ghz.hpp"
#include "qedpec/noise.hpp"
#include "qedpec/sampler.hpp"

namespace qedpec {

/// Per-cycle sampling cost gamma^2 / p_success (precision prefactor excluded).
struct CycleCost {
    double gamma = 1.0;
    double p_success = 1.0;

    double cost() const { return gamma * gamma / p_success; }
};

struct CostBreakdown {
    double total = 1.0;
    double postselect = 1.0;  // prod 1 / p_k
    double gamma2 = 1.0;      // prod gamma_k^2
};

inline CostBreakdown total_cost_qedpec(const std::vector<CycleCost>& cycles) {
    if (cycles.empty()) {
        throw std::invalid_argument("total_cost_qedpec needs at least one cycle");
    }
    double log_post = 0.0;
    double log_g2 = 0.0;
    for (const auto& c : cycles) {
        if (!(c.p_success > 0.0)) {
            throw std::invalid_argument("cycle success probability must be positive");
        }
        log_post -= std::log(c.p_success);
        log_g2 += 2.0 * std::log(c.gamma);
    }
    return {std::exp(log_post + log_g2), std::exp(log_post), std::exp(log_g2)};
}

/// Probability that a round on a clean frame reports the trivial syndrome.
inline double round_acceptance(const StabilizerCode& code, const std::vector<MeasurementFault>& faults) {
    const auto t = round_transition(code, faults);
    double p = 0.0;
    for (double v : t.prob[0]) {
        p += v;
    }
    return p;
}

/// Compiled cycle costs of a protocol: gamma_k and P_K,success of each block
/// table, times the clean-round acceptance of the measurement model.
inline std::vector<CycleCost> cycle_costs(const Protocol& protocol) {
    const double p_round = round_acceptance(protocol.benchmark().code, protocol.measurement());
    std::vector<CycleCost> out;
    for (const auto& t : protocol.tables()) {
        out.push_back({t.gamma, t.p_success * p_round});
    }
    return out;
}

/// Gamma^2 / p_obs with the exact all-order acceptance of the protocol.
inline CostBreakdown observed_cost(const Protocol& protocol) {
    const double p = exact_acceptance(protocol);
    const double g2 = protocol.gamma_total() * protocol.gamma_total();
    return {g2 / p, 1.0 / p, g2};
}

/// First-order pure PEC on the unencoded-equivalent circuit: gamma = 1 + 2 W_PEC
/// per logical layer, 2(n-3) layers.
inline double pure_pec_cost(std::size_t n, const NoiseSpec& spec) {
    if (n < 4) {
        throw std::invalid_argument("pure_pec_cost requires n >= 4");
    }
    spec.validate();
    const double w_pec = 3.0 * static_cast<double>(n - 4) * spec.w1() + 15.0 * spec.w2();
    return std::pow(1.0 + 2.0 * w_pec, 2.0 * static_cast<double>(n - 3));
}

/// Total fault weight of every detection block of the GHZ benchmark.
inline std::vector<double> block_weights(std::size_t n, std::size_t interval, const NoiseSpec& spec) {
    if (n < 4) {
        throw std::invalid_argument("block_weights requires n >= 4");
    }
    const double per_layer = 2.0 * spec.p2 + static_cast<double>(n - 4) * spec.p1;
    std::vector<double> out;
    for (std::size_t len : block_lengths(n - 3, interval)) {
        out.push_back(2.0 * static_cast<double>(len) * per_layer);
    }
    return out;
}

/// exp(sum_m W_m^2) - 1.
inline double perturbative_bound_B1(std::size_t n, std::size_t interval, const NoiseSpec& spec) {
    double s = 0.0;
    for (double w : block_weights(n, interval, spec)) {
        s += w * w;
    }
    return std::expm1(s);
}

struct ToyParams {
    double gamma_rate = 1.0;
    double T_total = 1.0;
    double tau = 1.0;
    double N = 2.0;

    void validate() const {
        if (!(gamma_rate > 0.0 && T_total > 0.0 && tau > 0.0)) {
            throw std::invalid_argument("toy parameters must be positive");
        }
        if (!(N >= 2.0)) {
            throw std::invalid_argument("toy dimension N must be >= 2");
        }
    }
    double rounds() const { return T_total / tau; }
};

/// Per-round log factors of toy model A: -ln p_succ and ln gamma_A^2.
struct ToyARound {
    double log_postselect = 0.0;
    double log_gamma2 = 0.0;
};

inline ToyARound toy_A_round(const ToyParams& p) {
    p.validate();
    const double x = p.gamma_rate * p.tau;
    const double perr = -std::expm1(-x);
    const double p_succ = 1.0 - perr * (1.0 - 2.0 / p.N);
    const double g = 1.0 + (3.0 / p.N) * std::expm1(x);
    return {-std::log(p_succ), 2.0 * std::log(g)};
}

struct ToyACost {
    double exact = 1.0;
    double expanded_log = 0.0;
};

inline ToyACost toy_A_cost(const ToyParams& p) {
    const ToyARound r = toy_A_round(p);
    const double N = p.N;
    const double gT = p.gamma_rate * p.T_total;
    ToyACost out;
    out.exact = std::exp(p.rounds() * (r.log_postselect + r.log_gamma2));
    out.expanded_log = gT * (1.0 + 4.0 / N) + p.gamma_rate * gT * p.tau * (2.0 / N - 7.0 / (N * N));
    return out;
}

struct ToyBCost {
    double exact_periodic = 1.0;
    double expanded_log = 0.0;
    double single_shot = 1.0;
};

inline ToyBCost toy_B_cost(const ToyParams& p) {
    p.validate();
    const double x = p.gamma_rate * p.tau;
    const double gT = p.gamma_rate * p.T_total;
    const double g = 1.5 * std::exp(x) - 0.5;
    const double g_single = 1.5 * std::exp(gT) - 0.5;
    ToyBCost out;
    out.exact_periodic = std::exp(2.0 * p.rounds() * std::log(g));
    out.expanded_log = 3.0 * gT - 0.75 * p.gamma_rate * gT * p.tau;
    out.single_shot = g_single * g_single;
    return out;
}

struct ZenoSeparation {
    double value = 0.0;
    bool advantage = false;  // false for N <= 4
};

/// Exponent gap between pure PEC (2 gamma T) and frequent detection (gamma T (1 + 4/N)).
inline ZenoSeparation zeno_separation(const ToyParams& p) {
    p.validate();
    const double gT = p.gamma_rate * p.T_total;
    const double v = 2.0 * gT - gT * (1.0 + 4.0 / p.N);
    return {v, v > 0.0};
}

}  // namespace qedpec
