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
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qedpec/clifford.hpp"
#include "qedpec/code.hpp"
#include "qedpec/noise.hpp"
#include "qedpec/series.hpp"

namespace qedpec {

/// Signals an internal inconsistency in a compiled table (e.g. the formal
/// inverse identity failing). Never expected for valid inputs.
class CompilationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// How the accepted branches are normalized by the truncated success probability.
///  - Series: truncated power-series reciprocal of P_K,success (residual weights
///    equal the raw fault weights at first order).
///  - Numeric: divide by the evaluated P_K,success (first-order residual weights
///    w / p_success).
enum class Normalization { Series, Numeric };

inline const char* normalization_name(Normalization n) { return n == Normalization::Series ? "series" : "numeric"; }

struct CompileOptions {
    std::size_t order = 1;
    Normalization normalization = Normalization::Numeric;
    double prune_threshold = 1e-15;  // relative to gamma
    bool enforce_validity = true;
    bool compute_eta = false;
    std::size_t eta_max_faults = 20;
    double residue_tolerance = 1e-12;
};

/// e_0..e_K of the weights (running elementary-symmetric accumulation).
inline std::vector<double> elementary_symmetric(std::span<const double> weights, std::size_t max_degree) {
    std::vector<double> e(max_degree + 1, 0.0);
    e[0] = 1.0;
    for (double w : weights) {
        for (std::size_t l = max_degree; l >= 1; l--) {
            e[l] += w * e[l - 1];
        }
    }
    return e;
}

namespace detail {

/// a_I^(K) from the precomputed e_l of all weights: removes I's members from the
/// generating function prod(1 + w t) and applies the alternating signs.
inline DegreeSeries branch_series(std::span<const std::size_t> subset, std::span<const double> weights,
                                  std::span<const double> e_all, std::size_t order) {
    const std::size_t r = subset.size();
    DegreeSeries out(order);
    if (r > order) {
        return out;
    }
    const std::size_t depth = order - r;
    std::vector<double> c(e_all.begin(), e_all.begin() + static_cast<std::ptrdiff_t>(depth + 1));
    double w_prod = 1.0;
    for (std::size_t i : subset) {
        const double w = weights[i];
        w_prod *= w;
        for (std::size_t l = 1; l <= depth; l++) {
            c[l] -= w * c[l - 1];
        }
    }
    for (std::size_t l = 0; l <= depth; l++) {
        out[r + l] = w_prod * ((l & 1) ? -c[l] : c[l]);
    }
    return out;
}

/// Calls visit(subset) for every subset of {0..m-1} with |subset| <= max_size,
/// by increasing size and lexicographically within a size.
template <class Visitor>
void for_each_subset(std::size_t m, std::size_t max_size, Visitor&& visit) {
    std::vector<std::size_t> idx;
    visit(std::span<const std::size_t>(idx));
    for (std::size_t r = 1; r <= std::min(max_size, m); r++) {
        idx.resize(r);
        for (std::size_t k = 0; k < r; k++) {
            idx[k] = k;
        }
        while (true) {
            visit(std::span<const std::size_t>(idx));
            std::size_t k = r;
            while (k > 0 && idx[k - 1] == m - r + (k - 1)) {
                k--;
            }
            if (k == 0) {
                break;
            }
            idx[k - 1]++;
            for (std::size_t j = k; j < r; j++) {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

}  // namespace detail

/// K-th order branch coefficient a_I^(K) of the fault subset I (ids index into faults).
inline DegreeSeries branch_coefficient(std::span<const std::size_t> subset, const BlockFaults& faults,
                                       std::size_t order) {
    if (subset.size() > order) {
        throw std::invalid_argument("branch size exceeds truncation order");
    }
    for (std::size_t i : subset) {
        if (i >= faults.size()) {
            throw std::out_of_range("fault id out of range");
        }
    }
    const auto weights = faults.weights();
    const auto e_all = elementary_symmetric(weights, order);
    return detail::branch_series(subset, weights, e_all, order);
}

inline std::size_t binomial_sum(std::size_t m, std::size_t order) {
    std::size_t total = 0;
    std::size_t c = 1;
    for (std::size_t r = 0; r <= std::min(order, m); r++) {
        total += c;
        c = c * (m - r) / (r + 1);
    }
    return total;
}

/// Single faults propagated to the block end, with their syndromes.
struct PropagatedFaults {
    std::vector<PauliString> paulis;
    std::vector<SyndromeMask> masks;
};

inline PropagatedFaults propagate_block_faults(const BlockFaults& faults, const LayeredCircuit& circuit,
                                               const StabilizerCode& code) {
    PropagatedFaults out;
    out.paulis.reserve(faults.size());
    out.masks.reserve(faults.size());
    for (const auto& f : faults.faults) {
        out.paulis.push_back(conjugate_forward(f.pauli, circuit, f.layer, faults.end_layer));
        out.masks.push_back(code.syndrome_mask(out.paulis.back()));
    }
    return out;
}

struct Branch {
    std::vector<std::size_t> fault_ids;
    PauliString propagated;
    DegreeSeries coefficient;
    bool accepted = false;
};

/// Every fault subset with |I| <= K, its block-end Pauli, coefficient and QED verdict.
inline std::vector<Branch> enumerate_accepted_branches(const BlockFaults& faults, const LayeredCircuit& circuit,
                                                       const StabilizerCode& code, std::size_t order) {
    if (faults.total_weight >= kValidityLimit) {
        throw ValidityError("block total weight outside the validity regime");
    }
    const auto prop = propagate_block_faults(faults, circuit, code);
    const auto weights = faults.weights();
    const auto e_all = elementary_symmetric(weights, order);
    std::vector<Branch> out;
    out.reserve(binomial_sum(faults.size(), order));
    detail::for_each_subset(faults.size(), order, [&](std::span<const std::size_t> subset) {
        Branch b;
        b.fault_ids.assign(subset.begin(), subset.end());
        b.propagated = PauliString(circuit.width());
        for (std::size_t i : subset) {
            b.propagated *= prop.paulis[i];
        }
        b.coefficient = detail::branch_series(subset, weights, e_all, order);
        b.accepted = accepts(code, b.propagated);
        out.push_back(std::move(b));
    });
    return out;
}

/// Normalized truncated post-selected channel id + R_K, and P_K,success.
struct ReducedChannel {
    ChannelPoly channel;
    DegreeSeries p_success;
    Normalization normalization = Normalization::Series;

    double p_success_value() const { return p_success.evaluate(); }
};

namespace detail {

inline ReducedChannel normalize_accepted(const ChannelPoly& unnormalized, const DegreeSeries& p_success,
                                         std::size_t order, Normalization mode) {
    if (std::abs(p_success[0] - 1.0) > 1e-12) {
        throw CompilationError("P_K,success has constant term != 1");
    }
    const std::size_t n = unnormalized.num_qubits();
    const PauliString id(n);
    ReducedChannel out{ChannelPoly(n, order), p_success, mode};
    const DegreeSeries recip = p_success.reciprocal(order);
    const double inv_value = 1.0 / p_success.evaluate();
    DegreeSeries others(order);
    for (const auto& [p, s] : unnormalized.terms()) {
        if (p == id) {
            continue;
        }
        DegreeSeries t = mode == Normalization::Series ? DegreeSeries::product(s, recip, order) : s * inv_value;
        others += t;
        out.channel.add(p, t);
    }
    // Trace preservation fixes the identity term.
    out.channel.add(id, DegreeSeries::constant(1.0, order) - others);
    out.channel.prune_zero_terms();
    return out;
}

}  // namespace detail

/// Builds id + R_K from enumerated branches (only accepted ones contribute).
inline ReducedChannel reduced_channel(const std::vector<Branch>& branches, std::size_t num_qubits, std::size_t order,
                                      Normalization mode = Normalization::Series) {
    ChannelPoly acc(num_qubits, order);
    DegreeSeries p_success(order);
    bool have_empty = false;
    for (const auto& b : branches) {
        if (!b.accepted) {
            continue;
        }
        have_empty |= b.fault_ids.empty();
        acc.add(b.propagated, b.coefficient);
        p_success += b.coefficient;
    }
    if (!have_empty) {
        throw std::invalid_argument("the empty branch must be present and accepted");
    }
    return detail::normalize_accepted(acc, p_success, order, mode);
}

/// Truncated Neumann inverse sum_{r<=K} (-R)^r of a reduced channel id + R.
inline ChannelPoly neumann_invert(const ChannelPoly& reduced, std::size_t order) {
    const std::size_t n = reduced.num_qubits();
    const PauliString id(n);
    const DegreeSeries* id_series = reduced.find(id);
    if (id_series == nullptr || std::abs((*id_series)[0] - 1.0) > 1e-12) {
        throw std::invalid_argument("reduced channel must have unit identity coefficient at degree 0");
    }
    ChannelPoly minus_r(n, order);
    for (const auto& [p, s] : reduced.terms()) {
        DegreeSeries t = s.truncated(order);
        if (p == id) {
            t[0] -= 1.0;
        }
        t *= -1.0;
        if (!t.is_zero()) {
            minus_r.add(p, t);
        }
    }
    ChannelPoly result = ChannelPoly::identity(n, order);
    ChannelPoly power = ChannelPoly::identity(n, order);
    for (std::size_t r = 1; r <= order; r++) {
        power = ChannelPoly::compose(power, minus_r, order);
        result += power;
    }
    result.prune_zero_terms();
    return result;
}

struct PecEntry {
    PauliString pauli;
    double prob = 0.0;
    int sign = 1;
};

/// Compiled per-block quasiprobability table. entries[0] is the identity.
struct PecTable {
    std::size_t block = 0;
    std::size_t order = 0;
    double gamma = 1.0;
    double p_success = 1.0;
    std::vector<PecEntry> entries;

    /// Signed coefficient c_P = gamma * sign * prob of entry k.
    double coefficient(std::size_t k) const { return gamma * entries[k].sign * entries[k].prob; }

    static PecTable identity(std::size_t num_qubits, std::size_t block = 0) {
        PecTable t;
        t.block = block;
        t.entries.push_back({PauliString(num_qubits), 1.0, 1});
        return t;
    }
};

/// Evaluates the inverse's series and converts them to (P, q_P, sign) entries.
inline PecTable to_sampling_table(const ChannelPoly& inverse, const DegreeSeries& p_success, std::size_t block,
                                  std::size_t order, double prune_threshold = 1e-15) {
    const std::size_t n = inverse.num_qubits();
    const PauliString id(n);
    std::vector<std::pair<PauliString, double>> coeffs;
    double gamma = 0.0;
    for (auto& [p, s] : inverse.sorted_terms()) {
        const double c = s.evaluate();
        coeffs.emplace_back(p, c);
        gamma += std::abs(c);
    }
    PecTable table;
    table.block = block;
    table.order = order;
    table.p_success = p_success.evaluate();
    double kept = 0.0;
    bool have_identity = false;
    for (const auto& [p, c] : coeffs) {
        const bool is_id = p == id;
        if (!is_id && std::abs(c) < prune_threshold * gamma) {
            continue;
        }
        if (is_id) {
            if (c <= 0.0) {
                throw CompilationError("identity coefficient of the inverse is not positive");
            }
            have_identity = true;
        }
        kept += std::abs(c);
        table.entries.push_back({p, std::abs(c), c < 0.0 ? -1 : 1});
    }
    if (!have_identity) {
        throw CompilationError("inverse channel lacks an identity term");
    }
    if (kept < 1.0 - 1e-12) {
        throw CompilationError("PEC norm below 1: " + std::to_string(kept));
    }
    table.gamma = kept;
    for (auto& e : table.entries) {
        e.prob /= kept;
    }
    // Identity first (it sorts first already, but keep the invariant explicit).
    std::stable_partition(table.entries.begin(), table.entries.end(),
                          [&](const PecEntry& e) { return e.pauli.is_identity(); });
    return table;
}

struct ZetaResult {
    double zeta = 0.0;               // sum_P |b_P| of inverse∘reduced - id
    double low_degree_residue = 0.0;  // max |b_P,d| over d <= K (must vanish)
};

/// l1 certificate of the compiled inverse: composes without truncation at K.
inline ZetaResult zeta_certificate(const ChannelPoly& inverse, const ChannelPoly& reduced, std::size_t order,
                                   double tolerance = 1e-12) {
    const std::size_t n = inverse.num_qubits();
    const std::size_t full = 2 * order;
    ChannelPoly prod = ChannelPoly::compose(inverse, reduced, full);
    prod.add(PauliString(n), DegreeSeries::constant(-1.0, full));
    ZetaResult out;
    for (const auto& [p, s] : prod.terms()) {
        for (std::size_t d = 0; d <= order; d++) {
            out.low_degree_residue = std::max(out.low_degree_residue, std::abs(s[d]));
        }
        out.zeta += std::abs(s.evaluate());
    }
    if (out.low_degree_residue > tolerance) {
        throw CompilationError("formal inverse identity violated: low-degree residue " +
                               std::to_string(out.low_degree_residue));
    }
    return out;
}

/// Exact all-order accepted channel by full 2^m expansion.
struct ExactReducedChannel {
    std::unordered_map<PauliString, double, PauliHash> coefficients;  // normalized
    double p_success = 0.0;
};

inline ExactReducedChannel exact_reduced_channel(const BlockFaults& faults, const PropagatedFaults& prop,
                                                 std::size_t num_qubits, std::size_t max_faults = 20) {
    const std::size_t m = faults.size();
    if (m > max_faults) {
        throw std::invalid_argument("exact expansion limited to " + std::to_string(max_faults) + " faults, got " +
                                    std::to_string(m));
    }
    ExactReducedChannel out;
    std::vector<PauliString> stack(m + 1, PauliString(num_qubits));
    // Depth-first over include/exclude decisions so each leaf probability is an
    // exact product rather than an incrementally updated ratio.
    auto recurse = [&](auto&& self, std::size_t i, double prob, SyndromeMask mask) -> void {
        if (i == m) {
            if (mask == 0) {
                out.coefficients[stack[m]] += prob;
                out.p_success += prob;
            }
            return;
        }
        const double w = faults.faults[i].weight;
        stack[i + 1] = stack[i];
        self(self, i + 1, prob * (1.0 - w), mask);
        stack[i + 1] = stack[i] * prop.paulis[i];
        self(self, i + 1, prob * w, mask ^ prop.masks[i]);
    };
    recurse(recurse, 0, 1.0, 0);
    for (auto& [p, c] : out.coefficients) {
        c /= out.p_success;
    }
    return out;
}

/// l1 distance between the exact normalized accepted channel and id + R_K.
inline double eta_bruteforce(const BlockFaults& faults, const PropagatedFaults& prop, const ChannelPoly& reduced,
                             std::size_t max_faults = 20) {
    const auto exact = exact_reduced_channel(faults, prop, reduced.num_qubits(), max_faults);
    double eta = 0.0;
    for (const auto& [p, c] : exact.coefficients) {
        const DegreeSeries* s = reduced.find(p);
        eta += std::abs(c - (s ? s->evaluate() : 0.0));
    }
    for (const auto& [p, s] : reduced.terms()) {
        if (!exact.coefficients.count(p)) {
            eta += std::abs(s.evaluate());
        }
    }
    return eta;
}

struct Certificates {
    double zeta = 0.0;
    std::optional<double> eta;
    double gamma = 1.0;
    double low_degree_residue = 0.0;

    /// zeta + gamma * eta when eta is available, otherwise zeta alone.
    double epsilon() const { return zeta + (eta ? gamma * *eta : 0.0); }
};

struct CompiledBlock {
    std::size_t block = 0;
    std::size_t num_faults = 0;
    double total_weight = 0.0;
    double accepted_single_weight = 0.0;  // sum of accepted single-fault weights
    std::size_t branch_count = 0;
    std::size_t accepted_branch_count = 0;
    ReducedChannel reduced;
    ChannelPoly inverse;
    PecTable table;
    Certificates certificates;
};

/// Phase 1 for one block given its (nominal) faults and their propagation.
inline CompiledBlock compile_block(const BlockFaults& faults, const PropagatedFaults& prop, std::size_t num_qubits,
                                   const CompileOptions& opts) {
    if (opts.enforce_validity && faults.total_weight >= kValidityLimit) {
        throw ValidityError("block " + std::to_string(faults.block) + " has W = " +
                            std::to_string(faults.total_weight) + " >= 0.5");
    }
    const std::size_t order = opts.order;
    const auto weights = faults.weights();
    const auto e_all = elementary_symmetric(weights, order);

    CompiledBlock out;
    out.block = faults.block;
    out.num_faults = faults.size();
    out.total_weight = faults.total_weight;

    ChannelPoly acc(num_qubits, order);
    DegreeSeries p_success(order);
    std::vector<SyndromeMask> masks_on_path(order + 1, 0);
    detail::for_each_subset(faults.size(), order, [&](std::span<const std::size_t> subset) {
        out.branch_count++;
        SyndromeMask mask = 0;
        for (std::size_t i : subset) {
            mask ^= prop.masks[i];
        }
        if (mask != 0) {
            return;
        }
        out.accepted_branch_count++;
        PauliString p(num_qubits);
        for (std::size_t i : subset) {
            p *= prop.paulis[i];
        }
        if (subset.size() == 1) {
            out.accepted_single_weight += weights[subset[0]];
        }
        const DegreeSeries a = detail::branch_series(subset, weights, e_all, order);
        acc.add(p, a);
        p_success += a;
    });

    out.reduced = detail::normalize_accepted(acc, p_success, order, opts.normalization);
    out.inverse = neumann_invert(out.reduced.channel, order);
    out.table = to_sampling_table(out.inverse, out.reduced.p_success, faults.block, order, opts.prune_threshold);
    const auto zeta = zeta_certificate(out.inverse, out.reduced.channel, order, opts.residue_tolerance);
    out.certificates.zeta = zeta.zeta;
    out.certificates.low_degree_residue = zeta.low_degree_residue;
    out.certificates.gamma = out.table.gamma;
    if (opts.compute_eta && faults.size() <= opts.eta_max_faults) {
        out.certificates.eta = eta_bruteforce(faults, prop, out.reduced.channel, opts.eta_max_faults);
    }
    return out;
}

inline CompiledBlock compile_block(const LayeredCircuit& circuit, std::size_t block, const StabilizerCode& code,
                                   const NoiseSpec& spec, const CompileOptions& opts) {
    const auto faults = block_faults(circuit, block, spec, opts.enforce_validity);
    const auto prop = propagate_block_faults(faults, circuit, code);
    return compile_block(faults, prop, circuit.width(), opts);
}

/// Text form: a header line then one record per entry (Pauli, probability, sign).
inline void write_table(std::ostream& out, const PecTable& table) {
    const auto old_precision = out.precision(17);
    out << "# block " << table.block << " K " << table.order << " gamma " << table.gamma << " p_success "
        << table.p_success << " entries " << table.entries.size() << "\n";
    for (const auto& e : table.entries) {
        out << e.pauli.str() << " " << e.prob << " " << (e.sign < 0 ? '-' : '+') << "\n";
    }
    out.precision(old_precision);
}

inline PecTable read_table(std::istream& in) {
    PecTable t;
    std::string hash, word;
    std::size_t count = 0;
    in >> hash >> word >> t.block >> word >> t.order >> word >> t.gamma >> word >> t.p_success >> word >> count;
    if (!in || hash != "#") {
        throw std::invalid_argument("malformed PEC table header");
    }
    for (std::size_t k = 0; k < count; k++) {
        std::string pauli;
        char sign = '+';
        double prob = 0.0;
        in >> pauli >> prob >> sign;
        if (!in) {
            throw std::invalid_argument("truncated PEC table");
        }
        t.entries.push_back({PauliString::from_string(pauli), prob, sign == '-' ? -1 : 1});
    }
    return t;
}

}  // namespace qedpec
