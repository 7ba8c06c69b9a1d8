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
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qedpec/pauli.hpp"

namespace qedpec {

/// Polynomial in the fault weights aggregated by total degree.
///
/// coeff(d) holds the numeric value of the homogeneous degree-d part, so
/// truncation to degree <= K and products (which add degrees) are exact while
/// individual monomials are never stored. Degrees above max_degree() are dropped.
class DegreeSeries {
   public:
    DegreeSeries() : coeffs_(1, 0.0) {}
    explicit DegreeSeries(std::size_t max_degree) : coeffs_(max_degree + 1, 0.0) {}

    static DegreeSeries constant(double c, std::size_t max_degree) {
        DegreeSeries s(max_degree);
        s.coeffs_[0] = c;
        return s;
    }
    static DegreeSeries monomial(double c, std::size_t degree, std::size_t max_degree) {
        DegreeSeries s(max_degree);
        if (degree <= max_degree) {
            s.coeffs_[degree] = c;
        }
        return s;
    }

    std::size_t max_degree() const { return coeffs_.size() - 1; }
    double operator[](std::size_t d) const { return d < coeffs_.size() ? coeffs_[d] : 0.0; }
    double& operator[](std::size_t d) { return coeffs_.at(d); }
    const std::vector<double>& coeffs() const { return coeffs_; }

    /// Numeric value of the truncated polynomial at the block's weights.
    double evaluate() const {
        double s = 0.0;
        for (std::size_t d = coeffs_.size(); d-- > 0;) {
            s += coeffs_[d];
        }
        return s;
    }

    bool is_zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
    }

    DegreeSeries& operator+=(const DegreeSeries& o) {
        if (o.coeffs_.size() > coeffs_.size()) {
            coeffs_.resize(o.coeffs_.size(), 0.0);
        }
        for (std::size_t d = 0; d < o.coeffs_.size(); d++) {
            coeffs_[d] += o.coeffs_[d];
        }
        return *this;
    }
    DegreeSeries& operator-=(const DegreeSeries& o) {
        if (o.coeffs_.size() > coeffs_.size()) {
            coeffs_.resize(o.coeffs_.size(), 0.0);
        }
        for (std::size_t d = 0; d < o.coeffs_.size(); d++) {
            coeffs_[d] -= o.coeffs_[d];
        }
        return *this;
    }
    DegreeSeries& operator*=(double c) {
        for (double& v : coeffs_) {
            v *= c;
        }
        return *this;
    }
    friend DegreeSeries operator+(DegreeSeries a, const DegreeSeries& b) { return a += b; }
    friend DegreeSeries operator-(DegreeSeries a, const DegreeSeries& b) { return a -= b; }
    friend DegreeSeries operator*(DegreeSeries a, double c) { return a *= c; }
    friend DegreeSeries operator-(DegreeSeries a) { return a *= -1.0; }

    /// Truncated product: degrees above `max_degree` are dropped.
    static DegreeSeries product(const DegreeSeries& a, const DegreeSeries& b, std::size_t max_degree) {
        DegreeSeries out(max_degree);
        for (std::size_t i = 0; i < a.coeffs_.size() && i <= max_degree; i++) {
            if (a.coeffs_[i] == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < b.coeffs_.size() && i + j <= max_degree; j++) {
                out.coeffs_[i + j] += a.coeffs_[i] * b.coeffs_[j];
            }
        }
        return out;
    }

    /// Truncated reciprocal of a series with constant term 1.
    DegreeSeries reciprocal(std::size_t max_degree) const {
        if (std::abs(coeffs_[0] - 1.0) > 1e-12) {
            throw std::domain_error("series reciprocal requires unit constant term");
        }
        DegreeSeries out(max_degree);
        out.coeffs_[0] = 1.0;
        for (std::size_t d = 1; d <= max_degree; d++) {
            double acc = 0.0;
            for (std::size_t j = 1; j <= d; j++) {
                acc += (*this)[j] * out.coeffs_[d - j];
            }
            out.coeffs_[d] = -acc;
        }
        return out;
    }

    DegreeSeries truncated(std::size_t max_degree) const {
        DegreeSeries out(max_degree);
        for (std::size_t d = 0; d <= max_degree && d < coeffs_.size(); d++) {
            out.coeffs_[d] = coeffs_[d];
        }
        return out;
    }

    /// Smallest degree with a nonzero coefficient, or max_degree()+1 if zero.
    std::size_t lowest_degree() const {
        for (std::size_t d = 0; d < coeffs_.size(); d++) {
            if (coeffs_[d] != 0.0) {
                return d;
            }
        }
        return coeffs_.size();
    }

   private:
    std::vector<double> coeffs_;
};

/// Pauli channel with series coefficients: sum_P c_P(w) P(.)P^dagger.
class ChannelPoly {
   public:
    using Map = std::unordered_map<PauliString, DegreeSeries, PauliHash>;

    ChannelPoly() = default;
    ChannelPoly(std::size_t num_qubits, std::size_t max_degree) : num_qubits_(num_qubits), max_degree_(max_degree) {}

    static ChannelPoly identity(std::size_t num_qubits, std::size_t max_degree) {
        ChannelPoly c(num_qubits, max_degree);
        c.add(PauliString(num_qubits), DegreeSeries::constant(1.0, max_degree));
        return c;
    }

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t max_degree() const { return max_degree_; }
    const Map& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    void add(const PauliString& p, const DegreeSeries& s) {
        auto it = terms_.find(p);
        if (it == terms_.end()) {
            terms_.emplace(p, s.truncated(max_degree_));
        } else {
            it->second += s.truncated(max_degree_);
        }
    }

    const DegreeSeries* find(const PauliString& p) const {
        auto it = terms_.find(p);
        return it == terms_.end() ? nullptr : &it->second;
    }

    /// Series of P, or an all-zero series when absent.
    DegreeSeries coefficient(const PauliString& p) const {
        const DegreeSeries* s = find(p);
        return s ? *s : DegreeSeries(max_degree_);
    }

    void prune_zero_terms() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            it = it->second.is_zero() ? terms_.erase(it) : std::next(it);
        }
    }

    ChannelPoly& operator+=(const ChannelPoly& o) {
        for (const auto& [p, s] : o.terms_) {
            add(p, s);
        }
        return *this;
    }
    ChannelPoly& operator*=(double c) {
        for (auto& [p, s] : terms_) {
            s *= c;
        }
        return *this;
    }

    /// Composition a∘b of Pauli channels; Pauli channels compose by phase-free
    /// multiplication of their operators and the coefficient series multiply.
    static ChannelPoly compose(const ChannelPoly& a, const ChannelPoly& b, std::size_t max_degree) {
        ChannelPoly out(a.num_qubits_, max_degree);
        for (const auto& [pa, sa] : a.terms_) {
            const std::size_t da = sa.lowest_degree();
            if (da > max_degree) {
                continue;
            }
            for (const auto& [pb, sb] : b.terms_) {
                if (da + sb.lowest_degree() > max_degree) {
                    continue;
                }
                out.add(pa * pb, DegreeSeries::product(sa, sb, max_degree));
            }
        }
        return out;
    }

    /// Terms in canonical order (identity first, then by packed bits).
    std::vector<std::pair<PauliString, DegreeSeries>> sorted_terms() const {
        std::vector<std::pair<PauliString, DegreeSeries>> out(terms_.begin(), terms_.end());
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

   private:
    std::size_t num_qubits_ = 0;
    std::size_t max_degree_ = 0;
    Map terms_;
};

}  // namespace qedpec
