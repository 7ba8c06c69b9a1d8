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
#include <stdexcept>
#include <string>
#include <vector>

#include "qedpec/pauli.hpp"

namespace qedpec {

/// Syndrome bits packed into a word; bit a is set iff the Pauli anticommutes
/// with generator a. Codes are limited to 64 generators.
using SyndromeMask = std::uint64_t;

/// Stabilizer code given by commuting generators and k logical (X, Z) pairs.
class StabilizerCode {
   public:
    StabilizerCode(std::string name, std::size_t n, std::vector<PauliString> generators,
                   std::vector<PauliString> logical_x, std::vector<PauliString> logical_z)
        : name_(std::move(name)),
          n_(n),
          generators_(std::move(generators)),
          logical_x_(std::move(logical_x)),
          logical_z_(std::move(logical_z)) {
        if (generators_.size() > 64) {
            throw std::invalid_argument("at most 64 stabilizer generators are supported");
        }
        if (logical_x_.size() != logical_z_.size()) {
            throw std::invalid_argument("logical X and Z lists differ in length");
        }
        auto check_width = [&](const std::vector<PauliString>& ops) {
            for (const auto& p : ops) {
                if (p.num_qubits() != n_) {
                    throw std::invalid_argument("code operator width mismatch");
                }
            }
        };
        check_width(generators_);
        check_width(logical_x_);
        check_width(logical_z_);
        for (std::size_t a = 0; a < generators_.size(); a++) {
            for (std::size_t b = a + 1; b < generators_.size(); b++) {
                if (!commutes(generators_[a], generators_[b])) {
                    throw std::invalid_argument("stabilizer generators do not commute");
                }
            }
        }
        for (std::size_t j = 0; j < logical_x_.size(); j++) {
            if (syndrome_mask(logical_x_[j]) != 0 || syndrome_mask(logical_z_[j]) != 0) {
                throw std::invalid_argument("logical operator does not commute with the stabilizers");
            }
            for (std::size_t k = 0; k < logical_z_.size(); k++) {
                if (commutes(logical_x_[j], logical_z_[k]) == (j == k)) {
                    throw std::invalid_argument("logical operators are not canonically paired");
                }
            }
        }
    }

    const std::string& name() const { return name_; }
    std::size_t n() const { return n_; }
    std::size_t k() const { return logical_x_.size(); }
    const std::vector<PauliString>& generators() const { return generators_; }
    const std::vector<PauliString>& logical_x() const { return logical_x_; }
    const std::vector<PauliString>& logical_z() const { return logical_z_; }

    SyndromeMask syndrome_mask(const PauliString& p) const {
        if (p.num_qubits() != n_) {
            throw std::invalid_argument("Pauli width does not match code length");
        }
        SyndromeMask mask = 0;
        for (std::size_t a = 0; a < generators_.size(); a++) {
            if (!p.commutes_with(generators_[a])) {
                mask |= SyndromeMask{1} << a;
            }
        }
        return mask;
    }

   private:
    std::string name_;
    std::size_t n_;
    std::vector<PauliString> generators_;
    std::vector<PauliString> logical_x_;
    std::vector<PauliString> logical_z_;
};

/// [[n, n-2, 2]] Iceberg code: S1 = Z^n, S2 = X^n, Zbar_j = Z0 Z_{j+1},
/// Xbar_j = X1 X_{j+1} for j = 1..n-2.
inline StabilizerCode iceberg(std::size_t n) {
    if (n < 4) {
        throw std::invalid_argument("Iceberg code requires n >= 4");
    }
    if (n % 2) {
        throw std::invalid_argument("Iceberg code requires even n");
    }
    PauliString all_z(n);
    PauliString all_x(n);
    for (std::size_t q = 0; q < n; q++) {
        all_z.set(q, false, true);
        all_x.set(q, true, false);
    }
    std::vector<PauliString> lx;
    std::vector<PauliString> lz;
    for (std::size_t j = 1; j <= n - 2; j++) {
        PauliString z(n);
        z.set(0, false, true);
        z.set(j + 1, false, true);
        PauliString x(n);
        x.set(1, true, false);
        x.set(j + 1, true, false);
        lz.push_back(std::move(z));
        lx.push_back(std::move(x));
    }
    return StabilizerCode("iceberg", n, {all_z, all_x}, std::move(lx), std::move(lz));
}

/// Syndrome as a bit vector (one entry per generator).
inline std::vector<std::uint8_t> syndrome(const StabilizerCode& code, const PauliString& p) {
    const SyndromeMask mask = code.syndrome_mask(p);
    std::vector<std::uint8_t> bits(code.generators().size());
    for (std::size_t a = 0; a < bits.size(); a++) {
        bits[a] = static_cast<std::uint8_t>((mask >> a) & 1);
    }
    return bits;
}

inline bool accepts(const StabilizerCode& code, const PauliString& p) { return code.syndrome_mask(p) == 0; }

}  // namespace qedpec
