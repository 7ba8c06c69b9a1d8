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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qedpec {

/// Phase-free n-qubit Pauli operator stored as packed X and Z bit planes.
///
/// Qubit q lives in bit (q % 64) of word (q / 64). Unused high bits of the
/// last word are always zero, so word-wise comparisons and hashes are exact.
/// Multiplication drops the phase: only the (x, z) pair is tracked.
class PauliString {
   public:
    PauliString() = default;
    explicit PauliString(std::size_t num_qubits)
        : num_qubits_(num_qubits), xs_(num_words(num_qubits), 0), zs_(num_words(num_qubits), 0) {}

    /// Parses a string over {I, X, Y, Z} (qubit 0 leftmost). '_' is accepted as I.
    static PauliString from_string(std::string_view text) {
        PauliString p(text.size());
        for (std::size_t q = 0; q < text.size(); q++) {
            switch (text[q]) {
                case 'I':
                case '_':
                    break;
                case 'X':
                    p.set(q, true, false);
                    break;
                case 'Y':
                    p.set(q, true, true);
                    break;
                case 'Z':
                    p.set(q, false, true);
                    break;
                default:
                    throw std::invalid_argument("invalid Pauli character '" + std::string(1, text[q]) + "'");
            }
        }
        return p;
    }

    /// Single-qubit Pauli `kind` in {'X','Y','Z'} on qubit q of an n-qubit register.
    static PauliString single(std::size_t num_qubits, std::size_t q, char kind) {
        PauliString p(num_qubits);
        p.set_char(q, kind);
        return p;
    }

    static constexpr std::size_t num_words(std::size_t num_qubits) { return (num_qubits + 63) / 64; }

    std::size_t num_qubits() const { return num_qubits_; }

    bool x(std::size_t q) const { return (xs_[q >> 6] >> (q & 63)) & 1; }
    bool z(std::size_t q) const { return (zs_[q >> 6] >> (q & 63)) & 1; }

    void set(std::size_t q, bool x_bit, bool z_bit) {
        check_index(q);
        const std::uint64_t mask = std::uint64_t{1} << (q & 63);
        xs_[q >> 6] = x_bit ? (xs_[q >> 6] | mask) : (xs_[q >> 6] & ~mask);
        zs_[q >> 6] = z_bit ? (zs_[q >> 6] | mask) : (zs_[q >> 6] & ~mask);
    }

    void set_char(std::size_t q, char kind) {
        switch (kind) {
            case 'I':
                set(q, false, false);
                break;
            case 'X':
                set(q, true, false);
                break;
            case 'Y':
                set(q, true, true);
                break;
            case 'Z':
                set(q, false, true);
                break;
            default:
                throw std::invalid_argument("invalid Pauli character");
        }
    }

    char at(std::size_t q) const {
        static constexpr char table[4] = {'I', 'X', 'Z', 'Y'};
        return table[static_cast<int>(x(q)) | (static_cast<int>(z(q)) << 1)];
    }

    // Raw word access for the hot loops in propagation and sampling.
    std::span<std::uint64_t> x_words() { return xs_; }
    std::span<std::uint64_t> z_words() { return zs_; }
    std::span<const std::uint64_t> x_words() const { return xs_; }
    std::span<const std::uint64_t> z_words() const { return zs_; }

    /// In-place phase-free product (componentwise XOR).
    PauliString& operator*=(const PauliString& other) {
        check_same_size(other);
        for (std::size_t w = 0; w < xs_.size(); w++) {
            xs_[w] ^= other.xs_[w];
            zs_[w] ^= other.zs_[w];
        }
        return *this;
    }

    friend PauliString operator*(PauliString a, const PauliString& b) {
        a *= b;
        return a;
    }

    bool is_identity() const {
        for (std::size_t w = 0; w < xs_.size(); w++) {
            if (xs_[w] | zs_[w]) {
                return false;
            }
        }
        return true;
    }

    void clear() {
        std::fill(xs_.begin(), xs_.end(), 0);
        std::fill(zs_.begin(), zs_.end(), 0);
    }

    std::size_t weight() const {
        std::size_t total = 0;
        for (std::size_t w = 0; w < xs_.size(); w++) {
            total += static_cast<std::size_t>(std::popcount(xs_[w] | zs_[w]));
        }
        return total;
    }

    /// True iff the two operators commute (symplectic form is even).
    bool commutes_with(const PauliString& other) const {
        check_same_size(other);
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < xs_.size(); w++) {
            acc ^= (xs_[w] & other.zs_[w]) ^ (zs_[w] & other.xs_[w]);
        }
        return (std::popcount(acc) & 1) == 0;
    }

    std::string str() const {
        std::string out(num_qubits_, 'I');
        for (std::size_t q = 0; q < num_qubits_; q++) {
            out[q] = at(q);
        }
        return out;
    }

    /// Restriction to qubits [begin, begin + count).
    PauliString slice(std::size_t begin, std::size_t count) const {
        if (begin + count > num_qubits_) {
            throw std::out_of_range("PauliString::slice out of range");
        }
        PauliString out(count);
        for (std::size_t q = 0; q < count; q++) {
            out.set(q, x(begin + q), z(begin + q));
        }
        return out;
    }

    /// Strict weak order on the packed representation; identity sorts first.
    friend bool operator<(const PauliString& a, const PauliString& b) {
        if (a.num_qubits_ != b.num_qubits_) {
            return a.num_qubits_ < b.num_qubits_;
        }
        for (std::size_t w = 0; w < a.xs_.size(); w++) {
            if (a.xs_[w] != b.xs_[w]) {
                return a.xs_[w] < b.xs_[w];
            }
            if (a.zs_[w] != b.zs_[w]) {
                return a.zs_[w] < b.zs_[w];
            }
        }
        return false;
    }

    friend bool operator==(const PauliString& a, const PauliString& b) = default;

    std::size_t hash() const {
        std::size_t h = num_qubits_ * 0x9E3779B97F4A7C15ULL;
        for (std::size_t w = 0; w < xs_.size(); w++) {
            h ^= std::hash<std::uint64_t>{}(xs_[w] * 0xBF58476D1CE4E5B9ULL + w) + 0x9E3779B97F4A7C15ULL + (h << 6) +
                 (h >> 2);
            h ^= std::hash<std::uint64_t>{}(zs_[w] * 0x94D049BB133111EBULL + w) + 0x9E3779B97F4A7C15ULL + (h << 6) +
                 (h >> 2);
        }
        return h;
    }

   private:
    void check_index(std::size_t q) const {
        if (q >= num_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                    std::to_string(num_qubits_) + " qubits");
        }
    }
    void check_same_size(const PauliString& other) const {
        if (other.num_qubits_ != num_qubits_) {
            throw std::invalid_argument("Pauli dimension mismatch: " + std::to_string(num_qubits_) + " vs " +
                                        std::to_string(other.num_qubits_));
        }
    }

    std::size_t num_qubits_ = 0;
    std::vector<std::uint64_t> xs_;
    std::vector<std::uint64_t> zs_;
};

struct PauliHash {
    std::size_t operator()(const PauliString& p) const { return p.hash(); }
};

inline PauliString multiply(const PauliString& a, const PauliString& b) { return a * b; }

inline bool commutes(const PauliString& a, const PauliString& b) { return a.commutes_with(b); }

inline std::size_t weight(const PauliString& a) { return a.weight(); }

}  // namespace qedpec
