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

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qedpec/analytics.hpp"
#include "qedpec/compiler.hpp"
#include "qedpec/sampler.hpp"

namespace qedpec {

enum class Task { Compile, Run, Sweep, Toy, Certify, Baseline };

inline const char* task_name(Task t) {
    switch (t) {
        case Task::Compile:
            return "compile";
        case Task::Run:
            return "run";
        case Task::Sweep:
            return "sweep";
        case Task::Toy:
            return "toy";
        case Task::Certify:
            return "certify";
        case Task::Baseline:
            return "baseline";
    }
    return "?";
}

inline std::optional<Task> parse_task(const std::string& s) {
    for (Task t : {Task::Compile, Task::Run, Task::Sweep, Task::Toy, Task::Certify, Task::Baseline}) {
        if (s == task_name(t)) {
            return t;
        }
    }
    return std::nullopt;
}

struct ToyConfig {
    std::vector<double> N{16.0};
    std::vector<double> gamma_T{1.0};
    std::vector<double> tau_fraction{1.0, 0.5, 0.25, 0.125};  // tau = fraction * T_total
    double gamma_rate = 1.0;
};

struct ExperimentConfig {
    std::optional<Task> task;
    std::string code = "iceberg";
    std::vector<std::size_t> n;
    std::vector<std::size_t> T{1};
    std::size_t K = 1;
    NoiseSpec noise{1e-4, 1e-3};
    std::vector<double> r_max{0.0};
    std::uint64_t drift_seed = 0;
    SyndromeModel::Kind syndrome = SyndromeModel::Kind::Ideal;
    std::vector<double> p_m{0.0};
    std::size_t m_ancilla = 0;     // 0: use m_fraction
    double m_fraction = 0.5;       // m = max(1, round(fraction * n))
    bool extraction_first_order = false;
    std::uint64_t shots = 0;       // 0: analytic columns only
    double target_stderr = 0.0;
    SamplingMode mode = SamplingMode::Plain;
    bool pec = true;
    Normalization normalization = Normalization::Numeric;
    std::uint64_t chunk_size = 4096;
    bool enforce_validity = true;
    ToyConfig toy;
    std::uint64_t seed = 1;
    std::string output;
    std::string canonical;  // normalized JSON text, hashed into output rows

    std::size_t ancillas_for(std::size_t nq) const {
        if (m_ancilla > 0) {
            return m_ancilla;
        }
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m_fraction * static_cast<double>(nq))));
    }
};

/// All problems found while validating a configuration.
class ConfigError : public std::runtime_error {
   public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string>& errors() const { return errors_; }

   private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string out;
        for (const auto& e : errors) {
            out += (out.empty() ? "" : "\n") + e;
        }
        return out;
    }
    std::vector<std::string> errors_;
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

using json = nlohmann::json;

class ConfigReader {
   public:
    std::vector<std::string> errors;

    void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) {
            errors.push_back(where + ": expected an object");
            return;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : obj.items()) {
            if (!ok.count(k)) {
                errors.push_back(where + ": unknown key '" + k + "'");
            }
        }
    }

    template <class T>
    void get(const json& obj, const char* key, const std::string& where, T& out) {
        if (!obj.contains(key)) {
            return;
        }
        try {
            out = obj.at(key).get<T>();
        } catch (const std::exception&) {
            errors.push_back(where + "." + key + ": wrong type");
        }
    }

    /// Integer, list of integers, or {"from", "to", "step"}.
    std::vector<std::size_t> int_list(const json& v, const std::string& where) {
        std::vector<std::size_t> out;
        auto as_uint = [&](const json& x) -> std::optional<std::size_t> {
            if (!x.is_number_integer() || x.get<long long>() < 0) {
                errors.push_back(where + ": expected a nonnegative integer");
                return std::nullopt;
            }
            return x.get<std::size_t>();
        };
        if (v.is_array()) {
            for (const auto& x : v) {
                if (auto u = as_uint(x)) {
                    out.push_back(*u);
                }
            }
        } else if (v.is_object()) {
            check_keys(v, where, {"from", "to", "step"});
            std::size_t from = 0, to = 0, step = 1;
            if (!v.contains("from") || !v.contains("to")) {
                errors.push_back(where + ": range needs 'from' and 'to'");
                return out;
            }
            if (auto u = as_uint(v.at("from"))) from = *u;
            if (auto u = as_uint(v.at("to"))) to = *u;
            if (v.contains("step")) {
                if (auto u = as_uint(v.at("step"))) step = *u;
            }
            if (step == 0) {
                errors.push_back(where + ": step must be >= 1");
                return out;
            }
            for (std::size_t x = from; x <= to; x += step) {
                out.push_back(x);
            }
        } else if (auto u = as_uint(v)) {
            out.push_back(*u);
        }
        return out;
    }

    std::vector<double> double_list(const json& v, const std::string& where) {
        std::vector<double> out;
        auto one = [&](const json& x) {
            if (!x.is_number()) {
                errors.push_back(where + ": expected a number");
                return;
            }
            out.push_back(x.get<double>());
        };
        if (v.is_array()) {
            for (const auto& x : v) {
                one(x);
            }
        } else {
            one(v);
        }
        return out;
    }
};

inline std::string position_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); i++) {
        if (text[i] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses and validates a JSON configuration. Every problem is collected and
/// reported together; unknown keys are errors.
inline ExperimentConfig validate_config(const std::string& text) {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is one past the offending character.
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        std::string msg = e.what();
        const auto col = msg.find("column");
        const auto sep = col == std::string::npos ? std::string::npos : msg.find(": ", col);
        if (sep != std::string::npos) {
            msg = msg.substr(sep + 2);
        }
        throw ConfigError({"parse error at " + detail::position_of(text, at) + ": " + msg});
    }
    detail::ConfigReader r;
    ExperimentConfig c;
    r.check_keys(root, "config",
                 {"task", "code", "T", "K", "noise", "syndrome", "sampling", "toy", "seed", "output", "validity"});
    if (!r.errors.empty()) {
        throw ConfigError(r.errors);
    }

    if (root.contains("task")) {
        std::string t;
        r.get(root, "task", "config", t);
        c.task = parse_task(t);
        if (!c.task) {
            r.errors.push_back("config.task: unknown task '" + t + "'");
        }
    }
    if (root.contains("code")) {
        const json& code = root.at("code");
        r.check_keys(code, "code", {"name", "n"});
        r.get(code, "name", "code", c.code);
        if (c.code != "iceberg") {
            r.errors.push_back("code.name: only 'iceberg' is available");
        }
        if (code.is_object() && code.contains("n")) {
            c.n = r.int_list(code.at("n"), "code.n");
        }
    }
    if (root.contains("T")) {
        c.T = r.int_list(root.at("T"), "T");
    }
    if (root.contains("K")) {
        const json& k = root.at("K");
        if (!k.is_number_integer() || k.get<long long>() < 0) {
            r.errors.push_back("K: must be an integer >= 0");
        } else {
            c.K = k.get<std::size_t>();
        }
    }
    if (root.contains("noise")) {
        const json& nz = root.at("noise");
        r.check_keys(nz, "noise", {"p1", "p2", "r_max", "drift_seed"});
        r.get(nz, "p1", "noise", c.noise.p1);
        r.get(nz, "p2", "noise", c.noise.p2);
        r.get(nz, "drift_seed", "noise", c.drift_seed);
        if (nz.is_object() && nz.contains("r_max")) {
            c.r_max = r.double_list(nz.at("r_max"), "noise.r_max");
        }
    }
    if (root.contains("syndrome")) {
        const json& sy = root.at("syndrome");
        r.check_keys(sy, "syndrome", {"model", "p_m", "m_ancilla", "m_fraction", "first_order_extension"});
        std::string model = "ideal";
        r.get(sy, "model", "syndrome", model);
        if (model == "ideal") {
            c.syndrome = SyndromeModel::Kind::Ideal;
        } else if (model == "readout") {
            c.syndrome = SyndromeModel::Kind::ReadoutFlip;
        } else if (model == "cat") {
            c.syndrome = SyndromeModel::Kind::CatExtraction;
        } else {
            r.errors.push_back("syndrome.model: expected ideal, readout or cat");
        }
        if (sy.is_object() && sy.contains("p_m")) {
            c.p_m = r.double_list(sy.at("p_m"), "syndrome.p_m");
        }
        r.get(sy, "m_ancilla", "syndrome", c.m_ancilla);
        r.get(sy, "m_fraction", "syndrome", c.m_fraction);
        r.get(sy, "first_order_extension", "syndrome", c.extraction_first_order);
    }
    if (root.contains("sampling")) {
        const json& sa = root.at("sampling");
        r.check_keys(sa, "sampling",
                     {"shots", "target_stderr", "mode", "pec", "normalization", "chunk_size"});
        r.get(sa, "shots", "sampling", c.shots);
        r.get(sa, "target_stderr", "sampling", c.target_stderr);
        r.get(sa, "pec", "sampling", c.pec);
        r.get(sa, "chunk_size", "sampling", c.chunk_size);
        std::string mode = "plain";
        r.get(sa, "mode", "sampling", mode);
        if (mode == "plain") {
            c.mode = SamplingMode::Plain;
        } else if (mode == "stratified") {
            c.mode = SamplingMode::Stratified;
        } else if (mode == "conditioned") {
            c.mode = SamplingMode::Conditioned;
        } else {
            r.errors.push_back("sampling.mode: expected plain, stratified or conditioned");
        }
        std::string norm = "numeric";
        r.get(sa, "normalization", "sampling", norm);
        if (norm == "numeric") {
            c.normalization = Normalization::Numeric;
        } else if (norm == "series") {
            c.normalization = Normalization::Series;
        } else {
            r.errors.push_back("sampling.normalization: expected numeric or series");
        }
    }
    if (root.contains("toy")) {
        const json& toy = root.at("toy");
        r.check_keys(toy, "toy", {"N", "gamma_T", "tau_fraction", "gamma_rate"});
        if (toy.is_object()) {
            if (toy.contains("N")) c.toy.N = r.double_list(toy.at("N"), "toy.N");
            if (toy.contains("gamma_T")) c.toy.gamma_T = r.double_list(toy.at("gamma_T"), "toy.gamma_T");
            if (toy.contains("tau_fraction")) {
                c.toy.tau_fraction = r.double_list(toy.at("tau_fraction"), "toy.tau_fraction");
            }
        }
        r.get(toy, "gamma_rate", "toy", c.toy.gamma_rate);
    }
    r.get(root, "seed", "config", c.seed);
    r.get(root, "output", "config", c.output);
    if (root.contains("validity")) {
        const json& v = root.at("validity");
        r.check_keys(v, "validity", {"enforce"});
        r.get(v, "enforce", "validity", c.enforce_validity);
    }

    // Range and invariant checks.
    const bool needs_n = !c.task || (*c.task != Task::Toy);
    if (needs_n && c.n.empty()) {
        r.errors.push_back("code.n: missing (required for this task)");
    }
    for (std::size_t nq : c.n) {
        if (nq < 4) {
            r.errors.push_back("code.n: " + std::to_string(nq) + " < 4");
        } else if (nq % 2 != 0 && (!c.task || *c.task != Task::Baseline)) {
            r.errors.push_back("code.n: " + std::to_string(nq) + " is odd (iceberg code needs even n)");
        }
    }
    if (c.T.empty()) {
        r.errors.push_back("T: empty range");
    }
    for (std::size_t t : c.T) {
        if (t == 0) {
            r.errors.push_back("T: must be >= 1");
        }
    }
    if (!(c.noise.p1 >= 0.0 && c.noise.p1 < 1.0)) r.errors.push_back("noise.p1: must lie in [0, 1)");
    if (!(c.noise.p2 >= 0.0 && c.noise.p2 < 1.0)) r.errors.push_back("noise.p2: must lie in [0, 1)");
    if (c.r_max.empty()) r.errors.push_back("noise.r_max: empty list");
    for (double x : c.r_max) {
        if (!(x >= 0.0)) r.errors.push_back("noise.r_max: must be >= 0");
    }
    if (c.p_m.empty()) r.errors.push_back("syndrome.p_m: empty list");
    for (double x : c.p_m) {
        if (!(x >= 0.0 && x < 1.0)) r.errors.push_back("syndrome.p_m: must lie in [0, 1)");
    }
    if (!(c.m_fraction > 0.0)) r.errors.push_back("syndrome.m_fraction: must be > 0");
    if (c.extraction_first_order && c.K != 1) {
        r.errors.push_back("syndrome.first_order_extension: requires K = 1");
    }
    if (c.target_stderr < 0.0) r.errors.push_back("sampling.target_stderr: must be >= 0");
    if (c.chunk_size == 0) r.errors.push_back("sampling.chunk_size: must be >= 1");
    if (c.mode == SamplingMode::Conditioned && c.syndrome != SyndromeModel::Kind::Ideal) {
        r.errors.push_back("sampling.mode: conditioned sampling requires the ideal syndrome model");
    }
    for (double x : c.toy.N) {
        if (!(x >= 2.0)) r.errors.push_back("toy.N: must be >= 2");
    }
    for (double x : c.toy.gamma_T) {
        if (!(x > 0.0)) r.errors.push_back("toy.gamma_T: must be > 0");
    }
    for (double x : c.toy.tau_fraction) {
        if (!(x > 0.0)) r.errors.push_back("toy.tau_fraction: must be > 0");
    }
    if (!(c.toy.gamma_rate > 0.0)) r.errors.push_back("toy.gamma_rate: must be > 0");
    if (!r.errors.empty()) {
        throw ConfigError(r.errors);
    }
    c.canonical = root.dump();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot open config file '" + path + "'"});
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return validate_config(ss.str());
}

/// One output row: ordered (column, value) pairs, values already formatted.
struct Row {
    std::vector<std::pair<std::string, std::string>> cells;

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : cells) {
            if (k == key) {
                v = value;
                return;
            }
        }
        cells.emplace_back(key, value);
    }
    std::string get(const std::string& key) const {
        for (const auto& [k, v] : cells) {
            if (k == key) {
                return v;
            }
        }
        return "";
    }
};

inline std::string fmt_double(double x) {
    if (std::isnan(x)) {
        return "";
    }
    std::ostringstream ss;
    ss << std::setprecision(10) << x;
    return ss.str();
}

inline constexpr int kCsvVersion = 1;

/// Column sets of each task. Rows of a task always carry exactly these columns.
inline std::vector<std::string> columns_for(Task t) {
    switch (t) {
        case Task::Run:
        case Task::Sweep:
            return {"config_hash", "point", "n", "T", "K", "model", "p_m", "m_ancilla", "r_max", "normalization",
                    "mode", "pec", "status", "n_attempted", "n_accepted", "estimate", "stderr", "acceptance",
                    "acceptance_exact", "mean_abs_gamma", "cost_total", "cost_postselect", "cost_gamma2",
                    "cost_observed", "pure_pec", "ratio_to_pure_pec", "B1", "wall_time"};
        case Task::Compile:
        case Task::Certify:
            return {"config_hash", "point", "n", "T", "K", "block", "status", "num_faults", "W", "accepted_weight",
                    "branches", "accepted_branches", "gamma", "p_success", "zeta", "eta", "epsilon",
                    "low_degree_residue", "table_entries", "wall_time"};
        case Task::Toy:
            return {"config_hash", "point", "N", "gamma_T", "tau", "toyA_exact_log", "toyA_expanded_log",
                    "toyA_residual", "toyB_exact_log", "toyB_expanded_log", "toyB_single_shot", "zeno_separation",
                    "wall_time"};
        case Task::Baseline:
            return {"config_hash", "point", "n", "p1", "p2", "pure_pec", "wall_time"};
    }
    return {};
}

class RowSink {
   public:
    virtual ~RowSink() = default;
    virtual void write(const Row& row) = 0;
};

/// CSV with a versioned header comment; flushed per row so runs can resume.
class CsvSink : public RowSink {
   public:
    CsvSink(std::ostream& out, std::vector<std::string> columns, Task task, bool write_header = true)
        : out_(out), columns_(std::move(columns)) {
        if (write_header) {
            out_ << "# qedpec-csv v" << kCsvVersion << " task=" << task_name(task) << "\n";
            for (std::size_t k = 0; k < columns_.size(); k++) {
                out_ << (k ? "," : "") << columns_[k];
            }
            out_ << "\n";
            out_.flush();
        }
    }
    void write(const Row& row) override {
        for (std::size_t k = 0; k < columns_.size(); k++) {
            out_ << (k ? "," : "") << row.get(columns_[k]);
        }
        out_ << "\n";
        out_.flush();
    }

   private:
    std::ostream& out_;
    std::vector<std::string> columns_;
};

class JsonSink : public RowSink {
   public:
    JsonSink(std::ostream& out, std::vector<std::string> columns, Task task)
        : out_(out), columns_(std::move(columns)), task_(task) {}
    ~JsonSink() override { finish(); }
    void write(const Row& row) override { rows_.push_back(row); }
    void finish() {
        if (done_) {
            return;
        }
        done_ = true;
        nlohmann::ordered_json doc;
        doc["format"] = "qedpec-json";
        doc["version"] = kCsvVersion;
        doc["task"] = task_name(task_);
        doc["columns"] = columns_;
        doc["rows"] = nlohmann::ordered_json::array();
        for (const Row& r : rows_) {
            nlohmann::ordered_json o;
            for (const auto& c : columns_) {
                const std::string v = r.get(c);
                char* end = nullptr;
                const double x = v.empty() ? 0.0 : std::strtod(v.c_str(), &end);
                if (v.empty()) {
                    o[c] = nullptr;
                } else if (end == v.c_str() + v.size() && c != "config_hash") {
                    if (v.find_first_of(".eE") == std::string::npos && std::abs(x) < 9e15) {
                        o[c] = static_cast<long long>(x);
                    } else {
                        o[c] = x;
                    }
                } else {
                    o[c] = v;
                }
            }
            doc["rows"].push_back(o);
        }
        out_ << doc.dump(1) << "\n";
        out_.flush();
    }

   private:
    std::ostream& out_;
    std::vector<std::string> columns_;
    Task task_;
    std::vector<Row> rows_;
    bool done_ = false;
};

/// Point indices already present in a CSV produced by an earlier run of the
/// same configuration (for --resume). Throws if the file belongs to another config.
inline std::set<std::size_t> completed_points(std::istream& in, const std::string& config_hash) {
    std::set<std::size_t> done;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (header.empty()) {
            header = cells;
            continue;
        }
        std::string hash, point;
        for (std::size_t k = 0; k < header.size() && k < cells.size(); k++) {
            if (header[k] == "config_hash") hash = cells[k];
            if (header[k] == "point") point = cells[k];
        }
        if (hash != config_hash) {
            throw std::runtime_error("resume file was produced by a different configuration");
        }
        if (!point.empty()) {
            done.insert(static_cast<std::size_t>(std::stoull(point)));
        }
    }
    return done;
}

/// Per-point seed derived from (master seed, point index).
inline std::uint64_t point_seed(std::uint64_t master, std::size_t point) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(point >> 32), 0x9e37u};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct RunOptions {
    unsigned threads = 1;
    std::set<std::size_t> skip_points;
    std::ostream* tables_out = nullptr;  // compile: PEC tables go here
};

struct SweepResult {
    std::vector<Row> rows;
    std::size_t failures = 0;  // points reported with a non-ok status
};

inline std::string config_hash_of(const ExperimentConfig& c) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(c.canonical);
    return ss.str();
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ProtocolOptions protocol_options(const ExperimentConfig& c, std::size_t n, std::size_t T, double p_m,
                                        double r_max, std::uint64_t seed) {
    ProtocolOptions o;
    o.n = n;
    o.interval = T;
    o.order = c.K;
    o.noise = c.noise;
    switch (c.syndrome) {
        case SyndromeModel::Kind::Ideal:
            o.syndrome = SyndromeModel::ideal();
            break;
        case SyndromeModel::Kind::ReadoutFlip:
            o.syndrome = SyndromeModel::readout_flip(p_m);
            break;
        case SyndromeModel::Kind::CatExtraction:
            o.syndrome = SyndromeModel::cat_extraction(c.ancillas_for(n), c.noise);
            break;
    }
    o.normalization = c.normalization;
    o.pec = c.pec;
    o.r_max = r_max;
    o.drift_seed = c.drift_seed != 0 ? c.drift_seed : seed;
    o.extraction_first_order = c.extraction_first_order;
    o.enforce_validity = c.enforce_validity;
    return o;
}

}  // namespace detail

/// Runs every grid point of the configuration and streams rows to the sink.
/// Validity and no-data failures are reported per point without aborting.
inline SweepResult run_config(const ExperimentConfig& c, RowSink& sink, const RunOptions& ro = {}) {
    if (!c.task) {
        throw ConfigError({"config.task: missing"});
    }
    const Task task = *c.task;
    const std::string hash = config_hash_of(c);
    SweepResult result;
    std::size_t point = 0;
    auto emit = [&](Row row) {
        if (row.get("status") != "" && row.get("status") != "ok") {
            result.failures++;
        }
        sink.write(row);
        result.rows.push_back(std::move(row));
    };

    if (task == Task::Toy) {
        for (double N : c.toy.N) {
            for (double gT : c.toy.gamma_T) {
                for (double frac : c.toy.tau_fraction) {
                    const std::size_t idx = point++;
                    if (ro.skip_points.count(idx)) {
                        continue;
                    }
                    const auto t0 = std::chrono::steady_clock::now();
                    ToyParams p{c.toy.gamma_rate, gT / c.toy.gamma_rate, frac * gT / c.toy.gamma_rate, N};
                    const auto a = toy_A_cost(p);
                    const auto b = toy_B_cost(p);
                    Row row;
                    row.set("config_hash", hash);
                    row.set("point", std::to_string(idx));
                    row.set("N", fmt_double(N));
                    row.set("gamma_T", fmt_double(gT));
                    row.set("tau", fmt_double(p.tau));
                    row.set("toyA_exact_log", fmt_double(std::log(a.exact)));
                    row.set("toyA_expanded_log", fmt_double(a.expanded_log));
                    row.set("toyA_residual", fmt_double(std::log(a.exact) - a.expanded_log));
                    row.set("toyB_exact_log", fmt_double(std::log(b.exact_periodic)));
                    row.set("toyB_expanded_log", fmt_double(b.expanded_log));
                    row.set("toyB_single_shot", fmt_double(b.single_shot));
                    row.set("zeno_separation", fmt_double(zeno_separation(p).value));
                    row.set("wall_time", fmt_double(detail::seconds_since(t0)));
                    emit(std::move(row));
                }
            }
        }
        return result;
    }

    if (task == Task::Baseline) {
        for (std::size_t n : c.n) {
            const std::size_t idx = point++;
            if (ro.skip_points.count(idx)) {
                continue;
            }
            const auto t0 = std::chrono::steady_clock::now();
            Row row;
            row.set("config_hash", hash);
            row.set("point", std::to_string(idx));
            row.set("n", std::to_string(n));
            row.set("p1", fmt_double(c.noise.p1));
            row.set("p2", fmt_double(c.noise.p2));
            row.set("pure_pec", fmt_double(pure_pec_cost(n, c.noise)));
            row.set("wall_time", fmt_double(detail::seconds_since(t0)));
            emit(std::move(row));
        }
        return result;
    }

    if (task == Task::Compile || task == Task::Certify) {
        for (std::size_t n : c.n) {
            for (std::size_t T : c.T) {
                const std::size_t idx = point++;
                if (ro.skip_points.count(idx)) {
                    continue;
                }
                const auto t0 = std::chrono::steady_clock::now();
                auto base = [&]() {
                    Row row;
                    row.set("config_hash", hash);
                    row.set("point", std::to_string(idx));
                    row.set("n", std::to_string(n));
                    row.set("T", std::to_string(T));
                    row.set("K", std::to_string(c.K));
                    return row;
                };
                try {
                    const auto bench = build_ghz_logical_circuit(n, T);
                    CompileOptions co;
                    co.order = c.K;
                    co.normalization = c.normalization;
                    co.enforce_validity = c.enforce_validity;
                    co.compute_eta = task == Task::Certify;
                    const std::size_t blocks = bench.circuit.block_boundaries().size();
                    if (ro.tables_out && task == Task::Compile) {
                        *ro.tables_out << "# circuit n " << n << " T " << T << "\n";
                        write_circuit(*ro.tables_out, bench.circuit);
                    }
                    for (std::size_t b = 0; b < blocks; b++) {
                        const auto bt = std::chrono::steady_clock::now();
                        Row row = base();
                        row.set("block", std::to_string(b));
                        const auto faults = block_faults(bench.circuit, b, c.noise, c.enforce_validity);
                        const auto prop = propagate_block_faults(faults, bench.circuit, bench.code);
                        const auto cb = compile_block(faults, prop, n, co);
                        row.set("status", "ok");
                        row.set("num_faults", std::to_string(cb.num_faults));
                        row.set("W", fmt_double(cb.total_weight));
                        row.set("accepted_weight", fmt_double(cb.accepted_single_weight));
                        row.set("branches", std::to_string(cb.branch_count));
                        row.set("accepted_branches", std::to_string(cb.accepted_branch_count));
                        row.set("gamma", fmt_double(cb.table.gamma));
                        row.set("p_success", fmt_double(cb.table.p_success));
                        row.set("zeta", fmt_double(cb.certificates.zeta));
                        row.set("eta", cb.certificates.eta ? fmt_double(*cb.certificates.eta) : "");
                        row.set("epsilon", fmt_double(cb.certificates.epsilon()));
                        row.set("low_degree_residue", fmt_double(cb.certificates.low_degree_residue));
                        row.set("table_entries", std::to_string(cb.table.entries.size()));
                        row.set("wall_time", fmt_double(detail::seconds_since(bt)));
                        if (ro.tables_out && task == Task::Compile) {
                            *ro.tables_out << "# n " << n << " T " << T << "\n";
                            write_table(*ro.tables_out, cb.table);
                        }
                        emit(std::move(row));
                    }
                } catch (const ValidityError& e) {
                    Row row = base();
                    row.set("status", "invalid");
                    row.set("wall_time", fmt_double(detail::seconds_since(t0)));
                    emit(std::move(row));
                } catch (const CompilationError& e) {
                    Row row = base();
                    row.set("status", "compile_error");
                    row.set("wall_time", fmt_double(detail::seconds_since(t0)));
                    emit(std::move(row));
                }
            }
        }
        return result;
    }

    // run / sweep
    const bool single = task == Task::Run;
    for (std::size_t n : c.n) {
        for (std::size_t T : c.T) {
            for (double p_m : c.p_m) {
                for (double r_max : c.r_max) {
                    const std::size_t idx = point++;
                    if (single && idx > 0) {
                        break;
                    }
                    if (ro.skip_points.count(idx)) {
                        continue;
                    }
                    const auto t0 = std::chrono::steady_clock::now();
                    const std::uint64_t seed = point_seed(c.seed, idx);
                    Row row;
                    row.set("config_hash", hash);
                    row.set("point", std::to_string(idx));
                    row.set("n", std::to_string(n));
                    row.set("T", std::to_string(T));
                    row.set("K", std::to_string(c.K));
                    row.set("p_m", fmt_double(c.syndrome == SyndromeModel::Kind::ReadoutFlip ? p_m : 0.0));
                    row.set("m_ancilla", c.syndrome == SyndromeModel::Kind::CatExtraction
                                             ? std::to_string(c.ancillas_for(n))
                                             : "0");
                    row.set("r_max", fmt_double(r_max));
                    row.set("normalization", normalization_name(c.normalization));
                    row.set("mode", c.shots ? sampling_mode_name(c.mode) : "analytic");
                    row.set("pec", c.pec ? "1" : "0");
                    row.set("pure_pec", fmt_double(pure_pec_cost(n, c.noise)));
                    row.set("B1", fmt_double(perturbative_bound_B1(n, T, c.noise)));
                    try {
                        const auto opts = detail::protocol_options(c, n, T, p_m, r_max, seed);
                        row.set("model", opts.syndrome.name());
                        const Protocol protocol(opts);
                        const auto cost = total_cost_qedpec(cycle_costs(protocol));
                        const auto observed = observed_cost(protocol);
                        row.set("cost_total", fmt_double(cost.total));
                        row.set("cost_postselect", fmt_double(cost.postselect));
                        row.set("cost_gamma2", fmt_double(cost.gamma2));
                        row.set("cost_observed", fmt_double(observed.total));
                        row.set("ratio_to_pure_pec", fmt_double(cost.total / pure_pec_cost(n, c.noise)));
                        row.set("acceptance_exact", fmt_double(1.0 / observed.postselect));
                        row.set("status", "ok");
                        if (c.shots > 0) {
                            SamplingOptions so;
                            so.shots = c.shots;
                            so.target_stderr = c.target_stderr;
                            so.mode = c.mode;
                            so.seed = seed;
                            so.threads = ro.threads;
                            so.chunk_size = c.chunk_size;
                            const RunResult rr = run_protocol(protocol, so);
                            row.set("n_attempted", std::to_string(rr.n_attempted));
                            row.set("n_accepted", std::to_string(rr.n_accepted));
                            row.set("estimate", fmt_double(rr.estimate));
                            row.set("stderr", fmt_double(rr.stderr_));
                            row.set("acceptance", fmt_double(rr.acceptance_rate));
                            row.set("mean_abs_gamma", fmt_double(rr.mean_abs_gamma));
                        }
                    } catch (const ValidityError&) {
                        row.set("status", "invalid");
                    } catch (const NoDataError&) {
                        row.set("status", "no_data");
                    } catch (const CompilationError&) {
                        row.set("status", "compile_error");
                    }
                    if (row.get("model").empty()) {
                        row.set("model", c.syndrome == SyndromeModel::Kind::Ideal         ? "ideal"
                                         : c.syndrome == SyndromeModel::Kind::ReadoutFlip ? "readout"
                                                                                          : "cat");
                    }
                    row.set("wall_time", fmt_double(detail::seconds_since(t0)));
                    emit(std::move(row));
                }
            }
        }
    }
    return result;
}

}  // namespace qedpec
