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

// qedpec command line: compile | run | sweep | toy | certify | baseline.
//
// Exit status: 0 success, 1 configuration or I/O error, 2 at least one grid
// point reported a non-ok status (invalid, no_data, compile_error).

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qedpec/experiment.hpp"

namespace {

struct GlobalFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string tables;
    unsigned threads = 1;
    std::string format = "csv";
    bool resume = false;
};

int run_task(qedpec::Task task, const GlobalFlags& flags) {
    qedpec::ExperimentConfig cfg;
    try {
        cfg = qedpec::load_config(flags.config);
    } catch (const qedpec::ConfigError& e) {
        std::cerr << "invalid config " << flags.config << ":\n";
        for (const auto& msg : e.errors()) {
            std::cerr << "  " << msg << "\n";
        }
        return 1;
    }
    if (cfg.task && *cfg.task != task) {
        std::cerr << "config declares task '" << qedpec::task_name(*cfg.task) << "' but subcommand is '"
                  << qedpec::task_name(task) << "'\n";
        return 1;
    }
    cfg.task = task;
    if (flags.seed) {
        cfg.seed = *flags.seed;
        cfg.canonical += "|seed=" + std::to_string(*flags.seed);
    }
    const std::string out_path = !flags.out.empty() ? flags.out : cfg.output;
    if (flags.format != "csv" && flags.format != "json") {
        std::cerr << "--format must be csv or json\n";
        return 1;
    }
    const bool json = flags.format == "json";
    if (flags.resume && (json || out_path.empty())) {
        std::cerr << "--resume needs CSV output to a file\n";
        return 1;
    }

    qedpec::RunOptions ro;
    ro.threads = flags.threads == 0 ? 1 : flags.threads;
    bool header = true;
    if (flags.resume) {
        std::ifstream prev(out_path);
        if (prev) {
            try {
                ro.skip_points = qedpec::completed_points(prev, qedpec::config_hash_of(cfg));
            } catch (const std::exception& e) {
                std::cerr << "cannot resume " << out_path << ": " << e.what() << "\n";
                return 1;
            }
            header = false;
        }
    }

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path, header ? std::ios::trunc : std::ios::app);
        if (!file) {
            std::cerr << "cannot open output " << out_path << "\n";
            return 1;
        }
        out = &file;
    }
    std::ofstream tables;
    if (!flags.tables.empty()) {
        tables.open(flags.tables);
        if (!tables) {
            std::cerr << "cannot open tables output " << flags.tables << "\n";
            return 1;
        }
        ro.tables_out = &tables;
    }

    const auto columns = qedpec::columns_for(task);
    std::unique_ptr<qedpec::RowSink> sink;
    if (json) {
        sink = std::make_unique<qedpec::JsonSink>(*out, columns, task);
    } else {
        sink = std::make_unique<qedpec::CsvSink>(*out, columns, task, header);
    }
    qedpec::SweepResult result;
    try {
        result = qedpec::run_config(cfg, *sink, ro);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    sink.reset();
    if (result.failures > 0) {
        std::cerr << result.failures << " grid point(s) reported a non-ok status\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qedpec: order-K error detection + probabilistic error cancellation"};
    app.require_subcommand(1);
    GlobalFlags flags;

    struct Sub {
        qedpec::Task task;
        const char* help;
    };
    const Sub subs[] = {
        {qedpec::Task::Compile, "compile PEC tables and emit per-block summaries"},
        {qedpec::Task::Run, "Monte Carlo at the first grid point"},
        {qedpec::Task::Sweep, "Monte Carlo and analytic costs over the whole grid"},
        {qedpec::Task::Toy, "evaluate the two toy models"},
        {qedpec::Task::Certify, "zeta / eta / epsilon certificates per block"},
        {qedpec::Task::Baseline, "first-order pure PEC cost"},
    };
    std::optional<qedpec::Task> chosen;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(qedpec::task_name(s.task), s.help);
        sub->add_option("--config", flags.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "master seed (overrides config)");
        sub->add_option("--out", flags.out, "output path (default: config 'output' or stdout)");
        sub->add_option("--threads", flags.threads, "worker threads for shot sampling")->check(CLI::Range(1u, 1024u));
        sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--resume", flags.resume, "skip grid points already present in --out");
        if (s.task == qedpec::Task::Compile) {
            sub->add_option("--tables", flags.tables, "write circuits and PEC tables here");
        }
        sub->callback([&chosen, t = s.task] { chosen = t; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return run_task(*chosen, flags);
}
