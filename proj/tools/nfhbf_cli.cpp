// SPDX-License-Identifier: Apache-2.0
//
// nfhbf - near-field dynamic hybrid beamforming
// Copyright (C) 2026 The nfhbf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Command line front end: solve, sweep, edof, validate

#include "nfhbf/config.hpp"
#include "nfhbf/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace
{
    enum Exit : int
    {
        ok = 0,
        warned = 1,
        usage = 2,
        io = 3
    };

    struct Options
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::optional<arma::uword> trials;
        std::string out;
        std::string summary;
        bool timing = false;
        unsigned jobs = 1;
    };

    nfhbf::ExperimentConfig resolve(const Options &o)
    {
        nfhbf::ExperimentConfig c = o.config_path.empty() ? nfhbf::ExperimentConfig{} : nfhbf::load_config(o.config_path);
        if (o.seed)
            c.seed = *o.seed;
        if (o.trials)
            c.trials = *o.trials;
        c.validate();
        return c;
    }

    // Text goes to --out when given, else stdout
    void emit(const Options &o, const std::string &text)
    {
        if (o.out.empty())
        {
            std::cout << text << std::flush;
            return;
        }
        std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
        if (!f || !(f << text) || !f.flush())
            throw nfhbf::IoError("cannot write '" + o.out + "'");
    }

    int cmd_solve(const Options &o)
    {
        auto c = resolve(o);
        auto rec = nfhbf::run_seeded_trial(c, 0, c.seed, std::nan(""), {o.timing});
        std::ostringstream s;
        nfhbf::print_record(s, rec);
        emit(o, s.str());
        return rec.warning ? warned : ok;
    }

    int cmd_sweep(const Options &o)
    {
        auto c = resolve(o);
        auto res = nfhbf::run_sweep(c, {o.timing, o.jobs});
        std::ostringstream s;
        nfhbf::write_results(s, res.records, c.sweep_axis, c.k_users);
        emit(o, s.str());
        if (!o.summary.empty())
            nfhbf::write_summary(o.summary, nfhbf::aggregate(res.records, c.k_users), c.sweep_axis, c.k_users);
        if (res.error)
        {
            std::cerr << "nfhbf: sweep aborted after " << res.records.size() << " trials: " << *res.error << '\n';
            return warned;
        }
        if (res.warning())
        {
            std::cerr << "nfhbf: solver warnings present in the results\n";
            return warned;
        }
        return ok;
    }

    int cmd_edof(const Options &o)
    {
        auto c = resolve(o);
        std::ostringstream s;
        nfhbf::write_edof(s, nfhbf::edof_profile(c));
        emit(o, s.str());
        return ok;
    }

    int cmd_validate(const Options &o)
    {
        auto c = resolve(o);
        auto checks = nfhbf::validate_invariants(c, c.seed);
        std::ostringstream s;
        bool all = true;
        for (const auto &k : checks)
        {
            s << (k.pass ? "PASS " : "FAIL ") << k.name << " (" << k.detail << ")\n";
            all = all && k.pass;
        }
        emit(o, s.str());
        return all ? ok : warned;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Near-field dynamic hybrid beamforming simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    std::uint64_t seed = 0;
    arma::uword trials = 0;
    app.add_option("--config", o.config_path, "Configuration file (key = value)");
    auto *seed_opt = app.add_option("--seed", seed, "Base seed, overrides the config");
    auto *trials_opt = app.add_option("--trials", trials, "Monte-Carlo trials per sweep point")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "Output path, stdout when omitted");
    app.add_option("--summary", o.summary, "Sweep only: write mean and std per sweep point");
    app.add_flag("--timing", o.timing, "Record wall time (breaks byte-identical output)");
    app.add_option("--jobs", o.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);

    auto *solve = app.add_subcommand("solve", "Run one seeded scenario and print the record");
    auto *sweep = app.add_subcommand("sweep", "Run the configured sweep and write the results CSV");
    auto *edof = app.add_subcommand("edof", "Write near and far field EDoF versus distance");
    auto *validate = app.add_subcommand("validate", "Check solver invariants on one seeded scenario");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return usage;
    }
    if (*seed_opt)
        o.seed = seed;
    if (*trials_opt)
        o.trials = trials;

    try
    {
        if (*solve)
            return cmd_solve(o);
        if (*sweep)
            return cmd_sweep(o);
        if (*edof)
            return cmd_edof(o);
        if (*validate)
            return cmd_validate(o);
    }
    catch (const nfhbf::ConfigError &e)
    {
        std::cerr << "nfhbf: " << e.what() << '\n';
        return usage;
    }
    catch (const nfhbf::IoError &e)
    {
        std::cerr << "nfhbf: " << e.what() << '\n';
        return io;
    }
    catch (const std::exception &e)
    {
        std::cerr << "nfhbf: " << e.what() << '\n';
        return warned;
    }
    return usage;
}
