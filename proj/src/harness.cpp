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

#include "nfhbf/harness.hpp"

#include "nfhbf/factorization.hpp"
#include "nfhbf/format.hpp"
#include "nfhbf/metrics.hpp"
#include "nfhbf/pli.hpp"
#include "nfhbf/wmmse_ts.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

namespace nfhbf
{
    double uniform01(Rng &rng)
    {
        return double(rng() >> 11) * 0x1.0p-53;
    }

    namespace
    {
        double uniform(Rng &rng, double lo, double hi)
        {
            return lo + (hi - lo) * uniform01(rng);
        }

        Placement draw_user(const ExperimentConfig &c, Rng &rng)
        {
            double r = uniform(rng, c.ring_inner_m, c.ring_inner_m + c.ring_width_m);
            double az = uniform(rng, -0.5 * pi, 0.5 * pi);
            double el = uniform(rng, 0.25 * pi, 0.75 * pi);
            return Placement(r, az, el);
        }
    }

    Scenario sample_scenario(const ExperimentConfig &config, Rng &rng)
    {
        Scenario s{UpaConfig(config.mt_v, config.mt_h, config.spacing_m()), {}, {}, config.carrier_hz,
                   dbm_to_watt(config.noise_dbm)};
        double lambda = config.wavelength();
        for (arma::uword k = 0; k < config.k_users; ++k)
        {
            Placement p = draw_user(config, rng);
            s.users.push_back({UpaConfig(config.mr_v, config.mr_h, config.spacing_m()), p,
                               cx(free_space_gain(p.range(), lambda), 0.0)});
        }
        for (arma::uword l = 0; l < config.l_scatterers; ++l)
        {
            // (0, R]: 1 - U never hits zero
            double r = config.scatter_radius_m * (1.0 - uniform01(rng));
            double az = uniform(rng, -0.5 * pi, 0.5 * pi);
            double el = uniform(rng, 0.25 * pi, 0.75 * pi);
            double phase = uniform(rng, -pi, pi);
            s.scatterers.push_back({Placement(r, az, el), std::polar(1.0, phase)});
        }
        return s;
    }

    TrialRecord run_trial(const Scenario &scenario, const ExperimentConfig &config, arma::uword trial,
                          std::uint64_t seed, double sweep_value, const TrialOptions &options)
    {
        auto t0 = std::chrono::steady_clock::now();
        TrialRecord rec;
        rec.sweep_value = sweep_value;
        rec.trial = trial;
        rec.seed = seed;

        const SolverConfig sc = config.solver_config();
        const arma::uword mt = scenario.bs.size();
        const ChannelList channels = assemble_channels(scenario, config.channel);

        HybridBeamformer hybrid;
        StreamSelection selection;
        arma::cx_mat digital;
        if (config.solver == SolverKind::pli)
        {
            PliResult r = pli_solve(channels, sc);
            hybrid = r.hybrid;
            selection = r.selection;
            digital = r.fully_digital;
            rec.iters_inner = r.inner_iterations;
            rec.iters_outer = r.outer_iterations;
            rec.penalty_final = r.penalty;
            rec.warning = r.warning;
            if (r.warning)
                rec.messages.push_back("pli: penalty or iteration limit reached before convergence");
        }
        else
        {
            WmmseTsResult r = wmmse_ts_solve(channels, sc);
            selection = r.selection;
            digital = r.fully_digital;
            FactorizationResult f = hybrid_factorize(apply_selection(digital, selection), selection.active_count(),
                                                     sc.rf_chains);
            hybrid = f.hybrid;
            rec.factorization_residual = f.residual;
            rec.iters_inner = r.iterations;
            rec.warning = r.warning;
            if (r.warning)
                rec.messages.push_back("wmmse-ts: iteration limit reached before convergence");
        }

        arma::cx_mat effective = hybrid.effective();
        rec.rates = achievable_rate(channels, effective, selection, sc.noise_power);
        rec.sum_rate = arma::accu(rec.rates);
        rec.digital_sum_rate = arma::accu(achievable_rate(channels, digital, selection, sc.noise_power));
        rec.streams = selection.active_count();
        rec.hpc_w = hardware_power(selection, sc.power, mt);
        rec.tx_power_w = transmit_power(effective, selection);
        rec.objective = network_objective(rec.rates, rec.hpc_w, sc.beta);
        for (const auto &w : scenario.rayleigh_warnings())
            rec.messages.push_back(w);
        if (options.timing)
            rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return rec;
    }

    TrialRecord run_seeded_trial(const ExperimentConfig &config, arma::uword trial, std::uint64_t seed,
                                 double sweep_value, const TrialOptions &options)
    {
        Rng rng(seed);
        Scenario s = sample_scenario(config, rng);
        return run_trial(s, config, trial, seed, sweep_value, options);
    }

    bool SweepResult::warning() const
    {
        return std::any_of(records.begin(), records.end(), [](const TrialRecord &r) { return r.warning; });
    }

    SweepResult run_sweep(const ExperimentConfig &config, const SweepOptions &options)
    {
        struct Task
        {
            double value;
            arma::uword trial;
        };
        std::vector<Task> tasks;
        for (double v : config.sweep_grid())
            for (arma::uword t = 0; t < config.trials; ++t)
                tasks.push_back({v, t});

        std::vector<std::optional<TrialRecord>> slots(tasks.size());
        std::vector<std::string> errors(tasks.size());
        std::atomic<std::size_t> next{0};
        std::atomic<bool> abort{false};
        TrialOptions topt{options.timing};

        auto worker = [&] {
            for (;;)
            {
                std::size_t i = next.fetch_add(1);
                if (i >= tasks.size() || abort.load())
                    return;
                try
                {
                    ExperimentConfig c =
                        config.sweep_axis == SweepAxis::none ? config : config.at_sweep_value(tasks[i].value);
                    slots[i] = run_seeded_trial(c, tasks[i].trial, config.seed ^ std::uint64_t(tasks[i].trial),
                                                tasks[i].value, topt);
                }
                catch (const std::exception &e)
                {
                    errors[i] = e.what();
                    abort = true;
                    return;
                }
            }
        };

        unsigned jobs = std::max(1u, options.jobs);
        if (jobs == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (unsigned j = 0; j < jobs; ++j)
                pool.emplace_back(worker);
            for (auto &t : pool)
                t.join();
        }

        // Keep the contiguous prefix so the output never depends on scheduling
        SweepResult out;
        for (std::size_t i = 0; i < tasks.size(); ++i)
        {
            if (!slots[i])
            {
                for (std::size_t j = i; j < tasks.size(); ++j)
                    if (!errors[j].empty())
                    {
                        out.error = "trial " + std::to_string(tasks[j].trial) + " at sweep value " +
                                    format_double(tasks[j].value) + ": " + errors[j];
                        break;
                    }
                if (!out.error)
                    out.error = "sweep aborted";
                break;
            }
            out.records.push_back(std::move(*slots[i]));
        }
        return out;
    }

    namespace
    {
        // Numeric fields in CSV order, NaN when absent
        std::vector<std::optional<double>> numeric_fields(const TrialRecord &r, arma::uword users)
        {
            std::vector<std::optional<double>> f;
            f.push_back(r.sum_rate);
            for (arma::uword k = 0; k < users; ++k)
                f.push_back(k < r.rates.n_elem ? std::optional<double>(r.rates(k)) : std::nullopt);
            f.push_back(double(r.streams));
            f.push_back(r.hpc_w);
            f.push_back(r.tx_power_w);
            f.push_back(r.objective);
            f.push_back(double(r.iters_inner));
            f.push_back(r.iters_outer ? std::optional<double>(double(*r.iters_outer)) : std::nullopt);
            f.push_back(r.penalty_final);
            f.push_back(r.wall_ms);
            return f;
        }

        std::string cell(const std::optional<double> &v)
        {
            return v ? format_double(*v) : std::string();
        }

        void write_row(std::ostream &out, const std::vector<std::string> &cells)
        {
            for (std::size_t i = 0; i < cells.size(); ++i)
                out << (i ? "," : "") << cells[i];
            out << '\n';
        }

        template <class Fn>
        void to_file(const std::string &path, Fn &&fn)
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw IoError("cannot open '" + path + "' for writing");
            fn(out);
            out.flush();
            if (!out)
                throw IoError("write to '" + path + "' failed");
        }

        std::string sweep_cell(double v)
        {
            return std::isnan(v) ? std::string() : format_double(v);
        }
    }

    std::vector<std::string> summary_fields(arma::uword users)
    {
        std::vector<std::string> f = {"sum_rate_bps_hz"};
        for (arma::uword k = 0; k < users; ++k)
            f.push_back("rate_u" + std::to_string(k + 1));
        for (const char *n : {"t_s", "hpc_w", "tx_power_w", "objective", "iters_inner", "iters_outer",
                              "penalty_final", "wall_ms"})
            f.push_back(n);
        return f;
    }

    std::vector<SummaryRow> aggregate(const std::vector<TrialRecord> &records, arma::uword users)
    {
        std::vector<SummaryRow> rows;
        const std::size_t nf = summary_fields(users).size();
        std::size_t i = 0;
        while (i < records.size())
        {
            std::size_t j = i;
            auto same = [&](const TrialRecord &r) {
                return (std::isnan(r.sweep_value) && std::isnan(records[i].sweep_value)) ||
                       r.sweep_value == records[i].sweep_value;
            };
            while (j < records.size() && same(records[j]))
                ++j;
            SummaryRow row;
            row.sweep_value = records[i].sweep_value;
            row.trials = j - i;
            row.fields.resize(nf);
            for (std::size_t f = 0; f < nf; ++f)
            {
                std::vector<double> xs;
                for (std::size_t t = i; t < j; ++t)
                    if (auto v = numeric_fields(records[t], users)[f])
                        xs.push_back(*v);
                if (xs.empty())
                    continue;
                arma::vec x(xs);
                row.fields[f].present = true;
                row.fields[f].mean = arma::mean(x);
                row.fields[f].std = x.n_elem > 1 ? arma::stddev(x) : 0.0;
            }
            rows.push_back(std::move(row));
            i = j;
        }
        return rows;
    }

    std::vector<std::string> results_header(arma::uword users)
    {
        std::vector<std::string> h = {"sweep_axis", "sweep_value", "trial", "seed"};
        for (const auto &f : summary_fields(users))
            h.push_back(f);
        return h;
    }

    void write_results(std::ostream &out, const std::vector<TrialRecord> &records, SweepAxis axis, arma::uword users)
    {
        write_row(out, results_header(users));
        for (const auto &r : records)
        {
            std::vector<std::string> cells = {to_string(axis), sweep_cell(r.sweep_value), std::to_string(r.trial),
                                              std::to_string(r.seed)};
            for (const auto &v : numeric_fields(r, users))
                cells.push_back(cell(v));
            write_row(out, cells);
        }
    }

    void write_results(const std::string &path, const std::vector<TrialRecord> &records, SweepAxis axis,
                       arma::uword users)
    {
        to_file(path, [&](std::ostream &o) { write_results(o, records, axis, users); });
    }

    void write_summary(std::ostream &out, const std::vector<SummaryRow> &rows, SweepAxis axis, arma::uword users)
    {
        std::vector<std::string> h = {"sweep_axis", "sweep_value", "trials"};
        for (const auto &f : summary_fields(users))
        {
            h.push_back(f + "_mean");
            h.push_back(f + "_std");
        }
        write_row(out, h);
        for (const auto &r : rows)
        {
            std::vector<std::string> cells = {to_string(axis), sweep_cell(r.sweep_value), std::to_string(r.trials)};
            for (const auto &f : r.fields)
            {
                cells.push_back(f.present ? format_double(f.mean) : "");
                cells.push_back(f.present ? format_double(f.std) : "");
            }
            write_row(out, cells);
        }
    }

    void write_summary(const std::string &path, const std::vector<SummaryRow> &rows, SweepAxis axis,
                       arma::uword users)
    {
        to_file(path, [&](std::ostream &o) { write_summary(o, rows, axis, users); });
    }

    void print_record(std::ostream &out, const TrialRecord &r)
    {
        out << "seed = " << r.seed << '\n';
        out << "sweep_value = " << sweep_cell(r.sweep_value) << '\n';
        out << "sum_rate_bps_hz = " << format_double(r.sum_rate) << '\n';
        for (arma::uword k = 0; k < r.rates.n_elem; ++k)
            out << "rate_u" << k + 1 << " = " << format_double(r.rates(k)) << '\n';
        out << "t_s = " << r.streams << '\n';
        out << "hpc_w = " << format_double(r.hpc_w) << '\n';
        out << "tx_power_w = " << format_double(r.tx_power_w) << '\n';
        out << "objective = " << format_double(r.objective) << '\n';
        out << "iters_inner = " << r.iters_inner << '\n';
        out << "iters_outer = " << (r.iters_outer ? std::to_string(*r.iters_outer) : "") << '\n';
        out << "penalty_final = " << cell(r.penalty_final) << '\n';
        out << "wall_ms = " << format_double(r.wall_ms) << '\n';
        out << "digital_sum_rate_bps_hz = " << format_double(r.digital_sum_rate) << '\n';
        out << "warning = " << (r.warning ? "true" : "false") << '\n';
        for (const auto &m : r.messages)
            out << "note: " << m << '\n';
    }

    std::vector<EdofPoint> edof_profile(const ExperimentConfig &config)
    {
        std::vector<EdofPoint> out;
        const arma::uword n = config.edof_points;
        const double lambda = config.wavelength();
        for (arma::uword i = 0; i < n; ++i)
        {
            double d = n == 1 ? config.edof_min_m
                              : config.edof_min_m + (config.edof_max_m - config.edof_min_m) * double(i) / double(n - 1);
            Placement p(d, 0.0, 0.5 * pi);
            Scenario s{UpaConfig(config.mt_v, config.mt_h, config.spacing_m()),
                       {{UpaConfig(config.mr_v, config.mr_h, config.spacing_m()), p,
                         cx(free_space_gain(d, lambda), 0.0)}},
                       {},
                       config.carrier_hz,
                       dbm_to_watt(config.noise_dbm)};
            out.push_back({d, edof(assemble_channel(s, 0, ChannelMode::near_field)),
                           edof(assemble_channel(s, 0, ChannelMode::far_field)), analytic_dof(s, 0)});
        }
        return out;
    }

    void write_edof(std::ostream &out, const std::vector<EdofPoint> &points)
    {
        write_row(out, {"distance_m", "edof_near", "edof_far", "dof_analytic"});
        for (const auto &p : points)
            write_row(out, {format_double(p.distance_m), format_double(p.edof_near), format_double(p.edof_far),
                            format_double(p.dof_analytic)});
    }

    void write_edof(const std::string &path, const std::vector<EdofPoint> &points)
    {
        to_file(path, [&](std::ostream &o) { write_edof(o, points); });
    }

    std::vector<CheckResult> validate_invariants(const ExperimentConfig &config, std::uint64_t seed)
    {
        std::vector<CheckResult> out;
        auto check = [&](const std::string &name, bool ok, double value) {
            out.push_back({name, ok, format_double(value)});
        };

        Rng rng(seed);
        Scenario s = sample_scenario(config, rng);
        s.validate();
        const SolverConfig sc = config.solver_config();
        const arma::uword mt = s.bs.size();
        const ChannelList channels = assemble_channels(s, config.channel);

        double worst_edof = 0.0;
        bool edof_ok = true;
        for (const auto &h : channels)
        {
            double e = edof(h);
            edof_ok = edof_ok && e >= 1.0 - 1e-9 && e <= double(std::min(h.n_rows, h.n_cols)) + 1e-9;
            worst_edof = std::max(worst_edof, e);
        }
        check("edof within [1, min(M_r, M_t)]", edof_ok, worst_edof);

        WmmseTsResult r = wmmse_ts_solve(channels, sc);
        double drop = 0.0;
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
            drop = std::max(drop, r.objective_trace[i - 1] - r.objective_trace[i]);
        check("wmmse-ts objective non-decreasing", drop <= 1e-6, drop);
        check("wmmse-ts converged", r.converged, double(r.iterations));

        double budget = sc.power.budget_watts;
        double txp = transmit_power(r.fully_digital, r.selection);
        check("transmit power within budget", txp <= budget * (1.0 + 1e-6), txp);

        arma::cx_mat w = apply_selection(r.fully_digital, r.selection);
        FactorizationResult f = hybrid_factorize(w, r.selection.active_count(), sc.rf_chains);
        double rel = f.residual / std::max(arma::norm(w, "fro"), 1e-300);
        check("factorization residual", rel <= 1e-9, rel);

        const auto &h = f.hybrid;
        double mod = std::max(arma::abs(arma::abs(h.shifter_a) - 1.0).max(),
                              arma::abs(arma::abs(h.shifter_b) - 1.0).max());
        double split = arma::abs(h.shifter_a + h.shifter_b - h.analog).max();
        check("unit-modulus phase shifters", mod <= 1e-12, mod);
        check("phase shifter pairs sum to the analog precoder", split <= 1e-12, split);

        double rd = arma::accu(achievable_rate(channels, w, r.selection, sc.noise_power));
        double rh = arma::accu(achievable_rate(channels, h.effective(), r.selection, sc.noise_power));
        double gap = std::abs(rd - rh) / std::max(std::abs(rd), 1e-300);
        check("hybrid rate equals fully-digital rate", gap <= 1e-8, gap);

        double hpc = hardware_power(r.selection, sc.power, mt);
        double expect = (sc.power.rf_chain_watts + 2.0 * double(mt) * sc.power.shifter_watts) *
                        double(r.selection.active_count());
        check("hardware power formula", std::abs(hpc - expect) <= 1e-12 * std::max(1.0, expect), hpc);

        double obj = network_objective(r.rates, hpc, sc.beta);
        check("objective matches rates and hardware power", std::abs(obj - r.objective) <= 1e-9, obj - r.objective);
        return out;
    }
}
