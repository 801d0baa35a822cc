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

#ifndef NFHBF_HARNESS_HPP
#define NFHBF_HARNESS_HPP

#include "nfhbf/config.hpp"
#include "nfhbf/geometry.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace nfhbf
{
    using Rng = std::mt19937_64;

    // Uniform on [0, 1) from the top 53 bits, identical on every platform
    double uniform01(Rng &rng);

    Scenario sample_scenario(const ExperimentConfig &config, Rng &rng);

    struct TrialRecord
    {
        double sweep_value = 0.0; // NaN without a sweep
        arma::uword trial = 0;
        std::uint64_t seed = 0;
        arma::vec rates; // per user, evaluated on the hybrid precoder
        double sum_rate = 0.0;
        arma::uword streams = 0; // T_s
        double hpc_w = 0.0;
        double tx_power_w = 0.0;
        double objective = 0.0;
        arma::uword iters_inner = 0;
        std::optional<arma::uword> iters_outer; // PLI only
        std::optional<double> penalty_final;    // PLI only
        double wall_ms = 0.0;

        double digital_sum_rate = 0.0; // rate of the fully-digital precoder
        double factorization_residual = 0.0;
        bool warning = false;
        std::vector<std::string> messages;
    };

    struct TrialOptions
    {
        bool timing = false; // wall_ms stays 0 unless set
    };

    TrialRecord run_trial(const Scenario &scenario, const ExperimentConfig &config, arma::uword trial,
                          std::uint64_t seed, double sweep_value, const TrialOptions &options = {});

    // Seeded trial: seed drives the scenario draw
    TrialRecord run_seeded_trial(const ExperimentConfig &config, arma::uword trial, std::uint64_t seed,
                                 double sweep_value, const TrialOptions &options = {});

    struct SweepOptions
    {
        bool timing = false;
        unsigned jobs = 1;
    };

    struct SweepResult
    {
        std::vector<TrialRecord> records; // sweep value ascending, then trial
        std::optional<std::string> error; // set when a trial failed; records hold what finished before it
        bool warning() const;
    };

    SweepResult run_sweep(const ExperimentConfig &config, const SweepOptions &options = {});

    struct FieldStats
    {
        double mean = 0.0;
        double std = 0.0; // sample standard deviation, 0 for one trial
        bool present = false;
    };

    struct SummaryRow
    {
        double sweep_value = 0.0;
        arma::uword trials = 0;
        std::vector<FieldStats> fields; // order of summary_fields()
    };

    std::vector<std::string> summary_fields(arma::uword users);
    std::vector<SummaryRow> aggregate(const std::vector<TrialRecord> &records, arma::uword users);

    std::vector<std::string> results_header(arma::uword users);
    void write_results(std::ostream &out, const std::vector<TrialRecord> &records, SweepAxis axis,
                       arma::uword users);
    void write_results(const std::string &path, const std::vector<TrialRecord> &records, SweepAxis axis,
                       arma::uword users);
    void write_summary(std::ostream &out, const std::vector<SummaryRow> &rows, SweepAxis axis, arma::uword users);
    void write_summary(const std::string &path, const std::vector<SummaryRow> &rows, SweepAxis axis,
                       arma::uword users);

    // Human-readable dump used by the solve command
    void print_record(std::ostream &out, const TrialRecord &record);

    struct EdofPoint
    {
        double distance_m = 0.0;
        double edof_near = 0.0;
        double edof_far = 0.0;
        double dof_analytic = 0.0;
    };

    // Broadside LoS user on the configured distance grid
    std::vector<EdofPoint> edof_profile(const ExperimentConfig &config);
    void write_edof(std::ostream &out, const std::vector<EdofPoint> &points);
    void write_edof(const std::string &path, const std::vector<EdofPoint> &points);

    struct CheckResult
    {
        std::string name;
        bool pass = false;
        std::string detail;
    };

    // Invariant checks on one seeded scenario
    std::vector<CheckResult> validate_invariants(const ExperimentConfig &config, std::uint64_t seed);

    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}

#endif
