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

#ifndef NFHBF_CONFIG_HPP
#define NFHBF_CONFIG_HPP

#include "nfhbf/geometry.hpp"
#include "nfhbf/solver_config.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfhbf
{
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    enum class SolverKind
    {
        wmmse_ts,
        pli,
        fixed_streams
    };

    enum class SweepAxis
    {
        none,
        p_max_dbm,
        beta,
        mu,
        bits,
        user_distance
    };

    std::string to_string(SolverKind kind);
    std::string to_string(SweepAxis axis);
    std::string to_string(ChannelMode mode);

    struct ExperimentConfig
    {
        arma::uword mt_v = 8, mt_h = 8;
        arma::uword mr_v = 2, mr_h = 2;
        arma::uword k_users = 2;
        arma::uword l_scatterers = 5;
        arma::uword rf_chains = 8;
        double carrier_hz = 28e9;
        double noise_dbm = -105.0;
        double p_max_dbm = 15.0;
        double beta = 0.7;
        double mu = 1.5;
        double rho0 = 100.0;
        double shrink = 0.75;
        unsigned bits = 3;
        double eps1 = 1e-6, eps2 = 1e-2, eps3 = 1e-2, eps4 = 1e-2;
        double ring_inner_m = 5.0;
        double ring_width_m = 5.0;
        double scatter_radius_m = 10.0;
        double p_rf_w = 0.2;
        double p_ps_w = 0.01;
        arma::uword trials = 20;
        std::uint64_t seed = 1;

        double spacing_wavelengths = 0.5;
        SolverKind solver = SolverKind::wmmse_ts;
        ChannelMode channel = ChannelMode::near_field;
        arma::uword fixed_streams = 1;
        SweepAxis sweep_axis = SweepAxis::none;
        std::vector<double> sweep_values;
        arma::uword max_iters = 500;
        arma::uword max_inner = 100;
        arma::uword max_outer = 60;
        arma::uword warm_start_iters = 5;
        double edof_min_m = 2.0;
        double edof_max_m = 20.0;
        arma::uword edof_points = 19;

        double wavelength() const { return speed_of_light / carrier_hz; }
        double spacing_m() const { return spacing_wavelengths * wavelength(); }

        // Throws ConfigError
        void validate() const;

        SolverConfig solver_config() const;

        // Copy with the sweep axis set to value
        ExperimentConfig at_sweep_value(double value) const;

        // Sweep grid, a single NaN entry when there is no sweep
        std::vector<double> sweep_grid() const;
    };

    // Flat "key = value" text; '#' starts a comment
    ExperimentConfig parse_config(std::istream &in, const std::string &source);
    ExperimentConfig load_config(const std::string &path);
    std::string format_config(const ExperimentConfig &config);
}

#endif
