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

#ifndef NFHBF_SOLVER_CONFIG_HPP
#define NFHBF_SOLVER_CONFIG_HPP

#include "nfhbf/metrics.hpp"

#include <optional>

namespace nfhbf
{
    struct SolverConfig
    {
        double beta = 0.7;
        double mu = 1.5;
        double noise_power = 3.1622776601683794e-14;
        PowerModel power;
        arma::uword rf_chains = 8;

        double eps1 = 1e-6;  // bisection power tolerance
        double eps2 = 1e-2;  // relative objective change, continuous solver
        double eps3 = 1e-2;  // relative objective change, inner penalty loop
        double eps4 = 1e-2;  // penalty tolerance

        double rho0 = 100.0;
        double shrink = 0.75;
        unsigned bits = 3;

        arma::uword max_iters = 500;
        arma::uword max_inner = 100;
        arma::uword max_outer = 60;
        arma::uword warm_start_iters = 5;

        double xi_lower = 0.0;
        double xi_upper = 1e8;

        // When set, the selection step is skipped and these flags are used throughout
        std::optional<StreamSelection> frozen_selection;

        void validate(arma::uword users, arma::uword streams_per_user, arma::uword antennas) const;
    };
}

#endif
