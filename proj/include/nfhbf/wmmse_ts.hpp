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

#ifndef NFHBF_WMMSE_TS_HPP
#define NFHBF_WMMSE_TS_HPP

#include "nfhbf/solver_config.hpp"
#include "nfhbf/wmmse.hpp"

#include <vector>

namespace nfhbf
{
    // Targets f_{j,k} and their squared projections on the gram eigenbasis
    struct StreamMetrics
    {
        arma::cx_mat targets;    // M_t x (K*M_r)
        arma::mat projections;   // M_t x (K*M_r), x_{i,(j,k)}
        arma::uword streams_per_user = 1;
    };

    StreamMetrics stream_metrics(const arma::cx_mat &targets, const GramEvd &gram, arma::uword streams_per_user);

    struct SelectionRule
    {
        double beta = 0.7;
        double mu = 1.5;
        PowerModel power;
        arma::uword antennas = 0;
        arma::uword max_chains = 0;

        double chain_cost() const { return power.chain_cost(antennas); }
    };

    SelectionRule selection_rule(const SolverConfig &config, arma::uword antennas);

    // C_{j,k} = -sum_i x (J + 2 xi) / (J + xi)^2
    arma::vec stream_contribution(const StreamMetrics &metrics, const arma::vec &eigs, double multiplier);

    // On iff beta mu C + (1 - beta) chain cost < 0, capped at max_chains by most negative score
    StreamSelection select_streams(const arma::vec &contributions, arma::uword streams_per_user,
                                   const SelectionRule &rule);

    // G (J + xi)^-1 G^H f for every column of targets
    arma::cx_mat digital_precoder(const arma::cx_mat &targets, const GramEvd &gram, double multiplier);

    double power_at_multiplier(const StreamSelection &selection, const StreamMetrics &metrics, const arma::vec &eigs,
                               double multiplier);

    struct BisectionOptions
    {
        double lower = 0.0;
        double upper = 1e8;
        double tolerance = 1e-6;
        arma::uword max_iters = 200;
    };

    struct BisectionResult
    {
        double multiplier = 0.0;
        StreamSelection selection;
        arma::cx_mat fully_digital;
        double power = 0.0;
        bool binding = false;
        arma::uword iterations = 0;
    };

    // Multiplier search with the selection re-evaluated at every trial point, or frozen when given
    BisectionResult bisection_solve(const StreamMetrics &metrics, const GramEvd &gram, const SelectionRule &rule,
                                    const BisectionOptions &options = {}, const StreamSelection *frozen = nullptr);

    // sum over active streams of beta mu C + (1 - beta) chain cost at the result's multiplier
    double block_objective(const BisectionResult &result, const StreamMetrics &metrics, const arma::vec &eigs,
                           const SelectionRule &rule);

    struct WmmseTsResult
    {
        arma::cx_mat fully_digital;
        StreamSelection selection;
        WmmseState state;
        arma::vec rates;
        double objective = 0.0;
        std::vector<double> objective_trace; // network objective after each iteration
        arma::uword iterations = 0;
        bool converged = false;
        bool warning = false;
    };

    // Water-filling powers for channel gains under a total budget; zero gains get nothing
    arma::vec water_filling(const arma::vec &gains, double power);

    // Block-diagonalized eigenmodes with water-filled powers; the strongest modes are switched on,
    // as many as the network objective of the interference-free model favours, unless frozen
    WmmseState initial_state(const ChannelList &channels, const SolverConfig &config);

    WmmseTsResult wmmse_ts_solve(const ChannelList &channels, const SolverConfig &config);

    namespace detail
    {
        // Shared by the continuous and penalized solvers; the system shift is offset + multiplier
        arma::vec contribution_at_shift(const arma::mat &projections, const arma::vec &eigs, double shift);
        double power_at_shift(const StreamSelection &selection, const arma::mat &projections, const arma::vec &eigs,
                              double shift);
        arma::cx_mat precoder_at_shift(const arma::cx_mat &targets, const GramEvd &gram, double shift);
        BisectionResult bisection_at_offset(const StreamMetrics &metrics, const GramEvd &gram,
                                            const SelectionRule &rule, const BisectionOptions &options,
                                            const StreamSelection *frozen, double offset);
        double block_objective_at_offset(const BisectionResult &result, const StreamMetrics &metrics,
                                         const arma::vec &eigs, const SelectionRule &rule, double offset);
    }
}

#endif
