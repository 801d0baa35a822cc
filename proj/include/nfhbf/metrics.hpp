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

#ifndef NFHBF_METRICS_HPP
#define NFHBF_METRICS_HPP

#include "nfhbf/types.hpp"

namespace nfhbf
{
    // Diagonal 0/1 data-selection flags, one column per user
    class StreamSelection
    {
    public:
        StreamSelection() = default;
        StreamSelection(arma::uword streams_per_user, arma::uword users, bool on = false);
        explicit StreamSelection(const arma::umat &flags);

        arma::uword streams_per_user() const { return flags_.n_rows; }
        arma::uword users() const { return flags_.n_cols; }
        arma::uword active_count() const { return arma::accu(flags_); }

        bool active(arma::uword stream, arma::uword user) const { return flags_(stream, user) != 0; }
        void set(arma::uword stream, arma::uword user, bool on) { flags_(stream, user) = on ? 1 : 0; }

        // Flag of column k*M_r + j in the stacked precoder layout
        bool active_column(arma::uword col) const { return flags_(col % flags_.n_rows, col / flags_.n_rows) != 0; }

        const arma::umat &flags() const { return flags_; }
        arma::uvec active_columns() const;
        arma::uvec user_flags(arma::uword user) const { return flags_.col(user); }

        bool operator==(const StreamSelection &o) const;

    private:
        arma::umat flags_;
    };

    struct PowerModel
    {
        double rf_chain_watts = 0.2;
        double shifter_watts = 0.01;
        double budget_watts = 0.0316227766016838;

        // Hardware cost of one active chain feeding mt antennas through two shifters each
        double chain_cost(arma::uword mt) const { return rf_chain_watts + 2.0 * double(mt) * shifter_watts; }
        void validate() const;
    };

    // Analog network P = P1 + P2 and baseband precoder; the leading active_chains columns of P are live
    struct HybridBeamformer
    {
        arma::cx_mat analog;     // M_t x M_t^RF
        arma::cx_mat shifter_a;  // P1
        arma::cx_mat shifter_b;  // P2
        arma::cx_mat baseband;   // M_t^RF x (K*M_r), column k*M_r + j
        arma::uword active_chains = 0;

        arma::cx_mat effective() const { return analog * baseband; }
    };

    // Columns of user k in a stacked M_t x (K*M_r) precoder
    inline arma::cx_mat user_block(const arma::cx_mat &precoders, arma::uword user, arma::uword mr)
    {
        return precoders.cols(user * mr, user * mr + mr - 1);
    }

    // Copy with inactive columns zeroed
    arma::cx_mat apply_selection(const arma::cx_mat &precoders, const StreamSelection &selection);

    // sigma^2 I plus the interference from all other users at user k
    arma::cx_mat interference_covariance(const ChannelList &channels, const arma::cx_mat &precoders,
                                         const StreamSelection &selection, double noise, arma::uword user);

    // Per-user rates in bits/s/Hz
    arma::vec achievable_rate(const ChannelList &channels, const arma::cx_mat &precoders,
                              const StreamSelection &selection, double noise);

    double hardware_power(arma::uword active_chains, const PowerModel &model, arma::uword mt);
    double hardware_power(const StreamSelection &selection, const PowerModel &model, arma::uword mt);

    double transmit_power(const arma::cx_mat &precoders, const StreamSelection &selection);

    double network_objective(const arma::vec &rates, double hpc_watts, double beta);
    double network_objective(double sum_rate, double hpc_watts, double beta);

    // E = Z^H Q Z + (I - Z^H H V T)(I - Z^H H V T)^H
    arma::cx_mat mse_matrix(const arma::cx_mat &combiner, const arma::cx_mat &channel, const arma::cx_mat &precoder,
                            const arma::uvec &flags, const arma::cx_mat &interference);

    void check_layout(const ChannelList &channels, const arma::cx_mat &precoders, const StreamSelection &selection);
}

#endif
