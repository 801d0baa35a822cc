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

#ifndef NFHBF_WMMSE_HPP
#define NFHBF_WMMSE_HPP

#include "nfhbf/metrics.hpp"

#include <vector>

namespace nfhbf
{
    struct WmmseState
    {
        std::vector<arma::cx_mat> combiners; // Z_k, M_r x M_r
        std::vector<arma::cx_mat> weights;   // Gamma_k, Hermitian PSD
        arma::cx_mat fully_digital;          // M_t x (K*M_r)
        StreamSelection selection;
        double multiplier = 0.0;
    };

    // Eigendecomposition G J G^H with eigenvalues sorted descending
    struct GramEvd
    {
        arma::cx_mat basis;
        arma::vec eigenvalues;

        arma::cx_mat reconstruct() const;
    };

    // Inverse of a Hermitian positive definite matrix; a tiny ridge is added when badly conditioned
    arma::cx_mat hermitian_inverse(const arma::cx_mat &a);

    // MMSE receive combiner of one user
    arma::cx_mat update_combiner(const ChannelList &channels, const arma::cx_mat &fully_digital,
                                 const StreamSelection &selection, double noise, arma::uword user);

    // Gamma = mse^-1 / mu
    arma::cx_mat update_weight(const arma::cx_mat &mse, double mu);

    // Sum over users of H^H Z Gamma Z^H H
    arma::cx_mat interference_gram(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                   const std::vector<arma::cx_mat> &weights);
    GramEvd interference_gram_evd(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                  const std::vector<arma::cx_mat> &weights);

    // Stacked targets [H_k^H Z_k Gamma_k], M_t x (K*M_r)
    arma::cx_mat combiner_targets(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                  const std::vector<arma::cx_mat> &weights);

    // Per-user MSE matrices of the current state
    std::vector<arma::cx_mat> mse_matrices(const WmmseState &state, const ChannelList &channels, double noise);

    // beta * sum_k [log2|Gamma_k| + mu M_r - mu tr(Gamma_k E_k)] - (1 - beta) hpc
    double surrogate_value(const WmmseState &state, const ChannelList &channels, double beta, double mu,
                           double hpc, double noise);
}

#endif
