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

#ifndef NFHBF_FACTORIZATION_HPP
#define NFHBF_FACTORIZATION_HPP

#include "nfhbf/metrics.hpp"

#include <utility>

namespace nfhbf
{
    // Two unit phasors summing to amplitude * exp(j phase), amplitude in [0, 2]
    std::pair<cx, cx> phase_split(double amplitude, double phase);

    // Entrywise split of an analog matrix with |P| <= 2
    void split_analog(const arma::cx_mat &analog, arma::cx_mat &shifter_a, arma::cx_mat &shifter_b);

    struct FactorizationResult
    {
        HybridBeamformer hybrid;
        double residual = 0.0; // |W - P W_BB|_F
        arma::vec scaler;      // diagonal of the column scaling
    };

    // Exact hybrid realization of a fully-digital precoder with active chains;
    // rf_chains = 0 allocates exactly active chains
    FactorizationResult hybrid_factorize(const arma::cx_mat &fully_digital, arma::uword active,
                                         arma::uword rf_chains = 0);
}

#endif
