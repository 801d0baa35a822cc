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

#include "nfhbf/factorization.hpp"

#include <stdexcept>

namespace nfhbf
{
    std::pair<cx, cx> phase_split(double amplitude, double phase)
    {
        if (!std::isfinite(amplitude) || !std::isfinite(phase))
            throw std::invalid_argument("phase_split: non-finite input");
        if (amplitude < -1e-12 || amplitude > 2.0 + 1e-12)
            throw std::invalid_argument("phase_split: amplitude must lie in [0, 2]");
        double half = std::clamp(0.5 * amplitude, 0.0, 1.0);

        // exp(j acos(a/2)) written out as a/2 + j sqrt(1 - a^2/4)
        cx e(half, std::sqrt((1.0 - half) * (1.0 + half)));
        cx u = std::polar(1.0, phase);
        return {u * e, u * std::conj(e)};
    }

    void split_analog(const arma::cx_mat &analog, arma::cx_mat &shifter_a, arma::cx_mat &shifter_b)
    {
        shifter_a.set_size(arma::size(analog));
        shifter_b.set_size(arma::size(analog));
        for (arma::uword i = 0; i < analog.n_elem; ++i)
        {
            auto [a, b] = phase_split(std::abs(analog(i)), std::arg(analog(i)));
            shifter_a(i) = a;
            shifter_b(i) = b;
        }
    }

    FactorizationResult hybrid_factorize(const arma::cx_mat &fully_digital, arma::uword active, arma::uword rf_chains)
    {
        const arma::uword mt = fully_digital.n_rows, n = fully_digital.n_cols;
        if (rf_chains == 0)
            rf_chains = active;
        if (active > mt)
            throw std::invalid_argument("hybrid_factorize: more active chains than antennas");
        if (active > rf_chains)
            throw std::invalid_argument("hybrid_factorize: more active chains than RF chains");

        FactorizationResult out;
        HybridBeamformer &hb = out.hybrid;
        hb.analog.zeros(mt, rf_chains);
        hb.baseband.zeros(rf_chains, n);

        arma::uvec nz;
        {
            std::vector<arma::uword> idx;
            for (arma::uword c = 0; c < n; ++c)
                if (arma::norm(fully_digital.col(c)) > 0.0)
                    idx.push_back(c);
            nz = arma::uvec(idx);
        }

        if (active > 0 && !nz.is_empty())
        {
            // Orthonormal basis of the column space
            arma::cx_mat v1;
            if (nz.n_elem <= active)
            {
                arma::cx_mat q, r;
                arma::qr(q, r, arma::cx_mat(fully_digital.cols(nz)));
                v1 = q.cols(0, active - 1);
            }
            else
            {
                arma::cx_mat u, v;
                arma::vec s;
                arma::svd_econ(u, s, v, arma::cx_mat(fully_digital.cols(nz)), "left");
                v1 = u.cols(0, active - 1);
            }
            arma::cx_mat w1 = v1.t() * fully_digital;

            // LQ of V1^H through QR of V1: V1^H = R^H Q^H
            arma::cx_mat q2, r2;
            arma::qr_econ(q2, r2, v1);
            arma::cx_mat w2 = r2.t();

            arma::vec xi(active);
            for (arma::uword i = 0; i < active; ++i)
                xi(i) = 0.5 * arma::max(arma::abs(q2.col(i)));

            hb.analog.cols(0, active - 1) =
                q2.each_row() / arma::conv_to<arma::cx_rowvec>::from(xi.t());
            hb.baseband.rows(0, active - 1) = arma::diagmat(arma::conv_to<arma::cx_vec>::from(xi)) * w2.t() * w1;
            out.scaler = xi;
            hb.active_chains = active;
        }
        else
        {
            out.scaler.reset();
            hb.active_chains = 0;
        }

        split_analog(hb.analog, hb.shifter_a, hb.shifter_b);
        out.residual = arma::norm(fully_digital - hb.analog * hb.baseband, "fro");
        return out;
    }
}
