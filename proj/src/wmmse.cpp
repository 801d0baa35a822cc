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

#include "nfhbf/wmmse.hpp"

#include <stdexcept>

namespace nfhbf
{
    namespace
    {
        // Eigenvalues of a Hermitian matrix, rejecting clearly indefinite input
        void hermitian_eig(const arma::cx_mat &a, arma::vec &ev, arma::cx_mat &u, const char *who)
        {
            arma::cx_mat h = 0.5 * (a + a.t());
            if (!arma::eig_sym(ev, u, h))
                throw std::runtime_error(std::string(who) + ": eigendecomposition failed");
        }
    }

    arma::cx_mat GramEvd::reconstruct() const
    {
        return basis * arma::diagmat(arma::conv_to<arma::cx_vec>::from(eigenvalues)) * basis.t();
    }

    arma::cx_mat hermitian_inverse(const arma::cx_mat &a)
    {
        arma::vec ev;
        arma::cx_mat u;
        hermitian_eig(a, ev, u, "hermitian_inverse");
        double top = ev.max();
        if (!(top > 0.0) || ev.min() < -1e-10 * top)
            throw std::invalid_argument("hermitian_inverse: matrix is not positive definite");
        ev = arma::clamp(ev, 0.0, arma::datum::inf);
        if (ev.min() * 1e12 < top)
            ev += 1e-12 * std::max(top, 1.0);
        arma::cx_mat ui = u.each_row() % arma::conv_to<arma::cx_rowvec>::from(1.0 / ev.t());
        arma::cx_mat inv = ui * u.t();
        return 0.5 * (inv + inv.t());
    }

    arma::cx_mat update_combiner(const ChannelList &channels, const arma::cx_mat &fully_digital,
                                 const StreamSelection &selection, double noise, arma::uword user)
    {
        if (!(noise > 0.0))
            throw std::invalid_argument("update_combiner: noise must be positive");
        const arma::uword mr = channels.front().n_rows;
        arma::cx_mat q = interference_covariance(channels, fully_digital, selection, noise, user);
        arma::cx_mat wt = user_block(apply_selection(fully_digital, selection), user, mr);
        arma::cx_mat hw = channels[user] * wt;
        arma::cx_mat total = q + hw * hw.t();
        total = 0.5 * (total + total.t());
        arma::cx_mat z;
        if (!arma::solve(z, total, hw, arma::solve_opts::likely_sympd))
            z = hermitian_inverse(total) * hw;
        return z;
    }

    arma::cx_mat update_weight(const arma::cx_mat &mse, double mu)
    {
        if (!(mu > 0.0))
            throw std::invalid_argument("update_weight: mu must be positive");
        if (mse.n_rows != mse.n_cols)
            throw std::invalid_argument("update_weight: mse must be square");
        return hermitian_inverse(mse) / mu;
    }

    arma::cx_mat interference_gram(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                   const std::vector<arma::cx_mat> &weights)
    {
        if (channels.size() != combiners.size() || channels.size() != weights.size())
            throw std::invalid_argument("interference_gram: per-user lists differ in length");
        const arma::uword mt = channels.front().n_cols;
        arma::cx_mat a(mt, mt, arma::fill::zeros);
        for (std::size_t k = 0; k < channels.size(); ++k)
        {
            arma::cx_mat hz = channels[k].t() * combiners[k];
            a += hz * weights[k] * hz.t();
        }
        return 0.5 * (a + a.t());
    }

    GramEvd interference_gram_evd(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                  const std::vector<arma::cx_mat> &weights)
    {
        arma::cx_mat a = interference_gram(channels, combiners, weights);
        arma::vec ev;
        arma::cx_mat u;
        hermitian_eig(a, ev, u, "interference_gram_evd");

        GramEvd out;
        out.eigenvalues = arma::flipud(ev);
        out.basis = arma::fliplr(u);

        // Numerically zero directions are set to exactly zero
        double top = out.eigenvalues.is_empty() ? 0.0 : std::max(out.eigenvalues(0), 0.0);
        for (double &e : out.eigenvalues)
            if (e <= 1e-12 * top)
                e = 0.0;
        return out;
    }

    arma::cx_mat combiner_targets(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                  const std::vector<arma::cx_mat> &weights)
    {
        const arma::uword mr = channels.front().n_rows, mt = channels.front().n_cols;
        arma::cx_mat f(mt, channels.size() * mr);
        for (std::size_t k = 0; k < channels.size(); ++k)
            f.cols(k * mr, k * mr + mr - 1) = channels[k].t() * combiners[k] * weights[k];
        return f;
    }

    std::vector<arma::cx_mat> mse_matrices(const WmmseState &state, const ChannelList &channels, double noise)
    {
        const arma::uword mr = channels.front().n_rows;
        std::vector<arma::cx_mat> out;
        out.reserve(channels.size());
        for (arma::uword k = 0; k < channels.size(); ++k)
        {
            arma::cx_mat q = interference_covariance(channels, state.fully_digital, state.selection, noise, k);
            out.push_back(mse_matrix(state.combiners[k], channels[k], user_block(state.fully_digital, k, mr),
                                     state.selection.user_flags(k), q));
        }
        return out;
    }

    double surrogate_value(const WmmseState &state, const ChannelList &channels, double beta, double mu,
                           double hpc, double noise)
    {
        const arma::uword mr = channels.front().n_rows;
        std::vector<arma::cx_mat> e = mse_matrices(state, channels, noise);
        double acc = 0.0;
        for (std::size_t k = 0; k < channels.size(); ++k)
        {
            arma::vec ev = arma::eig_sym(arma::cx_mat(0.5 * (state.weights[k] + state.weights[k].t())));
            if (ev.min() <= 0.0)
                throw std::invalid_argument("surrogate_value: weights must be positive definite");
            double logdet = arma::accu(arma::log2(ev));
            double tr = std::real(arma::trace(state.weights[k] * e[k]));
            acc += logdet + mu * double(mr) - mu * tr;
        }
        return beta * acc - (1.0 - beta) * hpc;
    }
}
