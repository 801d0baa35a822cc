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

#include "nfhbf/metrics.hpp"

#include <stdexcept>

namespace nfhbf
{
    StreamSelection::StreamSelection(arma::uword streams_per_user, arma::uword users, bool on)
        : flags_(streams_per_user, users)
    {
        flags_.fill(on ? 1 : 0);
    }

    StreamSelection::StreamSelection(const arma::umat &flags) : flags_(flags)
    {
        if (arma::any(arma::vectorise(flags_) > 1))
            throw std::invalid_argument("StreamSelection: flags must be 0 or 1");
    }

    arma::uvec StreamSelection::active_columns() const
    {
        return arma::find(arma::vectorise(flags_));
    }

    bool StreamSelection::operator==(const StreamSelection &o) const
    {
        return arma::size(flags_) == arma::size(o.flags_) && arma::all(arma::vectorise(flags_ == o.flags_));
    }

    void PowerModel::validate() const
    {
        if (!(rf_chain_watts > 0.0) || !(shifter_watts > 0.0) || !(budget_watts > 0.0))
            throw std::invalid_argument("PowerModel: all power values must be positive");
    }

    void check_layout(const ChannelList &channels, const arma::cx_mat &precoders, const StreamSelection &selection)
    {
        if (channels.empty())
            throw std::invalid_argument("no channels given");
        const arma::uword mr = channels.front().n_rows, mt = channels.front().n_cols;
        for (const auto &h : channels)
            if (h.n_rows != mr || h.n_cols != mt)
                throw std::invalid_argument("channels must share one shape");
        if (precoders.n_rows != mt || precoders.n_cols != channels.size() * mr)
            throw std::invalid_argument("precoder shape does not match the channels");
        if (selection.users() != channels.size() || selection.streams_per_user() != mr)
            throw std::invalid_argument("selection shape does not match the channels");
    }

    arma::cx_mat apply_selection(const arma::cx_mat &precoders, const StreamSelection &selection)
    {
        arma::cx_mat out = precoders;
        for (arma::uword c = 0; c < out.n_cols; ++c)
            if (!selection.active_column(c))
                out.col(c).zeros();
        return out;
    }

    arma::cx_mat interference_covariance(const ChannelList &channels, const arma::cx_mat &precoders,
                                         const StreamSelection &selection, double noise, arma::uword user)
    {
        check_layout(channels, precoders, selection);
        const arma::uword mr = channels.front().n_rows;
        const arma::cx_mat &h = channels[user];

        arma::cx_mat q = noise * arma::eye<arma::cx_mat>(mr, mr);
        for (arma::uword i = 0; i < channels.size(); ++i)
        {
            if (i == user)
                continue;
            arma::cx_mat b = h * user_block(apply_selection(precoders, selection), i, mr);
            q += b * b.t();
        }
        return 0.5 * (q + q.t());
    }

    arma::vec achievable_rate(const ChannelList &channels, const arma::cx_mat &precoders,
                              const StreamSelection &selection, double noise)
    {
        if (!(noise > 0.0))
            throw std::invalid_argument("achievable_rate: noise must be positive");
        check_layout(channels, precoders, selection);

        const arma::uword mr = channels.front().n_rows;
        const arma::cx_mat v = apply_selection(precoders, selection);
        arma::vec rates(channels.size());
        for (arma::uword k = 0; k < channels.size(); ++k)
        {
            arma::cx_mat q = interference_covariance(channels, v, selection, noise, k);
            arma::cx_mat s = channels[k] * user_block(v, k, mr);

            // Whitened signal L^-1 H V, rate = sum log2(1 + eig)
            arma::cx_mat l = arma::chol(q, "lower");
            arma::cx_mat ws = arma::solve(arma::trimatl(l), s);
            arma::cx_mat m = ws * ws.t();
            arma::vec ev = arma::eig_sym(arma::cx_mat(0.5 * (m + m.t())));
            double r = 0.0;
            for (double e : ev)
                r += std::log1p(std::max(e, 0.0));
            rates(k) = r / std::log(2.0);
        }
        return rates;
    }

    double hardware_power(arma::uword active_chains, const PowerModel &model, arma::uword mt)
    {
        return model.chain_cost(mt) * double(active_chains);
    }

    double hardware_power(const StreamSelection &selection, const PowerModel &model, arma::uword mt)
    {
        return hardware_power(selection.active_count(), model, mt);
    }

    double transmit_power(const arma::cx_mat &precoders, const StreamSelection &selection)
    {
        if (precoders.n_cols != selection.users() * selection.streams_per_user())
            throw std::invalid_argument("transmit_power: precoder shape does not match the selection");
        double p = 0.0;
        for (arma::uword c = 0; c < precoders.n_cols; ++c)
            if (selection.active_column(c))
                p += arma::accu(arma::square(arma::abs(precoders.col(c))));
        return p;
    }

    double network_objective(double sum_rate, double hpc_watts, double beta)
    {
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("network_objective: beta must lie in [0, 1]");
        return beta * sum_rate - (1.0 - beta) * hpc_watts;
    }

    double network_objective(const arma::vec &rates, double hpc_watts, double beta)
    {
        return network_objective(arma::accu(rates), hpc_watts, beta);
    }

    arma::cx_mat mse_matrix(const arma::cx_mat &combiner, const arma::cx_mat &channel, const arma::cx_mat &precoder,
                            const arma::uvec &flags, const arma::cx_mat &interference)
    {
        const arma::uword mr = channel.n_rows;
        if (combiner.n_rows != mr || combiner.n_cols != mr || precoder.n_rows != channel.n_cols ||
            precoder.n_cols != mr || flags.n_elem != mr || interference.n_rows != mr || interference.n_cols != mr)
            throw std::invalid_argument("mse_matrix: dimension mismatch");

        arma::cx_mat vt = precoder;
        for (arma::uword j = 0; j < mr; ++j)
            if (flags(j) == 0)
                vt.col(j).zeros();
        arma::cx_mat r = arma::eye<arma::cx_mat>(mr, mr) - combiner.t() * channel * vt;
        arma::cx_mat e = combiner.t() * interference * combiner + r * r.t();
        return 0.5 * (e + e.t());
    }
}
