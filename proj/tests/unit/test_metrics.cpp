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
#include "nfhbf/wmmse.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace nfhbf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    // log2 det(I + Q^-1 S S^H) with Q built by hand
    double det_rate(const ChannelList &ch, const arma::cx_mat &v, arma::uword k, arma::uword mr, double noise)
    {
        arma::cx_mat q = noise * arma::eye<arma::cx_mat>(mr, mr);
        for (arma::uword i = 0; i < ch.size(); ++i)
            if (i != k)
            {
                arma::cx_mat b = ch[k] * v.cols(i * mr, i * mr + mr - 1);
                q += b * b.t();
            }
        arma::cx_mat s = ch[k] * v.cols(k * mr, k * mr + mr - 1);
        cx ld = arma::log_det(arma::cx_mat(arma::eye<arma::cx_mat>(mr, mr) + arma::solve(q, s * s.t())));
        return ld.real() / std::log(2.0);
    }

    struct Instance
    {
        ChannelList channels;
        arma::cx_mat precoders;
        StreamSelection selection;
    };

    Instance random_instance(Rng &rng, arma::uword k, arma::uword mr, arma::uword mt)
    {
        Instance out;
        for (arma::uword i = 0; i < k; ++i)
            out.channels.push_back(test::random_cx(rng, mr, mt));
        out.precoders = test::random_cx(rng, mt, k * mr);
        arma::umat flags(mr, k);
        for (auto &f : flags)
            f = rng() % 4 != 0;
        out.selection = StreamSelection(flags);
        return out;
    }
}

TEST_CASE("selection flags map onto stacked columns")
{
    arma::umat f = {{1, 0, 1}, {0, 0, 1}};
    StreamSelection s(f);
    CHECK(s.streams_per_user() == 2);
    CHECK(s.users() == 3);
    CHECK(s.active_count() == 3);
    CHECK(s.active_column(0));
    CHECK_FALSE(s.active_column(1));
    CHECK_FALSE(s.active_column(2));
    CHECK(s.active_column(5));
    arma::uvec cols = s.active_columns();
    CHECK(arma::all(cols == arma::uvec{0, 4, 5}));
    CHECK_THROWS_AS(StreamSelection(arma::umat(arma::uvec{2})), std::invalid_argument);
    StreamSelection t(2, 3, false);
    t.set(0, 0, true);
    t.set(0, 2, true);
    t.set(1, 2, true);
    CHECK(s == t);
}

TEST_CASE("single-stream rate is log2(1 + snr)")
{
    Rng rng(11);
    arma::cx_mat h = test::random_cx(rng, 1, 6);
    arma::cx_mat w = test::random_cx(rng, 6, 1);
    double noise = 0.3;
    arma::vec r = achievable_rate({h}, w, StreamSelection(1, 1, true), noise);
    double snr = std::norm(arma::as_scalar(h * w)) / noise;
    CHECK_THAT(r(0), WithinRel(std::log2(1.0 + snr), 1e-12));
    CHECK(achievable_rate({h}, w, StreamSelection(1, 1, false), noise)(0) == 0.0);
}

TEST_CASE("multi-user rates match the log-det formula")
{
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial)
    {
        arma::uword k = 1 + rng() % 3, mr = 1 + rng() % 3, mt = 4 + rng() % 5;
        Instance in = random_instance(rng, k, mr, mt);
        double noise = 0.05 + uniform01(rng);
        arma::vec r = achievable_rate(in.channels, in.precoders, in.selection, noise);
        arma::cx_mat v = apply_selection(in.precoders, in.selection);
        for (arma::uword u = 0; u < k; ++u)
            CHECK_THAT(r(u), WithinAbs(det_rate(in.channels, v, u, mr, noise), 1e-9));
    }
}

TEST_CASE("interference covariance excludes the user's own streams and inactive columns")
{
    Rng rng(13);
    Instance in = random_instance(rng, 3, 2, 5);
    in.selection = StreamSelection(2, 3, true);
    in.selection.set(1, 2, false);
    arma::cx_mat q = interference_covariance(in.channels, in.precoders, in.selection, 0.5, 0);
    arma::cx_mat expect = 0.5 * arma::eye<arma::cx_mat>(2, 2);
    arma::cx_mat b1 = in.channels[0] * in.precoders.cols(2, 3);
    arma::cx_mat b2 = in.channels[0] * in.precoders.col(4);
    expect += b1 * b1.t() + b2 * b2.t();
    CHECK(arma::norm(q - expect, "fro") < 1e-12);
}

TEST_CASE("hardware power, transmit power and objective arithmetic")
{
    PowerModel m;
    CHECK_THAT(m.chain_cost(64), WithinAbs(1.48, 1e-12));
    CHECK_THAT(hardware_power(3, m, 64), WithinAbs(4.44, 1e-12));
    StreamSelection s(2, 2, true);
    s.set(1, 1, false);
    CHECK_THAT(hardware_power(s, m, 512), WithinAbs(3 * 10.44, 1e-12));

    arma::cx_mat w(3, 4, arma::fill::zeros);
    w(0, 0) = cx(1, 1);
    w(2, 3) = 5.0; // inactive column
    w(1, 2) = 0.5;
    CHECK_THAT(transmit_power(w, s), WithinAbs(2.25, 1e-15));

    CHECK_THAT(network_objective(10.0, 4.0, 0.7), WithinAbs(7.0 - 1.2, 1e-12));
    CHECK_THAT(network_objective(arma::vec{3.0, 7.0}, 4.0, 0.7), WithinAbs(5.8, 1e-12));
    CHECK_THROWS_AS(network_objective(1.0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("rate equals minus log2 det of the MMSE error matrix")
{
    Rng rng(14);
    for (int trial = 0; trial < 30; ++trial)
    {
        arma::uword k = 1 + rng() % 3, mr = 1 + rng() % 3, mt = 4 + rng() % 4;
        Instance in = random_instance(rng, k, mr, mt);
        in.selection = StreamSelection(mr, k, true);
        double noise = 0.1 + uniform01(rng);
        arma::vec r = achievable_rate(in.channels, in.precoders, in.selection, noise);
        for (arma::uword u = 0; u < k; ++u)
        {
            arma::cx_mat z = update_combiner(in.channels, in.precoders, in.selection, noise, u);
            arma::cx_mat q = interference_covariance(in.channels, in.precoders, in.selection, noise, u);
            arma::cx_mat e = mse_matrix(z, in.channels[u], user_block(in.precoders, u, mr), in.selection.user_flags(u), q);
            double ld = arma::log_det(e).real() / std::log(2.0);
            CHECK_THAT(-ld, WithinAbs(r(u), 1e-8));
        }
    }
}

TEST_CASE("layout mismatches are reported")
{
    Rng rng(15);
    ChannelList ch = {test::random_cx(rng, 2, 4)};
    CHECK_THROWS_AS(achievable_rate(ch, test::random_cx(rng, 4, 3), StreamSelection(2, 1, true), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(achievable_rate(ch, test::random_cx(rng, 4, 2), StreamSelection(2, 1, true), 0.0),
                    std::invalid_argument);
}
