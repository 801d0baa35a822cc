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

// Helpers shared by the unit and acceptance tests

#ifndef NFHBF_TESTS_SUPPORT_HPP
#define NFHBF_TESTS_SUPPORT_HPP

#include "nfhbf/config.hpp"
#include "nfhbf/harness.hpp"

#include <cstdint>
#include <random>

namespace nfhbf::test
{
    inline double uniform(Rng &rng, double lo, double hi)
    {
        return lo + (hi - lo) * uniform01(rng);
    }

    inline double gaussian(Rng &rng)
    {
        // Box-Muller on the portable uniform, so values match across platforms
        double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    inline arma::cx_mat random_cx(Rng &rng, arma::uword rows, arma::uword cols)
    {
        arma::cx_mat m(rows, cols);
        for (auto &v : m)
            v = cx(gaussian(rng), gaussian(rng)) / std::sqrt(2.0);
        return m;
    }

    // Desk defaults: 8x8 BS, two 2x2 users, 8 RF chains, 28 GHz
    inline ExperimentConfig desk()
    {
        return ExperimentConfig{};
    }

    inline ChannelList channels_for(const ExperimentConfig &cfg, std::uint64_t seed)
    {
        Rng rng(seed);
        Scenario s = sample_scenario(cfg, rng);
        return assemble_channels(s, cfg.channel);
    }
}

#endif
