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

#include "nfhbf/config.hpp"
#include "nfhbf/format.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nfhbf;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace
{
    ExperimentConfig parse(const std::string &text)
    {
        std::istringstream in(text);
        return parse_config(in, "cfg");
    }

    std::string error_of(const std::string &text)
    {
        try
        {
            parse(text);
        }
        catch (const ConfigError &e)
        {
            return e.what();
        }
        return {};
    }
}

TEST_CASE("defaults describe the desk scenario")
{
    ExperimentConfig c;
    CHECK(c.mt_v * c.mt_h == 64);
    CHECK(c.mr_v * c.mr_h == 4);
    CHECK(c.k_users == 2);
    CHECK(c.rf_chains == 8);
    CHECK_THAT(c.wavelength(), WithinRel(299792458.0 / 28e9, 1e-15));
    CHECK_THAT(c.spacing_m(), WithinRel(0.5 * c.wavelength(), 1e-15));
    CHECK_NOTHROW(c.validate());
    CHECK(c.sweep_grid().size() == 1);
    CHECK(std::isnan(c.sweep_grid()[0]));
}

TEST_CASE("parsing reads keys, comments and blank lines")
{
    ExperimentConfig c = parse("# header\n\nbeta = 0.4  # trailing\nk_users=3\nrf_chains = 12\n"
                               "solver = pli\nchannel = far\nsweep_axis = p_max_dbm\nsweep_values = 20, 0 ,10\n");
    CHECK(c.beta == 0.4);
    CHECK(c.k_users == 3);
    CHECK(c.solver == SolverKind::pli);
    CHECK(c.channel == ChannelMode::far_field);
    CHECK(c.sweep_axis == SweepAxis::p_max_dbm);
    CHECK(c.sweep_grid() == std::vector<double>{0.0, 10.0, 20.0});
}

TEST_CASE("parse errors name the source line")
{
    CHECK_THAT(error_of("beta = 0.5\nbogus = 1\n"), ContainsSubstring("cfg:2:") && ContainsSubstring("bogus"));
    CHECK_THAT(error_of("beta 0.5\n"), ContainsSubstring("cfg:1:"));
    CHECK_THAT(error_of("beta = abc\n"), ContainsSubstring("beta"));
    CHECK_THAT(error_of("trials = -3\n"), ContainsSubstring("trials"));
    CHECK_THAT(error_of("solver = greedy\n"), ContainsSubstring("solver"));
    CHECK_THAT(error_of("channel = mid\n"), ContainsSubstring("channel"));
    CHECK_THAT(error_of("sweep_axis = gamma\n"), ContainsSubstring("sweep_axis"));
    CHECK_THAT(error_of("beta = 1.5\n"), ContainsSubstring("beta"));
    CHECK_THAT(error_of("rf_chains = 3\n"), ContainsSubstring("rf_chains"));
    CHECK_THAT(error_of("sweep_axis = beta\n"), ContainsSubstring("sweep_values"));
    CHECK_THAT(error_of("sweep_axis = bits\nsweep_values = 2.5\n"), ContainsSubstring("bits"));
    CHECK_THAT(error_of("fixed_streams = 5\n"), ContainsSubstring("fixed_streams"));
    CHECK_THAT(error_of("shrink = 1\n"), ContainsSubstring("shrink"));
    CHECK(error_of("beta = 0.3\n").empty());
}

TEST_CASE("format and parse round-trip random configurations")
{
    Rng rng(71);
    for (int t = 0; t < 200; ++t)
    {
        ExperimentConfig c;
        c.mt_v = 4 + rng() % 6;
        c.mt_h = 4 + rng() % 6;
        c.mr_v = 1 + rng() % 2;
        c.mr_h = 1 + rng() % 2;
        c.k_users = 1 + rng() % 2;
        c.rf_chains = c.k_users * c.mr_v * c.mr_h + rng() % 3;
        c.l_scatterers = rng() % 7;
        c.beta = uniform01(rng);
        c.mu = test::uniform(rng, 0.1, 5.0);
        c.p_max_dbm = test::uniform(rng, -10.0, 40.0);
        c.noise_dbm = test::uniform(rng, -120.0, -80.0);
        c.carrier_hz = test::uniform(rng, 1e9, 1e11);
        c.bits = 1 + rng() % 8;
        c.seed = rng();
        c.ring_inner_m = test::uniform(rng, 0.5, 30.0);
        c.solver = SolverKind(rng() % 3);
        c.channel = rng() % 2 ? ChannelMode::near_field : ChannelMode::far_field;
        if (rng() % 2)
        {
            c.sweep_axis = SweepAxis::mu;
            c.sweep_values = {test::uniform(rng, 0.1, 3.0), test::uniform(rng, 0.1, 3.0)};
        }
        std::string text = format_config(c);
        ExperimentConfig back = parse(text);
        CHECK(format_config(back) == text);
        CHECK(back.beta == c.beta);
        CHECK(back.seed == c.seed);
        CHECK(back.sweep_values == c.sweep_values);
    }
}

TEST_CASE("solver settings follow the physical units")
{
    ExperimentConfig c;
    c.p_max_dbm = 30.0;
    c.noise_dbm = -90.0;
    SolverConfig s = c.solver_config();
    CHECK_THAT(s.power.budget_watts, WithinRel(1.0, 1e-12));
    CHECK_THAT(s.noise_power, WithinRel(1e-12, 1e-12));
    CHECK_FALSE(s.frozen_selection.has_value());

    c.solver = SolverKind::fixed_streams;
    c.fixed_streams = 2;
    s = c.solver_config();
    REQUIRE(s.frozen_selection.has_value());
    CHECK(*s.frozen_selection == StreamSelection(arma::umat{{1, 1}, {1, 1}, {0, 0}, {0, 0}}));
}

TEST_CASE("sweep values land on the chosen axis")
{
    ExperimentConfig c;
    c.sweep_axis = SweepAxis::user_distance;
    ExperimentConfig d = c.at_sweep_value(7.5);
    CHECK(d.ring_inner_m == 7.5);
    CHECK(d.ring_width_m == 0.0);
    c.sweep_axis = SweepAxis::bits;
    CHECK(c.at_sweep_value(4.0).bits == 4);
    CHECK_THROWS_AS(c.at_sweep_value(0.0), ConfigError);
    c.sweep_axis = SweepAxis::beta;
    CHECK(c.at_sweep_value(0.2).beta == 0.2);
    c.sweep_axis = SweepAxis::none;
    CHECK(format_config(c.at_sweep_value(3.0)) == format_config(c));
}

TEST_CASE("names of enumerations")
{
    CHECK(to_string(SolverKind::wmmse_ts) == "wmmse-ts");
    CHECK(to_string(SolverKind::fixed_streams) == "fixed-stream");
    CHECK(to_string(SweepAxis::user_distance) == "user_distance");
    CHECK(to_string(ChannelMode::far_field) == "far");
}

TEST_CASE("number formatting round-trips")
{
    Rng rng(72);
    for (int t = 0; t < 1000; ++t)
    {
        double v = test::gaussian(rng) * std::pow(10.0, test::uniform(rng, -20.0, 20.0));
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(arma::datum::nan) == "nan");
    CHECK(format_double(-arma::datum::inf) == "-inf");
}

TEST_CASE("config files load from disk")
{
    auto path = std::filesystem::temp_directory_path() / "nfhbf_test_config.cfg";
    {
        std::ofstream out(path);
        out << "trials = 3\n";
    }
    CHECK(load_config(path.string()).trials == 3);
    std::filesystem::remove(path);
    CHECK_THROWS_WITH(load_config(path.string()), ContainsSubstring(path.string()));
}
