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

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace nfhbf
{
    std::string to_string(SolverKind kind)
    {
        switch (kind)
        {
        case SolverKind::wmmse_ts:
            return "wmmse-ts";
        case SolverKind::pli:
            return "pli";
        case SolverKind::fixed_streams:
            return "fixed-stream";
        }
        return "?";
    }

    std::string to_string(SweepAxis axis)
    {
        switch (axis)
        {
        case SweepAxis::none:
            return "none";
        case SweepAxis::p_max_dbm:
            return "p_max_dbm";
        case SweepAxis::beta:
            return "beta";
        case SweepAxis::mu:
            return "mu";
        case SweepAxis::bits:
            return "bits";
        case SweepAxis::user_distance:
            return "user_distance";
        }
        return "?";
    }

    std::string to_string(ChannelMode mode)
    {
        return mode == ChannelMode::near_field ? "near" : "far";
    }

    namespace
    {
        std::string trim(const std::string &s)
        {
            auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        double parse_double(const std::string &v)
        {
            double out = 0.0;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
                throw ConfigError("expected a finite number, got '" + v + "'");
            return out;
        }

        std::uint64_t parse_u64(const std::string &v)
        {
            std::uint64_t out = 0;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc() || p != v.data() + v.size())
                throw ConfigError("expected a non-negative integer, got '" + v + "'");
            return out;
        }

        std::vector<double> parse_list(const std::string &v)
        {
            std::vector<double> out;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
            {
                item = trim(item);
                if (!item.empty())
                    out.push_back(parse_double(item));
            }
            return out;
        }

        struct Key
        {
            const char *name;
            std::function<void(ExperimentConfig &, const std::string &)> set;
            std::function<std::string(const ExperimentConfig &)> get;
        };

        template <class T>
        Key uint_key(const char *name, T ExperimentConfig::*member)
        {
            return {name, [member](ExperimentConfig &c, const std::string &v) { c.*member = T(parse_u64(v)); },
                    [member](const ExperimentConfig &c) { return std::to_string(c.*member); }};
        }

        Key real_key(const char *name, double ExperimentConfig::*member)
        {
            return {name, [member](ExperimentConfig &c, const std::string &v) { c.*member = parse_double(v); },
                    [member](const ExperimentConfig &c) { return format_double(c.*member); }};
        }

        const std::vector<Key> &keys()
        {
            static const std::vector<Key> table = {
                uint_key("mt_v", &ExperimentConfig::mt_v),
                uint_key("mt_h", &ExperimentConfig::mt_h),
                uint_key("mr_v", &ExperimentConfig::mr_v),
                uint_key("mr_h", &ExperimentConfig::mr_h),
                uint_key("k_users", &ExperimentConfig::k_users),
                uint_key("l_scatterers", &ExperimentConfig::l_scatterers),
                uint_key("rf_chains", &ExperimentConfig::rf_chains),
                real_key("carrier_hz", &ExperimentConfig::carrier_hz),
                real_key("noise_dbm", &ExperimentConfig::noise_dbm),
                real_key("p_max_dbm", &ExperimentConfig::p_max_dbm),
                real_key("beta", &ExperimentConfig::beta),
                real_key("mu", &ExperimentConfig::mu),
                real_key("rho0", &ExperimentConfig::rho0),
                real_key("shrink", &ExperimentConfig::shrink),
                uint_key("bits", &ExperimentConfig::bits),
                real_key("eps1", &ExperimentConfig::eps1),
                real_key("eps2", &ExperimentConfig::eps2),
                real_key("eps3", &ExperimentConfig::eps3),
                real_key("eps4", &ExperimentConfig::eps4),
                real_key("ring_inner_m", &ExperimentConfig::ring_inner_m),
                real_key("ring_width_m", &ExperimentConfig::ring_width_m),
                real_key("scatter_radius_m", &ExperimentConfig::scatter_radius_m),
                real_key("p_rf_w", &ExperimentConfig::p_rf_w),
                real_key("p_ps_w", &ExperimentConfig::p_ps_w),
                uint_key("trials", &ExperimentConfig::trials),
                uint_key("seed", &ExperimentConfig::seed),
                real_key("spacing_wavelengths", &ExperimentConfig::spacing_wavelengths),
                {"solver",
                 [](ExperimentConfig &c, const std::string &v) {
                     if (v == "wmmse-ts")
                         c.solver = SolverKind::wmmse_ts;
                     else if (v == "pli")
                         c.solver = SolverKind::pli;
                     else if (v == "fixed-stream")
                         c.solver = SolverKind::fixed_streams;
                     else
                         throw ConfigError("solver must be wmmse-ts, pli or fixed-stream, got '" + v + "'");
                 },
                 [](const ExperimentConfig &c) { return to_string(c.solver); }},
                {"channel",
                 [](ExperimentConfig &c, const std::string &v) {
                     if (v == "near")
                         c.channel = ChannelMode::near_field;
                     else if (v == "far")
                         c.channel = ChannelMode::far_field;
                     else
                         throw ConfigError("channel must be near or far, got '" + v + "'");
                 },
                 [](const ExperimentConfig &c) { return to_string(c.channel); }},
                uint_key("fixed_streams", &ExperimentConfig::fixed_streams),
                {"sweep_axis",
                 [](ExperimentConfig &c, const std::string &v) {
                     for (SweepAxis a : {SweepAxis::none, SweepAxis::p_max_dbm, SweepAxis::beta, SweepAxis::mu,
                                         SweepAxis::bits, SweepAxis::user_distance})
                         if (v == to_string(a))
                         {
                             c.sweep_axis = a;
                             return;
                         }
                     throw ConfigError("unknown sweep_axis '" + v + "'");
                 },
                 [](const ExperimentConfig &c) { return to_string(c.sweep_axis); }},
                {"sweep_values",
                 [](ExperimentConfig &c, const std::string &v) { c.sweep_values = parse_list(v); },
                 [](const ExperimentConfig &c) {
                     std::string s;
                     for (std::size_t i = 0; i < c.sweep_values.size(); ++i)
                         s += (i ? "," : "") + format_double(c.sweep_values[i]);
                     return s;
                 }},
                uint_key("max_iters", &ExperimentConfig::max_iters),
                uint_key("max_inner", &ExperimentConfig::max_inner),
                uint_key("max_outer", &ExperimentConfig::max_outer),
                uint_key("warm_start_iters", &ExperimentConfig::warm_start_iters),
                real_key("edof_min_m", &ExperimentConfig::edof_min_m),
                real_key("edof_max_m", &ExperimentConfig::edof_max_m),
                uint_key("edof_points", &ExperimentConfig::edof_points),
            };
            return table;
        }
    }

    void ExperimentConfig::validate() const
    {
        auto fail = [](const std::string &m) { throw ConfigError("invalid config: " + m); };
        if (mt_v == 0 || mt_h == 0 || mr_v == 0 || mr_h == 0)
            fail("array dimensions must be positive");
        if (k_users == 0)
            fail("k_users must be positive");
        if (!(carrier_hz > 0.0))
            fail("carrier_hz must be positive");
        if (!(spacing_wavelengths > 0.0))
            fail("spacing_wavelengths must be positive");
        if (!(ring_inner_m > 0.0) || !(ring_width_m >= 0.0))
            fail("ring_inner_m must be positive and ring_width_m non-negative");
        if (!(scatter_radius_m > 0.0))
            fail("scatter_radius_m must be positive");
        if (trials == 0)
            fail("trials must be at least 1");
        if (fixed_streams == 0 || fixed_streams > mr_v * mr_h)
            fail("fixed_streams must lie in [1, mr_v * mr_h]");
        if (sweep_axis != SweepAxis::none && sweep_values.empty())
            fail("sweep_values must be non-empty when sweep_axis is set");
        if (!(edof_min_m > 0.0 && edof_max_m >= edof_min_m) || edof_points == 0)
            fail("edof grid must satisfy 0 < edof_min_m <= edof_max_m and edof_points >= 1");
        for (double v : sweep_grid())
        {
            ExperimentConfig c = sweep_axis == SweepAxis::none ? *this : at_sweep_value(v);
            if (!(c.ring_inner_m > 0.0))
                fail("user distance must be positive");
            try
            {
                c.solver_config().validate(c.k_users, c.mr_v * c.mr_h, c.mt_v * c.mt_h);
            }
            catch (const std::invalid_argument &e)
            {
                fail(e.what());
            }
        }
    }

    SolverConfig ExperimentConfig::solver_config() const
    {
        SolverConfig s;
        s.beta = beta;
        s.mu = mu;
        s.noise_power = dbm_to_watt(noise_dbm);
        s.power.rf_chain_watts = p_rf_w;
        s.power.shifter_watts = p_ps_w;
        s.power.budget_watts = dbm_to_watt(p_max_dbm);
        s.rf_chains = rf_chains;
        s.eps1 = eps1;
        s.eps2 = eps2;
        s.eps3 = eps3;
        s.eps4 = eps4;
        s.rho0 = rho0;
        s.shrink = shrink;
        s.bits = bits;
        s.max_iters = max_iters;
        s.max_inner = max_inner;
        s.max_outer = max_outer;
        s.warm_start_iters = warm_start_iters;
        if (solver == SolverKind::fixed_streams)
        {
            StreamSelection sel(mr_v * mr_h, k_users, false);
            for (arma::uword k = 0; k < k_users; ++k)
                for (arma::uword j = 0; j < std::min<arma::uword>(fixed_streams, mr_v * mr_h); ++j)
                    sel.set(j, k, true);
            s.frozen_selection = sel;
        }
        return s;
    }

    ExperimentConfig ExperimentConfig::at_sweep_value(double value) const
    {
        ExperimentConfig c = *this;
        switch (sweep_axis)
        {
        case SweepAxis::none:
            break;
        case SweepAxis::p_max_dbm:
            c.p_max_dbm = value;
            break;
        case SweepAxis::beta:
            c.beta = value;
            break;
        case SweepAxis::mu:
            c.mu = value;
            break;
        case SweepAxis::bits:
            if (!(value >= 1.0 && value <= 8.0 && std::floor(value) == value))
                throw ConfigError("bits sweep values must be integers in [1, 8]");
            c.bits = unsigned(value);
            break;
        case SweepAxis::user_distance:
            c.ring_inner_m = value;
            c.ring_width_m = 0.0;
            break;
        }
        return c;
    }

    std::vector<double> ExperimentConfig::sweep_grid() const
    {
        if (sweep_axis == SweepAxis::none)
            return {std::nan("")};
        std::vector<double> g = sweep_values;
        std::sort(g.begin(), g.end());
        return g;
    }

    ExperimentConfig parse_config(std::istream &in, const std::string &source)
    {
        ExperimentConfig c;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            auto eq = line.find('=');
            auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
            if (eq == std::string::npos)
                throw ConfigError(where() + "expected 'key = value'");
            std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
            const auto &table = keys();
            auto it = std::find_if(table.begin(), table.end(), [&](const Key &k) { return key == k.name; });
            if (it == table.end())
                throw ConfigError(where() + "unknown key '" + key + "'");
            try
            {
                it->set(c, value);
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(where() + key + ": " + e.what());
            }
        }
        c.validate();
        return c;
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        return parse_config(in, path);
    }

    std::string format_config(const ExperimentConfig &config)
    {
        std::string out;
        for (const auto &k : keys())
            out += std::string(k.name) + " = " + k.get(config) + "\n";
        return out;
    }
}
