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

// Python module: configs, channels, solvers and the trial harness

#include "nfhbf/config.hpp"
#include "nfhbf/factorization.hpp"
#include "nfhbf/harness.hpp"
#include "nfhbf/pli.hpp"
#include "nfhbf/wmmse_ts.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace nfhbf;

namespace
{
    using CxArray = py::array_t<cx, py::array::f_style | py::array::forcecast>;
    using RealArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

    arma::cx_mat to_arma(const CxArray &a)
    {
        if (a.ndim() != 2)
            throw std::invalid_argument("expected a 2-D array");
        return arma::cx_mat(a.data(), arma::uword(a.shape(0)), arma::uword(a.shape(1)));
    }

    py::array_t<cx> to_numpy(const arma::cx_mat &m)
    {
        py::array_t<cx, py::array::f_style> out({py::ssize_t(m.n_rows), py::ssize_t(m.n_cols)});
        std::copy(m.begin(), m.end(), out.mutable_data());
        return out;
    }

    py::array_t<double> to_numpy(const arma::vec &v)
    {
        py::array_t<double> out(py::ssize_t(v.n_elem));
        std::copy(v.begin(), v.end(), out.mutable_data());
        return out;
    }

    ChannelList to_channels(const std::vector<CxArray> &list)
    {
        ChannelList ch;
        for (const auto &a : list)
            ch.push_back(to_arma(a));
        return ch;
    }

    StreamSelection to_selection(const py::array_t<long long, py::array::f_style | py::array::forcecast> &a)
    {
        if (a.ndim() != 2)
            throw std::invalid_argument("selection flags must be a 2-D array (streams x users)");
        arma::umat f(arma::uword(a.shape(0)), arma::uword(a.shape(1)));
        for (arma::uword i = 0; i < f.n_elem; ++i)
        {
            if (a.data()[i] < 0)
                throw std::invalid_argument("selection flags must be 0 or 1");
            f(i) = arma::uword(a.data()[i]);
        }
        return StreamSelection(f);
    }

    py::array_t<long long> flags_of(const StreamSelection &s)
    {
        const arma::umat &f = s.flags();
        py::array_t<long long, py::array::f_style> out({py::ssize_t(f.n_rows), py::ssize_t(f.n_cols)});
        std::copy(f.begin(), f.end(), out.mutable_data());
        return out;
    }

    py::dict hybrid_dict(const HybridBeamformer &h)
    {
        py::dict d;
        d["analog"] = to_numpy(h.analog);
        d["shifter_a"] = to_numpy(h.shifter_a);
        d["shifter_b"] = to_numpy(h.shifter_b);
        d["baseband"] = to_numpy(h.baseband);
        d["active_chains"] = h.active_chains;
        return d;
    }

    py::dict record_dict(const TrialRecord &r)
    {
        py::dict d;
        d["sweep_value"] = r.sweep_value;
        d["trial"] = r.trial;
        d["seed"] = r.seed;
        d["rates"] = to_numpy(r.rates);
        d["sum_rate"] = r.sum_rate;
        d["streams"] = r.streams;
        d["hpc_w"] = r.hpc_w;
        d["tx_power_w"] = r.tx_power_w;
        d["objective"] = r.objective;
        d["iters_inner"] = r.iters_inner;
        d["iters_outer"] = r.iters_outer ? py::object(py::int_(*r.iters_outer)) : py::object(py::none());
        d["penalty_final"] = r.penalty_final ? py::object(py::float_(*r.penalty_final)) : py::object(py::none());
        d["wall_ms"] = r.wall_ms;
        d["digital_sum_rate"] = r.digital_sum_rate;
        d["warning"] = r.warning;
        d["messages"] = r.messages;
        return d;
    }

    ExperimentConfig config_from_text(const std::string &text)
    {
        std::istringstream in(text);
        return parse_config(in, "<string>");
    }
}

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Near-field dynamic hybrid beamforming";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ExperimentConfig>(m, "Config")
        .def(py::init<>())
        .def_static("from_text", &config_from_text, py::arg("text"))
        .def_static("load", &load_config, py::arg("path"))
        .def("to_text", [](const ExperimentConfig &c) { return format_config(c); })
        .def("validate", &ExperimentConfig::validate)
        .def("at_sweep_value", &ExperimentConfig::at_sweep_value, py::arg("value"))
        .def("sweep_grid", &ExperimentConfig::sweep_grid)
        .def_property_readonly("wavelength", &ExperimentConfig::wavelength)
        .def_readwrite("k_users", &ExperimentConfig::k_users)
        .def_readwrite("l_scatterers", &ExperimentConfig::l_scatterers)
        .def_readwrite("rf_chains", &ExperimentConfig::rf_chains)
        .def_readwrite("p_max_dbm", &ExperimentConfig::p_max_dbm)
        .def_readwrite("noise_dbm", &ExperimentConfig::noise_dbm)
        .def_readwrite("beta", &ExperimentConfig::beta)
        .def_readwrite("mu", &ExperimentConfig::mu)
        .def_readwrite("bits", &ExperimentConfig::bits)
        .def_readwrite("trials", &ExperimentConfig::trials)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("ring_inner_m", &ExperimentConfig::ring_inner_m)
        .def_readwrite("ring_width_m", &ExperimentConfig::ring_width_m)
        .def_property(
            "solver", [](const ExperimentConfig &c) { return to_string(c.solver); },
            [](ExperimentConfig &c, const std::string &v) {
                for (SolverKind k : {SolverKind::wmmse_ts, SolverKind::pli, SolverKind::fixed_streams})
                    if (v == to_string(k))
                    {
                        c.solver = k;
                        return;
                    }
                throw ConfigError("solver must be wmmse-ts, pli or fixed-stream, got '" + v + "'");
            })
        .def("__repr__", [](const ExperimentConfig &c) { return "<nfhbf.Config solver=" + to_string(c.solver) + ">"; });

    m.def(
        "sample_channels",
        [](const ExperimentConfig &c, std::uint64_t seed) {
            Rng rng(seed);
            Scenario s = sample_scenario(c, rng);
            std::vector<py::array_t<cx>> out;
            for (const auto &h : assemble_channels(s, c.channel))
                out.push_back(to_numpy(h));
            return out;
        },
        py::arg("config"), py::arg("seed"), "Channel matrices (M_r x M_t) of one seeded scenario");

    m.def(
        "achievable_rate",
        [](const std::vector<CxArray> &channels, const CxArray &precoders, const py::array_t<long long, py::array::f_style | py::array::forcecast> &flags,
           double noise) { return to_numpy(achievable_rate(to_channels(channels), to_arma(precoders), to_selection(flags), noise)); },
        py::arg("channels"), py::arg("precoders"), py::arg("flags"), py::arg("noise"));

    m.def("edof", [](const CxArray &h) { return edof(to_arma(h)); }, py::arg("h"));

    m.def(
        "water_filling",
        [](const RealArray &g, double power) {
            arma::vec gains(g.data(), arma::uword(g.size()));
            return to_numpy(water_filling(gains, power));
        },
        py::arg("gains"), py::arg("power"));

    m.def(
        "hybrid_factorize",
        [](const CxArray &w, arma::uword active, arma::uword rf_chains) {
            FactorizationResult f = hybrid_factorize(to_arma(w), active, rf_chains);
            py::dict d = hybrid_dict(f.hybrid);
            d["residual"] = f.residual;
            return d;
        },
        py::arg("fully_digital"), py::arg("active"), py::arg("rf_chains") = 0);

    m.def(
        "solve_wmmse_ts",
        [](const std::vector<CxArray> &channels, const ExperimentConfig &c) {
            WmmseTsResult r = wmmse_ts_solve(to_channels(channels), c.solver_config());
            py::dict d;
            d["fully_digital"] = to_numpy(r.fully_digital);
            d["flags"] = flags_of(r.selection);
            d["rates"] = to_numpy(r.rates);
            d["objective"] = r.objective;
            d["objective_trace"] = r.objective_trace;
            d["iterations"] = r.iterations;
            d["converged"] = r.converged;
            return d;
        },
        py::arg("channels"), py::arg("config"));

    m.def(
        "solve_pli",
        [](const std::vector<CxArray> &channels, const ExperimentConfig &c) {
            PliResult r = pli_solve(to_channels(channels), c.solver_config());
            py::dict d = hybrid_dict(r.hybrid);
            d["fully_digital"] = to_numpy(r.fully_digital);
            d["flags"] = flags_of(r.selection);
            d["rates"] = to_numpy(r.rates);
            d["objective"] = r.objective;
            d["tx_power"] = r.tx_power;
            d["penalty"] = r.penalty;
            d["penalty_trace"] = r.penalty_trace;
            d["inner_iterations"] = r.inner_iterations;
            d["outer_iterations"] = r.outer_iterations;
            d["converged"] = r.converged;
            return d;
        },
        py::arg("channels"), py::arg("config"));

    m.def(
        "run_trial",
        [](const ExperimentConfig &c, std::uint64_t seed) {
            return record_dict(run_seeded_trial(c, 0, seed, std::nan("")));
        },
        py::arg("config"), py::arg("seed"));

    m.def(
        "run_sweep",
        [](const ExperimentConfig &c, unsigned jobs) {
            SweepResult r;
            {
                py::gil_scoped_release release;
                r = run_sweep(c, {false, jobs});
            }
            if (r.error)
                throw std::runtime_error(*r.error);
            py::list out;
            for (const auto &rec : r.records)
                out.append(record_dict(rec));
            return out;
        },
        py::arg("config"), py::arg("jobs") = 1);

    m.def(
        "edof_profile",
        [](const ExperimentConfig &c) {
            py::list out;
            for (const auto &p : edof_profile(c))
                out.append(py::make_tuple(p.distance_m, p.edof_near, p.edof_far, p.dof_analytic));
            return out;
        },
        py::arg("config"), "(distance_m, edof_near, edof_far, dof_analytic) tuples");
}
