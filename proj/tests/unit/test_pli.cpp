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

#include "nfhbf/pli.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace nfhbf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    // Smallest distance from v to any sum of two grid phasors, by enumeration
    double brute_distance(cx v, unsigned bits)
    {
        const unsigned n = 1u << bits;
        double best = arma::datum::inf;
        for (unsigned a = 0; a < n; ++a)
            for (unsigned b = 0; b < n; ++b)
            {
                cx s = std::polar(1.0, 2.0 * pi * a / n) + std::polar(1.0, 2.0 * pi * b / n);
                best = std::min(best, std::abs(s - v));
            }
        return best;
    }

    bool on_grid(double theta, unsigned bits)
    {
        double steps = theta / (2.0 * pi / double(1u << bits));
        return std::abs(steps - std::round(steps)) < 1e-9;
    }

    bool in_alphabet(cx v, unsigned bits)
    {
        return brute_distance(v, bits) < 1e-12;
    }
}

TEST_CASE("alphabet holds every distinct two-phasor sum")
{
    for (unsigned b = 1; b <= 6; ++b)
    {
        DiscreteAlphabet alpha(b);
        const double n = double(1u << b);
        // N same-phase sums, N per intermediate phase gap, and zero
        CHECK(alpha.atoms().size() == std::size_t(n * n / 2.0 + 1.0));
        for (const auto &atom : alpha.atoms())
        {
            CHECK(std::abs(atom.value) <= 2.0 + 1e-12);
            CHECK(on_grid(atom.theta_a, b));
            CHECK(on_grid(atom.theta_b, b));
            CHECK(std::abs(std::polar(1.0, atom.theta_a) + std::polar(1.0, atom.theta_b) - atom.value) < 1e-12);
        }
    }
    CHECK_THROWS_AS(DiscreteAlphabet(0), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteAlphabet(9), std::invalid_argument);
}

TEST_CASE("projection picks the nearest atom")
{
    Rng rng(51);
    for (unsigned b = 1; b <= 5; ++b)
    {
        DiscreteAlphabet alpha(b);
        for (int t = 0; t < 300; ++t)
        {
            cx v = std::polar(test::uniform(rng, 0.0, 2.5), test::uniform(rng, -pi, pi));
            CHECK_THAT(std::abs(alpha.project(v).value - v), WithinAbs(brute_distance(v, b), 1e-12));
        }
        for (const auto &atom : alpha.atoms())
            CHECK(std::abs(alpha.project(atom.value).value - atom.value) < 1e-12);
    }
}

TEST_CASE("entry-wise projection returns realizing shifters")
{
    Rng rng(52);
    DiscreteAlphabet alpha(3);
    arma::cx_mat v = 0.8 * test::random_cx(rng, 6, 4);
    arma::cx_mat a, b;
    arma::cx_mat q = discrete_project(v, alpha, &a, &b);
    CHECK(arma::norm(a + b - q, "fro") < 1e-12);
    CHECK(arma::all(arma::vectorise(arma::abs(arma::abs(a) - 1.0)) < 1e-14));
    CHECK(arma::all(arma::vectorise(arma::abs(arma::abs(b) - 1.0)) < 1e-14));
    for (arma::uword i = 0; i < q.n_elem; ++i)
        CHECK(in_alphabet(q(i), 3));
}

TEST_CASE("penalized precoder and power follow the shifted system")
{
    Rng rng(53);
    for (int t = 0; t < 20; ++t)
    {
        arma::uword mt = 4 + rng() % 4;
        arma::cx_mat h = test::random_cx(rng, mt, 3);
        arma::cx_mat a = h * h.t();
        arma::vec ev;
        arma::cx_mat basis;
        arma::eig_sym(ev, basis, a);
        GramEvd g{arma::fliplr(basis), arma::reverse(arma::clamp(ev, 0.0, arma::datum::inf))};
        arma::cx_mat m = test::random_cx(rng, mt, 2);
        double rho = test::uniform(rng, 0.5, 50.0), xi = test::uniform(rng, 0.0, 2.0);
        double s = (1.0 + 2.0 * rho * xi) / (2.0 * rho);
        arma::cx_mat direct = arma::solve(arma::cx_mat(a + s * arma::eye<arma::cx_mat>(mt, mt)), m);
        arma::cx_mat w = penalized_precoder(m, g, xi, rho);
        CHECK(arma::norm(w - direct, "fro") < 1e-9 * arma::norm(direct, "fro"));

        StreamMetrics sm = stream_metrics(m, g, 1);
        StreamSelection all(1, 2, true);
        CHECK_THAT(penalized_power(all, sm, g.eigenvalues, xi, rho),
                   WithinRel(std::pow(arma::norm(direct, "fro"), 2), 1e-9));
        arma::vec e = penalized_contribution(sm, g.eigenvalues, xi, rho);
        for (arma::uword c = 0; c < 2; ++c)
        {
            arma::cx_vec f = m.col(c), x = direct.col(c);
            double expect = -std::real(arma::cdot(x, (a + 2.0 * s * arma::eye<arma::cx_mat>(mt, mt)) * x));
            CHECK_THAT(e(c), WithinRel(expect, 1e-8));
        }
    }
    GramEvd g{arma::eye<arma::cx_mat>(2, 2), arma::vec{1.0, 0.0}};
    CHECK_THROWS_AS(penalized_precoder(arma::cx_mat(2, 1, arma::fill::ones), g, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("penalty counts active streams only")
{
    arma::cx_mat w = {{cx(1, 0), cx(0, 0)}, {cx(0, 1), cx(3, 0)}};
    arma::cx_mat p(2, 2, arma::fill::zeros);
    StreamSelection s(arma::umat{{1, 0}});
    CHECK_THAT(penalty_value(w, p, s), WithinAbs(2.0, 1e-15));
    CHECK_THAT(penalty_value(w, p, StreamSelection(1, 2, true)), WithinAbs(11.0, 1e-15));
    CHECK_THROWS_AS(penalty_value(w, arma::cx_mat(2, 3), s), std::invalid_argument);
}

TEST_CASE("baseband update is the least-squares fit on the active chains")
{
    Rng rng(54);
    arma::cx_mat p = test::random_cx(rng, 8, 4);
    arma::cx_mat w = test::random_cx(rng, 8, 4);
    StreamSelection s(arma::umat{{1, 0}, {1, 1}});
    arma::cx_mat bb = baseband_update(p, w, s);
    CHECK(bb.n_rows == 4);
    CHECK(arma::norm(bb.rows(3, 3), "fro") == 0.0);
    CHECK(arma::norm(bb.col(2), "fro") == 0.0);
    arma::cx_mat pa = p.cols(0, 2);
    for (arma::uword c : {0u, 1u, 3u})
    {
        arma::cx_vec r = w.col(c) - pa * bb.submat(0, c, 2, c);
        CHECK(arma::norm(pa.t() * r) < 1e-10); // normal equations
    }
    CHECK_THROWS_AS(baseband_update(p.cols(0, 1), w, s), std::invalid_argument);
}

TEST_CASE("analog update recovers an analog matrix already in the alphabet")
{
    Rng rng(55);
    DiscreteAlphabet alpha(3);
    for (int t = 0; t < 10; ++t)
    {
        arma::cx_mat p = discrete_project(test::random_cx(rng, 10, 4), alpha);
        arma::cx_mat bb = test::random_cx(rng, 4, 4);
        StreamSelection all(2, 2, true);
        arma::cx_mat w = p * bb;
        AnalogUpdate u = analog_update(w, bb, all, alpha, arma::cx_mat(10, 4, arma::fill::ones));
        REQUIRE(u.updated);
        CHECK(arma::norm(u.analog - p, "fro") < 1e-9);
        CHECK(arma::norm(u.shifter_a + u.shifter_b - u.analog, "fro") < 1e-12);
    }
}

TEST_CASE("analog update leaves the previous matrix when the baseband is zero")
{
    DiscreteAlphabet alpha(2);
    arma::cx_mat prev(6, 2, arma::fill::ones);
    StreamSelection s(1, 2, true);
    AnalogUpdate u = analog_update(arma::cx_mat(6, 2, arma::fill::ones), arma::cx_mat(2, 2, arma::fill::zeros), s,
                                   alpha, prev);
    CHECK_FALSE(u.updated);
    CHECK(arma::approx_equal(u.analog, prev, "absdiff", 0.0));
    CHECK_THROWS_AS(analog_update(prev, arma::cx_mat(2, 2), StreamSelection(1, 2, false), alpha, prev),
                    std::invalid_argument);
}

TEST_CASE("penalty weight shrinks geometrically")
{
    CHECK_THAT(penalty_schedule(100.0, 0.75), WithinAbs(75.0, 1e-12));
    double rho = 100.0;
    for (int i = 0; i < 10; ++i)
        rho = penalty_schedule(rho, 0.5);
    CHECK_THAT(rho, WithinRel(100.0 / 1024.0, 1e-12));
}

TEST_CASE("penalty solver output is realizable and consistent")
{
    for (std::uint64_t seed : {61u, 62u})
    {
        ExperimentConfig e = test::desk();
        e.solver = SolverKind::pli;
        ChannelList ch = test::channels_for(e, seed);
        SolverConfig cfg = e.solver_config();
        PliResult r = pli_solve(ch, cfg);
        const HybridBeamformer &h = r.hybrid;
        CHECK(h.analog.n_cols == cfg.rf_chains);
        for (arma::uword i = 0; i < h.analog.n_elem; ++i)
            CHECK(in_alphabet(h.analog(i), cfg.bits));
        CHECK(arma::norm(h.shifter_a + h.shifter_b - h.analog, "fro") < 1e-12);
        CHECK(h.active_chains == r.selection.active_count());
        CHECK(r.tx_power <= cfg.power.budget_watts * (1.0 + 1e-9));

        arma::vec rates = achievable_rate(ch, h.effective(), r.selection, cfg.noise_power);
        CHECK(arma::approx_equal(rates, r.rates, "reldiff", 1e-12));
        CHECK_THAT(r.objective, WithinRel(network_objective(rates, hardware_power(r.selection, cfg.power, 64),
                                                            cfg.beta), 1e-12));
        CHECK(r.penalty_trace.size() == r.outer_iterations);
        CHECK(r.trace_outer.size() == r.objective_trace.size());
        CHECK(r.objective_trace.size() == r.inner_iterations);
        if (r.converged)
            CHECK(r.penalty_trace.back() <= cfg.eps4);
        for (std::size_t i = 1; i < r.rho_trace.size(); ++i)
            CHECK_THAT(r.rho_trace[i], WithinRel(cfg.shrink * r.rho_trace[i - 1], 1e-12));

        PliResult again = pli_solve(ch, cfg);
        CHECK(arma::approx_equal(again.hybrid.effective(), h.effective(), "absdiff", 0.0));
    }
}
