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

#ifndef NFHBF_PLI_HPP
#define NFHBF_PLI_HPP

#include "nfhbf/wmmse_ts.hpp"

#include <vector>

namespace nfhbf
{
    // Sums of two phasors drawn from a 2^bits-level phase grid
    class DiscreteAlphabet
    {
    public:
        struct Atom
        {
            cx value;
            double theta_a; // phase of the first shifter
            double theta_b; // phase of the second shifter
        };

        explicit DiscreteAlphabet(unsigned bits);

        unsigned bits() const { return bits_; }
        const std::vector<Atom> &atoms() const { return atoms_; }

        // Nearest atom; ties keep the lexicographically first phase pair
        const Atom &project(cx value) const;

    private:
        unsigned bits_;
        std::vector<Atom> atoms_;
    };

    // Entry-wise projection; P1, P2 receive the realizing phasors
    arma::cx_mat discrete_project(const arma::cx_mat &values, const DiscreteAlphabet &alphabet,
                                  arma::cx_mat *shifter_a = nullptr, arma::cx_mat *shifter_b = nullptr);

    // Columns of H_k^H Z_k Gamma_k + (1 / 2 rho) P W_k
    arma::cx_mat penalized_targets(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                   const std::vector<arma::cx_mat> &weights, const arma::cx_mat &hybrid_product,
                                   double rho);

    // ((1 + 2 rho xi) / (2 rho) I + G J G^H)^-1 m
    arma::cx_mat penalized_precoder(const arma::cx_mat &targets, const GramEvd &gram, double multiplier, double rho);

    // E_{j,k} = -sum_i y (J + 2 s) / (J + s)^2 with s = (1 + 2 rho xi) / (2 rho)
    arma::vec penalized_contribution(const StreamMetrics &metrics, const arma::vec &eigs, double multiplier,
                                     double rho);

    StreamSelection penalized_select(const StreamMetrics &metrics, const arma::vec &eigs, double multiplier,
                                     double rho, const SelectionRule &rule);

    double penalized_power(const StreamSelection &selection, const StreamMetrics &metrics, const arma::vec &eigs,
                           double multiplier, double rho);

    BisectionResult penalized_bisection(const StreamMetrics &metrics, const GramEvd &gram, const SelectionRule &rule,
                                        double rho, const BisectionOptions &options = {},
                                        const StreamSelection *frozen = nullptr);

    // sum over active streams of |w_bar - P w|^2
    double penalty_value(const arma::cx_mat &fully_digital, const arma::cx_mat &hybrid_product,
                         const StreamSelection &selection);

    struct AnalogUpdate
    {
        arma::cx_mat analog;     // M_t x n_rf, entries in the alphabet
        arma::cx_mat shifter_a;
        arma::cx_mat shifter_b;
        bool updated = false;    // false when the least-squares system was unusable
    };

    // Least-squares fit of the leading active columns followed by projection;
    // baseband is n_rf x (K*M_r), previous analog is M_t x n_rf
    AnalogUpdate analog_update(const arma::cx_mat &fully_digital, const arma::cx_mat &baseband,
                               const StreamSelection &selection, const DiscreteAlphabet &alphabet,
                               const arma::cx_mat &previous);

    // w = P^+ w_bar on active streams using the leading active columns of P
    arma::cx_mat baseband_update(const arma::cx_mat &analog, const arma::cx_mat &fully_digital,
                                 const StreamSelection &selection);

    inline double penalty_schedule(double rho, double shrink) { return shrink * rho; }

    struct PliResult
    {
        HybridBeamformer hybrid;
        arma::cx_mat fully_digital;
        StreamSelection selection;
        arma::vec rates;                         // evaluated on the hybrid precoder
        double objective = 0.0;
        double tx_power = 0.0;
        std::vector<double> objective_trace;     // penalized objective after each inner iteration
        std::vector<arma::uword> trace_outer;    // outer index of each trace entry
        std::vector<double> penalty_trace;       // penalty after each outer iteration
        std::vector<double> rho_trace;
        arma::uword inner_iterations = 0;
        arma::uword outer_iterations = 0;
        double penalty = 0.0;
        bool converged = false;
        bool warning = false;
    };

    PliResult pli_solve(const ChannelList &channels, const SolverConfig &config);
}

#endif
