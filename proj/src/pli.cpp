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

#include "nfhbf/factorization.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace nfhbf
{
    DiscreteAlphabet::DiscreteAlphabet(unsigned bits) : bits_(bits)
    {
        if (bits < 1 || bits > 8)
            throw std::invalid_argument("DiscreteAlphabet: bits must lie in [1, 8]");
        const unsigned levels = 1u << bits;
        const double step = 2.0 * pi / double(levels);

        // Grid buckets for near-duplicate detection
        std::map<std::pair<long long, long long>, std::vector<std::size_t>> buckets;
        auto key = [](double v) { return (long long)std::floor(v * 1e9); };

        for (unsigned a = 0; a < levels; ++a)
            for (unsigned b = 0; b < levels; ++b)
            {
                double ta = step * a, tb = step * b;
                cx v = std::polar(1.0, ta) + std::polar(1.0, tb);
                double re = std::abs(v.real()) < 1e-12 ? 0.0 : v.real();
                double im = std::abs(v.imag()) < 1e-12 ? 0.0 : v.imag();
                v = cx(re, im);

                long long kr = key(re), ki = key(im);
                bool dup = false;
                for (long long dr = -1; dr <= 1 && !dup; ++dr)
                    for (long long di = -1; di <= 1 && !dup; ++di)
                    {
                        auto it = buckets.find({kr + dr, ki + di});
                        if (it == buckets.end())
                            continue;
                        for (std::size_t idx : it->second)
                            if (std::abs(atoms_[idx].value - v) <= 1e-12)
                            {
                                dup = true;
                                break;
                            }
                    }
                if (dup)
                    continue;
                buckets[{kr, ki}].push_back(atoms_.size());
                atoms_.push_back({v, ta, tb});
            }
    }

    const DiscreteAlphabet::Atom &DiscreteAlphabet::project(cx value) const
    {
        std::size_t best = 0;
        double best_d = std::norm(atoms_[0].value - value);
        for (std::size_t i = 1; i < atoms_.size(); ++i)
        {
            double d = std::norm(atoms_[i].value - value);
            if (d < best_d - 1e-12)
            {
                best_d = d;
                best = i;
            }
        }
        return atoms_[best];
    }

    arma::cx_mat discrete_project(const arma::cx_mat &values, const DiscreteAlphabet &alphabet,
                                  arma::cx_mat *shifter_a, arma::cx_mat *shifter_b)
    {
        arma::cx_mat out(arma::size(values));
        if (shifter_a)
            shifter_a->set_size(arma::size(values));
        if (shifter_b)
            shifter_b->set_size(arma::size(values));
        for (arma::uword i = 0; i < values.n_elem; ++i)
        {
            const auto &atom = alphabet.project(values(i));
            out(i) = atom.value;
            if (shifter_a)
                (*shifter_a)(i) = std::polar(1.0, atom.theta_a);
            if (shifter_b)
                (*shifter_b)(i) = std::polar(1.0, atom.theta_b);
        }
        return out;
    }

    arma::cx_mat penalized_targets(const ChannelList &channels, const std::vector<arma::cx_mat> &combiners,
                                   const std::vector<arma::cx_mat> &weights, const arma::cx_mat &hybrid_product,
                                   double rho)
    {
        if (!(rho > 0.0))
            throw std::invalid_argument("penalized_targets: rho must be positive");
        arma::cx_mat f = combiner_targets(channels, combiners, weights);
        if (arma::size(f) != arma::size(hybrid_product))
            throw std::invalid_argument("penalized_targets: hybrid product shape mismatch");
        return f + hybrid_product / (2.0 * rho);
    }

    namespace
    {
        double shift_of(double multiplier, double rho)
        {
            if (!(rho > 0.0))
                throw std::invalid_argument("penalty weight rho must be positive");
            if (!(multiplier >= 0.0))
                throw std::invalid_argument("multiplier must be non-negative");
            return 1.0 / (2.0 * rho) + multiplier;
        }
    }

    arma::cx_mat penalized_precoder(const arma::cx_mat &targets, const GramEvd &gram, double multiplier, double rho)
    {
        return detail::precoder_at_shift(targets, gram, shift_of(multiplier, rho));
    }

    arma::vec penalized_contribution(const StreamMetrics &metrics, const arma::vec &eigs, double multiplier,
                                     double rho)
    {
        return detail::contribution_at_shift(metrics.projections, eigs, shift_of(multiplier, rho));
    }

    StreamSelection penalized_select(const StreamMetrics &metrics, const arma::vec &eigs, double multiplier,
                                     double rho, const SelectionRule &rule)
    {
        return select_streams(penalized_contribution(metrics, eigs, multiplier, rho), metrics.streams_per_user, rule);
    }

    double penalized_power(const StreamSelection &selection, const StreamMetrics &metrics, const arma::vec &eigs,
                           double multiplier, double rho)
    {
        return detail::power_at_shift(selection, metrics.projections, eigs, shift_of(multiplier, rho));
    }

    BisectionResult penalized_bisection(const StreamMetrics &metrics, const GramEvd &gram, const SelectionRule &rule,
                                        double rho, const BisectionOptions &options, const StreamSelection *frozen)
    {
        if (!(options.lower >= 0.0 && options.upper > options.lower))
            throw std::invalid_argument("penalized_bisection: bounds must satisfy 0 <= lower < upper");
        return detail::bisection_at_offset(metrics, gram, rule, options, frozen, shift_of(0.0, rho));
    }

    double penalty_value(const arma::cx_mat &fully_digital, const arma::cx_mat &hybrid_product,
                         const StreamSelection &selection)
    {
        if (arma::size(fully_digital) != arma::size(hybrid_product))
            throw std::invalid_argument("penalty_value: shape mismatch");
        double p = 0.0;
        for (arma::uword c = 0; c < fully_digital.n_cols; ++c)
            if (selection.active_column(c))
                p += std::pow(arma::norm(fully_digital.col(c) - hybrid_product.col(c)), 2);
        return p;
    }

    AnalogUpdate analog_update(const arma::cx_mat &fully_digital, const arma::cx_mat &baseband,
                               const StreamSelection &selection, const DiscreteAlphabet &alphabet,
                               const arma::cx_mat &previous)
    {
        const arma::uword ts = selection.active_count();
        if (ts == 0)
            throw std::invalid_argument("analog_update: no active streams");
        if (previous.n_rows != fully_digital.n_rows || previous.n_cols < ts || baseband.n_rows != previous.n_cols ||
            baseband.n_cols != fully_digital.n_cols)
            throw std::invalid_argument("analog_update: shape mismatch");

        AnalogUpdate out;
        out.analog = previous;

        arma::uvec act = selection.active_columns();
        arma::cx_mat wbar = fully_digital.cols(act);
        arma::cx_mat wt = arma::cx_mat(baseband.rows(0, ts - 1)).cols(act);
        arma::cx_mat a = wbar * wt.t();
        arma::cx_mat b = wt * wt.t();
        b = 0.5 * (b + b.t());

        double scale = std::real(arma::trace(b)) / double(ts);
        if (!(scale > 0.0) || !std::isfinite(scale))
        {
            split_analog(out.analog, out.shifter_a, out.shifter_b);
            return out;
        }
        if (arma::rcond(b) < 1e-12)
            b += 1e-10 * scale * arma::eye<arma::cx_mat>(ts, ts);

        // P_c B = A  <=>  B^H P_c^H = A^H with B Hermitian
        arma::cx_mat pct;
        bool ok = arma::solve(pct, b, arma::cx_mat(a.t()), arma::solve_opts::no_approx);
        if (!ok || !pct.is_finite())
        {
            split_analog(out.analog, out.shifter_a, out.shifter_b);
            return out;
        }

        out.analog.cols(0, ts - 1) = discrete_project(arma::cx_mat(pct.t()), alphabet);
        out.updated = true;
        discrete_project(out.analog, alphabet, &out.shifter_a, &out.shifter_b);
        return out;
    }

    arma::cx_mat baseband_update(const arma::cx_mat &analog, const arma::cx_mat &fully_digital,
                                 const StreamSelection &selection)
    {
        const arma::uword ts = selection.active_count();
        if (analog.n_rows != fully_digital.n_rows || analog.n_cols < ts)
            throw std::invalid_argument("baseband_update: shape mismatch");

        arma::cx_mat w(analog.n_cols, fully_digital.n_cols, arma::fill::zeros);
        if (ts == 0)
            return w;
        arma::cx_mat pinv = arma::pinv(arma::cx_mat(analog.cols(0, ts - 1)));
        for (arma::uword c = 0; c < fully_digital.n_cols; ++c)
            if (selection.active_column(c))
                w.submat(0, c, ts - 1, c) = pinv * fully_digital.col(c);
        return w;
    }

    namespace
    {
        // Spare chains start from directions orthogonal to the active ones
        arma::cx_mat initial_analog(const arma::cx_mat &fully_digital, const StreamSelection &selection,
                                    arma::uword rf_chains)
        {
            const arma::uword mt = fully_digital.n_rows, ts = selection.active_count();
            FactorizationResult fr = hybrid_factorize(apply_selection(fully_digital, selection), ts, rf_chains);
            arma::cx_mat p = fr.hybrid.analog;
            if (ts < rf_chains)
            {
                arma::cx_mat q, r;
                if (ts > 0)
                    arma::qr(q, r, arma::cx_mat(p.cols(0, ts - 1)));
                else
                    q = arma::eye<arma::cx_mat>(mt, mt);
                for (arma::uword c = ts; c < rf_chains; ++c)
                {
                    arma::cx_vec v = q.col(c);
                    p.col(c) = v * (2.0 / arma::max(arma::abs(v)));
                }
            }
            return p;
        }

        // Penalized objective with the natural log, for which the weight update is the exact block maximizer
        double penalized_objective(const WmmseState &state, const ChannelList &channels, const SolverConfig &cfg,
                                   double weight, double penalty, double hpc)
        {
            const arma::uword mr = channels.front().n_rows;
            std::vector<arma::cx_mat> e = mse_matrices(state, channels, cfg.noise_power);
            double acc = 0.0;
            for (std::size_t k = 0; k < channels.size(); ++k)
            {
                arma::vec ev = arma::eig_sym(arma::cx_mat(0.5 * (state.weights[k] + state.weights[k].t())));
                acc += arma::accu(arma::log(ev)) + cfg.mu * double(mr) -
                       cfg.mu * std::real(arma::trace(state.weights[k] * e[k]));
            }
            return cfg.beta * acc - cfg.beta * cfg.mu * weight * penalty - (1.0 - cfg.beta) * hpc;
        }

        // Exact W-block value: sum over active streams of beta mu (w^H (A + c I) w - 2 Re m^H w + c |P w|^2) + (1 - beta) cost
        double penalized_block_value(const BisectionResult &r, const StreamMetrics &m, const arma::vec &eigs,
                                     const SelectionRule &rule, double weight, const arma::cx_mat &hybrid_product)
        {
            const double s = weight + r.multiplier;
            double v = 0.0;
            for (arma::uword col = 0; col < m.projections.n_cols; ++col)
            {
                if (!r.selection.active_column(col))
                    continue;
                double e = 0.0;
                for (arma::uword i = 0; i < eigs.n_elem; ++i)
                {
                    double den = eigs(i) + s;
                    e -= m.projections(i, col) * (eigs(i) + 2.0 * s - weight) / (den * den);
                }
                double pw = std::pow(arma::norm(hybrid_product.col(col)), 2);
                v += rule.beta * rule.mu * (e + weight * pw) + (1.0 - rule.beta) * rule.chain_cost();
            }
            return v;
        }
    }

    PliResult pli_solve(const ChannelList &channels, const SolverConfig &config)
    {
        if (channels.empty())
            throw std::invalid_argument("pli_solve: no channels given");
        const arma::uword k_users = channels.size(), mr = channels.front().n_rows, mt = channels.front().n_cols;
        config.validate(k_users, mr, mt);
        const arma::uword n_rf = config.rf_chains;

        const SelectionRule rule = selection_rule(config, mt);
        BisectionOptions opts;
        opts.lower = config.xi_lower;
        opts.upper = config.xi_upper;
        opts.tolerance = config.eps1;
        const DiscreteAlphabet alphabet(config.bits);

        // Continuous warm start
        SolverConfig warm = config;
        warm.max_iters = config.warm_start_iters;
        WmmseState state = wmmse_ts_solve(channels, warm).state;

        arma::cx_mat analog = discrete_project(initial_analog(state.fully_digital, state.selection, n_rf), alphabet);
        arma::cx_mat baseband = baseband_update(analog, state.fully_digital, state.selection);

        PliResult out;
        double rho = config.rho0;
        double best_penalty = arma::datum::inf;
        struct Snapshot
        {
            WmmseState state;
            arma::cx_mat analog, baseband;
        } best{state, analog, baseband};

        for (arma::uword outer = 0; outer < config.max_outer; ++outer)
        {
            const double weight = 1.0 / (2.0 * rho);
            double prev_obj = 0.0;

            for (arma::uword inner = 0; inner < config.max_inner; ++inner)
            {
                for (arma::uword k = 0; k < k_users; ++k)
                    state.combiners[k] = update_combiner(channels, state.fully_digital, state.selection,
                                                         config.noise_power, k);
                std::vector<arma::cx_mat> e = mse_matrices(state, channels, config.noise_power);
                for (arma::uword k = 0; k < k_users; ++k)
                    state.weights[k] = update_weight(e[k], config.mu);

                GramEvd gram = interference_gram_evd(channels, state.combiners, state.weights);
                arma::cx_mat product = analog * baseband;
                arma::cx_mat m = combiner_targets(channels, state.combiners, state.weights) + weight * product;
                StreamMetrics metrics = stream_metrics(m, gram, mr);

                const StreamSelection *frozen = config.frozen_selection ? &*config.frozen_selection : nullptr;
                BisectionResult step = detail::bisection_at_offset(metrics, gram, rule, opts, frozen, weight);
                if (!frozen)
                {
                    BisectionResult keep =
                        detail::bisection_at_offset(metrics, gram, rule, opts, &state.selection, weight);
                    if (penalized_block_value(keep, metrics, gram.eigenvalues, rule, weight, product) <
                        penalized_block_value(step, metrics, gram.eigenvalues, rule, weight, product))
                        step = std::move(keep);
                }
                const bool resized = step.selection.active_count() != state.selection.active_count();
                state.fully_digital = step.fully_digital;
                state.selection = step.selection;
                state.multiplier = step.multiplier;

                if (state.selection.active_count() > 0)
                {
                    if (resized)
                        baseband = baseband_update(analog, state.fully_digital, state.selection);

                    double before = penalty_value(state.fully_digital, analog * baseband, state.selection);
                    AnalogUpdate au = analog_update(state.fully_digital, baseband, state.selection, alphabet, analog);
                    if (au.updated &&
                        penalty_value(state.fully_digital, au.analog * baseband, state.selection) <= before)
                        analog = au.analog;
                    baseband = baseband_update(analog, state.fully_digital, state.selection);
                }
                else
                    baseband.zeros();

                double penalty = penalty_value(state.fully_digital, analog * baseband, state.selection);
                double hpc = hardware_power(state.selection, config.power, mt);
                double obj = penalized_objective(state, channels, config, weight, penalty, hpc);
                out.objective_trace.push_back(obj);
                out.trace_outer.push_back(outer);
                ++out.inner_iterations;

                if (inner > 0)
                {
                    double denom = std::max(std::abs(prev_obj), std::numeric_limits<double>::min());
                    if (std::abs(obj - prev_obj) / denom < config.eps3)
                        break;
                }
                prev_obj = obj;
            }

            double penalty = penalty_value(state.fully_digital, analog * baseband, state.selection);
            out.penalty_trace.push_back(penalty);
            out.rho_trace.push_back(rho);
            out.outer_iterations = outer + 1;
            if (penalty < best_penalty)
            {
                best_penalty = penalty;
                best = {state, analog, baseband};
            }
            if (penalty <= config.eps4)
            {
                out.converged = true;
                break;
            }
            rho = penalty_schedule(rho, config.shrink);
        }

        if (!out.converged)
        {
            out.warning = true;
            state = best.state;
            analog = best.analog;
            baseband = best.baseband;
        }

        // The realized precoder must respect the budget
        arma::cx_mat product = analog * baseband;
        double p = transmit_power(product, state.selection);
        if (p > config.power.budget_watts)
        {
            double f = std::sqrt(config.power.budget_watts / p);
            baseband *= f;
            product *= f;
        }

        out.hybrid.analog = analog;
        discrete_project(analog, alphabet, &out.hybrid.shifter_a, &out.hybrid.shifter_b);
        out.hybrid.baseband = baseband;
        out.hybrid.active_chains = state.selection.active_count();
        out.fully_digital = state.fully_digital;
        out.selection = state.selection;
        out.penalty = penalty_value(state.fully_digital, analog * baseband, state.selection);
        out.tx_power = transmit_power(product, state.selection);
        out.rates = achievable_rate(channels, product, state.selection, config.noise_power);
        out.objective = network_objective(out.rates, hardware_power(state.selection, config.power, mt), config.beta);
        return out;
    }
}
