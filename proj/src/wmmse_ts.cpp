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

#include "nfhbf/wmmse_ts.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nfhbf
{
    void SolverConfig::validate(arma::uword users, arma::uword streams_per_user, arma::uword antennas) const
    {
        auto fail = [](const char *msg) { throw std::invalid_argument(std::string("SolverConfig: ") + msg); };
        if (!(beta >= 0.0 && beta <= 1.0))
            fail("beta must lie in [0, 1]");
        if (!(mu > 0.0))
            fail("mu must be positive");
        if (!(noise_power > 0.0))
            fail("noise power must be positive");
        power.validate();
        if (rf_chains == 0 || rf_chains > antennas)
            fail("rf_chains must lie in [1, antennas]");
        if (users * streams_per_user > rf_chains)
            fail("users * streams per user exceeds rf_chains");
        if (!(eps1 > 0.0 && eps2 > 0.0 && eps3 > 0.0 && eps4 > 0.0))
            fail("tolerances must be positive");
        if (!(rho0 > 0.0))
            fail("rho0 must be positive");
        if (!(shrink > 0.0 && shrink < 1.0))
            fail("shrink must lie in (0, 1)");
        if (bits < 1 || bits > 8)
            fail("bits must lie in [1, 8]");
        if (max_iters == 0 || max_inner == 0 || max_outer == 0)
            fail("iteration limits must be positive");
        if (!(xi_lower >= 0.0 && xi_upper > xi_lower))
            fail("multiplier bounds must satisfy 0 <= lower < upper");
        if (frozen_selection)
        {
            if (frozen_selection->users() != users || frozen_selection->streams_per_user() != streams_per_user)
                fail("frozen selection shape does not match the channels");
            if (frozen_selection->active_count() > rf_chains)
                fail("frozen selection exceeds rf_chains");
        }
    }

    StreamMetrics stream_metrics(const arma::cx_mat &targets, const GramEvd &gram, arma::uword streams_per_user)
    {
        StreamMetrics m;
        m.targets = targets;
        m.projections = arma::square(arma::abs(gram.basis.t() * targets));
        m.streams_per_user = streams_per_user;
        return m;
    }

    SelectionRule selection_rule(const SolverConfig &config, arma::uword antennas)
    {
        SelectionRule r;
        r.beta = config.beta;
        r.mu = config.mu;
        r.power = config.power;
        r.antennas = antennas;
        r.max_chains = config.rf_chains;
        return r;
    }

    namespace detail
    {
        namespace
        {
            // Null-space terms with negligible energy are dropped; others make the system singular
            bool negligible(double x, double column_total)
            {
                return x <= 1e-16 * column_total;
            }
        }

        arma::vec contribution_at_shift(const arma::mat &projections, const arma::vec &eigs, double shift)
        {
            arma::vec c(projections.n_cols, arma::fill::zeros);
            for (arma::uword col = 0; col < projections.n_cols; ++col)
            {
                double total = arma::accu(projections.col(col));
                double acc = 0.0;
                for (arma::uword i = 0; i < eigs.n_elem; ++i)
                {
                    double x = projections(i, col), den = eigs(i) + shift;
                    if (den <= 0.0)
                    {
                        if (negligible(x, total))
                            continue;
                        acc = -arma::datum::inf;
                        break;
                    }
                    acc -= x * (eigs(i) + 2.0 * shift) / (den * den);
                }
                c(col) = acc;
            }
            return c;
        }

        double power_at_shift(const StreamSelection &selection, const arma::mat &projections, const arma::vec &eigs,
                              double shift)
        {
            double p = 0.0;
            for (arma::uword col = 0; col < projections.n_cols; ++col)
            {
                if (!selection.active_column(col))
                    continue;
                double total = arma::accu(projections.col(col));
                for (arma::uword i = 0; i < eigs.n_elem; ++i)
                {
                    double x = projections(i, col), den = eigs(i) + shift;
                    if (den <= 0.0)
                    {
                        if (negligible(x, total))
                            continue;
                        return arma::datum::inf;
                    }
                    p += x / (den * den);
                }
            }
            return p;
        }

        arma::cx_mat precoder_at_shift(const arma::cx_mat &targets, const GramEvd &gram, double shift)
        {
            arma::vec d(gram.eigenvalues.n_elem);
            for (arma::uword i = 0; i < d.n_elem; ++i)
            {
                double den = gram.eigenvalues(i) + shift;
                d(i) = den > 0.0 ? 1.0 / den : 0.0;
            }
            arma::cx_mat y = gram.basis.t() * targets;
            y.each_col() %= arma::conv_to<arma::cx_vec>::from(d);
            return gram.basis * y;
        }

        namespace
        {
            struct Probe
            {
                StreamSelection selection;
                double power = 0.0;
            };

            Probe probe(const StreamMetrics &m, const arma::vec &eigs, const SelectionRule &rule,
                        const StreamSelection *frozen, double shift)
            {
                Probe p;
                if (frozen)
                    p.selection = *frozen;
                else
                    p.selection = select_streams(contribution_at_shift(m.projections, eigs, shift),
                                                 m.streams_per_user, rule);
                p.power = power_at_shift(p.selection, m.projections, eigs, shift);
                return p;
            }

            BisectionResult finish(const StreamMetrics &m, const GramEvd &gram,
                                   const StreamSelection &selection, double multiplier, double offset,
                                   arma::uword iterations, bool binding)
            {
                BisectionResult r;
                r.multiplier = multiplier;
                r.selection = selection;
                r.fully_digital = apply_selection(precoder_at_shift(m.targets, gram, offset + multiplier), selection);
                r.power = transmit_power(r.fully_digital, selection);
                r.binding = binding;
                r.iterations = iterations;
                return r;
            }
        }

        BisectionResult bisection_at_offset(const StreamMetrics &metrics, const GramEvd &gram,
                                            const SelectionRule &rule, const BisectionOptions &options,
                                            const StreamSelection *frozen, double offset)
        {
            const double budget = rule.power.budget_watts;
            const arma::vec &eigs = gram.eigenvalues;
            double lo = options.lower, hi = options.upper;

            // Slack budget: the multiplier stays at its lower bound
            Probe at_lo = probe(metrics, eigs, rule, frozen, offset + lo);
            if (at_lo.power <= budget)
                return finish(metrics, gram, at_lo.selection, lo, offset, 0, false);

            Probe at_hi = probe(metrics, eigs, rule, frozen, offset + hi);
            for (int grow = 0; at_hi.power > budget; ++grow)
            {
                if (grow >= 60)
                    throw std::runtime_error("bisection: no feasible upper multiplier");
                lo = hi;
                hi *= 10.0;
                at_hi = probe(metrics, eigs, rule, frozen, offset + hi);
            }

            arma::uword it = 0;
            for (; it < options.max_iters; ++it)
            {
                double mid = 0.5 * (lo + hi);
                if (!(mid > lo && mid < hi))
                    break;
                Probe p = probe(metrics, eigs, rule, frozen, offset + mid);
                if (std::abs(p.power - budget) <= options.tolerance)
                    return finish(metrics, gram, p.selection, mid, offset, it + 1, true);
                if (p.power > budget)
                    lo = mid;
                else
                {
                    hi = mid;
                    at_hi = std::move(p);
                }
            }

            // The power curve jumps across the budget where the selection changes:
            // keep the selection on the feasible side and bind the budget with it
            if (!frozen)
            {
                BisectionOptions sub = options;
                sub.upper = hi;
                BisectionResult r = bisection_at_offset(metrics, gram, rule, sub, &at_hi.selection, offset);
                r.iterations += it;
                return r;
            }
            return finish(metrics, gram, at_hi.selection, hi, offset, it, true);
        }

        double block_objective_at_offset(const BisectionResult &result, const StreamMetrics &metrics,
                                         const arma::vec &eigs, const SelectionRule &rule, double offset)
        {
            arma::vec c = contribution_at_shift(metrics.projections, eigs, offset + result.multiplier);
            double v = 0.0;
            for (arma::uword col = 0; col < c.n_elem; ++col)
                if (result.selection.active_column(col))
                    v += rule.beta * rule.mu * c(col) + (1.0 - rule.beta) * rule.chain_cost();
            return v;
        }
    }

    arma::vec stream_contribution(const StreamMetrics &metrics, const arma::vec &eigs, double multiplier)
    {
        if (!(multiplier >= 0.0))
            throw std::invalid_argument("stream_contribution: multiplier must be non-negative");
        arma::vec c = detail::contribution_at_shift(metrics.projections, eigs, multiplier);
        if (!c.is_finite())
            throw std::invalid_argument("stream_contribution: singular system at this multiplier");
        return c;
    }

    StreamSelection select_streams(const arma::vec &contributions, arma::uword streams_per_user,
                                   const SelectionRule &rule)
    {
        if (streams_per_user == 0 || contributions.n_elem % streams_per_user != 0)
            throw std::invalid_argument("select_streams: contribution count is not a multiple of streams per user");
        if (!(rule.beta >= 0.0 && rule.beta <= 1.0))
            throw std::invalid_argument("select_streams: beta must lie in [0, 1]");

        const double cost = (1.0 - rule.beta) * rule.chain_cost();
        std::vector<std::pair<double, arma::uword>> on;
        for (arma::uword c = 0; c < contributions.n_elem; ++c)
        {
            double score = rule.beta * rule.mu * contributions(c) + cost;
            if (score < 0.0)
                on.emplace_back(score, c);
        }
        std::stable_sort(on.begin(), on.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
        if (rule.max_chains > 0 && on.size() > rule.max_chains)
            on.resize(rule.max_chains);

        StreamSelection sel(streams_per_user, contributions.n_elem / streams_per_user, false);
        for (const auto &[score, c] : on)
            sel.set(c % streams_per_user, c / streams_per_user, true);
        return sel;
    }

    arma::cx_mat digital_precoder(const arma::cx_mat &targets, const GramEvd &gram, double multiplier)
    {
        if (!(multiplier >= 0.0))
            throw std::invalid_argument("digital_precoder: multiplier must be non-negative");
        arma::mat proj = arma::square(arma::abs(gram.basis.t() * targets));
        StreamSelection all(1, targets.n_cols, true);
        if (!std::isfinite(detail::power_at_shift(all, proj, gram.eigenvalues, multiplier)))
            throw std::invalid_argument("digital_precoder: singular system at this multiplier");
        return detail::precoder_at_shift(targets, gram, multiplier);
    }

    double power_at_multiplier(const StreamSelection &selection, const StreamMetrics &metrics, const arma::vec &eigs,
                               double multiplier)
    {
        if (!(multiplier >= 0.0))
            throw std::invalid_argument("power_at_multiplier: multiplier must be non-negative");
        return detail::power_at_shift(selection, metrics.projections, eigs, multiplier);
    }

    BisectionResult bisection_solve(const StreamMetrics &metrics, const GramEvd &gram, const SelectionRule &rule,
                                    const BisectionOptions &options, const StreamSelection *frozen)
    {
        if (!(options.lower >= 0.0 && options.upper > options.lower))
            throw std::invalid_argument("bisection_solve: bounds must satisfy 0 <= lower < upper");
        return detail::bisection_at_offset(metrics, gram, rule, options, frozen, 0.0);
    }

    double block_objective(const BisectionResult &result, const StreamMetrics &metrics, const arma::vec &eigs,
                           const SelectionRule &rule)
    {
        return detail::block_objective_at_offset(result, metrics, eigs, rule, 0.0);
    }

    arma::vec water_filling(const arma::vec &gains, double power)
    {
        arma::vec out(gains.n_elem, arma::fill::zeros);
        arma::uvec order = arma::sort_index(gains, "descend");
        arma::uword usable = arma::accu(gains > 0.0);
        double inv = 0.0;
        for (arma::uword i = 0; i < usable; ++i)
            inv += 1.0 / gains(order(i));
        for (arma::uword n = usable; n > 0; --n)
        {
            double level = (power + inv) / double(n);
            if (level > 1.0 / gains(order(n - 1)))
            {
                for (arma::uword i = 0; i < n; ++i)
                    out(order(i)) = level - 1.0 / gains(order(i));
                return out;
            }
            inv -= 1.0 / gains(order(n - 1));
        }
        return out;
    }

    namespace
    {
        // Right singular directions of each user's channel after projecting out the other users,
        // with the per-stream gains sigma^2 / noise; columns follow the stacked precoder layout
        void block_diagonal_modes(const ChannelList &channels, double noise, arma::cx_mat &dirs, arma::vec &gains)
        {
            const arma::uword k_users = channels.size(), mr = channels.front().n_rows, mt = channels.front().n_cols;
            dirs.zeros(mt, k_users * mr);
            gains.zeros(k_users * mr);
            for (arma::uword k = 0; k < k_users; ++k)
            {
                arma::cx_mat proj = arma::eye<arma::cx_mat>(mt, mt);
                if (k_users > 1)
                {
                    arma::cx_mat others(0, mt);
                    for (arma::uword i = 0; i < k_users; ++i)
                        if (i != k)
                            others = arma::join_cols(others, channels[i]);
                    arma::cx_mat u, v;
                    arma::vec sv;
                    arma::svd(u, sv, v, others);
                    arma::uword rank = sv.is_empty() ? 0 : arma::accu(sv > 1e-12 * sv.max());
                    if (rank < mt)
                    {
                        arma::cx_mat null = v.cols(rank, mt - 1);
                        proj = null * null.t();
                    }
                }
                arma::cx_mat u, v;
                arma::vec sv;
                arma::svd_econ(u, sv, v, arma::cx_mat(channels[k] * proj), "right");
                for (arma::uword j = 0; j < std::min<arma::uword>(mr, sv.n_elem); ++j)
                {
                    dirs.col(k * mr + j) = v.col(j);
                    gains(k * mr + j) = sv(j) * sv(j) / noise;
                }
            }
        }
    }

    WmmseState initial_state(const ChannelList &channels, const SolverConfig &config)
    {
        const arma::uword k_users = channels.size(), mr = channels.front().n_rows, mt = channels.front().n_cols;
        const double budget = config.power.budget_watts;
        WmmseState s;

        arma::cx_mat dirs;
        arma::vec gains;
        block_diagonal_modes(channels, config.noise_power, dirs, gains);

        arma::vec power(gains.n_elem, arma::fill::zeros);
        if (config.frozen_selection)
        {
            s.selection = *config.frozen_selection;
            arma::uvec on = s.selection.active_columns();
            if (!on.is_empty())
                power.elem(on) = water_filling(gains.elem(on), budget);
        }
        else
        {
            // Strongest n modes, n chosen by the network objective of the interference-free model
            arma::uvec order = arma::sort_index(gains, "descend");
            arma::uword cap = std::min<arma::uword>({config.rf_chains, arma::accu(gains > 0.0), gains.n_elem});
            double best = -arma::datum::inf;
            arma::uword best_n = 1;
            for (arma::uword n = 1; n <= cap; ++n)
            {
                arma::vec g = gains.elem(order.head(n));
                arma::vec p = water_filling(g, budget);
                double rate = arma::accu(arma::log2(1.0 + g % p));
                double obj = network_objective(rate, double(n) * config.power.chain_cost(mt), config.beta);
                if (obj > best)
                {
                    best = obj;
                    best_n = n;
                }
            }
            s.selection = StreamSelection(mr, k_users, false);
            arma::uvec on = order.head(std::max<arma::uword>(best_n, 1));
            for (arma::uword c : on)
                s.selection.set(c % mr, c / mr, true);
            power.elem(on) = water_filling(gains.elem(on), budget);
        }

        s.fully_digital = dirs;
        for (arma::uword c = 0; c < dirs.n_cols; ++c)
            s.fully_digital.col(c) *= std::sqrt(power(c));
        s.fully_digital = apply_selection(s.fully_digital, s.selection);
        s.combiners.assign(k_users, arma::cx_mat(mr, mr, arma::fill::zeros));
        s.weights.assign(k_users, arma::eye<arma::cx_mat>(mr, mr));
        return s;
    }

    WmmseTsResult wmmse_ts_solve(const ChannelList &channels, const SolverConfig &config)
    {
        if (channels.empty())
            throw std::invalid_argument("wmmse_ts_solve: no channels given");
        const arma::uword k_users = channels.size(), mr = channels.front().n_rows, mt = channels.front().n_cols;
        config.validate(k_users, mr, mt);

        const SelectionRule rule = selection_rule(config, mt);
        BisectionOptions opts;
        opts.lower = config.xi_lower;
        opts.upper = config.xi_upper;
        opts.tolerance = config.eps1;

        WmmseTsResult out;
        WmmseState state = initial_state(channels, config);
        WmmseState best_state = state;
        double best = -arma::datum::inf;

        for (arma::uword it = 0; it < config.max_iters; ++it)
        {
            for (arma::uword k = 0; k < k_users; ++k)
                state.combiners[k] = update_combiner(channels, state.fully_digital, state.selection,
                                                     config.noise_power, k);
            std::vector<arma::cx_mat> e = mse_matrices(state, channels, config.noise_power);
            for (arma::uword k = 0; k < k_users; ++k)
                state.weights[k] = update_weight(e[k], config.mu);

            GramEvd gram = interference_gram_evd(channels, state.combiners, state.weights);
            StreamMetrics metrics = stream_metrics(combiner_targets(channels, state.combiners, state.weights), gram, mr);

            BisectionResult step;
            if (config.frozen_selection)
                step = bisection_solve(metrics, gram, rule, opts, &*config.frozen_selection);
            else
            {
                // The previous selection re-solved is never worse than the previous point,
                // so taking the better candidate keeps the block step a descent step
                step = bisection_solve(metrics, gram, rule, opts);
                BisectionResult keep = bisection_solve(metrics, gram, rule, opts, &state.selection);
                auto true_obj = [&](const BisectionResult &b) {
                    return network_objective(achievable_rate(channels, b.fully_digital, b.selection, config.noise_power),
                                             hardware_power(b.selection, config.power, mt), config.beta);
                };
                if (true_obj(keep) > true_obj(step))
                    step = std::move(keep);
            }
            state.fully_digital = step.fully_digital;
            state.selection = step.selection;
            state.multiplier = step.multiplier;

            arma::vec rates = achievable_rate(channels, state.fully_digital, state.selection, config.noise_power);
            double obj = network_objective(rates, hardware_power(state.selection, config.power, mt), config.beta);
            out.objective_trace.push_back(obj);
            out.iterations = it + 1;
            if (obj > best)
            {
                best = obj;
                best_state = state;
            }

            if (out.objective_trace.size() >= 2)
            {
                double prev = out.objective_trace[out.objective_trace.size() - 2];
                // Scale by both weighted terms: the objective itself can sit near zero when they balance
                double scale = config.beta * arma::accu(rates) +
                               (1.0 - config.beta) * hardware_power(state.selection, config.power, mt);
                double denom = std::max(scale, std::numeric_limits<double>::min());
                if (std::abs(obj - prev) / denom < config.eps2)
                {
                    out.converged = true;
                    break;
                }
            }
        }

        if (!out.converged)
        {
            out.warning = true;
            state = best_state;
        }
        out.state = state;
        out.fully_digital = state.fully_digital;
        out.selection = state.selection;
        out.rates = achievable_rate(channels, state.fully_digital, state.selection, config.noise_power);
        out.objective = network_objective(out.rates, hardware_power(state.selection, config.power, mt), config.beta);
        return out;
    }
}
