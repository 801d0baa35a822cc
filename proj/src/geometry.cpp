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

#include "nfhbf/geometry.hpp"

#include <sstream>
#include <stdexcept>

namespace nfhbf
{
    UpaConfig::UpaConfig(arma::uword rows, arma::uword cols, double spacing)
        : rows_(rows), cols_(cols), spacing_(spacing)
    {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("UpaConfig: rows and cols must be at least 1");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw std::invalid_argument("UpaConfig: spacing must be positive and finite");
    }

    double UpaConfig::aperture() const
    {
        double v = double(rows_ - 1), h = double(cols_ - 1);
        return spacing_ * std::sqrt(v * v + h * h);
    }

    Placement::Placement(double range, double azimuth, double elevation)
        : range_(range), azimuth_(azimuth), elevation_(elevation)
    {
        if (!(range > 0.0) || !std::isfinite(range))
            throw std::invalid_argument("Placement: range must be positive and finite");
        if (!(azimuth >= -0.5 * pi && azimuth <= 0.5 * pi))
            throw std::invalid_argument("Placement: azimuth must lie in [-pi/2, pi/2]");
        if (!(elevation > 0.0 && elevation < pi))
            throw std::invalid_argument("Placement: elevation must lie in (0, pi)");
    }

    arma::vec3 Placement::direction() const
    {
        double se = std::sin(elevation_);
        return arma::vec3{std::cos(azimuth_) * se, std::sin(azimuth_) * se, std::cos(elevation_)};
    }

    arma::vec3 Placement::position() const
    {
        return range_ * direction();
    }

    void Scenario::validate() const
    {
        if (!(noise_power > 0.0))
            throw std::invalid_argument("Scenario: noise power must be positive");
        if (!(carrier_hz > 0.0))
            throw std::invalid_argument("Scenario: carrier frequency must be positive");
        if (users.empty())
            throw std::invalid_argument("Scenario: at least one user is required");
        for (const auto &u : users)
            if (u.array.size() != users.front().array.size())
                throw std::invalid_argument("Scenario: all users must have the same antenna count");
    }

    std::vector<std::string> Scenario::rayleigh_warnings() const
    {
        std::vector<std::string> out;
        for (std::size_t k = 0; k < users.size(); ++k)
        {
            double rd = rayleigh_distance(bs, users[k].array, wavelength());
            if (users[k].placement.range() >= rd)
            {
                std::ostringstream msg;
                msg << "user " << k + 1 << " at " << users[k].placement.range()
                    << " m is beyond the Rayleigh distance " << rd << " m";
                out.push_back(msg.str());
            }
        }
        return out;
    }

    double free_space_gain(double distance, double wavelength)
    {
        return wavelength / (4.0 * pi * distance);
    }

    double rayleigh_distance(const UpaConfig &bs, const UpaConfig &user, double wavelength)
    {
        double a = bs.aperture() + user.aperture();
        return 2.0 * a * a / wavelength;
    }

    arma::mat antenna_positions(const UpaConfig &upa, const std::optional<Placement> &anchor)
    {
        arma::vec3 origin(arma::fill::zeros);
        if (anchor)
            origin = anchor->position();

        arma::mat pos(3, upa.size());
        arma::uword i = 0;
        for (arma::uword v = 0; v < upa.rows(); ++v)
            for (arma::uword h = 0; h < upa.cols(); ++h, ++i)
            {
                pos(0, i) = origin(0);
                pos(1, i) = origin(1) + double(v) * upa.spacing();
                pos(2, i) = origin(2) + double(h) * upa.spacing();
            }
        return pos;
    }

    double pairwise_distance(const arma::vec3 &tx, const arma::vec3 &rx)
    {
        return arma::norm(rx - tx);
    }

    arma::cx_vec array_response(const arma::mat &tx_positions, const arma::vec3 &focal, double wavelength)
    {
        if (!(wavelength > 0.0))
            throw std::invalid_argument("array_response: wavelength must be positive");
        if (tx_positions.n_rows != 3)
            throw std::invalid_argument("array_response: positions must be 3 x N");

        const double k0 = 2.0 * pi / wavelength;
        arma::cx_vec a(tx_positions.n_cols);
        for (arma::uword i = 0; i < tx_positions.n_cols; ++i)
        {
            double dx = focal(0) - tx_positions(0, i);
            double dy = focal(1) - tx_positions(1, i);
            double dz = focal(2) - tx_positions(2, i);
            double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
            a(i) = std::polar(1.0, -k0 * dist);
        }
        return a;
    }

    namespace
    {
        // Linear-phase response exp(sign * j k0 dir . (pos_i - ref))
        arma::cx_vec planar_response(const arma::mat &pos, const arma::vec3 &ref, const arma::vec3 &dir,
                                     double k0, double sign)
        {
            arma::cx_vec a(pos.n_cols);
            for (arma::uword i = 0; i < pos.n_cols; ++i)
            {
                double proj = dir(0) * (pos(0, i) - ref(0)) + dir(1) * (pos(1, i) - ref(1)) +
                              dir(2) * (pos(2, i) - ref(2));
                a(i) = std::polar(1.0, sign * k0 * proj);
            }
            return a;
        }

        arma::cx_mat near_channel(const Scenario &sc, const UserTerminal &u, const arma::mat &bs_pos,
                                  const arma::mat &ue_pos)
        {
            const double lambda = sc.wavelength();
            const double k0 = 2.0 * pi / lambda;
            const double r = u.placement.range();

            arma::cx_mat h(ue_pos.n_cols, bs_pos.n_cols);
            for (arma::uword m = 0; m < ue_pos.n_cols; ++m)
                h.row(m) = array_response(bs_pos, ue_pos.col(m), lambda).st();
            h *= u.gain * std::polar(1.0, -k0 * r);

            const arma::vec3 ue_ref = ue_pos.col(0);
            for (const auto &s : sc.scatterers)
            {
                arma::vec3 p = s.placement.position();
                double path = arma::norm(p) + arma::norm(p - ue_ref);
                cx g = s.gain * free_space_gain(path, lambda);
                arma::cx_vec a_ue = array_response(ue_pos, p, lambda);
                arma::cx_vec a_bs = array_response(bs_pos, p, lambda);
                h += g * a_ue * a_bs.st();
            }
            return h;
        }

        arma::cx_mat far_channel(const Scenario &sc, const UserTerminal &u, const arma::mat &bs_pos,
                                 const arma::mat &ue_pos)
        {
            const double lambda = sc.wavelength();
            const double k0 = 2.0 * pi / lambda;
            const double r = u.placement.range();
            const arma::vec3 origin(arma::fill::zeros);
            const arma::vec3 ue_ref = ue_pos.col(0);

            // First-order expansion of the spherical model about the reference elements
            arma::vec3 dir = u.placement.direction();
            arma::cx_vec a_bs = planar_response(bs_pos, origin, dir, k0, 1.0);
            arma::cx_vec a_ue = planar_response(ue_pos, ue_ref, dir, k0, -1.0);
            arma::cx_mat h = (u.gain * std::polar(1.0, -2.0 * k0 * r)) * a_ue * a_bs.st();

            for (const auto &s : sc.scatterers)
            {
                arma::vec3 p = s.placement.position();
                arma::vec3 to_ue = ue_ref - p;
                double d_ue = arma::norm(to_ue);
                double d_bs = s.placement.range();
                cx g = s.gain * free_space_gain(d_bs + d_ue, lambda) * std::polar(1.0, -k0 * (d_bs + d_ue));
                arma::cx_vec b_bs = planar_response(bs_pos, origin, s.placement.direction(), k0, 1.0);
                arma::cx_vec b_ue = planar_response(ue_pos, ue_ref, to_ue / d_ue, k0, -1.0);
                h += g * b_ue * b_bs.st();
            }
            return h;
        }
    }

    arma::cx_mat assemble_channel(const Scenario &scenario, arma::uword user, ChannelMode mode)
    {
        if (user >= scenario.users.size())
            throw std::out_of_range("assemble_channel: user index out of range");

        const UserTerminal &u = scenario.users[user];
        arma::mat bs_pos = antenna_positions(scenario.bs);
        arma::mat ue_pos = antenna_positions(u.array, u.placement);

        if (mode == ChannelMode::near_field)
            return near_channel(scenario, u, bs_pos, ue_pos);
        return far_channel(scenario, u, bs_pos, ue_pos);
    }

    ChannelList assemble_channels(const Scenario &scenario, ChannelMode mode)
    {
        ChannelList out;
        out.reserve(scenario.users.size());
        for (arma::uword k = 0; k < scenario.users.size(); ++k)
            out.push_back(assemble_channel(scenario, k, mode));
        return out;
    }

    double analytic_dof(const Scenario &scenario, arma::uword user)
    {
        if (user >= scenario.users.size())
            throw std::out_of_range("analytic_dof: user index out of range");

        const UpaConfig &bs = scenario.bs;
        const UserTerminal &u = scenario.users[user];
        const double d = bs.spacing();
        const double lambda = scenario.wavelength();
        const double r = u.placement.range();
        const double L = double(scenario.scatterers.size());

        double quartic = 2.0 * double(bs.rows() - 1) * double(bs.cols() - 1) * double(u.array.rows() - 1) *
                         double(u.array.cols() - 1) * d * d * d * d / ((lambda * r) * (lambda * r));
        double a = quartic + L;
        double b = double(u.array.size()) + L;
        double c = double(bs.size()) + L;
        return std::min(a, std::min(b, c));
    }

    double edof(const arma::cx_mat &h)
    {
        if (h.is_empty())
            throw std::invalid_argument("edof: empty matrix");
        arma::vec s = arma::svd(h);
        if (s.is_empty() || !(s.max() > 0.0))
            throw std::invalid_argument("edof: zero matrix");
        arma::vec s2 = arma::square(s / s.max());
        double num = arma::accu(s2);
        double den = arma::accu(arma::square(s2));
        if (!(den > 0.0))
            throw std::invalid_argument("edof: zero matrix");
        return num * num / den;
    }
}
