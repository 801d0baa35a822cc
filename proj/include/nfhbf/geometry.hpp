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

#ifndef NFHBF_GEOMETRY_HPP
#define NFHBF_GEOMETRY_HPP

#include "nfhbf/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nfhbf
{
    // Uniform planar array in the y-z plane, rows along y (vertical index), cols along z
    class UpaConfig
    {
    public:
        UpaConfig(arma::uword rows, arma::uword cols, double spacing);

        arma::uword rows() const { return rows_; }
        arma::uword cols() const { return cols_; }
        double spacing() const { return spacing_; }
        arma::uword size() const { return rows_ * cols_; }
        double aperture() const; // diagonal extent

    private:
        arma::uword rows_;
        arma::uword cols_;
        double spacing_;
    };

    // Spherical coordinates; elevation is measured from the z-axis
    class Placement
    {
    public:
        Placement(double range, double azimuth, double elevation);

        double range() const { return range_; }
        double azimuth() const { return azimuth_; }
        double elevation() const { return elevation_; }
        arma::vec3 position() const;
        arma::vec3 direction() const; // unit vector

    private:
        double range_;
        double azimuth_;
        double elevation_;
    };

    struct UserTerminal
    {
        UpaConfig array;
        Placement placement;
        cx gain; // LoS complex gain
    };

    struct Scatterer
    {
        Placement placement;
        cx gain; // unit-modulus random phase, path loss applied per user
    };

    enum class ChannelMode
    {
        near_field,
        far_field
    };

    struct Scenario
    {
        UpaConfig bs;
        std::vector<UserTerminal> users;
        std::vector<Scatterer> scatterers;
        double carrier_hz = 28e9;
        double noise_power = 0.0;

        double wavelength() const { return speed_of_light / carrier_hz; }

        // Throws std::invalid_argument on inconsistent content
        void validate() const;

        // One message per user outside the Rayleigh region
        std::vector<std::string> rayleigh_warnings() const;
    };

    // Free-space amplitude lambda / (4 pi distance)
    double free_space_gain(double distance, double wavelength);

    double rayleigh_distance(const UpaConfig &bs, const UpaConfig &user, double wavelength);

    // 3 x (rows*cols) element coordinates, row-major (vertical index outer)
    arma::mat antenna_positions(const UpaConfig &upa, const std::optional<Placement> &anchor = std::nullopt);

    double pairwise_distance(const arma::vec3 &tx, const arma::vec3 &rx);

    // Entry i is exp(-j 2 pi / lambda * |focal - tx_i|)
    arma::cx_vec array_response(const arma::mat &tx_positions, const arma::vec3 &focal, double wavelength);

    // M_r x M_t channel of one user
    arma::cx_mat assemble_channel(const Scenario &scenario, arma::uword user, ChannelMode mode);
    ChannelList assemble_channels(const Scenario &scenario, ChannelMode mode);

    // Distance-dependent DoF estimate, raw value without clamping
    double analytic_dof(const Scenario &scenario, arma::uword user);

    // Participation ratio of the squared singular values
    double edof(const arma::cx_mat &h);
}

#endif
