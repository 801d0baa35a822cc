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

#ifndef NFHBF_TYPES_HPP
#define NFHBF_TYPES_HPP

#include <armadillo>
#include <cmath>
#include <complex>
#include <vector>

namespace nfhbf
{
    using cx = std::complex<double>;

    inline constexpr double speed_of_light = 299792458.0;
    inline constexpr double pi = 3.141592653589793238462643383279502884;

    // One channel matrix per user, M_r x M_t
    using ChannelList = std::vector<arma::cx_mat>;

    inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }
}

#endif
