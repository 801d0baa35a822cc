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

#ifndef NFHBF_FORMAT_HPP
#define NFHBF_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <string>

namespace nfhbf
{
    // Shortest decimal that round-trips to the same double
    inline std::string format_double(double value)
    {
        if (std::isnan(value))
            return "nan";
        if (std::isinf(value))
            return value > 0 ? "inf" : "-inf";
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
        (void)ec;
        return std::string(buf, end);
    }
}

#endif
