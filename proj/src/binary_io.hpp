/*
 * Copyright 2026 The samp Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "samp/common.hpp"
#include "samp/sdf_grid.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

namespace samp::detail {

// Little-endian primitives, independent of host byte order.

inline void put_u32(std::ostream& os, std::uint32_t v)
{
    const char bytes[4] = {static_cast<char>(v & 0xffu), static_cast<char>((v >> 8) & 0xffu),
                           static_cast<char>((v >> 16) & 0xffu), static_cast<char>((v >> 24) & 0xffu)};
    os.write(bytes, 4);
}

inline void put_f32(std::ostream& os, double v) { put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

inline std::uint32_t get_u32(std::istream& is, const std::string& what)
{
    unsigned char bytes[4];
    if (!is.read(reinterpret_cast<char*>(bytes), 4)) {
        throw InputError("truncated file while reading " + what);
    }
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

inline double get_f32(std::istream& is, const std::string& what)
{
    return static_cast<double>(std::bit_cast<float>(get_u32(is, what)));
}

inline void put_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& path)
{
    char got[4];
    if (!is.read(got, 4) || std::string(got, 4) != std::string(magic, 4)) {
        throw InputError(path + ": bad magic, expected \"" + std::string(magic, 4) + "\"");
    }
}

inline void put_grid_spec(std::ostream& os, const GridSpec& spec)
{
    for (int d : spec.dims) {
        put_u32(os, static_cast<std::uint32_t>(d));
    }
    put_f32(os, spec.voxel_size);
    for (int a = 0; a < 3; ++a) {
        put_f32(os, spec.origin[a]);
    }
    put_f32(os, spec.truncation);
}

inline GridSpec get_grid_spec(std::istream& is)
{
    GridSpec spec;
    for (int& d : spec.dims) {
        d = static_cast<int>(get_u32(is, "grid dims"));
    }
    spec.voxel_size = get_f32(is, "voxel size");
    for (int a = 0; a < 3; ++a) {
        spec.origin[a] = get_f32(is, "grid origin");
    }
    spec.truncation = get_f32(is, "truncation");
    spec.validate();
    return spec;
}

inline std::ofstream open_out(const std::string& path, bool binary = true)
{
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) {
        throw InputError("cannot open " + path + " for writing");
    }
    return os;
}

inline std::ifstream open_in(const std::string& path, bool binary = true)
{
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is) {
        throw InputError("cannot open " + path);
    }
    return is;
}

} // namespace samp::detail
