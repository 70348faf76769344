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

#include <string>

namespace samp {

/// Points with optional per-point normals (`normals` is empty or the same length).
struct PointCloud {
    Points points;
    Points normals;

    bool has_normals() const { return !normals.empty(); }
};

/// Reads ASCII "x y z [nx ny nz]" lines ('#' comments allowed) or ASCII PLY
/// (chosen by the ".ply" extension).
PointCloud read_point_cloud(const std::string& path);

/// Writes "x y z [nx ny nz]" lines with round-trip precision.
void write_xyz(const std::string& path, const PointCloud& cloud);

/// Writes an ASCII PLY with vertex positions (and normals when present).
void write_ply(const std::string& path, const PointCloud& cloud);

} // namespace samp
