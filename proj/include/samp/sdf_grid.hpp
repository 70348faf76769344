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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace samp {

/// Regular voxel lattice in the canonical object frame.
///
/// Frame convention: x lateral, y vertical (positive down), z longitudinal with the
/// vehicle's front towards -z. The frame origin is the ground-contact point below the
/// vehicle center, so the vehicle occupies y < 0.
struct GridSpec {
    std::array<int, 3> dims{60, 40, 100};
    double voxel_size = 0.06;
    Vec3 origin = Vec3::Zero(); ///< center of voxel (0,0,0)
    double truncation = 0.3;

    /// Grid centered laterally and longitudinally, with the ground plane y = 0 one
    /// truncation distance above the lowest voxel row.
    static GridSpec vehicle(int nx, int ny, int nz, double voxel_size, double truncation);
    static GridSpec vehicle_default() { return vehicle(60, 40, 100, 0.06, 0.3); }

    std::size_t size() const
    {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
    /// Flat index, x fastest, then y, then z.
    std::size_t index(int i, int j, int k) const
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
    }
    Vec3 center(int i, int j, int k) const { return origin + voxel_size * Vec3(i, j, k); }
    /// Corner of the interpolable interior (outermost voxel centers).
    Vec3 interior_min() const { return origin; }
    Vec3 interior_max() const
    {
        return origin + voxel_size * Vec3(dims[0] - 1, dims[1] - 1, dims[2] - 1);
    }
    Eigen::AlignedBox3d interior() const { return {interior_min(), interior_max()}; }

    /// Throws InputError when an invariant is violated.
    void validate() const;

    bool operator==(const GridSpec& other) const;
};

/// What to do with queries outside the interpolable interior.
enum class OutOfGrid {
    kExtend, ///< clamp to the interior and add the Euclidean overshoot
    kThrow,
};

/// Sparse trilinear stencil of a query point: the 8 enclosing voxels, their weights,
/// and the spatial derivatives of the weights (per meter).
struct Stencil {
    std::array<std::size_t, 8> index{};
    std::array<double, 8> weight{};
    std::array<Vec3, 8> dweight{};
    Vec3 overshoot = Vec3::Zero(); ///< x - clamp(x); zero inside the interior
    bool clamped = false;

    double overshoot_norm() const { return overshoot.norm(); }
    /// Gradient contribution of the overshoot term (unit vector, or zero).
    Vec3 overshoot_gradient() const;
};

Stencil make_stencil(const GridSpec& spec, const Vec3& x, OutOfGrid policy = OutOfGrid::kExtend);

/// Trilinear blend of a raw value array laid out per `spec`.
double interpolate(const GridSpec& spec, std::span<const double> values, const Vec3& x,
                   OutOfGrid policy = OutOfGrid::kExtend, bool* clamped = nullptr);
Vec3 interpolate_gradient(const GridSpec& spec, std::span<const double> values, const Vec3& x,
                          OutOfGrid policy = OutOfGrid::kExtend);

/// Truncated signed distance function on a regular lattice. Immutable once built;
/// every stored value lies in [-truncation, truncation].
class SdfGrid {
public:
    SdfGrid(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    double at(int i, int j, int k) const { return values_[spec_.index(i, j, k)]; }

private:
    GridSpec spec_;
    std::vector<double> values_;
};

double trilinear(const SdfGrid& grid, const Vec3& x, OutOfGrid policy = OutOfGrid::kExtend,
                 bool* clamped = nullptr);
Vec3 trilinear_gradient(const SdfGrid& grid, const Vec3& x, OutOfGrid policy = OutOfGrid::kExtend);

/// Returns true when the query point lies inside the surface.
using SignOracle = std::function<bool(const Vec3&)>;

/// Builds a truncated SDF from oriented surface samples. The sign of each voxel within
/// the truncation band comes from the normal of its nearest sample; voxels farther away
/// are labeled by flood-filling the exterior from the grid border.
SdfGrid build_sdf_from_points(const Points& points, const Points& normals, const GridSpec& spec);

/// Same, with signs taken from an inside/outside oracle.
SdfGrid build_sdf_from_points(const Points& points, const GridSpec& spec, const SignOracle& inside);

/// Unoriented samples: the exterior is flood-filled from the border through voxels
/// farther than one voxel from any sample. Voxels on that shell take their sign from an
/// outward direction at their nearest sample, estimated from the labeled voxels around it.
SdfGrid build_sdf_from_points(const Points& points, const GridSpec& spec);

void write_sdf(const std::string& path, const SdfGrid& grid);
SdfGrid read_sdf(const std::string& path);

// --- fields and rendering -----------------------------------------------------------

/// A scalar field in the object frame with a bounded domain, approximately a signed distance.
class SignedField {
public:
    virtual ~SignedField() = default;
    virtual double value(const Vec3& x) const = 0;
    virtual Eigen::AlignedBox3d domain() const = 0;
};

/// Non-owning field over a value array laid out per a GridSpec (no truncation invariant).
class GridFieldView final : public SignedField {
public:
    GridFieldView(const GridSpec& spec, std::span<const double> values) : spec_(spec), values_(values) {}
    explicit GridFieldView(const SdfGrid& grid) : GridFieldView(grid.spec(), grid.values()) {}

    double value(const Vec3& x) const override { return interpolate(spec_, values_, x); }
    Eigen::AlignedBox3d domain() const override { return spec_.interior(); }

private:
    GridSpec spec_;
    std::span<const double> values_;
};

/// Pinhole intrinsics; pixel centers sit at integer coordinates.
struct Intrinsics {
    double f = 721.0;
    double cx = 621.0;
    double cy = 187.5;
    int width = 1242;
    int height = 375;
};

struct TraceSettings {
    double step_factor = 0.9;
    int max_steps = 128;
    double surface_eps = 1e-3;
};

/// Per-pixel depth (camera z, meters) with a validity mask.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> depth;
    std::vector<std::uint8_t> valid;
    bool camera_inside = false;

    bool is_valid(int u, int v) const { return valid[static_cast<std::size_t>(v) * width + u] != 0; }
    double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
    std::size_t valid_count() const;
};

/// Distance along a unit ray to the first zero crossing of the field, refined by
/// bracketing after sphere tracing. Empty when the ray misses or starts inside.
std::optional<double> sphere_trace(const SignedField& field, const Vec3& origin, const Vec3& direction,
                                   const TraceSettings& settings = {});

/// Renders the field posed by `object_to_camera`. Only pixels on a `stride` lattice are
/// traced; the rest stay invalid.
DepthMap render_depth(const SignedField& field, const Intrinsics& camera, const Eigen::Isometry3d& object_to_camera,
                      const TraceSettings& settings = {}, int stride = 1);

Vec3 backproject(const Intrinsics& camera, double u, double v, double depth);

/// Camera-frame points for valid pixels, optionally restricted to a pixel mask of the same size.
Points depth_to_points(const DepthMap& map, const Intrinsics& camera, const std::vector<std::uint8_t>* mask = nullptr);

/// Samples the zero level set by tracing `ray_count` rays from a sphere bounding the
/// domain towards random interior targets. Deterministic for a fixed seed.
Points extract_surface_points(const SignedField& field, int ray_count, std::uint64_t seed = 0,
                              const TraceSettings& settings = {});

} // namespace samp
