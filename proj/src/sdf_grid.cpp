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
#include "samp/sdf_grid.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace samp {

GridSpec GridSpec::vehicle(int nx, int ny, int nz, double voxel_size, double truncation)
{
    GridSpec spec;
    spec.dims = {nx, ny, nz};
    spec.voxel_size = voxel_size;
    spec.truncation = truncation;
    spec.origin = Vec3(-0.5 * (nx - 1) * voxel_size, truncation - (ny - 1) * voxel_size, -0.5 * (nz - 1) * voxel_size);
    spec.validate();
    return spec;
}

void GridSpec::validate() const
{
    for (int d : dims) {
        if (d < 2) {
            throw InputError("grid dims must be >= 2 along every axis");
        }
    }
    if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
        throw InputError("voxel size must be positive");
    }
    if (!(truncation >= voxel_size) || !std::isfinite(truncation)) {
        throw InputError("truncation must be >= voxel size");
    }
    if (!origin.allFinite()) {
        throw InputError("grid origin must be finite");
    }
}

bool GridSpec::operator==(const GridSpec& other) const
{
    return dims == other.dims && voxel_size == other.voxel_size && origin == other.origin &&
           truncation == other.truncation;
}

Vec3 Stencil::overshoot_gradient() const
{
    const double n = overshoot.norm();
    return n > 0.0 ? Vec3(overshoot / n) : Vec3::Zero();
}

Stencil make_stencil(const GridSpec& spec, const Vec3& x, OutOfGrid policy)
{
    Stencil s;
    const Vec3 lo = spec.interior_min();
    const Vec3 hi = spec.interior_max();
    const Vec3 c = x.cwiseMax(lo).cwiseMin(hi);
    s.overshoot = x - c;
    s.clamped = (s.overshoot.array() != 0.0).any();
    if (s.clamped && policy == OutOfGrid::kThrow) {
        throw InputError("query point outside the grid interior");
    }

    std::array<int, 3> base{};
    std::array<double, 3> frac{};
    std::array<bool, 3> frozen{};
    for (int a = 0; a < 3; ++a) {
        const double u = (c[a] - spec.origin[a]) / spec.voxel_size;
        const int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, spec.dims[a] - 2);
        base[a] = i0;
        frac[a] = std::clamp(u - i0, 0.0, 1.0);
        frozen[a] = s.overshoot[a] != 0.0;
    }

    const double inv = 1.0 / spec.voxel_size;
    for (int corner = 0; corner < 8; ++corner) {
        const int di = corner & 1;
        const int dj = (corner >> 1) & 1;
        const int dk = (corner >> 2) & 1;
        const double wx = di ? frac[0] : 1.0 - frac[0];
        const double wy = dj ? frac[1] : 1.0 - frac[1];
        const double wz = dk ? frac[2] : 1.0 - frac[2];
        const double sx = di ? 1.0 : -1.0;
        const double sy = dj ? 1.0 : -1.0;
        const double sz = dk ? 1.0 : -1.0;
        s.index[corner] = spec.index(base[0] + di, base[1] + dj, base[2] + dk);
        s.weight[corner] = wx * wy * wz;
        s.dweight[corner] = Vec3(frozen[0] ? 0.0 : sx * wy * wz * inv, frozen[1] ? 0.0 : wx * sy * wz * inv,
                                 frozen[2] ? 0.0 : wx * wy * sz * inv);
    }
    return s;
}

double interpolate(const GridSpec& spec, std::span<const double> values, const Vec3& x, OutOfGrid policy,
                   bool* clamped)
{
    const Stencil s = make_stencil(spec, x, policy);
    double v = 0.0;
    for (int c = 0; c < 8; ++c) {
        v += s.weight[c] * values[s.index[c]];
    }
    if (clamped != nullptr) {
        *clamped = s.clamped;
    }
    return v + s.overshoot_norm();
}

Vec3 interpolate_gradient(const GridSpec& spec, std::span<const double> values, const Vec3& x, OutOfGrid policy)
{
    const Stencil s = make_stencil(spec, x, policy);
    Vec3 g = s.overshoot_gradient();
    for (int c = 0; c < 8; ++c) {
        g += s.dweight[c] * values[s.index[c]];
    }
    return g;
}

SdfGrid::SdfGrid(GridSpec spec, std::vector<double> values) : spec_(spec), values_(std::move(values))
{
    spec_.validate();
    if (values_.size() != spec_.size()) {
        throw InputError("SDF value count " + std::to_string(values_.size()) + " does not match grid size " +
                         std::to_string(spec_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v) || std::abs(v) > spec_.truncation) {
            throw InputError("SDF value outside [-truncation, truncation]");
        }
    }
}

double trilinear(const SdfGrid& grid, const Vec3& x, OutOfGrid policy, bool* clamped)
{
    return interpolate(grid.spec(), grid.values(), x, policy, clamped);
}

Vec3 trilinear_gradient(const SdfGrid& grid, const Vec3& x, OutOfGrid policy)
{
    return interpolate_gradient(grid.spec(), grid.values(), x, policy);
}

// --- construction ---------------------------------------------------------------------

namespace {

struct Splat {
    std::vector<double> dist2;
    std::vector<int> nearest;
};

void check_points(const Points& points, const GridSpec& spec)
{
    spec.validate();
    if (points.empty()) {
        throw InputError("cannot build an SDF from an empty point set");
    }
    const Vec3 lo = spec.interior_min().array() - spec.truncation;
    const Vec3 hi = spec.interior_max().array() + spec.truncation;
    for (const Vec3& p : points) {
        if (!p.allFinite() || (p.array() < lo.array()).any() || (p.array() > hi.array()).any()) {
            throw InputError("surface point outside the grid bounds plus truncation margin");
        }
    }
}

Splat splat(const Points& points, const GridSpec& spec)
{
    Splat s;
    s.dist2.assign(spec.size(), std::numeric_limits<double>::infinity());
    s.nearest.assign(spec.size(), -1);
    const double r = spec.truncation;
    const double r2 = r * r;
    for (std::size_t n = 0; n < points.size(); ++n) {
        const Vec3& p = points[n];
        std::array<int, 3> lo{};
        std::array<int, 3> hi{};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::max(0, static_cast<int>(std::ceil((p[a] - r - spec.origin[a]) / spec.voxel_size)));
            hi[a] = std::min(spec.dims[a] - 1, static_cast<int>(std::floor((p[a] + r - spec.origin[a]) / spec.voxel_size)));
        }
        for (int k = lo[2]; k <= hi[2]; ++k) {
            const double dz = spec.origin.z() + k * spec.voxel_size - p.z();
            for (int j = lo[1]; j <= hi[1]; ++j) {
                const double dy = spec.origin.y() + j * spec.voxel_size - p.y();
                const double dyz = dy * dy + dz * dz;
                if (dyz > r2) {
                    continue;
                }
                std::size_t idx = spec.index(lo[0], j, k);
                for (int i = lo[0]; i <= hi[0]; ++i, ++idx) {
                    const double dx = spec.origin.x() + i * spec.voxel_size - p.x();
                    const double d2 = dx * dx + dyz;
                    if (d2 <= r2 && d2 < s.dist2[idx]) {
                        s.dist2[idx] = d2;
                        s.nearest[idx] = static_cast<int>(n);
                    }
                }
            }
        }
    }
    return s;
}

template <typename Fn>
void for_each_neighbor6(const GridSpec& spec, int i, int j, int k, Fn&& fn)
{
    static constexpr int kOffsets[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& o : kOffsets) {
        const int a = i + o[0];
        const int b = j + o[1];
        const int c = k + o[2];
        if (a >= 0 && b >= 0 && c >= 0 && a < spec.dims[0] && b < spec.dims[1] && c < spec.dims[2]) {
            fn(a, b, c);
        }
    }
}

/// Marks voxels reachable from the grid border through passable voxels.
std::vector<std::uint8_t> flood_exterior(const GridSpec& spec, const std::vector<std::uint8_t>& passable)
{
    std::vector<std::uint8_t> reached(spec.size(), 0);
    std::deque<std::array<int, 3>> queue;
    const auto [nx, ny, nz] = spec.dims;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const bool border = i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1;
                const std::size_t idx = spec.index(i, j, k);
                if (border && passable[idx]) {
                    reached[idx] = 1;
                    queue.push_back({i, j, k});
                }
            }
        }
    }
    while (!queue.empty()) {
        const auto [i, j, k] = queue.front();
        queue.pop_front();
        for_each_neighbor6(spec, i, j, k, [&](int a, int b, int c) {
            const std::size_t idx = spec.index(a, b, c);
            if (passable[idx] && !reached[idx]) {
                reached[idx] = 1;
                queue.push_back({a, b, c});
            }
        });
    }
    return reached;
}

} // namespace

SdfGrid build_sdf_from_points(const Points& points, const Points& normals, const GridSpec& spec)
{
    check_points(points, spec);
    if (normals.size() != points.size()) {
        throw InputError("normal count does not match point count");
    }
    if (std::all_of(normals.begin(), normals.end(), [](const Vec3& n) { return n.isZero(0.0); })) {
        throw InputError("cannot determine interior: all normals are zero");
    }
    const Splat s = splat(points, spec);
    std::vector<std::uint8_t> far(spec.size());
    for (std::size_t i = 0; i < far.size(); ++i) {
        far[i] = s.nearest[i] < 0;
    }
    const auto outside = flood_exterior(spec, far);

    std::vector<double> values(spec.size());
    const double trunc = spec.truncation;
    for (int k = 0; k < spec.dims[2]; ++k) {
        for (int j = 0; j < spec.dims[1]; ++j) {
            for (int i = 0; i < spec.dims[0]; ++i) {
                const std::size_t idx = spec.index(i, j, k);
                if (s.nearest[idx] < 0) {
                    values[idx] = outside[idx] ? trunc : -trunc;
                    continue;
                }
                const Vec3& p = points[s.nearest[idx]];
                const double dot = (spec.center(i, j, k) - p).dot(normals[s.nearest[idx]]);
                const double d = std::min(std::sqrt(s.dist2[idx]), trunc);
                values[idx] = dot < 0.0 ? -d : d;
            }
        }
    }
    return SdfGrid(spec, std::move(values));
}

SdfGrid build_sdf_from_points(const Points& points, const GridSpec& spec, const SignOracle& inside)
{
    check_points(points, spec);
    const Splat s = splat(points, spec);
    std::vector<double> values(spec.size());
    for (int k = 0; k < spec.dims[2]; ++k) {
        for (int j = 0; j < spec.dims[1]; ++j) {
            for (int i = 0; i < spec.dims[0]; ++i) {
                const std::size_t idx = spec.index(i, j, k);
                const double d = std::min(std::sqrt(s.dist2[idx]), spec.truncation);
                values[idx] = inside(spec.center(i, j, k)) ? -d : d;
            }
        }
    }
    return SdfGrid(spec, std::move(values));
}

SdfGrid build_sdf_from_points(const Points& points, const GridSpec& spec)
{
    check_points(points, spec);
    const Splat s = splat(points, spec);
    const double shell2 = spec.voxel_size * spec.voxel_size;
    std::vector<std::uint8_t> open(spec.size());
    for (std::size_t i = 0; i < open.size(); ++i) {
        open[i] = s.dist2[i] >= shell2;
    }
    const auto outside = flood_exterior(spec, open);

    // Outward direction at a sample: labeled open voxels nearby, exterior ones pulling
    // towards themselves and interior ones pushing away.
    constexpr int kReach = 3;
    std::vector<Vec3> outward(points.size(), Vec3::Zero());
    std::vector<std::uint8_t> outward_done(points.size(), 0);
    const auto outward_at = [&](int n) -> const Vec3& {
        if (!outward_done[n]) {
            const Vec3& p = points[n];
            Vec3 o = Vec3::Zero();
            const Vec3 u = (p - spec.origin) / spec.voxel_size;
            for (int c = -kReach; c <= kReach; ++c) {
                for (int b = -kReach; b <= kReach; ++b) {
                    for (int a = -kReach; a <= kReach; ++a) {
                        const int i = static_cast<int>(std::lround(u.x())) + a;
                        const int j = static_cast<int>(std::lround(u.y())) + b;
                        const int k = static_cast<int>(std::lround(u.z())) + c;
                        if (i < 0 || j < 0 || k < 0 || i >= spec.dims[0] || j >= spec.dims[1] || k >= spec.dims[2]) {
                            continue;
                        }
                        const std::size_t idx = spec.index(i, j, k);
                        if (open[idx]) {
                            const Vec3 d = spec.center(i, j, k) - p;
                            o += (outside[idx] ? 1.0 : -1.0) * d / d.squaredNorm();
                        }
                    }
                }
            }
            outward[n] = o;
            outward_done[n] = 1;
        }
        return outward[n];
    };

    std::vector<double> values(spec.size());
    const double trunc = spec.truncation;
    for (int k = 0; k < spec.dims[2]; ++k) {
        for (int j = 0; j < spec.dims[1]; ++j) {
            for (int i = 0; i < spec.dims[0]; ++i) {
                const std::size_t idx = spec.index(i, j, k);
                const double d = std::min(std::sqrt(s.dist2[idx]), trunc);
                double sign = 1.0;
                if (open[idx]) {
                    sign = outside[idx] ? 1.0 : -1.0;
                } else {
                    const int n = s.nearest[idx];
                    sign = (spec.center(i, j, k) - points[n]).dot(outward_at(n)) < 0.0 ? -1.0 : 1.0;
                }
                values[idx] = sign * d;
            }
        }
    }
    return SdfGrid(spec, std::move(values));
}

void write_sdf(const std::string& path, const SdfGrid& grid)
{
    auto os = detail::open_out(path);
    detail::put_magic(os, "SDFG");
    detail::put_u32(os, 1);
    detail::put_grid_spec(os, grid.spec());
    for (double v : grid.values()) {
        detail::put_f32(os, v);
    }
    if (!os) {
        throw InputError("failed writing " + path);
    }
}

SdfGrid read_sdf(const std::string& path)
{
    auto is = detail::open_in(path);
    detail::expect_magic(is, "SDFG", path);
    const std::uint32_t version = detail::get_u32(is, "version");
    if (version != 1) {
        throw InputError(path + ": unsupported SDF version " + std::to_string(version));
    }
    const GridSpec spec = detail::get_grid_spec(is);
    std::vector<double> values(spec.size());
    for (double& v : values) {
        v = detail::get_f32(is, "SDF values");
    }
    return SdfGrid(spec, std::move(values));
}

// --- rendering ------------------------------------------------------------------------

std::size_t DepthMap::valid_count() const
{
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

namespace {

bool clip_ray(const Eigen::AlignedBox3d& box, const Vec3& o, const Vec3& d, double& t0, double& t1)
{
    t0 = 0.0;
    t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            if (o[a] < box.min()[a] || o[a] > box.max()[a]) {
                return false;
            }
            continue;
        }
        double ta = (box.min()[a] - o[a]) / d[a];
        double tb = (box.max()[a] - o[a]) / d[a];
        if (ta > tb) {
            std::swap(ta, tb);
        }
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) {
            return false;
        }
    }
    return true;
}

/// Illinois regula falsi on a bracket with f(a) > 0 >= f(b).
double refine_crossing(const SignedField& field, const Vec3& o, const Vec3& d, double a, double fa, double b, double fb)
{
    int side = 0;
    for (int it = 0; it < 100; ++it) {
        if (fb == 0.0 || b - a < 1e-13) {
            break;
        }
        const double t = (a * fb - b * fa) / (fb - fa);
        const double ft = field.value(o + t * d);
        if (std::abs(ft) < 1e-13) {
            return t;
        }
        if (ft > 0.0) {
            a = t;
            fa = ft;
            if (side == 1) {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = t;
            fb = ft;
            if (side == -1) {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    return b;
}

} // namespace

std::optional<double> sphere_trace(const SignedField& field, const Vec3& origin, const Vec3& direction,
                                   const TraceSettings& settings)
{
    double t0 = 0.0;
    double t1 = 0.0;
    if (!clip_ray(field.domain(), origin, direction, t0, t1)) {
        return std::nullopt;
    }
    double t = t0;
    double v = field.value(origin + t * direction);
    if (v == 0.0) {
        return t;
    }
    if (v < 0.0) {
        return std::nullopt;
    }
    for (int step = 0; step < settings.max_steps; ++step) {
        const double tn = std::min(t + std::max(settings.step_factor * v, settings.surface_eps), t1);
        const double vn = field.value(origin + tn * direction);
        if (vn <= 0.0) {
            return refine_crossing(field, origin, direction, t, v, tn, vn);
        }
        if (tn >= t1) {
            return std::nullopt;
        }
        t = tn;
        v = vn;
    }
    return std::nullopt;
}

DepthMap render_depth(const SignedField& field, const Intrinsics& camera, const Eigen::Isometry3d& object_to_camera,
                      const TraceSettings& settings, int stride)
{
    if (stride < 1) {
        throw InputError("render stride must be >= 1");
    }
    DepthMap map;
    map.width = camera.width;
    map.height = camera.height;
    map.depth.assign(static_cast<std::size_t>(camera.width) * camera.height, 0.0);
    map.valid.assign(map.depth.size(), 0);

    const Eigen::Isometry3d camera_to_object = object_to_camera.inverse();
    const Vec3 origin = camera_to_object.translation();
    const Eigen::AlignedBox3d box = field.domain();
    if (box.contains(origin) && field.value(origin) < 0.0) {
        map.camera_inside = true;
        warn("camera inside the object; depth map left invalid");
        return map;
    }

    // Pixel window covering the projected domain, when it lies fully in front of the camera.
    int u0 = 0;
    int v0 = 0;
    int u1 = camera.width - 1;
    int v1 = camera.height - 1;
    bool in_front = true;
    double umin = std::numeric_limits<double>::infinity();
    double umax = -umin;
    double vmin = umin;
    double vmax = -umin;
    for (int c = 0; c < 8; ++c) {
        const Vec3 p = object_to_camera * box.corner(static_cast<Eigen::AlignedBox3d::CornerType>(c));
        if (p.z() <= 1e-6) {
            in_front = false;
            break;
        }
        const double u = camera.f * p.x() / p.z() + camera.cx;
        const double v = camera.f * p.y() / p.z() + camera.cy;
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (in_front) {
        u0 = std::max(0, static_cast<int>(std::floor(umin)) - 1);
        v0 = std::max(0, static_cast<int>(std::floor(vmin)) - 1);
        u1 = std::min(camera.width - 1, static_cast<int>(std::ceil(umax)) + 1);
        v1 = std::min(camera.height - 1, static_cast<int>(std::ceil(vmax)) + 1);
    }
    u0 = (u0 + stride - 1) / stride * stride;
    v0 = (v0 + stride - 1) / stride * stride;

    const Eigen::Matrix3d rot = camera_to_object.linear();
    for (int v = v0; v <= v1; v += stride) {
        for (int u = u0; u <= u1; u += stride) {
            const Vec3 ray((u - camera.cx) / camera.f, (v - camera.cy) / camera.f, 1.0);
            const double n = ray.norm();
            const Vec3 dir = rot * (ray / n);
            const auto t = sphere_trace(field, origin, dir, settings);
            if (t) {
                const std::size_t idx = static_cast<std::size_t>(v) * camera.width + u;
                map.depth[idx] = *t / n;
                map.valid[idx] = 1;
            }
        }
    }
    return map;
}

Vec3 backproject(const Intrinsics& camera, double u, double v, double depth)
{
    return Vec3((u - camera.cx) / camera.f * depth, (v - camera.cy) / camera.f * depth, depth);
}

Points depth_to_points(const DepthMap& map, const Intrinsics& camera, const std::vector<std::uint8_t>* mask)
{
    if (mask != nullptr && mask->size() != map.valid.size()) {
        throw InputError("pixel mask size does not match the depth map");
    }
    Points out;
    for (int v = 0; v < map.height; ++v) {
        for (int u = 0; u < map.width; ++u) {
            const std::size_t idx = static_cast<std::size_t>(v) * map.width + u;
            if (map.valid[idx] && (mask == nullptr || (*mask)[idx])) {
                out.push_back(backproject(camera, u, v, map.depth[idx]));
            }
        }
    }
    return out;
}

Points extract_surface_points(const SignedField& field, int ray_count, std::uint64_t seed, const TraceSettings& settings)
{
    const Eigen::AlignedBox3d box = field.domain();
    const Vec3 center = box.center();
    const double radius = 0.5 * box.diagonal().norm() * 1.01;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));

    Points out;
    for (int k = 0; k < ray_count; ++k) {
        const double y = 1.0 - 2.0 * (k + 0.5) / ray_count;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden * k;
        const Vec3 origin = center + radius * Vec3(r * std::cos(phi), y, r * std::sin(phi));
        const Vec3 target = box.min() + Vec3(unit(rng), unit(rng), unit(rng)).cwiseProduct(box.sizes());
        const Vec3 dir = (target - origin).normalized();
        if (const auto t = sphere_trace(field, origin, dir, settings)) {
            out.push_back(origin + *t * dir);
        }
    }
    if (out.empty()) {
        warn("extract_surface_points: field has no zero crossing along any ray");
    }
    return out;
}

} // namespace samp
