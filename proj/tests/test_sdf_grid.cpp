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

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace samp {
namespace {

using testing::SphereField;

GridSpec cube_spec(int n, double lo, double hi, double truncation)
{
    GridSpec spec;
    spec.dims = {n, n, n};
    spec.voxel_size = (hi - lo) / (n - 1);
    spec.origin = Vec3::Constant(lo);
    spec.truncation = truncation;
    return spec;
}

Points sphere_samples(double radius, int count)
{
    Points pts;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / count;
        const double r = std::sqrt(1.0 - y * y);
        pts.emplace_back(radius * r * std::cos(golden * i), radius * y, radius * r * std::sin(golden * i));
    }
    return pts;
}

SdfGrid random_grid(const GridSpec& spec, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-spec.truncation, spec.truncation);
    std::vector<double> v(spec.size());
    for (double& x : v) {
        x = u(rng);
    }
    return SdfGrid(spec, std::move(v));
}

TEST(GridSpec, RejectsInvalidSpecs)
{
    GridSpec spec = cube_spec(4, 0.0, 0.3, 0.2);
    EXPECT_NO_THROW(spec.validate());
    spec.dims[1] = 1;
    EXPECT_THROW(spec.validate(), InputError);
    spec = cube_spec(4, 0.0, 0.3, 0.05);
    EXPECT_THROW(spec.validate(), InputError);
}

TEST(GridSpec, VehicleGridPlacesGroundAboveLowestRow)
{
    const GridSpec spec = GridSpec::vehicle_default();
    EXPECT_EQ(spec.size(), 240000u);
    EXPECT_NEAR(spec.interior_max().y(), spec.truncation, 1e-12);
    EXPECT_NEAR(spec.interior_min().x() + spec.interior_max().x(), 0.0, 1e-12);
    EXPECT_NEAR(spec.interior_min().z() + spec.interior_max().z(), 0.0, 1e-12);
}

TEST(SdfGrid, RejectsValuesBeyondTruncation)
{
    const GridSpec spec = cube_spec(3, 0.0, 0.2, 0.1);
    EXPECT_THROW(SdfGrid(spec, std::vector<double>(spec.size(), 0.2)), InputError);
    EXPECT_THROW(SdfGrid(spec, std::vector<double>(5, 0.0)), InputError);
}

TEST(BuildSdf, SinglePointDistances)
{
    const GridSpec spec = cube_spec(21, -1.0, 1.0, 0.5);
    const SdfGrid grid = build_sdf_from_points({Vec3::Zero()}, spec, [](const Vec3&) { return false; });
    EXPECT_NEAR(grid.at(10, 10, 10), 0.0, 1e-12);
    EXPECT_NEAR(grid.at(13, 10, 10), 3 * spec.voxel_size, 1e-12);
    EXPECT_NEAR(grid.at(10, 10, 14), 4 * spec.voxel_size, 1e-12);
}

TEST(BuildSdf, SphereMatchesAnalyticField)
{
    const GridSpec spec = cube_spec(41, -2.0, 2.0, 1.2);
    const Points pts = sphere_samples(1.0, 6000);
    Points normals = pts;
    const SdfGrid grid = build_sdf_from_points(pts, normals, spec);
    EXPECT_NEAR(trilinear(grid, Vec3::Zero()), -1.0, spec.voxel_size);
    EXPECT_NEAR(trilinear(grid, Vec3(1.5, 0.0, 0.0)), 0.5, spec.voxel_size);
    for (int k = 0; k < 41; ++k) {
        for (int j = 0; j < 41; ++j) {
            for (int i = 0; i < 41; ++i) {
                const double exact = spec.center(i, j, k).norm() - 1.0;
                if (std::abs(exact) < spec.truncation) {
                    ASSERT_NEAR(grid.at(i, j, k), exact, spec.voxel_size) << i << ' ' << j << ' ' << k;
                }
            }
        }
    }
}

TEST(BuildSdf, ClampsAtTruncation)
{
    const GridSpec spec = cube_spec(41, -2.0, 2.0, 0.3);
    const SdfGrid grid = build_sdf_from_points(sphere_samples(1.0, 4000), spec, [](const Vec3& p) { return p.norm() < 1.0; });
    double max_abs = 0.0;
    for (double v : grid.values()) {
        max_abs = std::max(max_abs, std::abs(v));
    }
    EXPECT_DOUBLE_EQ(max_abs, 0.3);
    EXPECT_DOUBLE_EQ(grid.at(20, 20, 20), -0.3);
    EXPECT_DOUBLE_EQ(grid.at(0, 0, 0), 0.3);
}

TEST(BuildSdf, UnorientedFallbackAgreesWithOracleSigns)
{
    const GridSpec spec = cube_spec(41, -2.0, 2.0, 0.3);
    const Points pts = sphere_samples(1.0, 6000);
    const SdfGrid oracle = build_sdf_from_points(pts, spec, [](const Vec3& p) { return p.norm() < 1.0; });
    const SdfGrid fallback = build_sdf_from_points(pts, spec);
    std::size_t disagreements = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        // Signs of voxels practically on the surface carry no information.
        const int a = static_cast<int>(i % 41), b = static_cast<int>(i / 41 % 41), c = static_cast<int>(i / (41 * 41));
        if (std::abs(spec.center(a, b, c).norm() - 1.0) > 0.1 * spec.voxel_size) {
            disagreements += (oracle.values()[i] < 0.0) != (fallback.values()[i] < 0.0) ? 1 : 0;
        }
    }
    EXPECT_EQ(disagreements, 0u);
}

TEST(BuildSdf, Errors)
{
    const GridSpec spec = cube_spec(11, -1.0, 1.0, 0.4);
    EXPECT_THROW(build_sdf_from_points(Points{}, spec), InputError);
    const Points pts{Vec3::Zero(), Vec3(0.1, 0.0, 0.0)};
    const Points zero(2, Vec3::Zero());
    try {
        build_sdf_from_points(pts, zero, spec);
        FAIL() << "expected an error";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("cannot determine interior"), std::string::npos);
    }
    EXPECT_THROW(build_sdf_from_points({Vec3(5.0, 0.0, 0.0)}, spec), InputError);
}

TEST(Trilinear, ExactAtVoxelCentersAndEdgeMidpoints)
{
    const GridSpec spec = cube_spec(6, 0.0, 0.5, 0.3);
    const SdfGrid grid = random_grid(spec, 3);
    for (int k = 0; k < 6; ++k) {
        for (int j = 0; j < 6; ++j) {
            for (int i = 0; i < 6; ++i) {
                ASSERT_NEAR(trilinear(grid, spec.center(i, j, k)), grid.at(i, j, k), 1e-15);
            }
        }
    }
    std::vector<double> v(spec.size(), 0.0);
    v[spec.index(2, 3, 1)] = 0.1;
    v[spec.index(3, 3, 1)] = 0.3;
    const SdfGrid edge(spec, v);
    EXPECT_NEAR(trilinear(edge, 0.5 * (spec.center(2, 3, 1) + spec.center(3, 3, 1))), 0.2, 1e-15);
}

TEST(Trilinear, BoundedByCellCorners)
{
    const GridSpec spec = cube_spec(8, -0.35, 0.35, 0.3);
    const SdfGrid grid = random_grid(spec, 4);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> cell(0, 6);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int n = 0; n < 1000; ++n) {
        const int i = cell(rng), j = cell(rng), k = cell(rng);
        const Vec3 x = spec.center(i, j, k) + spec.voxel_size * Vec3(frac(rng), frac(rng), frac(rng));
        double lo = 1e9, hi = -1e9;
        for (int c = 0; c < 8; ++c) {
            const double corner = grid.at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
            lo = std::min(lo, corner);
            hi = std::max(hi, corner);
        }
        const double value = trilinear(grid, x);
        ASSERT_GE(value, lo - 1e-15);
        ASSERT_LE(value, hi + 1e-15);
    }
}

TEST(TrilinearGradient, LinearFieldGivesConstantGradient)
{
    const GridSpec spec = cube_spec(7, -0.3, 0.3, 0.5);
    const Vec3 n = Vec3(0.3, -0.5, 0.2);
    std::vector<double> v(spec.size());
    for (int k = 0; k < 7; ++k)
        for (int j = 0; j < 7; ++j)
            for (int i = 0; i < 7; ++i) v[spec.index(i, j, k)] = spec.center(i, j, k).dot(n) + 0.01;
    const SdfGrid grid(spec, v);
    std::mt19937_64 rng(6);
    for (int s = 0; s < 100; ++s) {
        const Vec3 x = testing::random_vec(rng, -0.29, 0.29);
        ASSERT_LT((trilinear_gradient(grid, x) - n).norm(), 1e-12);
    }
    const SdfGrid constant(spec, std::vector<double>(spec.size(), 0.2));
    EXPECT_LT(trilinear_gradient(constant, Vec3(0.01, 0.02, 0.03)).norm(), 1e-15);
}

TEST(TrilinearGradient, MatchesCentralDifferences)
{
    const GridSpec spec = cube_spec(8, -0.35, 0.35, 0.3);
    const SdfGrid grid = random_grid(spec, 8);
    std::mt19937_64 rng(9);
    const double h = 1e-4;
    int checked = 0;
    for (int s = 0; s < 500; ++s) {
        const Vec3 x = testing::random_vec(rng, -0.34, 0.34);
        const Vec3 f = (x - spec.origin) / spec.voxel_size;
        const Vec3 frac = f - f.array().floor().matrix();
        // Stay clear of cell faces, where the gradient is discontinuous.
        if ((frac.array() < 0.01).any() || (frac.array() > 0.99).any()) {
            continue;
        }
        Vec3 fd;
        for (int a = 0; a < 3; ++a) {
            Vec3 e = Vec3::Zero();
            e[a] = h;
            fd[a] = (trilinear(grid, x + e) - trilinear(grid, x - e)) / (2 * h);
        }
        const Vec3 g = trilinear_gradient(grid, x);
        ASSERT_LT((g - fd).norm(), 1e-4 * std::max(1.0, g.norm()));
        ++checked;
    }
    EXPECT_GT(checked, 400);
}

TEST(Trilinear, OutOfGridPolicies)
{
    const GridSpec spec = cube_spec(5, 0.0, 0.4, 0.2);
    const SdfGrid grid(spec, std::vector<double>(spec.size(), 0.1));
    bool clamped = false;
    EXPECT_NEAR(trilinear(grid, Vec3(0.7, 0.2, 0.2), OutOfGrid::kExtend, &clamped), 0.4, 1e-12);
    EXPECT_TRUE(clamped);
    EXPECT_THROW(trilinear(grid, Vec3(0.7, 0.2, 0.2), OutOfGrid::kThrow), InputError);
    EXPECT_LT((trilinear_gradient(grid, Vec3(0.7, 0.2, 0.2)) - Vec3(1, 0, 0)).norm(), 1e-12);
}

TEST(SdfFile, RoundTripsAndKeepsLayout)
{
    const auto dir = testing::scratch_dir("sdf_file");
    const GridSpec spec = cube_spec(4, -0.25, 0.125, 0.25);
    const SdfGrid grid = random_grid(spec, 1);
    write_sdf((dir / "g.sdf").string(), grid);
    const SdfGrid back = read_sdf((dir / "g.sdf").string());
    EXPECT_TRUE(back.spec() == grid.spec());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        EXPECT_EQ(back.values()[i], static_cast<double>(static_cast<float>(grid.values()[i])));
    }
    EXPECT_EQ(std::filesystem::file_size(dir / "g.sdf"), 4 + 4 + 12 + 4 + 12 + 4 + 4 * spec.size());
}

TEST(SphereTrace, AnalyticSphereOnAxis)
{
    const SphereField sphere(Vec3(0, 0, 5), 1.0, Eigen::AlignedBox3d(Vec3(-2, -2, 3), Vec3(2, 2, 7)));
    const auto t = sphere_trace(sphere, Vec3::Zero(), Vec3::UnitZ());
    ASSERT_TRUE(t.has_value());
    EXPECT_NEAR(*t, 4.0, 1e-3);
    EXPECT_FALSE(sphere_trace(sphere, Vec3::Zero(), -Vec3::UnitZ()).has_value());
}

TEST(RenderDepth, CenterPixelAndBackprojection)
{
    const SphereField sphere(Vec3::Zero(), 1.0, Eigen::AlignedBox3d(Vec3::Constant(-2), Vec3::Constant(2)));
    Intrinsics cam{200.0, 50.0, 40.0, 101, 81};
    Eigen::Isometry3d object_to_camera = Eigen::Isometry3d::Identity();
    object_to_camera.translation() = Vec3(0, 0, 5);
    const DepthMap map = render_depth(sphere, cam, object_to_camera);
    ASSERT_TRUE(map.is_valid(50, 40));
    EXPECT_NEAR(map.at(50, 40), 4.0, 1e-3);
    EXPECT_FALSE(map.is_valid(0, 0));
    const Points pts = depth_to_points(map, cam);
    EXPECT_EQ(pts.size(), map.valid_count());
    for (const Vec3& p : pts) {
        ASSERT_LT(std::abs((p - Vec3(0, 0, 5)).norm() - 1.0), 1e-3);
    }
}

TEST(RenderDepth, GridFieldBackprojectsOntoSurface)
{
    const GridSpec spec = cube_spec(41, -2.0, 2.0, 0.4);
    const SdfGrid grid = build_sdf_from_points(sphere_samples(1.0, 6000), spec, [](const Vec3& p) { return p.norm() < 1.0; });
    const GridFieldView field(grid);
    Intrinsics cam{300.0, 60.0, 50.0, 121, 101};
    Eigen::Isometry3d object_to_camera = Eigen::Isometry3d::Identity();
    object_to_camera.translation() = Vec3(0.2, -0.1, 6.0);
    const DepthMap map = render_depth(field, cam, object_to_camera, {}, 2);
    const Points pts = depth_to_points(map, cam);
    ASSERT_GT(pts.size(), 100u);
    for (const Vec3& p : pts) {
        ASSERT_LT(std::abs(trilinear(grid, object_to_camera.inverse() * p)), 2 * spec.voxel_size);
    }
    for (int v = 0; v < map.height; ++v)
        for (int u = 0; u < map.width; ++u)
            if (u % 2 != 0 || v % 2 != 0) ASSERT_FALSE(map.is_valid(u, v));
}

TEST(RenderDepth, CameraInsideIsFlagged)
{
    const SphereField sphere(Vec3::Zero(), 1.0, Eigen::AlignedBox3d(Vec3::Constant(-2), Vec3::Constant(2)));
    const DepthMap map = render_depth(sphere, Intrinsics{}, Eigen::Isometry3d::Identity());
    EXPECT_TRUE(map.camera_inside);
    EXPECT_EQ(map.valid_count(), 0u);
}

TEST(ExtractSurface, SphereAndEmptyField)
{
    const SphereField sphere(Vec3::Zero(), 1.0, Eigen::AlignedBox3d(Vec3::Constant(-2), Vec3::Constant(2)));
    const Points pts = extract_surface_points(sphere, 2000, 3);
    ASSERT_GT(pts.size(), 300u);
    for (const Vec3& p : pts) {
        ASSERT_NEAR(p.norm(), 1.0, 1e-2);
    }
    EXPECT_EQ(extract_surface_points(sphere, 2000, 3), pts);

    const GridSpec spec = cube_spec(5, -1.0, 1.0, 0.5);
    const SdfGrid positive(spec, std::vector<double>(spec.size(), 0.5));
    EXPECT_TRUE(extract_surface_points(GridFieldView(positive), 200, 1).empty());
}

} // namespace
} // namespace samp
