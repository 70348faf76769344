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
#include "samp/car_shapes.hpp"
#include "samp/point_cloud.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace samp {
namespace {

PointCloud sample_cloud(bool normals)
{
    std::mt19937_64 rng(1);
    PointCloud c;
    for (int i = 0; i < 40; ++i) {
        c.points.push_back(testing::random_vec(rng, -5.0, 5.0));
        if (normals) {
            c.normals.push_back(testing::random_vec(rng, -1.0, 1.0).normalized());
        }
    }
    return c;
}

TEST(PointCloudIo, XyzRoundTripIsBitExact)
{
    const auto dir = testing::scratch_dir("pc_xyz");
    for (bool normals : {false, true}) {
        const PointCloud c = sample_cloud(normals);
        write_xyz((dir / "c.xyz").string(), c);
        const PointCloud back = read_point_cloud((dir / "c.xyz").string());
        EXPECT_EQ(back.points, c.points);
        EXPECT_EQ(back.normals, c.normals);
    }
}

// PLY stores float properties, so values survive at single precision.
TEST(PointCloudIo, PlyRoundTrip)
{
    const auto dir = testing::scratch_dir("pc_ply");
    const PointCloud c = sample_cloud(true);
    write_ply((dir / "c.ply").string(), c);
    const PointCloud back = read_point_cloud((dir / "c.ply").string());
    ASSERT_EQ(back.points.size(), c.points.size());
    ASSERT_TRUE(back.has_normals());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        EXPECT_LT((back.points[i] - c.points[i]).norm(), 1e-6);
        EXPECT_LT((back.normals[i] - c.normals[i]).norm(), 1e-6);
    }
}

TEST(PointCloudIo, CommentsAndErrors)
{
    const auto dir = testing::scratch_dir("pc_err");
    std::ofstream(dir / "ok.xyz") << "# header\n1 2 3\n\n4 5 6\n";
    EXPECT_EQ(read_point_cloud((dir / "ok.xyz").string()).points.size(), 2u);
    std::ofstream(dir / "bad.xyz") << "1 2 3\n4 five 6\n";
    try {
        read_point_cloud((dir / "bad.xyz").string());
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.xyz"), std::string::npos) << e.what();
    }
    std::ofstream(dir / "mixed.xyz") << "1 2 3 0 0 1\n4 5 6\n";
    EXPECT_THROW(read_point_cloud((dir / "mixed.xyz").string()), InputError);
    EXPECT_THROW(read_point_cloud((dir / "missing.xyz").string()), InputError);
}

TEST(CarShapes, InsideTest)
{
    const CarParams car;
    EXPECT_TRUE(car.contains(Vec3(0.0, -0.6, 0.0)));                     // body
    EXPECT_TRUE(car.contains(Vec3(0.0, -(car.height - 0.05), 0.0)));     // under the roof
    EXPECT_FALSE(car.contains(Vec3(0.0, -(car.height + 0.05), 0.0)));    // above the roof
    EXPECT_FALSE(car.contains(Vec3(0.0, -0.1, 0.0)));                    // below the underbody
    EXPECT_FALSE(car.contains(Vec3(car.width, -0.6, 0.0)));              // beside
    EXPECT_FALSE(car.contains(Vec3(0.0, -0.6, car.length)));             // beyond the bumper
}

TEST(CarShapes, SurfaceSamplesAreOrientedOutward)
{
    const CarParams car = random_car(5);
    const PointCloud s = sample_car_surface(car, 0.05);
    ASSERT_GT(s.points.size(), 1000u);
    ASSERT_TRUE(s.has_normals());
    std::size_t consistent = 0;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        EXPECT_NEAR(s.normals[i].norm(), 1.0, 1e-12);
        const Vec3& p = s.points[i];
        const Vec3& n = s.normals[i];
        consistent += !car.contains(p + 0.01 * n) && car.contains(p - 0.01 * n);
    }
    // Samples on edges and corners may fail one side of the check.
    EXPECT_GT(consistent, s.points.size() * 9 / 10);
}

TEST(CarShapes, RandomCarsAreDeterministicAndPlausible)
{
    const CarParams a = random_car(7);
    const CarParams b = random_car(7);
    const CarParams c = random_car(8);
    EXPECT_EQ(a.length, b.length);
    EXPECT_EQ(a.height, b.height);
    EXPECT_NE(a.length, c.length);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const CarParams r = random_car(seed);
        EXPECT_GT(r.length, 3.0);
        EXPECT_LT(r.length, 5.5);
        EXPECT_GT(r.height, r.clearance + r.body_height);
        EXPECT_LT(r.hood_length + r.windshield_length + r.rear_window_length + r.trunk_length, r.length);
    }
}

} // namespace
} // namespace samp
