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
#include "samp/eval.hpp"

#include "samp/optimizer.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <random>

#include "json.hpp"

namespace samp {
namespace {

/// O(n^2) reference for the threshold tests.
ShapeScore brute_force(const Points& gt, const Points& rec, double tau)
{
    auto covered = [&](const Points& from, const Points& to) {
        std::size_t n = 0;
        for (const Vec3& p : from) {
            for (const Vec3& q : to) {
                if ((p - q).norm() <= tau) {
                    ++n;
                    break;
                }
            }
        }
        return 100.0 * static_cast<double>(n) / static_cast<double>(from.size());
    };
    ShapeScore s;
    s.completeness = covered(gt, rec);
    s.accuracy = covered(rec, gt);
    s.f1 = f1_score(s.accuracy, s.completeness);
    return s;
}

Points random_cloud(std::mt19937_64& rng, int n, double extent)
{
    Points p;
    for (int i = 0; i < n; ++i) {
        p.push_back(testing::random_vec(rng, -extent, extent));
    }
    return p;
}

TEST(F1, ReferenceArithmetic)
{
    EXPECT_NEAR(f1_score(65.17, 79.56), 71.65, 0.01);
    EXPECT_NEAR(f1_score(67.36, 70.93), 69.10, 0.01);
    EXPECT_NEAR(f1_score(79.59, 74.79), 77.11, 0.01);
    EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
    EXPECT_EQ(f1_score(0.0, 50.0), 0.0);
    EXPECT_EQ(f1_score(40.0, 40.0), 40.0);
}

TEST(ShapeScore, ReproducesReferenceScoresFromPointSets)
{
    const double rows[][3] = {{65.17, 79.56, 71.65}, {67.36, 70.93, 69.10}, {79.59, 74.79, 77.11}};
    for (const auto& row : rows) {
        const auto sets = testing::scored_point_sets(row[0], row[1]);
        const ShapeScore s = shape_score(sets.gt, sets.reconstructed, 0.2);
        EXPECT_NEAR(s.accuracy, row[0], 1e-9);
        EXPECT_NEAR(s.completeness, row[1], 1e-9);
        EXPECT_NEAR(s.f1, row[2], 0.01);
    }
}

TEST(ShapeScore, IdenticalSetsScoreFull)
{
    std::mt19937_64 rng(1);
    const Points p = random_cloud(rng, 300, 2.0);
    for (double tau : {1e-6, 0.05, 0.2, 3.0}) {
        const ShapeScore s = shape_score(p, p, tau);
        EXPECT_EQ(s.completeness, 100.0);
        EXPECT_EQ(s.accuracy, 100.0);
        EXPECT_EQ(s.f1, 100.0);
    }
}

TEST(ShapeScore, MatchesBruteForce)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = trial < 10 ? 5 : 200;
        const Points gt = random_cloud(rng, n, 1.0);
        const Points rec = random_cloud(rng, n + trial % 7, 1.0);
        for (double tau : {0.1, 0.2, 0.35}) {
            const ShapeScore a = shape_score(gt, rec, tau);
            const ShapeScore b = brute_force(gt, rec, tau);
            EXPECT_EQ(a.completeness, b.completeness);
            EXPECT_EQ(a.accuracy, b.accuracy);
            EXPECT_EQ(a.f1, b.f1);
        }
    }
    // Exactly at tau counts as covered; negative coordinates hash correctly.
    const Points a{Vec3(-0.2, 0.0, 0.0)};
    const Points b{Vec3(0.0, 0.0, 0.0)};
    EXPECT_EQ(shape_score(a, b, 0.25).completeness, 100.0);
    EXPECT_EQ(shape_score(a, b, 0.1).completeness, 0.0);
}

TEST(ShapeScore, SymmetryAndBounds)
{
    std::mt19937_64 rng(3);
    const Points gt = random_cloud(rng, 250, 1.0);
    const Points rec = random_cloud(rng, 180, 1.2);
    const ShapeScore a = shape_score(gt, rec, 0.2);
    const ShapeScore b = shape_score(rec, gt, 0.2);
    EXPECT_EQ(a.completeness, b.accuracy);
    EXPECT_EQ(a.accuracy, b.completeness);
    EXPECT_EQ(a.f1, b.f1);
    EXPECT_LE(a.f1, std::max(a.accuracy, a.completeness));
    EXPECT_EQ(a.gt_count, 250u);
    EXPECT_EQ(a.reconstructed_count, 180u);
}

TEST(ShapeScore, MonotoneInTau)
{
    std::mt19937_64 rng(4);
    const Points gt = random_cloud(rng, 300, 1.0);
    const Points rec = random_cloud(rng, 300, 1.0);
    ShapeScore prev = shape_score(gt, rec, 0.01);
    for (double tau = 0.02; tau < 1.0; tau += 0.03) {
        const ShapeScore s = shape_score(gt, rec, tau);
        EXPECT_GE(s.completeness, prev.completeness);
        EXPECT_GE(s.accuracy, prev.accuracy);
        prev = s;
    }
}

TEST(ShapeScore, EmptySetIsFlagged)
{
    const ShapeScore s = shape_score({}, {Vec3::Zero()}, 0.2);
    EXPECT_TRUE(s.empty);
    EXPECT_EQ(s.f1, 0.0);
    EXPECT_EQ(s.completeness, 0.0);
    EXPECT_THROW(shape_score({Vec3::Zero()}, {Vec3::Zero()}, 0.0), InputError);
}

TEST(Reconstruction, ExactFitScoresNearlyPerfect)
{
    const ShapeManifold& m = testing::coarse_car_manifold();
    ScenarioSpec spec = preset("straight-20-frames");
    spec.frames = 6;
    const Scene scene = generate(spec, m);
    const int k = scene.truth.eval_frame;
    const Frame& frame = scene.track.frames[k];
    const Intrinsics cam = scene.track.calib.intrinsics();
    const auto mask = render_mask(m, scene.truth.z, scene.truth.poses[k], frame, cam, 2);
    const Points gt = reconstructed_points(m, scene.truth.z, scene.truth.poses[k], frame, cam, &mask, 2);
    ASSERT_GT(gt.size(), 500u);

    const FitResult fit = solve(scene.track, m, {}, testing::perturbed_start(scene.truth, m.dim(), 0.3, 0.08));
    const Points rec = reconstructed_points(m, fit.z, fit.poses[k], frame, cam, &mask, 2);
    EXPECT_GE(shape_score(gt, rec, 0.2).f1, 99.0);

    // Every returned point lies on its pixel ray at the rendered depth.
    const Eigen::Isometry3d world_to_camera = frame.camera_to_world.inverse();
    for (const Vec3& p : gt) {
        const Vec3 c = world_to_camera * p;
        const double u = cam.f * c.x() / c.z() + cam.cx;
        const double v = cam.f * c.y() / c.z() + cam.cy;
        EXPECT_NEAR(u, std::round(u), 1e-6);
        EXPECT_NEAR(v, std::round(v), 1e-6);
    }
}

TEST(Reconstruction, EmptyMaskGivesFlaggedEmptySet)
{
    const ShapeManifold& m = testing::coarse_car_manifold();
    ScenarioSpec spec = preset("static-20-frames");
    spec.frames = 2;
    const Scene scene = generate(spec, m);
    const Frame& frame = scene.track.frames[0];
    const Intrinsics cam = scene.track.calib.intrinsics();
    const std::vector<std::uint8_t> none(static_cast<std::size_t>(cam.width * cam.height), 0);
    bool empty = false;
    const Points p = reconstructed_points(m, scene.truth.z, scene.truth.poses[0], frame, cam, &none, 1, &empty);
    EXPECT_TRUE(p.empty());
    EXPECT_TRUE(empty);
}

TEST(Reconstruction, SurfacePointsFollowThePose)
{
    const ShapeManifold& m = testing::coarse_car_manifold();
    const ShapeCode z = ShapeCode::Zero(m.dim());
    Pose pose;
    pose.t = Vec3(3.0, 1.65, 20.0);
    pose.theta = 0.7;
    const Points world = surface_points_world(m, z, pose, 1500, 5);
    ASSERT_GT(world.size(), 300u);
    const DecodedShape shape(m, z);
    for (const Vec3& p : world) {
        EXPECT_LT(std::abs(shape.value(pose.to_object(p))), 1e-3);
    }
    EXPECT_EQ(world, surface_points_world(m, z, pose, 1500, 5));
}

Pose yaw_pose(double x, double z, double theta)
{
    Pose p;
    p.t = Vec3(x, 1.65, z);
    p.theta = theta;
    return p;
}

TEST(PoseScore, IdenticalPosesHaveZeroError)
{
    const std::vector<Pose> poses{yaw_pose(0, 10, 0.1), yaw_pose(1, 30, 0.2)};
    const PoseScore s = pose_score(poses, poses, {Vec3::Zero(), Vec3::Zero()});
    for (std::size_t i = 0; i < poses.size(); ++i) {
        EXPECT_EQ(s.rotation_error[i], 0.0);
        EXPECT_EQ(s.translation_error[i], 0.0);
    }
}

TEST(PoseScore, YawWrapsAndIsPeriodic)
{
    const auto s = pose_score({yaw_pose(0, 10, -3.1)}, {yaw_pose(0, 10, 3.1)}, {Vec3::Zero()});
    EXPECT_NEAR(s.rotation_error[0], 2.0 * std::numbers::pi - 6.2, 1e-12);
    EXPECT_NEAR(s.rotation_error[0], 0.0832, 1e-4);
    for (int k : {-2, 1, 3}) {
        const auto t = pose_score({yaw_pose(0, 10, -3.1 + 2.0 * std::numbers::pi * k)}, {yaw_pose(0, 10, 3.1)},
                                  {Vec3::Zero()});
        EXPECT_NEAR(t.rotation_error[0], s.rotation_error[0], 1e-12);
    }
    EXPECT_THROW(pose_score({yaw_pose(0, 0, 0)}, {}, {}), InputError);
}

TEST(PoseScore, MediansIgnoreOneOutlier)
{
    std::vector<Pose> truth, est;
    std::vector<Vec3> cams;
    for (int i = 0; i < 9; ++i) {
        truth.push_back(yaw_pose(0.0, 10.0 + i, 0.0));
        est.push_back(yaw_pose(0.1 * (i % 3), 10.0 + i, 0.01 * (i % 3)));
        cams.push_back(Vec3::Zero());
    }
    const PoseScore clean = pose_score(est, truth, cams);
    est[4].t.x() += 50.0;
    est[4].theta += 2.0;
    const PoseScore dirty = pose_score(est, truth, cams);
    ASSERT_EQ(clean.bins.size(), 1u);
    EXPECT_EQ(dirty.bins[0].translation_median, clean.bins[0].translation_median);
    EXPECT_EQ(dirty.bins[0].rotation_median, clean.bins[0].rotation_median);
    EXPECT_GT(dirty.bins[0].translation_mean, clean.bins[0].translation_mean + 1.0);
    EXPECT_GT(dirty.bins[0].rotation_mean, clean.bins[0].rotation_mean + 0.1);
}

TEST(PoseScore, TwentyMetreBins)
{
    std::vector<Pose> poses;
    std::vector<Vec3> cams;
    for (double z : {5.0, 19.0, 45.0, 59.0}) {
        poses.push_back(yaw_pose(0.0, z, 0.0));
        cams.push_back(Vec3::Zero());
    }
    const PoseScore s = pose_score(poses, poses, cams);
    ASSERT_EQ(s.bins.size(), 3u);
    EXPECT_EQ(s.bins[0].count, 2u);
    EXPECT_EQ(s.bins[1].count, 0u);
    EXPECT_TRUE(std::isnan(s.bins[1].translation_median));
    EXPECT_EQ(s.bins[2].count, 2u);
    EXPECT_EQ(s.bins[2].lower, 40.0);
    EXPECT_EQ(s.bins[2].upper, 60.0);
    EXPECT_NEAR(s.distance[0], std::hypot(5.0, 1.65), 1e-12);
}

TEST(Median, Conventional)
{
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_TRUE(std::isnan(median({})));
}

TEST(Reports, JsonCsvAndGnuplot)
{
    EvalReport r;
    r.track_id = "t";
    std::mt19937_64 rng(5);
    const Points gt = random_cloud(rng, 50, 1.0);
    for (double tau : {0.1, 0.2}) {
        r.shape.push_back(shape_score(gt, gt, tau));
    }
    r.pose = pose_score({yaw_pose(0, 10, 0)}, {yaw_pose(0, 10, 0.1)}, {Vec3::Zero()});
    const auto dir = testing::scratch_dir("eval_reports");
    write_eval_json((dir / "e.json").string(), r);
    write_eval_csv((dir / "e.csv").string(), r);
    write_eval_gnuplot((dir / "e.dat").string(), r);
    const auto j = nlohmann::json::parse(std::ifstream(dir / "e.json"));
    EXPECT_EQ(j["shape"].size(), 2u);
    std::ifstream csv(dir / "e.csv");
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) {
        ++lines;
    }
    EXPECT_EQ(lines, 3); // header plus one row per tau
    EXPECT_GT(std::filesystem::file_size(dir / "e.dat"), 0u);
}

} // namespace
} // namespace samp
