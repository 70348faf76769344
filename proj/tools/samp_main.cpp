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
#include "samp/eval.hpp"
#include "samp/ingest.hpp"
#include "samp/optimizer.hpp"
#include "samp/point_cloud.hpp"
#include "samp/sdf_grid.hpp"
#include "samp/shape_manifold.hpp"
#include "samp/synth.hpp"
#include "samp/track.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace samp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

GridSpec parse_grid(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw InputError("--grid: '" + item + "' is not a number");
        }
    }
    if (v.size() != 5) {
        throw InputError("--grid expects nx,ny,nz,voxel,trunc");
    }
    GridSpec spec = GridSpec::vehicle(static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), v[3], v[4]);
    spec.validate();
    return spec;
}

bool is_cloud(const fs::path& p)
{
    const std::string ext = p.extension().string();
    return ext == ".xyz" || ext == ".ply" || ext == ".txt";
}

// --- gen-shapes ---------------------------------------------------------------------

struct GenShapesArgs {
    std::string out;
    int count = 10;
    double spacing = 0.03;
    std::uint64_t seed = 1;
};

int run_gen_shapes(const GenShapesArgs& a)
{
    if (a.count < 1) {
        throw InputError("--count must be positive");
    }
    fs::create_directories(a.out);
    for (int i = 0; i < a.count; ++i) {
        const CarParams car = random_car(a.seed + static_cast<std::uint64_t>(i));
        std::ostringstream name;
        name << "car_" << std::setw(3) << std::setfill('0') << i << ".xyz";
        write_xyz((fs::path(a.out) / name.str()).string(), sample_car_surface(car, a.spacing));
    }
    std::cout << "wrote " << a.count << " car clouds to " << a.out << '\n';
    return kExitOk;
}

// --- build-manifold -----------------------------------------------------------------

struct BuildManifoldArgs {
    std::vector<std::string> shapes;
    std::string out;
    int dim = 5;
    std::string grid = "60,40,100,0.06,0.3";
};

int run_build_manifold(const BuildManifoldArgs& a)
{
    if (a.dim < 1) {
        throw InputError("--dim must be at least 1");
    }
    const GridSpec spec = parse_grid(a.grid);
    std::vector<fs::path> files;
    for (const auto& s : a.shapes) {
        const fs::path p(s);
        if (fs::is_directory(p)) {
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && (is_cloud(e.path()) || e.path().extension() == ".sdf")) {
                    files.push_back(e.path());
                }
            }
        } else if (fs::exists(p)) {
            files.push_back(p);
        } else {
            throw InputError("shape input not found: " + s);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.size() < 2) {
        throw InputError("building a manifold needs at least 2 shapes, got " + std::to_string(files.size()));
    }
    std::vector<SdfGrid> grids;
    for (const auto& f : files) {
        if (f.extension() == ".sdf") {
            grids.push_back(read_sdf(f.string()));
            if (!(grids.back().spec() == grids.front().spec())) {
                throw InputError("inconsistent grids: " + f.string() + " differs from " + files.front().string());
            }
        } else {
            const PointCloud cloud = read_point_cloud(f.string());
            grids.push_back(cloud.has_normals() ? build_sdf_from_points(cloud.points, cloud.normals, spec)
                                                : build_sdf_from_points(cloud.points, spec));
        }
        log(LogLevel::kInfo, "grid from ", f.string());
    }
    const ShapeManifold manifold = ShapeManifold::train(grids, a.dim);
    write_manifold(a.out, manifold);
    std::cout << "trained on " << grids.size() << " shapes, R = " << manifold.dim() << '\n';
    std::cout << "R  cumulative_variance\n";
    for (std::size_t r = 0; r < manifold.cumulative_variance().size(); ++r) {
        std::cout << r + 1 << "  " << manifold.cumulative_variance()[r] << '\n';
    }
    return kExitOk;
}

// --- gen ----------------------------------------------------------------------------

struct GenArgs {
    std::string preset;
    std::string spec;
    std::string out;
    std::string manifold;
    std::optional<std::uint64_t> seed;
};

int run_gen(const GenArgs& a)
{
    ScenarioSpec spec = !a.spec.empty() ? scenario_from_json_file(a.spec) : preset(a.preset);
    if (a.seed) {
        spec.seed = *a.seed;
    }
    fs::create_directories(a.out);
    std::string manifold_path = a.manifold;
    ShapeManifold manifold = [&] {
        if (!manifold_path.empty()) {
            return read_manifold(manifold_path);
        }
        manifold_path = (fs::path(a.out) / "manifold.sman").string();
        ShapeManifold m = default_car_manifold();
        write_manifold(manifold_path, m);
        return m;
    }();
    const Scene scene = generate(spec, manifold);
    write_scene(scene, a.out);
    write_scenario_json((fs::path(a.out) / "scenario.json").string(), spec);
    std::cout << "generated " << spec.name << ": " << scene.track.size() << " frames in " << a.out
              << " (manifold " << manifold_path << ")\n";
    return kExitOk;
}

// --- fit ----------------------------------------------------------------------------

struct FitArgs {
    std::string track;
    std::string manifold;
    std::string out;
    int em_passes = 1;
    int max_iters = 100;
    double inflation = 2.0;
    double huber_delta = 1.345;
    double radius = kDefaultAssociationRadius;
    std::string report;
    std::string ply_dir;
    std::string trajectory;
    int rays = 20000;
    int jobs = 1;
    std::uint64_t seed = 0;
};

bool is_track_file(const fs::path& p)
{
    if (p.extension() != ".json") {
        return false;
    }
    std::ifstream in(p);
    try {
        const auto j = nlohmann::json::parse(in);
        return j.is_object() && j.contains("frames") && j["frames"].is_array() && j.contains("calib");
    } catch (const std::exception&) {
        return false;
    }
}

struct FitOutcome {
    bool converged = false;
    std::string message;
};

FitOutcome fit_one(const FitArgs& a, const ShapeManifold& manifold, const fs::path& track_path, const fs::path& out_path,
                   const std::string& report_path, const std::string& ply_dir, const std::string& trajectory_path)
{
    GroundPlaneSettings plane;
    plane.seed = a.seed;
    const Track track = load_track(track_path.string(), plane);
    EnergyConfig config;
    config.em_passes = a.em_passes;
    config.lm.max_iterations = a.max_iters;
    config.initial_inflation = a.inflation;
    config.huber_delta = a.huber_delta;
    config.association_radius = a.radius;
    const FitResult fit = solve(track, manifold, config);

    if (out_path.has_parent_path()) {
        fs::create_directories(out_path.parent_path());
    }
    write_fit(out_path.string(), {fit, fs::absolute(track_path).string(), fs::absolute(a.manifold).string()});

    if (!report_path.empty()) {
        std::ofstream rep(report_path);
        if (!rep) {
            throw InputError("cannot write " + report_path);
        }
        rep << std::setprecision(17) << "pass,iteration,energy\n";
        for (std::size_t p = 0; p < fit.passes.size(); ++p) {
            const auto& h = fit.passes[p].energy_history;
            for (std::size_t i = 0; i < h.size(); ++i) {
                rep << p << ',' << i << ',' << h[i] << '\n';
            }
        }
    }
    if (!trajectory_path.empty()) {
        std::ofstream csv(trajectory_path);
        if (!csv) {
            throw InputError("cannot write " + trajectory_path);
        }
        csv << std::setprecision(12) << "frame,t_s,x,y,z,theta,v,omega\n";
        for (int t = 0; t < track.size(); ++t) {
            const Pose& p = fit.poses[t];
            csv << track.frames[t].index << ',' << track.frames[t].timestamp << ',' << p.t.x() << ',' << p.t.y() << ','
                << p.t.z() << ',' << p.theta << ',' << p.v << ',' << p.omega << '\n';
        }
    }
    if (!ply_dir.empty()) {
        fs::create_directories(ply_dir);
        for (int t = 0; t < track.size(); ++t) {
            std::ostringstream name;
            name << track.id << "_frame_" << std::setw(3) << std::setfill('0') << track.frames[t].index << ".ply";
            const Points pts = surface_points_world(manifold, fit.z, fit.poses[t], a.rays, a.seed);
            write_ply((fs::path(ply_dir) / name.str()).string(), PointCloud{pts, {}});
        }
    }
    std::ostringstream msg;
    msg << track.id << ": " << to_string(fit.regime) << ", energy " << fit.energy.total << " (data " << fit.energy.data
        << ", motion " << fit.energy.motion << ", shape " << fit.energy.shape << "), " << fit.iterations
        << " iterations, " << (fit.converged ? "converged" : "NOT converged");
    return {fit.converged, msg.str()};
}

int run_fit(const FitArgs& a)
{
    if (!fs::exists(a.manifold)) {
        throw InputError("manifold file not found: " + a.manifold);
    }
    if (!fs::exists(a.track)) {
        throw InputError("track not found: " + a.track);
    }
    if (a.jobs < 1) {
        throw InputError("--jobs must be positive");
    }
    const ShapeManifold manifold = read_manifold(a.manifold);

    if (!fs::is_directory(a.track)) {
        const FitOutcome r = fit_one(a, manifold, a.track, a.out, a.report, a.ply_dir, a.trajectory);
        std::cout << r.message << '\n';
        return r.converged ? kExitOk : kExitRuntime;
    }

    std::vector<fs::path> tracks;
    for (const auto& e : fs::recursive_directory_iterator(a.track)) {
        if (e.is_regular_file() && is_track_file(e.path())) {
            tracks.push_back(e.path());
        }
    }
    std::sort(tracks.begin(), tracks.end());
    if (tracks.empty()) {
        throw InputError("no track files under " + a.track);
    }
    fs::create_directories(a.out);
    std::vector<FitOutcome> results(tracks.size());
    std::vector<std::string> errors(tracks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tracks.size(); i = next++) {
            std::string stem = fs::relative(tracks[i], a.track).replace_extension().string();
            std::replace(stem.begin(), stem.end(), '/', '_');
            const fs::path out = fs::path(a.out) / (stem + ".fit.json");
            const std::string report = a.report.empty() ? "" : (fs::path(a.out) / (stem + ".energy.csv")).string();
            const std::string traj = a.trajectory.empty() ? "" : (fs::path(a.out) / (stem + ".trajectory.csv")).string();
            const std::string ply = a.ply_dir.empty() ? "" : (fs::path(a.ply_dir) / stem).string();
            try {
                results[i] = fit_one(a, manifold, tracks[i], out, report, ply, traj);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(a.jobs, static_cast<int>(tracks.size()));
    for (int i = 0; i < n; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    int code = kExitOk;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (!errors[i].empty()) {
            std::cerr << tracks[i].string() << ": error: " << errors[i] << '\n';
            code = kExitRuntime;
        } else {
            std::cout << results[i].message << '\n';
            if (!results[i].converged) {
                code = kExitRuntime;
            }
        }
    }
    return code;
}

// --- eval ---------------------------------------------------------------------------

struct EvalArgs {
    std::string fit;
    std::string gt;
    std::vector<double> tau{0.2};
    std::string out;
    std::string json;
    std::string gnuplot;
    std::string manifold;
    std::string track;
    bool full_surface = false;
    int rays = 20000;
    std::uint64_t seed = 0;
};

fs::path resolve_near(const std::string& stored, const fs::path& anchor)
{
    const fs::path p(stored);
    if (p.is_absolute() || fs::exists(p)) {
        return p;
    }
    return anchor.parent_path() / p;
}

int run_eval(const EvalArgs& a)
{
    const FitRecord record = read_fit(a.fit);
    const GroundTruth gt = read_ground_truth(a.gt);
    const fs::path manifold_path = !a.manifold.empty() ? fs::path(a.manifold) : resolve_near(record.manifold_path, a.fit);
    const fs::path track_path = !a.track.empty() ? fs::path(a.track) : resolve_near(record.track_path, a.fit);
    const ShapeManifold manifold = read_manifold(manifold_path.string());
    const Track track = load_track(track_path.string());

    const FitResult& fit = record.fit;
    if (fit.poses.size() != gt.poses.size() || static_cast<int>(gt.poses.size()) != track.size()) {
        throw InputError("frame count mismatch: fit has " + std::to_string(fit.poses.size()) + ", ground truth " +
                         std::to_string(gt.poses.size()) + ", track " + std::to_string(track.size()));
    }
    if (gt.z.size() != manifold.dim() || fit.z.size() != manifold.dim()) {
        throw InputError("shape code dimension does not match the manifold");
    }
    for (double t : a.tau) {
        if (!(t > 0.0)) {
            throw InputError("--tau values must be positive");
        }
    }

    const int e = gt.eval_frame;
    const Frame& frame = track.frames[e];
    const Intrinsics camera = track.calib.intrinsics();
    Points gt_points;
    Points rec_points;
    if (a.full_surface) {
        gt_points = surface_points_world(manifold, gt.z, gt.poses[e], a.rays, a.seed);
        rec_points = surface_points_world(manifold, fit.z, fit.poses[e], a.rays, a.seed + 1);
    } else {
        gt_points = reconstructed_points(manifold, gt.z, gt.poses[e], frame, camera);
        const auto mask = render_mask(manifold, gt.z, gt.poses[e], frame, camera);
        rec_points = reconstructed_points(manifold, fit.z, fit.poses[e], frame, camera, &mask);
    }

    EvalReport report;
    report.track_id = fit.track_id;
    for (double t : a.tau) {
        report.shape.push_back(shape_score(gt_points, rec_points, t));
    }
    std::vector<Vec3> cams;
    for (const Frame& f : track.frames) {
        cams.push_back(f.camera_position());
    }
    report.pose = pose_score(fit.poses, gt.poses, cams);

    if (!a.out.empty()) {
        write_eval_csv(a.out, report);
    }
    if (!a.json.empty()) {
        write_eval_json(a.json, report);
    }
    if (!a.gnuplot.empty()) {
        write_eval_gnuplot(a.gnuplot, report);
    }
    std::cout << "tau      completeness  accuracy  f1\n";
    for (const ShapeScore& s : report.shape) {
        std::printf("%-8.3f %-13.2f %-9.2f %.2f%s\n", s.tau, s.completeness, s.accuracy, s.f1, s.empty ? "  (empty set)" : "");
    }
    std::cout << "distance_bin  frames  rot_median_deg  trans_median_m\n";
    for (const DistanceBin& b : report.pose.bins) {
        std::printf("%3.0f-%-3.0f       %-7zu %-15.4f %.4f\n", b.lower, b.upper, b.count,
                    b.rotation_median * 180.0 / std::numbers::pi, b.translation_median);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Shape-aware multi-frame vehicle pose and shape fitting"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML or INI file with default option values");

    GenShapesArgs gs;
    auto* gen_shapes = app.add_subcommand("gen-shapes", "Write randomized car surface clouds");
    gen_shapes->add_option("--out", gs.out, "Output directory")->required();
    gen_shapes->add_option("--count", gs.count, "Number of cars")->capture_default_str();
    gen_shapes->add_option("--spacing", gs.spacing, "Surface sample spacing (m)")->capture_default_str();
    gen_shapes->add_option("--seed", gs.seed, "Random seed")->capture_default_str();

    BuildManifoldArgs bm;
    auto* build = app.add_subcommand("build-manifold", "Train a PCA shape manifold from shape clouds or SDF files");
    build->add_option("--shapes", bm.shapes, "Directory or list of .xyz/.ply/.sdf files")->required();
    build->add_option("--out", bm.out, "Output manifold file")->required();
    build->add_option("--dim", bm.dim, "Number of principal components R")->capture_default_str();
    build->add_option("--grid", bm.grid, "nx,ny,nz,voxel,trunc")->capture_default_str();

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic track with ground truth");
    auto* preset_opt = gen->add_option("--preset", ga.preset, "Preset name");
    auto* spec_opt = gen->add_option("--spec", ga.spec, "Scenario JSON file");
    preset_opt->excludes(spec_opt);
    gen->add_option("--out", ga.out, "Output directory")->required();
    gen->add_option("--manifold", ga.manifold, "Manifold file (default: built-in car manifold, written to --out)");
    gen->add_option("--seed", ga.seed, "Override the scenario seed");
    gen->callback([&] {
        if (ga.preset.empty() && ga.spec.empty()) {
            throw CLI::ValidationError("gen", "one of --preset or --spec is required");
        }
    });

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit shape and trajectory to a track (or every track in a directory)");
    fit->add_option("--track", fa.track, "Track JSON file or directory")->required();
    fit->add_option("--manifold", fa.manifold, "Manifold file")->required();
    fit->add_option("--out", fa.out, "Fit JSON file (directory when --track is a directory)")->required();
    fit->add_option("--em-passes", fa.em_passes, "Reassociation passes")->capture_default_str();
    fit->add_option("--max-iters", fa.max_iters, "LM iterations per pass")->capture_default_str();
    fit->add_option("--inflation", fa.inflation, "Depth-noise inflation in the first pass")->capture_default_str();
    fit->add_option("--huber", fa.huber_delta, "Huber threshold on whitened residuals")->capture_default_str();
    fit->add_option("--radius", fa.radius, "Association radius (m)")->capture_default_str();
    fit->add_option("--report", fa.report, "Per-iteration energy log (CSV)");
    fit->add_option("--ply-dir", fa.ply_dir, "Write the fitted surface per frame as PLY");
    fit->add_option("--trajectory", fa.trajectory, "Write the fitted trajectory as CSV");
    fit->add_option("--rays", fa.rays, "Surface samples per PLY frame")->capture_default_str();
    fit->add_option("--jobs", fa.jobs, "Parallel workers for a track directory")->capture_default_str();
    fit->add_option("--seed", fa.seed, "Seed for plane estimation and surface sampling")->capture_default_str();

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Score a fit against ground truth");
    eval->add_option("--fit", ea.fit, "Fit JSON")->required();
    eval->add_option("--gt", ea.gt, "Ground-truth JSON")->required();
    eval->add_option("--tau", ea.tau, "Distance thresholds (m), comma separated")->delimiter(',')->capture_default_str();
    eval->add_option("--out", ea.out, "CSV output, one row per tau");
    eval->add_option("--json", ea.json, "JSON output");
    eval->add_option("--gnuplot", ea.gnuplot, "gnuplot data output");
    eval->add_option("--manifold", ea.manifold, "Override the manifold path stored in the fit");
    eval->add_option("--track", ea.track, "Override the track path stored in the fit");
    eval->add_flag("--full-surface", ea.full_surface, "Compare complete surfaces instead of the visible depth buffer");
    eval->add_option("--rays", ea.rays, "Surface samples for --full-surface")->capture_default_str();
    eval->add_option("--seed", ea.seed, "Seed for surface sampling")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen_shapes) return run_gen_shapes(gs);
        if (*build) return run_build_manifold(bm);
        if (*gen) return run_gen(ga);
        if (*fit) return run_fit(fa);
        if (*eval) return run_eval(ea);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ComputeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
