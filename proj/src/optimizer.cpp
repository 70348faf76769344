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
#include "samp/optimizer.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace samp {

using nlohmann::json;

void LmSettings::validate() const
{
    if (max_iterations < 0) {
        throw InputError("LM max_iterations must be non-negative");
    }
    if (!(initial_damping > 0.0) || !(gradient_tolerance > 0.0) || !(function_tolerance > 0.0) ||
        !(step_tolerance > 0.0)) {
        throw InputError("LM damping and tolerances must be positive");
    }
}

void EnergyConfig::validate() const
{
    if (!(huber_delta > 0.0)) {
        throw InputError("huber_delta must be positive");
    }
    if (!(shape_prior_weight >= 0.0)) {
        throw InputError("shape_prior_weight must be non-negative");
    }
    if (!(initial_inflation >= 1.0)) {
        throw InputError("initial_inflation must be at least 1");
    }
    if (em_passes < 0) {
        throw InputError("em_passes must be non-negative");
    }
    if (!(association_radius > 0.0)) {
        throw InputError("association_radius must be positive");
    }
    noise.validate();
    lm.validate();
}

double huber(double r, double delta)
{
    const double a = std::abs(r);
    return a <= delta ? r * r : 2.0 * delta * a - delta * delta;
}

double huber_weight(double r, double delta)
{
    const double a = std::abs(r);
    return a <= delta ? 1.0 : delta / a;
}

double depth_sigma(double depth, const Calibration& calib)
{
    return depth * depth * calib.sigma_disp_px / (calib.b_m * calib.f_px);
}

Eigen::VectorXd data_residuals(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose, const Frame& frame,
                               const Calibration& calib, double inflation)
{
    Eigen::VectorXd r(static_cast<Eigen::Index>(frame.observed.size()));
    for (std::size_t k = 0; k < frame.observed.size(); ++k) {
        const std::size_t i = frame.observed[k];
        const double sigma = inflation * depth_sigma(frame.depth[i], calib);
        r[static_cast<Eigen::Index>(k)] = manifold.phi(pose.to_object(frame.pool[i]), z) / sigma;
    }
    return r;
}

double shape_prior(const ShapeManifold& manifold, const ShapeCode& z)
{
    if (z.size() != manifold.dim()) {
        throw InputError("shape code dimension does not match the manifold");
    }
    return (z.array().square() / manifold.eigenvalues().array()).sum();
}

// --- Problem ------------------------------------------------------------------------

Problem::Problem(const ShapeManifold& manifold, const Track& track, const EnergyConfig& config, MotionRegime regime,
                 const TrackState& linearization, double inflation)
    : manifold_(&manifold), track_(&track), config_(config), regime_(regime), inflation_(inflation)
{
    config_.validate();
    track.calib.validate();
    if (!(inflation >= 1.0)) {
        throw InputError("depth inflation must be at least 1");
    }
    const int T = track.size();
    if (T < 2) {
        throw InputError("track " + track.id + ": needs at least 2 frames");
    }
    if (static_cast<int>(linearization.poses.size()) != T) {
        throw InputError("pose count does not match the track length");
    }
    if (linearization.z.size() != manifold.dim()) {
        throw InputError("shape code dimension does not match the manifold");
    }
    if (!(manifold.eigenvalues().minCoeff() > 0.0)) {
        throw InputError("shape prior needs strictly positive manifold eigenvalues");
    }
    inv_sigma_shape_ = manifold.eigenvalues().cwiseSqrt().cwiseInverse();

    observations_.resize(static_cast<std::size_t>(T));
    whitening_.assign(static_cast<std::size_t>(T), Mat6::Zero());
    for (int t = 0; t < T; ++t) {
        const Frame& f = track.frames[t];
        auto& obs = observations_[t];
        obs.reserve(f.observed.size());
        for (std::size_t i : f.observed) {
            obs.push_back({f.pool[i], 1.0 / (inflation * depth_sigma(f.depth[i], track.calib))});
        }
        if (t > 0) {
            whitening_[t] = whitening(
                propagate_covariance(linearization.poses[t - 1], track.dt(t), regime, config_.noise));
        }
    }
}

Vec6 Problem::kinematic_residual(const TrackState& state, int t) const
{
    const Pose predicted = predict(state.poses[t - 1], track_->dt(t), regime_);
    return whitening_[t] * pose_difference(state.poses[t], predicted);
}

double Problem::ground_residual(const TrackState& state, int t) const
{
    return samp::ground_residual(state.poses[t], track_->frames[t].plane);
}

EnergyBreakdown Problem::energy(const TrackState& state) const { return evaluate(state, true); }

EnergyBreakdown Problem::evaluate(const TrackState& state, bool check) const
{
    const int T = frames();
    const double delta = config_.huber_delta;
    EnergyBreakdown e;
    e.frame_data.assign(static_cast<std::size_t>(T), 0.0);
    e.frame_motion.assign(static_cast<std::size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) {
        const Pose& pose = state.poses[t];
        const auto& obs = observations_[t];
        if (!obs.empty()) {
            const Eigen::Matrix3d Rt = pose.rotation().transpose();
            double sum = 0.0;
            for (const auto& o : obs) {
                sum += huber(manifold_->phi(Rt * (o.x - pose.t), state.z) * o.inv_sigma, delta);
            }
            e.frame_data[t] = sum / static_cast<double>(obs.size());
        }
        if (config_.use_motion_terms) {
            const double g = ground_residual(state, t);
            e.frame_motion[t] = g * g + (t > 0 ? kinematic_residual(state, t).squaredNorm() : 0.0);
        }
        if (check && !std::isfinite(e.frame_data[t])) {
            throw ComputeError("non-finite data term in frame " + std::to_string(track_->frames[t].index));
        }
        if (check && !std::isfinite(e.frame_motion[t])) {
            throw ComputeError("non-finite motion term in frame " + std::to_string(track_->frames[t].index));
        }
        e.data += e.frame_data[t];
        e.motion += e.frame_motion[t];
    }
    e.data /= T;
    e.motion /= T;
    e.shape = config_.shape_prior_weight * (state.z.cwiseProduct(inv_sigma_shape_)).squaredNorm();
    if (check && !std::isfinite(e.shape)) {
        throw ComputeError("non-finite shape prior");
    }
    e.total = e.data + e.motion + e.shape;
    return e;
}

// --- Jacobians ----------------------------------------------------------------------

JacobianBlocks jacobians(const Problem& problem, const TrackState& state)
{
    const ShapeManifold& manifold = problem.manifold();
    const Track& track = problem.track();
    const int T = problem.frames();
    const int R = manifold.dim();
    JacobianBlocks J;
    for (int t = 0; t < T; ++t) {
        const auto& obs = problem.observations(t);
        if (obs.empty()) {
            continue;
        }
        const Pose& pose = state.poses[t];
        const Eigen::Matrix3d Rot = pose.rotation();
        const Eigen::Matrix3d Rt = Rot.transpose();
        JacobianBlocks::DataBlock b;
        b.frame = t;
        const auto n = static_cast<Eigen::Index>(obs.size());
        b.r.resize(n);
        b.d_pose.setZero(n, 6);
        b.d_z.resize(n, R);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& o = obs[static_cast<std::size_t>(i)];
            const Vec3 xo = Rt * (o.x - pose.t);
            const auto ev = manifold.evaluate(xo, state.z);
            b.r[i] = ev.value * o.inv_sigma;
            b.d_pose.block<1, 3>(i, 0) = -(Rot * ev.grad_x).transpose() * o.inv_sigma;
            b.d_pose(i, 3) = ev.grad_x.dot(Vec3(-xo.z(), 0.0, xo.x())) * o.inv_sigma;
            b.d_z.row(i) = ev.grad_z.transpose() * o.inv_sigma;
        }
        J.data.push_back(std::move(b));
    }
    if (problem.config().use_motion_terms) {
        for (int t = 0; t < T; ++t) {
            const GroundPlane& plane = track.frames[t].plane;
            J.ground.push_back({t, problem.ground_residual(state, t), ground_residual_gradient(plane)});
            if (t == 0) {
                continue;
            }
            const Mat6& W = problem.motion_whitening(t);
            JacobianBlocks::MotionBlock m;
            m.frame = t;
            m.r = problem.kinematic_residual(state, t);
            m.d_pose = W;
            m.d_prev = -W * prediction_jacobian(state.poses[t - 1], track.dt(t), problem.regime());
            J.motion.push_back(m);
        }
    }
    const double s = std::sqrt(problem.config().shape_prior_weight);
    J.prior_r = s * state.z.cwiseProduct(problem.inv_sigma_shape());
    J.prior_d_z = s * problem.inv_sigma_shape();
    return J;
}

// --- Levenberg-Marquardt ------------------------------------------------------------

namespace {

/// Gauss-Newton system H = sum w J^T J, g = sum w J^T r, with poses first and z last.
struct NormalEquations {
    Eigen::MatrixXd Hpp;
    Eigen::MatrixXd Hpz;
    Eigen::MatrixXd Hzz;
    Eigen::VectorXd gp;
    Eigen::VectorXd gz;

    double gradient_max() const
    {
        return 2.0 * std::max(gp.size() ? gp.cwiseAbs().maxCoeff() : 0.0, gz.size() ? gz.cwiseAbs().maxCoeff() : 0.0);
    }
};

NormalEquations assemble(const Problem& problem, const JacobianBlocks& J)
{
    const int T = problem.frames();
    const int R = problem.manifold().dim();
    const double delta = problem.config().huber_delta;
    NormalEquations ne;
    ne.Hpp.setZero(6 * T, 6 * T);
    ne.Hpz.setZero(6 * T, R);
    ne.Hzz.setZero(R, R);
    ne.gp.setZero(6 * T);
    ne.gz.setZero(R);

    for (const auto& b : J.data) {
        const double scale = 1.0 / (static_cast<double>(T) * static_cast<double>(b.r.size()));
        const Eigen::VectorXd w =
            b.r.unaryExpr([delta](double r) { return huber_weight(r, delta); }) * scale;
        const Eigen::MatrixXd wp = w.asDiagonal() * b.d_pose;
        const Eigen::MatrixXd wz = w.asDiagonal() * b.d_z;
        const int o = 6 * b.frame;
        ne.Hpp.block<6, 6>(o, o) += b.d_pose.transpose() * wp;
        ne.Hpz.middleRows<6>(o) += wp.transpose() * b.d_z;
        ne.Hzz += b.d_z.transpose() * wz;
        ne.gp.segment<6>(o) += wp.transpose() * b.r;
        ne.gz += wz.transpose() * b.r;
    }
    const double inv_t = 1.0 / T;
    for (const auto& m : J.motion) {
        const int o = 6 * m.frame;
        const int p = o - 6;
        ne.Hpp.block<6, 6>(o, o) += inv_t * m.d_pose.transpose() * m.d_pose;
        ne.Hpp.block<6, 6>(p, p) += inv_t * m.d_prev.transpose() * m.d_prev;
        const Mat6 cross = inv_t * m.d_pose.transpose() * m.d_prev;
        ne.Hpp.block<6, 6>(o, p) += cross;
        ne.Hpp.block<6, 6>(p, o) += cross.transpose();
        ne.gp.segment<6>(o) += inv_t * m.d_pose.transpose() * m.r;
        ne.gp.segment<6>(p) += inv_t * m.d_prev.transpose() * m.r;
    }
    for (const auto& g : J.ground) {
        const int o = 6 * g.frame;
        ne.Hpp.block<6, 6>(o, o) += inv_t * g.d_pose * g.d_pose.transpose();
        ne.gp.segment<6>(o) += inv_t * g.r * g.d_pose;
    }
    ne.Hzz.diagonal() += J.prior_d_z.cwiseAbs2();
    ne.gz += J.prior_d_z.cwiseProduct(J.prior_r);
    return ne;
}

/// Solves (H + lambda D) [dp; dz] = -g by eliminating the shape block.
bool damped_step(const NormalEquations& ne, double lambda, Eigen::VectorXd& dp, Eigen::VectorXd& dz)
{
    constexpr double kMinDiag = 1e-6;
    constexpr double kMaxDiag = 1e32;
    Eigen::MatrixXd A = ne.Hzz;
    A.diagonal() += lambda * ne.Hzz.diagonal().cwiseMax(kMinDiag).cwiseMin(kMaxDiag);
    Eigen::MatrixXd S = ne.Hpp;
    S.diagonal() += lambda * ne.Hpp.diagonal().cwiseMax(kMinDiag).cwiseMin(kMaxDiag);

    const Eigen::LDLT<Eigen::MatrixXd> A_ldlt(A);
    if (A_ldlt.info() != Eigen::Success) {
        return false;
    }
    const Eigen::MatrixXd Ainv_Hzp = A_ldlt.solve(ne.Hpz.transpose());
    const Eigen::VectorXd Ainv_gz = A_ldlt.solve(ne.gz);
    S.noalias() -= ne.Hpz * Ainv_Hzp;
    const Eigen::VectorXd rhs = -ne.gp + ne.Hpz * Ainv_gz;
    const Eigen::LDLT<Eigen::MatrixXd> S_ldlt(S);
    if (S_ldlt.info() != Eigen::Success) {
        return false;
    }
    dp = S_ldlt.solve(rhs);
    dz = A_ldlt.solve(-ne.gz - ne.Hpz.transpose() * dp);
    return dp.allFinite() && dz.allFinite();
}

TrackState apply_step(const TrackState& state, const Eigen::VectorXd& dp, const Eigen::VectorXd& dz)
{
    TrackState out = state;
    out.z += dz;
    for (std::size_t t = 0; t < out.poses.size(); ++t) {
        Vec6 x = out.poses[t].vector() + dp.segment<6>(6 * static_cast<Eigen::Index>(t));
        x[3] = wrap_angle(x[3]);
        out.poses[t] = Pose::from_vector(x);
    }
    return out;
}

double state_norm(const TrackState& state)
{
    double s = state.z.squaredNorm();
    for (const Pose& p : state.poses) {
        s += p.vector().squaredNorm();
    }
    return std::sqrt(s);
}

} // namespace

LmReport minimize(const Problem& problem, const TrackState& start)
{
    const LmSettings& lm = problem.config().lm;
    constexpr double kMinDamping = 1e-12;
    constexpr double kMaxDamping = 1e32;

    LmReport report;
    report.state = start;
    double energy = problem.energy(start).total;
    report.energy_history.push_back(energy);
    double lambda = lm.initial_damping;
    double nu = 2.0;
    bool rebuild = true;
    NormalEquations ne;

    auto finish = [&](bool converged, const char* reason) {
        report.converged = converged;
        report.stop_reason = reason;
        return report;
    };

    if (energy == 0.0) {
        return finish(true, "zero cost");
    }
    while (report.iterations < lm.max_iterations) {
        if (rebuild) {
            ne = assemble(problem, jacobians(problem, report.state));
            rebuild = false;
            if (ne.gradient_max() <= lm.gradient_tolerance) {
                return finish(true, "gradient");
            }
        }
        ++report.iterations;
        Eigen::VectorXd dp;
        Eigen::VectorXd dz;
        if (!damped_step(ne, lambda, dp, dz)) {
            lambda *= nu;
            nu *= 2.0;
            if (lambda > kMaxDamping) {
                return finish(false, "damping overflow");
            }
            continue;
        }
        const double step_norm = std::sqrt(dp.squaredNorm() + dz.squaredNorm());
        if (step_norm <= lm.step_tolerance * (state_norm(report.state) + lm.step_tolerance)) {
            return finish(true, "step");
        }
        const TrackState trial = apply_step(report.state, dp, dz);
        const double trial_energy = problem.energy_unchecked(trial).total;
        if (std::isfinite(trial_energy) && trial_energy < energy) {
            // Gain ratio against the Gauss-Newton model E + 2 g.d + d.H.d.
            const double predicted = -(ne.gp.dot(dp) + ne.gz.dot(dz)) + lambda * (
                dp.dot(ne.Hpp.diagonal().cwiseMax(1e-6).cwiseMin(1e32).cwiseProduct(dp)) +
                dz.dot(ne.Hzz.diagonal().cwiseMax(1e-6).cwiseMin(1e32).cwiseProduct(dz)));
            const double rho = predicted > 0.0 ? (energy - trial_energy) / predicted : 0.5;
            lambda = std::max(kMinDamping, lambda * std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3)));
            nu = 2.0;
            const double relative = (energy - trial_energy) / energy;
            report.state = trial;
            energy = trial_energy;
            report.energy_history.push_back(energy);
            rebuild = true;
            if (energy == 0.0) {
                return finish(true, "zero cost");
            }
            if (relative <= lm.function_tolerance) {
                return finish(true, "cost");
            }
        } else {
            lambda *= nu;
            nu *= 2.0;
            if (lambda > kMaxDamping) {
                return finish(false, "damping overflow");
            }
        }
    }
    return finish(false, "max iterations");
}

// --- full solve ---------------------------------------------------------------------

namespace {

MotionRegime classify_state(const TrackState& state, const RegimeThresholds& thresholds)
{
    std::vector<double> v;
    std::vector<double> w;
    for (const Pose& p : state.poses) {
        v.push_back(p.v);
        w.push_back(p.omega);
    }
    return classify(lower_median(v), lower_median(w), thresholds);
}

std::vector<std::size_t> counts(const Track& track)
{
    std::vector<std::size_t> out;
    for (const Frame& f : track.frames) {
        out.push_back(f.observed.size());
    }
    return out;
}

} // namespace

std::vector<double> frame_surface_rms(const ShapeManifold& manifold, const Track& track, const TrackState& state)
{
    std::vector<double> out;
    for (int t = 0; t < track.size(); ++t) {
        const Frame& f = track.frames[t];
        if (f.observed.empty()) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double sum = 0.0;
        for (std::size_t i : f.observed) {
            const double phi = manifold.phi(state.poses[t].to_object(f.pool[i]), state.z);
            sum += phi * phi;
        }
        out.push_back(std::sqrt(sum / static_cast<double>(f.observed.size())));
    }
    return out;
}

FitResult solve(const Track& track, const ShapeManifold& manifold, const EnergyConfig& config,
                const std::optional<TrackState>& start)
{
    config.validate();
    track.validate();
    Track work = track;
    associate_detections(work, config.association_radius);

    TrackState state;
    MotionRegime regime;
    if (start) {
        state = *start;
        if (static_cast<int>(state.poses.size()) != track.size() || state.z.size() != manifold.dim()) {
            throw InputError("start state does not match the track or manifold");
        }
        regime = classify_state(state, config.thresholds);
    } else {
        Initialization init = initialize(work, manifold, config.thresholds);
        state = {init.z, init.poses};
        regime = init.regime;
    }

    FitResult result;
    result.track_id = track.id;
    for (int pass = 0; pass <= config.em_passes; ++pass) {
        if (pass > 0) {
            regime = classify_state(state, config.thresholds);
            Track next = reassociate(work, state.poses, config.association_radius);
            // The second solve always runs since it drops the inflation; later ones only
            // when the association moved.
            if (pass > 1 && next.association() == work.association()) {
                break;
            }
            work = std::move(next);
        }
        const double inflation = pass == 0 ? config.initial_inflation : 1.0;
        const Problem problem(manifold, work, config, regime, state, inflation);
        LmReport lm = minimize(problem, state);
        state = lm.state;
        log(LogLevel::kInfo, "track ", track.id, " pass ", pass, ": ", to_string(regime), ", ", lm.iterations,
            " iterations, energy ", lm.energy_history.back(), " (", lm.stop_reason, ")");

        PassReport pr;
        pr.regime = regime;
        pr.inflation = inflation;
        pr.iterations = lm.iterations;
        pr.converged = lm.converged;
        pr.stop_reason = lm.stop_reason;
        pr.energy_history = lm.energy_history;
        pr.observation_counts = counts(work);
        result.passes.push_back(pr);

        result.energy = problem.energy(state);
        result.iterations += lm.iterations;
        result.converged = lm.converged;
        result.energy_history = lm.energy_history;
        result.regime = regime;
    }
    result.z = state.z;
    result.poses = state.poses;
    result.frame_rms = frame_surface_rms(manifold, work, state);
    result.association = work.association();
    return result;
}

// --- fit files ----------------------------------------------------------------------

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json energy_json(const EnergyBreakdown& e)
{
    return {{"total", e.total},   {"data", e.data},           {"motion", e.motion},
            {"shape", e.shape},   {"frame_data", e.frame_data}, {"frame_motion", e.frame_motion}};
}

EnergyBreakdown energy_from_json(const json& j)
{
    EnergyBreakdown e;
    e.total = j.at("total").get<double>();
    e.data = j.at("data").get<double>();
    e.motion = j.at("motion").get<double>();
    e.shape = j.at("shape").get<double>();
    e.frame_data = j.at("frame_data").get<std::vector<double>>();
    e.frame_motion = j.at("frame_motion").get<std::vector<double>>();
    return e;
}

} // namespace

void write_fit(const std::string& path, const FitRecord& record)
{
    const FitResult& fit = record.fit;
    json j;
    j["track_id"] = fit.track_id;
    j["track"] = record.track_path;
    j["manifold"] = record.manifold_path;
    j["regime"] = to_string(fit.regime);
    j["z"] = std::vector<double>(fit.z.data(), fit.z.data() + fit.z.size());
    json poses = json::array();
    for (const Pose& p : fit.poses) {
        poses.push_back({{"t", {p.t.x(), p.t.y(), p.t.z()}}, {"theta", p.theta}, {"v", p.v}, {"omega", p.omega}});
    }
    j["poses"] = poses;
    j["energy"] = energy_json(fit.energy);
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["energy_history"] = fit.energy_history;
    json rms = json::array();
    for (double r : fit.frame_rms) {
        rms.push_back(number_or_null(r));
    }
    j["frame_rms_m"] = rms;
    json passes = json::array();
    for (const PassReport& p : fit.passes) {
        passes.push_back({{"regime", to_string(p.regime)},
                          {"inflation", p.inflation},
                          {"iterations", p.iterations},
                          {"converged", p.converged},
                          {"stop_reason", p.stop_reason},
                          {"energy_history", p.energy_history},
                          {"observation_counts", p.observation_counts}});
    }
    j["passes"] = passes;
    j["association"] = fit.association;
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write fit file " + path);
    }
    out << j.dump(2) << '\n';
}

FitRecord read_fit(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open fit file " + path);
    }
    FitRecord rec;
    try {
        const json j = json::parse(in);
        FitResult& fit = rec.fit;
        fit.track_id = j.value("track_id", "");
        rec.track_path = j.value("track", "");
        rec.manifold_path = j.value("manifold", "");
        fit.regime = regime_from_string(j.at("regime").get<std::string>());
        const auto z = j.at("z").get<std::vector<double>>();
        fit.z = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
        for (const auto& pj : j.at("poses")) {
            Pose p;
            const auto t = pj.at("t").get<std::vector<double>>();
            if (t.size() != 3) {
                throw InputError(path + ": pose translation must have 3 entries");
            }
            p.t = Vec3(t[0], t[1], t[2]);
            p.theta = pj.at("theta").get<double>();
            p.v = pj.at("v").get<double>();
            p.omega = pj.at("omega").get<double>();
            fit.poses.push_back(p);
        }
        fit.energy = energy_from_json(j.at("energy"));
        fit.iterations = j.at("iterations").get<int>();
        fit.converged = j.at("converged").get<bool>();
        fit.energy_history = j.at("energy_history").get<std::vector<double>>();
        for (const auto& r : j.at("frame_rms_m")) {
            fit.frame_rms.push_back(r.is_null() ? std::numeric_limits<double>::quiet_NaN() : r.get<double>());
        }
        for (const auto& pj : j.at("passes")) {
            PassReport p;
            p.regime = regime_from_string(pj.at("regime").get<std::string>());
            p.inflation = pj.at("inflation").get<double>();
            p.iterations = pj.at("iterations").get<int>();
            p.converged = pj.at("converged").get<bool>();
            p.stop_reason = pj.at("stop_reason").get<std::string>();
            p.energy_history = pj.at("energy_history").get<std::vector<double>>();
            p.observation_counts = pj.at("observation_counts").get<std::vector<std::size_t>>();
            fit.passes.push_back(p);
        }
        fit.association = j.at("association").get<std::vector<std::vector<std::size_t>>>();
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return rec;
}

} // namespace samp
