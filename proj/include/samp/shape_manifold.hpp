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

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace samp {

/// Coefficients along the principal directions of a ShapeManifold (meters).
using ShapeCode = Eigen::VectorXd;

/**
 * Linear subspace over stacked grid-SDF vectors.
 *
 * A grid vector phi (length M = nx*ny*nz) is encoded as z = W^T (phi - mean) and decoded
 * as W z + mean. The basis W has orthonormal columns ordered by descending eigenvalue of
 * the training sample covariance. Point queries phi(x, z) are evaluated lazily from the
 * 8-voxel trilinear stencil of x, so a query costs O(8 R) and never decodes the full grid.
 */
class ShapeManifold {
public:
    ShapeManifold(GridSpec spec, Eigen::VectorXd mean, Eigen::MatrixXd basis, Eigen::VectorXd eigenvalues);

    /// PCA over the training grids (thin SVD of the centered data matrix).
    static ShapeManifold train(const std::vector<SdfGrid>& grids, int dim);

    const GridSpec& spec() const { return spec_; }
    int dim() const { return static_cast<int>(eigenvalues_.size()); }
    std::size_t grid_size() const { return spec_.size(); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& basis() const { return basis_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

    /// Fraction of training variance captured by the first r components (r = 1..R).
    /// Empty for manifolds loaded from disk.
    const std::vector<double>& cumulative_variance() const { return cumulative_variance_; }

    ShapeCode encode(const Eigen::VectorXd& grid_vector) const;
    ShapeCode encode(const SdfGrid& grid) const;
    Eigen::VectorXd decode(const ShapeCode& z) const;

    double phi(const Vec3& x, const ShapeCode& z, OutOfGrid policy = OutOfGrid::kExtend,
               bool* clamped = nullptr) const;
    /// d phi / d z at x; independent of z.
    Eigen::VectorXd phi_grad_z(const Vec3& x, OutOfGrid policy = OutOfGrid::kExtend) const;
    Vec3 phi_grad_x(const Vec3& x, const ShapeCode& z, OutOfGrid policy = OutOfGrid::kExtend) const;

    struct Evaluation {
        double value = 0.0;
        Vec3 grad_x = Vec3::Zero();
        Eigen::VectorXd grad_z;
        bool clamped = false;
    };
    /// Value and both gradients from a single stencil.
    Evaluation evaluate(const Vec3& x, const ShapeCode& z) const;

private:
    void check_code(const ShapeCode& z) const;
    /// Per-voxel row (mean, W_1..W_R), rows contiguous.
    const double* row(std::size_t voxel) const { return packed_.data() + voxel * (dim() + 1); }

    GridSpec spec_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd basis_;
    Eigen::VectorXd eigenvalues_;
    std::vector<double> packed_;
    std::vector<double> cumulative_variance_;
};

/// Densely decoded shape W z + mean, usable as a field for rendering. Values are not
/// truncated: linear combinations of truncated SDFs may exceed the truncation distance.
class DecodedShape final : public SignedField {
public:
    DecodedShape(const ShapeManifold& manifold, const ShapeCode& z);

    double value(const Vec3& x) const override { return interpolate(spec_, values_, x); }
    Eigen::AlignedBox3d domain() const override { return spec_.interior(); }
    const std::vector<double>& values() const { return values_; }

private:
    GridSpec spec_;
    std::vector<double> values_;
};

/// "SMAN" file: u32 version, grid spec block, u32 R, f32 mean[M], f32 eigenvalues[R],
/// f32 basis[M x R] column-major; little-endian.
void write_manifold(const std::string& path, const ShapeManifold& manifold);
ShapeManifold read_manifold(const std::string& path);

} // namespace samp
