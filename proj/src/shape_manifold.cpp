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
#include "samp/shape_manifold.hpp"

#include "binary_io.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace samp {

ShapeManifold::ShapeManifold(GridSpec spec, Eigen::VectorXd mean, Eigen::MatrixXd basis, Eigen::VectorXd eigenvalues)
    : spec_(spec), mean_(std::move(mean)), basis_(std::move(basis)), eigenvalues_(std::move(eigenvalues))
{
    spec_.validate();
    const auto m = static_cast<Eigen::Index>(spec_.size());
    if (mean_.size() != m || basis_.rows() != m || basis_.cols() != eigenvalues_.size()) {
        throw InputError("manifold dimensions inconsistent with its grid spec");
    }
    if (eigenvalues_.size() < 1) {
        throw InputError("manifold dimension must be >= 1");
    }
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
        if (!(eigenvalues_[i] >= 0.0) || (i > 0 && eigenvalues_[i] > eigenvalues_[i - 1])) {
            throw InputError("manifold eigenvalues must be non-negative and descending");
        }
    }
    const int r = dim();
    packed_.resize(static_cast<std::size_t>(m) * (r + 1));
    for (Eigen::Index v = 0; v < m; ++v) {
        double* dst = packed_.data() + v * (r + 1);
        dst[0] = mean_[v];
        for (int c = 0; c < r; ++c) {
            dst[c + 1] = basis_(v, c);
        }
    }
}

ShapeManifold ShapeManifold::train(const std::vector<SdfGrid>& grids, int dim)
{
    if (grids.size() < 2) {
        throw InputError("training a shape manifold needs at least 2 grids");
    }
    const GridSpec spec = grids.front().spec();
    for (const SdfGrid& g : grids) {
        if (!(g.spec() == spec)) {
            throw InputError("training grids do not share one grid spec");
        }
    }
    const auto m = static_cast<Eigen::Index>(spec.size());
    const auto n = static_cast<Eigen::Index>(grids.size());
    if (dim < 1 || dim > std::min<Eigen::Index>(n - 1, m)) {
        throw InputError("manifold dimension " + std::to_string(dim) + " must lie in [1, " +
                         std::to_string(std::min<Eigen::Index>(n - 1, m)) + "]");
    }

    Eigen::MatrixXd data(m, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto v = grids[c].values();
        data.col(c) = Eigen::Map<const Eigen::VectorXd>(v.data(), m);
    }
    Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::MatrixXd basis = svd.matrixU().leftCols(dim);
    // Deterministic orientation: the largest-magnitude entry of each column is positive.
    for (int c = 0; c < dim; ++c) {
        Eigen::Index arg = 0;
        basis.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, c) < 0.0) {
            basis.col(c) *= -1.0;
        }
    }
    const Eigen::VectorXd all = sv.array().square() / static_cast<double>(n - 1);
    Eigen::VectorXd eig = all.head(dim);
    if (eig.minCoeff() <= 0.0) {
        warn("shape manifold has a zero eigenvalue; training grids may be linearly dependent");
    }

    ShapeManifold manifold(spec, std::move(mean), std::move(basis), std::move(eig));
    const double total = all.sum();
    double acc = 0.0;
    for (int c = 0; c < dim; ++c) {
        acc += all[c];
        manifold.cumulative_variance_.push_back(total > 0.0 ? acc / total : 1.0);
    }
    return manifold;
}

void ShapeManifold::check_code(const ShapeCode& z) const
{
    if (z.size() != dim()) {
        throw InputError("shape code has dimension " + std::to_string(z.size()) + ", manifold has " +
                         std::to_string(dim()));
    }
}

ShapeCode ShapeManifold::encode(const Eigen::VectorXd& grid_vector) const
{
    if (grid_vector.size() != static_cast<Eigen::Index>(grid_size())) {
        throw InputError("grid vector length does not match the manifold");
    }
    return basis_.transpose() * (grid_vector - mean_);
}

ShapeCode ShapeManifold::encode(const SdfGrid& grid) const
{
    if (!(grid.spec() == spec_)) {
        throw InputError("grid spec does not match the manifold");
    }
    const auto v = grid.values();
    return encode(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

Eigen::VectorXd ShapeManifold::decode(const ShapeCode& z) const
{
    check_code(z);
    return basis_ * z + mean_;
}

double ShapeManifold::phi(const Vec3& x, const ShapeCode& z, OutOfGrid policy, bool* clamped) const
{
    check_code(z);
    const Stencil s = make_stencil(spec_, x, policy);
    const int r = dim();
    double v = 0.0;
    for (int c = 0; c < 8; ++c) {
        const double* row_c = row(s.index[c]);
        double value = row_c[0];
        for (int i = 0; i < r; ++i) {
            value += row_c[i + 1] * z[i];
        }
        v += s.weight[c] * value;
    }
    if (clamped != nullptr) {
        *clamped = s.clamped;
    }
    return v + s.overshoot_norm();
}

Eigen::VectorXd ShapeManifold::phi_grad_z(const Vec3& x, OutOfGrid policy) const
{
    const Stencil s = make_stencil(spec_, x, policy);
    const int r = dim();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(r);
    for (int c = 0; c < 8; ++c) {
        const double* row_c = row(s.index[c]);
        for (int i = 0; i < r; ++i) {
            g[i] += s.weight[c] * row_c[i + 1];
        }
    }
    return g;
}

Vec3 ShapeManifold::phi_grad_x(const Vec3& x, const ShapeCode& z, OutOfGrid policy) const
{
    check_code(z);
    const Stencil s = make_stencil(spec_, x, policy);
    const int r = dim();
    Vec3 g = s.overshoot_gradient();
    for (int c = 0; c < 8; ++c) {
        const double* row_c = row(s.index[c]);
        double value = row_c[0];
        for (int i = 0; i < r; ++i) {
            value += row_c[i + 1] * z[i];
        }
        g += s.dweight[c] * value;
    }
    return g;
}

ShapeManifold::Evaluation ShapeManifold::evaluate(const Vec3& x, const ShapeCode& z) const
{
    const Stencil s = make_stencil(spec_, x, OutOfGrid::kExtend);
    const int r = dim();
    Evaluation e;
    e.grad_z = Eigen::VectorXd::Zero(r);
    e.grad_x = s.overshoot_gradient();
    e.clamped = s.clamped;
    double v = 0.0;
    for (int c = 0; c < 8; ++c) {
        const double* row_c = row(s.index[c]);
        double value = row_c[0];
        for (int i = 0; i < r; ++i) {
            value += row_c[i + 1] * z[i];
            e.grad_z[i] += s.weight[c] * row_c[i + 1];
        }
        v += s.weight[c] * value;
        e.grad_x += s.dweight[c] * value;
    }
    e.value = v + s.overshoot_norm();
    return e;
}

DecodedShape::DecodedShape(const ShapeManifold& manifold, const ShapeCode& z) : spec_(manifold.spec())
{
    const Eigen::VectorXd v = manifold.decode(z);
    values_.assign(v.data(), v.data() + v.size());
}

void write_manifold(const std::string& path, const ShapeManifold& manifold)
{
    auto os = detail::open_out(path);
    detail::put_magic(os, "SMAN");
    detail::put_u32(os, 1);
    detail::put_grid_spec(os, manifold.spec());
    detail::put_u32(os, static_cast<std::uint32_t>(manifold.dim()));
    for (Eigen::Index i = 0; i < manifold.mean().size(); ++i) {
        detail::put_f32(os, manifold.mean()[i]);
    }
    for (Eigen::Index i = 0; i < manifold.eigenvalues().size(); ++i) {
        detail::put_f32(os, manifold.eigenvalues()[i]);
    }
    const Eigen::MatrixXd& w = manifold.basis();
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            detail::put_f32(os, w(r, c));
        }
    }
    if (!os) {
        throw InputError("failed writing " + path);
    }
}

ShapeManifold read_manifold(const std::string& path)
{
    auto is = detail::open_in(path);
    detail::expect_magic(is, "SMAN", path);
    const std::uint32_t version = detail::get_u32(is, "version");
    if (version != 1) {
        throw InputError(path + ": unsupported manifold version " + std::to_string(version));
    }
    const GridSpec spec = detail::get_grid_spec(is);
    const auto r = static_cast<Eigen::Index>(detail::get_u32(is, "manifold dimension"));
    const auto m = static_cast<Eigen::Index>(spec.size());
    Eigen::VectorXd mean(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        mean[i] = detail::get_f32(is, "mean");
    }
    Eigen::VectorXd eig(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        eig[i] = detail::get_f32(is, "eigenvalues");
    }
    Eigen::MatrixXd basis(m, r);
    for (Eigen::Index c = 0; c < r; ++c) {
        for (Eigen::Index i = 0; i < m; ++i) {
            basis(i, c) = detail::get_f32(is, "basis");
        }
    }
    return ShapeManifold(spec, std::move(mean), std::move(basis), std::move(eig));
}

} // namespace samp
