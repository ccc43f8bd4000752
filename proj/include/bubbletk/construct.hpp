#pragma once

#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bubbletk/cluster.hpp"
#include "bubbletk/measure.hpp"
#include "bubbletk/minkowski.hpp"

namespace bubbletk {

namespace detail {

inline void require_cell_count(int n, int q) {
    require(n >= 1, ErrorCode::OutOfRange, "n must be at least 1");
    require(q >= 2 && q <= n + 2, ErrorCode::OutOfRange,
            "q = " + std::to_string(q) + " outside [2, n+2] for n = " + std::to_string(n));
}

inline Matrix pad_columns(const Matrix& m, int cols) {
    Matrix out = Matrix::Zero(m.rows(), cols);
    out.leftCols(m.cols()) = m;
    return out;
}

}  // namespace detail

/// Regular simplex with unit edges, centered at the origin, in the first q-1
/// coordinates of R^{n+1}; all curvatures zero.
inline Cluster equal_volume_bubble(int n, int q) {
    detail::require_cell_count(n, q);
    const Matrix c = zero_sum_basis(q) / std::sqrt(2.0);
    return Cluster(detail::pad_columns(c, n + 1), Vector::Zero(q));
}

/// Standard bubble with curvature parameters k, from the factorization
/// CC^T = P/2 + kk^T. Eigenpairs are taken in descending order and each
/// eigenvector is signed so its first nonzero entry is positive.
inline Cluster bubble_from_curvatures(int n, const Vector& k) {
    const int q = static_cast<int>(k.size());
    detail::require_cell_count(n, q);
    require(std::abs(k.sum()) < tol::geo, ErrorCode::ConventionViolation, "curvatures must sum to zero");
    const Matrix g = 0.5 * zero_sum_projector(q) + k * k.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    Matrix c = Matrix::Zero(q, n + 1);
    for (int col = 0; col < q - 1; ++col) {
        const int src = q - 1 - col;
        Vector v = es.eigenvectors().col(src);
        for (int r = 0; r < q; ++r)
            if (std::abs(v[r]) > 1e-12) {
                if (v[r] < 0) v = -v;
                break;
            }
        c.col(col) = v * std::sqrt(std::max(0.0, es.eigenvalues()[src]));
    }
    c.rowwise() -= c.colwise().mean();
    return Cluster(c, k);
}

/// Same Gram matrix as bubble_from_curvatures, with C the symmetric square root
/// expressed in the zero-sum basis. Continuous in k, which the volume solver needs.
inline Cluster bubble_from_curvatures_smooth(int n, const Vector& k) {
    const int q = static_cast<int>(k.size());
    detail::require_cell_count(n, q);
    require(std::abs(k.sum()) < tol::geo, ErrorCode::ConventionViolation, "curvatures must sum to zero");
    const Matrix g = 0.5 * zero_sum_projector(q) + k * k.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sq = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    Matrix c = sq * zero_sum_basis(q);
    c.rowwise() -= c.colwise().mean();
    return Cluster(detail::pad_columns(c, n + 1), k);
}

struct SolverStep {
    int iteration = 0;
    double residual = 0.0;
    double damping = 1.0;
    Vector curvatures;
};

struct VolumeSolution {
    Cluster cluster;
    bool converged = false;
    std::vector<SolverStep> trace;
    std::string diagnostic;
};

struct VolumeSolverOptions {
    std::size_t mc_samples = 500000;
    std::uint64_t seed = default_seed;
    int max_iter = 15;
    double tol_v = 1e-4;
    double fd_step = 1e-3;
};

/// Damped Newton on k in the zero-sum subspace for prescribed cell volumes,
/// with one fixed sample set reused for every evaluation.
inline VolumeSolution bubble_from_volumes(int n, const Vector& v, const VolumeSolverOptions& opt = {}) {
    const int q = static_cast<int>(v.size());
    detail::require_cell_count(n, q);
    require((v.array() > 0.0).all() && std::abs(v.sum() - 1.0) < 1e-9, ErrorCode::OutOfRange,
            "target volumes must be positive and sum to 1");
    const int d = n + 1;
    const std::uint64_t sub = derive_seed(opt.seed, 0x801);
    Matrix pts(d, static_cast<Eigen::Index>(opt.mc_samples));
    for (std::size_t s = 0; s < opt.mc_samples; ++s) {
        CounterRng rng(sub, s);
        pts.col(static_cast<Eigen::Index>(s)) = rng.on_sphere(d);
    }
    const Matrix h = zero_sum_basis(q);
    auto volumes = [&](const Vector& z) {
        const Cluster cl = bubble_from_curvatures_smooth(n, h * z);
        const Matrix f = (cl.centers() * pts).colwise() + cl.curvatures();
        auto counts = map_blocks(opt.mc_samples, [&](std::size_t lo, std::size_t hi) {
            Vector c = Vector::Zero(q);
            for (std::size_t s = lo; s < hi; ++s) {
                Eigen::Index idx = 0;
                f.col(static_cast<Eigen::Index>(s)).minCoeff(&idx);
                c[idx] += 1.0;
            }
            return c;
        });
        Vector tot = Vector::Zero(q);
        for (const auto& c : counts) tot += c;
        return Vector(tot / static_cast<double>(opt.mc_samples));
    };
    auto residual = [&](const Vector& z) { return Vector(volumes(z) - v); };

    Vector z = Vector::Zero(q - 1);
    Vector r = residual(z);
    VolumeSolution sol{bubble_from_curvatures_smooth(n, h * z), false, {}, {}};
    sol.trace.push_back({0, r.cwiseAbs().maxCoeff(), 1.0, h * z});
    for (int it = 1; it <= opt.max_iter; ++it) {
        if (r.cwiseAbs().maxCoeff() < opt.tol_v) {
            sol.converged = true;
            break;
        }
        Matrix jac(q - 1, q - 1);
        for (int a = 0; a < q - 1; ++a) {
            Vector e = Vector::Zero(q - 1);
            e[a] = opt.fd_step;
            jac.col(a) = h.transpose() * (residual(z + e) - residual(z - e)) / (2.0 * opt.fd_step);
        }
        const Vector dz = jac.colPivHouseholderQr().solve(-(h.transpose() * r));
        double lambda = 1.0;
        Vector z_new = z + dz;
        Vector r_new = residual(z_new);
        const double cur = r.cwiseAbs().maxCoeff();
        for (int halve = 0; halve < 12 && r_new.cwiseAbs().maxCoeff() > cur; ++halve) {
            lambda *= 0.5;
            z_new = z + lambda * dz;
            r_new = residual(z_new);
        }
        if (r_new.cwiseAbs().maxCoeff() > cur) {
            sol.diagnostic = "no damped step reduced the residual at iteration " + std::to_string(it);
            break;
        }
        z = z_new;
        r = r_new;
        sol.trace.push_back({it, r.cwiseAbs().maxCoeff(), lambda, h * z});
    }
    if (!sol.converged && r.cwiseAbs().maxCoeff() < opt.tol_v) sol.converged = true;
    sol.cluster = bubble_from_curvatures_smooth(n, h * z);
    if (!sol.converged && sol.diagnostic.empty())
        sol.diagnostic = "residual " + std::to_string(r.cwiseAbs().maxCoeff()) + " after " +
                         std::to_string(opt.max_iter) + " iterations";
    return sol;
}

/// Image of the cluster under the Möbius map induced by U, re-centered.
inline Cluster apply_mobius(const Cluster& cl, const LorentzMatrix& u) {
    require(u.dim() == cl.n() + 2, ErrorCode::DimensionMismatch, "apply_mobius: Lorentz matrix has wrong size");
    return Cluster::from_homogeneous(cl.homogeneous() * u.matrix().transpose());
}

inline Cluster apply_mobius(const Cluster& cl, const Matrix& u) { return apply_mobius(cl, LorentzMatrix(u)); }

/// Rotation by `angle` in the coordinate plane (a, b) of R^{n+1}.
inline Matrix plane_rotation(int dim, int a, int b, double angle) {
    require(a != b && a >= 0 && b >= 0 && a < dim && b < dim, ErrorCode::OutOfRange, "plane_rotation: bad axes");
    Matrix r = Matrix::Identity(dim, dim);
    r(a, a) = r(b, b) = std::cos(angle);
    r(a, b) = -std::sin(angle);
    r(b, a) = std::sin(angle);
    return r;
}

/// Haar-random rotation from a seeded Gaussian matrix (QR with sign fix).
inline Matrix random_rotation(int dim, std::uint64_t seed) {
    CounterRng rng(seed, 0);
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix qm = qr.householderQ();
    const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i)
        if (rr(i, i) < 0) qm.col(i) *= -1.0;
    if (qm.determinant() < 0) qm.col(0) *= -1.0;
    return qm;
}

/// Standard bubble symmetric across e_{n+1}^perp: curvatures k placed in the
/// first q-1 coordinates, so every c_i is orthogonal to N = e_{n+1}.
inline Cluster perpendicular_bubble(int n, const Vector& k) {
    const int q = static_cast<int>(k.size());
    require(q - 1 <= n, ErrorCode::OutOfRange, "perpendicular_bubble: need n >= q-1");
    const Cluster base = bubble_from_curvatures(q - 2 >= 1 ? q - 2 : 1, k);
    Matrix c = Matrix::Zero(q, n + 1);
    c.leftCols(q - 1) = base.centers().leftCols(q - 1);
    return Cluster(c, k);
}

}  // namespace bubbletk
