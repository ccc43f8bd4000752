#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bubbletk/core.hpp"

// Linear algebra on Minkowski space R^{n+2} with signature (n+1, 1). The last
// coordinate is the timelike one; J = diag(1, ..., 1, -1).

namespace bubbletk {

/// Vector of length n+2. Kept as a plain Eigen vector; the metric lives in the functions.
using MinkowskiVector = Vector;

inline Matrix minkowski_metric(int dim) {
    Matrix j = Matrix::Identity(dim, dim);
    j(dim - 1, dim - 1) = -1.0;
    return j;
}

inline double minkowski_dot(const MinkowskiVector& x, const MinkowskiVector& y) {
    require(x.size() == y.size() && x.size() >= 1, ErrorCode::DimensionMismatch,
            "minkowski_dot: vectors of length " + std::to_string(x.size()) + " and " +
                std::to_string(y.size()));
    const Eigen::Index last = x.size() - 1;
    return x.head(last).dot(y.head(last)) - x[last] * y[last];
}

struct LorentzCheck {
    bool ok = false;
    double residual = 0.0;
    bool orthochronous = false;
};

/// Report-style membership test for O_1^+(n+2).
inline LorentzCheck is_lorentz(const Matrix& u, double tol = tol::lorentz) {
    LorentzCheck out;
    if (u.rows() != u.cols() || u.rows() < 2) {
        out.residual = INFINITY;
        return out;
    }
    const Matrix j = minkowski_metric(static_cast<int>(u.rows()));
    out.residual = max_abs(u.transpose() * j * u - j);
    out.orthochronous = u(u.rows() - 1, u.cols() - 1) >= 1.0 - tol;
    out.ok = out.residual < tol && out.orthochronous;
    return out;
}

/// Orthochronous Lorentz transformation. Construction validates membership.
class LorentzMatrix {
public:
    explicit LorentzMatrix(Matrix m, double tol = tol::lorentz) : m_(std::move(m)) {
        const auto chk = is_lorentz(m_, tol);
        require(chk.ok, chk.residual < tol ? ErrorCode::NotOrthochronous : ErrorCode::NotLorentz,
                "matrix is not in O_1^+(n+2): residual " + std::to_string(chk.residual));
    }

    static LorentzMatrix identity(int dim) { return LorentzMatrix(Matrix::Identity(dim, dim)); }

    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    MinkowskiVector operator*(const MinkowskiVector& x) const { return m_ * x; }
    LorentzMatrix operator*(const LorentzMatrix& o) const { return LorentzMatrix(m_ * o.m_, 1e-8); }
    LorentzMatrix inverse() const {
        const Matrix j = minkowski_metric(dim());
        return LorentzMatrix(j * m_.transpose() * j);
    }

    /// Induced Möbius map on S^n: p -> [U (p, 1)]_+.
    Vector act_on_sphere(const Vector& p) const {
        require(p.size() + 1 == m_.rows(), ErrorCode::DimensionMismatch, "act_on_sphere: dimension");
        Vector x(p.size() + 1);
        x << p, 1.0;
        const Vector y = m_ * x;
        return y.head(p.size()) / y[p.size()];
    }

private:
    Matrix m_;
};

/// Spatial rotation R (orthogonal (n+1)x(n+1)) embedded as R ⊕ 1.
inline LorentzMatrix spatial_rotation(const Matrix& r) {
    const Eigen::Index d = r.rows();
    Matrix u = Matrix::Identity(d + 1, d + 1);
    u.topLeftCorner(d, d) = r;
    return LorentzMatrix(u);
}

/// Generator whose exponential is the boost in direction theta.
inline Matrix boost_generator(const Vector& theta) {
    require(theta.norm() > 0.0, ErrorCode::ZeroVector, "boost_generator: theta must be nonzero");
    const Eigen::Index d = theta.size() + 1;
    Matrix b = Matrix::Zero(d, d);
    b.col(d - 1).head(d - 1) = theta;
    b.row(d - 1).head(d - 1) = theta.transpose();
    return b;
}

/// Matrix exponential by scaling and squaring with a diagonal [6/6] Padé approximant.
inline Matrix expm(const Matrix& a) {
    static constexpr double c[7] = {1.0,
                                    1.0 / 2.0,
                                    5.0 / 44.0,
                                    1.0 / 66.0,
                                    1.0 / 792.0,
                                    1.0 / 15840.0,
                                    1.0 / 665280.0};
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > 0.5) s = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Matrix x = a / std::ldexp(1.0, s);
    const Eigen::Index d = a.rows();
    Matrix num = Matrix::Identity(d, d) * c[0];
    Matrix den = Matrix::Identity(d, d) * c[0];
    Matrix pw = Matrix::Identity(d, d);
    for (int k = 1; k <= 6; ++k) {
        pw = pw * x;
        num += c[k] * pw;
        den += ((k % 2) ? -c[k] : c[k]) * pw;
    }
    Matrix r = den.partialPivLu().solve(num);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

/// Closed form of exp(t B) for B = boost_generator(theta).
inline Matrix boost_closed_form(const Vector& theta, double t) {
    const double s = theta.norm();
    require(s > 0.0, ErrorCode::ZeroVector, "boost_closed_form: theta must be nonzero");
    const Eigen::Index d = theta.size() + 1;
    Vector th = Vector::Zero(d);
    th.head(d - 1) = theta / s;
    Vector e = Vector::Zero(d);
    e[d - 1] = 1.0;
    const Matrix plane = th * th.transpose() + e * e.transpose();
    const Matrix skew = th * e.transpose() + e * th.transpose();
    return Matrix::Identity(d, d) + (std::cosh(t * s) - 1.0) * plane + std::sinh(t * s) * skew;
}

inline LorentzMatrix boost(const Vector& theta, double t) {
    return LorentzMatrix(boost_closed_form(theta, t));
}

/// Symmetric q x q form on E^{(q-1)}: symmetric, rows summing to zero.
class MinkowskiGram {
public:
    explicit MinkowskiGram(Matrix g, double eps = tol::geo) : g_(std::move(g)) {
        require(g_.rows() == g_.cols(), ErrorCode::DimensionMismatch, "gram: not square");
        require(max_abs(g_ - g_.transpose()) < eps, ErrorCode::ConventionViolation, "gram: not symmetric");
        require(g_.rows() == 0 || g_.rowwise().sum().cwiseAbs().maxCoeff() < eps,
                ErrorCode::ConventionViolation, "gram: rows do not sum to zero");
    }
    const Matrix& matrix() const { return g_; }
    int size() const { return static_cast<int>(g_.rows()); }
    double operator()(int i, int j) const { return g_(i, j); }

private:
    Matrix g_;
};

/// Homogeneous parameters: row i is ck_i = (c_i, -k_i).
inline Matrix homogeneous_params(const Matrix& centers, const Vector& curvatures) {
    require(centers.rows() == curvatures.size(), ErrorCode::DimensionMismatch, "homogeneous_params: q mismatch");
    Matrix ck(centers.rows(), centers.cols() + 1);
    ck.leftCols(centers.cols()) = centers;
    ck.col(centers.cols()) = -curvatures;
    return ck;
}

inline MinkowskiGram gram(const Matrix& ck, double eps = tol::geo) {
    if (ck.rows() == 0) return MinkowskiGram(Matrix(0, 0));
    const double drift = ck.colwise().sum().cwiseAbs().maxCoeff();
    require(drift < eps, ErrorCode::ConventionViolation,
            "gram: parameters do not sum to zero (max deviation " + std::to_string(drift) + ")");
    const Matrix j = minkowski_metric(static_cast<int>(ck.cols()));
    Matrix g = ck * j * ck.transpose();
    g = 0.5 * (g + g.transpose()).eval();
    return MinkowskiGram(std::move(g), 10 * eps);
}

namespace detail {

inline int numerical_rank(const Matrix& m, double rel = tol::rank_rel) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > rel * sv[0]) ++r;
    return r;
}

/// Minkowski-orthonormal basis of the J-orthogonal complement of the row space
/// of `rows`. Spacelike vectors first; the timelike one (if any) is last.
struct Complement {
    Matrix basis;               // N x (N - r)
    std::vector<int> signs;     // +1 / -1 per column
};

inline Complement minkowski_complement(const Matrix& rows) {
    const Eigen::Index n = rows.cols();
    const Eigen::Index r = rows.rows();
    const Matrix j = minkowski_metric(static_cast<int>(n));
    Eigen::JacobiSVD<Matrix> svd(rows * j, Eigen::ComputeFullV);
    const Matrix v = svd.matrixV().rightCols(n - r);
    const Matrix metric = v.transpose() * j * v;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (metric + metric.transpose()));
    Complement out;
    out.basis.resize(n, n - r);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n - r));
    std::iota(order.begin(), order.end(), 0);
    // eigenvalues ascending: negatives first; emit positives first, negatives last.
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const bool pa = es.eigenvalues()[a] > 0, pb = es.eigenvalues()[b] > 0;
        if (pa != pb) return pa;
        return a < b;
    });
    for (Eigen::Index k = 0; k < n - r; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        const double lam = es.eigenvalues()[src];
        require(std::abs(lam) > 1e-12, ErrorCode::RankDeficient, "align: degenerate complement");
        out.basis.col(k) = v * es.eigenvectors().col(src) / std::sqrt(std::abs(lam));
        out.signs.push_back(lam > 0 ? 1 : -1);
    }
    return out;
}

}  // namespace detail

/// Finds U in O_1^+(n+2) with U ck1_i = ck2_i for all i, given equal Minkowski
/// Gram matrices of full rank on E^{(q-1)}.
inline LorentzMatrix align(const Matrix& ck1, const Matrix& ck2, double tol = 1e-9, double tol_out = 1e-8) {
    require(ck1.rows() == ck2.rows() && ck1.cols() == ck2.cols(), ErrorCode::DimensionMismatch,
            "align: parameter shapes differ");
    const int q = static_cast<int>(ck1.rows());
    const int dim = static_cast<int>(ck1.cols());
    require(q >= 2 && q <= dim, ErrorCode::OutOfRange, "align: need 2 <= q <= n+2");
    const Matrix g1 = gram(ck1, 1e-8).matrix();
    const Matrix g2 = gram(ck2, 1e-8).matrix();
    const double mismatch = max_abs(g1 - g2);
    require(mismatch < tol, ErrorCode::GramMismatch, "align: Gram matrices differ by " + std::to_string(mismatch));
    require(detail::numerical_rank(g1) == q - 1, ErrorCode::RankDeficient, "align: Gram matrix not full rank on E^(q-1)");
    require(detail::numerical_rank(ck1) == q - 1, ErrorCode::RankDeficient, "align: first parameter list rank != q-1");
    require(detail::numerical_rank(ck2) == q - 1, ErrorCode::RankDeficient, "align: second parameter list rank != q-1");

    std::vector<int> picked;
    for (int i = 0; i < q && static_cast<int>(picked.size()) < q - 1; ++i) {
        Matrix trial(static_cast<Eigen::Index>(picked.size()) + 1, dim);
        for (std::size_t k = 0; k < picked.size(); ++k) trial.row(static_cast<Eigen::Index>(k)) = ck1.row(picked[k]);
        trial.row(trial.rows() - 1) = ck1.row(i);
        if (detail::numerical_rank(trial) == trial.rows()) picked.push_back(i);
    }
    const int r = static_cast<int>(picked.size());
    Matrix ar(r, dim), br(r, dim);
    for (int k = 0; k < r; ++k) {
        ar.row(k) = ck1.row(picked[static_cast<std::size_t>(k)]);
        br.row(k) = ck2.row(picked[static_cast<std::size_t>(k)]);
    }
    const auto ca = detail::minkowski_complement(ar);
    auto cb = detail::minkowski_complement(br);
    require(ca.signs == cb.signs, ErrorCode::GramMismatch, "align: complement signatures differ");

    Matrix x(dim, dim), y(dim, dim);
    x.leftCols(r) = ar.transpose();
    x.rightCols(dim - r) = ca.basis;
    auto build = [&]() {
        y.leftCols(r) = br.transpose();
        y.rightCols(dim - r) = cb.basis;
        return Matrix(y * x.inverse());
    };
    Matrix u = build();
    if (u(dim - 1, dim - 1) < 0.0) {
        require(!cb.signs.empty() && cb.signs.back() < 0, ErrorCode::NotOrthochronous,
                "align: no orthochronous transformation maps the parameters (complement is spacelike)");
        cb.basis.col(cb.basis.cols() - 1) *= -1.0;
        u = build();
    }
    double worst = 0.0;
    for (int i = 0; i < q; ++i) worst = std::max(worst, (u * ck1.row(i).transpose() - ck2.row(i).transpose()).norm());
    require(worst < tol_out, ErrorCode::PreconditionFailed,
            "align: reconstruction error " + std::to_string(worst) + " exceeds tolerance");
    return LorentzMatrix(u, 1e-8);
}

}  // namespace bubbletk
