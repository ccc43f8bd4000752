#pragma once

#include <optional>
#include <vector>

#include "bubbletk/cluster.hpp"

namespace bubbletk {

/// Householder reflection H with H e_{n+1} = pole (H is symmetric and an involution).
inline Matrix pole_frame(const Vector& pole) {
    const Eigen::Index d = pole.size();
    require(std::abs(pole.norm() - 1.0) < 1e-9, ErrorCode::NotOnSphere, "pole must be a unit vector");
    Vector v = -pole;
    v[d - 1] += 1.0;
    const double vv = v.squaredNorm();
    if (vv < 1e-30) return Matrix::Identity(d, d);
    return Matrix::Identity(d, d) - (2.0 / vv) * v * v.transpose();
}

/// Stereographic projection from `pole`, computed in the pole-adapted frame.
inline Vector stereo_to_plane(const Vector& p, const Vector& pole) {
    require(p.size() == pole.size(), ErrorCode::DimensionMismatch, "stereo_to_plane: dimension");
    require((p - pole).norm() > 1e-12, ErrorCode::OutOfRange, "stereo_to_plane: point is the pole");
    const Eigen::Index n = p.size() - 1;
    const Vector y = pole_frame(pole) * p;
    return y.head(n) / (1.0 - y[n]);
}

/// T(x) = (2x, |x|^2 - 1) / (|x|^2 + 1), mapped back from the pole-adapted frame.
inline Vector stereo_to_sphere(const Vector& x, const Vector& pole) {
    require(x.size() + 1 == pole.size(), ErrorCode::DimensionMismatch, "stereo_to_sphere: dimension");
    const double r2 = x.squaredNorm();
    Vector y(x.size() + 1);
    y << 2.0 * x / (r2 + 1.0), (r2 - 1.0) / (r2 + 1.0);
    return pole_frame(pole) * y;
}

/// Euclidean carrier of an interface: sphere (center, radius) or hyperplane
/// {<normal, x> = offset}.
struct EuclideanCarrier {
    bool is_plane = false;
    Vector center;
    double radius = 0.0;
    Vector normal;
    double offset = 0.0;
};

/// Euclidean picture of a spherical cluster under stereographic projection.
/// Keeps its spherical parent and offsets: the Euclidean parameters alone do
/// not determine the cluster when some k^R vanishes.
class EuclideanView {
public:
    EuclideanView(Cluster parent, Vector pole, int pole_cell)
        : parent_(std::move(parent)), pole_(std::move(pole)), pole_cell_(pole_cell) {
        frame_ = pole_frame(pole_);
        const int n = parent_.n();
        const Matrix cf = parent_.centers() * frame_;  // rows (H c_i)^T
        c_r_ = cf.leftCols(n);
        k_s_ = parent_.curvatures();
        k_r_ = k_s_ + cf.col(n);
    }

    const Cluster& parent() const { return parent_; }
    const Vector& pole() const { return pole_; }
    const Matrix& frame() const { return frame_; }
    int pole_cell() const { return pole_cell_; }
    int n() const { return parent_.n(); }
    int q() const { return parent_.q(); }
    const Matrix& euclid_centers() const { return c_r_; }
    const Vector& euclid_curvatures() const { return k_r_; }
    const Vector& spherical_offsets() const { return k_s_; }

    /// k^R_j |x|^2 + 2 <c^R_j, x> + 2 k^S_j - k^R_j
    Vector functionals(const Vector& x) const {
        require(x.size() == n(), ErrorCode::DimensionMismatch, "euclidean point has wrong dimension");
        return k_r_ * x.squaredNorm() + 2.0 * c_r_ * x + 2.0 * k_s_ - k_r_;
    }

    Membership cell_of(const Vector& x, double tie_tol = tol::tie) const {
        const Vector f = functionals(x) / (x.squaredNorm() + 1.0);
        const double lo = f.minCoeff();
        Membership m;
        for (int i = 0; i < q(); ++i)
            if (f[i] - lo <= tie_tol) m.cells.push_back(i);
        return m;
    }

    int cell_index_lowest(const Vector& x) const {
        Eigen::Index idx = 0;
        functionals(x).minCoeff(&idx);
        return static_cast<int>(idx);
    }

    Vector to_plane(const Vector& p) const { return stereo_to_plane(p, pole_); }
    Vector to_sphere(const Vector& x) const { return stereo_to_sphere(x, pole_); }

    EuclideanCarrier carrier(int i, int j, double eps = tol::geo) const {
        (void)interface_sphere(parent_, i, j);
        EuclideanCarrier c;
        const Vector cr = (c_r_.row(i) - c_r_.row(j)).transpose();
        const double kr = k_r_[i] - k_r_[j];
        const double ks = k_s_[i] - k_s_[j];
        if (std::abs(kr) < eps) {
            c.is_plane = true;
            c.normal = cr;
            c.offset = -ks;
        } else {
            c.center = -cr / kr;
            c.radius = 1.0 / std::abs(kr);
        }
        return c;
    }

    /// Unit normal c^R_ij + k^R_ij x, pointing from cell i into cell j.
    Vector normal(int i, int j, const Vector& x) const {
        return (c_r_.row(i) - c_r_.row(j)).transpose() + (k_r_[i] - k_r_[j]) * x;
    }

private:
    Cluster parent_;
    Vector pole_;
    int pole_cell_;
    Matrix frame_;
    Matrix c_r_;
    Vector k_r_;
    Vector k_s_;
};

namespace detail {

inline std::optional<int> strict_interior_cell(const Cluster& cl, const Vector& p, double margin) {
    const Vector f = cl.functionals(p);
    Eigen::Index idx = 0;
    const double lo = f.minCoeff(&idx);
    for (int l = 0; l < cl.q(); ++l)
        if (l != idx && f[l] - lo <= margin) return std::nullopt;
    return static_cast<int>(idx);
}

}  // namespace detail

/// Projects from a given pole, which must lie strictly inside some cell.
inline EuclideanView to_euclidean_at(const Cluster& cl, const Vector& pole, double margin = tol::mem) {
    require_on_sphere(pole, cl.n());
    const auto cell = detail::strict_interior_cell(cl, pole, margin);
    require(cell.has_value(), ErrorCode::NoValidPole, "pole lies on an interface");
    return EuclideanView(cl, pole, *cell);
}

/// Searches -c_i/|c_i| and then the coordinate directions for a pole strictly
/// inside a cell (inside `pole_cell_hint` when given). The hinted search
/// falls back to deterministic random candidates.
inline EuclideanView to_euclidean(const Cluster& cl, std::optional<int> pole_cell_hint = std::nullopt,
                                  double margin = tol::mem) {
    const int d = cl.n() + 1;
    std::vector<Vector> cand;
    for (int i = 0; i < cl.q(); ++i) {
        const Vector c = cl.center(i);
        if (c.norm() > 1e-12) cand.push_back(-c / c.norm());
    }
    for (int a = 0; a < d; ++a)
        for (double s : {1.0, -1.0}) {
            Vector e = Vector::Zero(d);
            e[a] = s;
            cand.push_back(e);
        }
    for (const auto& p : cand) {
        const auto cell = detail::strict_interior_cell(cl, p, margin);
        if (cell && (!pole_cell_hint || *cell == *pole_cell_hint)) return EuclideanView(cl, p, *cell);
    }
    if (pole_cell_hint) {
        require(*pole_cell_hint >= 0 && *pole_cell_hint < cl.q(), ErrorCode::OutOfRange, "pole cell out of range");
        // Deepest of a fixed batch of samples inside the hinted cell.
        std::optional<Vector> best;
        double best_gap = margin;
        for (std::uint64_t s = 0; s < 4096; ++s) {
            CounterRng rng(derive_seed(default_seed, 0x501E), s);
            const Vector p = rng.on_sphere(d);
            const Vector f = cl.functionals(p);
            double gap = INFINITY;
            for (int l = 0; l < cl.q(); ++l)
                if (l != *pole_cell_hint) gap = std::min(gap, f[l] - f[*pole_cell_hint]);
            if (gap > best_gap) {
                best_gap = gap;
                best = p;
            }
        }
        if (best) return EuclideanView(cl, *best, *pole_cell_hint);
    }
    throw Error(ErrorCode::NoValidPole, "no candidate pole lies strictly inside a cell");
}

/// Spherical cluster whose stereographic image from `pole` has the given
/// Euclidean parameters; `offsets` are the spherical curvatures k^S.
inline Cluster from_euclidean(const Matrix& c_r, const Vector& k_r, const Vector& offsets, const Vector& pole) {
    const Eigen::Index q = c_r.rows();
    const Eigen::Index n = c_r.cols();
    require(k_r.size() == q && offsets.size() == q && pole.size() == n + 1, ErrorCode::DimensionMismatch,
            "from_euclidean: inconsistent sizes");
    Matrix cf(q, n + 1);
    cf.leftCols(n) = c_r;
    cf.col(n) = k_r - offsets;
    const Matrix h = pole_frame(pole);
    return Cluster::recentered(cf * h, offsets);
}

/// Spherical cluster whose Euclidean cells are argmin_j [k_j |x|^2 + 2<c_j, x> + e_j].
inline Cluster from_euclidean_functionals(const Matrix& c_r, const Vector& k_r, const Vector& constants,
                                          const Vector& pole) {
    return from_euclidean(c_r, k_r, 0.5 * (constants + k_r), pole);
}

struct Halfspace {
    Vector normal;  // open halfspace {x : <normal, x> + offset < 0}
    double offset = 0.0;
    int other = -1;
};

struct BallPolyhedron {
    int cell = 0;
    std::vector<Halfspace> halfspaces;
    bool contains(const Vector& x) const {
        for (const auto& h : halfspaces)
            if (h.normal.dot(x) + h.offset >= 0.0) return false;
        return true;
    }
};

/// Cells of a cluster symmetric across the hyperplane N^perp, orthogonally
/// projected to the equatorial ball.
struct BallView {
    Vector north;
    Matrix basis;  // (n+1) x n, orthonormal basis of N^perp
    std::vector<BallPolyhedron> cells;

    Vector lift(const Vector& x) const {
        return basis * x + std::sqrt(std::max(0.0, 1.0 - x.squaredNorm())) * north;
    }
    Vector project(const Vector& p) const { return basis.transpose() * p; }
    std::optional<int> cell_of(const Vector& x) const {
        for (const auto& c : cells)
            if (c.contains(x)) return c.cell;
        return std::nullopt;
    }
};

inline BallView ball_projection(const Cluster& cl, const Vector& north, double eps = tol::geo) {
    require_on_sphere(north, cl.n());
    for (int i = 0; i < cl.q(); ++i) {
        const double d = cl.center(i).dot(north);
        require(std::abs(d) < eps, ErrorCode::SymmetryViolated,
                "ball_projection: <c_" + std::to_string(i) + ", N> = " + std::to_string(d));
    }
    BallView v;
    v.north = north;
    v.basis = pole_frame(north).leftCols(cl.n());
    for (int i = 0; i < cl.q(); ++i) {
        BallPolyhedron poly;
        poly.cell = i;
        for (int j = 0; j < cl.q(); ++j) {
            if (j == i) continue;
            poly.halfspaces.push_back({v.basis.transpose() * cl.quasi_center(i, j), cl.curvature(i, j), j});
        }
        v.cells.push_back(std::move(poly));
    }
    return v;
}

}  // namespace bubbletk
