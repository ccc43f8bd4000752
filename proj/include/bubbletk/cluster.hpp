#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "bubbletk/core.hpp"
#include "bubbletk/minkowski.hpp"
#include "bubbletk/rng.hpp"

namespace bubbletk {

/// Spherical Voronoi cluster on S^n, given by quasi-center parameters c_i in
/// R^{n+1} (rows of `centers`) and curvature parameters k_i. Cell i is the set
/// of points where <c_i, p> + k_i is the strict minimum. Both parameter lists
/// sum to zero.
class Cluster {
public:
    Cluster(Matrix centers, Vector curvatures, double eps = tol::geo)
        : c_(std::move(centers)), k_(std::move(curvatures)) {
        require(c_.rows() == k_.size(), ErrorCode::DimensionMismatch,
                "cluster: " + std::to_string(c_.rows()) + " centers but " + std::to_string(k_.size()) +
                    " curvatures");
        require(c_.rows() >= 2, ErrorCode::OutOfRange, "cluster: need at least 2 cells");
        require(c_.cols() >= 2, ErrorCode::OutOfRange, "cluster: need n >= 1");
        require(q() <= n() + 2, ErrorCode::OutOfRange,
                "cluster: q = " + std::to_string(q()) + " exceeds n+2 = " + std::to_string(n() + 2));
        const double dc = c_.colwise().sum().cwiseAbs().maxCoeff();
        const double dk = std::abs(k_.sum());
        require(dc < eps, ErrorCode::ConventionViolation,
                "cluster: centers do not sum to zero (max deviation " + std::to_string(dc) + ")");
        require(dk < eps, ErrorCode::ConventionViolation,
                "cluster: curvatures do not sum to zero (deviation " + std::to_string(dk) + ")");
    }

    /// Subtracts the means first. Membership is unchanged by a common shift.
    static Cluster recentered(Matrix centers, Vector curvatures) {
        require(centers.rows() == curvatures.size() && centers.rows() > 0, ErrorCode::DimensionMismatch,
                "cluster: q mismatch");
        const Eigen::RowVectorXd mc = centers.colwise().mean();
        centers.rowwise() -= mc;
        curvatures.array() -= curvatures.mean();
        return Cluster(std::move(centers), std::move(curvatures));
    }

    static Cluster from_homogeneous(const Matrix& ck) {
        const Eigen::Index d = ck.cols() - 1;
        return recentered(ck.leftCols(d), -ck.col(d));
    }

    int n() const { return static_cast<int>(c_.cols()) - 1; }
    int q() const { return static_cast<int>(c_.rows()); }
    const Matrix& centers() const { return c_; }
    const Vector& curvatures() const { return k_; }
    Vector center(int i) const { return c_.row(i).transpose(); }
    double curvature(int i) const { return k_[i]; }

    Vector quasi_center(int i, int j) const { return (c_.row(i) - c_.row(j)).transpose(); }
    double curvature(int i, int j) const { return k_[i] - k_[j]; }

    double functional(int i, const Vector& p) const { return c_.row(i).dot(p) + k_[i]; }
    Vector functionals(const Vector& p) const { return c_ * p + k_; }

    Matrix homogeneous() const { return homogeneous_params(c_, k_); }

    /// |c_ij|^2 - 1 - k_ij^2; zero on every non-empty interface.
    double pair_defect(int i, int j) const {
        const double k = curvature(i, j);
        return quasi_center(i, j).squaredNorm() - 1.0 - k * k;
    }

private:
    Matrix c_;
    Vector k_;
};

inline bool operator==(const Cluster& a, const Cluster& b) {
    return a.centers() == b.centers() && a.curvatures() == b.curvatures();
}

inline void require_on_sphere(const Vector& p, int n, double eps = tol::geo) {
    require(p.size() == n + 1, ErrorCode::DimensionMismatch, "point has wrong dimension");
    require(std::abs(p.norm() - 1.0) < eps, ErrorCode::NotOnSphere,
            "point is not on the unit sphere (|p| = " + std::to_string(p.norm()) + ")");
}

/// Result of a membership query: one index, or every index tied at the minimum.
struct Membership {
    std::vector<int> cells;
    bool is_tie() const { return cells.size() > 1; }
    int cell() const { return cells.front(); }
};

inline Membership cell_of(const Cluster& cl, const Vector& p, double tie_tol = tol::tie) {
    require_on_sphere(p, cl.n());
    const Vector f = cl.functionals(p);
    const double lo = f.minCoeff();
    Membership m;
    for (int i = 0; i < cl.q(); ++i)
        if (f[i] - lo <= tie_tol) m.cells.push_back(i);
    return m;
}

/// Index of the minimal functional, ties resolved to the lowest index.
inline int cell_index_lowest(const Cluster& cl, const Vector& p) {
    int best = 0;
    double bv = cl.functional(0, p);
    for (int i = 1; i < cl.q(); ++i) {
        const double v = cl.functional(i, p);
        if (v < bv) {
            bv = v;
            best = i;
        }
    }
    return best;
}

/// Carrying (n-1)-sphere of the interface between cells i and j, inside R^{n+1}.
struct InterfaceSphere {
    int i = 0, j = 0;
    Vector quasi_center;
    double curvature = 0.0;
    Vector euclid_center;
    double euclid_radius = 0.0;
};

inline InterfaceSphere interface_sphere(const Cluster& cl, int i, int j, double eps = tol::geo) {
    require(i != j && i >= 0 && j >= 0 && i < cl.q() && j < cl.q(), ErrorCode::OutOfRange,
            "interface_sphere: bad indices");
    const double defect = cl.pair_defect(i, j);
    require(std::abs(defect) < eps, ErrorCode::MalformedPair,
            "pair (" + std::to_string(i) + "," + std::to_string(j) + ") violates |c_ij|^2 = 1 + k_ij^2 by " +
                std::to_string(defect));
    InterfaceSphere s;
    s.i = i;
    s.j = j;
    s.quasi_center = cl.quasi_center(i, j);
    s.curvature = cl.curvature(i, j);
    const double k = s.curvature;
    s.euclid_center = -k * s.quasi_center / (1.0 + k * k);
    s.euclid_radius = 1.0 / std::sqrt(1.0 + k * k);
    return s;
}

/// Intersection of S^n with the affine subspace {x : M x = b}: a round sphere
/// center + radius * basis * u, u ranging over the unit sphere of R^{basis.cols()}.
struct SphereSection {
    Vector center;
    double radius = 0.0;
    Matrix basis;
    bool empty = true;

    int dim() const { return static_cast<int>(basis.cols()) - 1; }
    Vector point(const Vector& u) const { return center + radius * (basis * u); }
};

inline SphereSection sphere_section(const Matrix& m, const Vector& b) {
    const Eigen::Index dim = m.cols();
    const Eigen::Index rows = m.rows();
    require(rows >= 1 && rows < dim, ErrorCode::DimensionMismatch, "sphere_section: bad constraint count");
    // Unpivoted QR keeps the tangent frame continuous in the constraints.
    Eigen::HouseholderQR<Matrix> qr(m.transpose());
    const Matrix r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
    const double scale = r.diagonal().cwiseAbs().maxCoeff();
    require(r.diagonal().cwiseAbs().minCoeff() > 1e-12 * std::max(1.0, scale), ErrorCode::DegenerateIntersection,
            "sphere_section: constraint normals are linearly dependent");
    SphereSection s;
    const Matrix gram = m * m.transpose();
    s.center = m.transpose() * gram.ldlt().solve(b);
    const Matrix q = qr.householderQ();
    s.basis = q.rightCols(dim - rows);
    const double r2 = 1.0 - s.center.squaredNorm();
    if (r2 <= 0.0) return s;
    s.radius = std::sqrt(r2);
    s.empty = false;
    return s;
}

namespace detail {

/// Section carrying the common boundary of the listed cells (all functionals
/// equal). Redundant equations are dropped; inconsistent ones give an empty section.
inline SphereSection meeting_section(const Cluster& cl, const std::vector<int>& idx) {
    const int m = static_cast<int>(idx.size()) - 1;
    Matrix a(m, cl.n() + 1);
    Vector b(m);
    for (int r = 0; r < m; ++r) {
        a.row(r) = cl.quasi_center(idx[0], idx[r + 1]).transpose();
        b[r] = -cl.curvature(idx[0], idx[r + 1]);
    }
    std::vector<int> keep;
    for (int r = 0; r < m; ++r) {
        Matrix trial(static_cast<Eigen::Index>(keep.size()) + 1, a.cols());
        for (std::size_t s = 0; s < keep.size(); ++s) trial.row(static_cast<Eigen::Index>(s)) = a.row(keep[s]);
        trial.row(trial.rows() - 1) = a.row(r);
        Eigen::ColPivHouseholderQR<Matrix> qr(trial.transpose());
        qr.setThreshold(1e-12);
        if (qr.rank() == trial.rows()) keep.push_back(r);
    }
    if (static_cast<int>(keep.size()) == m) return sphere_section(a, b);
    Matrix ak(static_cast<Eigen::Index>(keep.size()), a.cols());
    Vector bk(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t s = 0; s < keep.size(); ++s) {
        ak.row(static_cast<Eigen::Index>(s)) = a.row(keep[s]);
        bk[static_cast<Eigen::Index>(s)] = b[keep[s]];
    }
    const Vector x = ak.completeOrthogonalDecomposition().solve(bk);
    if ((a * x - b).cwiseAbs().maxCoeff() > tol::geo) return SphereSection{};
    return sphere_section(ak, bk);
}

/// True if the listed cells carry the minimal functional values at p (equal
/// within eps_geo) and all other cells exceed them by more than eps_mem.
inline bool is_meeting_witness(const Cluster& cl, const std::vector<int>& idx, const Vector& p, double eps_geo,
                               double eps_mem) {
    const Vector f = cl.functionals(p);
    double lo = INFINITY, hi = -INFINITY;
    for (int i : idx) {
        lo = std::min(lo, f[i]);
        hi = std::max(hi, f[i]);
    }
    if (hi - lo > eps_geo) return false;
    for (int l = 0; l < cl.q(); ++l) {
        if (std::find(idx.begin(), idx.end(), l) != idx.end()) continue;
        if (f[l] - hi <= eps_mem) return false;
    }
    return true;
}

inline std::uint64_t index_set_tag(std::vector<int> idx) {
    std::sort(idx.begin(), idx.end());
    std::uint64_t tag = 0x1234;
    for (int i : idx) tag = splitmix64(tag ^ static_cast<std::uint64_t>(i + 1));
    return tag;
}

/// Minimum-norm point of {E x = e, G x >= g}, by enumeration of active sets.
/// Exact for the small systems used here (at most ~12 inequalities).
inline std::optional<Vector> min_norm_feasible(const Matrix& e_mat, const Vector& e_rhs, const Matrix& g_mat,
                                               const Vector& g_rhs) {
    const Eigen::Index d = std::max(e_mat.cols(), g_mat.cols());
    const int mg = static_cast<int>(g_mat.rows());
    require(mg <= 16, ErrorCode::OutOfRange, "min_norm_feasible: too many constraints");
    std::optional<Vector> best;
    for (std::uint32_t mask = 0; mask < (1u << mg); ++mask) {
        const int act = __builtin_popcount(mask);
        const Eigen::Index rows = e_mat.rows() + act;
        Vector x = Vector::Zero(d);
        if (rows > 0) {
            Matrix a(rows, d);
            Vector b(rows);
            a.topRows(e_mat.rows()) = e_mat;
            b.head(e_mat.rows()) = e_rhs;
            Eigen::Index r = e_mat.rows();
            for (int l = 0; l < mg; ++l)
                if (mask & (1u << l)) {
                    a.row(r) = g_mat.row(l);
                    b[r] = g_rhs[l];
                    ++r;
                }
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
            x = cod.solve(b);
            if ((a * x - b).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) continue;
        }
        bool ok = true;
        for (int l = 0; l < mg && ok; ++l) ok = g_mat.row(l).dot(x) >= g_rhs[l] - 1e-10;
        if (!ok) continue;
        if (!best || x.squaredNorm() < best->squaredNorm()) best = x;
    }
    return best;
}

}  // namespace detail

/// Outcome of a sampling probe for a non-empty interface or meeting set.
struct Probe {
    bool found = false;
    std::optional<Vector> witness;
    std::size_t tested = 0;
};

inline std::size_t default_probe_samples(int n) { return 4096u * static_cast<std::size_t>(std::max(1, n)); }

/// Samples the carrying sphere of the common boundary of the given cells and
/// reports whether any sample lies in the closure of exactly those cells.
/// Negative answers are probabilistic.
inline Probe probe_meeting(const Cluster& cl, std::vector<int> idx, std::size_t samples, std::uint64_t seed,
                           double eps_mem = tol::mem, double eps_geo = tol::geo) {
    std::sort(idx.begin(), idx.end());
    Probe out;
    const SphereSection sec = detail::meeting_section(cl, idx);
    if (sec.empty) return out;
    const std::uint64_t sub = derive_seed(seed, detail::index_set_tag(idx));
    const int m = static_cast<int>(sec.basis.cols());
    auto test = [&](const Vector& u) {
        ++out.tested;
        const Vector p = sec.point(u);
        if (detail::is_meeting_witness(cl, idx, p, eps_geo, eps_mem)) {
            out.found = true;
            out.witness = p;
            return true;
        }
        return false;
    };
    if (m == 1) {
        Vector u(1);
        for (double s : {1.0, -1.0}) {
            u[0] = s;
            if (test(u)) return out;
        }
        return out;
    }
    for (std::size_t s = 0; s < samples; ++s) {
        CounterRng rng(sub, s);
        if (test(rng.on_sphere(m))) return out;
    }
    return out;
}

inline Probe interface_nonempty(const Cluster& cl, int i, int j, std::size_t samples, std::uint64_t seed,
                                double eps_mem = tol::mem) {
    require(i != j, ErrorCode::OutOfRange, "interface_nonempty: i == j");
    (void)interface_sphere(cl, std::min(i, j), std::max(i, j));
    return probe_meeting(cl, {i, j}, samples, seed, eps_mem);
}

inline Probe triple_set_nonempty(const Cluster& cl, int i, int j, int k, std::size_t samples, std::uint64_t seed,
                                 double eps_mem = tol::mem) {
    require(i != j && j != k && i != k, ErrorCode::OutOfRange, "triple_set_nonempty: indices must be distinct");
    if (cl.q() < 3 || cl.n() < 2) return {};
    return probe_meeting(cl, {i, j, k}, samples, seed, eps_mem);
}

/// Exact test whether the listed cells have a common boundary point p on S^n at
/// which all other functionals exceed theirs by at least `margin`. The region
/// {x in the meeting plane : other functionals larger} is an unbounded polyhedron
/// whenever q <= n+2, so it meets S^n iff it meets the closed unit ball; this
/// reduces to a minimum-norm feasibility problem. Intended for n <= 8.
inline bool meeting_nonempty_exact(const Cluster& cl, std::vector<int> idx, double margin = tol::mem) {
    require(cl.n() <= 8, ErrorCode::OutOfRange, "meeting_nonempty_exact: n > 8");
    std::sort(idx.begin(), idx.end());
    const int m = static_cast<int>(idx.size()) - 1;
    const int d = cl.n() + 1;
    Matrix e(m, d);
    Vector er(m);
    for (int r = 0; r < m; ++r) {
        e.row(r) = cl.quasi_center(idx[0], idx[r + 1]).transpose();
        er[r] = -cl.curvature(idx[0], idx[r + 1]);
    }
    std::vector<int> others;
    for (int l = 0; l < cl.q(); ++l)
        if (std::find(idx.begin(), idx.end(), l) == idx.end()) others.push_back(l);
    Matrix g(static_cast<Eigen::Index>(others.size()), d);
    Vector gr(static_cast<Eigen::Index>(others.size()));
    for (std::size_t r = 0; r < others.size(); ++r) {
        // <c_l - c_0, x> + k_l - k_0 >= margin
        g.row(static_cast<Eigen::Index>(r)) = cl.quasi_center(others[r], idx[0]).transpose();
        gr[static_cast<Eigen::Index>(r)] = margin - cl.curvature(others[r], idx[0]);
    }
    const auto x = detail::min_norm_feasible(e, er, g, gr);
    return x && x->squaredNorm() < 1.0;
}

/// Exact companion of interface_nonempty.
inline bool interface_nonempty_exact(const Cluster& cl, int i, int j, double margin = tol::mem) {
    return meeting_nonempty_exact(cl, {i, j}, margin);
}

inline bool triple_set_nonempty_exact(const Cluster& cl, int i, int j, int k, double margin = tol::mem) {
    return meeting_nonempty_exact(cl, {i, j, k}, margin);
}

struct StandardCheck {
    bool standard = false;
    double deviation = 0.0;
};

/// Compares the Minkowski Gram matrix with half the zero-sum projector.
inline StandardCheck is_standard_bubble(const Cluster& cl, double tol = 1e-9) {
    const Matrix g = gram(cl.homogeneous(), 1e-8).matrix();
    StandardCheck out;
    out.deviation = max_abs(g - 0.5 * zero_sum_projector(cl.q()));
    out.standard = out.deviation < tol;
    return out;
}

struct FlatnessReport {
    bool pseudo_conformally_flat = false;
    Vector xi;
    double residual = 0.0;
    bool conformally_flat = false;
};

/// Minimum-norm least-squares solve of <c_i, xi> = -k_i.
inline FlatnessReport pseudo_conformally_flat(const Cluster& cl, double tol = 1e-9) {
    FlatnessReport r;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(cl.centers());
    r.xi = cod.solve(-cl.curvatures());
    r.residual = (cl.centers() * r.xi + cl.curvatures()).cwiseAbs().maxCoeff();
    r.pseudo_conformally_flat = r.residual < tol;
    r.conformally_flat = r.pseudo_conformally_flat && r.xi.norm() < 1.0;
    return r;
}

enum class ConeType { Hyperplane, Y, T, Simplicial, Other };

inline const char* cone_type_name(ConeType t) {
    switch (t) {
        case ConeType::Hyperplane: return "HYPERPLANE";
        case ConeType::Y: return "Y";
        case ConeType::T: return "T";
        case ConeType::Simplicial: return "SIMPLICIAL";
        case ConeType::Other: return "OTHER";
    }
    return "OTHER";
}

struct BlowUpCone {
    Vector point;
    std::vector<int> cells;     // I_p
    Matrix normals;             // row r: n_{cells[r]}(p)
    int d = 0;
    ConeType type = ConeType::Other;
    std::vector<std::array<int, 2>> cone_interfaces;  // pairs adjacent inside the cone
};

namespace detail {

/// Whether cone cells a and b (rows of `normals`) share a codimension-one face.
inline bool cone_pair_present(const Matrix& normals, int a, int b) {
    const Eigen::Index d = normals.cols();
    Matrix e(1, d);
    e.row(0) = normals.row(a) - normals.row(b);
    Vector er = Vector::Zero(1);
    const Eigen::Index others = normals.rows() - 2;
    Matrix g(others, d);
    Vector gr = Vector::Ones(others);
    Eigen::Index r = 0;
    for (Eigen::Index l = 0; l < normals.rows(); ++l) {
        if (l == a || l == b) continue;
        g.row(r++) = normals.row(l) - normals.row(a);
    }
    return min_norm_feasible(e, er, g, gr).has_value();
}

}  // namespace detail

/// Tangent cone of the cluster at p.
inline BlowUpCone blow_up(const Cluster& cl, const Vector& p, double tie_tol = 1e-9, double unit_tol = 1e-9) {
    require_on_sphere(p, cl.n(), 1e-9);
    BlowUpCone cone;
    cone.point = p;
    cone.cells = cell_of(cl, p, tie_tol).cells;
    require(cone.cells.size() >= 2, ErrorCode::InteriorPoint, "blow_up: point lies in the interior of a cell");
    const int m = static_cast<int>(cone.cells.size());
    cone.normals.resize(m, cl.n() + 1);
    for (int r = 0; r < m; ++r) {
        const Vector c = cl.center(cone.cells[static_cast<std::size_t>(r)]);
        cone.normals.row(r) = (c - c.dot(p) * p).transpose();
    }
    Matrix diffs(m - 1, cl.n() + 1);
    for (int r = 1; r < m; ++r) diffs.row(r - 1) = cone.normals.row(r) - cone.normals.row(0);
    {
        Eigen::JacobiSVD<Matrix> svd(diffs);
        const auto& sv = svd.singularValues();
        const double thr = std::max(1e-10 * sv[0], 1e-12);
        cone.d = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv[i] > thr) ++cone.d;
    }
    bool all_pairs = true;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            if (detail::cone_pair_present(cone.normals, a, b))
                cone.cone_interfaces.push_back({cone.cells[static_cast<std::size_t>(a)],
                                                cone.cells[static_cast<std::size_t>(b)]});
            else
                all_pairs = false;
        }
    auto unit_edges = [&]() {
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                if (std::abs((cone.normals.row(a) - cone.normals.row(b)).norm() - 1.0) > unit_tol) return false;
        return true;
    };
    if (cone.d == 1) {
        cone.type = ConeType::Hyperplane;
    } else if (all_pairs && m == 3 && cone.d == 2 && unit_edges()) {
        cone.type = ConeType::Y;
    } else if (all_pairs && m == 4 && cone.d == 3 && unit_edges()) {
        cone.type = ConeType::T;
    } else if (all_pairs) {
        cone.type = ConeType::Simplicial;
    } else {
        cone.type = ConeType::Other;
    }
    return cone;
}

struct StationarityReport {
    bool cocycle_ok = true;           // k_ij = k_i - k_j holds by construction
    std::size_t triple_points = 0;    // sampled triple-point witnesses
    double max_normal_sum = 0.0;      // max |n_ij + n_jk + n_ki|
    double max_unit_defect = 0.0;     // max ||n_ij| - 1| at those witnesses
    Vector lagrange;                  // lambda = (n-1) k
};

inline StationarityReport stationarity_report(const Cluster& cl, std::size_t samples, std::uint64_t seed) {
    StationarityReport r;
    r.lagrange = (cl.n() - 1) * cl.curvatures();
    const int q = cl.q();
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j)
            for (int k = j + 1; k < q; ++k) {
                if (cl.n() < 2) continue;
                const SphereSection sec = detail::meeting_section(cl, {i, j, k});
                if (sec.empty) continue;
                const std::uint64_t sub = derive_seed(seed, detail::index_set_tag({i, j, k}));
                const int m = static_cast<int>(sec.basis.cols());
                for (std::size_t s = 0; s < samples; ++s) {
                    CounterRng rng(sub, s);
                    Vector u = m == 1 ? Vector::Constant(1, s % 2 ? -1.0 : 1.0) : rng.on_sphere(m);
                    const Vector p = sec.point(u);
                    if (!detail::is_meeting_witness(cl, {i, j, k}, p, 1e-9, tol::mem)) continue;
                    ++r.triple_points;
                    const std::array<std::array<int, 2>, 3> cyc{{{i, j}, {j, k}, {k, i}}};
                    Vector sum = Vector::Zero(cl.n() + 1);
                    for (const auto& e : cyc) {
                        const Vector nrm = cl.quasi_center(e[0], e[1]) + cl.curvature(e[0], e[1]) * p;
                        sum += nrm;
                        r.max_unit_defect = std::max(r.max_unit_defect, std::abs(nrm.norm() - 1.0));
                    }
                    r.max_normal_sum = std::max(r.max_normal_sum, sum.norm());
                    if (m == 1 && s >= 1) break;
                }
            }
    return r;
}

}  // namespace bubbletk
