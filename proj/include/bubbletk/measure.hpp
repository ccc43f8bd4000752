#pragma once

#include <string>
#include <vector>

#include "bubbletk/cluster.hpp"
#include "bubbletk/projections.hpp"

namespace bubbletk {

enum class Normalization { Sphere, Lebesgue };

/// Monte Carlo estimate. On S^n volumes are normalized to total mass 1 and
/// (n-1)-dimensional measures are divided by |S^n| accordingly.
struct MeasureReport {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    Normalization normalization = Normalization::Sphere;
};

inline constexpr std::size_t default_volume_samples = 1000000;
inline constexpr std::size_t default_interface_samples = 200000;

namespace detail {

/// Running sums for mean/variance of a vector-valued per-sample quantity.
struct Moments {
    Vector sum, sum_sq;
    explicit Moments(Eigen::Index d = 0) : sum(Vector::Zero(d)), sum_sq(Vector::Zero(d)) {}
    void add(const Vector& x) {
        sum += x;
        sum_sq += x.cwiseProduct(x);
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
};

/// Mean and standard error of the mean for each component.
inline std::pair<Vector, Vector> finish(const Moments& m, std::size_t count) {
    const double nn = static_cast<double>(count);
    Vector mean = m.sum / nn;
    Vector var = (m.sum_sq / nn - mean.cwiseProduct(mean)).cwiseMax(0.0);
    Vector se = count > 1 ? Vector((var * nn / (nn - 1.0) / nn).cwiseSqrt()) : Vector::Zero(mean.size());
    return {mean, se};
}

/// Sums per-block moments computed by `f(begin, end)` in block order.
template <class F>
Moments accumulate(std::size_t count, Eigen::Index dim, F&& f) {
    Moments total(dim);
    for (const auto& m : map_blocks(count, std::forward<F>(f))) total.merge(m);
    return total;
}

inline std::uint64_t pair_seed(std::uint64_t seed, int i, int j, std::uint64_t stream) {
    return derive_seed(derive_seed(seed, stream), index_set_tag({std::min(i, j), std::max(i, j)}));
}

inline bool in_closure(const Vector& f, int i, int j) {
    const double lvl = std::max(f[i], f[j]);
    for (Eigen::Index l = 0; l < f.size(); ++l)
        if (l != i && l != j && f[l] < lvl) return false;
    return true;
}

inline bool in_closure(const Vector& f, int i, int j, int k) {
    const double lvl = std::max({f[i], f[j], f[k]});
    for (Eigen::Index l = 0; l < f.size(); ++l)
        if (l != i && l != j && l != k && f[l] < lvl) return false;
    return true;
}

}  // namespace detail

/// Normalized cell volumes from uniform samples; ties go to the lowest index.
inline std::vector<MeasureReport> cell_volumes(const Cluster& cl, std::size_t samples = default_volume_samples,
                                               std::uint64_t seed = default_seed) {
    require(samples > 0, ErrorCode::OutOfRange, "cell_volumes: samples must be positive");
    const int q = cl.q();
    const int d = cl.n() + 1;
    const std::uint64_t sub = derive_seed(seed, 0x701);
    auto counts = map_blocks(samples, [&](std::size_t lo, std::size_t hi) {
        std::vector<std::size_t> c(static_cast<std::size_t>(q), 0);
        for (std::size_t s = lo; s < hi; ++s) {
            CounterRng rng(sub, s);
            ++c[static_cast<std::size_t>(cell_index_lowest(cl, rng.on_sphere(d)))];
        }
        return c;
    });
    std::vector<std::size_t> total(static_cast<std::size_t>(q), 0);
    for (const auto& c : counts)
        for (int i = 0; i < q; ++i) total[static_cast<std::size_t>(i)] += c[static_cast<std::size_t>(i)];
    std::vector<MeasureReport> out;
    const double nn = static_cast<double>(samples);
    for (int i = 0; i < q; ++i) {
        const double f = static_cast<double>(total[static_cast<std::size_t>(i)]) / nn;
        out.push_back({f, std::sqrt(f * (1.0 - f) / nn), samples, seed, Normalization::Sphere});
    }
    return out;
}

struct PairReport {
    int i = 0, j = 0;
    MeasureReport report;
    bool well_formed = true;
};

struct PerimeterReport {
    std::vector<PairReport> pairs;
    MeasureReport total;
    std::vector<std::string> warnings;
};

/// Normalized (n-1)-measure of the interface between i and j, sampled on the
/// carrying sphere. Symmetric in (i, j) for a fixed seed.
inline MeasureReport perimeter_pair(const Cluster& cl, int i, int j, std::size_t samples = default_interface_samples,
                                    std::uint64_t seed = default_seed) {
    require(i != j, ErrorCode::OutOfRange, "perimeter_pair: i == j");
    if (i > j) std::swap(i, j);
    MeasureReport r{0.0, 0.0, samples, seed, Normalization::Sphere};
    const SphereSection sec = detail::meeting_section(cl, {i, j});
    if (sec.empty) return r;
    const int m = cl.n();
    const double scale = sphere_area(m - 1) * std::pow(sec.radius, m - 1) / sphere_area(m);
    if (m == 1) {
        // The carrier is a pair of points.
        for (double s : {1.0, -1.0})
            if (detail::in_closure(cl.functionals(sec.point(Vector::Constant(1, s))), i, j)) r.value += 0.5 * scale;
        return r;
    }
    const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x702);
    auto mom = detail::accumulate(samples, 1, [&](std::size_t lo, std::size_t hi) {
        detail::Moments acc(1);
        Vector x(1);
        for (std::size_t s = lo; s < hi; ++s) {
            CounterRng rng(sub, s);
            x[0] = detail::in_closure(cl.functionals(sec.point(rng.on_sphere(m))), i, j) ? 1.0 : 0.0;
            acc.add(x);
        }
        return acc;
    });
    const auto [mean, se] = detail::finish(mom, samples);
    r.value = scale * mean[0];
    r.std_error = scale * se[0];
    return r;
}

/// Total normalized perimeter. Pairs violating |c_ij|^2 = 1 + k_ij^2 carry a
/// warning; they are still measured on their actual carrying sphere.
inline PerimeterReport perimeter(const Cluster& cl, std::size_t samples = default_interface_samples,
                                 std::uint64_t seed = default_seed) {
    PerimeterReport out;
    out.total = {0.0, 0.0, samples, seed, Normalization::Sphere};
    double var = 0.0;
    for (int i = 0; i < cl.q(); ++i)
        for (int j = i + 1; j < cl.q(); ++j) {
            PairReport pr{i, j, perimeter_pair(cl, i, j, samples, seed), true};
            if (std::abs(cl.pair_defect(i, j)) > tol::geo) {
                pr.well_formed = false;
                if (pr.report.value > 0.0)
                    out.warnings.push_back("pair (" + std::to_string(i) + "," + std::to_string(j) +
                                           ") is non-empty but violates |c_ij|^2 = 1 + k_ij^2");
            }
            out.total.value += pr.report.value;
            var += pr.report.std_error * pr.report.std_error;
            out.pairs.push_back(pr);
        }
    out.total.std_error = std::sqrt(var);
    return out;
}

struct EuclideanMeasure {
    std::vector<int> bounded_cells;
    std::vector<MeasureReport> volumes;  // aligned with bounded_cells
    std::vector<PairReport> pairs;
    MeasureReport total_perimeter;
};

namespace detail {

inline bool in_closure_euclid(const EuclideanView& v, const Vector& x, int i, int j) {
    return in_closure(v.functionals(x), i, j);
}

/// Tangent frame of a hyperplane {<a, x> = b} in R^n: orthonormal columns.
inline Matrix plane_basis(const Vector& a) {
    const Matrix am = a;
    Eigen::HouseholderQR<Matrix> qr(am);
    const Matrix qm = qr.householderQ();
    return qm.rightCols(a.size() - 1);
}

/// Sampler for a Euclidean interface piece clipped to the ball of radius R.
struct PieceSampler {
    EuclideanCarrier carrier;
    Vector base;     // plane: closest point to the origin
    Matrix basis;    // plane tangent frame
    double rho = 0;  // plane: disc radius inside B_R
    double measure = 0;
    int n = 0;

    Vector point(CounterRng& rng) const {
        if (carrier.is_plane) return base + rho * basis * rng.in_ball(n - 1);
        return carrier.center + carrier.radius * rng.on_sphere(n);
    }
};

inline std::optional<PieceSampler> piece_sampler(const EuclideanView& v, int i, int j, double bound) {
    PieceSampler s;
    s.n = v.n();
    s.carrier = v.carrier(i, j);
    if (s.carrier.is_plane) {
        const double a = s.carrier.normal.norm();
        s.base = s.carrier.normal * (s.carrier.offset / (a * a));
        const double d2 = s.base.squaredNorm();
        if (d2 >= bound * bound) return std::nullopt;
        s.rho = std::sqrt(bound * bound - d2);
        s.basis = plane_basis(s.carrier.normal);
        s.measure = ball_volume(s.n - 1) * std::pow(s.rho, s.n - 1);
    } else {
        s.measure = sphere_area(s.n - 1) * std::pow(s.carrier.radius, s.n - 1);
    }
    return s;
}

}  // namespace detail

/// Checks by sampling that every interface piece stays inside the ball of
/// radius `bound`; throws UnboundedInterface naming the first offending pair.
inline void check_bounded(const EuclideanView& v, double bound, std::size_t samples, std::uint64_t seed) {
    const int n = v.n();
    for (int i = 0; i < v.q(); ++i)
        for (int j = i + 1; j < v.q(); ++j) {
            if (std::abs(v.parent().pair_defect(i, j)) > tol::geo) continue;
            const EuclideanCarrier c = v.carrier(i, j);
            const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x7B0);
            const std::string name = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
            if (c.is_plane) {
                const double a = c.normal.norm();
                const Vector base = c.normal * (c.offset / (a * a));
                const double d2 = base.squaredNorm();
                if (d2 >= bound * bound) {
                    // The plane misses the ball; any point of the piece is outside.
                    if (probe_meeting(v.parent(), {i, j}, samples, seed).found)
                        throw Error(ErrorCode::UnboundedInterface, "interface " + name + " lies outside the bound");
                    continue;
                }
                const double rho = std::sqrt(bound * bound - d2);
                const Matrix basis = detail::plane_basis(c.normal);
                const std::size_t rim = n == 2 ? 2 : samples;
                for (std::size_t s = 0; s < rim; ++s) {
                    Vector u;
                    if (n == 2) {
                        u = Vector::Constant(1, s == 0 ? 1.0 : -1.0);
                    } else {
                        CounterRng rng(sub, s);
                        u = rng.on_sphere(n - 1);
                    }
                    if (detail::in_closure_euclid(v, base + rho * basis * u, i, j))
                        throw Error(ErrorCode::UnboundedInterface, "interface " + name + " reaches the bound");
                }
            } else {
                for (std::size_t s = 0; s < samples; ++s) {
                    CounterRng rng(sub, s);
                    const Vector x = c.center + c.radius * rng.on_sphere(n);
                    if (x.norm() >= bound && detail::in_closure_euclid(v, x, i, j))
                        throw Error(ErrorCode::UnboundedInterface, "interface " + name + " leaves the bound");
                }
            }
        }
}

/// Lebesgue volumes of the bounded cells and (n-1)-measures of interfaces.
inline EuclideanMeasure euclidean_volumes_perimeter(const EuclideanView& v, double bound,
                                                    std::size_t samples = default_interface_samples,
                                                    std::uint64_t seed = default_seed) {
    require(bound > 0.0, ErrorCode::OutOfRange, "bounding radius must be positive");
    check_bounded(v, bound, std::min<std::size_t>(samples, 20000), seed);
    const int n = v.n();
    const int q = v.q();
    EuclideanMeasure out;
    for (int i = 0; i < q; ++i)
        if (i != v.pole_cell()) out.bounded_cells.push_back(i);
    const double ball = ball_volume(n) * std::pow(bound, n);
    const std::uint64_t sub = derive_seed(seed, 0x7E1);
    auto mom = detail::accumulate(samples, q, [&](std::size_t lo, std::size_t hi) {
        detail::Moments acc(q);
        for (std::size_t s = lo; s < hi; ++s) {
            CounterRng rng(sub, s);
            Vector ind = Vector::Zero(q);
            ind[v.cell_index_lowest(bound * rng.in_ball(n))] = 1.0;
            acc.add(ind);
        }
        return acc;
    });
    const auto [mean, se] = detail::finish(mom, samples);
    for (int i : out.bounded_cells)
        out.volumes.push_back({ball * mean[i], ball * se[i], samples, seed, Normalization::Lebesgue});
    out.total_perimeter = {0.0, 0.0, samples, seed, Normalization::Lebesgue};
    double var = 0.0;
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) {
            PairReport pr{i, j, {0.0, 0.0, samples, seed, Normalization::Lebesgue}, true};
            if (std::abs(v.parent().pair_defect(i, j)) > tol::geo) {
                pr.well_formed = false;
                out.pairs.push_back(pr);
                continue;
            }
            const auto ps = detail::piece_sampler(v, i, j, bound);
            if (ps) {
                const std::uint64_t ps_seed = detail::pair_seed(seed, i, j, 0x7E2);
                auto pm = detail::accumulate(samples, 1, [&](std::size_t lo, std::size_t hi) {
                    detail::Moments acc(1);
                    Vector x(1);
                    for (std::size_t s = lo; s < hi; ++s) {
                        CounterRng rng(ps_seed, s);
                        x[0] = detail::in_closure_euclid(v, ps->point(rng), i, j) ? 1.0 : 0.0;
                        acc.add(x);
                    }
                    return acc;
                });
                const auto [pmean, pse] = detail::finish(pm, samples);
                pr.report.value = ps->measure * pmean[0];
                pr.report.std_error = ps->measure * pse[0];
            }
            out.total_perimeter.value += pr.report.value;
            var += pr.report.std_error * pr.report.std_error;
            out.pairs.push_back(pr);
        }
    out.total_perimeter.std_error = std::sqrt(var);
    return out;
}

/// Radius of a ball that contains every interface piece, from sampled piece
/// points, padded by `pad`.
inline double suggest_bounding_radius(const EuclideanView& v, std::size_t samples = 20000,
                                      std::uint64_t seed = default_seed, double pad = 1.25) {
    double r = 0.0;
    for (int i = 0; i < v.q(); ++i)
        for (int j = i + 1; j < v.q(); ++j) {
            if (std::abs(v.parent().pair_defect(i, j)) > tol::geo) continue;
            const SphereSection sec = detail::meeting_section(v.parent(), {i, j});
            if (sec.empty) continue;
            const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x7B1);
            for (std::size_t s = 0; s < samples; ++s) {
                CounterRng rng(sub, s);
                const Vector p = sec.point(sec.dim() == 0 ? Vector::Constant(1, s % 2 ? -1.0 : 1.0)
                                                          : rng.on_sphere(sec.dim() + 1));
                if ((p - v.pole()).norm() < 1e-9) continue;
                if (detail::in_closure(v.parent().functionals(p), i, j))
                    r = std::max(r, v.to_plane(p).norm());
            }
        }
    return pad * std::max(r, 1e-3);
}

enum class Moment { NormalNormal, NormalCenter, Identity, Isotropy };

inline const char* moment_name(Moment m) {
    switch (m) {
        case Moment::NormalNormal: return "nn";
        case Moment::NormalCenter: return "nc";
        case Moment::Identity: return "id";
        case Moment::Isotropy: return "nn-iso";
    }
    return "?";
}

struct MomentReport {
    Matrix value;
    Matrix std_error;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    Normalization normalization = Normalization::Sphere;
};

namespace detail {

inline Matrix moment_integrand(Moment which, const Vector& nrm, const Vector& c) {
    const Eigen::Index d = nrm.size();
    switch (which) {
        case Moment::NormalNormal: return nrm * nrm.transpose();
        case Moment::NormalCenter: return nrm * c.transpose();
        case Moment::Identity: return Matrix::Identity(d, d);
        case Moment::Isotropy: return nrm * nrm.transpose() - Matrix::Identity(d, d) / static_cast<double>(d);
    }
    return Matrix::Zero(d, d);
}

inline MomentReport finish_moment(const Moments& m, std::size_t count, double scale, Eigen::Index d) {
    const auto [mean, se] = finish(m, count);
    MomentReport r;
    r.value = scale * Eigen::Map<const Matrix>(mean.data(), d, d);
    r.std_error = scale * Eigen::Map<const Matrix>(se.data(), d, d);
    return r;
}

inline void add_moment(MomentReport& total, Matrix& var, const MomentReport& part) {
    total.value += part.value;
    var += part.std_error.cwiseProduct(part.std_error);
}

}  // namespace detail

/// Surface integral over all interfaces (each counted once) of a tensor field
/// built from the unit normal n = c_ij + k_ij p and the quasi-center c_ij.
inline MomentReport surface_moment(const Cluster& cl, Moment which, std::size_t samples = default_interface_samples,
                                   std::uint64_t seed = default_seed) {
    const int n = cl.n();
    const Eigen::Index d = n + 1;
    MomentReport total;
    total.value = Matrix::Zero(d, d);
    Matrix var = Matrix::Zero(d, d);
    for (int i = 0; i < cl.q(); ++i)
        for (int j = i + 1; j < cl.q(); ++j) {
            if (std::abs(cl.pair_defect(i, j)) > tol::geo) continue;
            const SphereSection sec = detail::meeting_section(cl, {i, j});
            if (sec.empty || n < 2) continue;
            const Vector c = cl.quasi_center(i, j);
            const double k = cl.curvature(i, j);
            const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x7C0);
            auto mom = detail::accumulate(samples, d * d, [&](std::size_t lo, std::size_t hi) {
                detail::Moments acc(d * d);
                for (std::size_t s = lo; s < hi; ++s) {
                    CounterRng rng(sub, s);
                    const Vector p = sec.point(rng.on_sphere(n));
                    Matrix t = Matrix::Zero(d, d);
                    if (detail::in_closure(cl.functionals(p), i, j)) t = detail::moment_integrand(which, c + k * p, c);
                    acc.add(Eigen::Map<const Vector>(t.data(), d * d));
                }
                return acc;
            });
            const double scale = sphere_area(n - 1) * std::pow(sec.radius, n - 1) / sphere_area(n);
            detail::add_moment(total, var, detail::finish_moment(mom, samples, scale, d));
        }
    total.std_error = var.cwiseSqrt();
    total.samples = samples;
    total.seed = seed;
    return total;
}

/// Euclidean version: n is the Euclidean unit normal, c the Euclidean
/// quasi-center c^R_ij. Interfaces must be bounded by `bound`.
inline MomentReport surface_moment(const EuclideanView& v, Moment which, double bound,
                                   std::size_t samples = default_interface_samples,
                                   std::uint64_t seed = default_seed) {
    check_bounded(v, bound, std::min<std::size_t>(samples, 20000), seed);
    const int n = v.n();
    const Eigen::Index d = n;
    MomentReport total;
    total.value = Matrix::Zero(d, d);
    total.normalization = Normalization::Lebesgue;
    Matrix var = Matrix::Zero(d, d);
    for (int i = 0; i < v.q(); ++i)
        for (int j = i + 1; j < v.q(); ++j) {
            if (std::abs(v.parent().pair_defect(i, j)) > tol::geo) continue;
            const auto ps = detail::piece_sampler(v, i, j, bound);
            if (!ps) continue;
            const Vector c = (v.euclid_centers().row(i) - v.euclid_centers().row(j)).transpose();
            const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x7C1);
            auto mom = detail::accumulate(samples, d * d, [&](std::size_t lo, std::size_t hi) {
                detail::Moments acc(d * d);
                for (std::size_t s = lo; s < hi; ++s) {
                    CounterRng rng(sub, s);
                    const Vector x = ps->point(rng);
                    Matrix t = Matrix::Zero(d, d);
                    if (detail::in_closure_euclid(v, x, i, j)) t = detail::moment_integrand(which, v.normal(i, j, x), c);
                    acc.add(Eigen::Map<const Vector>(t.data(), d * d));
                }
                return acc;
            });
            detail::add_moment(total, var, detail::finish_moment(mom, samples, ps->measure, d));
        }
    total.std_error = var.cwiseSqrt();
    total.samples = samples;
    total.seed = seed;
    return total;
}

}  // namespace bubbletk
