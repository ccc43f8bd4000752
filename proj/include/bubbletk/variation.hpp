#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bubbletk/construct.hpp"
#include "bubbletk/measure.hpp"

namespace bubbletk {

struct MobiusField {
    Vector theta;  // W_theta(p) = theta - <theta, p> p
};
struct RotationField {
    int a = 0, b = 1;  // X(p) = p_b e_a - p_a e_b
};
struct SkewField {
    Vector a;      // zero-sum cell weights; f_ij = (a_i - a_j) <N, p>
    Vector north;
};
struct CoordinateField {
    Vector theta;  // f_ij = <theta, p> for i < j, oriented by the pair order
};

using FieldSpec = std::variant<MobiusField, RotationField, SkewField, CoordinateField>;

inline std::string field_name(const FieldSpec& f) {
    switch (f.index()) {
        case 0: return "MOBIUS";
        case 1: return "ROTATION";
        case 2: return "SKEW";
        default: return "COORDINATE";
    }
}

inline void validate_field(const FieldSpec& f, const Cluster& cl) {
    const int d = cl.n() + 1;
    if (const auto* m = std::get_if<MobiusField>(&f)) {
        require(m->theta.size() == d, ErrorCode::DimensionMismatch, "Möbius field: theta has wrong dimension");
    } else if (const auto* r = std::get_if<RotationField>(&f)) {
        require(r->a != r->b && r->a >= 0 && r->b >= 0 && r->a < d && r->b < d, ErrorCode::OutOfRange,
                "rotation field: bad plane");
    } else if (const auto* s = std::get_if<SkewField>(&f)) {
        require(s->a.size() == cl.q() && s->north.size() == d, ErrorCode::DimensionMismatch,
                "skew field: wrong sizes");
        require(std::abs(s->a.sum()) < tol::geo, ErrorCode::ConventionViolation, "skew field: a must sum to zero");
    } else {
        require(std::get<CoordinateField>(f).theta.size() == d, ErrorCode::DimensionMismatch,
                "coordinate field: theta has wrong dimension");
    }
}

/// Vector value of a Möbius or rotation field at p.
inline Vector field_vector(const FieldSpec& f, const Vector& p) {
    if (const auto* m = std::get_if<MobiusField>(&f)) return m->theta - m->theta.dot(p) * p;
    if (const auto* r = std::get_if<RotationField>(&f)) {
        Vector x = Vector::Zero(p.size());
        x[r->a] = p[r->b];
        x[r->b] = -p[r->a];
        return x;
    }
    throw Error(ErrorCode::PreconditionFailed, field_name(f) + " is a scalar field");
}

/// Normal speed on the interface (i, j) at p, measured along n_ij, together
/// with its ambient gradient in R^{n+1}.
struct ScalarSample {
    double value = 0.0;
    Vector gradient;
};

inline ScalarSample normal_speed(const FieldSpec& f, const Cluster& cl, int i, int j, const Vector& p) {
    const Vector c = cl.quasi_center(i, j);
    const double k = cl.curvature(i, j);
    ScalarSample s;
    if (const auto* m = std::get_if<MobiusField>(&f)) {
        // <W_theta, n_ij> = <theta, c_ij> + k_ij <theta, p> on the interface.
        s.value = m->theta.dot(c) + k * m->theta.dot(p);
        s.gradient = k * m->theta;
    } else if (std::holds_alternative<RotationField>(f)) {
        const Vector x = field_vector(f, p);
        s.value = x.dot(c + k * p);
        const auto& r = std::get<RotationField>(f);
        s.gradient = Vector::Zero(p.size());
        s.gradient[r.b] = c[r.a];
        s.gradient[r.a] = -c[r.b];
    } else if (const auto* sk = std::get_if<SkewField>(&f)) {
        const double aij = sk->a[i] - sk->a[j];
        s.value = aij * sk->north.dot(p);
        s.gradient = aij * sk->north;
    } else {
        const auto& co = std::get<CoordinateField>(f);
        const double sign = i < j ? 1.0 : -1.0;
        s.value = sign * co.theta.dot(p);
        s.gradient = sign * co.theta;
    }
    return s;
}

struct VolumeVariation {
    Matrix interface_integral;  // I_ij = int_{Sigma_ij} X^{n_ij}, antisymmetric
    Matrix interface_error;
    std::vector<MeasureReport> delta_v;  // delta V_i = sum_{j != i} I_ij
};

/// Surface Monte Carlo of the normal component on each interface (normalized
/// by |S^n|). Contributions enter antisymmetrically, so delta V sums to zero.
inline VolumeVariation first_variation_volume(const Cluster& cl, const FieldSpec& spec,
                                              std::size_t samples = default_interface_samples,
                                              std::uint64_t seed = default_seed) {
    validate_field(spec, cl);
    const int q = cl.q();
    const int n = cl.n();
    VolumeVariation out;
    out.interface_integral = Matrix::Zero(q, q);
    out.interface_error = Matrix::Zero(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) {
            if (std::abs(cl.pair_defect(i, j)) > tol::geo) continue;
            const SphereSection sec = detail::meeting_section(cl, {i, j});
            if (sec.empty) continue;
            const double scale = sphere_area(n - 1) * std::pow(sec.radius, n - 1) / sphere_area(n);
            double mean = 0.0, se = 0.0;
            if (n == 1) {
                for (double s : {1.0, -1.0}) {
                    const Vector p = sec.point(Vector::Constant(1, s));
                    if (detail::in_closure(cl.functionals(p), i, j))
                        mean += 0.5 * normal_speed(spec, cl, i, j, p).value;
                }
            } else {
                const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x901);
                auto mom = detail::accumulate(samples, 1, [&](std::size_t lo, std::size_t hi) {
                    detail::Moments acc(1);
                    Vector x(1);
                    for (std::size_t s = lo; s < hi; ++s) {
                        CounterRng rng(sub, s);
                        const Vector p = sec.point(rng.on_sphere(n));
                        x[0] = detail::in_closure(cl.functionals(p), i, j) ? normal_speed(spec, cl, i, j, p).value
                                                                           : 0.0;
                        acc.add(x);
                    }
                    return acc;
                });
                const auto [m, e] = detail::finish(mom, samples);
                mean = m[0];
                se = e[0];
            }
            out.interface_integral(i, j) = scale * mean;
            out.interface_integral(j, i) = -scale * mean;
            out.interface_error(i, j) = out.interface_error(j, i) = scale * se;
        }
    for (int i = 0; i < q; ++i) {
        double v = 0.0, var = 0.0;
        for (int j = 0; j < q; ++j) {
            v += out.interface_integral(i, j);
            var += out.interface_error(i, j) * out.interface_error(i, j);
        }
        out.delta_v.push_back({v, std::sqrt(var), samples, seed, Normalization::Sphere});
    }
    return out;
}

struct AreaVariation {
    MeasureReport delta_a;      // sum_{i<j} (n-1) k_ij I_ij
    double lagrange_rhs = 0.0;  // <(n-1) k, delta V>
    double identity_gap = 0.0;  // |delta_a - lagrange_rhs|
    VolumeVariation volume;
};

inline AreaVariation first_variation_area(const Cluster& cl, const FieldSpec& spec,
                                          std::size_t samples = default_interface_samples,
                                          std::uint64_t seed = default_seed) {
    AreaVariation out;
    out.volume = first_variation_volume(cl, spec, samples, seed);
    const int q = cl.q();
    const double h = cl.n() - 1;
    double v = 0.0, var = 0.0;
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) {
            const double w = h * cl.curvature(i, j);
            v += w * out.volume.interface_integral(i, j);
            var += w * w * out.volume.interface_error(i, j) * out.volume.interface_error(i, j);
        }
    out.delta_a = {v, std::sqrt(var), samples, seed, Normalization::Sphere};
    for (int i = 0; i < q; ++i) out.lagrange_rhs += h * cl.curvature(i) * out.volume.delta_v[static_cast<std::size_t>(i)].value;
    out.identity_gap = std::abs(out.delta_a.value - out.lagrange_rhs);
    return out;
}

/// One-parameter Möbius flow generated by a Möbius or rotation field.
inline LorentzMatrix field_flow(const FieldSpec& f, int n, double t) {
    if (const auto* m = std::get_if<MobiusField>(&f)) return boost(m->theta, t);
    if (const auto* r = std::get_if<RotationField>(&f)) return spatial_rotation(plane_rotation(n + 1, r->a, r->b, -t));
    throw Error(ErrorCode::PreconditionFailed, "no flow for " + field_name(f) + " fields");
}

/// Central difference (P(h) - P(-h)) / 2h of the perimeter along the flow,
/// with the same carrier samples at both ends; the error is computed from the
/// paired differences.
inline MeasureReport perimeter_derivative_fd(const Cluster& cl, const FieldSpec& f, double h = 1e-3,
                                             std::size_t samples = default_interface_samples,
                                             std::uint64_t seed = default_seed) {
    const Cluster plus = apply_mobius(cl, field_flow(f, cl.n(), h));
    const Cluster minus = apply_mobius(cl, field_flow(f, cl.n(), -h));
    const int n = cl.n();
    require(n >= 2, ErrorCode::OutOfRange, "perimeter_derivative_fd: n must be at least 2");
    MeasureReport r{0.0, 0.0, samples, seed, Normalization::Sphere};
    double var = 0.0;
    for (int i = 0; i < cl.q(); ++i)
        for (int j = i + 1; j < cl.q(); ++j) {
            if (std::abs(cl.pair_defect(i, j)) > tol::geo) continue;
            const SphereSection sp = detail::meeting_section(plus, {i, j});
            const SphereSection sm = detail::meeting_section(minus, {i, j});
            if (sp.empty && sm.empty) continue;
            const double ap = sp.empty ? 0.0 : sphere_area(n - 1) * std::pow(sp.radius, n - 1) / sphere_area(n);
            const double am = sm.empty ? 0.0 : sphere_area(n - 1) * std::pow(sm.radius, n - 1) / sphere_area(n);
            const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x902);
            auto mom = detail::accumulate(samples, 1, [&](std::size_t lo, std::size_t hi) {
                detail::Moments acc(1);
                Vector x(1);
                for (std::size_t s = lo; s < hi; ++s) {
                    CounterRng rng(sub, s);
                    const Vector u = rng.on_sphere(n);
                    double d = 0.0;
                    if (!sp.empty && detail::in_closure(plus.functionals(sp.point(u)), i, j)) d += ap;
                    if (!sm.empty && detail::in_closure(minus.functionals(sm.point(u)), i, j)) d -= am;
                    x[0] = d / (2.0 * h);
                    acc.add(x);
                }
                return acc;
            });
            const auto [m, e] = detail::finish(mom, samples);
            r.value += m[0];
            var += e[0] * e[0];
        }
    r.std_error = std::sqrt(var);
    return r;
}

/// Central difference of the cell volumes along the flow with shared samples.
inline std::vector<MeasureReport> volume_derivative_fd(const Cluster& cl, const FieldSpec& f, double h = 1e-3,
                                                       std::size_t samples = default_volume_samples,
                                                       std::uint64_t seed = default_seed) {
    const Cluster plus = apply_mobius(cl, field_flow(f, cl.n(), h));
    const Cluster minus = apply_mobius(cl, field_flow(f, cl.n(), -h));
    const int q = cl.q();
    const int d = cl.n() + 1;
    const std::uint64_t sub = derive_seed(seed, 0x903);
    auto mom = detail::accumulate(samples, q, [&](std::size_t lo, std::size_t hi) {
        detail::Moments acc(q);
        for (std::size_t s = lo; s < hi; ++s) {
            CounterRng rng(sub, s);
            const Vector p = rng.on_sphere(d);
            Vector x = Vector::Zero(q);
            x[cell_index_lowest(plus, p)] += 1.0 / (2.0 * h);
            x[cell_index_lowest(minus, p)] -= 1.0 / (2.0 * h);
            acc.add(x);
        }
        return acc;
    });
    const auto [m, e] = detail::finish(mom, samples);
    std::vector<MeasureReport> out;
    for (int i = 0; i < q; ++i) out.push_back({m[i], e[i], samples, seed, Normalization::Sphere});
    return out;
}

/// Closed-form Jacobi operator applied to the field's normal component on
/// the interface (i, j), using II = k Id and Ric(n, n) = n - 1.
inline double jacobi_closed_form(const Cluster& cl, int i, int j, const FieldSpec& spec, const Vector& p,
                                 double tie_tol = 1e-8) {
    validate_field(spec, cl);
    const auto m = cell_of(cl, p, tie_tol);
    const bool on = std::find(m.cells.begin(), m.cells.end(), i) != m.cells.end() &&
                    std::find(m.cells.begin(), m.cells.end(), j) != m.cells.end();
    require(on, ErrorCode::NotOnInterface,
            "point is not on interface (" + std::to_string(i) + "," + std::to_string(j) + ")");
    const double h = cl.n() - 1;
    const Vector c = cl.quasi_center(i, j);
    const double k = cl.curvature(i, j);
    if (const auto* mf = std::get_if<MobiusField>(&spec)) return h * mf->theta.dot(c);
    if (const auto* co = std::get_if<CoordinateField>(&spec)) return (i < j ? 1.0 : -1.0) * -h * k * co->theta.dot(c);
    if (const auto* sk = std::get_if<SkewField>(&spec)) return (sk->a[i] - sk->a[j]) * -h * k * sk->north.dot(c);
    return 0.0;  // rotations are Killing fields
}

/// Central difference of -(n-1) k_ij(t) along the boost flow.
inline double jacobi_fd(const Cluster& cl, int i, int j, const Vector& theta, double h = 1e-4) {
    const Cluster plus = apply_mobius(cl, boost(theta, h));
    const Cluster minus = apply_mobius(cl, boost(theta, -h));
    return -(cl.n() - 1) * (plus.curvature(i, j) - minus.curvature(i, j)) / (2.0 * h);
}

struct IndexFormReport {
    MeasureReport value;
    MeasureReport interface_term;
    MeasureReport boundary_term;
    std::vector<std::string> notes;
};

/// Index form of a scalar field given through its normal speeds, restricted
/// to spherical clusters on S^n:
///   sum_{i<j} int_{Sigma_ij} |grad^t f|^2 - (n-1)(1 + k_ij^2) f^2
///   - sum_{i<j} sum_k int_{Sigma_ijk} f_ij^2 (k_ik + k_jk) / sqrt(3).
/// All measures are normalized by |S^n|. `traced` drops the boundary term.
inline IndexFormReport index_form_q0(const Cluster& cl, const FieldSpec& spec,
                                     std::size_t samples = default_interface_samples,
                                     std::uint64_t seed = default_seed, bool traced = false) {
    validate_field(spec, cl);
    const int q = cl.q();
    const int n = cl.n();
    require(n >= 2, ErrorCode::OutOfRange, "index_form_q0: n must be at least 2");
    IndexFormReport out;
    double it = 0.0, it_var = 0.0;
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) {
            if (std::abs(cl.pair_defect(i, j)) > tol::geo) continue;
            const SphereSection sec = detail::meeting_section(cl, {i, j});
            if (sec.empty) continue;
            const double k = cl.curvature(i, j);
            const Vector c = cl.quasi_center(i, j);
            const double scale = sphere_area(n - 1) * std::pow(sec.radius, n - 1) / sphere_area(n);
            const std::uint64_t sub = detail::pair_seed(seed, i, j, 0x904);
            auto mom = detail::accumulate(samples, 1, [&](std::size_t lo, std::size_t hi) {
                detail::Moments acc(1);
                Vector x(1);
                for (std::size_t s = lo; s < hi; ++s) {
                    CounterRng rng(sub, s);
                    const Vector p = sec.point(rng.on_sphere(n));
                    x[0] = 0.0;
                    if (detail::in_closure(cl.functionals(p), i, j)) {
                        const ScalarSample f = normal_speed(spec, cl, i, j, p);
                        const Vector nrm = c + k * p;
                        const Vector gt = f.gradient - f.gradient.dot(p) * p - f.gradient.dot(nrm) * nrm;
                        x[0] = gt.squaredNorm() - (n - 1) * (1.0 + k * k) * f.value * f.value;
                    }
                    acc.add(x);
                }
                return acc;
            });
            const auto [m, e] = detail::finish(mom, samples);
            it += scale * m[0];
            it_var += scale * scale * e[0] * e[0];
        }
    out.interface_term = {it, std::sqrt(it_var), samples, seed, Normalization::Sphere};

    double bt = 0.0, bt_var = 0.0;
    if (!traced) {
        for (int a = 0; a < q; ++a)
            for (int b = a + 1; b < q; ++b)
                for (int cc = b + 1; cc < q; ++cc) {
                    const std::array<int, 3> t{a, b, cc};
                    bool formed = true;
                    for (int x = 0; x < 3; ++x)
                        formed = formed && std::abs(cl.pair_defect(t[static_cast<std::size_t>(x)],
                                                                   t[static_cast<std::size_t>((x + 1) % 3)])) <
                                               tol::geo;
                    if (!formed) {
                        out.notes.push_back("triple (" + std::to_string(a) + "," + std::to_string(b) + "," +
                                            std::to_string(cc) + ") skipped: malformed pair");
                        continue;
                    }
                    SphereSection sec;
                    try {
                        sec = detail::meeting_section(cl, {a, b, cc});
                    } catch (const Error& err) {
                        out.notes.push_back(std::string("triple skipped: ") + err.what());
                        continue;
                    }
                    if (sec.empty) continue;
                    // Weight of the triple point for the pair (u, v) with third cell w.
                    auto weight = [&](const Vector& p) {
                        double w = 0.0;
                        for (int x = 0; x < 3; ++x) {
                            const int u = t[static_cast<std::size_t>(x)];
                            const int v = t[static_cast<std::size_t>((x + 1) % 3)];
                            const int o = t[static_cast<std::size_t>((x + 2) % 3)];
                            const double f = normal_speed(spec, cl, u, v, p).value;
                            w += f * f * (cl.curvature(u, o) + cl.curvature(v, o)) / std::sqrt(3.0);
                        }
                        return w;
                    };
                    const double scale = sphere_area(n - 2) * std::pow(sec.radius, n - 2) / sphere_area(n);
                    if (n == 2) {
                        for (double s : {1.0, -1.0}) {
                            const Vector p = sec.point(Vector::Constant(1, s));
                            if (detail::in_closure(cl.functionals(p), a, b, cc)) bt += 0.5 * scale * weight(p);
                        }
                        continue;
                    }
                    const std::uint64_t sub = derive_seed(derive_seed(seed, 0x905), detail::index_set_tag({a, b, cc}));
                    auto mom = detail::accumulate(samples, 1, [&](std::size_t lo, std::size_t hi) {
                        detail::Moments acc(1);
                        Vector x(1);
                        for (std::size_t s = lo; s < hi; ++s) {
                            CounterRng rng(sub, s);
                            const Vector p = sec.point(rng.on_sphere(n - 1));
                            x[0] = detail::in_closure(cl.functionals(p), a, b, cc) ? weight(p) : 0.0;
                            acc.add(x);
                        }
                        return acc;
                    });
                    const auto [m, e] = detail::finish(mom, samples);
                    bt += scale * m[0];
                    bt_var += scale * scale * e[0] * e[0];
                }
    }
    out.boundary_term = {-bt, std::sqrt(bt_var), samples, seed, Normalization::Sphere};
    out.value = {it - bt, std::sqrt(it_var + bt_var), samples, seed, Normalization::Sphere};
    return out;
}

}  // namespace bubbletk
