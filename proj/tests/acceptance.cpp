// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bubbletk/bubbletk.hpp"

using namespace bubbletk;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

Vector random_zero_sum(CounterRng& rng, int q, double scale) {
    Vector k = scale * rng.gaussian(q);
    k.array() -= k.mean();
    return k;
}

Cluster banded(double t) {
    Matrix c = Matrix::Zero(3, 3);
    c(0, 0) = 0.5;
    c(1, 0) = -0.5;
    return Cluster(c, Vector::Map(std::vector<double>{t, t, -2.0 * t}.data(), 3));
}

Cluster random_mobius(const Cluster& cl, CounterRng& rng, std::uint64_t seed) {
    const int d = cl.n() + 1;
    const double t = 1.2 * rng.uniform();
    const Cluster rotated = apply_mobius(cl, spatial_rotation(random_rotation(d, seed)));
    return apply_mobius(rotated, bubbletk::boost(rng.on_sphere(d), t));
}

// 1. Standard bubbles have Minkowski Gram matrix P/2.
Outcome gram_criterion() {
    double worst = 0.0;
    int count = 0;
    CounterRng rng(101, 0);
    for (int q = 2; q <= 5; ++q) {
        const int n = q - 1;
        worst = std::max(worst, is_standard_bubble(equal_volume_bubble(n, q)).deviation);
        ++count;
        for (int s = 0; s < 50; ++s, ++count)
            worst = std::max(worst, is_standard_bubble(bubble_from_curvatures(n, random_zero_sum(rng, q, 0.6))).deviation);
    }
    return {worst < 1e-10, fmt("max |G - P/2| = %.2e over %d bubbles (tol 1e-10)", worst, count)};
}

// 2. Gram matrix and incidence complex are invariant under Möbius maps.
Outcome mobius_criterion() {
    CounterRng rng(202, 0);
    double worst = 0.0;
    int mismatches = 0;
    const Cluster base = bubble_from_curvatures(3, Vector::Map(std::vector<double>{0.5, -0.3, 0.2, 0.1, -0.5}.data(), 5));
    const Cluster band = banded(0.1);
    const std::size_t probes = default_probe_samples(3);
    const IncidenceComplex ref = extract_complex(base, probes, 7);
    const IncidenceComplex ref_band = extract_complex(band, probes, 7);
    for (int trial = 0; trial < 100; ++trial) {
        const Cluster moved = random_mobius(base, rng, 1000 + trial);
        worst = std::max(worst, max_abs(gram(moved.homogeneous()).matrix() - gram(base.homogeneous()).matrix()));
        if (!(extract_complex(moved, probes, 7) == ref)) ++mismatches;
        if (trial % 4 == 0 && !(extract_complex(random_mobius(band, rng, 5000 + trial), probes, 7) == ref_band))
            ++mismatches;
    }
    return {worst < 1e-9 && mismatches == 0,
            fmt("max Gram change %.2e (tol 1e-9), complex mismatches %d of 125", worst, mismatches)};
}

// 3. Equal-volume triple bubble on S^2.
Outcome triple_bubble_criterion() {
    const Cluster cl = equal_volume_bubble(2, 3);
    const PerimeterReport per = perimeter(cl, 200000, 303);
    const auto vol = cell_volumes(cl, 1000000, 304);
    const double zp = std::abs(per.total.value - 0.75) / per.total.std_error;
    double zv = 0.0;
    for (const auto& v : vol) zv = std::max(zv, std::abs(v.value - 1.0 / 3.0) / v.std_error);
    return {zp < 3.0 && zv < 3.0, fmt("perimeter %.5f +- %.5f (z %.2f), volumes max z %.2f (tol 3 sigma)",
                                      per.total.value, per.total.std_error, zp, zv)};
}

// 4. Volume solver converges and hits its targets on fresh samples.
Outcome volume_solver_criterion() {
    std::string detail;
    bool pass = true;
    int run = 0;
    for (const auto& [n, target] : std::vector<std::pair<int, std::vector<double>>>{{2, {0.5, 0.3, 0.2}},
                                                                                  {3, {0.4, 0.3, 0.2, 0.1}}}) {
        const Vector v = Vector::Map(target.data(), static_cast<Eigen::Index>(target.size()));
        const VolumeSolution sol = bubble_from_volumes(n, v);
        const int steps = static_cast<int>(sol.trace.size()) - 1;
        const auto fresh = cell_volumes(sol.cluster, 1000000, 4040 + run++);
        double excess = -INFINITY;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const auto& r = fresh[static_cast<std::size_t>(i)];
            excess = std::max(excess, std::abs(r.value - v[i]) - (3.0 * r.std_error + 1e-3));
        }
        pass = pass && sol.converged && steps <= 15 && excess < 0.0;
        detail += fmt("S^%d: %s in %d steps, worst |v - target| - (3 sigma + 1e-3) = %.2e; ", n,
                      sol.converged ? "converged" : "not converged", steps, excess);
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

// 5. Analytic first variation of perimeter matches finite differences.
Outcome lagrange_criterion() {
    CounterRng rng(505, 0);
    double worst = -INFINITY, gap = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 2;
        const int q = n + 1 + (trial / 2) % 2;
        const Cluster cl = bubble_from_curvatures(n, random_zero_sum(rng, q, 0.4));
        const MobiusField f{rng.on_sphere(n + 1)};
        const AreaVariation av = first_variation_area(cl, f, 100000, 5050 + trial);
        const MeasureReport fd = perimeter_derivative_fd(cl, f, 1e-2, 1000000, 5150 + trial);
        const double bound = 3.0 * std::hypot(av.delta_a.std_error, fd.std_error) + 1e-4;
        worst = std::max(worst, std::abs(av.delta_a.value - fd.value) - bound);
        gap = std::max(gap, av.identity_gap);
    }
    return {worst < 0.0 && gap < 1e-12,
            fmt("worst |dA - FD| - (3 sigma + 1e-4) = %.2e, Lagrange identity gap %.1e", worst, gap)};
}

// 6. Boost derivative of the mean curvature equals (n-1) <theta, c_ij>.
Outcome jacobi_criterion() {
    CounterRng rng(606, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        const int q = n + 1;
        const Cluster cl = bubble_from_curvatures(n, random_zero_sum(rng, q, 0.5));
        const int i = static_cast<int>(rng.uniform() * q);
        const int j = (i + 1 + static_cast<int>(rng.uniform() * (q - 1))) % q;
        const Vector theta = rng.on_sphere(n + 1);
        const double exact = (n - 1) * theta.dot(cl.center(i) - cl.center(j));
        worst = std::max(worst, std::abs(jacobi_fd(cl, i, j, theta, 1e-4) - exact));
    }
    return {worst < 1e-4, fmt("max |FD - (n-1)<theta, c_ij>| = %.2e over 20 pairs (tol 1e-4)", worst)};
}

// 7. Skew fields of perpendicular bubbles are null for Q^0.
Outcome skew_criterion() {
    std::string detail;
    bool pass = true;
    CounterRng rng(707, 0);
    for (int q : {3, 4}) {
        const int n = q - 1;
        const Cluster cl = perpendicular_bubble(n, random_zero_sum(rng, q, 0.3));
        const SkewField f{random_zero_sum(rng, q, 1.0), Vector::Unit(n + 1, n)};
        const IndexFormReport r = index_form_q0(cl, f, 400000, 7070 + q);
        const double z = std::abs(r.value.value) / r.value.std_error;
        pass = pass && z < 3.0;
        detail += fmt("q=%d: Q0 = %.2e +- %.1e (z %.2f); ", q, r.value.value, r.value.std_error, z);
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

// 8. Surface moments of Euclidean standard bubbles.
Outcome isotropy_criterion() {
    std::string detail;
    bool pass = true;
    for (int q = 2; q <= 4; ++q) {
        const EuclideanView v = to_euclidean(equal_volume_bubble(3, q));
        const double bound = suggest_bounding_radius(v, 20000, 808);
        const MomentReport nc = surface_moment(v, Moment::NormalCenter, bound, 1000000, 8080 + q);
        const MomentReport iso = surface_moment(v, Moment::Isotropy, bound, 1000000, 8180 + q);
        const double a1 = nc.value.norm(), b1 = 3.0 * nc.std_error.norm();
        const double a2 = iso.value.norm(), b2 = 3.0 * iso.std_error.norm();
        pass = pass && a1 <= b1 + 1e-12 && a2 <= b2 + 1e-12;
        detail += fmt("q=%d: |n(x)c| %.1e vs %.1e, |nn - Id/n| %.1e vs %.1e; ", q, a1, b1, a2, b2);
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

// 9. Graph counts and H1 of reference complexes.
Outcome combinatorics_criterion() {
    const std::size_t a = enumerate_graphs(4, {GraphFilter::TwoConnected}).size();
    const std::size_t b = enumerate_graphs(5, {GraphFilter::MinDegree3}).size();
    bool complete_ok = true;
    for (int q = 2; q <= 6; ++q)
        for (Field f : {Field::GF2, Field::Q}) complete_ok = complete_ok && homology_h1(complete_complex(q), f) == 0;
    IncidenceComplex cycle;
    cycle.q = 4;
    for (int i = 0; i < 4; ++i) cycle.add_edge(i, (i + 1) % 4);
    const int h_gf2 = homology_h1(cycle, Field::GF2), h_q = homology_h1(cycle, Field::Q);
    return {a == 3 && b == 3 && complete_ok && h_gf2 == 1 && h_q == 1,
            fmt("two_connected(4) = %zu, min_degree_3(5) = %zu, H1(complete, q<=6) %s, H1(4-cycle) = %d/%d", a, b,
                complete_ok ? "= 0" : "!= 0", h_gf2, h_q)};
}

// 10. Maximum principle on random weighted graphs.
Outcome max_principle_criterion() {
    CounterRng rng(1010, 0);
    int failures = 0;
    double residual = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int v = 3 + static_cast<int>(rng.uniform() * 7);
        for (;;) {
            std::vector<WeightedEdge> es;
            for (int a = 0; a < v; ++a)
                for (int b = a + 1; b < v; ++b)
                    if (rng.uniform() < 0.5) es.push_back({a, b, 0.1 + 2.0 * rng.uniform()});
            const WeightedGraph g(v, es);
            const int s = static_cast<int>(rng.uniform() * v);
            const int t = (s + 1 + static_cast<int>(rng.uniform() * (v - 1))) % v;
            if (!g.connected() || !g.connected(s)) continue;
            // Oracle: ground the sink, solve the reduced system densely, shift to zero mean.
            const Matrix l = laplacian(g);
            Vector rhs = Vector::Zero(v);
            rhs[s] = 1.0;
            rhs[t] = -1.0;
            std::vector<int> keep;
            for (int i = 0; i < v; ++i)
                if (i != t) keep.push_back(i);
            Matrix lr(v - 1, v - 1);
            Vector br(v - 1);
            for (int r = 0; r < v - 1; ++r) {
                br[r] = rhs[keep[static_cast<std::size_t>(r)]];
                for (int c = 0; c < v - 1; ++c) lr(r, c) = l(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
            }
            const Vector xr = lr.fullPivLu().solve(br);
            Vector oracle = Vector::Zero(v);
            for (int r = 0; r < v - 1; ++r) oracle[keep[static_cast<std::size_t>(r)]] = xr[r];
            oracle.array() -= oracle.mean();
            try {
                const Vector a = max_principle_solve(g, s, t);
                residual = std::max(residual, (a - oracle).cwiseAbs().maxCoeff());
                for (int i = 0; i < v; ++i)
                    if (i != s && !(a[s] > a[i])) ++failures;
            } catch (const Error&) {
                ++failures;
            }
            break;
        }
    }
    return {failures == 0 && residual < 1e-9,
            fmt("200 graphs: %d violations, max deviation from grounded solve %.1e", failures, residual)};
}

// 11. Bubble rings: angle bound for q <= 7, heptagon for q = 8.
Outcome ring_criterion() {
    bool pass = true;
    std::string detail;
    CounterRng rng(1111, 0);
    for (int q = 4; q <= 7; ++q) {
        Vector k(q - 1);
        for (int i = 0; i < q - 1; ++i) k[i] = 0.5 + rng.uniform();
        const RingVerdict r = ring_feasibility(q, k);
        const double expected = (q - 1) * 120.0 - (q - 3) * 180.0;
        const bool zero = std::abs(r.angle_excess) < 1e-9;
        pass = pass && !r.feasible && r.angle_excess >= -1e-9 && std::abs(r.angle_excess - expected) < 1e-9 &&
               zero == (q == 7);
        detail += fmt("q=%d excess %.0f; ", q, r.angle_excess);
    }
    const RingGeometry hept = heptagon_ring();
    const RingVerdict h = ring_feasibility(8, hept.radii.cwiseInverse(), hept);
    pass = pass && h.feasible && h.planar_checked && h.planar_ok;
    detail += fmt("q=8 heptagon %s", h.feasible && h.planar_ok ? "feasible" : "rejected");
    return {pass, detail};
}

// 12. Stereographic projection round trip and membership.
Outcome projection_criterion() {
    CounterRng rng(1212, 0);
    double trip = 0.0, point_trip = 0.0;
    long mismatches = 0, ties = 0;
    bool complex_ok = true;
    std::vector<Cluster> clusters{banded(-0.05)};
    for (int s = 0; s < 5; ++s) {
        const int n = 2 + s % 2;
        clusters.push_back(bubble_from_curvatures(n, random_zero_sum(rng, n + 1 + s % 2, 0.5)));
    }
    const long per_cluster = 100000 / static_cast<long>(clusters.size()) + 1;
    for (const Cluster& cl : clusters) {
        const EuclideanView v = to_euclidean(cl);
        const Cluster back =
            from_euclidean(v.euclid_centers(), v.euclid_curvatures(), v.spherical_offsets(), v.pole());
        trip = std::max({trip, max_abs(back.centers() - cl.centers()), max_abs(back.curvatures() - cl.curvatures())});
        complex_ok = complex_ok && extract_complex_exact(back) == extract_complex_exact(cl);
        for (long s = 0; s < per_cluster; ++s) {
            CounterRng prng(derive_seed(1213, static_cast<std::uint64_t>(cl.q() * 7 + cl.n())), static_cast<std::uint64_t>(s));
            const Vector p = prng.on_sphere(cl.n() + 1);
            if ((p - v.pole()).norm() < 1e-6) continue;
            const Vector x = v.to_plane(p);
            point_trip = std::max(point_trip, (v.to_sphere(x) - p).norm() / std::max(1.0, x.norm()));
            Vector f = cl.functionals(p);
            std::sort(f.data(), f.data() + f.size());
            if (f[1] - f[0] < 1e-9) {
                ++ties;
                continue;
            }
            if (cell_index_lowest(cl, p) != v.cell_index_lowest(x)) ++mismatches;
        }
    }
    return {trip < 1e-12 && point_trip < 1e-12 && mismatches == 0 && complex_ok,
            fmt("parameter round trip %.1e, point round trip %.1e (tol 1e-12), %ld membership mismatches "
                "(%ld ties skipped), complex %s",
                trip, point_trip, mismatches, ties, complex_ok ? "preserved" : "changed")};
}

// 13. Tangent cones at triple and quadruple points.
Outcome blowup_criterion() {
    CounterRng rng(1313, 0);
    int y = 0, t = 0, bad = 0;
    double sum = 0.0, unit = 0.0;
    auto normal = [](const Cluster& cl, int i, int j, const Vector& p) {
        return Vector(cl.quasi_center(i, j) + cl.curvature(i, j) * p);
    };
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 2 + trial % 2;
        const int q = n + 2;
        const Cluster cl = bubble_from_curvatures(n, random_zero_sum(rng, q, 0.4));
        std::vector<std::vector<int>> sets;
        for (int a = 0; a < q; ++a)
            for (int b = a + 1; b < q; ++b)
                for (int c = b + 1; c < q; ++c) {
                    sets.push_back({a, b, c});
                    if (n >= 3)
                        for (int d = c + 1; d < q; ++d) sets.push_back({a, b, c, d});
                }
        for (const auto& idx : sets) {
            const Probe pr = probe_meeting(cl, idx, default_probe_samples(n), 1314);
            if (!pr.found) continue;
            const Vector& p = *pr.witness;
            const BlowUpCone cone = blow_up(cl, p);
            const bool triple = idx.size() == 3;
            if (cone.cells == idx && cone.type == (triple ? ConeType::Y : ConeType::T))
                ++(triple ? y : t);
            else
                ++bad;
            const int m = static_cast<int>(idx.size());
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j) {
                    unit = std::max(unit, std::abs(normal(cl, idx[i], idx[j], p).norm() - 1.0));
                    for (int k = j + 1; k < m; ++k)
                        sum = std::max(sum, (normal(cl, idx[i], idx[j], p) + normal(cl, idx[j], idx[k], p) +
                                             normal(cl, idx[k], idx[i], p)).norm());
                }
        }
    }
    return {bad == 0 && y > 0 && t > 0 && sum < 1e-9 && unit < 1e-9,
            fmt("%d Y cones, %d T cones on S^3, %d misclassified, max |n_ij + n_jk + n_ki| %.1e, max ||n_ij| - 1| %.1e",
                y, t, bad, sum, unit)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gram", gram_criterion},
        {"mobius-invariance", mobius_criterion},
        {"triple-bubble", triple_bubble_criterion},
        {"volume-solver", volume_solver_criterion},
        {"lagrange", lagrange_criterion},
        {"jacobi", jacobi_criterion},
        {"skew-q0", skew_criterion},
        {"isotropy", isotropy_criterion},
        {"combinatorics", combinatorics_criterion},
        {"max-principle", max_principle_criterion},
        {"ring-test", ring_criterion},
        {"projection", projection_criterion},
        {"blow-up", blowup_criterion},
    };
    int failed = 0, index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const Error& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2d %-18s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
