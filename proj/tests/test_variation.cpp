#include <gtest/gtest.h>

#include "bubbletk/variation.hpp"

using namespace bubbletk;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Cluster curved2() { return bubble_from_curvatures(2, vec({0.5, -0.1, -0.4})); }
Cluster curved3() { return bubble_from_curvatures(3, vec({0.4, -0.1, 0.2, -0.5})); }

Vector interface_point(const Cluster& cl, int i, int j, std::uint64_t seed) {
    const Probe pr = interface_nonempty(cl, i, j, 4096, seed);
    EXPECT_TRUE(pr.found);
    return *pr.witness;
}

// Jacobi operator on f = alpha + <beta, p> restricted to the interface sphere
// {<c, p> + k = 0} of S^n. The interface is a round (n-1)-sphere of radius
// r^2 = 1/(1+k^2) centered at e = -k c / |c|^2 with |II|^2 = (n-1) k^2 and
// Ric(n, n) = n-1; a linear function has Laplacian -(n-1)/r^2 <beta, p - e>.
double jacobi_oracle(int n, const Vector& c, double k, double alpha, const Vector& beta, const Vector& p) {
    const Vector e = -k * c / c.squaredNorm();
    const double r2inv = 1.0 + k * k;
    const double lap = -(n - 1) * r2inv * beta.dot(p - e);
    const double pot = (n - 1) * k * k + (n - 1);
    return lap + pot * (alpha + beta.dot(p));
}

}  // namespace

TEST(NormalSpeed, MatchesAmbientInnerProducts) {
    const Cluster cl = curved3();
    const Vector p = interface_point(cl, 0, 2, 1);
    const Vector nrm = cl.quasi_center(0, 2) + cl.curvature(0, 2) * p;
    const Vector theta = vec({0.2, -0.4, 0.1, 0.7});
    const Vector w = theta - theta.dot(p) * p;
    EXPECT_NEAR(normal_speed(MobiusField{theta}, cl, 0, 2, p).value, w.dot(nrm), 1e-12);
    Vector rot = Vector::Zero(4);
    rot[1] = p[3];
    rot[3] = -p[1];
    EXPECT_NEAR(normal_speed(RotationField{1, 3}, cl, 0, 2, p).value, rot.dot(nrm), 1e-12);
    EXPECT_NEAR(normal_speed(CoordinateField{theta}, cl, 2, 0, p).value, -theta.dot(p), 1e-15);
    EXPECT_THROW(field_vector(CoordinateField{theta}, p), Error);
}

TEST(FirstVariation, HemisphereUnderBoost) {
    // Normal speed <theta, c_01> = 1 everywhere on the equator, of normalized length 1/2.
    const Cluster cl = equal_volume_bubble(2, 2);
    const VolumeVariation vv = first_variation_volume(cl, MobiusField{vec({1, 0, 0})}, 1000, 1);
    EXPECT_NEAR(vv.delta_v[0].value, 0.5, 1e-12);
    EXPECT_NEAR(vv.delta_v[1].value, -0.5, 1e-12);
}

TEST(FirstVariation, SurfaceIntegralMatchesVolumeDifferences) {
    const Cluster cl = curved3();
    const FieldSpec f = MobiusField{vec({0.3, -0.2, 0.5, 0.1})};
    const VolumeVariation vv = first_variation_volume(cl, f, 100000, 2);
    const auto fd = volume_derivative_fd(cl, f, 1e-2, 400000, 3);
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        const auto& a = vv.delta_v[static_cast<std::size_t>(i)];
        const auto& b = fd[static_cast<std::size_t>(i)];
        EXPECT_NEAR(a.value, b.value, 5.0 * std::hypot(a.std_error, b.std_error) + 1e-3) << i;
        total += a.value;
    }
    EXPECT_NEAR(total, 0.0, 1e-12);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_EQ(vv.interface_integral(i, j), -vv.interface_integral(j, i));
}

TEST(FirstVariation, LagrangeIdentityAgainstPerimeterDifferences) {
    const Cluster cl = curved2();
    const FieldSpec f = MobiusField{vec({0.6, 0.3, -0.5})};
    const AreaVariation av = first_variation_area(cl, f, 200000, 4);
    EXPECT_LT(av.identity_gap, 1e-12);
    const MeasureReport fd = perimeter_derivative_fd(cl, f, 1e-2, 200000, 5);
    EXPECT_NEAR(av.delta_a.value, fd.value, 5.0 * std::hypot(av.delta_a.std_error, fd.std_error) + 1e-3);
}

TEST(FirstVariation, RotationsPreservePerimeter) {
    const Cluster cl = curved2();
    const MeasureReport fd = perimeter_derivative_fd(cl, RotationField{0, 2}, 1e-2, 50000, 6);
    EXPECT_NEAR(fd.value, 0.0, 5.0 * fd.std_error + 1e-9);
    EXPECT_NEAR(first_variation_area(cl, RotationField{0, 2}, 50000, 6).delta_a.value, 0.0, 1e-2);
}

TEST(Jacobi, ClosedFormsMatchTheLaplacianOracle) {
    const Cluster cl = curved3();
    const Vector theta = vec({0.3, -0.6, 0.2, 0.5});
    const Vector north = vec({0.0, 0.0, 0.0, 1.0});
    const Vector a = vec({0.3, -0.1, 0.0, -0.2});
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const Vector p = interface_point(cl, i, j, 7);
            const Vector c = cl.quasi_center(i, j);
            const double k = cl.curvature(i, j);
            EXPECT_NEAR(jacobi_closed_form(cl, i, j, MobiusField{theta}, p),
                        jacobi_oracle(3, c, k, theta.dot(c), k * theta, p), 1e-10);
            EXPECT_NEAR(jacobi_closed_form(cl, i, j, CoordinateField{theta}, p),
                        jacobi_oracle(3, c, k, 0.0, theta, p), 1e-10);
            EXPECT_NEAR(jacobi_closed_form(cl, i, j, SkewField{a, north}, p),
                        jacobi_oracle(3, c, k, 0.0, (a[i] - a[j]) * north, p), 1e-10);
            EXPECT_EQ(jacobi_closed_form(cl, i, j, RotationField{0, 1}, p), 0.0);
        }
}

TEST(Jacobi, BoostDerivativeOfMeanCurvature) {
    const Cluster cl = curved3();
    CounterRng rng(8, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector theta = rng.on_sphere(4);
        const int i = trial % 4, j = (trial + 1 + trial / 4) % 4;
        if (i == j) continue;
        const Vector p = interface_point(cl, i, j, 9);
        // Oracle: boosted homogeneous parameters by hand, curvature from the last column.
        const double h = 1e-4;
        const Matrix up = boost_closed_form(theta, h), um = boost_closed_form(theta, -h);
        const Matrix ckp = cl.homogeneous() * up.transpose(), ckm = cl.homogeneous() * um.transpose();
        const double dk = (-(ckp(i, 4) - ckp(j, 4)) + (ckm(i, 4) - ckm(j, 4))) / (2.0 * h);
        EXPECT_NEAR(-2.0 * dk, jacobi_closed_form(cl, i, j, MobiusField{theta}, p), 1e-6);
        EXPECT_NEAR(jacobi_fd(cl, i, j, theta), jacobi_closed_form(cl, i, j, MobiusField{theta}, p), 1e-6);
    }
}

TEST(Jacobi, RejectsPointsOffTheInterface) {
    const Cluster cl = curved3();
    try {
        jacobi_closed_form(cl, 0, 1, MobiusField{vec({1, 0, 0, 0})}, -cl.center(0).normalized());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotOnInterface);
    }
}

TEST(IndexForm, SkewFieldsOfSymmetricBubblesAreNull) {
    const Vector north2 = vec({0, 0, 1});
    const Cluster c3 = perpendicular_bubble(2, vec({0.3, -0.1, -0.2}));
    const IndexFormReport r3 = index_form_q0(c3, SkewField{vec({0.5, -0.2, -0.3}), north2}, 100000, 1);
    EXPECT_NEAR(r3.value.value, 0.0, 4.0 * r3.value.std_error);
    EXPECT_GT(std::abs(r3.interface_term.value), 10.0 * r3.value.std_error);

    const Vector north3 = vec({0, 0, 0, 1});
    const Cluster c4 = perpendicular_bubble(3, vec({0.3, -0.1, 0.2, -0.4}));
    const IndexFormReport r4 = index_form_q0(c4, SkewField{vec({0.1, 0.4, -0.2, -0.3}), north3}, 60000, 2);
    EXPECT_NEAR(r4.value.value, 0.0, 4.0 * r4.value.std_error);
}

TEST(IndexForm, TracedVariantDropsTheBoundary) {
    const Cluster cl = perpendicular_bubble(2, vec({0.3, -0.1, -0.2}));
    const IndexFormReport r = index_form_q0(cl, CoordinateField{vec({0, 0, 1})}, 20000, 3, true);
    EXPECT_EQ(r.boundary_term.value, 0.0);
    EXPECT_EQ(r.value.value, r.interface_term.value);
    EXPECT_THROW(index_form_q0(equal_volume_bubble(1, 2), CoordinateField{vec({1, 0})}, 10, 1), Error);
}
